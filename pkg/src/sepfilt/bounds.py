"""Quantitative checks: point-density and coarea inequalities, greedy ball
packing, unit-ball volume estimation, and the final bound report.

Every inequality is evaluated with an explicit tolerance budget (ball
boundary credit plus quadrature error plus the configured slack); a check
only counts as violated when the residual falls below minus that budget.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational

import numpy as np

from .errors import CoverFailure, RadiusOrder

_COARSE_SAMPLES = 64


@dataclass(frozen=True)
class InequalityCheck:
    """One evaluated inequality: lhs <= rhs up to the stated budget."""

    kind: str
    center: int
    r1: float
    r2: float
    lhs: float
    rhs: float
    budget: float

    @property
    def residual(self):
        return self.rhs - self.lhs

    @property
    def violated(self):
        return self.residual < -self.budget

    def to_row(self):
        return [
            self.kind,
            self.center,
            self.r1,
            self.r2,
            self.lhs,
            self.rhs,
            self.residual,
            self.budget,
            int(self.violated),
        ]


def _cells_max_distance(geometry, cells, dist):
    if not cells:
        return np.empty((0,)), np.empty((0,))
    arr = np.array([list(cell) for cell in cells], dtype=np.int64)
    areas = np.array([geometry.face_volume(cell) for cell in cells])
    return dist[arr].max(axis=1), areas


def _credited_area(geometry, cells, dist, r):
    """Area of the cells inside a ball with per-node fractional credit.

    Returns (area, boundary credit), the credit being the total area of
    partially counted cells.
    """
    if not cells:
        return 0.0, 0.0
    arr = np.array([list(cell) for cell in cells], dtype=np.int64)
    areas = np.array([geometry.face_volume(cell) for cell in cells])
    inside = dist[arr] <= r
    counts = inside.sum(axis=1)
    size = arr.shape[1]
    full = counts == size
    partial = (counts > 0) & ~full
    area = float(areas[full].sum())
    area += float((areas[partial] * counts[partial] / size).sum())
    return area, float(areas[partial].sum())


def point_density_check(filtration, center, r1, r2, epsilon=None):
    """Compare #(Z_0 in B(p, r1)) (r2-r1)^n / n! against Vol B(p, r2) + eps.

    The budget is the ball-volume boundary credit at r2.  ``epsilon``
    defaults to the filtration's total configured slack.
    """
    if not 0 < r1 < r2:
        raise RadiusOrder(f"need 0 < r1 < r2, got r1={r1}, r2={r2}")
    geometry = filtration.geometry
    n = filtration.dim
    if epsilon is None:
        epsilon = filtration.epsilon_total()
    dist = geometry.graph.distances_from(center)
    z0 = filtration.z0_nodes()
    count = int(sum(1 for node in z0 if dist[node] <= r1))
    lhs = count * (r2 - r1) ** n / math.factorial(n)
    volume, boundary = geometry.ball_volume_detail(center, r2)
    return InequalityCheck(
        "density", int(center), float(r1), float(r2), lhs, volume + epsilon, boundary
    )


def level_trace_checks(filtration, center, r1, r2):
    """The level-by-level chain of density inequalities, one check per level.

    Level i compares #(Z_0 in B(p, r1)) (r2-r1)^i / i! with the credited
    area of Z_i in B(p, r2) plus the accumulated slack sum 2 eps_j R^(i-j).
    """
    if not 0 < r1 < r2:
        raise RadiusOrder(f"need 0 < r1 < r2, got r1={r1}, r2={r2}")
    geometry = filtration.geometry
    n = filtration.dim
    R = filtration.config.radius
    schedule = filtration.epsilon_schedule()
    dist = geometry.graph.distances_from(center)
    z0 = filtration.z0_nodes()
    count = int(sum(1 for node in z0 if dist[node] <= r1))
    checks = []
    for i in range(n + 1):
        lhs = count * (r2 - r1) ** i / math.factorial(i)
        slack = sum(2.0 * schedule[j] * R ** (i - j) for j in range(min(i, n)))
        if i == n:
            area, boundary = geometry.ball_volume_detail(center, r2)
        else:
            area, boundary = _credited_area(
                geometry, filtration.level_cells(i), dist, r2
            )
        checks.append(
            InequalityCheck(
                f"trace{i}",
                int(center),
                float(r1),
                float(r2),
                lhs,
                area + slack,
                boundary,
            )
        )
    return checks


def coarea_check(filtration, level, center, r1, r2, samples=_COARSE_SAMPLES):
    """Trapezoid check of the sliced-area inequality for one level.

    Integrates the area of Z_level inside B(p, rho) for rho in [r1, r2] and
    compares with the credited area of the parent level in the annulus plus
    2 eps R.  The budget covers quadrature error and both boundary credits.
    """
    if not 0 < r1 < r2:
        raise RadiusOrder(f"need 0 < r1 < r2, got r1={r1}, r2={r2}")
    geometry = filtration.geometry
    R = filtration.config.radius
    eps = filtration.epsilon_schedule()[level]
    dist = geometry.graph.distances_from(center)
    z_cells = filtration.level_cells(level)
    max_dist, areas = _cells_max_distance(geometry, z_cells, dist)
    order = np.argsort(max_dist)
    sorted_dist = max_dist[order]
    cumulative = np.concatenate(([0.0], np.cumsum(areas[order])))

    def sliced_area(rho):
        return float(cumulative[np.searchsorted(sorted_dist, rho, side="right")])

    rhos = np.linspace(r1, r2, samples)
    values = np.array([sliced_area(rho) for rho in rhos])
    integral = float(np.trapezoid(values, rhos))
    step = (r2 - r1) / (samples - 1)
    quad_budget = step * float(values.max() - values.min()) if samples > 1 else 0.0

    parent_level = level + 1
    if parent_level == filtration.dim:
        vol2, b2 = geometry.ball_volume_detail(center, r2)
        vol1, b1 = geometry.ball_volume_detail(center, r1)
    else:
        parent_cells = filtration.level_cells(parent_level)
        vol2, b2 = _credited_area(geometry, parent_cells, dist, r2)
        vol1, b1 = _credited_area(geometry, parent_cells, dist, r1)
    annulus = vol2 - vol1
    rhs = annulus + 2.0 * eps * R
    return InequalityCheck(
        f"coarea{level}",
        int(center),
        float(r1),
        float(r2),
        integral,
        rhs,
        quad_budget + b1 + b2,
    )


@dataclass(frozen=True)
class Packing:
    """Greedy maximal packing of small balls centered on 0-level points."""

    centers: tuple
    r_small: float
    r_big: float
    covered: bool

    @property
    def count(self):
        return len(self.centers)


def greedy_packing(z0_nodes, geometry, r_small=0.25, r_big=0.5):
    """Greedy maximal collection of disjoint balls centered at Z_0 points.

    Centers are chosen in sorted node order, keeping pairwise graph distance
    strictly above 2 r_small; the concentric r_big balls must cover all of
    Z_0, else CoverFailure (impossible for a maximal packing when
    r_big >= 2 r_small unless the metric itself is broken).
    """
    if not 0 < r_small < r_big:
        raise ValueError("need 0 < r_small < r_big")
    nodes = sorted(int(v) for v in z0_nodes)
    centers = []
    for node in nodes:
        if all(
            geometry.graph.distances_from(center)[node] > 2.0 * r_small
            for center in centers
        ):
            centers.append(node)
    for node in nodes:
        if not any(
            geometry.graph.distances_from(center)[node] <= r_big
            for center in centers
        ):
            raise CoverFailure(
                f"point {node} is not covered by any doubled packing ball"
            )
    return Packing(tuple(centers), float(r_small), float(r_big), True)


@dataclass(frozen=True)
class V1Estimate:
    """Max unit-ball volume over all nodes, with its scope caveat."""

    value: float
    argmax_node: int
    boundary_credit: float
    radius: float
    systole: float | None
    warning: str | None

    def to_json(self):
        return {
            "value": self.value,
            "argmax_node": self.argmax_node,
            "boundary_credit": self.boundary_credit,
            "radius": self.radius,
            "systole": self.systole,
            "warning": self.warning,
        }


def estimate_v1(geometry, radius=1.0):
    """Maximize ball_volume(p, radius) over the metric-graph nodes.

    This is the base-space maximum; it equals the supremum over covers only
    when the systole exceeds twice the radius, so shorter (or unknown)
    systoles attach a warning instead of a silent number.
    """
    best, best_node, best_boundary = -1.0, 0, 0.0
    for node in range(geometry.n_nodes):
        value, boundary = geometry.ball_volume_detail(node, radius)
        if value > best:
            best, best_node, best_boundary = value, node, boundary
    systole = geometry.base.metadata.get("systole")
    warning = None
    if systole is None:
        warning = (
            "systole unknown: the node maximum may undershoot the "
            "cover supremum"
        )
    elif systole <= 2.0 * radius:
        warning = (
            f"systole {systole} <= {2 * radius}: the node maximum may "
            "undershoot the cover supremum"
        )
    return V1Estimate(best, best_node, best_boundary, float(radius), systole, warning)


def _exact_or_float(value):
    if isinstance(value, Rational):
        return Fraction(value)
    return float(value)


@dataclass(frozen=True)
class BoundReport:
    """Assembled upper bounds and the vanishing flag for one run."""

    dimension: int
    v1: object
    vol_m: object
    z0_count: int
    rainbow_bound: object
    constant_bound: object
    vanishing: bool
    vanishing_consistent: bool
    tolerances: dict

    def to_json(self):
        def plain(x):
            if isinstance(x, Fraction):
                return {"numerator": x.numerator, "denominator": x.denominator,
                        "value": float(x)}
            return x

        return {
            "dimension": self.dimension,
            "v1": plain(self.v1),
            "vol_m": plain(self.vol_m),
            "z0_count": self.z0_count,
            "rainbow_bound": plain(self.rainbow_bound),
            "constant_bound": plain(self.constant_bound),
            "vanishing": self.vanishing,
            "vanishing_consistent": self.vanishing_consistent,
            "tolerances": {k: plain(v) for k, v in sorted(self.tolerances.items())},
        }


def bound_report(filtration, census, v1, vol_m, tolerances=None):
    """Assemble the rainbow and constant bounds plus the vanishing flag.

    ``rainbow_bound`` is 2^n * #Z_0 and ``constant_bound`` is
    16^n (n!)^2 v1 vol_m; arithmetic is exact when v1 and vol_m are
    rational.  Vanishing means v1 < 1/n!, in which case a converged
    filtration must have an empty 0-level.
    """
    n = filtration.dim
    v1 = _exact_or_float(v1)
    vol_m = _exact_or_float(vol_m)
    z0_count = census.z0_count if census is not None else len(filtration.z0_nodes())
    rainbow_bound = (2**n) * z0_count
    factor = 16**n * math.factorial(n) ** 2
    if isinstance(v1, Fraction) and isinstance(vol_m, Fraction):
        constant_bound = Fraction(factor) * v1 * vol_m
        vanishing = v1 < Fraction(1, math.factorial(n))
    else:
        constant_bound = factor * float(v1) * float(vol_m)
        vanishing = float(v1) < 1.0 / math.factorial(n)
    record = dict(tolerances or {})
    record.setdefault("epsilon_total", filtration.epsilon_total())
    return BoundReport(
        dimension=n,
        v1=v1,
        vol_m=vol_m,
        z0_count=z0_count,
        rainbow_bound=rainbow_bound,
        constant_bound=constant_bound,
        vanishing=bool(vanishing),
        vanishing_consistent=(not vanishing) or rainbow_bound == 0,
        tolerances=record,
    )
