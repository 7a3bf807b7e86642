"""Area-minimizing R-separating subpolyhedra and separating filtrations.

The minimizer is a deterministic seeded local search over facet subsets of a
parent complex: greedy pruning from the full facet skeleton, Voronoi-style
reseeding from greedily packed centers, and ball-replacement moves that swap
the part of a candidate inside a ball for the cut facets along the ball
boundary.  Every accepted state carries per-component ball certificates.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass

import numpy as np

from .adjacency import CellSystem, fit_in_ball, proper_subfaces
from .complexes import Subpolyhedron
from .errors import DimensionMismatch, Infeasible, SeparationViolation

_AREA_TOL = 1e-12


@dataclass(frozen=True)
class SeparationConfig:
    """Knobs for one filtration run; all randomness flows from rng_seed.

    ``slack_schedule`` fixes the per-level minimization slacks directly;
    when omitted, level i receives eps / (2 n R^(n-i)), which makes the
    total accumulated slack sum 2 eps_i R^(n-i) equal the configured
    epsilon.
    """

    radius: float
    epsilon: float = 1e-6
    move_budget: int = 40
    rng_seed: int = 0
    subdivision_depth: int = 2
    slack_schedule: tuple | None = None

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError("radius must be positive")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if self.slack_schedule is not None:
            schedule = tuple(float(e) for e in self.slack_schedule)
            if any(e <= 0 for e in schedule):
                raise ValueError("slack schedule entries must be positive")
            object.__setattr__(self, "slack_schedule", schedule)

    def epsilon_schedule(self, n):
        if self.slack_schedule is not None:
            if len(self.slack_schedule) != n:
                raise ValueError(
                    f"slack schedule has {len(self.slack_schedule)} entries, "
                    f"need {n}"
                )
            return self.slack_schedule
        R = self.radius
        return tuple(self.epsilon / (2.0 * n * R ** (n - i)) for i in range(n))

    def epsilon_total(self, n):
        return sum(2.0 * e * self.radius ** (n - i)
                   for i, e in enumerate(self.epsilon_schedule(n)))

    def to_json(self):
        return {
            "radius": self.radius,
            "epsilon": self.epsilon,
            "move_budget": self.move_budget,
            "rng_seed": self.rng_seed,
            "subdivision_depth": self.subdivision_depth,
            "slack_schedule": (
                list(self.slack_schedule) if self.slack_schedule else None
            ),
        }

    @classmethod
    def from_json(cls, data):
        data = dict(data)
        schedule = data.pop("slack_schedule", None)
        return cls(
            **data,
            slack_schedule=tuple(schedule) if schedule else None,
        )


@dataclass(frozen=True)
class ComponentCert:
    """Ball certificate for one complement component."""

    cells: int
    center: int | None
    radius: float
    witness_pair: tuple | None = None

    def to_json(self):
        return {
            "cells": self.cells,
            "center": self.center,
            "radius": self.radius,
            "witness_pair": list(self.witness_pair) if self.witness_pair else None,
        }


@dataclass(frozen=True)
class SeparationCheck:
    """Outcome of is_r_separating with one certificate per component."""

    separating: bool
    components: tuple

    def __bool__(self):
        return self.separating


def _as_cell_set(parent, candidate):
    if isinstance(candidate, Subpolyhedron):
        return set(candidate.cells)
    return {tuple(sorted(cell)) for cell in candidate}


def _system_for(parent):
    cached = getattr(parent, "_cell_system", None)
    if cached is None:
        cached = CellSystem(parent.cell_tuples)
        try:
            parent._cell_system = cached
        except AttributeError:
            pass
    return cached


def is_r_separating(parent, candidate, radius):
    """Check that every component of parent minus candidate fits a ball.

    Components are computed on the dual adjacency of the parent's top cells,
    with passage blocked exactly by faces of candidate cells.  The returned
    check carries, per component, a witnessing center or a violating pair.
    """
    blocked = _as_cell_set(parent, candidate)
    system = _system_for(parent)
    expected = parent.dim  # facet arity
    for cell in blocked:
        if len(cell) != expected or (
            expected > 0 and cell not in system.face_cofaces
        ):
            raise DimensionMismatch(
                f"candidate cell {cell} is not a facet of a {parent.dim}-cell"
            )
    geometry = parent.root
    certs = []
    ok = True
    for group in system.component_groups(blocked):
        nodes = system.group_nodes(group)
        fit = fit_in_ball(geometry, nodes, radius)
        certs.append(
            ComponentCert(len(group), fit.center, fit.radius, fit.witness_pair)
        )
        ok = ok and fit.fits
    return SeparationCheck(ok, tuple(certs))


def sphere_replacement_move(parent, candidate, center, rho):
    """Swap the part of a candidate inside a ball for the ball's cut facets.

    Cells with a node at graph distance strictly below rho count as inside;
    candidate cells all of whose nodes are strictly inside are removed, and
    every facet between an inside and an outside cell is added.  When no node
    other than the center is strictly inside, the ball is below the mesh
    resolution and the candidate is returned unchanged.
    """
    if rho <= 0:
        raise ValueError("rho must be positive")
    blocked = _as_cell_set(parent, candidate)
    system = _system_for(parent)
    geometry = parent.root
    dist = geometry.graph.distances_from(center)
    strict = dist < rho
    if int(strict.sum()) <= 1:
        return Subpolyhedron(parent, blocked)
    inside = np.array(
        [bool(strict[cell].any()) for cell in system.cell_nodes], dtype=bool
    )
    removed = {
        facet for facet in blocked if bool(strict[np.array(facet)].all())
    }
    cut = set()
    for facet in system.facets:
        cofaces = system.face_cofaces[facet]
        states = {bool(inside[i]) for i in cofaces}
        if len(states) == 2:
            cut.add(facet)
    return Subpolyhedron(parent, (blocked - removed) | cut)


@dataclass
class MinimizeResult:
    """Best separating candidate found plus its certificates and slack."""

    subpolyhedron: Subpolyhedron
    area: float
    certificates: tuple
    slack: float
    slack_kind: str  # "certified" for provably optimal, else "assumed"
    moves_used: int


class _PruneState:
    """Incrementally maintained components while facets are removed."""

    def __init__(self, system, geometry, blocked, radius):
        self.system = system
        self.geometry = geometry
        self.radius = radius
        self.z = set(blocked)
        self.cover_count = {}
        for facet in self.z:
            for face in proper_subfaces(facet):
                self.cover_count[face] = self.cover_count.get(face, 0) + 1
        self.area = float(
            sum(geometry.face_volume(facet) for facet in self.z)
        )
        self.labels = None
        self.comps = None
        self.feasible = None
        self._recompute()

    def _recompute(self):
        labels = self.system.components(self.z)
        groups = {}
        for index, label in enumerate(labels):
            groups.setdefault(label, []).append(index)
        self.labels = labels
        self.comps = {}
        self.feasible = True
        for label, members in groups.items():
            nodes = self.system.group_nodes(members)
            fit = fit_in_ball(self.geometry, nodes, self.radius)
            if not fit.fits:
                self.feasible = False
            self.comps[label] = {
                "cells": members,
                "nodes": nodes,
                "fit": fit,
            }

    def _opened_faces(self, facet):
        opened = [facet]
        for face in proper_subfaces(facet):
            if self.cover_count.get(face, 0) == 1:
                opened.append(face)
        return opened

    def try_remove(self, facet):
        """Remove one facet if the merge it causes still fits in a ball."""
        affected = set()
        for face in self._opened_faces(facet):
            for cell in self.system.face_cofaces.get(face, ()):
                affected.add(self.labels[cell])
        if not affected:
            self._remove_bookkeeping(facet)
            return True
        if len(affected) == 1:
            label = next(iter(affected))
            if not self.comps[label]["fit"].fits:
                return False  # do not touch already-broken components
            self._remove_bookkeeping(facet)
            return True
        parts = [self.comps[label] for label in affected]
        if any(not part["fit"].fits for part in parts):
            return False
        nodes = np.unique(np.concatenate([part["nodes"] for part in parts]))
        hint = parts[0]["fit"].center
        fit = fit_in_ball(self.geometry, nodes, self.radius, hint=hint)
        if not fit.fits:
            return False
        self._remove_bookkeeping(facet)
        target = min(affected)
        merged_cells = []
        for label in sorted(affected):
            merged_cells.extend(self.comps[label]["cells"])
            if label != target:
                del self.comps[label]
        for cell in merged_cells:
            self.labels[cell] = target
        self.comps[target] = {"cells": merged_cells, "nodes": nodes, "fit": fit}
        return True

    def _remove_bookkeeping(self, facet):
        self.z.discard(facet)
        self.area -= self.geometry.face_volume(facet)
        for face in proper_subfaces(facet):
            self.cover_count[face] -= 1

    def certificates(self):
        certs = []
        for label in sorted(self.comps):
            comp = self.comps[label]
            fit = comp["fit"]
            certs.append(
                ComponentCert(
                    len(comp["cells"]), fit.center, fit.radius, fit.witness_pair
                )
            )
        return tuple(certs)


def _prune(system, geometry, blocked, radius, order_key):
    """First-improvement removal passes until no facet can be dropped."""
    state = _PruneState(system, geometry, blocked, radius)
    improved = True
    while improved:
        improved = False
        for facet in sorted(state.z, key=order_key):
            if state.try_remove(facet):
                improved = True
    return state


def _voronoi_seed(system, geometry, facets, radius):
    """Cross facets of a nearest-center partition of the parent cells.

    Centers are a greedy maximal node set at pairwise distance > radius;
    each cell goes to the center minimizing its farthest-node distance.
    Parts that fit no ball fall back to all their internal facets.
    """
    graph = geometry.graph
    centers = []
    for node in range(graph.n_nodes):
        if all(graph.distances_from(c)[node] > radius for c in centers):
            centers.append(node)
    if not centers:
        return None
    rows = np.stack([graph.distances_from(c) for c in centers])
    owner = {}
    for index, cell in enumerate(system.cell_nodes):
        owner[index] = int(np.argmin(rows[:, cell].max(axis=1)))
    candidate = set()
    facet_pool = set(facets)
    for facet in system.facets:
        cofaces = system.face_cofaces[facet]
        if len({owner[i] for i in cofaces}) > 1:
            if facet not in facet_pool:
                return None  # restricted candidate set cannot express this cut
            candidate.add(facet)
    # repair parts that fit no ball by isolating their cells
    for _ in range(len(centers)):
        check_system_labels = system.component_groups(candidate)
        bad = []
        for group in check_system_labels:
            nodes = system.group_nodes(group)
            if not fit_in_ball(geometry, nodes, radius).fits:
                bad.append(group)
        if not bad:
            return candidate
        for group in bad:
            for index in group:
                for facet in itertools.combinations(system.cells[index], system.dim):
                    if facet in facet_pool:
                        candidate.add(facet)
    return candidate


def minimize_separating(
    parent,
    radius,
    epsilon,
    move_budget=40,
    rng_seed=0,
    candidate_facets=None,
):
    """Local-search a low-area R-separating facet set of the parent.

    Deterministic for a fixed seed.  The search prunes from the full facet
    skeleton under several deterministic orders, reseeds from greedy center
    partitions, and spends the move budget on ball-replacement proposals.
    Raises Infeasible when not even the full candidate facet set separates.
    """
    system = _system_for(parent)
    geometry = parent.root
    if not system.cells:
        empty = Subpolyhedron(parent, ())
        return MinimizeResult(empty, 0.0, (), 0.0, "certified", 0)
    if candidate_facets is None:
        facets = list(system.facets)
    else:
        facets = sorted({tuple(sorted(f)) for f in candidate_facets})
    rng = random.Random(rng_seed)

    empty_check = is_r_separating(parent, (), radius)
    if empty_check.separating:
        empty = Subpolyhedron(parent, ())
        return MinimizeResult(
            empty, 0.0, empty_check.components, 0.0, "certified", 0
        )

    full = set(facets)
    order_index = {facet: i for i, facet in enumerate(facets)}
    area_of = {facet: geometry.face_volume(facet) for facet in facets}

    def lex_key(facet):
        return order_index[facet]

    def area_key(facet):
        return (-area_of[facet], order_index[facet])

    base = _PruneState(system, geometry, full, radius)
    if not base.feasible:
        raise Infeasible(
            "the full candidate facet set is not separating at this radius"
        )

    best_state = None
    moves_used = 0

    def consider(state):
        nonlocal best_state
        if state is None or not state.feasible:
            return
        if best_state is None or state.area < best_state.area - _AREA_TOL:
            best_state = state

    consider(_prune(system, geometry, full, radius, lex_key))
    consider(_prune(system, geometry, full, radius, area_key))

    if candidate_facets is None:
        for theta in (1.0, 0.75, 0.5):
            seed = _voronoi_seed(system, geometry, facets, radius * theta)
            if seed is not None:
                consider(_prune(system, geometry, seed, radius, lex_key))

    shuffle_orders = 2 if move_budget > 0 else 0
    for _ in range(shuffle_orders):
        shuffled = facets[:]
        rng.shuffle(shuffled)
        shuffled_index = {facet: i for i, facet in enumerate(shuffled)}
        consider(
            _prune(system, geometry, full, radius, lambda f: shuffled_index[f])
        )

    # ball-replacement proposals around the incumbent
    h = geometry.max_cell_diameter
    lo = min(0.25 * radius, max(radius - h, 0.05 * radius))
    hi = max(lo + 1e-9, radius * 0.999)
    while moves_used < move_budget and best_state is not None:
        moves_used += 1
        center = rng.randrange(geometry.n_nodes)
        rho = rng.uniform(lo, hi)
        moved = sphere_replacement_move(
            parent, set(best_state.z), center, rho
        )
        cells = set(moved.cells)
        if not cells.issubset(full):
            cells &= full
        if cells == best_state.z:
            continue
        state = _prune(system, geometry, cells, radius, lex_key)
        consider(state)

    sub = Subpolyhedron(parent, sorted(best_state.z))
    return MinimizeResult(
        sub,
        best_state.area,
        best_state.certificates(),
        0.0 if best_state.area == 0.0 else epsilon,
        "certified" if best_state.area == 0.0 else "assumed",
        moves_used,
    )


@dataclass
class FiltrationLevel:
    """One level of a separating filtration with its search record."""

    subpolyhedron: Subpolyhedron
    area: float
    slack: float
    slack_kind: str
    certificates: tuple


class Filtration:
    """Nested separating levels Z_n >= ... >= Z_0 over one geometry."""

    def __init__(self, geometry, config, levels):
        self.geometry = geometry
        self.config = config
        if len(levels) != geometry.dim:
            raise ValueError("expected one level per dimension below the top")
        self.levels = tuple(levels)  # index i holds Z_i, i = 0..n-1

    @property
    def dim(self):
        return self.geometry.dim

    def level(self, i) -> Subpolyhedron:
        return self.levels[i].subpolyhedron

    def level_cells(self, i):
        """Cells of Z_i; the top level returns the geometry's cells."""
        if i == self.dim:
            return self.geometry.cells
        return self.levels[i].subpolyhedron.cells

    def z0_nodes(self):
        return tuple(cell[0] for cell in self.levels[0].subpolyhedron.cells)

    def epsilon_schedule(self):
        return self.config.epsilon_schedule(self.dim)

    def epsilon_total(self):
        return self.config.epsilon_total(self.dim)

    def validate(self):
        """Re-verify nesting and separation of every level from scratch."""
        parent = self.geometry
        for i in range(self.dim - 1, -1, -1):
            level = self.levels[i]
            rebuilt = Subpolyhedron(parent, level.subpolyhedron.cells)
            check = is_r_separating(parent, rebuilt, self.config.radius)
            if not check.separating:
                raise SeparationViolation(
                    f"level {i} is not {self.config.radius}-separating"
                )
            parent = rebuilt
        return True

    def to_json(self):
        payload = {
            "config": self.config.to_json(),
            "dimension": self.dim,
            "levels": [],
        }
        for i, level in enumerate(self.levels):
            payload["levels"].append(
                {
                    "dim": i,
                    "cells": [list(cell) for cell in level.subpolyhedron.cells],
                    "area": level.area,
                    "slack": level.slack,
                    "slack_kind": level.slack_kind,
                    "components": [c.to_json() for c in level.certificates],
                }
            )
        return payload

    @classmethod
    def from_json(cls, geometry, payload):
        config = SeparationConfig.from_json(payload["config"])
        levels = []
        parent = geometry
        stack = []
        for entry in sorted(payload["levels"], key=lambda e: -e["dim"]):
            sub = Subpolyhedron(parent, [tuple(c) for c in entry["cells"]])
            stack.append(
                (
                    entry["dim"],
                    FiltrationLevel(
                        sub,
                        entry["area"],
                        entry["slack"],
                        entry.get("slack_kind", "assumed"),
                        tuple(
                            ComponentCert(
                                c["cells"],
                                c["center"],
                                c["radius"],
                                tuple(c["witness_pair"]) if c.get("witness_pair") else None,
                            )
                            for c in entry.get("components", ())
                        ),
                    ),
                )
            )
            parent = sub
        stack.sort(key=lambda pair: pair[0])
        return cls(geometry, config, [level for _, level in stack])


def build_filtration(geometry, config):
    """Minimize level by level from the top dimension down to points.

    The complex must be closed (every facet shared by exactly two cells);
    below the top level, candidate facets are restricted to those with
    exactly two cofaces in their parent so the filtration stays locally
    flat around its 0-stratum.
    """
    system = _system_for(geometry)
    for facet in system.facets:
        if len(system.face_cofaces[facet]) != 2:
            raise ValueError(
                f"complex is not closed: facet {facet} has "
                f"{len(system.face_cofaces[facet])} cofaces"
            )
    schedule = config.epsilon_schedule(geometry.dim)
    levels = []
    parent = geometry
    for i in range(geometry.dim - 1, -1, -1):
        parent_system = _system_for(parent)
        candidates = [
            facet
            for facet in parent_system.facets
            if len(parent_system.face_cofaces[facet]) == 2
        ]
        result = minimize_separating(
            parent,
            config.radius,
            schedule[i],
            move_budget=config.move_budget,
            rng_seed=config.rng_seed + i,
            candidate_facets=candidates,
        )
        levels.append(
            FiltrationLevel(
                result.subpolyhedron,
                result.area,
                result.slack,
                result.slack_kind,
                result.certificates,
            )
        )
        parent = result.subpolyhedron
    levels.reverse()
    return Filtration(geometry, config, levels)
