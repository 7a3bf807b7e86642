"""End-to-end orchestration shared by the command line and the tests."""

from __future__ import annotations

import random
from dataclasses import dataclass

from .bounds import (
    bound_report,
    coarea_check,
    estimate_v1,
    greedy_packing,
    point_density_check,
)
from .filtration import build_filtration
from .rainbow import color_by_filtration, count_rainbow, refine_with_filtration


def sample_radius_pairs(rng, radius, count):
    """Independent (r1, r2) pairs with 0 < r1 < r2 < radius."""
    pairs = []
    while len(pairs) < count:
        a = rng.uniform(0.02 * radius, 0.98 * radius)
        b = rng.uniform(0.02 * radius, 0.98 * radius)
        if a == b:
            continue
        pairs.append((min(a, b), max(a, b)))
    return pairs


def density_sweep(filtration, samples, seed):
    rng = random.Random(seed)
    geometry = filtration.geometry
    checks = []
    for r1, r2 in sample_radius_pairs(rng, filtration.config.radius, samples):
        center = rng.randrange(geometry.n_nodes)
        checks.append(point_density_check(filtration, center, r1, r2))
    return checks


def coarea_sweep(filtration, samples, seed, level=None):
    if level is None:
        level = filtration.dim - 1
    rng = random.Random(seed)
    geometry = filtration.geometry
    checks = []
    for r1, r2 in sample_radius_pairs(rng, filtration.config.radius, samples):
        center = rng.randrange(geometry.n_nodes)
        checks.append(coarea_check(filtration, level, center, r1, r2))
    return checks


@dataclass
class RunArtifacts:
    """Everything one pipeline run produces, ready for serialization."""

    complex_: object
    geometry: object
    filtration: object
    coloring: object
    census: object
    v1: object
    packing: object
    report: object
    checks: list

    def filtration_document(self):
        """Self-contained filtration file: complex, levels, census, colors."""
        payload = {"complex": self.complex_.to_json()}
        payload.update(self.filtration.to_json())
        payload["census"] = self.census.to_json()
        payload["coloring"] = self.coloring.to_json()
        return payload

    def report_document(self):
        violations = [c for c in self.checks if c.violated]
        summary = {
            "samples": len(self.checks),
            "violations": len(violations),
            "min_residual": (
                min(c.residual for c in self.checks) if self.checks else None
            ),
        }
        return {
            "bound_report": self.report.to_json(),
            "v1_estimate": self.v1.to_json(),
            "packing": (
                {
                    "centers": list(self.packing.centers),
                    "r_small": self.packing.r_small,
                    "r_big": self.packing.r_big,
                    "count": self.packing.count,
                }
                if self.packing is not None
                else None
            ),
            "sweep_summary": summary,
        }


def run_pipeline(complex_, config, samples=100, sweep_seed=None):
    """Build, refine, color, count, verify, and report on one complex."""
    geometry = complex_.geometry(config.subdivision_depth)
    filtration = build_filtration(geometry, config)
    geometry, filtration = refine_with_filtration(geometry, filtration)
    coloring = color_by_filtration(geometry, filtration, config.radius)
    census = count_rainbow(geometry, coloring, filtration)
    v1 = estimate_v1(geometry)
    z0 = filtration.z0_nodes()
    packing = greedy_packing(z0, geometry) if z0 else None
    tolerances = {
        "ball_boundary_credit": v1.boundary_credit,
        "max_cell_diameter": geometry.max_cell_diameter,
    }
    if v1.warning:
        tolerances["v1_warning"] = v1.warning
    report = bound_report(
        filtration, census, v1.value, geometry.total_area(), tolerances
    )
    seed = config.rng_seed if sweep_seed is None else sweep_seed
    checks = density_sweep(filtration, samples, seed)
    if filtration.dim >= 1 and samples:
        checks.extend(coarea_sweep(filtration, max(1, samples // 4), seed + 1))
    return RunArtifacts(
        complex_,
        geometry,
        filtration,
        coloring,
        census,
        v1,
        packing,
        report,
        checks,
    )
