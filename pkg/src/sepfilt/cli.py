"""Command line: fixture generation, pipeline runs, verification sweeps.

Exit codes: 0 on success, 2 for input errors, 3 for verification failures.
All randomness flows from the manifest seed; the SEPFILT_THREADS variable
caps worker parallelism (the built-in sweeps are sequential and
deterministic, satisfying the cap for any value).
"""

from __future__ import annotations

import json
import os
import sys

import click

from . import __version__
from .errors import (
    BadParams,
    CensusMismatch,
    CoverFailure,
    Infeasible,
    SepfiltError,
    SeparationViolation,
)
from .complexes import WeightedComplex
from .filtration import Filtration, SeparationConfig
from .files import read_json, write_checks_csv, write_json, write_manifest
from .generators import circle, genus_surface, torus
from .pipeline import coarea_sweep, density_sweep, run_pipeline

INPUT_ERROR = 2
VERIFICATION_ERROR = 3


def worker_cap():
    """Parallelism cap from SEPFILT_THREADS (>= 1); unset means 1."""
    raw = os.environ.get("SEPFILT_THREADS")
    if raw is None:
        return 1
    try:
        value = int(raw)
    except ValueError as exc:
        raise BadParams(f"SEPFILT_THREADS={raw!r} is not an integer") from exc
    if value < 1:
        raise BadParams("SEPFILT_THREADS must be at least 1")
    return value


@click.group()
@click.version_option(version=__version__, prog_name="sepfilt")
def cli():
    """Separating filtrations, rainbow censuses, and volume bounds."""


@cli.command()
@click.argument("shape", type=click.Choice(["circle", "torus", "genus"]))
@click.option("--nodes", type=int, default=8, show_default=True,
              help="node count (circle)")
@click.option("--length", type=float, default=4.0, show_default=True,
              help="circumference (circle)")
@click.option("--side", type=int, default=4, show_default=True,
              help="side length (torus)")
@click.option("--scale", type=float, default=1.0, show_default=True,
              help="edge-length scale factor")
@click.option("--genus", "genus_", type=int, default=2, show_default=True,
              help="genus (genus surface)")
@click.option("--out", "-o", type=click.Path(), required=True,
              help="output complex file")
def gen(shape, nodes, length, side, scale, genus_, out):
    """Generate a complex fixture file."""
    if shape == "circle":
        complex_ = circle(nodes, length)
    elif shape == "torus":
        complex_ = torus(side, scale=scale)
    else:
        complex_ = genus_surface(genus_, scale=scale)
    complex_.save(out)
    click.echo(f"wrote {out}: dimension {complex_.dimension}, "
               f"{len(complex_.simplices)} maximal simplices")


@cli.command()
@click.argument("complex_file", type=click.Path())
@click.option("--radius", type=float, default=1.0, show_default=True)
@click.option("--epsilon", type=float, default=0.05, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--subdivision-depth", type=int, default=2, show_default=True)
@click.option("--move-budget", type=int, default=40, show_default=True)
@click.option("--samples", type=int, default=100, show_default=True,
              help="inequality samples for the report CSV")
@click.option("--out-dir", type=click.Path(), default=".", show_default=True)
def run(complex_file, radius, epsilon, seed, subdivision_depth, move_budget,
        samples, out_dir):
    """Build a filtration, census, and bound report for a complex file."""
    worker_cap()
    complex_ = WeightedComplex.load(complex_file)
    config = SeparationConfig(
        radius=radius,
        epsilon=epsilon,
        move_budget=move_budget,
        rng_seed=seed,
        subdivision_depth=subdivision_depth,
    )
    artifacts = run_pipeline(complex_, config, samples=samples)
    os.makedirs(out_dir, exist_ok=True)
    filtration_path = os.path.join(out_dir, "filtration.json")
    report_path = os.path.join(out_dir, "report.json")
    csv_path = os.path.join(out_dir, "report_samples.csv")
    write_json(filtration_path, artifacts.filtration_document())
    write_json(report_path, artifacts.report_document())
    write_checks_csv(csv_path, artifacts.checks)
    manifest_path = os.path.join(out_dir, "manifest.json")
    write_manifest(
        manifest_path,
        "run",
        [complex_file],
        {**config.to_json(), "samples": samples},
        [filtration_path, report_path, csv_path],
        __version__,
    )
    summary = artifacts.report_document()["sweep_summary"]
    click.echo(
        f"rainbow_bound={artifacts.report.rainbow_bound} "
        f"constant_bound={float(artifacts.report.constant_bound):.6g} "
        f"vanishing={artifacts.report.vanishing} "
        f"violations={summary['violations']}"
    )
    if summary["violations"]:
        raise SeparationViolation(
            f"{summary['violations']} unbudgeted inequality violations"
        )


@cli.command()
@click.argument("filtration_file", type=click.Path())
@click.option("--samples", type=int, default=100, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", type=click.Path(), default=None,
              help="sweep CSV path (default: alongside the filtration)")
def verify(filtration_file, samples, seed, out):
    """Re-verify a filtration file and sweep the density/coarea inequalities."""
    worker_cap()
    payload = read_json(filtration_file)
    complex_ = WeightedComplex.from_json(payload["complex"])
    config = SeparationConfig.from_json(payload["config"])
    geometry = complex_.geometry(config.subdivision_depth)
    filtration = Filtration.from_json(geometry, payload)
    filtration.validate()
    checks = density_sweep(filtration, samples, seed)
    if filtration.dim >= 1 and samples:
        checks.extend(coarea_sweep(filtration, max(1, samples // 4), seed + 1))
    if out is None:
        base = os.path.dirname(os.path.abspath(filtration_file))
        out = os.path.join(base, "sweep.csv")
    write_checks_csv(out, checks)
    violations = [c for c in checks if c.violated]
    min_residual = min((c.residual for c in checks), default=None)
    click.echo(
        f"samples={len(checks)} min_residual={min_residual} "
        f"violations={len(violations)}"
    )
    if violations:
        raise SeparationViolation(
            f"{len(violations)} unbudgeted inequality violations"
        )


def main(argv=None):
    try:
        cli.main(args=argv, standalone_mode=False)
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.exceptions.Abort:
        return 130
    except click.ClickException as exc:
        exc.show(file=sys.stderr)
        return INPUT_ERROR
    except (SeparationViolation, CensusMismatch, CoverFailure, Infeasible) as exc:
        print(f"verification failure: {exc}", file=sys.stderr)
        return VERIFICATION_ERROR
    except (BadParams, FileNotFoundError, json.JSONDecodeError, KeyError,
            ValueError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return INPUT_ERROR
    except SepfiltError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return VERIFICATION_ERROR
    return 0


if __name__ == "__main__":
    sys.exit(main())
