"""``pide-lab`` command line: convergence studies, property sweeps, single runs.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .analysis import (
    LatticeError,
    PreconditionError,
    analyticity_sweep,
    consistency_sweep,
    default_tgrid,
    growth_sweep,
    reports_to_csv,
    sobolev_sweep,
)
from .config import ConfigError, RunConfig, load_config
from .disc import DegenerateBoundary, Grid, assemble
from .expr import ExprError
from .gridops import GridFunction, l2_diff_cross_grid, restrict, sample_extension
from .lift import DegenerateLift, build_nu
from .ode import MAX_DENSE_N, SingularStepMatrix, SizeGuardError, Trajectory, simulate

log = logging.getLogger("pide_lab")

EXIT_CONFIG = 2
EXIT_NUMERIC = 3

INF_READING = "||R_n(S_ref v_ref(t)) - v_n(t)||_inf (reference extension sampled at the n-grid nodes)"


class NumericalFailure(RuntimeError):
    pass


@dataclass
class ConvergenceReport:
    kind: str
    reference_n: int
    ns: list
    errors: list
    boundary_errors: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def to_csv(self) -> str:
        return "n,error\n" + "".join(f"{n},{e:.17g}\n" for n, e in zip(self.ns, self.errors))


def _threads() -> int:
    raw = os.environ.get("PIDE_LAB_THREADS", "")
    try:
        return max(1, int(raw))
    except ValueError:
        return os.cpu_count() or 1


def run_grid(cfg: RunConfig, n: int) -> Trajectory:
    """Assemble and integrate the n-point system from ``R_n u_0``."""
    try:
        grid = Grid(n)
        d = assemble(cfg.spec, grid)
        return simulate(d, restrict(cfg.initial, grid), cfg.signal, cfg.T, cfg.integrator)
    except (DegenerateBoundary, SingularStepMatrix, ArithmeticError, ExprError) as exc:
        raise NumericalFailure(f"n={n}: {exc}") from exc


def _sweep_errors(ref: Trajectory, tr: Trajectory, kind: str):
    if kind == "l2":
        diffs = l2_diff_cross_grid(GridFunction(ref.grid, ref.states), GridFunction(tr.grid, tr.states))
    else:
        on_nodes = sample_extension(ref.states, ref.grid, tr.grid.nodes)
        diffs = np.max(np.abs(on_nodes - tr.states), axis=1)
    boundary = np.abs(ref.states[:, 0] - tr.states[:, 0])
    return float(np.max(diffs)), float(np.max(boundary))


def converge(cfg: RunConfig, kind: str) -> ConvergenceReport:
    if kind not in ("l2", "inf"):
        raise ConfigError(f"unknown error kind {kind!r}")
    ref = run_grid(cfg, cfg.reference_n)
    with ThreadPoolExecutor(max_workers=min(_threads(), len(cfg.sweep))) as pool:
        trajectories = list(pool.map(lambda n: run_grid(cfg, n), cfg.sweep))
    errors, boundary = zip(*(_sweep_errors(ref, tr, kind) for tr in trajectories))
    meta = {
        "problem": cfg.problem_name,
        "error_kind": kind,
        "error_definition": (
            "sup_t ||S_ref v_ref(t) - S_n v_n(t)||_L2(0,1), exact cell merging"
            if kind == "l2" else "sup_t " + INF_READING
        ),
        "reference_n": cfg.reference_n,
        "T": cfg.T,
        "sample_count": cfg.sample_count,
        "sup_over": "uniform sample times on [0, T] including both ends",
        "step_count": cfg.integrator.step_count,
        "scheme": cfg.integrator.scheme,
        "input": ref.input_used,
    }
    return ConvergenceReport(kind, cfg.reference_n, list(cfg.sweep), list(errors), list(boundary), meta)


def cmd_converge(cfg: RunConfig, kind: str) -> ConvergenceReport:
    from .plots import convergence_svg

    report = converge(cfg, kind)
    out = cfg.output_dir
    out.mkdir(parents=True, exist_ok=True)
    (out / "converge.csv").write_text(report.to_csv())
    meta = dict(report.metadata, ns=report.ns, errors=report.errors,
                boundary_errors=report.boundary_errors)
    (out / "converge_meta.json").write_text(json.dumps(meta, indent=2) + "\n")
    label = "e_n (L2)" if kind == "l2" else "e_n (max norm)"
    convergence_svg(out / "converge.svg", report.ns, report.errors, label,
                    f"{cfg.problem_name}, reference n={cfg.reference_n}")
    return report


def properties(cfg: RunConfig) -> list:
    pc = cfg.properties
    dense_sweep = pc.sweep or cfg.sweep
    cons_sweep = pc.consistency_sweep or cfg.sweep
    sob_sweep = pc.sobolev_sweep or cfg.sweep
    too_big = [n for n in dense_sweep if n > MAX_DENSE_N]
    if too_big:
        raise SizeGuardError(
            f"expm_dense: sweep sizes {too_big} exceed the dense guard n <= {MAX_DENSE_N}"
        )
    tgrid = default_tgrid(cfg.T, pc.t_count, pc.t_min)
    spec = cfg.spec
    nu = build_nu(spec.bc, pc.mu2).as_smooth()
    reports = [consistency_sweep(spec, nu, cons_sweep, "accuracy_residual_nu")]
    if pc.xi is not None:
        reports.append(consistency_sweep(spec, pc.xi, cons_sweep, "accuracy_residual_xi"))
    reports.append(analyticity_sweep(spec, dense_sweep, 0, tgrid))
    reports.append(analyticity_sweep(spec, dense_sweep, 1, tgrid))
    reports.append(growth_sweep(spec, dense_sweep, tgrid))
    reports.append(sobolev_sweep(spec, sob_sweep, pc.sobolev_samples, pc.seed))
    return reports


def cmd_properties(cfg: RunConfig) -> list:
    reports = properties(cfg)
    out = cfg.output_dir
    out.mkdir(parents=True, exist_ok=True)
    (out / "properties.csv").write_text(reports_to_csv(reports))
    return reports


def cmd_simulate(cfg: RunConfig, n: int) -> Trajectory:
    from .plots import surface_svg

    if n < 3:
        raise ConfigError(f"--n must be at least 3, got {n}")
    tr = run_grid(cfg, n)
    out = cfg.output_dir
    out.mkdir(parents=True, exist_ok=True)
    tr.write_csv(out / f"trajectory_n{n}.csv")
    surface_svg(out / f"surface_n{n}.svg", tr, f"{cfg.problem_name}: S_n v_n, n = {n}")
    return tr


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pide-lab", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("converge", help="grid-refinement study against a reference grid")
    p.add_argument("--config", required=True, type=Path)
    p.add_argument("--kind", choices=("l2", "inf"), default="l2")

    p = sub.add_parser("properties", help="certify consistency, analyticity, growth, Sobolev")
    p.add_argument("--config", required=True, type=Path)

    p = sub.add_parser("simulate", help="single run with trajectory CSV and surface SVG")
    p.add_argument("--config", required=True, type=Path)
    p.add_argument("--n", required=True, type=int)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config)
        if args.command == "converge":
            report = cmd_converge(cfg, args.kind)
            for n, e in zip(report.ns, report.errors):
                print(f"n={n:4d}  error={e:.6e}")
        elif args.command == "properties":
            for r in cmd_properties(cfg):
                print(f"{r.name:24s} {'pass' if r.passed else 'FAIL'}  {r.fitted}")
        else:
            tr = cmd_simulate(cfg, args.n)
            print(f"wrote {len(tr.times)} samples for n={args.n} to {cfg.output_dir}")
    except (ConfigError, PreconditionError, ExprError) as exc:
        print(f"pide-lab: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalFailure, SizeGuardError, DegenerateBoundary, DegenerateLift,
            SingularStepMatrix, LatticeError, ArithmeticError) as exc:
        print(f"pide-lab: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return 0


if __name__ == "__main__":
    sys.exit(main())
