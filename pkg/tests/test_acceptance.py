"""Acceptance gate: ten numbered criteria, each run at its stated tolerance.

Every test records one ``[PASS]``/``[FAIL]`` line through the ``criterion``
fixture; the lines are printed together at the end of the pytest run.
Run only this module with ``pytest tests/test_acceptance.py -v``.
"""

import time

import numpy as np
import pytest

from oracles import duhamel_final
from pide_lab.analysis import (
    analyticity_sweep,
    consistency_sweep,
    default_tgrid,
    growth_sweep,
    sobolev_sweep,
    spectral_norm,
)
from pide_lab.cli import converge
from pide_lab.config import config_from_dict
from pide_lab.disc import Grid, assemble
from pide_lab.gridops import GridFunction, l2_diff_cross_grid, norm, restrict
from pide_lab.lift import build_nu
from pide_lab.model import Kernel, ProblemSpec, make_example1
from pide_lab.ode import IntegratorConfig, simulate

pytestmark = pytest.mark.acceptance

SWEEP = list(range(10, 101, 10))
SPEC1, U0, F1 = make_example1()


def _run(problem, kind):
    cfg = config_from_dict({"problem": {"builtin": problem},
                            "grid": {"sweep": SWEEP, "reference_n": 200},
                            "integrator": {"T": 1.0}})
    return converge(cfg, kind)


def _adjacent_increases(errors):
    return int(np.sum(np.diff(errors) > 0))


def _slope(ns, errors):
    return float(np.polyfit(np.log(ns), np.log(errors), 1)[0])


def test_criterion_01_example1_l2(criterion):
    t0 = time.perf_counter()
    rep = _run("example1", "l2")
    elapsed = time.perf_counter() - t0
    e = np.array(rep.errors)
    ok = bool(np.all(e > 0)) and e[-1] <= 0.3 * e[0] and _adjacent_increases(e) <= 1 and elapsed <= 120
    criterion(1, "example1 L2 convergence", ok,
              f"e10={e[0]:.4g} e100={e[-1]:.4g} ratio={e[-1] / e[0]:.3f} "
              f"increases={_adjacent_increases(e)} runtime={elapsed:.1f}s")
    assert ok


def test_criterion_02_example2_inf(criterion):
    rep = _run("example2", "inf")
    e = np.array(rep.errors)
    slope = _slope(rep.ns, e)
    # decreasing trend: negative fitted log-log slope and no more than one uptick
    ok = bool(np.all(e > 0)) and slope < 0 and _adjacent_increases(e) <= 1 and e[-1] <= 0.3 * e[0]
    criterion(2, "example2 max-norm convergence", ok,
              f"e10={e[0]:.4g} e100={e[-1]:.4g} ratio={e[-1] / e[0]:.3f} "
              f"slope={slope:.2f} increases={_adjacent_increases(e)}")
    assert ok


def test_criterion_03_example2_boundary(criterion):
    rep = _run("example2", "inf")
    b10, b100 = rep.boundary_errors[0], rep.boundary_errors[-1]
    ok = b10 >= 2 * b100
    criterion(3, "example2 boundary value convergence", ok,
              f"n=10: {b10:.4g}  n=100: {b100:.4g}  factor={b10 / b100:.2f}")
    assert ok


def test_criterion_04_consistency_order(criterion):
    nu = build_nu(SPEC1.bc).as_smooth()
    rep = consistency_sweep(SPEC1, nu, [16, 32, 64, 128, 256])
    slope = rep.fitted["slope"]
    ok = slope >= 0.45
    criterion(4, "consistency slope with nu = x^3", ok, f"slope={slope:.3f} (need >= 0.45)")
    assert ok


def test_criterion_05_uniform_analyticity(criterion):
    rep = analyticity_sweep(SPEC1, [8, 16, 32, 64, 128], 1, default_tgrid(1.0, 40, 1e-3))
    ratio = rep.fitted["max_over_min"]
    ok = ratio <= 5
    criterion(5, "uniform analyticity k=1", ok,
              f"values={[round(v, 4) for v in rep.values]} max/min={ratio:.3f}")
    assert ok


def test_criterion_06_uniform_growth(criterion):
    rep = growth_sweep(SPEC1, [8, 16, 32, 64, 128], default_tgrid(1.0, 40, 1e-3))
    ok = rep.passed
    criterion(6, "uniform growth bound", ok, f"fit={rep.fitted}")
    assert ok


def test_criterion_07_sobolev(criterion):
    rep = sobolev_sweep(SPEC1, [16, 256], samples=200, seed=0)
    lo, hi = rep.values
    ok = hi <= 2 * lo
    criterion(7, "discrete Sobolev uniformity", ok, f"n=16: {lo:.4g}  n=256: {hi:.4g}  ratio={hi / lo:.3f}")
    assert ok


def _random_polynomial_kernel(rng):
    # total degree at most 3 in (x, y)
    monomials = ["1", "x", "y", "x*y", "x^2", "y^2", "x^2*y", "x*y^2", "x^3", "y^3"]
    coeffs = rng.uniform(-2, 2, len(monomials))
    return " + ".join(f"({float(c)!r})*{m}" for c, m in zip(coeffs, monomials))


def test_criterion_08_kernel_block_bound(criterion):
    rng = np.random.default_rng(20240601)
    worst = -np.inf
    for _ in range(20):
        spec = ProblemSpec(SPEC1.theta, SPEC1.sigma, SPEC1.lam, Kernel(_random_polynomial_kernel(rng)), SPEC1.bc)
        sup = spec.phi.sup_bound
        for n in range(4, 257):
            phi_norm = spectral_norm(assemble(spec, Grid(n)).Phi, kind="two_d")
            worst = max(worst, phi_norm - sup)
    ok = worst <= 1e-9
    criterion(8, "kernel block norm bound", ok, f"max(||Phi_n|| - sup|phi|)={worst:.4g} over 20 kernels, n=4..256")
    assert ok


def test_criterion_09_extension_isometry(criterion):
    rng = np.random.default_rng(9)
    zero = GridFunction(Grid(1), [0.0])
    worst = 0.0
    for n in range(3, 257):
        g = Grid(n)
        vs = rng.standard_normal((100, n))
        l2 = l2_diff_cross_grid(GridFunction(g, vs), zero)
        d2 = np.array([norm(v, "two_d") for v in vs])
        worst = max(worst, float(np.max(np.abs(l2 - d2) / d2)))
    ok = worst <= 1e-12
    criterion(9, "extension isometry", ok, f"max relative gap={worst:.3g} over 100 vectors, n=3..256")
    assert ok


def test_criterion_10_integrator(criterion):
    d3 = assemble(SPEC1, Grid(3))
    v3 = restrict(U0, d3.grid)
    f3 = lambda t: F1(t, 3)  # noqa: E731
    finals = {N: simulate(d3, v3, f3, 1.0, IntegratorConfig(N, 2)).final for N in (2048, 4096, 8192)}
    ratio = np.max(np.abs(finals[2048] - finals[4096])) / np.max(np.abs(finals[4096] - finals[8192]))
    gaps = {}
    for n in (3, 8, 16, 32):
        d = assemble(SPEC1, Grid(n))
        v0 = restrict(U0, d.grid)
        f = lambda t, n=n: F1(t, n)  # noqa: E731
        cn = simulate(d, v0, f, 1.0, IntegratorConfig()).final
        gaps[n] = float(np.max(np.abs(cn - duhamel_final(d.P, d.B, v0, f, 1.0))))
    ok = 3.5 <= ratio <= 4.5 and max(gaps.values()) <= 1e-6
    criterion(10, "integrator order and Duhamel agreement", ok,
              f"halving ratio={ratio:.3f}; max |CN - Duhamel| by n: "
              + ", ".join(f"{n}: {g:.2g}" for n, g in gaps.items()))
    assert ok
