"""Numerical certificates for the structural properties of ``P_n``.

Each check measures a quantity over a sweep of grid sizes and tests an
n-uniformity policy:

* consistency residual decays at least like h**0.45 (log-log slope),
* ``t^k ||P_n^k exp(P_n t)|| / k!`` stays within a factor 5 across n,
* one lattice pair (M, omega) bounds ``||exp(P_n t)||`` for every n,
* the discrete Sobolev ratio does not grow by more than 2x from the
  coarsest to the finest grid.

The thresholds are policy: the underlying results only assert that some
n-independent constant exists.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .disc import Discretization, Grid, apply_Pn, assemble
from .gridops import norm
from .lift import SmoothFunction, apply_P_smooth, boundary_trace, left_boundary_residual
from .model import ProblemSpec
from .ode import MAX_DENSE_N, SizeGuardError, expm_dense

__all__ = [
    "PropertyReport",
    "PreconditionError",
    "LatticeError",
    "spectral_norm",
    "accuracy_residual",
    "analyticity_constant",
    "growth_fit",
    "growth_samples",
    "sobolev_ratio",
    "loglog_slope",
    "consistency_sweep",
    "analyticity_sweep",
    "growth_sweep",
    "sobolev_sweep",
    "reports_to_csv",
    "default_tgrid",
    "M_LATTICE",
    "OMEGA_LATTICE",
]

BC_TOL = 1e-10
SLOPE_MIN = 0.45
UNIFORM_RATIO_MAX = 5.0
SOBOLEV_GROWTH_MAX = 2.0
M_LATTICE = np.arange(1.0, 10.0 + 1e-9, 0.5)
OMEGA_LATTICE = np.arange(0.0, 20.0 + 1e-9, 0.5)
# relative slack when comparing a bound against sampled norms
_DOMINATE_RTOL = 1e-9


class PreconditionError(ValueError):
    pass


class LatticeError(ArithmeticError):
    def __init__(self, message: str, max_violation: float):
        self.max_violation = max_violation
        super().__init__(message)


@dataclass
class PropertyReport:
    name: str
    sweep: list
    values: list
    fitted: dict = field(default_factory=dict)
    passed: bool = False
    policy: str = ""

    def __post_init__(self):
        order = np.argsort(self.sweep, kind="stable")
        self.sweep = [int(self.sweep[i]) for i in order]
        self.values = [float(self.values[i]) for i in order]
        self.fitted = {k: float(v) for k, v in self.fitted.items()}
        self.passed = bool(self.passed)


def spectral_norm(A, tol: float = 1e-8, max_iter: int = 5000, block: int = 8, seed: int = 0,
                  kind: str = "two") -> float:
    """Largest singular value by block power iteration on ``A^T A``.

    A small orthonormal block with a Rayleigh-Ritz step keeps convergence
    fast when the top singular values cluster (as they do for ``exp(P t)``
    at small t).  ``kind="two_d"`` measures both sides in the scaled
    ``sqrt(h)``-norm; the scaling cancels, so it returns the same value.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    n = A.shape[1]
    if kind == "two_d":
        w = 1.0 / (n + 1)
    elif kind == "two":
        w = 1.0
    else:
        raise ValueError(f"unknown norm kind {kind!r}")
    if not np.any(A):
        return 0.0
    k = min(block, n)
    rng = np.random.default_rng(seed)
    # columns orthonormal in <u, v> = w u.v, so the adjoint of A is still A^T
    Q = np.linalg.qr(rng.standard_normal((n, k)))[0] / math.sqrt(w)
    prev = 0.0
    for _ in range(max_iter):
        Q = np.linalg.qr(A.T @ (A @ Q))[0] / math.sqrt(w)
        Y = A @ Q
        ritz = np.linalg.eigvalsh(w * (Y.T @ Y))
        est = math.sqrt(max(ritz[-1], 0.0))
        if abs(est - prev) <= tol * est:
            return est
        prev = est
    return est


def _check_dense(d: Discretization, where: str):
    if d.n > MAX_DENSE_N:
        raise SizeGuardError(f"{where}: n={d.n} exceeds the expm_dense guard {MAX_DENSE_N}")


def accuracy_residual(spec: ProblemSpec, d: Discretization, xi: SmoothFunction) -> float:
    """``|| R_n P xi - P_n R_n xi - B_n f_xi ||_2d`` for a smooth ``xi``."""
    bc_res = left_boundary_residual(spec.bc, xi)
    if abs(bc_res) > BC_TOL:
        raise PreconditionError(
            f"accuracy_residual: xi violates the left boundary condition "
            f"(alpha0 xi'(0) + beta0 xi(0) = {bc_res:.3g})"
        )
    x = d.grid.nodes
    lhs = np.asarray(apply_P_smooth(spec, xi, x), dtype=float)
    res = lhs - apply_Pn(d, np.asarray(xi.value(x), dtype=float)) - d.B * boundary_trace(spec.bc, xi)
    return norm(res, "two_d")


def analyticity_constant(d: Discretization, k: int, tgrid: Sequence[float]) -> float:
    """``max_t t^k ||P_n^k exp(P_n t)||_2d / k!`` over ``tgrid``."""
    _check_dense(d, "analyticity_constant")
    if k not in (0, 1, 2):
        raise ValueError("k must be 0, 1 or 2")
    P = d.P
    Pk = np.linalg.matrix_power(P, k)
    best = 0.0
    for t in tgrid:
        E = expm_dense(P, t)
        val = t**k * spectral_norm(Pk @ E) / math.factorial(k)
        best = max(best, val)
    return best


def growth_samples(d_sweep: Sequence[Discretization], tgrid: Sequence[float]) -> np.ndarray:
    """``||exp(P_n t)||_2d`` for each discretization (rows) and time (columns)."""
    out = np.empty((len(d_sweep), len(tgrid)))
    for i, d in enumerate(d_sweep):
        _check_dense(d, "growth_fit")
        for j, t in enumerate(tgrid):
            out[i, j] = spectral_norm(expm_dense(d.P, t))
    return out


def growth_fit(d_sweep: Sequence[Discretization], tgrid: Sequence[float], samples=None):
    """Smallest lattice pair ``(M, omega)`` with ``M e^{omega t}`` above every sample.

    Pairs are ordered lexicographically: smallest M first, then smallest
    omega.  ``samples`` may pass precomputed :func:`growth_samples`.
    """
    t = np.asarray(tgrid, dtype=float)
    g = growth_samples(d_sweep, t) if samples is None else np.asarray(samples)
    gmax = g.max(axis=0)
    worst = np.inf
    for M in M_LATTICE:
        for om in OMEGA_LATTICE:
            bound = M * np.exp(om * t)
            ratio = np.max(gmax / bound)
            if ratio <= 1.0 + _DOMINATE_RTOL:
                return float(M), float(om)
            worst = min(worst, ratio)
    raise LatticeError(
        f"growth_fit: no lattice pair dominates the samples (smallest overshoot factor {worst:.4g})",
        max_violation=float(worst),
    )


def sobolev_ratio(d: Discretization, v) -> float:
    v = np.asarray(v, dtype=float)
    if not np.any(v):
        raise ValueError("sobolev_ratio: v must be non-zero")
    Dv = d.D_diag * v
    Dv[1:] += d.D_lower * v[:-1]
    num = norm(v, "inf") + norm(Dv, "inf")
    return num / (norm(v, "two_d") + norm(apply_Pn(d, v), "two_d"))


def loglog_slope(h, values) -> float:
    """Least-squares slope of log(values) against log(h)."""
    slope, _ = np.polyfit(np.log(np.asarray(h, dtype=float)), np.log(np.asarray(values, dtype=float)), 1)
    return float(slope)


def default_tgrid(T: float = 1.0, count: int = 40, t_min: float = 1e-3) -> np.ndarray:
    return np.geomspace(t_min, T, count)


def consistency_sweep(spec: ProblemSpec, xi: SmoothFunction, ns: Sequence[int],
                      name: str = "accuracy_residual") -> PropertyReport:
    grids = [Grid(n) for n in ns]
    vals = [accuracy_residual(spec, assemble(spec, g), xi) for g in grids]
    if all(v > 0 for v in vals) and len(ns) > 1:
        slope = loglog_slope([g.h for g in grids], vals)
    else:
        # an exactly consistent xi has nothing to decay
        slope = math.inf
    return PropertyReport(name, list(ns), vals, {"slope": slope}, slope >= SLOPE_MIN,
                          f"log-log slope vs h >= {SLOPE_MIN}")


def analyticity_sweep(spec: ProblemSpec, ns: Sequence[int], k: int, tgrid) -> PropertyReport:
    for n in ns:
        if n > MAX_DENSE_N:
            raise SizeGuardError(f"analyticity_constant: n={n} exceeds the expm_dense guard {MAX_DENSE_N}")
    vals = [analyticity_constant(assemble(spec, Grid(n)), k, tgrid) for n in ns]
    ratio = max(vals) / min(vals)
    return PropertyReport(f"analyticity_k{k}", list(ns), vals, {"max_over_min": ratio},
                          ratio <= UNIFORM_RATIO_MAX, f"max/min across n <= {UNIFORM_RATIO_MAX}")


def growth_sweep(spec: ProblemSpec, ns: Sequence[int], tgrid) -> PropertyReport:
    for n in ns:
        if n > MAX_DENSE_N:
            raise SizeGuardError(f"growth_fit: n={n} exceeds the expm_dense guard {MAX_DENSE_N}")
    ds = [assemble(spec, Grid(n)) for n in ns]
    samples = growth_samples(ds, tgrid)
    try:
        M, om = growth_fit(ds, tgrid, samples)
        fitted, ok = {"M": M, "omega": om}, True
    except LatticeError as exc:
        fitted, ok = {"max_violation": exc.max_violation}, False
    return PropertyReport("growth_sup_norm", list(ns), list(samples.max(axis=1)), fitted, ok,
                          "one lattice (M, omega) dominates every n")


def sobolev_sweep(spec: ProblemSpec, ns: Sequence[int], samples: int = 200, seed: int = 0) -> PropertyReport:
    """Max Sobolev ratio over random unit-2d-norm vectors, per n."""
    rng = np.random.default_rng(seed)
    vals = []
    for n in ns:
        d = assemble(spec, Grid(n))
        best = 0.0
        for _ in range(samples):
            v = rng.standard_normal(n)
            v /= norm(v, "two_d")
            best = max(best, sobolev_ratio(d, v))
        vals.append(best)
    order = np.argsort(ns)
    growth = vals[order[-1]] / vals[order[0]]
    return PropertyReport("sobolev_ratio", list(ns), vals, {"finest_over_coarsest": growth},
                          growth <= SOBOLEV_GROWTH_MAX, f"finest/coarsest <= {SOBOLEV_GROWTH_MAX}")


def reports_to_csv(reports: Sequence[PropertyReport]) -> str:
    buf = io.StringIO()
    buf.write("property,n,value,pass\n")
    for r in reports:
        for n, v in zip(r.sweep, r.values):
            buf.write(f"{r.name},{n},{v:.17g},{str(r.passed).lower()}\n")
    fitted = " ".join(
        f"{r.name}.{key}={val:.6g}" for r in reports for key, val in r.fitted.items()
    )
    policies = "; ".join(f"{r.name}: {r.policy}" for r in reports if r.policy)
    buf.write(f"# fitted: {fitted}\n")
    buf.write(f"# policy: {policies}\n")
    return buf.getvalue()
