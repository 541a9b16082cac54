"""Boundary lifting monomial and pointwise application of the PIDE operator."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .expr import BinOp, Expr, Num, evaluate, parse
from .model import BoundaryConditions, ProblemSpec

__all__ = [
    "SmoothFunction",
    "LiftFunction",
    "DegenerateLift",
    "build_nu",
    "apply_P_smooth",
    "boundary_trace",
    "left_boundary_residual",
    "volterra_integral",
]

_FD_POINTS = 64
_FD_STEP = 1e-5
_FD_TOL = 1e-6

_GL_PANELS = 64
_GL_ORDER = 8
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(_GL_ORDER)


class DegenerateLift(ArithmeticError):
    pass


def _as_expr(e) -> Expr:
    return parse(e) if isinstance(e, str) else e


@dataclass(frozen=True)
class SmoothFunction:
    """A closed-form function of ``x`` with its first two derivatives.

    The derivatives are checked against central differences at 64 seeded
    random points when the object is built.
    """

    f: Expr
    df: Expr
    d2f: Expr
    validate: bool = True

    def __post_init__(self):
        for name in ("f", "df", "d2f"):
            object.__setattr__(self, name, _as_expr(getattr(self, name)))
        if self.validate:
            self._check_derivatives()

    def _check_derivatives(self):
        rng = np.random.default_rng(20240601)
        x = rng.uniform(_FD_STEP, 1 - _FD_STEP, _FD_POINTS)
        for lo, hi, label in ((self.value, self.dx, "first"), (self.dx, self.dxx, "second")):
            fd = (lo(x + _FD_STEP) - lo(x - _FD_STEP)) / (2 * _FD_STEP)
            err = np.max(np.abs(fd - hi(x)))
            if not err <= _FD_TOL:
                raise ValueError(
                    f"{label} derivative disagrees with central differences (max error {err:.3g})"
                )

    def _ev(self, e, x):
        x_arr = np.asarray(x, dtype=float)
        out = np.broadcast_to(np.asarray(evaluate(e, {"x": x_arr}), dtype=float), x_arr.shape)
        return float(out) if out.ndim == 0 else np.array(out)

    def value(self, x):
        return self._ev(self.f, x)

    def dx(self, x):
        return self._ev(self.df, x)

    def dxx(self, x):
        return self._ev(self.d2f, x)

    __call__ = value

    @classmethod
    def scaled_sum(cls, a: float, xi: "SmoothFunction", b: float, eta: "SmoothFunction"):
        """``a*xi + b*eta`` as a new SmoothFunction (derivatives follow)."""
        def comb(p, q):
            return BinOp("+", BinOp("*", Num(float(a)), p), BinOp("*", Num(float(b)), q))

        return cls(comb(xi.f, eta.f), comb(xi.df, eta.df), comb(xi.d2f, eta.d2f), validate=False)


@dataclass(frozen=True)
class LiftFunction:
    """``nu(x) = mu1 * x**mu2``."""

    mu1: float
    mu2: float

    def as_smooth(self) -> SmoothFunction:
        m1, m2 = repr(float(self.mu1)), repr(float(self.mu2))
        return SmoothFunction(
            f"{m1}*x^{m2}",
            f"{m1}*{m2}*x^({m2}-1)",
            f"{m1}*{m2}*({m2}-1)*x^({m2}-2)",
            validate=False,
        )

    def __call__(self, x):
        return self.mu1 * np.asarray(x, dtype=float) ** self.mu2


def build_nu(bc: BoundaryConditions, mu2: float = 3.0) -> LiftFunction:
    if mu2 < 3:
        raise ValueError(f"mu2 must be at least 3, got {mu2}")
    den = mu2 * bc.alpha1 + bc.beta1
    if den == 0:
        raise DegenerateLift(f"mu2*alpha1 + beta1 = 0 for mu2={mu2}; choose another mu2")
    return LiftFunction(mu1=1.0 / den, mu2=float(mu2))


def volterra_integral(spec: ProblemSpec, xi, x):
    """``int_0^x phi(x, y) xi(y) dy`` by 64-panel, 8-point composite Gauss-Legendre."""
    x_arr = np.atleast_1d(np.asarray(x, dtype=float))
    # panel-local nodes on [0, 1]
    s = (np.arange(_GL_PANELS)[:, None] + 0.5 * (_GL_NODES[None, :] + 1.0)) / _GL_PANELS
    s = s.ravel()
    w = np.tile(_GL_WEIGHTS, _GL_PANELS) / (2 * _GL_PANELS)
    Y = x_arr[:, None] * s[None, :]
    X = np.broadcast_to(x_arr[:, None], Y.shape)
    integrand = np.asarray(spec.phi(X, Y)) * np.asarray(xi(Y))
    out = x_arr * (integrand @ w)
    return float(out[0]) if np.ndim(x) == 0 else out


def apply_P_smooth(spec: ProblemSpec, xi: SmoothFunction, x):
    """theta xi'' + sigma xi' + lambda xi + int_0^x phi(x, y) xi(y) dy, pointwise."""
    x_arr = np.asarray(x, dtype=float)
    out = (
        np.asarray(spec.theta(x_arr)) * xi.dxx(x_arr)
        + np.asarray(spec.sigma(x_arr)) * xi.dx(x_arr)
        + np.asarray(spec.lam(x_arr)) * xi.value(x_arr)
        + volterra_integral(spec, xi.value, x_arr)
    )
    return float(out) if np.ndim(out) == 0 else out


def boundary_trace(bc: BoundaryConditions, xi: SmoothFunction) -> float:
    return bc.alpha1 * xi.dx(1.0) + bc.beta1 * xi.value(1.0)


def left_boundary_residual(bc: BoundaryConditions, xi: SmoothFunction) -> float:
    return bc.alpha0 * xi.dx(0.0) + bc.beta0 * xi.value(0.0)
