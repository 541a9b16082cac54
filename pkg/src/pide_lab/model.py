"""Problem data for the boundary-controlled parabolic PIDE on [0, 1].

    u_t = theta u_xx + sigma u_x + lambda u + int_0^x phi(x, y) u(y, t) dy
    alpha0 u_x(0,t) + beta0 u(0,t) = 0,   alpha1 u_x(1,t) + beta1 u(1,t) = f(t)
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from .expr import Expr, evaluate, parse, unparse

__all__ = [
    "PiecewiseFunction",
    "Kernel",
    "BoundaryConditions",
    "ProblemSpec",
    "InputSignal",
    "InitialState",
    "ModelError",
    "make_example1",
    "make_example2",
    "breakpoint_set",
]

THETA_LATTICE = 10_000
KERNEL_LATTICE = 256


class ModelError(ValueError):
    pass


def _as_expr(e) -> Expr:
    return parse(e) if isinstance(e, str) else e


def _broadcast(value, shape):
    return np.broadcast_to(np.asarray(value, dtype=float), shape)


@dataclass(frozen=True)
class PiecewiseFunction:
    """Function of ``x`` on [0, 1] given piece by piece.

    Piece ``i`` lives on ``[a_i, a_{i+1})`` and the last piece is closed at 1.
    ``sides`` optionally lists, per interior breakpoint, whether the value at
    that breakpoint comes from the ``"right"`` piece (default) or the
    ``"left"`` one, so sets like ``(0.3, 0.7)`` can be expressed.
    """

    breakpoints: tuple
    pieces: tuple
    sides: tuple = ()

    def __post_init__(self):
        bps = tuple(float(b) for b in self.breakpoints)
        pieces = tuple(_as_expr(p) for p in self.pieces)
        if len(bps) < 2 or bps[0] != 0.0 or bps[-1] != 1.0:
            raise ModelError("breakpoints must start at 0 and end at 1")
        if any(b >= c for b, c in zip(bps, bps[1:])):
            raise ModelError("breakpoints must be strictly increasing")
        if len(pieces) != len(bps) - 1:
            raise ModelError(f"{len(bps) - 1} pieces expected, got {len(pieces)}")
        sides = tuple(self.sides) or ("right",) * (len(bps) - 2)
        if len(sides) != len(bps) - 2 or any(s not in ("left", "right") for s in sides):
            raise ModelError("sides must give 'left' or 'right' per interior breakpoint")
        object.__setattr__(self, "breakpoints", bps)
        object.__setattr__(self, "pieces", pieces)
        object.__setattr__(self, "sides", sides)

    @classmethod
    def constant(cls, value: float) -> "PiecewiseFunction":
        return cls((0.0, 1.0), (repr(float(value)),))

    @classmethod
    def of(cls, text: str) -> "PiecewiseFunction":
        return cls((0.0, 1.0), (text,))

    @property
    def interior_breakpoints(self) -> tuple:
        return self.breakpoints[1:-1]

    def piece_index(self, x):
        """Index of the piece that owns each ``x``."""
        x = np.asarray(x, dtype=float)
        inner = np.asarray(self.interior_breakpoints)
        idx = np.searchsorted(inner, x, side="right")
        for k, (b, side) in enumerate(zip(inner, self.sides)):
            if side == "left":
                idx = np.where(x == b, k, idx)
        return idx

    def __call__(self, x):
        x_arr = np.asarray(x, dtype=float)
        idx = self.piece_index(x_arr)
        out = np.empty(x_arr.shape)
        for i, piece in enumerate(self.pieces):
            mask = idx == i
            if np.any(mask):
                vals = evaluate(piece, {"x": x_arr[mask]})
                out[mask] = _broadcast(vals, out[mask].shape)
        if out.ndim == 0:
            return float(out)
        return out

    def describe(self) -> str:
        parts = []
        for i, piece in enumerate(self.pieces):
            parts.append(f"[{self.breakpoints[i]:g},{self.breakpoints[i + 1]:g}): {unparse(piece)}")
        return "; ".join(parts)


InitialState = PiecewiseFunction


@dataclass(frozen=True)
class Kernel:
    """Volterra kernel phi(x, y), written with variables ``x`` and ``y``."""

    expr: Expr

    def __post_init__(self):
        object.__setattr__(self, "expr", _as_expr(self.expr))

    def __call__(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        shape = np.broadcast_shapes(x.shape, y.shape)
        vals = np.asarray(_broadcast(evaluate(self.expr, {"x": x, "y": y}), shape))
        return float(vals) if vals.ndim == 0 else np.array(vals)

    @cached_property
    def sup_bound(self) -> float:
        """Max of |phi| over a 256 x 256 lattice of [0, 1]^2."""
        g = np.linspace(0.0, 1.0, KERNEL_LATTICE)
        X, Y = np.meshgrid(g, g, indexing="ij")
        return float(np.max(np.abs(self(X, Y))))


@dataclass(frozen=True)
class BoundaryConditions:
    alpha0: float
    beta0: float
    alpha1: float
    beta1: float

    def __post_init__(self):
        if self.alpha0 == 0 and self.beta0 == 0:
            raise ModelError("left boundary: alpha0 and beta0 cannot both vanish")
        if self.alpha1 == 0 and self.beta1 == 0:
            raise ModelError("right boundary: alpha1 and beta1 cannot both vanish")


@dataclass(frozen=True)
class ProblemSpec:
    theta: PiecewiseFunction
    sigma: PiecewiseFunction
    lam: PiecewiseFunction
    phi: Kernel
    bc: BoundaryConditions

    def __post_init__(self):
        lattice = np.linspace(0.0, 1.0, THETA_LATTICE)
        if not np.min(self.theta(lattice)) > 0:
            raise ModelError("theta must be bounded away from zero on [0, 1]")


@dataclass(frozen=True)
class InputSignal:
    """Boundary input f(t).

    With ``scaled`` set, the signal fed to an n-point grid is
    ``(1 - 1/n) f(t)``.  ``zeros`` lists times at which the value is exactly 0
    (removable singularities of the formula).
    """

    expr: Expr
    scaled: bool = False
    zeros: tuple = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "expr", _as_expr(self.expr))
        object.__setattr__(self, "zeros", tuple(float(z) for z in self.zeros))

    def factor(self, n: int | None) -> float:
        if self.scaled and n is not None:
            return 1.0 - 1.0 / n
        return 1.0

    def __call__(self, t, n: int | None = None):
        t_arr = np.atleast_1d(np.asarray(t, dtype=float))
        out = np.zeros(t_arr.shape)
        live = ~np.isin(t_arr, self.zeros)
        if np.any(live):
            vals = evaluate(self.expr, {"t": t_arr[live]})
            out[live] = _broadcast(vals, out[live].shape)
        out *= self.factor(n)
        if np.ndim(t) == 0:
            return float(out[0])
        return out

    def describe(self) -> str:
        prefix = "(1-1/n)*" if self.scaled else ""
        return prefix + unparse(self.expr)


def _example_spec() -> ProblemSpec:
    return ProblemSpec(
        theta=PiecewiseFunction((0, 0.5, 1), ("1+x", "2")),
        sigma=PiecewiseFunction((0, 0.3, 1), ("2-2*x", "sin(5*pi*x)")),
        lam=PiecewiseFunction((0, 0.7, 1), ("exp(-5*x)", "2*x^4")),
        phi=Kernel("1"),
        bc=BoundaryConditions(alpha0=1.0, beta0=0.0, alpha1=0.0, beta1=1.0),
    )


def make_example1():
    """Step initial state and input ``(1 - 1/n) e^{-t} sin(pi t)``."""
    u0 = PiecewiseFunction((0, 0.3, 0.7, 1), ("0", "0.5", "0"), sides=("left", "right"))
    f = InputSignal("exp(-t)*sin(pi*t)", scaled=True)
    return _example_spec(), u0, f


def make_example2():
    """Zero initial state and the flat input ``(1 - 1/n) exp(-(5t - 5t^2)^-2)``."""
    u0 = PiecewiseFunction.constant(0.0)
    f = InputSignal("exp(-(5*t-5*t^2)^(-2))", scaled=True, zeros=(0.0, 1.0))
    return _example_spec(), u0, f


def breakpoint_set(spec: ProblemSpec) -> list:
    """Interior points where theta, sigma or lambda may fail to be smooth."""
    pts = set()
    for fn in (spec.theta, spec.sigma, spec.lam):
        pts.update(fn.interior_breakpoints)
    return sorted(pts)
