"""Finite-difference / Riemann-sum semi-discretization.

The n interior nodes ``x_j = j h`` with ``h = 1/(n+1)`` carry the state of

    dv/dt = P_n v + B_n f(t),   P_n = Theta_n L_n + Sigma_n D_n + Lambda_n + Phi_n

where ``L_n`` is the three-point Laplacian with ghost-point Robin rows,
``D_n`` the backward difference and ``Phi_n`` the lower-triangular Riemann
sum of the Volterra kernel.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .model import BoundaryConditions, PiecewiseFunction, ProblemSpec

__all__ = [
    "Grid",
    "BoundaryScalars",
    "Discretization",
    "DegenerateBoundary",
    "boundary_scalars",
    "assemble",
    "apply_Pn",
    "dense_dump",
    "MIN_N",
]

MIN_N = 3


class DegenerateBoundary(ArithmeticError):
    """A Robin correction denominator vanishes on this grid."""


@dataclass(frozen=True)
class Grid:
    n: int

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"grid size must be a positive integer, got {self.n!r}")

    @property
    def h(self) -> float:
        return 1.0 / (self.n + 1)

    @cached_property
    def nodes(self) -> np.ndarray:
        # j/(n+1) rather than j*h: keeps nodes like 3/10 bit-equal to 0.3
        return np.arange(1, self.n + 1) / (self.n + 1)


@dataclass(frozen=True)
class BoundaryScalars:
    r0: float
    r1: float
    q0: float
    b_n: float


def boundary_scalars(bc: BoundaryConditions, theta: PiecewiseFunction, grid: Grid) -> BoundaryScalars:
    h = grid.h
    den_r0 = 3 * bc.alpha0 - 2 * h * bc.beta0
    den_q0 = bc.alpha0 - h * bc.beta0
    den_r1 = 3 * bc.alpha1 + 2 * h * bc.beta1
    for name, den in (("3*alpha0 - 2h*beta0", den_r0), ("alpha0 - h*beta0", den_q0),
                      ("3*alpha1 + 2h*beta1", den_r1)):
        if den == 0:
            raise DegenerateBoundary(
                f"{name} vanishes for n={grid.n}; the grid is too coarse for these Robin parameters"
            )
    theta_last = theta(grid.nodes[-1])
    return BoundaryScalars(
        r0=bc.alpha0 / den_r0,
        r1=bc.alpha1 / den_r1,
        q0=-bc.beta0 / den_q0,
        b_n=2 * h * theta_last / den_r1,
    )


@dataclass(frozen=True, eq=False)
class Discretization:
    """All matrices of the n-point scheme.

    Diagonal factors are stored as vectors, ``L_n`` as three bands, ``D_n`` as
    its diagonal and sub-diagonal, ``Phi_n`` as a dense lower-triangular array.
    The dense forms (``L``, ``D``, ``A``, ``P``) are built on demand.
    """

    grid: Grid
    theta: np.ndarray
    sigma: np.ndarray
    lam: np.ndarray
    L_lower: np.ndarray
    L_diag: np.ndarray
    L_upper: np.ndarray
    D_diag: np.ndarray
    D_lower: np.ndarray
    Phi: np.ndarray
    B: np.ndarray
    scalars: BoundaryScalars

    @property
    def n(self) -> int:
        return self.grid.n

    @property
    def h(self) -> float:
        return self.grid.h

    @cached_property
    def L(self) -> np.ndarray:
        return np.diag(self.L_diag) + np.diag(self.L_lower, -1) + np.diag(self.L_upper, 1)

    @cached_property
    def D(self) -> np.ndarray:
        return np.diag(self.D_diag) + np.diag(self.D_lower, -1)

    @cached_property
    def A(self) -> np.ndarray:
        return self.theta[:, None] * self.L + self.sigma[:, None] * self.D + np.diag(self.lam)

    @cached_property
    def P(self) -> np.ndarray:
        return self.A + self.Phi

    @classmethod
    def from_matrix(cls, P, B=None) -> "Discretization":
        """Wrap an arbitrary square matrix as a synthetic discretization.

        Everything is folded into the ``Lambda`` diagonal and the ``Phi``
        block so that ``P`` and ``apply_Pn`` reproduce the matrix; handy for
        probing the analysis routines on tiny hand-made systems.
        """
        P = np.atleast_2d(np.asarray(P, dtype=float))
        n = P.shape[0]
        zeros = np.zeros(n)
        return cls(
            grid=Grid(n),
            theta=zeros.copy(),
            sigma=zeros.copy(),
            lam=np.diag(P).copy(),
            L_lower=np.zeros(n - 1),
            L_diag=zeros.copy(),
            L_upper=np.zeros(n - 1),
            D_diag=zeros.copy(),
            D_lower=np.zeros(n - 1),
            Phi=P - np.diag(np.diag(P)),
            B=zeros.copy() if B is None else np.asarray(B, dtype=float),
            scalars=BoundaryScalars(0.0, 0.0, 0.0, 0.0),
        )


def assemble(spec: ProblemSpec, grid: Grid) -> Discretization:
    n, h = grid.n, grid.h
    if n < MIN_N:
        raise ValueError(f"assembly needs n >= {MIN_N}, got n={n}")
    sc = boundary_scalars(spec.bc, spec.theta, grid)
    x = grid.nodes
    inv_h2 = 1.0 / h**2

    L_diag = np.full(n, -2.0 * inv_h2)
    L_lower = np.full(n - 1, inv_h2)
    L_upper = np.full(n - 1, inv_h2)
    L_diag[0] = (4 * sc.r0 - 2) * inv_h2
    L_upper[0] = (1 - sc.r0) * inv_h2
    L_diag[-1] = (4 * sc.r1 - 2) * inv_h2
    L_lower[-1] = (1 - sc.r1) * inv_h2

    D_diag = np.full(n, 1.0 / h)
    D_diag[0] = sc.q0
    D_lower = np.full(n - 1, -1.0 / h)

    X, Y = np.meshgrid(x, x, indexing="ij")
    Phi = np.tril(h * np.asarray(np.broadcast_to(spec.phi(X, Y), (n, n)), dtype=float))

    B = np.zeros(n)
    B[-1] = sc.b_n * inv_h2

    return Discretization(
        grid=grid,
        theta=np.asarray(spec.theta(x), dtype=float),
        sigma=np.asarray(spec.sigma(x), dtype=float),
        lam=np.asarray(spec.lam(x), dtype=float),
        L_lower=L_lower,
        L_diag=L_diag,
        L_upper=L_upper,
        D_diag=D_diag,
        D_lower=D_lower,
        Phi=Phi,
        B=B,
        scalars=sc,
    )


def apply_Pn(d: Discretization, v) -> np.ndarray:
    """``P_n v`` via band, bidiagonal, diagonal and triangular passes."""
    v = np.asarray(v, dtype=float)
    if v.shape != (d.n,):
        raise ValueError(f"expected a vector of length {d.n}, got shape {v.shape}")
    Lv = d.L_diag * v
    Lv[:-1] += d.L_upper * v[1:]
    Lv[1:] += d.L_lower * v[:-1]
    Dv = d.D_diag * v
    Dv[1:] += d.D_lower * v[:-1]
    return d.theta * Lv + d.sigma * Dv + d.lam * v + d.Phi @ v


def dense_dump(M) -> str:
    """Row-major text dump, one row per line, 17 significant digits."""
    M = np.atleast_2d(np.asarray(M, dtype=float))
    return "".join(" ".join(f"{a:.17g}" for a in row) + "\n" for row in M)
