"""Time integration of the semi-discrete system and a dense matrix exponential."""

from __future__ import annotations

import io
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from .disc import Discretization, Grid
from .model import InputSignal

__all__ = [
    "IntegratorConfig",
    "Trajectory",
    "SingularStepMatrix",
    "SizeGuardError",
    "simulate",
    "expm_dense",
    "MAX_DENSE_N",
]

MAX_DENSE_N = 512

# Higham (2005) degree-13 Pade coefficients and the 1-norm threshold
_PADE13 = (
    64764752532480000.0, 32382376266240000.0, 7771770303897600.0, 1187353796428800.0,
    129060195264000.0, 10559470521600.0, 670442572800.0, 33522128640.0,
    1323241920.0, 40840800.0, 960960.0, 16380.0, 182.0, 1.0,
)
_THETA13 = 5.371920351148152


class SingularStepMatrix(ArithmeticError):
    pass


class SizeGuardError(ValueError):
    pass


def expm_dense(A, t: float = 1.0) -> np.ndarray:
    """``exp(t A)`` by scaling and squaring with a [13/13] Pade approximant."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    n = A.shape[0]
    if A.shape != (n, n):
        raise ValueError(f"expm_dense needs a square matrix, got shape {A.shape}")
    if n > MAX_DENSE_N:
        raise SizeGuardError(f"expm_dense: n={n} exceeds the dense guard {MAX_DENSE_N}")
    if t < 0:
        raise ValueError("expm_dense: t must be non-negative")
    X = t * A
    norm1 = np.linalg.norm(X, 1)
    if not np.isfinite(norm1):
        raise ValueError("expm_dense: matrix has non-finite entries")
    if norm1 == 0.0:
        return np.eye(n)
    s = 0 if norm1 <= _THETA13 else int(np.ceil(np.log2(norm1 / _THETA13)))
    X = X / 2.0**s

    b = _PADE13
    ident = np.eye(n)
    X2 = X @ X
    X4 = X2 @ X2
    X6 = X4 @ X2
    U = X @ (X6 @ (b[13] * X6 + b[11] * X4 + b[9] * X2)
             + b[7] * X6 + b[5] * X4 + b[3] * X2 + b[1] * ident)
    V = X6 @ (b[12] * X6 + b[10] * X4 + b[8] * X2) + b[6] * X6 + b[4] * X4 + b[2] * X2 + b[0] * ident
    R = np.linalg.solve(V - U, V + U)
    for _ in range(s):
        R = R @ R
    return R


@dataclass(frozen=True)
class IntegratorConfig:
    step_count: int = 4100
    sample_count: int = 101
    scheme: str = "crank_nicolson"

    def __post_init__(self):
        if self.scheme != "crank_nicolson":
            raise ValueError(f"unsupported scheme {self.scheme!r}")
        if self.step_count < 1 or self.sample_count < 2:
            raise ValueError("need step_count >= 1 and sample_count >= 2")
        if self.step_count % (self.sample_count - 1):
            raise ValueError(
                f"step_count={self.step_count} is not a multiple of sample_count-1={self.sample_count - 1}"
            )


@dataclass(frozen=True, eq=False)
class Trajectory:
    grid: Grid
    times: np.ndarray
    states: np.ndarray
    input_used: str = ""
    step_count: int = 0

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("t," + ",".join(f"v{j}" for j in range(1, self.grid.n + 1)) + "\n")
        for t, row in zip(self.times, self.states):
            buf.write(",".join(f"{a:.17g}" for a in (t, *row)) + "\n")
        return buf.getvalue()

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write(self.to_csv())


def _input_values(f, times: np.ndarray, n: int) -> np.ndarray:
    if isinstance(f, InputSignal):
        return np.asarray(f(times, n), dtype=float)
    return np.array(np.broadcast_to(np.asarray(f(times), dtype=float), times.shape))


def simulate(
    d: Discretization,
    v0,
    f: InputSignal | Callable,
    T: float,
    cfg: IntegratorConfig = IntegratorConfig(),
) -> Trajectory:
    """Crank-Nicolson integration of ``v' = P_n v + B_n f(t)`` on [0, T].

    The step matrix ``I - dt/2 P_n`` is LU-factored once; the source term is
    the trapezoidal average of the input at the step ends.
    """
    v = np.array(v0, dtype=float)
    if v.shape != (d.n,):
        raise ValueError(f"initial state has shape {v.shape}, expected ({d.n},)")
    if not T > 0:
        raise ValueError("T must be positive")
    N = cfg.step_count
    dt = T / N
    t_steps = T * np.arange(N + 1) / N
    fvals = _input_values(f, t_steps, d.n)

    P = d.P
    ident = np.eye(d.n)
    lhs = ident - 0.5 * dt * P
    rhs_mat = ident + 0.5 * dt * P
    lu, piv = lu_factor(lhs, check_finite=True)
    pivots = np.abs(np.diag(lu))
    if not np.all(np.isfinite(lu)) or pivots.min() <= np.finfo(float).eps * pivots.max():
        raise SingularStepMatrix(
            f"Crank-Nicolson step matrix is singular for n={d.n} with dt={dt:.3g}; "
            "increase step_count"
        )
    half_B = 0.5 * dt * d.B

    stride = N // (cfg.sample_count - 1)
    states = np.empty((cfg.sample_count, d.n))
    states[0] = v
    for k in range(N):
        v = lu_solve((lu, piv), rhs_mat @ v + half_B * (fvals[k] + fvals[k + 1]), check_finite=False)
        if (k + 1) % stride == 0:
            states[(k + 1) // stride] = v
    times = T * np.arange(cfg.sample_count) / (cfg.sample_count - 1)
    label = f.describe() if isinstance(f, InputSignal) else getattr(f, "__name__", "callable")
    return Trajectory(grid=d.grid, times=times, states=states, input_used=label, step_count=N)
