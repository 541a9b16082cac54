"""Restriction to nodes, piecewise-constant extension and discrete norms."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .disc import Grid

__all__ = [
    "GridFunction",
    "restrict",
    "extend_eval",
    "norm",
    "l2_diff_cross_grid",
    "cell_edges",
    "sample_extension",
]


@dataclass(frozen=True, eq=False)
class GridFunction:
    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.shape[-1:] != (self.grid.n,):
            raise ValueError(f"expected {self.grid.n} values, got shape {vals.shape}")
        object.__setattr__(self, "values", vals)


def restrict(z: Callable, grid: Grid) -> np.ndarray:
    """``[z(h), z(2h), ..., z(nh)]``."""
    vals = np.asarray(z(grid.nodes), dtype=float)
    return np.array(np.broadcast_to(vals, (grid.n,)))


def cell_edges(grid: Grid) -> np.ndarray:
    """Edges 0, h, ..., nh, 1 of the cells on which S_n is constant."""
    return np.concatenate(([0.0], grid.nodes, [1.0]))


def sample_extension(values, grid: Grid, x) -> np.ndarray:
    """Vectorized ``S_n v`` at points ``x``; ``values`` may carry leading axes."""
    values = np.asarray(values, dtype=float)
    x = np.asarray(x, dtype=float)
    # cell j (1-based) is ((j-1)h, jh]; x = 0 joins cell 1, x > nh gets 0
    idx = np.searchsorted(grid.nodes, x, side="left")
    padded = np.concatenate([values, np.zeros(values.shape[:-1] + (1,))], axis=-1)
    return padded[..., idx]


def extend_eval(v: GridFunction, x: float) -> float:
    return float(sample_extension(v.values, v.grid, x))


def norm(v, kind: str = "two_d") -> float:
    v = np.asarray(v, dtype=float)
    if kind == "two":
        return float(np.linalg.norm(v))
    if kind == "two_d":
        return float(np.sqrt(1.0 / (v.size + 1)) * np.linalg.norm(v))
    if kind == "inf":
        return float(np.max(np.abs(v))) if v.size else 0.0
    raise ValueError(f"unknown norm kind {kind!r}")


def l2_diff_cross_grid(vA: GridFunction, vB: GridFunction):
    """Exact ``||S_nA vA - S_nB vB||_{L2(0,1)}``.

    Both extensions are constant on the cells of the merged edge set, so the
    integral is a finite sum.  Leading axes on the values (e.g. time) are
    carried through and give one norm per slice.
    """
    edges = np.union1d(cell_edges(vA.grid), cell_edges(vB.grid))
    widths = np.diff(edges)
    mids = 0.5 * (edges[:-1] + edges[1:])
    diff = sample_extension(vA.values, vA.grid, mids) - sample_extension(vB.values, vB.grid, mids)
    out = np.sqrt(np.sum(widths * diff**2, axis=-1))
    return float(out) if np.ndim(out) == 0 else out
