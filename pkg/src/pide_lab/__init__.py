"""Semi-discrete approximation of a boundary-controlled parabolic PIDE.

Assemble the n-point scheme with :func:`pide_lab.disc.assemble`, integrate it
with :func:`pide_lab.ode.simulate`, and compare grids with
:mod:`pide_lab.gridops`.  :mod:`pide_lab.analysis` measures the structural
properties of the scheme across grid sizes.
"""

from .disc import Discretization, Grid, apply_Pn, assemble, boundary_scalars
from .expr import evaluate, parse, unparse
from .gridops import GridFunction, extend_eval, l2_diff_cross_grid, norm, restrict
from .model import (
    BoundaryConditions,
    InputSignal,
    Kernel,
    PiecewiseFunction,
    ProblemSpec,
    breakpoint_set,
    make_example1,
    make_example2,
)
from .ode import IntegratorConfig, Trajectory, expm_dense, simulate

__version__ = "0.1.0"
