import math

import numpy as np
import pytest

from pide_lab.lift import (
    DegenerateLift,
    SmoothFunction,
    apply_P_smooth,
    boundary_trace,
    build_nu,
    volterra_integral,
)
from pide_lab.model import BoundaryConditions, Kernel, PiecewiseFunction, ProblemSpec, make_example1

SPEC1 = make_example1()[0]
CUBE = SmoothFunction("x^3", "3*x^2", "6*x")


def test_build_nu_example1():
    nu = build_nu(SPEC1.bc)
    assert (nu.mu1, nu.mu2) == (1.0, 3.0)
    assert nu(0.5) == 0.125


def test_build_nu_mixed():
    assert build_nu(BoundaryConditions(1, 0, 1, 1)).mu1 == 0.25


def test_build_nu_degenerate():
    with pytest.raises(DegenerateLift):
        build_nu(BoundaryConditions(1, 0, 1, -3))
    with pytest.raises(ValueError):
        build_nu(SPEC1.bc, mu2=2)


@pytest.mark.parametrize("bc", [(1, 0, 0, 1), (1, 0, 1, 1), (0.3, 2.0, 2.0, -0.5)])
@pytest.mark.parametrize("mu2", [3.0, 4.5])
def test_nu_satisfies_both_boundary_conditions(bc, mu2):
    bc = BoundaryConditions(*bc)
    nu = build_nu(bc, mu2).as_smooth()
    assert abs(bc.alpha1 * nu.dx(1.0) + bc.beta1 * nu.value(1.0) - 1.0) <= 1e-12
    assert abs(bc.alpha0 * nu.dx(0.0) + bc.beta0 * nu.value(0.0)) == 0.0
    m = build_nu(bc, mu2)
    assert abs(m.mu1 * (m.mu2 * bc.alpha1 + bc.beta1) - 1.0) <= 1e-12


def test_smooth_function_rejects_wrong_derivatives():
    with pytest.raises(ValueError, match="first"):
        SmoothFunction("x^3", "2*x^2", "6*x")
    with pytest.raises(ValueError, match="second"):
        SmoothFunction("x^3", "3*x^2", "5*x")
    SmoothFunction("sin(3*x)", "3*cos(3*x)", "-9*sin(3*x)")


def test_apply_P_at_origin():
    assert apply_P_smooth(SPEC1, CUBE, 0.0) == 0.0


def test_apply_P_at_one():
    # theta(1)*6 + sigma(1)*3 + lambda(1)*1 + int_0^1 y^3 dy
    by_hand = 2 * 6 + math.sin(5 * math.pi) * 3 + 2 * 1 + 0.25
    assert by_hand == pytest.approx(14.25, abs=1e-14)
    assert apply_P_smooth(SPEC1, CUBE, 1.0) == pytest.approx(by_hand, abs=1e-12)


def test_apply_P_vectorized_matches_scalar():
    x = np.linspace(0, 1, 13)
    vec = apply_P_smooth(SPEC1, CUBE, x)
    np.testing.assert_allclose(vec, [apply_P_smooth(SPEC1, CUBE, v) for v in x], rtol=1e-15)


def test_apply_P_linearity():
    rng = np.random.default_rng(11)
    spec = ProblemSpec(
        PiecewiseFunction((0, 0.4, 1), ("1 + x^2", "3 - x")),
        PiecewiseFunction.of("cos(2*x)"),
        PiecewiseFunction((0, 0.8, 1), ("-1", "x")),
        Kernel("exp(-x*y) + y"),
        BoundaryConditions(1, 0.5, 1, 1),
    )
    xi = SmoothFunction("sin(2*x)", "2*cos(2*x)", "-4*sin(2*x)")
    eta = SmoothFunction("x^4 - x", "4*x^3 - 1", "12*x^2")
    for x in rng.uniform(0, 1, 10):
        a, b = rng.uniform(-3, 3, 2)
        combo = SmoothFunction.scaled_sum(a, xi, b, eta)
        lhs = apply_P_smooth(spec, combo, x)
        rhs = a * apply_P_smooth(spec, xi, x) + b * apply_P_smooth(spec, eta, x)
        assert lhs == pytest.approx(rhs, abs=1e-10)


@pytest.mark.parametrize("x", [0.0, 0.13, 0.5, 0.91, 1.0])
def test_quadrature_against_antiderivative(x):
    # phi = 1, xi = 1 - 2y + 5y^4: int_0^x = x - x^2 + x^5
    q = volterra_integral(SPEC1, lambda y: 1 - 2 * y + 5 * y**4, x)
    assert q == pytest.approx(x - x**2 + x**5, abs=1e-12)


def test_quadrature_nonconstant_kernel():
    spec = ProblemSpec(SPEC1.theta, SPEC1.sigma, SPEC1.lam, Kernel("x*y"), SPEC1.bc)
    # int_0^x x*y*y^2 dy = x^5/4
    assert volterra_integral(spec, lambda y: y**2, 0.8) == pytest.approx(0.8**5 / 4, abs=1e-12)


def test_boundary_trace():
    assert boundary_trace(SPEC1.bc, CUBE) == 1.0
    assert boundary_trace(SPEC1.bc, build_nu(SPEC1.bc).as_smooth()) == 1.0
    assert boundary_trace(BoundaryConditions(1, 0, 1, 0), CUBE) == 3.0
