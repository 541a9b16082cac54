import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pide_lab.expr import (
    ArityError,
    BinOp,
    Call,
    Const,
    ExprDomainError,
    ExprSyntaxError,
    Neg,
    Num,
    UnboundVariable,
    UnknownIdentifier,
    Var,
    evaluate,
    parse,
    unparse,
)


def test_simple_sum():
    assert parse("1+x") == BinOp("+", Num(1.0), Var("x"))


def test_sine_coefficient_tree():
    expected = Call("sin", (BinOp("*", BinOp("*", Num(5.0), Const("pi")), Var("x")),))
    assert parse("sin(5*pi*x)") == expected


@pytest.mark.parametrize(
    "text, env, value",
    [
        ("2*x^4", {"x": 0.5}, 0.125),
        ("exp(-5*x)", {"x": 0.0}, 1.0),
        ("x^3", {"x": 2.0}, 8.0),
        ("2^3^2", {}, 512.0),
        ("-x^2", {"x": 3.0}, -9.0),
        ("(-x)^2", {"x": 3.0}, 9.0),
        ("2^-3", {}, 0.125),
        ("1-2-3", {}, -4.0),
        ("8/4/2", {}, 1.0),
        ("-2*3", {}, -6.0),
        ("pow(2, 10)", {}, 1024.0),
        ("abs(-3) + sqrt(16)", {}, 7.0),
        ("cos(pi)", {}, -1.0),
        ("x*y - t", {"x": 2.0, "y": 3.0, "t": 1.0}, 5.0),
        ("1.5e2 + .5", {}, 150.5),
    ],
)
def test_evaluation(text, env, value):
    assert evaluate(parse(text), env) == pytest.approx(value, rel=1e-15)


def test_unknown_e_is_rejected_with_offset():
    with pytest.raises(UnknownIdentifier) as info:
        parse("e^-(5*t-5*t^2)^-2")
    assert info.value.offset == 0


def test_example2_input_formula():
    e = parse("exp(-(5*t-5*t^2)^(-2))")
    assert evaluate(e, {"t": 0.5}) == pytest.approx(math.exp(-0.64), rel=1e-15)


@pytest.mark.parametrize(
    "text, exc, offset",
    [
        ("1+*2", ExprSyntaxError, 2),
        ("(1+2", ExprSyntaxError, 4),
        ("1 2", ExprSyntaxError, 2),
        ("3 $ 4", ExprSyntaxError, 2),
        ("sin(1,2)", ArityError, 0),
        ("1 + pow(1)", ArityError, 4),
        ("sin", ArityError, 0),
        ("foo(1)", UnknownIdentifier, 0),
        ("x + z", UnknownIdentifier, 4),
    ],
)
def test_syntax_errors(text, exc, offset):
    with pytest.raises(exc) as info:
        parse(text)
    assert info.value.offset == offset


def test_empty_text():
    with pytest.raises(ExprSyntaxError):
        parse("   ")


@pytest.mark.parametrize("text", ["sqrt(-1)", "(-8)^(1/3)", "1/(x-x)", "0^(-1)", "exp(1000)"])
def test_domain_errors(text):
    with pytest.raises(ExprDomainError):
        evaluate(parse(text), {"x": 1.0})


def test_negative_base_integer_exponent_is_fine():
    assert evaluate(parse("(-2)^3"), {}) == -8.0


def test_unbound_variable():
    with pytest.raises(UnboundVariable):
        evaluate(parse("x + y"), {"x": 1.0})


def test_array_bindings_broadcast():
    x = np.linspace(0, 1, 5)
    np.testing.assert_array_equal(evaluate(parse("x^2"), {"x": x}), x**2)
    with pytest.raises(ExprDomainError):
        evaluate(parse("sqrt(x - 0.5)"), {"x": x})


# --- generated trees -------------------------------------------------------

_leaf = st.one_of(
    st.floats(min_value=0, max_value=1e6, allow_nan=False, allow_infinity=False).map(Num),
    st.sampled_from(["x", "y", "t"]).map(Var),
    st.just(Const("pi")),
)


def _extend(children):
    return st.one_of(
        st.builds(BinOp, st.sampled_from("+-*/^"), children, children),
        st.builds(Neg, children),
        st.builds(lambda a: Call("sin", (a,)), children),
        st.builds(lambda a, b: Call("pow", (a, b)), children, children),
    )


trees = st.recursive(_leaf, _extend, max_leaves=12)

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "neg": 3, "^": 4}


def _prec(e):
    if isinstance(e, BinOp):
        return _PREC[e.op]
    if isinstance(e, Neg):
        return _PREC["neg"]
    return 5


def minimal(e):
    """Render with as few parentheses as the precedence rules allow."""
    if isinstance(e, Num):
        return repr(e.value)
    if isinstance(e, (Var, Const)):
        return e.name
    if isinstance(e, Call):
        return f"{e.name}({', '.join(minimal(a) for a in e.args)})"
    if isinstance(e, Neg):
        inner = minimal(e.operand)
        return "-" + (inner if _prec(e.operand) >= 3 else f"({inner})")
    p = _PREC[e.op]
    left, right = minimal(e.left), minimal(e.right)
    if e.op == "^":
        if _prec(e.left) <= 4:
            left = f"({left})"
        if _prec(e.right) < 3:
            right = f"({right})"
    else:
        if _prec(e.left) < p:
            left = f"({left})"
        if _prec(e.right) <= p and not isinstance(e.right, Neg):
            right = f"({right})"
    return f"{left} {e.op} {right}"


@settings(max_examples=300, deadline=None)
@given(trees)
def test_round_trip(tree):
    assert parse(unparse(tree)) == tree
    assert parse(unparse(parse(unparse(tree)))) == parse(unparse(tree))


@settings(max_examples=300, deadline=None)
@given(trees)
def test_precedence_matches_full_parenthesization(tree):
    assert parse(minimal(tree)) == parse(unparse(tree))


@settings(max_examples=100, deadline=None)
@given(trees, st.floats(0, 1), st.floats(0, 1), st.floats(0, 1))
def test_evaluation_is_deterministic(tree, x, y, t):
    env = {"x": x, "y": y, "t": t}
    try:
        a = evaluate(tree, env)
    except ExprDomainError:
        with pytest.raises(ExprDomainError):
            evaluate(tree, env)
        return
    b = evaluate(tree, env)
    assert np.array_equal(np.float64(a), np.float64(b), equal_nan=True)
