import cmath

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from holocurve.errors import ExpressionSyntaxError, SingularPointError
from holocurve.expression import (
    Add,
    Call,
    Const,
    Div,
    Mul,
    Neg,
    Pow,
    Sub,
    Var,
    as_polynomial,
    curve_jet,
    free_variables,
    jet_eval,
    parse,
    substitute,
    to_text,
)
from holocurve.jets import Jet
from oracles import taylor_coefficients

# fixed battery of analytic expressions and base points
BATTERY = [
    ("exp(z)*z", 0.7 + 0.1j),
    ("z^3 - 2*z + 1", -0.4 + 0.9j),
    ("exp(z^2)/(1 + z)", 0.3 - 0.2j),
    ("log(2 + z)", 0.5 + 0.5j),
    ("(z - 1)^-2", 0.2 + 0.4j),
    ("exp(i*z) + exp(-i*z)", 1.1 - 0.3j),
    ("z*log(3 - z)^2", -0.6 + 0.2j),
    ("1/(exp(z) + 2)", 0.1 + 0.8j),
]

# Taylor coefficients of z e^z at 0.7 + 0.1i from Richardson differences in mpmath
FROZEN_ZEXP = [
    1.3824806509342602 + 0.34109710232530743j,
    3.386172982707286 + 0.5421369153938858j,
    2.6949326572401557 + 0.37158836423123204j,
    1.2322596077088896 + 0.15736942358850706j,
    0.3915520824177651 + 0.0477190147749842j,
]


def close(a, b, rel=1e-6, abs_=1e-12):
    return abs(a - b) <= rel * abs(b) + abs_


def test_exp_series():
    got = jet_eval(parse("exp(z)"), 0, 3).coeffs
    assert np.allclose(got, [1, 1, 1 / 2, 1 / 6], rtol=0, atol=1e-15)


def test_square_at_one():
    assert np.array_equal(jet_eval(parse("z^2"), 1, 2).coeffs, [1, 2, 1])


def test_zexp_matches_frozen_oracle():
    got = jet_eval(parse("exp(z)*z"), 0.7 + 0.1j, 4).coeffs
    for g, w in zip(got, FROZEN_ZEXP):
        assert close(g, w)


@pytest.mark.parametrize("text,z0", BATTERY)
def test_battery_matches_richardson(text, z0):
    node = parse(text)
    got = jet_eval(node, z0, 6).coeffs
    want = taylor_coefficients(node, z0, 6)
    for g, w in zip(got, want):
        assert close(g, w)


def test_derivative_extraction():
    j = jet_eval(parse("exp(2*z)"), 0, 4)
    assert j.derivative(3) == pytest.approx(8)
    assert np.allclose(j.derivatives(), [1, 2, 4, 8, 16])
    assert np.allclose(j.d().coeffs, jet_eval(parse("2*exp(2*z)"), 0, 3).coeffs)


def test_curve_jet_examples():
    a, b = curve_jet([parse("1"), parse("z")], 2, 1)
    assert np.array_equal(a.coeffs, [1, 0]) and np.array_equal(b.coeffs, [2, 1])
    third = curve_jet([parse("1"), parse("z"), parse("exp(z)")], 0, 2)[2]
    assert np.allclose(third.coeffs, [1, 1, 0.5])


def test_curve_jet_matches_richardson():
    comps = [parse("1"), parse("z^2"), parse("exp(z)")]
    for node, jet in zip(comps, curve_jet(comps, 1, 3)):
        for g, w in zip(jet.coeffs, taylor_coefficients(node, 1, 3)):
            assert close(g, w)


def test_vectorised_base_points():
    z = np.array([0.1, 0.2 + 1j, -1.5])
    j = jet_eval(parse("exp(z)*z"), z, 2)
    for k, zk in enumerate(z):
        single = jet_eval(parse("exp(z)*z"), zk, 2)
        assert np.allclose(j.coeffs[:, k], single.coeffs)


@pytest.mark.parametrize("text", ["1/z", "log(z)", "1/(z - 0)"])
def test_singular_point_reports_subexpression(text):
    with pytest.raises(SingularPointError) as info:
        jet_eval(parse(text), 0, 2)
    assert info.value.subexpression is not None


def test_unbound_variable():
    with pytest.raises(KeyError):
        jet_eval(parse("z + w"), 0, 1)


# parser


@pytest.mark.parametrize(
    "text,column",
    [("z +* 2", 4), ("exp(z", 6), ("z^1.5", 3), ("sin(z)", 1), ("2 z", 3), ("", 1)],
)
def test_syntax_errors_carry_position(text, column):
    with pytest.raises(ExpressionSyntaxError) as info:
        parse(text)
    assert info.value.position + 1 == column


def test_parse_structure():
    assert parse("-z^2") == Neg(Pow(Var("z"), 2))
    assert parse("2*i") == Mul(Const(2), Const(1j))
    assert parse("a - b - c") == Sub(Sub(Var("a"), Var("b")), Var("c"))
    assert parse("z^(-3)") == Pow(Var("z"), -3)


def test_free_variables_and_substitute():
    node = parse("w1*exp(w2) + z")
    assert free_variables(node) == {"w1", "w2", "z"}
    sub = substitute(node, {"w1": parse("z"), "w2": parse("2*z")})
    assert free_variables(sub) == {"z"}
    assert jet_eval(sub, 0.5, 0).value == pytest.approx(0.5 * cmath.exp(1) + 0.5)


def test_as_polynomial():
    poly = as_polynomial(parse("(w0 + 2*w1)^2 - w0*w1"), ["w0", "w1"])
    assert poly == {(2, 0): 1, (1, 1): 3, (0, 2): 4}
    assert as_polynomial(parse("exp(w0)"), ["w0"]) is None
    assert as_polynomial(parse("w0 / w1"), ["w0", "w1"]) is None


# constants the parser can produce: nonnegative reals and i
leaves = st.one_of(
    st.just(Var("z")),
    st.just(Const(1j)),
    st.builds(Const, st.floats(min_value=0, max_value=1e6, allow_nan=False)),
)


def extend(children):
    return st.one_of(
        st.builds(Neg, children),
        st.builds(Add, children, children),
        st.builds(Sub, children, children),
        st.builds(Mul, children, children),
        st.builds(Div, children, children),
        st.builds(Pow, children, st.integers(-3, 4)),
        st.builds(Call, st.sampled_from(["exp", "log"]), children),
    )


trees = st.recursive(leaves, extend, max_leaves=8)


@settings(max_examples=300, deadline=None)
@given(trees)
def test_print_parse_round_trip(tree):
    assert parse(to_text(tree)) == tree


@settings(max_examples=300, deadline=None)
@given(trees)
def test_parse_print_parse_is_stable(tree):
    parsed = parse(to_text(tree))
    assert parse(to_text(parsed)) == parsed


coeff_lists = st.lists(
    st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False), min_size=5, max_size=5
)


@settings(max_examples=200, deadline=None)
@given(coeff_lists, coeff_lists)
def test_product_is_cauchy_convolution(a, b):
    got = (Jet(a) * Jet(b)).coeffs
    want = np.convolve(a, b)[:5]
    assert np.allclose(got, want, rtol=1e-12, atol=1e-12)


@settings(max_examples=200, deadline=None)
@given(coeff_lists)
def test_exp_satisfies_chain_rule_recursion(p):
    c = Jet(p).exp().coeffs
    dp = np.arange(1, 5) * np.asarray(p[1:])
    # (e^p)' = p' e^p: (j + 1) c_{j+1} = sum_k (k + 1) p_{k+1} c_{j-k}
    for j in range(4):
        rhs = sum(dp[k] * c[j - k] for k in range(j + 1))
        assert abs((j + 1) * c[j + 1] - rhs) <= 1e-9 * (1 + abs(rhs))


@settings(max_examples=100, deadline=None)
@given(coeff_lists.filter(lambda p: abs(p[0]) > 0.1))
def test_reciprocal_inverts(p):
    one = (Jet(p) * Jet(p).reciprocal()).coeffs
    assert np.allclose(one, [1, 0, 0, 0, 0], atol=1e-8)
