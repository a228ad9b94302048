import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from holocurve.errors import BoundaryZeroError, QuadratureError
from holocurve.expression import parse
from holocurve.quadrature import circle_mean, circle_means, disk_integrals
from holocurve.zeros import ZeroList, count_zeros, winding_number


def test_circle_mean_of_polynomial_is_constant_term():
    assert circle_mean(lambda z: 3 + z + z**5, 2.0) == pytest.approx(3, abs=1e-13)


def test_circle_mean_log_abs_matches_jensen():
    # avg log|z - 1/2| over |z| = 2 is log 2
    assert circle_mean(lambda z: np.log(np.abs(z - 0.5)), 2.0) == pytest.approx(math.log(2), abs=1e-10)


def test_circle_means_reports_nodes():
    means, nodes = circle_means(lambda z: np.abs(z) ** 2, [1.0, 3.0])
    assert np.allclose(means, [1, 9])
    assert all(n >= 64 for n in nodes)


def test_circle_mean_failure_carries_estimate():
    with pytest.raises(QuadratureError) as info:
        circle_means(lambda z: np.log(np.abs(z.real - 0.3)), [1.0], max_power=8)
    assert info.value.estimate is not None


def test_disk_integrals_constant_density():
    # density 1 / pi against dA: A(r) = r^2, T(r) = (r^2 - 1) / 2
    r = np.array([1.5, 4.0, 20.0])
    A, T = disk_integrals(lambda z: np.full(z.shape, 1 / np.pi), r)
    assert np.allclose(A, r**2, rtol=1e-9)
    assert np.allclose(T, (r**2 - 1) / 2, rtol=1e-9)


def test_disk_integrals_fs_line():
    r = np.array([2.0, 10.0, 100.0])
    _, T = disk_integrals(lambda z: 1 / (np.pi * (1 + np.abs(z) ** 2) ** 2), r)
    assert np.allclose(T, 0.5 * np.log((1 + r**2) / 2), rtol=1e-10, atol=1e-12)


# zeros


def test_simple_zero():
    zl = count_zeros(parse("z"), 2)
    assert zl.zeros == ((0j, 1),)


def test_polynomial_multiplicity_and_exclusion():
    zl = count_zeros(parse("(z - 1)^2*(z + 3)"), 2)
    assert len(zl) == 1
    (a, m), = zl
    assert abs(a - 1) <= 1e-9 and m == 2


def test_exp_minus_one():
    zl = count_zeros(parse("exp(z) - 1"), 7)
    want = ZeroList(((0, 1), (2j * math.pi, 1), (-2j * math.pi, 1)), 7)
    assert zl.matches(want, 1e-9)


def test_analytic_multiple_zero():
    zl = count_zeros(parse("(z - 1)^3*exp(z)"), 2)
    assert zl.total == 3 and zl.matches(ZeroList(((1, 3),), 2), 1e-8)


def test_lambert_zeros_match_mpmath():
    import mpmath

    zl = count_zeros(parse("1 - z*exp(z)"), 12)
    want = []
    for k in range(-3, 4):
        w = complex(mpmath.lambertw(1, k))
        if abs(w) < 12:
            want.append((w, 1))
    assert zl.matches(ZeroList(tuple(want), 12), 1e-9)


def test_zero_on_circle_raises():
    with pytest.raises(BoundaryZeroError):
        count_zeros(parse("z - 2"), 2)
    with pytest.raises(BoundaryZeroError):
        count_zeros(parse("exp(z) - exp(1)"), 1)


def test_counting_function():
    zl = ZeroList(((0, 1), (2, 2)), 10)
    r = np.array([1.0, 2.0, 4.0])
    assert np.allclose(zl.counting(r), [0, math.log(2), math.log(4) + 2 * math.log(2)])


roots = st.lists(
    st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False), min_size=1, max_size=6
).filter(lambda rs: all(abs(abs(a) - 4) > 0.05 for a in rs) and all(
    abs(a - b) > 1e-2 for i, a in enumerate(rs) for b in rs[i + 1:]))


@settings(max_examples=60, deadline=None)
@given(roots, st.booleans())
def test_total_multiplicity_equals_winding(rs, transcendental):
    text = "*".join(f"(z - ({a.real!r} + {a.imag!r}*i))" for a in rs)
    if transcendental:
        text += "*exp(z/3)"
    g = parse(text)
    zl = count_zeros(g, 4.0)
    assert zl.total == winding_number(g, 4.0) == len(rs)
    assert zl.matches(ZeroList(tuple((a, 1) for a in rs), 4.0), 1e-7)


def test_winding_of_shifted_circle():
    g = parse("(z - 3)*(z + 3)")
    assert winding_number(g, 1.0, center=3) == 1
    assert winding_number(g, 1.0) == 0
