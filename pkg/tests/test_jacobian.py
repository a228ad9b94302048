import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from holocurve.errors import DegenerateConfigurationError, DomainError, PoleError
from holocurve.exterior import ExteriorElement
from holocurve.jacobian import (
    HolomorphicField,
    MeromorphicVectorField,
    PoleSection,
    effectivity_test,
    field_minors,
    find_effective_multiindex,
    first_integral_check,
    g_ratio,
    growth_inequality,
    interior_scalar,
    jacobian_scalar,
    jacobian_zeros,
    lift_field,
    ramification,
    smt_identity,
    smt_identity_residual,
    smt_inequality,
    wedge_scalar,
)
from holocurve.nevanlinna import ProjectiveCurve
from holocurve.zeros import ZeroList

D1 = MeromorphicVectorField.coordinate(2, 1)
D2 = MeromorphicVectorField.coordinate(2, 2)
ONE = PoleSection.one(2)
PHI2 = HolomorphicField((D2,), ONE)
EXP = ProjectiveCurve.affine("z", "exp(z)")
SQUARE = ProjectiveCurve.affine("z^2", "exp(z)")
PTS = np.array([0.3 + 0.1j, -1.2 + 0.7j, 2.0, 0.5j])


def test_jacobian_scalar_examples():
    assert np.allclose(jacobian_scalar(EXP, PHI2, PTS, 0).value, 1)
    assert np.allclose(jacobian_scalar(SQUARE, PHI2, PTS, 0).value, 2 * PTS)


def test_three_routes_agree_up_to_interior_sign():
    fields = [
        (EXP, PHI2),
        (SQUARE, HolomorphicField((MeromorphicVectorField(("w2", "1 + w1")),), ONE)),
        (ProjectiveCurve.affine("z", "z^3", "exp(z)"),
         HolomorphicField((MeromorphicVectorField(("1", "w1", "0")), MeromorphicVectorField(("0", "w3", "1"))),
                          PoleSection.one(3))),
    ]
    for f, phi in fields:
        a = jacobian_scalar(f, phi, PTS, 2).coeffs
        b = wedge_scalar(f, phi, PTS, 2).coeffs
        c = interior_scalar(f, phi, PTS, 2).coeffs
        sign = (-1) ** (phi.q * (phi.n - phi.q))
        assert np.allclose(a, b, rtol=1e-13, atol=1e-13)
        assert np.allclose(c, sign * a, rtol=1e-13, atol=1e-13)


def test_lift_of_w1_d1_at_one():
    phi = HolomorphicField((MeromorphicVectorField(("w1", "0")),), ONE)
    lifted = lift_field(phi, EXP, 1.0, 0)
    assert lifted[(1,)].value == pytest.approx(1)
    assert lifted[(2,)].value == 0


def test_repeated_field_gives_zero():
    f = ProjectiveCurve.affine("z", "z^2", "exp(z)")
    X = MeromorphicVectorField(("1", "w2", "w1"))
    phi = HolomorphicField((X, X), PoleSection.one(3))
    assert np.all(jacobian_scalar(f, phi, PTS, 0).value == 0)
    assert all(np.all(v.value == 0) for v in field_minors(phi, f, PTS, 0).values())


def test_accepts_exterior_element():
    phi = ExteriorElement.vector([0, 1])
    assert jacobian_scalar(EXP, phi, 0.7, 0).value == pytest.approx(1)


coeffs = st.complex_numbers(max_magnitude=5, allow_nan=False, allow_infinity=False)


@settings(max_examples=50, deadline=None)
@given(coeffs, coeffs, coeffs)
def test_linear_in_the_field(a, b, z):
    Xa = MeromorphicVectorField((f"{abs(a)}", "w1"))
    Xb = MeromorphicVectorField(("w2", f"{abs(b)}"))
    Xs = MeromorphicVectorField((f"{abs(a)} + w2", f"w1 + {abs(b)}"))
    w = lambda X: jacobian_scalar(EXP, HolomorphicField((X,), ONE), z, 0).value
    assert abs(w(Xs) - w(Xa) - w(Xb)) <= 1e-10 * (1 + abs(w(Xa)) + abs(w(Xb)))


def test_jacobian_zeros_of_square():
    zeros, notes = jacobian_zeros(SQUARE, PHI2, 3.0)
    assert zeros.matches(ZeroList(((0, 1),), 3.0), 1e-9)
    alt, _ = jacobian_zeros(SQUARE, PHI2, 3.0, route="wedge")
    assert alt.matches(zeros, 1e-9)


def test_effectivity():
    assert effectivity_test(EXP, PHI2, [0.5]).effective
    line = ProjectiveCurve.affine("z", "2*z")
    phi = HolomorphicField((MeromorphicVectorField(("1", "2")),), ONE)
    assert not effectivity_test(line, phi, [0.1, 0.5, 1 + 1j]).effective
    tangent = HolomorphicField((MeromorphicVectorField(("1", "exp(w1)")),), ONE)
    assert not effectivity_test(EXP, tangent, [0.1, 2j]).effective


def test_find_effective_multiindex_drops_dominant_direction():
    assert find_effective_multiindex(EXP, [D1, D2], ONE, 0.5).entries == (1,)
    assert find_effective_multiindex(ProjectiveCurve.affine("exp(z)", "z"), [D1, D2], ONE, 0.5).entries == (2,)
    with pytest.raises(DegenerateConfigurationError):
        find_effective_multiindex(EXP, [D1, D1], ONE, 0.5)
    with pytest.raises(DomainError):
        find_effective_multiindex(EXP, [D1], ONE, 0.5)


def test_g_bounded_by_norm_on_random_points():
    rng = np.random.default_rng(7)
    z = rng.uniform(-3, 3, 1000) + 1j * rng.uniform(-3, 3, 1000)
    for f, phi in [(EXP, PHI2), (SQUARE, HolomorphicField((MeromorphicVectorField(("1/(1 + w1)", "w2")),),
                                                          PoleSection.parse("w0 + w1", 2)))]:
        with np.errstate(all="ignore"):
            g, norm = g_ratio(f, phi, z)
        ok = np.isfinite(g) & np.isfinite(norm)
        assert ok.sum() > 900
        assert np.all(g[ok] <= norm[ok] + 1e-9)


def test_g_vanishes_for_tangent_field():
    line = ProjectiveCurve.affine("z", "0")
    g, _ = g_ratio(line, HolomorphicField((D1,), ONE), np.array([0.2, 1 + 1j]))
    assert np.allclose(g, 0, atol=1e-15)


def test_ramification_examples():
    r = np.array([1.0, 2.0, 4.0, 8.0])
    assert np.all(ramification(EXP, PHI2, r).values == 0)
    assert np.allclose(ramification(SQUARE, PHI2, r).values, np.log(r))
    shifted = ProjectiveCurve.affine("(z - 2)^2", "exp(z)")
    got = ramification(shifted, PHI2, [4.0, 8.0]).values
    assert np.allclose(got, np.log(np.array([4.0, 8.0]) / 2))
    assert np.all(np.diff(ramification(SQUARE, PHI2, r).values) >= 0)


@pytest.mark.parametrize("f", [EXP, SQUARE])
def test_smt_identity_flat(f):
    r = np.geomspace(2, 64, 6)
    tables = smt_identity(f, PHI2, r)
    assert tables["residual"].spread <= 0.1
    assert np.allclose(tables["T_K"].values, -3 * tables["T"].values)
    assert smt_identity_residual(f, PHI2, r).spread == pytest.approx(tables["residual"].spread)


def test_smt_rejects_constant_curve():
    with pytest.raises(DegenerateConfigurationError):
        smt_identity(ProjectiveCurve((1, 2, 3)), PHI2, [2.0, 4.0])


def test_smt_inequality_report():
    rep = smt_inequality(EXP, PHI2, np.geomspace(2, 64, 11))
    assert math.isfinite(rep.constant)
    assert rep.exceptional_fraction <= 0.05
    assert [t.label for t in rep.tables()] == ["lhs", "log_T", "ratio", "ratio_plus", "exceptional"]


def test_growth_inequality_constant_and_exceptions():
    r = np.array([2.0, 4.0, 8.0, 16.0])
    T = np.e ** np.array([1.0, 1.0, 1.0, 1.0])
    rep = growth_inequality(r, [1.0, 2.0, 1.0, 5.0], T, constant=2.0)
    assert list(rep.exceptional) == [False, False, False, True]
    assert 0 < rep.exceptional_fraction < 0.5
    fitted = growth_inequality(r, [1.0, 2.0, 1.0, 5.0], T)
    assert fitted.constant == 2.0


def test_first_integral_examples():
    s = [0, 1, 2, 0.5 + 1j]
    assert first_integral_check(ProjectiveCurve.affine("z", "z^2"), "y - x^2", s) == 0
    assert first_integral_check(ProjectiveCurve.affine("exp(z)", "exp(2*z)"), "w2/w1^2", s) <= 1e-12
    assert first_integral_check(EXP, "y - x^2", s) > 1
    with pytest.raises(DomainError):
        first_integral_check(EXP, "w3", s)


def test_pole_clearing():
    phi = HolomorphicField((MeromorphicVectorField(("1/w1", "0")),), ONE)
    with pytest.raises(PoleError):
        phi.check_pole_clearing(np.array([[0, 1]]))
    cleared = HolomorphicField((MeromorphicVectorField(("1/w1", "0")),), PoleSection.parse("w1", 2))
    cleared.check_pole_clearing(np.array([[0.5, 1], [2, 3]]))


def test_field_validation():
    with pytest.raises(DomainError):
        MeromorphicVectorField(("0", "0"))
    with pytest.raises(DomainError):
        MeromorphicVectorField(("w3", "1"))
    with pytest.raises(DomainError):
        PoleSection.parse("w0 + w1^2", 2)
    with pytest.raises(DomainError):
        HolomorphicField((D1, D2, D1), ONE)
