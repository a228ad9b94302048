import math

import numpy as np
import pytest

from holocurve.connection import (
    MeromorphicConnection,
    autoparallel_wronskian,
    covariant_jets,
    is_autoparallel,
    nadel_transform,
    pole_membership,
    siu_smt_residual,
    wronskian_jet,
)
from holocurve.errors import DegenerateConfigurationError, DomainError, PoleError
from holocurve.expression import curve_jet, parse
from holocurve.jacobian import PoleSection
from holocurve.nevanlinna import ProjectiveCurve

FLAT = MeromorphicConnection.flat(2)
EXP = ProjectiveCurve.affine("z", "exp(z)")
PTS = np.array([0.0, 0.4 - 0.3j, 1.5 + 1j, -2.0])


def test_flat_jets_are_plain_derivatives():
    f = ProjectiveCurve.affine("z^3 - z", "exp(z)*z")
    jets = covariant_jets(f, FLAT, 4, PTS)
    comps = [parse("z^3 - z"), parse("exp(z)*z")]
    for z_i, z in enumerate(PTS):
        series = [j.derivatives() for j in curve_jet(comps, z, 4)]
        for k in range(1, 5):
            want = np.array([s[k] for s in series])
            assert np.allclose(jets[k - 1][z_i], want, rtol=1e-12, atol=1e-12)


def test_flat_jets_of_exp_at_origin():
    jets = covariant_jets(EXP, FLAT, 3, np.array([0.0]))
    assert np.allclose(jets[0][0], [1, 1])
    assert np.allclose(jets[1][0], [0, 1])
    assert np.allclose(jets[2][0], [0, 1])


def test_constant_christoffel_in_one_dimension():
    # D f' = f'' + c f'^2 for f = z: the second jet is c
    D = MeromorphicConnection(1, {(1, 1, 1): "2.5"})
    jets = covariant_jets(ProjectiveCurve.affine("z"), D, 2, np.array([0.3, 1.0]))
    assert np.allclose(jets[1][:, 0], 2.5)


def test_wronskian_examples():
    line = ProjectiveCurve.affine("1 + 2*z", "3 - z")
    assert np.all(np.abs(autoparallel_wronskian(line, FLAT, PTS)) <= 1e-12)
    assert np.array_equal(wronskian_jet(ProjectiveCurve.affine("z", "z^2"), FLAT, PTS).value, np.full(4, 2))
    assert np.allclose(autoparallel_wronskian(EXP, FLAT, PTS), np.exp(PTS))


def test_autoparallel_verdict_invariant_under_affine_reparametrisation():
    for a, b in [(2.0, 0.0), (1j, 1.0), (-0.5, 2 - 1j)]:
        s = f"(({complex(a).real!r} + {complex(a).imag!r}*i)*z + ({complex(b).real!r} + {complex(b).imag!r}*i))"
        line = ProjectiveCurve.affine(s, f"2*{s} + 1")
        curve = ProjectiveCurve.affine(s, f"exp({s})")
        assert is_autoparallel(line, FLAT, PTS)
        assert not is_autoparallel(curve, FLAT, PTS)


def test_repeated_row_gives_zero_wronskian():
    f = ProjectiveCurve.affine("exp(z)", "exp(z)")
    assert np.all(np.abs(wronskian_jet(f, FLAT, PTS).value) <= 1e-12)


def test_siu_residual_bounded_for_exp():
    rep = siu_smt_residual(EXP, FLAT, np.geomspace(2, 64, 11))
    finite = rep.normalized.values[np.isfinite(rep.normalized.values)]
    # bounded above: lhs is dominated by -3 T, so the ratio drifts downward
    assert finite.size and np.all(finite <= rep.inequality.constant + 1e-12)
    assert rep.inequality.max_ratio < 0
    assert rep.inequality.exceptional_fraction <= 0.05
    assert rep.zeros.total == 0


def test_siu_rejects_autoparallel_curve():
    with pytest.raises(DegenerateConfigurationError):
        siu_smt_residual(ProjectiveCurve.affine("z", "2*z"), FLAT, [2.0, 4.0])


def test_pole_membership_contained_case():
    f = ProjectiveCurve.affine("0", "exp(z)")
    report = pole_membership(f, PoleSection.parse("w1", 2), [0.1, 1 + 1j, -3])
    assert all(v == 0 for _, v in report)
    report = pole_membership(EXP, PoleSection.parse("w1", 2), [0.5, 2.0])
    assert [v for _, v in report] == pytest.approx([0.5, 2.0])


def test_nadel_transform():
    g = nadel_transform(EXP)
    assert str(g) == "(1 : exp(z) : exp(exp(z)))"
    z = 0.3 + 0.2j
    jets = curve_jet(list(g.components), z, 0)
    assert jets[2].value == pytest.approx(np.exp(np.exp(z)))


def test_connection_validation():
    with pytest.raises(DomainError):
        MeromorphicConnection(2, {(1, 2, 3): "1"})
    with pytest.raises(DomainError):
        MeromorphicConnection(2, {(1, 1, 1): "w3"})
    D = MeromorphicConnection(2, {(1, 1, 1): "1/w1"})
    with pytest.raises(PoleError):
        D.check_pole_clearing(np.array([[0, 1]]))
    with pytest.raises(DomainError):
        covariant_jets(ProjectiveCurve.affine("z"), FLAT, 2, 0.0)
