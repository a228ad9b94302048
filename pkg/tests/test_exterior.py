import itertools
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from holocurve.errors import DomainError
from holocurve.exterior import (
    ExteriorElement,
    MultiIndex,
    complement,
    enumerate_multiindices,
    interior_product,
    pair,
    perm_sign,
    wedge,
    wedge_all,
)
from oracles import brute_pair_top, brute_wedge, inversion_sign, set_complement


def mi(entries, n):
    return MultiIndex(tuple(entries), n)


def all_indices(n):
    for k in range(0, n + 1):
        for c in itertools.combinations(range(1, n + 1), k):
            yield mi(c, n)


# enumerate_multiindices


def test_enumerate_full_index():
    assert [m.entries for m in enumerate_multiindices(2, 2)] == [(1, 2)]


def test_enumerate_lexicographic():
    got = [m.entries for m in enumerate_multiindices(4, 2)]
    assert got == [(1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4)]


def test_enumerate_matches_brute_force():
    got = [m.entries for m in enumerate_multiindices(8, 3)]
    assert len(got) == 56 == len(set(got))
    assert got == sorted(itertools.combinations(range(1, 9), 3))


@pytest.mark.parametrize("n,k", [(3, 0), (3, 4), (0, 1)])
def test_enumerate_domain_error(n, k):
    with pytest.raises(DomainError):
        enumerate_multiindices(n, k)


@pytest.mark.parametrize("entries", [(2, 1), (1, 1), (0, 1), (1, 5)])
def test_multiindex_rejects_invalid(entries):
    with pytest.raises(DomainError):
        mi(entries, 4)


# complement and perm_sign


def test_complement_examples():
    assert complement(mi((1, 2), 2)).entries == ()
    assert complement(mi((2,), 2)).entries == (1,)
    assert complement(mi((1, 3, 5), 6)).entries == (2, 4, 6)


def test_perm_sign_examples():
    assert perm_sign(mi((1,), 2), mi((2,), 2)) == 1
    assert perm_sign(mi((2,), 2), mi((1,), 2)) == -1


def test_perm_sign_rejects_non_permutation():
    with pytest.raises(DomainError):
        perm_sign(mi((1,), 3), mi((1, 2), 3))
    with pytest.raises(DomainError):
        perm_sign(mi((1,), 3), mi((2,), 3))


def test_exhaustive_combinatorics_against_oracles():
    for n in range(1, 9):
        for lam in all_indices(n):
            perp = complement(lam)
            assert perp.entries == set_complement(lam.entries, n)
            assert complement(perp) == lam
            s1 = perm_sign(perp, lam)
            s2 = perm_sign(lam, perp)
            assert s1 == inversion_sign(perp.entries + lam.entries)
            assert s2 == inversion_sign(lam.entries + perp.entries)
            assert s1 * s2 == (-1) ** (lam.k * (n - lam.k))


# wedge


def e(n, *idx, coeff=1):
    return ExteriorElement.basis(n, idx, coeff)


def test_wedge_repeated_factor_is_zero():
    assert wedge(e(2, 1), e(2, 1)).is_zero()


def test_wedge_antisymmetry():
    out = wedge(e(2, 2), e(2, 1))
    assert dict(out.coeffs) == {(1, 2): -1}


def test_wedge_distributive_example():
    xi = ExteriorElement.vector([1, 2, 0])
    eta = ExteriorElement.vector([0, 1, 1])
    assert dict(wedge(xi, eta).coeffs) == {(1, 2): 1, (1, 3): 1, (2, 3): 2}


def test_wedge_degree_overflow_is_zero():
    out = wedge(e(2, 1, 2), e(2, 1))
    assert out.is_zero()


def test_wedge_ambient_mismatch():
    with pytest.raises(DomainError):
        wedge(e(2, 1), e(3, 1))


rational = st.fractions(min_value=-5, max_value=5, max_denominator=7)


@st.composite
def elements(draw, n, degree):
    coeffs = {}
    for c in itertools.combinations(range(1, n + 1), degree):
        if draw(st.booleans()):
            coeffs[c] = draw(rational)
    return ExteriorElement(n, degree, coeffs)


@st.composite
def triples(draw):
    n = draw(st.integers(2, 5))
    p = draw(st.integers(0, n))
    q = draw(st.integers(0, n - p))
    r = draw(st.integers(0, n - p - q))
    return n, draw(elements(n, p)), draw(elements(n, q)), draw(elements(n, r))


def same(a, b):
    return a.degree == b.degree and dict(a.coeffs) == dict(b.coeffs)


@settings(max_examples=200, deadline=None)
@given(triples())
def test_wedge_associative_and_graded(triple):
    n, a, b, c = triple
    assert same(wedge(wedge(a, b), c), wedge(a, wedge(b, c)))
    sign = (-1) ** (a.degree * b.degree)
    assert same(wedge(a, b), wedge(b, a).scale(sign))


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 5).flatmap(lambda n: st.tuples(
    st.just(n),
    st.integers(1, n).flatmap(lambda k: st.lists(
        st.lists(rational, min_size=n, max_size=n), min_size=k, max_size=k)))))
def test_wedge_of_vectors_matches_permutation_sum(case):
    n, rows = case
    got = wedge_all([ExteriorElement.vector(r) for r in rows])
    assert dict(got.coeffs) == brute_wedge(rows)


# interior product


def test_interior_example_follows_pairing_identity():
    alpha = ExteriorElement.basis(2, (1, 2), 1, covariant=True)
    out = interior_product(alpha, e(2, 2))
    # theta = e1: (e2 ^ e1)(alpha) = -1
    assert dict(out.coeffs) == {(1,): -1}
    assert pair(out, e(2, 1)) == pair(alpha, wedge(e(2, 2), e(2, 1)))


def test_interior_full_contraction_is_scalar():
    for n in range(1, 6):
        alpha = ExteriorElement.basis(n, range(1, n + 1), Fraction(3, 2), covariant=True)
        out = interior_product(alpha, e(n, *range(1, n + 1)))
        assert out.degree == 0
        assert out[()] == Fraction(3, 2)


def test_interior_rejects_bad_degree():
    with pytest.raises(DomainError):
        interior_product(ExteriorElement.basis(3, (1, 2), 1, covariant=True), e(3, 1))
    with pytest.raises(DomainError):
        interior_product(e(2, 1, 2), e(2, 1))


def test_pairing_identity_exhaustive_on_basis():
    for n in range(1, 6):
        alpha = ExteriorElement.basis(n, range(1, n + 1), Fraction(2), covariant=True)
        for lam in all_indices(n):
            xi = e(n, *lam.entries)
            contracted = interior_product(alpha, xi)
            for theta_idx in itertools.combinations(range(1, n + 1), n - lam.k):
                theta = e(n, *theta_idx)
                assert pair(contracted, theta) == pair(alpha, wedge(xi, theta))


@st.composite
def pairing_case(draw):
    n = draw(st.integers(1, 5))
    q = draw(st.integers(0, n))
    top = draw(rational)
    return n, top, draw(elements(n, q)), draw(elements(n, n - q))


@settings(max_examples=1000, deadline=None)
@given(pairing_case())
def test_pairing_identity_random(case):
    n, top, xi, theta = case
    alpha = ExteriorElement.basis(n, range(1, n + 1), top, covariant=True)
    lhs = pair(interior_product(alpha, xi), theta)
    assert lhs == pair(alpha, wedge(xi, theta))
    assert lhs == brute_pair_top(top, dict(xi.coeffs), dict(theta.coeffs), n)
