"""Multi-indices, wedge products and the interior product.

Indices are 1-based and stored strictly increasing.  An element of
degree k over an n-dimensional space is a sparse map from increasing
k-tuples to scalars; a missing key is a zero coefficient.  Scalars are
anything supporting ``+``, ``-`` and ``*`` with each other and with
integers: ``int``, ``Fraction``, ``complex`` or :class:`holocurve.jets.Jet`.

Vectors ``e_i`` and covectors ``e*_i`` are kept apart by the
``covariant`` flag.  The pairing between degree-k covectors and
k-vectors is ``e*_lam(e_mu) = 1 if lam == mu else 0`` on increasing
indices; every sign below follows from that single choice.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from math import comb
from types import MappingProxyType
from typing import Iterable, Mapping

from holocurve.errors import DomainError

__all__ = [
    "MultiIndex",
    "ExteriorElement",
    "enumerate_multiindices",
    "complement",
    "perm_sign",
    "wedge",
    "wedge_all",
    "interior_product",
    "pair",
]


@dataclass(frozen=True, order=True)
class MultiIndex:
    """Increasing injection ``[1, k] -> [1, n]``."""

    entries: tuple[int, ...]
    n: int

    def __post_init__(self):
        entries = tuple(int(e) for e in self.entries)
        object.__setattr__(self, "entries", entries)
        if self.n < 0:
            raise DomainError(f"ambient dimension must be >= 0, got {self.n}")
        if len(entries) > self.n:
            raise DomainError(f"{entries} is longer than ambient dimension {self.n}")
        for a, b in zip(entries, entries[1:]):
            if a >= b:
                raise DomainError(f"{entries} is not strictly increasing")
        if entries and (entries[0] < 1 or entries[-1] > self.n):
            raise DomainError(f"{entries} has entries outside [1, {self.n}]")

    @property
    def k(self) -> int:
        return len(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __repr__(self) -> str:
        return f"MultiIndex({self.entries}, n={self.n})"


def enumerate_multiindices(n: int, k: int) -> list[MultiIndex]:
    """All of ``J^n_{1,k}`` in lexicographic order."""
    if k < 1 or k > n:
        raise DomainError(f"need 1 <= k <= n, got n={n}, k={k}")
    return [MultiIndex(c, n) for c in itertools.combinations(range(1, n + 1), k)]


def complement(lam: MultiIndex) -> MultiIndex:
    """The increasing index ``lam_perp`` with ``set(lam) | set(lam_perp) == {1..n}``."""
    taken = set(lam.entries)
    return MultiIndex(tuple(i for i in range(1, lam.n + 1) if i not in taken), lam.n)


def _crossing_sign(a: Iterable[int], b: Iterable[int]) -> int:
    # parity of the shuffle that sorts the concatenation of two increasing runs
    b = tuple(b)
    inversions = 0
    for x in a:
        for y in b:
            if x > y:
                inversions += 1
    return -1 if inversions % 2 else 1


def perm_sign(mu: MultiIndex, lam: MultiIndex) -> int:
    """Sign of the permutation ``(mu, lam)`` of ``{1, ..., n}``."""
    n = lam.n
    if mu.n != n:
        raise DomainError("multi-indices live in different ambient dimensions")
    if sorted(mu.entries + lam.entries) != list(range(1, n + 1)):
        raise DomainError(f"{mu.entries} + {lam.entries} is not a permutation of 1..{n}")
    return _crossing_sign(mu.entries, lam.entries)


def _is_exact_zero(value) -> bool:
    try:
        return value == 0 and not hasattr(value, "coeffs")
    except (TypeError, ValueError):
        return False


@dataclass(frozen=True)
class ExteriorElement:
    """Homogeneous element of the exterior algebra over ``C^n``.

    ``coeffs`` maps increasing index tuples of length ``degree`` to scalars.
    """

    n: int
    degree: int
    coeffs: Mapping[tuple[int, ...], object] = field(default_factory=dict)
    covariant: bool = False

    def __post_init__(self):
        if not 0 <= self.degree <= self.n:
            raise DomainError(f"degree {self.degree} outside [0, {self.n}]")
        clean = {}
        for key, value in dict(self.coeffs).items():
            key = MultiIndex(tuple(key), self.n).entries
            if len(key) != self.degree:
                raise DomainError(f"index {key} does not have degree {self.degree}")
            if _is_exact_zero(value):
                continue
            clean[key] = value
        object.__setattr__(self, "coeffs", MappingProxyType(clean))

    @classmethod
    def basis(cls, n: int, index: Iterable[int], coeff=1, covariant: bool = False):
        """``coeff * e_index`` where ``index`` may be unordered; sign is absorbed."""
        index = tuple(index)
        if len(set(index)) != len(index):
            return cls(n, len(index), {}, covariant)
        order = sorted(range(len(index)), key=index.__getitem__)
        inversions = sum(
            1 for i in range(len(order)) for j in range(i + 1, len(order)) if order[i] > order[j]
        )
        sign = -1 if inversions % 2 else 1
        return cls(n, len(index), {tuple(sorted(index)): sign * coeff}, covariant)

    @classmethod
    def vector(cls, components, covariant: bool = False):
        """Degree-1 element with the given components (index 1 first)."""
        components = list(components)
        return cls(len(components), 1, {(i + 1,): c for i, c in enumerate(components)}, covariant)

    @classmethod
    def zero(cls, n: int, degree: int, covariant: bool = False):
        return cls(n, degree, {}, covariant)

    def __getitem__(self, index) -> object:
        if isinstance(index, MultiIndex):
            index = index.entries
        return self.coeffs.get(tuple(index), 0)

    def items(self):
        return self.coeffs.items()

    def is_zero(self) -> bool:
        return not self.coeffs

    def _check_compatible(self, other: ExteriorElement):
        if self.n != other.n:
            raise DomainError(f"ambient mismatch: {self.n} vs {other.n}")
        if self.covariant != other.covariant:
            raise DomainError("cannot combine vectors with covectors")

    def __add__(self, other: ExteriorElement) -> ExteriorElement:
        self._check_compatible(other)
        if self.degree != other.degree:
            raise DomainError("sum of elements of different degree")
        out = dict(self.coeffs)
        for key, value in other.coeffs.items():
            out[key] = out[key] + value if key in out else value
        return ExteriorElement(self.n, self.degree, out, self.covariant)

    def __neg__(self) -> ExteriorElement:
        return ExteriorElement(self.n, self.degree, {k: -v for k, v in self.coeffs.items()}, self.covariant)

    def __sub__(self, other: ExteriorElement) -> ExteriorElement:
        return self + (-other)

    def scale(self, scalar) -> ExteriorElement:
        return ExteriorElement(
            self.n, self.degree, {k: scalar * v for k, v in self.coeffs.items()}, self.covariant
        )

    def __rmul__(self, scalar) -> ExteriorElement:
        return self.scale(scalar)

    def map(self, fn) -> ExteriorElement:
        """Apply ``fn`` to every stored coefficient."""
        return ExteriorElement(self.n, self.degree, {k: fn(v) for k, v in self.coeffs.items()}, self.covariant)

    def __xor__(self, other: ExteriorElement) -> ExteriorElement:
        return wedge(self, other)

    def top_coefficient(self):
        """Coefficient of ``e_1 ^ ... ^ e_n`` (degree must be ``n``)."""
        if self.degree != self.n:
            raise DomainError(f"degree {self.degree} is not top degree {self.n}")
        return self.coeffs.get(tuple(range(1, self.n + 1)), 0)


def wedge(xi: ExteriorElement, eta: ExteriorElement) -> ExteriorElement:
    """Exterior product; zero of degree ``p + q`` when ``p + q <= n`` fails to leave room."""
    xi._check_compatible(eta)
    n = xi.n
    degree = xi.degree + eta.degree
    if degree > n:
        # no room: the product vanishes, reported in the top degree
        return ExteriorElement(n, n, {}, xi.covariant)
    out: dict[tuple[int, ...], object] = {}
    for a, x in xi.coeffs.items():
        aset = set(a)
        for b, y in eta.coeffs.items():
            if aset.intersection(b):
                continue
            term = x * y
            if _crossing_sign(a, b) < 0:
                term = -term
            key = tuple(sorted(a + b))
            out[key] = out[key] + term if key in out else term
    return ExteriorElement(n, degree, out, xi.covariant)


def wedge_all(elements: Iterable[ExteriorElement]) -> ExteriorElement:
    elements = list(elements)
    if not elements:
        raise DomainError("empty wedge")
    out = elements[0]
    for e in elements[1:]:
        out = wedge(out, e)
    return out


def pair(beta: ExteriorElement, theta: ExteriorElement):
    """Evaluate covector ``beta`` on polyvector ``theta`` of the same degree."""
    if not beta.covariant or theta.covariant:
        raise DomainError("pair() takes (covariant, contravariant)")
    if beta.n != theta.n or beta.degree != theta.degree:
        raise DomainError("pairing needs equal ambient dimension and degree")
    total = 0
    for key, value in beta.coeffs.items():
        if key in theta.coeffs:
            total = total + value * theta.coeffs[key]
    return total


def interior_product(alpha: ExteriorElement, xi: ExteriorElement) -> ExteriorElement:
    """Contract a top-degree covector with a q-vector.

    Defined by ``theta(alpha <- xi) == (xi ^ theta)(alpha)`` for every
    ``(n - q)``-vector ``theta``, which gives
    ``alpha <- e_lam = sign(lam, lam_perp) * alpha_top * e*_{lam_perp}``.
    """
    if not alpha.covariant:
        raise DomainError("first argument must be a covariant top form")
    if xi.covariant:
        raise DomainError("second argument must be a polyvector")
    if alpha.n != xi.n:
        raise DomainError(f"ambient mismatch: {alpha.n} vs {xi.n}")
    if alpha.degree != alpha.n:
        raise DomainError(f"alpha has degree {alpha.degree}, expected top degree {alpha.n}")
    n = alpha.n
    top = alpha.top_coefficient()
    out = {}
    for key, value in xi.coeffs.items():
        lam = MultiIndex(key, n)
        perp = complement(lam)
        out[perp.entries] = perm_sign(lam, perp) * (top * value)
    return ExteriorElement(n, n - xi.degree, out, covariant=True)


def dimension(n: int, k: int) -> int:
    return comb(n, k)
