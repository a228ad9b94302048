"""Jacobian sections of curves in ``P^n`` against meromorphic polyvector fields.

Fields are written in the affine chart ``w_0 != 0`` with coordinates
``w1 .. wn``.  A degree-``q`` field ``phi = t * X_1 ^ ... ^ X_q`` is lifted
along a curve ``f`` by evaluating everything at ``w(f(z))``; for a curve
(one complex parameter) and ``q = n - 1`` the Jacobian section is the
scalar

    W = sum_lam sign(lam_perp, lam) * phi_lam * f'_{lam_perp},

the top coefficient of ``f' ^ phi``.  Its zeros make up the ramification
divisor.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from holocurve.errors import (
    BoundaryZeroError,
    ChartError,
    DegenerateConfigurationError,
    DomainError,
    PoleError,
    SingularPointError,
    StationaryPointError,
)
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
from holocurve.expression import (
    Const,
    Expression,
    as_polynomial,
    evaluate,
    free_variables,
    parse,
    substitute,
    to_text,
)
from holocurve.jets import Jet
from holocurve.nevanlinna import (
    PERTURBATION,
    GrowthTable,
    ProjectiveCurve,
    _validate_grid,
    characteristic,
)
from holocurve.quadrature import DEFAULT_AREA_TOL, DEFAULT_CIRCLE_TOL, circle_means
from holocurve.zeros import ZeroList, count_zeros

__all__ = [
    "chart_names",
    "MeromorphicVectorField",
    "PoleSection",
    "HolomorphicField",
    "lift_field",
    "field_minors",
    "jacobian_scalar",
    "wedge_scalar",
    "interior_scalar",
    "jacobian_zeros",
    "EffectivityResult",
    "effectivity_test",
    "find_effective_multiindex",
    "g_ratio",
    "ramification",
    "smt_identity",
    "smt_identity_residual",
    "InequalityReport",
    "growth_inequality",
    "smt_inequality",
    "first_integral_check",
]

EFFECTIVITY_TOLERANCE = 1e-10


def chart_names(n: int) -> tuple[str, ...]:
    """Coordinate names ``w1 .. wn`` of the chart ``w_0 != 0``."""
    return tuple(f"w{j}" for j in range(1, n + 1))


def _as_expression(value) -> Expression:
    if isinstance(value, Expression):
        return value
    if isinstance(value, str):
        return parse(value)
    return Const(complex(value))


# --------------------------------------------------------------------------
# fields and sections


@dataclass(frozen=True)
class MeromorphicVectorField:
    """``X = sum_i X_i d/dw_i`` with rational components in ``w1 .. wn``."""

    components: tuple[Expression, ...]

    def __post_init__(self):
        comps = tuple(_as_expression(c) for c in self.components)
        if not comps:
            raise DomainError("a vector field needs at least one component")
        allowed = set(chart_names(len(comps)))
        for c in comps:
            extra = free_variables(c) - allowed
            if extra:
                raise DomainError(f"field component {to_text(c)!r} uses {sorted(extra)} outside {sorted(allowed)}")
        if all(isinstance(c, Const) and c.value == 0 for c in comps):
            raise DomainError("vector field is identically zero")
        object.__setattr__(self, "components", comps)

    @classmethod
    def coordinate(cls, n: int, i: int) -> MeromorphicVectorField:
        """The coordinate field ``d/dw_i``."""
        if not 1 <= i <= n:
            raise DomainError(f"coordinate index {i} outside [1, {n}]")
        return cls(tuple(Const(1 if j == i else 0) for j in range(1, n + 1)))

    @property
    def n(self) -> int:
        return len(self.components)

    def __str__(self) -> str:
        return "(" + ", ".join(to_text(c) for c in self.components) + ")"

    def at(self, env, order: int) -> list[Jet]:
        return [evaluate(c, env, order) for c in self.components]


@dataclass(frozen=True)
class PoleSection:
    """Section ``t`` of ``O(p)``: a homogeneous polynomial of degree ``p`` in ``w0 .. wn``."""

    expression: Expression
    n: int
    degree: int = field(init=False)
    coefficient_norm: float = field(init=False)

    def __post_init__(self):
        expr = _as_expression(self.expression)
        object.__setattr__(self, "expression", expr)
        names = ("w0",) + chart_names(self.n)
        extra = free_variables(expr) - set(names)
        if extra:
            raise DomainError(f"section uses variables {sorted(extra)} outside w0..w{self.n}")
        poly = as_polynomial(expr, names)
        if poly is None:
            raise DomainError(f"section {to_text(expr)!r} is not a polynomial")
        if not poly:
            raise DomainError("pole section vanishes identically")
        degrees = {sum(e) for e in poly}
        if len(degrees) != 1:
            raise DomainError(f"section {to_text(expr)!r} is not homogeneous")
        object.__setattr__(self, "degree", degrees.pop())
        object.__setattr__(self, "coefficient_norm", float(sum(abs(c) for c in poly.values())))

    @classmethod
    def one(cls, n: int) -> PoleSection:
        return cls(Const(1), n)

    @classmethod
    def parse(cls, text: str, n: int) -> PoleSection:
        return cls(parse(text), n)

    @property
    def p(self) -> int:
        return self.degree

    @property
    def chart_expression(self) -> Expression:
        """``t`` in the chart, i.e. with ``w0 = 1``."""
        return substitute(self.expression, {"w0": Const(1)})

    def at(self, env, order: int) -> Jet:
        return evaluate(self.chart_expression, env, order)


@dataclass(frozen=True)
class HolomorphicField:
    """The polyvector ``t * X_1 ^ ... ^ X_q`` before lifting to a curve."""

    fields: tuple[MeromorphicVectorField, ...]
    section: PoleSection

    def __post_init__(self):
        fields = tuple(self.fields)
        if not fields:
            raise DomainError("need at least one vector field")
        n = fields[0].n
        if any(X.n != n for X in fields) or self.section.n != n:
            raise DomainError("fields and section must share the chart dimension")
        if len(fields) > n:
            raise DomainError(f"{len(fields)} fields exceed dimension {n}")
        object.__setattr__(self, "fields", fields)

    @property
    def n(self) -> int:
        return self.fields[0].n

    @property
    def q(self) -> int:
        return len(self.fields)

    @property
    def p(self) -> int:
        return self.section.degree

    def check_pole_clearing(self, probes) -> None:
        """``t * X_i`` must be finite at every probe where ``t`` is nonzero."""
        probes = np.asarray(probes, dtype=complex)
        env = {name: probes[..., j] for j, name in enumerate(chart_names(self.n))}
        with np.errstate(all="ignore"):
            t = self.section.at(env, 0).value
            for X in self.fields:
                for c in X.components:
                    try:
                        v = evaluate(c, env, 0).value
                    except SingularPointError as err:
                        raise PoleError(f"field component {to_text(c)!r} is singular at a probe: {err}") from None
                    if not np.all(np.isfinite(t * v)):
                        raise PoleError(f"t * {to_text(c)!r} is not finite at a probe")


def _chart_env(f: ProjectiveCurve, z, order: int) -> dict:
    if f.n < 1:
        raise DomainError("curve must map to P^n with n >= 1")
    jets = f.chart_jets(z, order)
    return dict(zip(chart_names(f.n), jets))


def lift_field(phi: HolomorphicField, f: ProjectiveCurve, z, order: int = 1) -> ExteriorElement:
    """``(t * X_1 ^ ... ^ X_q)`` along ``f`` at ``z``, with jet coefficients.

    Assembled with the wedge product of the exterior-algebra layer.
    """
    _check_curve(phi, f)
    env = _chart_env(f, z, order)
    t = phi.section.at(env, order)
    vectors = []
    for i, X in enumerate(phi.fields):
        comps = X.at(env, order)
        if i == 0:
            comps = [t * c for c in comps]
        vectors.append(ExteriorElement.vector(comps))
    return wedge_all(vectors)


def _check_curve(phi: HolomorphicField, f: ProjectiveCurve):
    if f.n != phi.n:
        raise DomainError(f"field lives on P^{phi.n} but the curve maps to P^{f.n}")


def _determinant(rows):
    # Leibniz expansion; entries may be jets
    k = len(rows)
    total = 0
    for perm in itertools.permutations(range(k)):
        inversions = sum(1 for a in range(k) for b in range(a + 1, k) if perm[a] > perm[b])
        term = rows[0][perm[0]]
        for i in range(1, k):
            term = term * rows[i][perm[i]]
        total = total - term if inversions % 2 else total + term
    return total


def field_minors(phi: HolomorphicField, f: ProjectiveCurve, z, order: int = 1) -> dict:
    """Coefficients ``phi_lam`` as ``t * det(X_j[lam(i)])`` minors (no wedge products)."""
    _check_curve(phi, f)
    env = _chart_env(f, z, order)
    t = phi.section.at(env, order)
    columns = [X.at(env, order) for X in phi.fields]
    out = {}
    for lam in enumerate_multiindices(phi.n, phi.q):
        rows = [[columns[j][i - 1] for j in range(phi.q)] for i in lam]
        out[lam.entries] = t * _determinant(rows)
    return out


def _tangent(f: ProjectiveCurve, z, order: int) -> list[Jet]:
    # jets of f'_nu = d/dz (w_nu o f) through `order`
    return [j.d() for j in f.chart_jets(z, order + 1)]


def _require_codimension_one(n: int, q: int):
    if q != n - 1:
        raise DomainError(f"a curve pairs with fields of degree n - 1 = {n - 1}, got {q}")


def jacobian_scalar(f: ProjectiveCurve, phi, z, order: int = 1) -> Jet:
    """``W = sum_lam sign(lam_perp, lam) phi_lam f'_{lam_perp}`` as a jet.

    ``phi`` is a :class:`HolomorphicField` (coefficients computed as minors)
    or an already lifted :class:`ExteriorElement` of degree ``n - 1``.
    """
    n = f.n
    if isinstance(phi, HolomorphicField):
        _require_codimension_one(n, phi.q)
        coeffs = field_minors(phi, f, z, order)
    else:
        _require_codimension_one(n, phi.degree)
        coeffs = dict(phi.coeffs)
    fprime = _tangent(f, z, order)
    total = Jet.constant(np.zeros(np.shape(z), dtype=complex), order)
    for key, value in coeffs.items():
        lam = MultiIndex(key, n)
        perp = complement(lam)
        term = fprime[perp.entries[0] - 1] * value
        total = total - term if perm_sign(perp, lam) < 0 else total + term
    return total


def wedge_scalar(f: ProjectiveCurve, phi: HolomorphicField, z, order: int = 1) -> Jet:
    """Top coefficient of ``f' ^ (t * X_1 ^ ... ^ X_q)`` built in the exterior algebra."""
    _require_codimension_one(f.n, phi.q)
    tangent = ExteriorElement.vector(_tangent(f, z, order))
    top = wedge(tangent, lift_field(phi, f, z, order)).top_coefficient()
    if not isinstance(top, Jet):
        top = Jet.constant(np.broadcast_to(complex(top), np.shape(z)), order)
    return top


def interior_scalar(f: ProjectiveCurve, phi: HolomorphicField, z, order: int = 1) -> Jet:
    """``(dw <- phi)(f')`` with ``dw = dw_1 ^ ... ^ dw_n``.

    Equals ``(-1)^(q (n - q))`` times :func:`jacobian_scalar`; the zero
    sets coincide.
    """
    _require_codimension_one(f.n, phi.q)
    n = f.n
    dw = ExteriorElement.basis(n, range(1, n + 1), covariant=True)
    contracted = interior_product(dw, lift_field(phi, f, z, order))
    value = pair(contracted, ExteriorElement.vector(_tangent(f, z, order)))
    if not isinstance(value, Jet):
        value = Jet.constant(np.broadcast_to(complex(value), np.shape(z)), order)
    return value


_ROUTES = {"formula": jacobian_scalar, "wedge": wedge_scalar, "interior": interior_scalar}


def jacobian_zeros(
    f: ProjectiveCurve, phi: HolomorphicField, radius: float, route: str = "formula"
) -> tuple[ZeroList, tuple[str, ...]]:
    """Zeros of the Jacobian scalar in ``|z| < radius`` via the chosen route.

    The radius is nudged outward by ``1e-6 r`` while a zero sits on the
    circle; every move is returned as a note.
    """
    fn = _ROUTES[route]
    notes = []
    for _ in range(20):
        try:
            return count_zeros(lambda z, order: fn(f, phi, z, order), radius), tuple(notes)
        except BoundaryZeroError as err:
            new = radius * (1 + PERTURBATION)
            notes.append(f"ramification radius {radius!r} perturbed to {new!r}: {err}")
            radius = new
    raise BoundaryZeroError("could not move the counting circle off the Jacobian zeros")


# --------------------------------------------------------------------------
# effectivity


@dataclass(frozen=True)
class EffectivityResult:
    effective: bool
    witness: complex | None
    max_abs: float
    skipped: tuple[complex, ...] = ()

    def __bool__(self) -> bool:
        return self.effective


def effectivity_test(f: ProjectiveCurve, phi, sample: Sequence[complex]) -> EffectivityResult:
    """Look for a sample point where the Jacobian scalar is nonzero.

    A witness certifies effectivity; ``False`` only means every sample
    vanished (to ``1e-10`` relative to ``|phi| |f'|``).  Points outside the
    chart are skipped and listed.
    """
    sample = [complex(s) for s in sample]
    if not sample:
        raise DomainError("empty sample")
    skipped = []
    best = 0.0
    for z in sample:
        try:
            W = jacobian_scalar(f, phi, z, 0).value
            fp = np.array([j.value for j in _tangent(f, z, 0)])
            coeffs = field_minors(phi, f, z, 0) if isinstance(phi, HolomorphicField) else dict(phi.coeffs)
        except ChartError:
            skipped.append(z)
            continue
        size = max((abs(complex(getattr(v, "value", v))) for v in coeffs.values()), default=0.0)
        scale = size * float(np.max(np.abs(fp)))
        best = max(best, float(abs(W)))
        if scale > 0 and abs(W) > EFFECTIVITY_TOLERANCE * scale:
            return EffectivityResult(True, z, float(abs(W)), tuple(skipped))
    return EffectivityResult(False, None, best, tuple(skipped))


def find_effective_multiindex(
    f: ProjectiveCurve,
    fields: Sequence[MeromorphicVectorField],
    t: PoleSection,
    probe: complex,
    circle_radius: float = 0.1,
) -> MultiIndex:
    """Choose ``lam`` in ``J^n_{1, n-1}`` so that ``t * X_lam`` is effective at ``probe``.

    Writes ``f' = sum_i B_i X_i`` at the probe and drops the field with the
    largest ``|B_i|``; exact ties are broken by the larger minimum of
    ``|B_i|`` over a small circle around the probe.
    """
    n = f.n
    if len(fields) != n:
        raise DomainError(f"need {n} fields, got {len(fields)}")

    def coefficients(z):
        env = _chart_env(f, np.asarray(z, dtype=complex), 0)
        X = np.stack([np.stack([c.value for c in Xi.at(env, 0)], axis=-1) for Xi in fields], axis=-1)
        fp = np.stack([j.value for j in _tangent(f, np.asarray(z, dtype=complex), 0)], axis=-1)
        det = np.linalg.det(X)
        return X, fp, det

    X, fp, det = coefficients(np.array([probe]))
    if abs(det[0]) < 1e-12:
        raise DegenerateConfigurationError(f"fields are linearly dependent at the probe {probe!r}")
    if np.max(np.abs(fp[0])) < 1e-12:
        raise DegenerateConfigurationError(f"f' vanishes at the probe {probe!r}")
    B = np.linalg.solve(X[0], fp[0])
    size = np.abs(B)
    top = size.max()
    tied = [i for i in range(n) if size[i] >= top * (1 - 1e-12)]
    if len(tied) > 1:
        ring = probe + circle_radius * np.exp(2j * np.pi * np.arange(32) / 32)
        Xr, fpr, _ = coefficients(ring)
        Br = np.abs(np.linalg.solve(Xr, fpr[..., None])[..., 0])
        iota = max(tied, key=lambda i: Br[:, i].min())
    else:
        iota = tied[0]
    lam = complement(MultiIndex((iota + 1,), n))
    phi = HolomorphicField(tuple(fields[i - 1] for i in lam), t)
    if not effectivity_test(f, phi, [probe]):
        raise DegenerateConfigurationError(f"no effective multi-index at the probe {probe!r}")
    return lam


# --------------------------------------------------------------------------
# metric comparison


def _fs_matrix(w: np.ndarray) -> np.ndarray:
    # Fubini-Study hermitian matrix in affine coordinates, batch (..., n, n)
    s = 1 + np.sum(np.abs(w) ** 2, axis=-1)
    n = w.shape[-1]
    outer = w[..., :, None] * np.conj(w[..., None, :])
    return (s[..., None, None] * np.eye(n) - outer) / (s**2)[..., None, None]


def _compound(P: np.ndarray, q: int, indices) -> np.ndarray:
    # q-th compound matrix: minors P[mu, lam] for increasing mu, lam
    k = len(indices)
    out = np.empty(P.shape[:-2] + (k, k), dtype=complex)
    for a, mu in enumerate(indices):
        rows = [i - 1 for i in mu]
        for b, lam in enumerate(indices):
            cols = [j - 1 for j in lam]
            out[..., a, b] = np.linalg.det(P[..., rows, :][..., :, cols])
    return out


def g_ratio(f: ProjectiveCurve, phi, z, p: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """``(g, ||phi||)`` at points ``z`` for ``F_phi[omega^n] = g^2 f^* omega``.

    Works in a unitary frame of the Fubini-Study metric at ``f(z)``: with
    ``H = P^H P`` the frame coordinates are ``A = P f'`` and
    ``phi^psi = (Lambda^q P) phi``; then
    ``g^2 = |sum sign * phi^psi_lam A_{lam_perp}|^2 ||sigma||^2 / |A|^2`` and
    ``||phi||^2 = ||sigma||^2 |phi^psi|^2`` with ``||sigma||^2 = (1 + |w|^2)^(-p)``.
    Raises :class:`StationaryPointError` where ``f'`` vanishes.
    """
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    n = f.n
    if isinstance(phi, HolomorphicField):
        _require_codimension_one(n, phi.q)
        coeffs = field_minors(phi, f, z, 0)
        p = phi.p if p is None else p
    else:
        _require_codimension_one(n, phi.degree)
        coeffs = dict(phi.coeffs)
        p = 0 if p is None else p
    indices = [lam.entries for lam in enumerate_multiindices(n, n - 1)]
    phi_vec = np.stack(
        [np.broadcast_to(np.asarray(getattr(coeffs.get(k, 0), "value", coeffs.get(k, 0)), dtype=complex), z.shape) for k in indices],
        axis=-1,
    )
    w = np.stack([j.value for j in f.chart_jets(z, 0)], axis=-1)
    fp = np.stack([j.value for j in _tangent(f, z, 0)], axis=-1)
    H = _fs_matrix(w)
    L = np.linalg.cholesky(H)
    P = np.conj(np.swapaxes(L, -1, -2))
    A = np.einsum("...ij,...j->...i", P, fp)
    phi_psi = np.einsum("...ij,...j->...i", _compound(P, n - 1, indices), phi_vec)
    signs = np.array([perm_sign(complement(MultiIndex(k, n)), MultiIndex(k, n)) for k in indices])
    perp = [complement(MultiIndex(k, n)).entries[0] - 1 for k in indices]
    W = np.sum(signs * phi_psi * A[..., perp], axis=-1)
    u = np.sum(np.abs(A) ** 2, axis=-1)
    if np.any(u <= 1e-300):
        raise StationaryPointError("f' vanishes; the pullback of the Fubini-Study form is zero there")
    sigma2 = (1 + np.sum(np.abs(w) ** 2, axis=-1)) ** (-float(p))
    g = np.sqrt(np.abs(W) ** 2 * sigma2 / u)
    norm = np.sqrt(sigma2 * np.sum(np.abs(phi_psi) ** 2, axis=-1))
    return g, norm


# --------------------------------------------------------------------------
# ramification and the second main theorem identity


def _check_effective(f: ProjectiveCurve, phi: HolomorphicField):
    if f.is_constant:
        raise DegenerateConfigurationError("constant curve: the Jacobian section vanishes identically")
    probes = [0.37 + 0.21j, -0.52 + 0.66j, 1.1 - 0.4j, -1.3 - 1.2j, 0.05 + 1.9j, 2.2 + 0.3j]
    if not effectivity_test(f, phi, probes):
        raise DegenerateConfigurationError("field is not effective: the Jacobian scalar vanishes on all probes")


def ramification(f: ProjectiveCurve, phi: HolomorphicField, r_grid, route: str = "formula") -> GrowthTable:
    """``N_Ram(r)``: counting function of the zeros of the Jacobian scalar."""
    r_grid = _validate_grid(r_grid)
    _check_effective(f, phi)
    if r_grid.size == 0:
        return GrowthTable(r_grid, np.zeros(0), "N_Ram")
    zeros, notes = jacobian_zeros(f, phi, float(r_grid[-1]), route)
    return GrowthTable(r_grid, zeros.counting(r_grid), "N_Ram", notes)


def _half_log_xi(f: ProjectiveCurve, phi: HolomorphicField, z) -> np.ndarray:
    # 1/2 log xi with xi = rho(f) ||sigma||^2 |W|^2 and
    # rho = n! / pi^n (1 + |w|^2)^-(n+1) the Fubini-Study volume density
    n, p = f.n, phi.p
    jets, _ = f.normalized_jets(z, 0)
    log_s = np.log(sum(np.abs(j.value) ** 2 for j in jets)) - 2 * np.log(np.abs(jets[0].value))
    W = jacobian_scalar(f, phi, z, 0).value
    log_rho = math.log(math.factorial(n)) - n * math.log(math.pi) - (n + 1) * log_s
    with np.errstate(divide="ignore"):
        return 0.5 * (log_rho - p * log_s) + np.log(np.abs(W))


def smt_identity(
    f: ProjectiveCurve,
    phi: HolomorphicField,
    r_grid,
    tol: float = DEFAULT_AREA_TOL,
    circle_tol: float = DEFAULT_CIRCLE_TOL,
) -> dict[str, GrowthTable]:
    """Both sides of the curvature identity and their difference.

    Left side: ``1/2 avg_{|z|=r} log xi`` by circle quadrature.  Right side:
    ``T(r, O(-n-1)) - T(r, O(p)) + N_Ram(r)`` with ``T`` from the area
    integral and ``N_Ram`` from the Jacobian zeros.  The ``residual``
    table is constant in ``r`` up to quadrature error.
    """
    r_grid = _validate_grid(r_grid)
    _check_effective(f, phi)
    n, p = f.n, phi.p
    T1 = characteristic(f, 1, r_grid, tol, circle_tol)
    N_ram = ramification(f, phi, r_grid)
    zeros, _ = jacobian_zeros(f, phi, float(r_grid[-1]))
    notes = list(N_ram.notes)
    lhs = np.empty(r_grid.shape)
    for i, r in enumerate(r_grid):
        radius = float(r)
        for _ in range(20):
            if not any(abs(abs(a) - radius) <= PERTURBATION * radius for a, _ in zeros):
                break
            new = radius * (1 + PERTURBATION)
            notes.append(f"identity: radius {radius!r} perturbed to {new!r} (Jacobian zero on the circle)")
            radius = new
        lhs[i] = circle_means(lambda z: _half_log_xi(f, phi, z), [radius], circle_tol)[0][0]
    TK = GrowthTable(r_grid, -(n + 1) * T1.values, "T_K")
    TE = GrowthTable(r_grid, p * T1.values, "T_E")
    half = GrowthTable(r_grid, lhs, "half_log_xi", tuple(notes))
    residual = GrowthTable(r_grid, lhs - (TK.values - TE.values + N_ram.values), "residual", tuple(notes))
    return {"T": T1, "T_K": TK, "T_E": TE, "N_Ram": N_ram, "half_log_xi": half, "residual": residual}


def smt_identity_residual(f: ProjectiveCurve, phi: HolomorphicField, r_grid, tol: float = DEFAULT_AREA_TOL) -> GrowthTable:
    """Residual table of :func:`smt_identity`."""
    return smt_identity(f, phi, r_grid, tol)["residual"]


@dataclass(frozen=True)
class InequalityReport:
    """Growth comparison ``lhs(r) <= C * normalizer(r)`` outside an exceptional set.

    ``constant`` is fitted on the inner half of the grid (or supplied);
    ``exceptional`` marks grid points where the bound fails, and
    ``exceptional_fraction`` is their share of ``log r`` measure.
    """

    r: np.ndarray
    lhs: np.ndarray
    log_T: np.ndarray
    ratio: np.ndarray
    ratio_plus: np.ndarray
    constant: float
    exceptional: np.ndarray
    exceptional_fraction: float

    @property
    def max_ratio(self) -> float:
        finite = self.ratio[np.isfinite(self.ratio)]
        return float(finite.max()) if finite.size else float("nan")

    @property
    def max_ratio_plus(self) -> float:
        finite = self.ratio_plus[np.isfinite(self.ratio_plus)]
        return float(finite.max()) if finite.size else float("nan")

    def tables(self) -> list[GrowthTable]:
        return [
            GrowthTable(self.r, self.lhs, "lhs"),
            GrowthTable(self.r, self.log_T, "log_T"),
            GrowthTable(self.r, self.ratio, "ratio"),
            GrowthTable(self.r, self.ratio_plus, "ratio_plus"),
            GrowthTable(self.r, self.exceptional.astype(float), "exceptional"),
        ]


def _log_cells(r: np.ndarray) -> np.ndarray:
    s = np.log(r)
    if s.size == 1:
        return np.ones(1)
    edges = np.concatenate([[s[0]], 0.5 * (s[1:] + s[:-1]), [s[-1]]])
    return np.diff(edges)


def growth_inequality(r, lhs, T, constant: float | None = None) -> InequalityReport:
    """Bound ``lhs`` by a multiple of ``log T`` outside an exceptional set.

    Points where ``log T <= 0`` carry no normalisation; they count as
    exceptional only if ``lhs`` exceeds ``constant * log T`` there too.
    """
    r = np.asarray(r, dtype=float)
    lhs = np.asarray(lhs, dtype=float)
    T = np.asarray(T, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        log_T = np.where(T > 0, np.log(np.where(T > 0, T, 1)), -np.inf)
        ratio = np.where(log_T > 0, lhs / log_T, np.nan)
        plus = np.where(T > 1, np.log(np.maximum(T, 1)), 0.0) + np.where(r > math.e, np.log(np.log(np.maximum(r, math.e))), 0.0)
        ratio_plus = np.where(plus > 0, lhs / np.where(plus > 0, plus, 1), np.nan)
    if constant is None:
        inner = np.arange(r.size) < max(1, (r.size + 1) // 2)
        fit = ratio[inner & np.isfinite(ratio)]
        if not fit.size:
            fit = ratio[np.isfinite(ratio)]
        constant = float(fit.max()) if fit.size else 0.0
    with np.errstate(invalid="ignore"):
        bound = np.where(np.isfinite(log_T), constant * log_T, np.inf)
        exceptional = ~(lhs <= bound + 1e-12 * np.maximum(1, np.abs(bound)))
    cells = _log_cells(r) if r.size else np.zeros(0)
    total = float(cells.sum())
    fraction = float(cells[exceptional].sum() / total) if total > 0 else 0.0
    return InequalityReport(r, lhs, log_T, ratio, ratio_plus, float(constant), exceptional, fraction)


def smt_inequality(
    f: ProjectiveCurve,
    phi: HolomorphicField,
    r_grid,
    constant: float | None = None,
    tol: float = DEFAULT_AREA_TOL,
) -> InequalityReport:
    """``[T(r, K) + N_Ram - T(r, E)] / log T(r, O(1))`` over the grid."""
    r_grid = _validate_grid(r_grid)
    _check_effective(f, phi)
    T1 = characteristic(f, 1, r_grid, tol)
    N_ram = ramification(f, phi, r_grid)
    lhs = -(f.n + 1) * T1.values + N_ram.values - phi.p * T1.values
    return growth_inequality(r_grid, lhs, T1.values, constant)


# --------------------------------------------------------------------------
# first integrals


_ALIASES = {"x": "w1", "y": "w2"}


def first_integral_check(f: ProjectiveCurve, Phi, samples: Sequence[complex]) -> float:
    """``max_k |Phi(w(f(z_k))) - Phi(w(f(z_0)))|`` over the samples.

    ``Phi`` is an expression in ``w1 .. wn``; ``x`` and ``y`` are accepted
    for ``w1`` and ``w2``.  A vanishing deviation means ``f`` lies on a
    level set of ``Phi``.
    """
    Phi = _as_expression(Phi)
    Phi = substitute(Phi, {k: parse(v) for k, v in _ALIASES.items()})
    names = chart_names(f.n)
    extra = free_variables(Phi) - set(names)
    if extra:
        raise DomainError(f"first integral uses {sorted(extra)} outside {list(names)}")
    samples = np.asarray(list(samples), dtype=complex)
    if samples.size == 0:
        raise DomainError("empty sample")
    env = _chart_env(f, samples, 0)
    values = evaluate(Phi, env, 0).value
    return float(np.max(np.abs(values - values[0])))
