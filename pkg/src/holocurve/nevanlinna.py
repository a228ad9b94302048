"""Characteristic, proximity and counting functions of curves ``C -> P^n``.

A curve is given by a reduced representation ``F = (F_0, ..., F_n)`` of
expressions in ``z``.  Every pointwise quantity is evaluated after
dividing ``F`` (and ``F'``) by ``max_j |F_j|``, so curves such as
``(1, z, exp(z))`` can be sampled at radii where ``|F|`` is huge.

Measures on ``C`` are normalised as ``alpha = dA / pi`` and
``gamma = d theta / 2 pi``, so that ``T(r) = int_1^r dt/t int_{|z|<t} f^* omega``
with the Fubini-Study form ``omega``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from holocurve.errors import (
    BoundaryZeroError,
    ChartError,
    DegenerateConfigurationError,
    DomainError,
    NonReducedError,
    QuadratureError,
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
from holocurve.quadrature import DEFAULT_AREA_TOL, DEFAULT_CIRCLE_TOL, circle_means, disk_integrals
from holocurve.zeros import ZeroList, count_zeros

__all__ = [
    "ProjectiveCurve",
    "Divisor",
    "GrowthTable",
    "default_grid",
    "fs_pullback_density",
    "characteristic",
    "green_jensen_characteristic",
    "proximity",
    "counting",
    "divisor_zeros",
    "fmt_tables",
    "fmt_residual",
    "jensen_check",
    "CalculusLemmaReport",
    "calculus_lemma_diagnostic",
    "write_tables",
]

NONREDUCED_TOLERANCE = 1e-300
CHART_TOLERANCE = 1e-12
PERTURBATION = 1e-6


def default_grid() -> np.ndarray:
    """``r = 2^(k/2)`` for ``k = 2, ..., 14``."""
    return 2.0 ** (np.arange(2, 15) / 2)


def _as_expression(value) -> Expression:
    if isinstance(value, Expression):
        return value
    if isinstance(value, str):
        return parse(value)
    return Const(complex(value))


# --------------------------------------------------------------------------
# curves


@dataclass(frozen=True)
class ProjectiveCurve:
    """Reduced representation ``F_0 : ... : F_n`` of a curve ``C -> P^n``."""

    components: tuple[Expression, ...]
    variable: str = "z"

    def __post_init__(self):
        comps = tuple(_as_expression(c) for c in self.components)
        if len(comps) < 2:
            raise DomainError("a projective curve needs at least two components")
        for c in comps:
            extra = free_variables(c) - {self.variable}
            if extra:
                raise DomainError(f"component {to_text(c)!r} uses unknown variables {sorted(extra)}")
        object.__setattr__(self, "components", comps)

    @classmethod
    def affine(cls, *components, variable: str = "z") -> ProjectiveCurve:
        """Curve ``(1 : f_1 : ... : f_n)`` in the standard chart ``w_0 != 0``."""
        return cls((Const(1),) + tuple(_as_expression(c) for c in components), variable)

    @property
    def n(self) -> int:
        return len(self.components) - 1

    @property
    def is_constant(self) -> bool:
        return not any(self.variable in free_variables(c) for c in self.components)

    def __str__(self) -> str:
        return "(" + " : ".join(to_text(c) for c in self.components) + ")"

    def compose(self, inner: Expression) -> ProjectiveCurve:
        """The curve ``z -> F(inner(z))``."""
        inner = _as_expression(inner)
        return ProjectiveCurve(tuple(substitute(c, {self.variable: inner}) for c in self.components), self.variable)

    def jets(self, z, order: int) -> list[Jet]:
        """Jets of ``F_0 .. F_n`` at (an array of) points ``z``."""
        zj = Jet.variable(np.asarray(z, dtype=complex), order)
        return [evaluate(c, {self.variable: zj}, order) for c in self.components]

    def normalized_jets(self, z, order: int) -> tuple[list[Jet], np.ndarray]:
        """Jets divided by ``s = max_j |F_j(z)|``; returns ``(jets, s)``.

        Raises :class:`NonReducedError` where all components vanish.
        """
        jets = self.jets(z, order)
        scale = np.max(np.stack([np.abs(j.value) for j in jets]), axis=0)
        if np.any(scale < NONREDUCED_TOLERANCE):
            raise NonReducedError("all components vanish simultaneously; the representation is not reduced")
        return [Jet(j.coeffs / scale, j.base) for j in jets], scale

    def chart_jets(self, z, order: int, chart: int = 0) -> list[Jet]:
        """Jets of the affine coordinates ``w_j = F_j / F_chart`` (``j != chart``).

        Raises :class:`ChartError` when ``|F_chart| < 1e-12``.
        """
        jets = self.jets(z, order)
        scale = np.max(np.stack([np.abs(j.value) for j in jets]), axis=0)
        if np.any(scale < NONREDUCED_TOLERANCE):
            raise NonReducedError("all components vanish simultaneously; the representation is not reduced")
        den = jets[chart]
        if np.any(np.abs(den.value) < CHART_TOLERANCE):
            raise ChartError(f"curve leaves the chart w_{chart} != 0")
        inv = den.reciprocal()
        return [j * inv for i, j in enumerate(jets) if i != chart]

    def check_reduced(self, radius: float) -> None:
        """Raise :class:`NonReducedError` if all components share a zero in ``|z| < radius``.

        Zeros of one nonconstant component are located and the others
        evaluated there; a nonzero constant component settles it at once.
        """
        comps = [c for c in self.components if not (isinstance(c, Const) and c.value == 0)]
        if any(isinstance(c, Const) for c in comps) or self.is_constant:
            return
        for _ in range(20):
            try:
                zeros = count_zeros(comps[0], radius, self.variable)
                break
            except BoundaryZeroError:
                radius *= 1 + PERTURBATION
        else:
            raise BoundaryZeroError("could not move the reducedness circle off the zeros")
        for a, _ in zeros:
            values = [abs(j.value) for j in self.jets(a, 0)]
            if max(values) <= 1e-8:
                raise NonReducedError(f"all components vanish at z = {a:.12g}; the representation is not reduced")

    def log_norm(self, z) -> np.ndarray:
        """``log ||F(z)||`` (Euclidean norm)."""
        jets, scale = self.normalized_jets(z, 0)
        sq = sum(np.abs(j.value) ** 2 for j in jets)
        return np.log(scale) + 0.5 * np.log(sq)


# --------------------------------------------------------------------------
# divisors


@dataclass(frozen=True)
class Divisor:
    """Hypersurface ``{Q = 0}`` for a homogeneous polynomial ``Q(w_0, ..., w_n)``."""

    expression: Expression
    n: int
    coefficients: dict = field(init=False, compare=False)
    degree: int = field(init=False)

    def __post_init__(self):
        expr = _as_expression(self.expression)
        object.__setattr__(self, "expression", expr)
        names = tuple(f"w{j}" for j in range(self.n + 1))
        extra = free_variables(expr) - set(names)
        if extra:
            raise DomainError(f"divisor uses variables {sorted(extra)} outside w0..w{self.n}")
        poly = as_polynomial(expr, names)
        if poly is None:
            raise DomainError(f"{to_text(expr)!r} is not a polynomial in w0..w{self.n}")
        if not poly:
            raise DomainError("divisor polynomial vanishes identically")
        degrees = {sum(e) for e in poly}
        if len(degrees) != 1:
            raise DomainError(f"{to_text(expr)!r} is not homogeneous (degrees {sorted(degrees)})")
        object.__setattr__(self, "coefficients", poly)
        object.__setattr__(self, "degree", degrees.pop())

    @classmethod
    def parse(cls, text: str, n: int) -> Divisor:
        return cls(parse(text), n)

    @property
    def c_Q(self) -> float:
        """Sum of coefficient moduli; makes ``|Q(x)| <= c_Q ||x||^d``."""
        return float(sum(abs(c) for c in self.coefficients.values()))

    def pullback(self, f: ProjectiveCurve) -> Expression:
        """``Q o F`` as an expression in the curve variable."""
        self._check_dimension(f)
        return substitute(self.expression, {f"w{j}": c for j, c in enumerate(f.components)})

    def _check_dimension(self, f: ProjectiveCurve):
        if f.n != self.n:
            raise DomainError(f"divisor lives in P^{self.n} but the curve maps to P^{f.n}")

    def normalized_values(self, f: ProjectiveCurve, z) -> tuple[np.ndarray, np.ndarray]:
        """``(Q(F/s), log ||F/s||)`` with ``s = max |F_j|`` at points ``z``."""
        self._check_dimension(f)
        jets, _ = f.normalized_jets(z, 0)
        env = {f"w{j}": jet for j, jet in enumerate(jets)}
        q = evaluate(self.expression, env, 0).value
        log_norm = 0.5 * np.log(sum(np.abs(j.value) ** 2 for j in jets))
        return q, log_norm


def _check_not_contained(f: ProjectiveCurve, D: Divisor):
    # a fixed scatter of probes; Q o F vanishing on all of them means f(C) lies in D
    probes = np.array([0.3 + 0.1j, -0.7 + 0.45j, 1.3 - 0.9j, -0.2 - 1.7j, 2.1 + 1.4j, 0.05 + 2.6j])
    q, _ = D.normalized_values(f, probes)
    if np.all(np.abs(q) <= 1e-13 * D.c_Q):
        raise DegenerateConfigurationError(f"the curve {f} lies in the divisor {{{to_text(D.expression)} = 0}}")


# --------------------------------------------------------------------------
# growth tables


def _validate_grid(r) -> np.ndarray:
    r = np.asarray(r, dtype=float).ravel()
    if r.size and (r[0] < 1 or np.any(np.diff(r) <= 0)):
        raise DomainError("r grid must be strictly increasing with r[0] >= 1")
    return r


@dataclass(frozen=True)
class GrowthTable:
    """Sampled function ``r -> value`` on a radius grid.

    ``notes`` records perturbed radii and other adjustments made while
    computing the values.
    """

    r: np.ndarray
    values: np.ndarray
    label: str
    notes: tuple[str, ...] = ()

    def __post_init__(self):
        r = _validate_grid(self.r)
        values = np.asarray(self.values, dtype=float).ravel()
        if values.shape != r.shape:
            raise DomainError(f"{values.size} values for {r.size} radii")
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "notes", tuple(self.notes))

    def __len__(self) -> int:
        return self.r.size

    def _combine(self, other, op, label):
        if isinstance(other, GrowthTable):
            if not np.array_equal(self.r, other.r):
                raise DomainError("growth tables live on different grids")
            return GrowthTable(self.r, op(self.values, other.values), label, self.notes + other.notes)
        return GrowthTable(self.r, op(self.values, float(other)), label, self.notes)

    def __add__(self, other):
        return self._combine(other, np.add, self.label)

    def __radd__(self, other):
        return self + other

    def __sub__(self, other):
        return self._combine(other, np.subtract, self.label)

    def __rsub__(self, other):
        return GrowthTable(self.r, float(other) - self.values, self.label, self.notes)

    def __mul__(self, other):
        return self._combine(other, np.multiply, self.label)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self._combine(other, np.divide, self.label)

    def __neg__(self):
        return GrowthTable(self.r, -self.values, self.label, self.notes)

    def relabel(self, label: str) -> GrowthTable:
        return GrowthTable(self.r, self.values, label, self.notes)

    def restrict(self, r_min: float = -math.inf, r_max: float = math.inf) -> GrowthTable:
        keep = (self.r >= r_min) & (self.r <= r_max)
        return GrowthTable(self.r[keep], self.values[keep], self.label, self.notes)

    @property
    def spread(self) -> float:
        return float(self.values.max() - self.values.min()) if self.values.size else 0.0

    def to_csv(self, path) -> None:
        write_tables(path, [self])


def write_tables(path, tables: Sequence[GrowthTable]) -> None:
    """CSV with header ``r,<label>,...`` and round-trip float formatting."""
    if not tables:
        raise ValueError("nothing to write")
    r = tables[0].r
    for t in tables[1:]:
        if not np.array_equal(t.r, r):
            raise DomainError("tables written together must share a grid")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["r"] + [t.label for t in tables])
        for i, radius in enumerate(r):
            writer.writerow([repr(float(radius))] + [repr(float(t.values[i])) for t in tables])


# --------------------------------------------------------------------------
# characteristic function


def fs_pullback_density(f: ProjectiveCurve, z) -> np.ndarray:
    """Density of ``f^* omega_FS`` against Lebesgue measure ``dA``.

    ``sum_{j<k} |F_j F_k' - F_k F_j'|^2 / (pi ||F||^4)``; the Lagrange form
    keeps the value nonnegative in floating point.
    """
    jets, _ = f.normalized_jets(z, 1)
    F = [j.coeffs[0] for j in jets]
    G = [j.coeffs[1] for j in jets]
    num = np.zeros(np.shape(F[0]))
    for j in range(len(F)):
        for k in range(j + 1, len(F)):
            num = num + np.abs(F[j] * G[k] - F[k] * G[j]) ** 2
    norm2 = sum(np.abs(x) ** 2 for x in F)
    out = num / (np.pi * norm2**2)
    return out if np.ndim(z) else float(out)


def characteristic(
    f: ProjectiveCurve,
    d: int,
    r_grid,
    tol: float = DEFAULT_AREA_TOL,
    circle_tol: float = DEFAULT_CIRCLE_TOL,
) -> GrowthTable:
    """``T_f(r, O(d)) = d * int_1^r dt/t int_{|z|<t} f^* omega``.

    Raises :class:`QuadratureError` (with the achieved estimate) when the
    nested quadrature does not converge.
    """
    r_grid = _validate_grid(r_grid)
    if f.is_constant or r_grid.size == 0:
        return GrowthTable(r_grid, np.zeros(r_grid.shape), "T")
    _, T = disk_integrals(lambda z: fs_pullback_density(f, z), r_grid, tol, circle_tol)
    return GrowthTable(r_grid, d * T, "T")


def green_jensen_characteristic(f: ProjectiveCurve, r_grid, tol: float = DEFAULT_CIRCLE_TOL) -> GrowthTable:
    """``T_f(r, O(1))`` as ``avg_{|z|=r} log||F|| - avg_{|z|=1} log||F||``.

    An independent route to :func:`characteristic` that only needs circle
    averages (valid because ``log ||F||`` is subharmonic with Laplacian
    proportional to the pulled-back Fubini-Study form).
    """
    r_grid = _validate_grid(r_grid)
    means, _ = circle_means(lambda z: f.log_norm(z), np.concatenate([[1.0], r_grid]), tol)
    return GrowthTable(r_grid, means[1:] - means[0], "T")


# --------------------------------------------------------------------------
# proximity and counting


def divisor_zeros(f: ProjectiveCurve, D: Divisor, radius: float) -> tuple[ZeroList, tuple[str, ...]]:
    """Zeros of ``Q o F`` in ``|z| < radius``; the radius is nudged off zeros."""
    _check_not_contained(f, D)
    g = D.pullback(f)
    notes = []
    for _ in range(20):
        try:
            return count_zeros(g, radius, f.variable), tuple(notes)
        except BoundaryZeroError as err:
            new = radius * (1 + PERTURBATION)
            notes.append(f"counting radius {radius!r} perturbed to {new!r}: {err}")
            radius = new
    raise BoundaryZeroError("could not move the counting circle off the zeros of Q o F")


def _clear_radius(r: float, zeros: ZeroList | None, notes: list, what: str) -> float:
    if zeros is None:
        return r
    for _ in range(20):
        if not any(abs(abs(a) - r) <= PERTURBATION * r for a, _ in zeros):
            return r
        new = r * (1 + PERTURBATION)
        notes.append(f"{what}: radius {r!r} perturbed to {new!r} (zero of Q o F on the circle)")
        r = new
    return r


def _near_zeros(zeros: ZeroList | None, r: float):
    if zeros is None:
        return ()
    return tuple((a, m) for a, m in zeros if abs(abs(a) - r) < 0.25 * r)


def proximity(
    f: ProjectiveCurve,
    D: Divisor,
    r_grid,
    tol: float = DEFAULT_CIRCLE_TOL,
    zeros: ZeroList | None = None,
) -> GrowthTable:
    """``m_f(r, D) = avg_{|z|=r} log(c_Q ||F||^d / |Q(F)|) >= 0``.

    When ``zeros`` (of ``Q o F``) is supplied, circles passing within
    ``1e-6 r`` of a zero are moved outward by ``1e-6 r`` and the move is
    recorded in the table notes.
    """
    r_grid = _validate_grid(r_grid)
    _check_not_contained(f, D)
    d, c_q = D.degree, D.c_Q

    def integrand(z, near=()):
        q, log_norm = D.normalized_values(f, z)
        with np.errstate(divide="ignore"):
            out = d * log_norm + math.log(c_q) - np.log(np.abs(q))
            for a, m in near:
                out = out + m * np.log(np.abs(z - a))
        return out

    notes: list[str] = []
    values = np.empty(r_grid.shape)
    for i, r in enumerate(r_grid):
        radius = _clear_radius(float(r), zeros, notes, "proximity")
        for _ in range(20):
            # zeros close to the circle are removed exactly: avg log|z - a| = log max(r, |a|)
            near = _near_zeros(zeros, radius)
            exact = sum(m * math.log(max(radius, abs(a))) for a, m in near)
            try:
                mean = circle_means(lambda z: integrand(z, near), [radius], tol)[0][0]
                values[i] = mean - exact
                break
            except QuadratureError as err:
                if zeros is None or zeros.radius < 2 * radius:
                    zeros, zero_notes = divisor_zeros(f, D, 2 * radius)
                    notes.extend(zero_notes)
                    notes.append(f"proximity: zeros of Q o F near r={radius!r} subtracted after: {err}")
                    continue
                if err.estimate is not None:
                    raise
                new = radius * (1 + PERTURBATION)
                notes.append(f"proximity: radius {radius!r} perturbed to {new!r} (singular node)")
                radius = new
        else:
            raise QuadratureError(f"proximity integrand singular near r={r!r}")
    return GrowthTable(r_grid, values, "m", tuple(notes))


def counting(f: ProjectiveCurve, D: Divisor, r_grid, zeros: ZeroList | None = None) -> GrowthTable:
    """``N_f(r, D) = int_1^r n(t) dt / t`` from the zeros of ``Q o F``."""
    r_grid = _validate_grid(r_grid)
    if r_grid.size == 0:
        return GrowthTable(r_grid, np.zeros(0), "N")
    notes: tuple[str, ...] = ()
    if zeros is None or zeros.radius < r_grid[-1]:
        zeros, notes = divisor_zeros(f, D, float(r_grid[-1]))
    return GrowthTable(r_grid, zeros.counting(r_grid), "N", notes)


def fmt_tables(
    f: ProjectiveCurve,
    D: Divisor,
    r_grid,
    tol: float = DEFAULT_AREA_TOL,
    circle_tol: float = DEFAULT_CIRCLE_TOL,
) -> dict[str, GrowthTable]:
    """``T``, ``m``, ``N`` and ``residual = T - m - N`` on one grid."""
    r_grid = _validate_grid(r_grid)
    zeros, notes = divisor_zeros(f, D, float(r_grid[-1]) if r_grid.size else 1.0)
    T = characteristic(f, D.degree, r_grid, tol, circle_tol)
    m = proximity(f, D, r_grid, circle_tol, zeros)
    N = counting(f, D, r_grid, zeros)
    residual = GrowthTable(r_grid, T.values - m.values - N.values, "residual", notes + m.notes)
    return {"T": T, "m": m, "N": N, "residual": residual}


def fmt_residual(f: ProjectiveCurve, D: Divisor, r_grid, tol: float = DEFAULT_AREA_TOL) -> GrowthTable:
    """``T_f(r, O(d)) - m_f(r, D) - N_f(r, D)``; bounded (flat) in ``r``."""
    return fmt_tables(f, D, r_grid, tol)["residual"]


# --------------------------------------------------------------------------
# Jensen


def jensen_check(g, r: float, s: float, tol: float = 1e-12, variable: str = "z") -> float:
    """``[avg_r log|g| - avg_s log|g|] - int_s^r n_g(t) dt / t``.

    Zero (to quadrature accuracy) for ``g`` analytic on ``|z| <= r``.
    Raises :class:`BoundaryZeroError` when ``g`` vanishes on either circle.
    """
    if not 0 < s < r:
        raise DomainError("need 0 < s < r")
    g = _as_expression(g)
    zeros = count_zeros(g, r, variable)
    for a, _ in zeros:
        if abs(abs(a) - s) <= 1e-9 * (1 + s):
            raise BoundaryZeroError(f"zero {a!r} on the inner circle |z| = {s!r}", location=a)

    def log_abs(z):
        zj = Jet.variable(z, 0)
        value = evaluate(g, {variable: zj}, 0).value
        return np.log(np.abs(value))

    means, _ = circle_means(log_abs, [s, r], tol)
    counted = sum(m * math.log(r / max(abs(a), s)) for a, m in zeros)
    return float(means[1] - means[0] - counted)


# --------------------------------------------------------------------------
# calculus lemma


@dataclass(frozen=True)
class CalculusLemmaReport:
    """Per-radius quantities of the calculus-lemma comparison.

    ``ratio`` is ``log+ avg_{|z|=r} kappa / (log+ T_kappa + log+ log r)``
    (``nan`` where the denominator vanishes).  ``violations`` marks grid
    points where a Borel growth bound fails for ``T_kappa`` or for
    ``r T_kappa'``; ``exceptional_length`` is the total length of the grid
    cells around those points.
    """

    r: np.ndarray
    circle_mean: np.ndarray
    T: np.ndarray
    ratio: np.ndarray
    violations: np.ndarray
    exceptional_length: float
    total_length: float

    @property
    def max_ratio(self) -> float:
        finite = self.ratio[np.isfinite(self.ratio)]
        return float(finite.max()) if finite.size else float("nan")


def _log_plus(x):
    with np.errstate(divide="ignore"):
        return np.where(x > 1, np.log(np.maximum(x, 1)), 0.0)


def _cell_lengths(r: np.ndarray) -> np.ndarray:
    if r.size == 1:
        return np.zeros(1)
    edges = np.concatenate([[r[0]], 0.5 * (r[1:] + r[:-1]), [r[-1]]])
    return np.diff(edges)


def calculus_lemma_diagnostic(kappa, r_grid, delta: float = 0.1, tol: float = DEFAULT_AREA_TOL) -> CalculusLemmaReport:
    """Compare the circle average of a density with its characteristic.

    ``kappa`` is a vectorised nonnegative function on ``C``, taken as a
    density against ``alpha = dA / pi``, so ``kappa == 1`` gives
    ``T_kappa(r) = (r^2 - 1) / 2``.
    """
    r = _validate_grid(r_grid)
    empty = np.zeros(0)
    if r.size == 0:
        return CalculusLemmaReport(empty, empty, empty, empty, np.zeros(0, bool), 0.0, 0.0)
    A, T = disk_integrals(lambda z: np.asarray(kappa(z), dtype=float) / np.pi, r, tol)
    means, _ = circle_means(lambda z: np.asarray(kappa(z), dtype=float), r)
    means = np.real(means)
    with np.errstate(divide="ignore", invalid="ignore"):
        denom = _log_plus(T) + _log_plus(np.log(r))
        ratio = np.where(denom > 0, _log_plus(means) / np.where(denom > 0, denom, 1), np.nan)
        # T' = A / r and (r T')' = 2 r avg kappa
        dT = A / r
        dA = 2 * r * means
        logT = np.log(np.maximum(T, 1))
        logA = np.log(np.maximum(A, 1))
        bad_T = (T > 1) & (dT > T * logT ** (1 + delta))
        bad_A = (A > 1) & (dA > A * logA ** (1 + delta))
    violations = bad_T | bad_A
    cells = _cell_lengths(r)
    return CalculusLemmaReport(
        r, means, T, ratio, violations, float(cells[violations].sum()), float(r[-1] - r[0])
    )
