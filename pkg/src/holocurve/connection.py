"""Meromorphic connections on the tangent bundle of a chart of ``P^n``.

A connection is a table of Christoffel symbols ``Gamma^a_{bc}`` in
``w1 .. wn`` together with a section ``t`` of ``O(p)`` clearing its
poles.  Along a curve the twisted covariant derivatives are

    f^(1) = f',    f^(j+1)_a = t(f) * [ (f^(j)_a)' + sum_{b,c} Gamma^a_{bc}(f) f'_b f^(j)_c ],

computed on jets so that every derivative is exact.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from holocurve.errors import (
    BoundaryZeroError,
    DegenerateConfigurationError,
    DomainError,
    PoleError,
    SingularPointError,
)
from holocurve.exterior import ExteriorElement, wedge_all
from holocurve.expression import Call, Const, Expression, Var, evaluate, free_variables, parse, to_text
from holocurve.jacobian import InequalityReport, PoleSection, chart_names, growth_inequality
from holocurve.jets import Jet
from holocurve.nevanlinna import PERTURBATION, GrowthTable, ProjectiveCurve, _validate_grid, characteristic
from holocurve.quadrature import DEFAULT_AREA_TOL
from holocurve.zeros import ZeroList, count_zeros

__all__ = [
    "MeromorphicConnection",
    "covariant_jet_series",
    "covariant_jets",
    "wronskian_jet",
    "autoparallel_wronskian",
    "is_autoparallel",
    "pole_membership",
    "SiuReport",
    "siu_smt_residual",
    "nadel_transform",
]

AUTOPARALLEL_TOLERANCE = 1e-12


@dataclass(frozen=True)
class MeromorphicConnection:
    """Christoffel symbols ``gamma[(a, b, c)] = Gamma^a_{bc}`` (1-based, sparse).

    Absent entries are zero.  ``section`` is the pole-clearing ``t``.
    """

    n: int
    gamma: Mapping[tuple[int, int, int], Expression] = field(default_factory=dict)
    section: PoleSection | None = None

    def __post_init__(self):
        if self.n < 1:
            raise DomainError("connection needs n >= 1")
        allowed = set(chart_names(self.n))
        table = {}
        for key, value in dict(self.gamma).items():
            key = tuple(int(k) for k in key)
            if len(key) != 3 or not all(1 <= k <= self.n for k in key):
                raise DomainError(f"Christoffel index {key} outside [1, {self.n}]^3")
            expr = value if isinstance(value, Expression) else parse(value) if isinstance(value, str) else Const(value)
            extra = free_variables(expr) - allowed
            if extra:
                raise DomainError(f"Gamma{key} = {to_text(expr)!r} uses {sorted(extra)}")
            if isinstance(expr, Const) and expr.value == 0:
                continue
            table[key] = expr
        section = self.section if self.section is not None else PoleSection.one(self.n)
        if section.n != self.n:
            raise DomainError("pole section lives in a different dimension")
        object.__setattr__(self, "gamma", table)
        object.__setattr__(self, "section", section)

    @classmethod
    def flat(cls, n: int, section: PoleSection | None = None) -> MeromorphicConnection:
        return cls(n, {}, section)

    @property
    def p(self) -> int:
        return self.section.degree

    def check_pole_clearing(self, probes) -> None:
        """``t * Gamma`` must be finite at each probe (raises :class:`PoleError`)."""
        probes = np.asarray(probes, dtype=complex)
        env = {name: probes[..., j] for j, name in enumerate(chart_names(self.n))}
        with np.errstate(all="ignore"):
            t = self.section.at(env, 0).value
            for key, expr in self.gamma.items():
                try:
                    v = evaluate(expr, env, 0).value
                except SingularPointError as err:
                    raise PoleError(f"Gamma{key} is singular at a probe: {err}") from None
                if not np.all(np.isfinite(t * v)):
                    raise PoleError(f"t * Gamma{key} is not finite at a probe")


def _check(f: ProjectiveCurve, D: MeromorphicConnection):
    if f.n != D.n:
        raise DomainError(f"connection lives on P^{D.n} but the curve maps to P^{f.n}")


def covariant_jet_series(f: ProjectiveCurve, D: MeromorphicConnection, k: int, z, extra: int = 0) -> list[list[Jet]]:
    """Jets of ``f^(1) .. f^(k)``; ``f^(j)`` keeps ``k - j + extra`` orders."""
    _check(f, D)
    if k < 1:
        raise DomainError("k must be >= 1")
    w = f.chart_jets(z, k + extra)
    env = dict(zip(chart_names(f.n), w))
    try:
        t = D.section.at(env, k + extra)
        gamma = {key: evaluate(expr, env, k + extra) for key, expr in D.gamma.items()}
    except SingularPointError as err:
        raise PoleError(f"connection has a pole at f(z) not cleared by t: {err}") from None
    fprime = [wj.d() for wj in w]
    out = [fprime]
    for _ in range(1, k):
        prev = out[-1]
        nxt = []
        for a in range(1, f.n + 1):
            term = prev[a - 1].d()
            for (alpha, b, c), g in gamma.items():
                if alpha == a:
                    term = term + g * fprime[b - 1] * prev[c - 1]
            nxt.append(t * term)
        out.append(nxt)
    return out


def covariant_jets(f: ProjectiveCurve, D: MeromorphicConnection, k: int, z) -> list[np.ndarray]:
    """Values ``f^(1)(z) .. f^(k)(z)``, each an array with trailing axis ``n``."""
    series = covariant_jet_series(f, D, k, z)
    return [np.stack([j.value for j in row], axis=-1) for row in series]


def wronskian_jet(f: ProjectiveCurve, D: MeromorphicConnection, z, order: int = 0) -> Jet:
    """Jet of ``det[f^(1); ...; f^(n)]`` through ``order``.

    The determinant is the top coefficient of ``f^(1) ^ ... ^ f^(n)``.
    """
    rows = covariant_jet_series(f, D, f.n, z, extra=order)
    top = wedge_all([ExteriorElement.vector(row) for row in rows]).top_coefficient()
    if not isinstance(top, Jet):
        top = Jet.constant(np.broadcast_to(complex(top), np.shape(z)), order)
    return top.truncate(order) if top.order > order else top


def autoparallel_wronskian(f: ProjectiveCurve, D: MeromorphicConnection, z):
    """``det`` of the matrix with rows ``f^(1)(z), ..., f^(n)(z)``."""
    value = wronskian_jet(f, D, z, 0).value
    return value if np.ndim(z) else complex(value)


def is_autoparallel(f: ProjectiveCurve, D: MeromorphicConnection, sample: Sequence[complex]) -> bool:
    """True when the Wronskian vanishes (to ``1e-12``) at every sample."""
    values = autoparallel_wronskian(f, D, np.asarray(list(sample), dtype=complex))
    return bool(np.all(np.abs(values) <= AUTOPARALLEL_TOLERANCE))


def pole_membership(f: ProjectiveCurve, t: PoleSection, sample: Sequence[complex]) -> list[tuple[complex, float]]:
    """``(z, |t(f(z))|)`` in the chart for each sample point."""
    sample = np.asarray(list(sample), dtype=complex)
    env = dict(zip(chart_names(f.n), f.chart_jets(sample, 0)))
    values = np.abs(t.at(env, 0).value)
    return [(complex(z), float(v)) for z, v in zip(sample, values)]


@dataclass(frozen=True)
class SiuReport:
    """Normalised growth comparison for a non-autoparallel curve."""

    T: GrowthTable
    N_ram: GrowthTable
    lhs: GrowthTable
    inequality: InequalityReport
    zeros: ZeroList
    notes: tuple[str, ...] = ()

    @property
    def normalized(self) -> GrowthTable:
        return GrowthTable(self.T.r, self.inequality.ratio, "normalized")


_PROBES = (0.37 + 0.21j, -0.52 + 0.66j, 1.1 - 0.4j, -1.3 - 1.2j, 0.05 + 1.9j, 2.2 + 0.3j)


def siu_smt_residual(
    f: ProjectiveCurve,
    D: MeromorphicConnection,
    r_grid,
    constant: float | None = None,
    tol: float = DEFAULT_AREA_TOL,
) -> SiuReport:
    """``[T(r, O(-n-1)) + N_Ram(r) - n(n-1)/2 T(r, O(p))] / log T(r, O(1))``.

    ``N_Ram`` counts the zeros of the Wronskian of the covariant jets.
    Raises :class:`DegenerateConfigurationError` for autoparallel curves.
    """
    r_grid = _validate_grid(r_grid)
    _check(f, D)
    if f.is_constant or is_autoparallel(f, D, _PROBES):
        raise DegenerateConfigurationError("the curve is autoparallel: its covariant Wronskian vanishes identically")
    n = f.n
    radius = float(r_grid[-1]) if r_grid.size else 1.0
    notes = []
    for _ in range(20):
        try:
            zeros = count_zeros(lambda z, order: wronskian_jet(f, D, z, order), radius)
            break
        except BoundaryZeroError as err:
            new = radius * (1 + PERTURBATION)
            notes.append(f"ramification radius {radius!r} perturbed to {new!r}: {err}")
            radius = new
    else:
        raise BoundaryZeroError("could not move the counting circle off the Wronskian zeros")
    T1 = characteristic(f, 1, r_grid, tol)
    N_ram = GrowthTable(r_grid, zeros.counting(r_grid), "N_Ram", tuple(notes))
    lhs = -(n + 1) * T1.values + N_ram.values - n * (n - 1) / 2 * D.p * T1.values
    report = growth_inequality(r_grid, lhs, T1.values, constant)
    return SiuReport(T1, N_ram, GrowthTable(r_grid, lhs, "lhs"), report, zeros, tuple(notes))


def nadel_transform(f: ProjectiveCurve) -> ProjectiveCurve:
    """The curve ``z -> f(exp(z))``."""
    return f.compose(Call("exp", Var(f.variable)))
