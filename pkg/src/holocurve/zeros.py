"""Zeros of analytic functions in a disk.

Polynomials go through companion-matrix roots (``numpy.roots``) followed by
clustering and Newton polishing.  Anything else is handled by recursive
subdivision of a square with the argument principle: the winding number of
``g`` along a closed polygon is the change of ``arg g`` accumulated over
samples fine enough that consecutive phases differ by less than ``pi/4``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from holocurve.errors import BoundaryZeroError, QuadratureError
from holocurve.expression import Expression, as_polynomial, jet_eval
from holocurve.jets import Jet

__all__ = ["ZeroList", "count_zeros", "winding_number", "MERGE_TOLERANCE"]

MERGE_TOLERANCE = 1e-9
BOUNDARY_TOLERANCE = 1e-9
# a box this small (relative to 1 + |center|) that still winds m > 1 times
# around g is reported as one zero of multiplicity m
MULTIPLE_ZERO_BOX = 1e-4
_MAX_SAMPLES = 2_000_000
_PHASE_STEP = math.pi / 4


@dataclass(frozen=True)
class ZeroList:
    """Zeros ``(location, multiplicity)`` of a function inside ``|z| < radius``."""

    zeros: tuple[tuple[complex, int], ...]
    radius: float

    def __post_init__(self):
        clean = tuple(sorted(((complex(a), int(m)) for a, m in self.zeros), key=lambda p: (abs(p[0]), p[0].real, p[0].imag)))
        for _, m in clean:
            if m < 1:
                raise ValueError("multiplicities must be positive")
        object.__setattr__(self, "zeros", clean)

    def __len__(self) -> int:
        return len(self.zeros)

    def __iter__(self):
        return iter(self.zeros)

    @property
    def total(self) -> int:
        return sum(m for _, m in self.zeros)

    def locations(self) -> np.ndarray:
        return np.array([a for a, _ in self.zeros], dtype=complex)

    def multiplicities(self) -> np.ndarray:
        return np.array([m for _, m in self.zeros], dtype=int)

    def within(self, r: float) -> ZeroList:
        return ZeroList(tuple((a, m) for a, m in self.zeros if abs(a) < r), r)

    def count(self, r: float) -> int:
        """``n(r)``: zeros in ``|z| < r`` counted with multiplicity."""
        return sum(m for a, m in self.zeros if abs(a) < r)

    def counting(self, r_grid) -> np.ndarray:
        """``N(r) = int_1^r n(t) dt / t`` for each radius in ``r_grid``."""
        r_grid = np.asarray(r_grid, dtype=float)
        if r_grid.size and r_grid.max() > self.radius * (1 + 1e-12):
            raise ValueError(f"zero list only covers |z| < {self.radius}")
        out = np.zeros(r_grid.shape)
        for a, m in self.zeros:
            inside = abs(a) < r_grid
            out += np.where(inside, m * np.log(r_grid / max(abs(a), 1.0)), 0.0)
        return out

    def matches(self, other: ZeroList, tol: float = MERGE_TOLERANCE) -> bool:
        """Same multiplicities at locations agreeing within ``tol``."""
        if len(self) != len(other):
            return False
        remaining = list(other.zeros)
        for a, m in self.zeros:
            hit = next((i for i, (b, k) in enumerate(remaining) if k == m and abs(a - b) <= tol * (1 + abs(a))), None)
            if hit is None:
                return False
            remaining.pop(hit)
        return True


def _merge(zeros, tol=MERGE_TOLERANCE):
    merged: list[list] = []
    for a, m in zeros:
        for item in merged:
            if abs(item[0] - a) <= tol * (1 + abs(a)):
                total = item[1] + m
                item[0] = (item[0] * item[1] + a * m) / total
                item[1] = total
                break
        else:
            merged.append([complex(a), int(m)])
    return [(a, m) for a, m in merged]


# --------------------------------------------------------------------------
# function adapters


def _as_function(g, variable: str) -> Callable[[np.ndarray, int], Jet]:
    if isinstance(g, Expression):
        return lambda z, order: jet_eval(g, z, order, variable)
    if callable(g):
        return g
    raise TypeError("g must be an Expression or a callable (z, order) -> Jet")


def _values(fn, z):
    jet = fn(np.asarray(z, dtype=complex), 1)
    return np.asarray(jet.coeffs[0]), np.asarray(jet.coeffs[1])


# --------------------------------------------------------------------------
# argument principle


def _path_phase(fn, points_of, n0=64):
    """Accumulated phase of ``g`` along the path ``s -> points_of(s)``, s in [0, 1].

    Returns ``(total_phase, min_ratio, where)`` where ``min_ratio`` is the
    smallest ``|g / g'|`` seen, a proxy for the distance to the nearest zero.
    """
    s = np.linspace(0.0, 1.0, n0 + 1)
    z = points_of(s)
    g, dg = _values(fn, z)
    while True:
        if not (np.all(np.isfinite(g)) and np.all(np.isfinite(dg))):
            raise QuadratureError("non-finite function value on a counting contour")
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.abs(g) / np.abs(dg)
        ratio = np.where(np.isnan(ratio), np.inf, ratio)
        ratio[np.abs(g) == 0] = 0.0
        if np.any(ratio == 0.0):
            k = int(np.argmin(ratio))
            return 0.0, 0.0, z[k]
        phase = np.angle(g)
        step = np.angle(np.exp(1j * np.diff(phase)))
        seg = np.abs(np.diff(z))
        local = np.minimum(ratio[:-1], ratio[1:])
        bad = (np.abs(step) > _PHASE_STEP) | (seg > 0.5 * local)
        if not np.any(bad):
            k = int(np.argmin(ratio))
            return float(step.sum()), float(ratio[k]), z[k]
        if s.size > _MAX_SAMPLES:
            k = int(np.argmin(ratio))
            return float("nan"), float(ratio[k]), z[k]
        idx = np.nonzero(bad)[0]
        s_mid = 0.5 * (s[idx] + s[idx + 1])
        z_mid = points_of(s_mid)
        g_mid, dg_mid = _values(fn, z_mid)
        s = np.insert(s, idx + 1, s_mid)
        z = np.insert(z, idx + 1, z_mid)
        g = np.insert(g, idx + 1, g_mid)
        dg = np.insert(dg, idx + 1, dg_mid)


def _polygon_winding(fn, vertices, near: float):
    """Winding number of ``g`` around a closed polygon.

    Raises :class:`BoundaryZeroError` if some sample has ``|g/g'| < near``.
    """
    total = 0.0
    for a, b in zip(vertices, vertices[1:] + vertices[:1]):
        phase, ratio, where = _path_phase(fn, lambda s, a=a, b=b: a + (b - a) * s)
        if ratio < near:
            raise BoundaryZeroError(f"zero of g close to the contour near {where:.12g}", location=where)
        if math.isnan(phase):
            raise QuadratureError("argument tracking did not resolve the contour")
        total += phase
    return _round_winding(total)


def _round_winding(total_phase: float) -> int:
    w = total_phase / (2 * math.pi)
    k = round(w)
    if abs(w - k) > 1e-6:
        raise QuadratureError(f"winding integral {w:.8g} is not an integer", estimate=w)
    return int(k)


def winding_number(g, radius: float, center: complex = 0j, variable: str = "z") -> int:
    """Number of zeros of ``g`` in ``|z - center| < radius`` (with multiplicity)."""
    fn = _as_function(g, variable)

    def circle(s):
        return center + radius * np.exp(2j * math.pi * s)

    phase, ratio, where = _path_phase(fn, circle, n0=max(256, int(8 * radius)))
    if ratio < BOUNDARY_TOLERANCE * (1 + radius):
        raise BoundaryZeroError(
            f"zero of g within tolerance of the circle |z| = {radius:.12g} near {where:.12g}", location=where
        )
    if math.isnan(phase):
        raise QuadratureError("argument tracking did not resolve the circle")
    return _round_winding(phase)


# --------------------------------------------------------------------------
# polynomial branch


def _single_linkage(points, threshold):
    clusters: list[list[complex]] = []
    for r in points:
        hits = [c for c in clusters if min(abs(r - x) for x in c) <= threshold * (1 + abs(r))]
        merged = [r]
        for c in hits:
            merged += c
            clusters.remove(c)
        clusters.append(merged)
    return clusters


def _newton_poly(target, z):
    dtarget = target.deriv()
    for _ in range(60):
        d = dtarget(z)
        if d == 0:
            break
        step = target(z) / d
        z -= step
        if abs(step) <= 1e-15 * (1 + abs(z)):
            break
    return z


def _polynomial_zeros(poly: dict, t: float):
    degree = max(e[0] for e in poly)
    coeffs = np.array([poly.get((degree - j,), 0) for j in range(degree + 1)], dtype=complex)
    roots = np.roots(coeffs) if degree > 0 else np.array([], dtype=complex)
    p = np.poly1d(coeffs)
    size = np.poly1d(np.abs(coeffs))
    out = []
    # an m-fold root comes back scattered by ~eps^(1/m); cluster coarse to fine and
    # keep a cluster only if Newton on p^(m-1) lands on a point where p vanishes
    pending = [(list(roots), 5e-2)]
    while pending:
        points, threshold = pending.pop()
        for c in _single_linkage(points, threshold):
            m = len(c)
            if m == 1:
                out.append((_newton_poly(p, complex(c[0])), 1))
                continue
            z = _newton_poly(p.deriv(m - 1), complex(np.mean(c)))
            genuine = abs(p(z)) <= 1e-10 * size(abs(z))
            if genuine and all(abs(r - z) <= threshold * (1 + abs(z)) for r in c):
                out.append((z, m))
            elif threshold < 1e-7:
                out.extend((_newton_poly(p, complex(r)), 1) for r in c)
            else:
                pending.append((c, threshold / 10))
    return out


# --------------------------------------------------------------------------
# analytic branch


def _newton(fn, z, order, steps=60):
    """Newton iteration on the ``order``-th derivative of g."""
    with np.errstate(all="ignore"):
        return _newton_steps(fn, z, order, steps)


def _newton_steps(fn, z, order, steps):
    for _ in range(steps):
        jet = fn(np.array([z]), order + 1)
        f = jet.derivative(order)[0]
        d = jet.derivative(order + 1)[0]
        if d == 0 or not np.isfinite(d):
            return None
        step = f / d
        z = z - step
        if not np.isfinite(z):
            return None
        if abs(step) <= 1e-15 * (1 + abs(z)):
            return complex(z)
    return complex(z)


_SPLIT_OFFSETS = (0.5, 0.5 + 0.0731, 0.5 - 0.0613, 0.5 + 0.1427, 0.5 - 0.1319)


def _box_zeros(fn, x0, x1, y0, y1, count, depth, out):
    if count == 0:
        return
    size = max(x1 - x0, y1 - y0)
    center = complex(0.5 * (x0 + x1), 0.5 * (y0 + y1))
    pad = 1e-12 * (1 + abs(center))
    if count == 1:
        z = _newton(fn, center, 0)
        if z is not None and x0 - pad <= z.real < x1 + pad and y0 - pad <= z.imag < y1 + pad:
            out.append((z, 1))
            return
    elif size < MULTIPLE_ZERO_BOX * (1 + abs(center)):
        z = _newton(fn, center, count - 1)
        if z is None or abs(z - center) > 2 * size:
            z = center
        out.append((z, count))
        return
    if depth > 80:
        raise QuadratureError(f"box subdivision exhausted near {center:.12g}")
    near = 1e-6 * size
    for offset in _SPLIT_OFFSETS:
        xm = x0 + offset * (x1 - x0)
        ym = y0 + offset * (y1 - y0)
        children = [(x0, xm, y0, ym), (xm, x1, y0, ym), (x0, xm, ym, y1), (xm, x1, ym, y1)]
        try:
            counts = [
                _polygon_winding(fn, [complex(a, c), complex(b, c), complex(b, d), complex(a, d)], near)
                for a, b, c, d in children
            ]
        except BoundaryZeroError:
            continue
        if sum(counts) != count:
            continue
        for box, k in zip(children, counts):
            _box_zeros(fn, *box, k, depth + 1, out)
        return
    raise QuadratureError(f"could not split box around {center:.12g} away from zeros")


def count_zeros(g, t: float, variable: str = "z") -> ZeroList:
    """All zeros of ``g`` in ``|z| < t`` with multiplicities.

    ``g`` is an :class:`Expression` in ``variable`` or a callable
    ``(z_array, order) -> Jet``.  Raises :class:`BoundaryZeroError` when a
    zero lies on the circle ``|z| = t`` (within ``1e-9 * (1 + t)``), and
    :class:`QuadratureError` when the winding number disagrees with the
    zeros found.
    """
    if t <= 0:
        raise ValueError("radius must be positive")
    poly = as_polynomial(g, (variable,)) if isinstance(g, Expression) else None
    if poly is not None:
        if not poly:
            raise ValueError("g vanishes identically")
        zeros = _polynomial_zeros(poly, t)
        for a, _ in zeros:
            if abs(abs(a) - t) <= BOUNDARY_TOLERANCE * (1 + t):
                raise BoundaryZeroError(f"zero {a:.12g} on the circle |z| = {t:.12g}", location=a)
        inside = [(a, m) for a, m in zeros if abs(a) < t]
        return ZeroList(tuple(_merge(inside)), t)

    fn = _as_function(g, variable)
    total = winding_number(fn, t)
    # slightly off-centre square so that symmetric zero sets avoid the edges
    h = t * 1.0123
    x0, x1, y0, y1 = -h - 0.0173 * t, h, -h, h + 0.0119 * t
    near = 1e-6 * t
    box_count = _polygon_winding(fn, [complex(x0, y0), complex(x1, y0), complex(x1, y1), complex(x0, y1)], near)
    found: list = []
    _box_zeros(fn, x0, x1, y0, y1, box_count, 0, found)
    inside = [(a, m) for a, m in _merge(found) if abs(a) < t]
    if sum(m for _, m in inside) != total:
        raise QuadratureError(
            f"found {sum(m for _, m in inside)} zeros but the winding number is {total}", estimate=total
        )
    return ZeroList(tuple(inside), t)
