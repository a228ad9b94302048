"""Circle averages and disk integrals on ``C``.

Circle averages use the composite trapezoid rule on ``2^j`` uniform
angular nodes, which converges geometrically for smooth periodic
integrands; refinement doubles the node count and only evaluates the new
midpoints.  Area integrals are written in polar form and reduced to one
radial integral (see :func:`disk_integrals`).
"""

from __future__ import annotations

import math

import numpy as np

from holocurve.errors import QuadratureError

__all__ = ["circle_means", "circle_mean", "disk_integrals", "DEFAULT_CIRCLE_TOL", "DEFAULT_AREA_TOL"]

DEFAULT_CIRCLE_TOL = 1e-10
DEFAULT_AREA_TOL = 1e-9
MAX_POWER = 16

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(10)


def _initial_nodes(radius: float, n0: int) -> int:
    # at least ~2 nodes per unit of arc length keeps features of width O(1/r) in view
    want = max(n0, int(2 * radius))
    return 1 << max(int(math.ceil(math.log2(want))), 0)


def circle_means(fn, radii, tol: float = DEFAULT_CIRCLE_TOL, n0: int = 64, max_power: int = MAX_POWER):
    """Average of ``fn`` over each circle ``|z| = r`` for ``r`` in ``radii``.

    ``fn`` maps a complex array to a real (or complex) array of the same
    shape.  A row is accepted after two consecutive doublings change its
    estimate by at most ``tol * max(1, |estimate|)``.  Returns
    ``(means, nodes_used)``.
    """
    radii = np.atleast_1d(np.asarray(radii, dtype=float))
    means = np.zeros(radii.shape, dtype=complex)
    used = np.zeros(radii.shape, dtype=int)
    # rows that want different starting resolutions are processed in groups
    starts = np.array([_initial_nodes(r, n0) for r in radii])
    is_real = True
    for n_start in np.unique(starts):
        rows = np.nonzero(starts == n_start)[0]
        out, n_used, real = _circle_group(fn, radii[rows], tol, int(n_start), max_power)
        means[rows] = out
        used[rows] = n_used
        is_real = is_real and real
    return (means.real if is_real else means), used


def _circle_group(fn, radii, tol, n, max_power):
    theta = 2 * np.pi * np.arange(n) / n
    vals = np.asarray(fn(radii[:, None] * np.exp(1j * theta)[None, :]))
    real = not np.iscomplexobj(vals)
    if not np.all(np.isfinite(vals)):
        raise QuadratureError("non-finite integrand value on a quadrature node")
    sums = vals.sum(axis=1).astype(complex)
    counts = np.full(radii.shape, n)
    est = sums / n
    agreed = np.zeros(radii.shape, dtype=int)
    active = np.ones(radii.shape, dtype=bool)
    while np.any(active):
        rows = np.nonzero(active)[0]
        m = counts[rows[0]]
        if m >= (1 << max_power):
            raise QuadratureError(
                f"circle average not converged with {m} nodes at r={radii[rows[0]]:.6g}",
                estimate=est[rows].real if real else est[rows],
            )
        theta = 2 * np.pi * (np.arange(m) + 0.5) / m
        new = np.asarray(fn(radii[rows, None] * np.exp(1j * theta)[None, :]))
        if not np.all(np.isfinite(new)):
            raise QuadratureError("non-finite integrand value on a quadrature node")
        sums[rows] += new.sum(axis=1)
        counts[rows] = 2 * m
        new_est = sums[rows] / (2 * m)
        close = np.abs(new_est - est[rows]) <= tol * np.maximum(1.0, np.abs(new_est))
        agreed[rows] = np.where(close, agreed[rows] + 1, 0)
        est[rows] = new_est
        active[rows] = agreed[rows] < 2
    return est, counts, real


def circle_mean(fn, radius: float, tol: float = DEFAULT_CIRCLE_TOL):
    """Scalar convenience wrapper around :func:`circle_means`."""
    means, _ = circle_means(fn, [radius], tol)
    return means[0]


def disk_integrals(density, r_grid, tol: float = DEFAULT_AREA_TOL, circle_tol: float = DEFAULT_CIRCLE_TOL):
    """Area integral and its logarithmic primitive for a density on ``C``.

    For ``density`` (per unit Lebesgue area) returns arrays ``A`` and ``T``
    on ``r_grid`` with ``A(r) = int_{|z|<r} density dA`` and
    ``T(r) = int_1^r A(t) dt / t``.  By Fubini,
    ``T(r) = log(r) A(r) - int_1^r a(rho) log(rho) d rho`` where ``a`` is
    the circle integral of the density, so both arrays come from one
    pass of adaptive Gauss-Legendre panels in ``rho`` (``[0, 1]``) and
    ``s = log rho`` (beyond 1).  All grid radii must be ``>= 1``.
    """
    r_grid = np.asarray(r_grid, dtype=float)
    if r_grid.size == 0:
        return np.zeros(0), np.zeros(0)
    if np.any(r_grid < 1) or np.any(np.diff(r_grid) <= 0):
        raise ValueError("r_grid must be strictly increasing with entries >= 1")

    def profile(rho):
        means, _ = circle_means(density, rho, circle_tol)
        return 2 * np.pi * rho * np.real(means)

    def inner_panel(a, b):
        x = 0.5 * (b - a) * _GL_NODES + 0.5 * (a + b)
        w = 0.5 * (b - a) * _GL_WEIGHTS
        return np.array([np.dot(w, profile(x)), 0.0])

    def outer_panel(a, b):
        s = 0.5 * (b - a) * _GL_NODES + 0.5 * (a + b)
        w = 0.5 * (b - a) * _GL_WEIGHTS
        rho = np.exp(s)
        g = profile(rho) * rho
        return np.array([np.dot(w, g), np.dot(w, g * s)])

    def adaptive(panel, a, b, whole, depth, budget):
        mid = 0.5 * (a + b)
        left, right = panel(a, mid), panel(mid, b)
        if np.all(np.abs(left + right - whole) <= budget) or depth >= 40:
            if depth >= 40:
                raise QuadratureError("radial panel refinement exhausted", estimate=left + right)
            return left + right
        return adaptive(panel, a, mid, left, depth + 1, budget / 2) + adaptive(
            panel, mid, b, right, depth + 1, budget / 2
        )

    def integrate(panel, a, b, width):
        if b <= a:
            return np.zeros(2)
        pieces = max(1, int(math.ceil((b - a) / width)))
        edges = np.linspace(a, b, pieces + 1)
        total = np.zeros(2)
        for lo, hi in zip(edges[:-1], edges[1:]):
            total += adaptive(panel, lo, hi, panel(lo, hi), 0, tol)
        return total

    inside = integrate(inner_panel, 0.0, 1.0, 0.5)[0]
    A = np.empty_like(r_grid)
    B = np.empty_like(r_grid)
    acc = np.zeros(2)
    prev = 0.0
    for i, r in enumerate(r_grid):
        s = math.log(r)
        acc = acc + integrate(outer_panel, prev, s, 0.5 * math.log(2))
        prev = s
        A[i] = inside + acc[0]
        B[i] = acc[1]
    T = np.log(r_grid) * A - B
    return A, T
