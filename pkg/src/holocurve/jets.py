"""Truncated Taylor series ("jets") with vectorised coefficients.

A :class:`Jet` of order K stores Taylor coefficients ``c_0 .. c_K`` in an
array of shape ``(K + 1, *batch)``; the batch axes let one jet describe a
whole grid of base points, which is how the quadrature code evaluates
curves on thousands of nodes at once.  Arithmetic between jets of
different order truncates to the smaller order.
"""

from __future__ import annotations

from math import factorial

import numpy as np

from holocurve.errors import SingularPointError

__all__ = ["Jet", "SINGULAR_TOLERANCE"]

SINGULAR_TOLERANCE = 1e-300


class Jet:
    __slots__ = ("coeffs", "base")
    __array_priority__ = 100  # make ndarray <op> Jet defer to Jet

    def __init__(self, coeffs, base=0j):
        self.coeffs = np.asarray(coeffs, dtype=complex)
        if self.coeffs.ndim == 0:
            self.coeffs = self.coeffs.reshape(1)
        self.base = base

    # construction -------------------------------------------------------

    @classmethod
    def constant(cls, value, order: int, base=0j) -> Jet:
        value = np.asarray(value, dtype=complex)
        coeffs = np.zeros((order + 1,) + value.shape, dtype=complex)
        coeffs[0] = value
        return cls(coeffs, base)

    @classmethod
    def variable(cls, z0, order: int) -> Jet:
        """The identity function ``z`` expanded at ``z0``."""
        z0 = np.asarray(z0, dtype=complex)
        coeffs = np.zeros((order + 1,) + z0.shape, dtype=complex)
        coeffs[0] = z0
        if order >= 1:
            coeffs[1] = 1.0
        return cls(coeffs, z0)

    # accessors ----------------------------------------------------------

    @property
    def order(self) -> int:
        return self.coeffs.shape[0] - 1

    @property
    def shape(self) -> tuple[int, ...]:
        return self.coeffs.shape[1:]

    @property
    def value(self):
        return self.coeffs[0]

    def derivative(self, j: int):
        """``f^{(j)}(z0) = j! * c_j``."""
        if j > self.order:
            raise ValueError(f"jet of order {self.order} has no derivative {j}")
        return factorial(j) * self.coeffs[j]

    def derivatives(self):
        facts = np.array([factorial(j) for j in range(self.order + 1)], dtype=float)
        return self.coeffs * facts.reshape((-1,) + (1,) * len(self.shape))

    def d(self) -> Jet:
        """Jet of the derivative; the order drops by one."""
        if self.order == 0:
            raise ValueError("cannot differentiate an order-0 jet")
        k = np.arange(1, self.order + 1, dtype=float).reshape((-1,) + (1,) * len(self.shape))
        return Jet(self.coeffs[1:] * k, self.base)

    def truncate(self, order: int) -> Jet:
        if order > self.order:
            raise ValueError("cannot raise the order of a jet")
        return Jet(self.coeffs[: order + 1], self.base)

    def __getitem__(self, idx) -> Jet:
        """Index into the batch axes."""
        if not isinstance(idx, tuple):
            idx = (idx,)
        base = self.base[idx] if np.ndim(self.base) else self.base
        return Jet(self.coeffs[(slice(None),) + idx], base)

    def __repr__(self) -> str:
        if self.shape == ():
            return f"Jet({np.array2string(self.coeffs, precision=6)})"
        return f"Jet(order={self.order}, batch={self.shape})"

    # arithmetic ---------------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, Jet):
            return other
        return Jet.constant(other, self.order, self.base)

    def _pair(self, other):
        other = self._coerce(other)
        k = min(self.order, other.order)
        return self.coeffs[: k + 1], other.coeffs[: k + 1]

    def __add__(self, other) -> Jet:
        if not isinstance(other, Jet):
            other = np.asarray(other, dtype=complex)
            shape = np.broadcast_shapes(self.shape, other.shape)
            out = np.broadcast_to(self.coeffs, (self.order + 1,) + shape).copy()
            out[0] += other
            return Jet(out, self.base)
        a, b = self._pair(other)
        return Jet(a + b, self.base)

    __radd__ = __add__

    def __neg__(self) -> Jet:
        return Jet(-self.coeffs, self.base)

    def __sub__(self, other) -> Jet:
        return self + (-other)

    def __rsub__(self, other) -> Jet:
        return (-self) + other

    def __mul__(self, other) -> Jet:
        if not isinstance(other, Jet):
            return Jet(self.coeffs * np.asarray(other), self.base)
        a, b = self._pair(other)
        out = np.zeros(np.broadcast_shapes(a.shape, b.shape), dtype=complex)
        for k in range(a.shape[0]):
            acc = a[0] * b[k]
            for j in range(1, k + 1):
                acc = acc + a[j] * b[k - j]
            out[k] = acc
        return Jet(out, self.base)

    __rmul__ = __mul__

    def reciprocal(self) -> Jet:
        c = self.coeffs
        b0 = c[0]
        if np.any(np.abs(b0) < SINGULAR_TOLERANCE):
            raise SingularPointError("division by a quantity numerically equal to zero")
        out = np.zeros_like(c)
        out[0] = 1.0 / b0
        for k in range(1, c.shape[0]):
            acc = c[1] * out[k - 1]
            for j in range(2, k + 1):
                acc = acc + c[j] * out[k - j]
            out[k] = -acc / b0
        return Jet(out, self.base)

    def __truediv__(self, other) -> Jet:
        if not isinstance(other, Jet):
            other = np.asarray(other, dtype=complex)
            if np.any(np.abs(other) < SINGULAR_TOLERANCE):
                raise SingularPointError("division by a constant equal to zero")
            return Jet(self.coeffs / other, self.base)
        return self * other.reciprocal()

    def __rtruediv__(self, other) -> Jet:
        return self.reciprocal() * other

    def __pow__(self, n: int) -> Jet:
        if int(n) != n:
            raise TypeError("jets support integer powers only")
        n = int(n)
        if n < 0:
            return (self ** (-n)).reciprocal()
        result = Jet.constant(np.ones(self.shape, dtype=complex), self.order, self.base)
        square = self
        while n:
            if n & 1:
                result = result * square
            n >>= 1
            if n:
                square = square * square
        return result

    def exp(self) -> Jet:
        a = self.coeffs
        out = np.zeros_like(a)
        out[0] = np.exp(a[0])
        # k e_k = sum_{j=1}^k j a_j e_{k-j}
        for k in range(1, a.shape[0]):
            acc = a[1] * out[k - 1]
            for j in range(2, k + 1):
                acc = acc + j * a[j] * out[k - j]
            out[k] = acc / k
        return Jet(out, self.base)

    def log(self) -> Jet:
        """Principal branch."""
        a = self.coeffs
        a0 = a[0]
        if np.any(np.abs(a0) < SINGULAR_TOLERANCE):
            raise SingularPointError("logarithm of a quantity numerically equal to zero")
        out = np.zeros_like(a)
        out[0] = np.log(a0)
        # a_k = sum_{j=1}^k (j/k) l_j a_{k-j}
        for k in range(1, a.shape[0]):
            acc = np.zeros_like(a0)
            for j in range(1, k):
                acc = acc + j * out[j] * a[k - j]
            out[k] = (a[k] - acc / k) / a0
        return Jet(out, self.base)
