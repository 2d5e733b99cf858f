"""Truncated multivariate Taylor arithmetic (forward-mode jets up to order 4).

A `Jet` carries the exact partial derivatives of a smooth scalar at a point:
``coeffs[k]`` is the value of the mixed partial with multi-index
``alphas[k]`` (the derivative itself, not divided by the factorial).
Coefficients may carry leading batch axes, so one jet can represent the
derivatives of a field at many points at once; every operation is
elementwise over the batch.
"""

from __future__ import annotations

import math
from functools import lru_cache
from typing import Sequence

import numpy as np

MAX_ORDER = 4


class JetDomainError(ArithmeticError):
    """An elementary operation left its domain (log/sqrt of a nonpositive value, division by a zero value)."""


class OrderCapabilityError(RuntimeError):
    """A computation would need derivatives beyond the supported truncation order."""


def _grade(dim: int, total: int):
    if dim == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in _grade(dim - 1, total - first):
            yield (first,) + rest


@lru_cache(maxsize=None)
def jet_table(dim: int, order: int) -> "_Table":
    """Dense multi-index table for jets in `dim` variables up to `order`."""
    if dim < 1:
        raise ValueError(f"jet dimension must be >= 1, got {dim}")
    if not 0 <= order <= MAX_ORDER:
        raise ValueError(f"jet order must be in 0..{MAX_ORDER}, got {order}")
    alphas: list[tuple[int, ...]] = []
    for total in range(order + 1):
        alphas.extend(_grade(dim, total))
    index = {a: i for i, a in enumerate(alphas)}
    size = len(alphas)
    grade_sizes = tuple(
        sum(1 for a in alphas if sum(a) <= k) for k in range(order + 1)
    )

    # Leibniz product table: out gamma collects binom(gamma, alpha) * a[alpha] * b[gamma - alpha].
    triples = []
    for ia, a in enumerate(alphas):
        for ib, b in enumerate(alphas):
            g = tuple(x + y for x, y in zip(a, b))
            if sum(g) > order:
                continue
            factor = 1.0
            for gi, ai in zip(g, a):
                factor *= math.comb(gi, ai)
            triples.append((index[g], ia, ib, factor))
    triples.sort(key=lambda t: t[0])
    out_idx = np.array([t[0] for t in triples], dtype=np.intp)
    mul_ii = np.array([t[1] for t in triples], dtype=np.intp)
    mul_jj = np.array([t[2] for t in triples], dtype=np.intp)
    mul_ff = np.array([t[3] for t in triples], dtype=np.float64)
    # every output index occurs (alpha = gamma, beta = 0), so reduceat segments cover 0..size-1
    mul_starts = np.searchsorted(out_idx, np.arange(size))

    derive_src = None
    if order >= 1:
        lower = jet_table(dim, order - 1)
        derive_src = tuple(
            np.array(
                [index[tuple(b[j] + (1 if j == ax else 0) for j in range(dim))]
                 for b in lower.alphas],
                dtype=np.intp,
            )
            for ax in range(dim)
        )
    return _Table(dim, order, tuple(alphas), index, size, grade_sizes,
                  mul_ii, mul_jj, mul_ff, mul_starts, derive_src)


class _Table:
    __slots__ = ("dim", "order", "alphas", "index", "size", "grade_sizes",
                 "mul_ii", "mul_jj", "mul_ff", "mul_starts", "derive_src")

    def __init__(self, dim, order, alphas, index, size, grade_sizes,
                 mul_ii, mul_jj, mul_ff, mul_starts, derive_src):
        self.dim = dim
        self.order = order
        self.alphas = alphas
        self.index = index
        self.size = size
        self.grade_sizes = grade_sizes
        self.mul_ii = mul_ii
        self.mul_jj = mul_jj
        self.mul_ff = mul_ff
        self.mul_starts = mul_starts
        self.derive_src = derive_src


class Jet:
    """Truncated Taylor expansion of a scalar in `dim` variables.

    coeffs has shape ``(..., table_size)``; leading axes are batch axes.
    """

    __slots__ = ("dim", "order", "coeffs")

    def __init__(self, dim: int, order: int, coeffs: np.ndarray):
        table = jet_table(dim, order)
        coeffs = np.asarray(coeffs, dtype=np.float64)
        if coeffs.shape[-1] != table.size:
            raise ValueError(
                f"coefficient vector of length {coeffs.shape[-1]} does not match "
                f"table size {table.size} for dim={dim}, order={order}"
            )
        self.dim = dim
        self.order = order
        self.coeffs = coeffs

    # -- construction -------------------------------------------------

    @staticmethod
    def constant(value, dim: int, order: int) -> "Jet":
        value = np.asarray(value, dtype=np.float64)
        table = jet_table(dim, order)
        coeffs = np.zeros(value.shape + (table.size,))
        coeffs[..., 0] = value
        return Jet(dim, order, coeffs)

    @property
    def value(self):
        return self.coeffs[..., 0]

    @property
    def batch_shape(self):
        return self.coeffs.shape[:-1]

    def partial(self, alpha: Sequence[int]):
        """Mixed partial derivative for multi-index `alpha` (exact, not /alpha!)."""
        alpha = tuple(int(a) for a in alpha)
        if len(alpha) != self.dim or any(a < 0 for a in alpha):
            raise ValueError(f"bad multi-index {alpha} for dim {self.dim}")
        if sum(alpha) > self.order:
            raise ValueError(
                f"multi-index {alpha} has degree {sum(alpha)} > jet order {self.order}"
            )
        return self.coeffs[..., jet_table(self.dim, self.order).index[alpha]]

    def truncated(self, order: int) -> "Jet":
        """Drop all coefficients of total degree > `order` (exact operation)."""
        if order == self.order:
            return self
        if not 0 <= order < self.order:
            raise ValueError(f"cannot truncate order-{self.order} jet to order {order}")
        size = jet_table(self.dim, self.order).grade_sizes[order]
        return Jet(self.dim, order, self.coeffs[..., :size])

    def derive(self, axis: int) -> "Jet":
        """Jet of the partial derivative along `axis`, one order lower."""
        if self.order < 1:
            raise ValueError("cannot derive an order-0 jet")
        if not 0 <= axis < self.dim:
            raise ValueError(f"axis {axis} out of range for dim {self.dim}")
        src = jet_table(self.dim, self.order).derive_src[axis]
        return Jet(self.dim, self.order - 1, self.coeffs[..., src])

    # -- arithmetic ----------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, Jet):
            if other.dim != self.dim or other.order != self.order:
                raise ValueError(
                    f"jet mismatch: (dim={self.dim}, order={self.order}) vs "
                    f"(dim={other.dim}, order={other.order})"
                )
            return other
        return Jet.constant(other, self.dim, self.order)

    def __add__(self, other):
        other = self._coerce(other)
        return Jet(self.dim, self.order, self.coeffs + other.coeffs)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        return Jet(self.dim, self.order, self.coeffs - other.coeffs)

    def __rsub__(self, other):
        other = self._coerce(other)
        return Jet(self.dim, self.order, other.coeffs - self.coeffs)

    def __neg__(self):
        return Jet(self.dim, self.order, -self.coeffs)

    def __mul__(self, other):
        if not isinstance(other, Jet):
            return Jet(self.dim, self.order,
                       self.coeffs * np.asarray(other, dtype=np.float64)[..., None])
        other = self._coerce(other)
        t = jet_table(self.dim, self.order)
        prod = self.coeffs[..., t.mul_ii] * other.coeffs[..., t.mul_jj] * t.mul_ff
        return Jet(self.dim, self.order, np.add.reduceat(prod, t.mul_starts, axis=-1))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, Jet):
            return self * (1.0 / np.asarray(other, dtype=np.float64))
        return self * reciprocal(self._coerce(other))

    def __rtruediv__(self, other):
        return reciprocal(self) * other

    def __pow__(self, exponent):
        return power(self, exponent)

    def __repr__(self):
        return f"Jet(dim={self.dim}, order={self.order}, value={self.value!r})"


def seed_variable(i: int, x0, dim: int, order: int) -> Jet:
    """Jet of the i-th coordinate function at x0 (value x0, unit first derivative)."""
    if not 0 <= i < dim:
        raise ValueError(f"axis {i} out of range for dim {dim}")
    if not 1 <= order <= MAX_ORDER:
        raise ValueError(f"order must be in 1..{MAX_ORDER}, got {order}")
    j = Jet.constant(x0, dim, order)
    e_i = tuple(1 if k == i else 0 for k in range(dim))
    j.coeffs[..., jet_table(dim, order).index[e_i]] = 1.0
    return j


def seed_point(p, order: int) -> tuple[Jet, ...]:
    """Coordinate jets at point(s) p of shape (..., dim); order 0 gives plain values."""
    p = np.asarray(p, dtype=np.float64)
    dim = p.shape[-1]
    if order > MAX_ORDER:
        raise OrderCapabilityError(
            f"requested jet order {order} exceeds supported maximum {MAX_ORDER}"
        )
    if order == 0:
        return tuple(Jet.constant(p[..., i], dim, 0) for i in range(dim))
    return tuple(seed_variable(i, p[..., i], dim, order) for i in range(dim))


def partial(j: Jet, alpha: Sequence[int]):
    return j.partial(alpha)


# -- elementary functions ----------------------------------------------


def _compose(a: Jet, taylor):
    """Evaluate sum_k taylor[k] * (a - a0)^k by Horner; taylor[k] ~ f^(k)(a0)/k!."""
    rem_coeffs = a.coeffs.copy()
    rem_coeffs[..., 0] = 0.0
    rem = Jet(a.dim, a.order, rem_coeffs)
    acc = Jet.constant(taylor[a.order], a.dim, a.order)
    for k in range(a.order - 1, -1, -1):
        acc = acc * rem + Jet.constant(taylor[k], a.dim, a.order)
    return acc


def exp(a: Jet) -> Jet:
    e = np.exp(a.value)
    return _compose(a, [e / math.factorial(k) for k in range(a.order + 1)])


def log(a: Jet) -> Jet:
    v = a.value
    if np.any(v <= 0.0):
        raise JetDomainError(f"log of non-positive value (min value {np.min(v)})")
    taylor = [np.log(v)]
    for k in range(1, a.order + 1):
        taylor.append((-1.0) ** (k - 1) / (k * v**k))
    return _compose(a, taylor)


def sqrt(a: Jet) -> Jet:
    v = a.value
    if np.any(v <= 0.0):
        raise JetDomainError(f"sqrt of non-positive value (min value {np.min(v)})")
    taylor = []
    c = 1.0
    for k in range(a.order + 1):
        taylor.append(c * v ** (0.5 - k))
        c *= (0.5 - k) / (k + 1)
    return _compose(a, taylor)


def reciprocal(a: Jet) -> Jet:
    v = a.value
    if np.any(v == 0.0):
        raise JetDomainError("division by zero value coefficient")
    return _compose(a, [(-1.0) ** k * v ** (-(k + 1)) for k in range(a.order + 1)])


def _cyclic(a: Jet, cycle):
    return _compose(
        a, [cycle[k % 4](a.value) / math.factorial(k) for k in range(a.order + 1)]
    )


def sin(a: Jet) -> Jet:
    return _cyclic(a, (np.sin, np.cos, lambda v: -np.sin(v), lambda v: -np.cos(v)))


def cos(a: Jet) -> Jet:
    return _cyclic(a, (np.cos, lambda v: -np.sin(v), lambda v: -np.cos(v), np.sin))


def sinh(a: Jet) -> Jet:
    return _compose(
        a,
        [(np.sinh(a.value) if k % 2 == 0 else np.cosh(a.value)) / math.factorial(k)
         for k in range(a.order + 1)],
    )


def cosh(a: Jet) -> Jet:
    return _compose(
        a,
        [(np.cosh(a.value) if k % 2 == 0 else np.sinh(a.value)) / math.factorial(k)
         for k in range(a.order + 1)],
    )


def power(a: Jet, exponent) -> Jet:
    """a ** exponent; integer exponents work for any value, real ones need value > 0."""
    if isinstance(exponent, (int, np.integer)) or (
        isinstance(exponent, float) and exponent.is_integer()
    ):
        k = int(exponent)
        if k < 0:
            return reciprocal(power(a, -k))
        acc = Jet.constant(np.ones(a.batch_shape), a.dim, a.order)
        for _ in range(k):
            acc = acc * a
        return acc
    v = a.value
    if np.any(v <= 0.0):
        raise JetDomainError(
            f"power with non-integer exponent {exponent} of non-positive value"
        )
    taylor = []
    c = 1.0
    for k in range(a.order + 1):
        taylor.append(c * v ** (exponent - k))
        c *= (exponent - k) / (k + 1)
    return _compose(a, taylor)
