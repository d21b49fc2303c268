"""Truncated power series in the nome q with complex coefficients."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

DEFAULT_ORDER = 24


class SeriesError(ValueError):
    """Raised for invalid series operations (bad leading coefficient, etc.)."""


@dataclass(frozen=True, eq=False)
class QSeries:
    """Coefficients c_0..c_K of sum_n c_n q^n, truncated above q^K."""

    coeffs: np.ndarray

    def __post_init__(self):
        arr = np.array(self.coeffs, dtype=complex).reshape(-1)
        if arr.size == 0:
            raise SeriesError("a series needs at least the constant coefficient")
        arr.setflags(write=False)
        object.__setattr__(self, "coeffs", arr)

    @property
    def order(self) -> int:
        return self.coeffs.size - 1

    @property
    def unit_leading(self) -> bool:
        return self.coeffs[0] == 1

    def __len__(self):
        return self.coeffs.size

    def __getitem__(self, n):
        return self.coeffs[n]

    def __repr__(self):
        return f"QSeries(order={self.order}, coeffs={self.coeffs!r})"

    def truncate(self, K: int) -> "QSeries":
        if K < 0:
            raise SeriesError("truncation order must be non-negative")
        if K <= self.order:
            return QSeries(self.coeffs[: K + 1])
        return QSeries(np.concatenate([self.coeffs, np.zeros(K - self.order, complex)]))

    def __add__(self, other):
        if not isinstance(other, QSeries):
            c = self.coeffs.copy()
            c[0] += other
            return QSeries(c)
        K = min(self.order, other.order)
        return QSeries(self.coeffs[: K + 1] + other.coeffs[: K + 1])

    __radd__ = __add__

    def __neg__(self):
        return QSeries(-self.coeffs)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, QSeries):
            return mul(self, other)
        return QSeries(self.coeffs * other)

    __rmul__ = __mul__

    def __call__(self, q):
        """Evaluate the truncated polynomial at q (Horner)."""
        q = np.asarray(q, dtype=complex)
        acc = np.zeros_like(q)
        for c in self.coeffs[::-1]:
            acc = acc * q + c
        return acc if acc.ndim else complex(acc)

    def allclose(self, other: "QSeries", tol: float = 1e-12) -> bool:
        K = min(self.order, other.order)
        a, b = self.coeffs[: K + 1], other.coeffs[: K + 1]
        scale = max(1.0, float(np.max(np.abs(a))), float(np.max(np.abs(b))))
        return bool(np.all(np.abs(a - b) <= tol * scale))

    def to_json(self) -> str:
        return json.dumps(self.to_pairs())

    def to_pairs(self) -> list:
        return [[float(c.real), float(c.imag)] for c in self.coeffs]

    @classmethod
    def from_json(cls, text: str) -> "QSeries":
        return cls(np.array([complex(re, im) for re, im in json.loads(text)]))


def series(coeffs: Iterable, K: int | None = None) -> QSeries:
    s = QSeries(np.asarray(list(coeffs), dtype=complex))
    return s if K is None else s.truncate(K)


def one(K: int = DEFAULT_ORDER) -> QSeries:
    c = np.zeros(K + 1, complex)
    c[0] = 1
    return QSeries(c)


def monomial(n: int, K: int = DEFAULT_ORDER, coeff: complex = 1.0) -> QSeries:
    c = np.zeros(K + 1, complex)
    if n <= K:
        c[n] = coeff
    return QSeries(c)


def mul(a: QSeries, b: QSeries) -> QSeries:
    K = min(a.order, b.order)
    return QSeries(np.convolve(a.coeffs[: K + 1], b.coeffs[: K + 1])[: K + 1])


def invert(a: QSeries) -> QSeries:
    c = a.coeffs
    if c[0] == 0:
        raise SeriesError("cannot invert a series with zero constant term")
    out = np.zeros_like(c)
    out[0] = 1 / c[0]
    for n in range(1, c.size):
        out[n] = -np.dot(c[1 : n + 1], out[n - 1 :: -1][:n]) / c[0]
    return QSeries(out)


def _require_unit(a: QSeries, what: str):
    if not a.unit_leading:
        raise SeriesError(f"{what} needs a unit-leading series, got c_0 = {a.coeffs[0]}")


def log_series(a: QSeries) -> QSeries:
    """log a for unit-leading a, via n b_n = n a_n - sum_{k<n} k b_k a_{n-k}."""
    _require_unit(a, "log")
    c = a.coeffs
    b = np.zeros_like(c)
    for n in range(1, c.size):
        k = np.arange(1, n)
        b[n] = c[n] - np.dot(k * b[1:n], c[n - 1 : 0 : -1]) / n
    return QSeries(b)


def exp_series(b: QSeries) -> QSeries:
    """exp b for b with zero constant term, via n e_n = sum_k k b_k e_{n-k}."""
    if b.coeffs[0] != 0:
        raise SeriesError("exp needs a series with zero constant term")
    c = b.coeffs
    e = np.zeros_like(c)
    e[0] = 1
    for n in range(1, c.size):
        k = np.arange(1, n + 1)
        e[n] = np.dot(k * c[1 : n + 1], e[n - 1 :: -1][:n]) / n
    return QSeries(e)


def _pow_int(a: QSeries, n: int) -> QSeries:
    base = a if n > 0 else invert(a)
    n = abs(n)
    out = one(a.order)
    while n:
        if n & 1:
            out = mul(out, base)
        n >>= 1
        if n:
            base = mul(base, base)
    return out


def pow_real(a: QSeries, beta: float) -> QSeries:
    """a**beta for unit-leading a; small integer powers use exact products."""
    _require_unit(a, "pow_real")
    if beta == 0:
        return one(a.order)
    if float(beta).is_integer() and abs(beta) <= 64:
        return _pow_int(a, int(beta))
    out = exp_series(log_series(a) * beta).coeffs.copy()
    out[0] = 1
    return QSeries(out)


def eta_norm_series(K: int = DEFAULT_ORDER) -> QSeries:
    """prod_{k>=1} (1 - q^{2k}) truncated at q^K, i.e. q^{-1/12} eta(q)."""
    if K < 0:
        raise SeriesError("order must be non-negative")
    c = np.zeros(K + 1)
    c[0] = 1.0
    for k in range(1, K // 2 + 1):
        step = 2 * k
        c[step:] = c[step:] - c[:-step].copy()
    return QSeries(c.astype(complex))


def eta_norm_power(beta: float, K: int = DEFAULT_ORDER) -> QSeries:
    return pow_real(eta_norm_series(K), beta)


def from_pairs(pairs: Sequence[Sequence[float]]) -> QSeries:
    return QSeries(np.array([complex(r, i) for r, i in pairs]))
