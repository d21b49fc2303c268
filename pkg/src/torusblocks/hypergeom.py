"""Gauss hypergeometric series and the inhomogeneous hypergeometric equation.

The equation is

    w(1-w) f'' + (C - (1+A+B) w) f' - A B f = g(w).

Series in w are represented with :class:`~torusblocks.qseries.QSeries`
(the type is a generic truncated power series; the variable name is
irrelevant to the arithmetic).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .qseries import QSeries, mul
from .specfn import BlockParams, PoleError, gamma_complex, rgamma

DEFAULT_W_ORDER = 200
MAX_W_ORDER = 2000
TERM_CAP = 100_000


class ConvergenceError(RuntimeError):
    pass


@dataclass(frozen=True)
class HGFParams:
    A: complex
    B: complex
    C: complex

    def __post_init__(self):
        for name in ("A", "B", "C"):
            object.__setattr__(self, name, complex(getattr(self, name)))

    @property
    def excess(self) -> complex:
        """C - A - B."""
        return self.C - self.A - self.B

    def second(self) -> "HGFParams":
        """Parameters (1+A-C, 1+B-C, 2-C) of the companion solution v2."""
        return HGFParams(1 + self.A - self.C, 1 + self.B - self.C, 2 - self.C)


def _check_c(C: complex):
    if C.imag == 0 and C.real <= 0 and C.real == round(C.real):
        raise PoleError(f"2F1 undefined for C = {C.real:g}")


def hyp2f1_coeffs(p: HGFParams, n: int) -> np.ndarray:
    """First n+1 Taylor coefficients of 2F1(A, B, C; w)."""
    _check_c(p.C)
    k = np.arange(n)
    ratios = (k + p.A) * (k + p.B) / ((k + 1) * (k + p.C))
    return np.concatenate([[1.0 + 0j], np.cumprod(ratios)])


def _partial_sum_at_one(p: HGFParams, N: int) -> complex:
    return complex(np.sum(hyp2f1_coeffs(p, N)))


def _sum_at_one(coeffs: np.ndarray, s: complex, Ns) -> complex:
    """Richardson-accelerated sum of coefficients whose partial sums go like S + sum_j d_j N^{s - j}."""
    partial = np.cumsum(coeffs)
    table = [complex(partial[N]) for N in Ns]
    for j in range(len(Ns) - 1):
        factor = 2.0 ** (s - j)
        table = [(table[i + 1] - factor * table[i]) / (1 - factor) for i in range(len(table) - 1)]
    return table[0]


def _hyp2f1_at_one(p: HGFParams, levels: int = 8, n0: int = 256) -> complex:
    """Sum the series at w = 1 with Richardson elimination of the algebraic tail.

    The partial sums behave like S + sum_j d_j N^{(A+B-C) - j}; doubling N and
    eliminating those powers one by one converges quickly.
    """
    s = -p.excess
    if s.real >= 0:
        raise ConvergenceError("series diverges at w = 1 unless Re(C - A - B) > 0")
    Ns = [n0 * 2 ** k for k in range(levels)]
    return _sum_at_one(hyp2f1_coeffs(p, Ns[-1]), s, Ns)


def hyp2f1(p: HGFParams, w) -> complex:
    """2F1(A, B, C; w) for |w| <= 1 by the term-ratio recurrence."""
    _check_c(p.C)
    w = complex(w)
    if abs(w) > 1 + 1e-15:
        raise ValueError("hyp2f1 is evaluated only on the closed unit disk")
    if w == 1:
        return _hyp2f1_at_one(p)
    total = 1 + 0j
    term = 1 + 0j
    A, B, C = p.A, p.B, p.C
    for n in range(TERM_CAP):
        term *= (n + A) * (n + B) / ((n + 1) * (n + C)) * w
        total += term
        if term == 0 or abs(term) < 1e-15 * abs(total):
            # guard against an accidental small term early in a slowly decaying tail
            if abs(w) < 1 - 1e-12 or n > 50:
                return total
    raise ConvergenceError(f"2F1 did not converge within {TERM_CAP} terms at w = {w}")


def hgf_level(params: BlockParams, chi: float, n: int) -> HGFParams:
    """Level-n parameters A, B, C with A + B = -l_chi and C = 1/2 - l_chi."""
    if n < 0:
        raise ValueError("level must be non-negative")
    l = params.l_chi(chi)
    root = cmath.sqrt(params.P ** 2 + 2 * n)
    return HGFParams(-l / 2 + 0.5j * chi * root, -l / 2 - 0.5j * chi * root, 0.5 - l)


def connection_coeffs(p: HGFParams) -> tuple:
    """(Gamma_1, Gamma_2) with 2F1(A,B,1+A+B-C;1-w) = Gamma_1 v1(w) + Gamma_2 w^{1-C} v2(w)."""
    A, B, C = p.A, p.B, p.C
    _check_c(C)
    g_excess = gamma_complex(C - A - B)
    g1 = gamma_complex(C) * g_excess * rgamma(C - A) * rgamma(C - B)
    g2 = gamma_complex(2 - C) * g_excess * rgamma(1 - A) * rgamma(1 - B)
    return g1, g2


def connection_matrix(p: HGFParams) -> np.ndarray:
    """Rows express v1 and w^{1-C} v2 in the basis at w = 1.

    v1(w)         = M[0,0] F(A,B;1+A+B-C;1-w) + M[0,1] (1-w)^{C-A-B} F(C-A,C-B;1+C-A-B;1-w)
    w^{1-C} v2(w) = M[1,0] F(A,B;1+A+B-C;1-w) + M[1,1] (1-w)^{C-A-B} F(C-A,C-B;1+C-A-B;1-w)

    The first column is (Gamma_1, Gamma_2) of :func:`connection_coeffs`.
    """
    A, B, C = p.A, p.B, p.C
    g1, g2 = connection_coeffs(p)
    g_def = gamma_complex(A + B - C)
    h1 = gamma_complex(C) * g_def * rgamma(A) * rgamma(B)
    h2 = gamma_complex(2 - C) * g_def * rgamma(1 + A - C) * rgamma(1 + B - C)
    return np.array([[g1, h1], [g2, h2]])


def connection_residual(p: HGFParams, w) -> float:
    """Largest residual of the two connection relations at a point 0 < |w|, |1-w| < 1."""
    A, B, C = p.A, p.B, p.C
    w = complex(w)
    w3 = hyp2f1(HGFParams(A, B, 1 + A + B - C), 1 - w)
    w4 = cmath.exp((C - A - B) * cmath.log(1 - w)) * hyp2f1(HGFParams(C - A, C - B, 1 + C - A - B), 1 - w)
    v1 = hyp2f1(p, w)
    v2 = cmath.exp((1 - C) * cmath.log(w)) * hyp2f1(p.second(), w)
    M = connection_matrix(p)
    return max(abs(v1 - M[0, 0] * w3 - M[0, 1] * w4), abs(v2 - M[1, 0] * w3 - M[1, 1] * w4))


def gauss_value(p: HGFParams) -> complex:
    """Closed form Gamma(C) Gamma(C-A-B) / (Gamma(C-A) Gamma(C-B))."""
    return connection_coeffs(p)[0]


# ---------------------------------------------------------------------------
# series-space solution of the inhomogeneous equation

def binomial_series(expo: complex, M: int) -> QSeries:
    """(1 - t)^expo to order M."""
    k = np.arange(M)
    c = np.concatenate([[1.0 + 0j], np.cumprod((k - expo) / (k + 1))])
    return QSeries(c)


def series_integrate(a: QSeries, beta: complex) -> tuple:
    """int_0^w t^{-beta} f(t) dt = w^{1-beta} sum a_n w^n / (n - beta + 1).

    Returns (exponent 1 - beta, QSeries of the bracketed sum).
    """
    n = np.arange(a.order + 1)
    denom = n - beta + 1
    if np.any(np.abs(denom) == 0):
        raise ValueError("series integration hits n - beta + 1 = 0")
    return 1 - beta, QSeries(a.coeffs / denom)


def _check_abc(p: HGFParams):
    if p.C.imag == 0 and p.C.real == round(p.C.real):
        raise ValueError("C must not be an integer")
    if not 0 < p.excess.real < 1:
        raise ValueError("need Re(C - A - B) in (0, 1)")


def _particular(g: QSeries, p: HGFParams, X: str, M: int) -> QSeries:
    g = g.truncate(M)
    v1 = QSeries(hyp2f1_coeffs(p, M))
    v2 = QSeries(hyp2f1_coeffs(p.second(), M))
    damp = binomial_series(-p.excess, M)  # (1 - t)^{A + B - C}
    a = mul(mul(v2, g), damp)
    b = mul(mul(v1, g), damp)
    C = p.C
    n = np.arange(M + 1)
    if X == "0":
        ia = a.coeffs / (n + 1)
        ib = b.coeffs / (n + C)
    else:
        ia = a.coeffs / (n + 2 - C)
        ib = b.coeffs / (n + 1)
    inner = (-mul(v1, QSeries(ia)) + mul(v2, QSeries(ib))) * (1 / (1 - C))
    # multiply by w
    return QSeries(np.concatenate([[0j], inner.coeffs[:-1]]))


def particular_solution(g: QSeries, p: HGFParams, X: str = "0", order: int | None = None,
                        tol: float = 1e-12, radius: float = 0.9) -> QSeries:
    """Series f with w^X f solving the equation with right-hand side w^X g.

    ``X`` is ``"0"`` or ``"1-C"``.  The truncation order starts at ``order``
    (default 200) and doubles until the coefficient tail, weighted by
    ``radius**n``, falls below ``tol`` (cap 2000).
    """
    if X not in ("0", "1-C"):
        raise ValueError("X must be '0' or '1-C'")
    _check_abc(p)
    M = DEFAULT_W_ORDER if order is None else order
    while True:
        f = _particular(g, p, X, M)
        tail = np.max(np.abs(f.coeffs[M // 2:]) * radius ** np.arange(M // 2, M + 1))
        if order is not None or tail < tol or 2 * M > MAX_W_ORDER:
            return f
        M *= 2


def solution_with_value(g: QSeries, p: HGFParams, a: complex, X: str = "0", order: int | None = None) -> QSeries:
    """The unique regular solution f_a with f_a(1) = a (X = "0" case)."""
    if X != "0":
        raise NotImplementedError("only the X = 0 normalization is provided")
    f = particular_solution(g, p, X, order)
    v1 = QSeries(hyp2f1_coeffs(p, f.order))
    # the particular part has the same (1 - w)^{C-A-B} tail as 2F1 itself
    Ns = [128 * 2 ** k for k in range(6)]
    f1 = _sum_at_one(_particular(g, p, X, Ns[-1]).coeffs, -p.excess, Ns)
    return f + v1 * ((a - f1) / hyp2f1(p, 1))


def apply_operator(f: QSeries, p: HGFParams, w, X: complex = 0.0) -> complex:
    """Evaluate the hypergeometric operator on w^X f(w) at a point, termwise."""
    w = complex(w)
    e = np.arange(f.order + 1) + X
    c = f.coeffs
    wp = np.exp(e * cmath.log(w)) if w != 0 else (e == 0).astype(complex)
    val = np.sum(c * wp)
    d1 = np.sum(c * e * wp) / w
    d2 = np.sum(c * e * (e - 1) * wp) / w ** 2
    return complex(w * (1 - w) * d2 + (p.C - (1 + p.A + p.B) * w) * d1 - p.A * p.B * val)
