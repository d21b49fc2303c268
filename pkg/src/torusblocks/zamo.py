"""Zamolodchikov-type recursion in the momentum for the torus block."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .qseries import QSeries, eta_norm_series, pow_real
from .specfn import BlockParams

RESONANCE_THRESHOLD = 1e-10


class ResonantMomentum(ZeroDivisionError):
    """The requested momentum sits on a pole P^2 = P_{m,n}^2."""


class InternalResonance(ResonantMomentum):
    """A shifted momentum P_{-m,n} met a pole deeper in the recursion (rational gamma^2)."""


@dataclass(frozen=True)
class ResidueIndex:
    m: int
    n: int

    def __post_init__(self):
        if self.m < 1 or self.n < 1:
            raise ValueError("residue indices must be positive")


def p_mn(m: int, n: int, gamma: float) -> complex:
    """P_{m,n} = 2 i n / gamma + i gamma m / 2; negative m gives P_{-|m|,n}."""
    return 2j * n / gamma + 1j * gamma * m / 2


def _s_mn(m: int, n: int):
    return [(j, l) for j in range(1 - m, m + 1) for l in range(1 - n, n + 1)
            if (j, l) not in ((0, 0), (m, n))]


def r_mn(m: int, n: int, params: BlockParams) -> complex:
    g = params.gamma
    a = params.alpha
    Q = params.Q
    num = 1.0 + 0j
    for j in range(-m, m):
        for l in range(-n, n):
            num *= Q - a / 2 + j * g / 2 + 2 * l / g
    den = 1.0 + 0j
    for j, l in _s_mn(m, n):
        f = j * g / 2 + 2 * l / g
        if abs(f) < 1e-14:
            raise ZeroDivisionError(f"S_(m,n) factor vanishes at (j,l) = ({j},{l})")
        den *= f
    return 2 * num / den


class RecursionContext:
    """Memoized evaluation of the recursion for fixed (gamma, alpha)."""

    def __init__(self, params: BlockParams, K: int, threshold: float = RESONANCE_THRESHOLD):
        self.params = params
        self.threshold = threshold
        self.K = K
        self.seed = pow_real(eta_norm_series(K), -1).coeffs
        self._memo = {}
        self._r = {}
        self.used = []

    def _R(self, m, n):
        if (m, n) not in self._r:
            self._r[(m, n)] = r_mn(m, n, self.params)
        return self._r[(m, n)]

    def coeffs(self, P: complex, order: int, depth: int = 0) -> np.ndarray:
        key = (round(P.real, 12), round(P.imag, 12), order)
        if key in self._memo:
            return self._memo[key]
        g = self.params.gamma
        out = self.seed[: order + 1].copy()
        for m in range(1, order // 2 + 1):
            for n in range(1, order // (2 * m) + 1):
                shift = 2 * m * n
                gap = P * P - p_mn(m, n, g) ** 2
                if abs(gap) < self.threshold:
                    cls = InternalResonance if depth else ResonantMomentum
                    raise cls(f"P^2 = P_(m,n)^2 for (m,n) = ({m},{n}) at P = {P}")
                inner = self.coeffs(p_mn(-m, n, g), order - shift, depth + 1)
                out[shift:] += self._R(m, n) / gap * inner
        self._memo[key] = out
        return out


_RICHARDSON = ((1, 1.5), (2, -0.6), (3, 0.1))
_REGULARIZE_TRIGGER = 1e-6


def recursion_series(params: BlockParams, K: int = 24, regularize: bool = True) -> QSeries:
    """Formal q-series solution of the momentum recursion to order K.

    A resonance at the requested P is an error.  For rational gamma^2 a
    shifted momentum P_{-m,n} can itself hit a pole although the block is
    analytic in gamma; with ``regularize`` that case is evaluated as the limit
    from gamma(1 +- j*1e-3), j = 1..3 (even Richardson extrapolation).
    """
    if K < 0:
        raise ValueError("order must be non-negative")
    if not regularize:
        return QSeries(RecursionContext(params, K).coeffs(complex(params.P), K))
    try:
        return QSeries(RecursionContext(params, K, _REGULARIZE_TRIGGER).coeffs(complex(params.P), K))
    except InternalResonance:
        pass
    except ResonantMomentum:
        # top-level closeness: use the strict threshold before giving up
        return QSeries(RecursionContext(params, K).coeffs(complex(params.P), K))
    g = params.gamma
    eps = 1e-3 * g
    total = np.zeros(K + 1, complex)
    for j, w in _RICHARDSON:
        plus = RecursionContext(params.replace(gamma=g + j * eps), K).coeffs(complex(params.P), K)
        minus = RecursionContext(params.replace(gamma=g - j * eps), K).coeffs(complex(params.P), K)
        total += w * (plus + minus) / 2
    return QSeries(total)


def resonance_margin(params: BlockParams, K: int) -> float:
    """min |P^2 - P_{m,n}^2| over the (m, n) entering at order K (inf if none)."""
    g = params.gamma
    P = complex(params.P)
    gaps = [abs(P * P - p_mn(m, n, g) ** 2)
            for m in range(1, K // 2 + 1) for n in range(1, K // (2 * m) + 1)]
    return min(gaps) if gaps else float("inf")


def resubstitution_residual(params: BlockParams, K: int) -> float:
    """Plug the computed series back into the recursion, coefficient by coefficient."""
    ctx = RecursionContext(params, K)
    g = params.gamma
    P = complex(params.P)
    F = ctx.coeffs(P, K)
    rhs = ctx.seed.copy()
    for m in range(1, K // 2 + 1):
        for n in range(1, K // (2 * m) + 1):
            s = 2 * m * n
            shifted = RecursionContext(params, K - s).coeffs(p_mn(-m, n, g), K - s)
            rhs[s:] += r_mn(m, n, params) / (P * P - p_mn(m, n, g) ** 2) * shifted
    return float(np.max(np.abs(F - rhs)))
