"""Instanton sum over pairs of Young diagrams and the torus block built from it."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import product
from typing import Iterator, Tuple

import numpy as np

from .qseries import QSeries, eta_norm_series, mul, pow_real
from .specfn import BlockParams

DEGENERACY_THRESHOLD = 1e-12


class DegenerateParameters(ZeroDivisionError):
    """A factor E(Q - E) vanishes for the requested parameters."""


@dataclass(frozen=True)
class YoungDiagram:
    parts: Tuple[int, ...] = ()

    def __post_init__(self):
        parts = tuple(int(p) for p in self.parts if p != 0)
        if any(p < 0 for p in parts) or any(a < b for a, b in zip(parts, parts[1:])):
            raise ValueError(f"parts must be weakly decreasing positive integers: {self.parts}")
        object.__setattr__(self, "parts", parts)

    @property
    def size(self) -> int:
        return sum(self.parts)

    def row(self, i: int) -> int:
        """lambda_i (1-based), zero beyond the last row."""
        return self.parts[i - 1] if 1 <= i <= len(self.parts) else 0

    def transpose(self) -> "YoungDiagram":
        if not self.parts:
            return self
        return YoungDiagram(tuple(sum(1 for p in self.parts if p >= j) for j in range(1, self.parts[0] + 1)))

    def col(self, j: int) -> int:
        """lambda'_j: number of rows of length >= j."""
        return sum(1 for p in self.parts if p >= j)

    def cells(self) -> Iterator[Tuple[int, int]]:
        for i, p in enumerate(self.parts, start=1):
            for j in range(1, p + 1):
                yield (i, j)


@dataclass(frozen=True)
class DiagramPair:
    Y1: YoungDiagram
    Y2: YoungDiagram

    @property
    def size(self) -> int:
        return self.Y1.size + self.Y2.size

    def __getitem__(self, i: int) -> YoungDiagram:
        return (self.Y1, self.Y2)[i - 1]


@lru_cache(maxsize=None)
def partitions(n: int) -> Tuple[YoungDiagram, ...]:
    """All partitions of n, generated by descending parts."""
    def rec(rem, cap):
        if rem == 0:
            yield ()
            return
        for first in range(min(rem, cap), 0, -1):
            for rest in rec(rem - first, first):
                yield (first,) + rest
    return tuple(YoungDiagram(p) for p in rec(n, n))


@lru_cache(maxsize=None)
def diagram_pairs(k: int) -> Tuple[DiagramPair, ...]:
    out = []
    for a in range(k + 1):
        for y1, y2 in product(partitions(a), partitions(k - a)):
            out.append(DiagramPair(y1, y2))
    return tuple(out)


def pair_partition_count(k: int) -> int:
    """Coefficient of x^k in prod (1 - x^n)^{-2}, computed independently of enumeration."""
    c = np.zeros(k + 1, dtype=object)
    c[0] = 1
    for _ in range(2):
        for n in range(1, k + 1):
            for j in range(n, k + 1):
                c[j] += c[j - n]
    return int(c[k])


def arm_leg(Y: YoungDiagram, s: Tuple[int, int]) -> Tuple[int, int]:
    """(H, V) = (lambda'_j - i, lambda_i - j) for the cell s = (i, j)."""
    i, j = s
    return Y.col(j) - i, Y.row(i) - j


def e_factor(i: int, j: int, s: Tuple[int, int], pair: DiagramPair, params: BlockParams) -> complex:
    g = params.gamma
    offset = {(1, 2): 1j * params.P, (2, 1): -1j * params.P}.get((i, j), 0.0)
    H, _ = arm_leg(pair[j], s)
    _, V = arm_leg(pair[i], s)
    return offset - (g / 2) * H + (2 / g) * (V + 1)


def pair_weight(pair: DiagramPair, params: BlockParams, threshold: float = DEGENERACY_THRESHOLD) -> complex:
    """prod over (i, j) and s in Y_i of (E - m)(Q - E - m) / (E (Q - E)), with mass m = alpha/2."""
    a = params.alpha / 2
    Q = params.Q
    w = 1.0 + 0j
    for i in (1, 2):
        for s in pair[i].cells():
            for j in (1, 2):
                E = e_factor(i, j, s, pair, params)
                den = E * (Q - E)
                if abs(den) < threshold:
                    raise DegenerateParameters(
                        f"E(Q-E) vanishes for pair {pair.Y1.parts},{pair.Y2.parts} at cell {s} (i={i}, j={j})")
                w *= (E - a) * (Q - E - a) / den
    return w


# Lagrange weights extrapolating an even function of eps from eps, 2 eps, 3 eps to 0
_RICHARDSON = ((1, 1.5), (2, -0.6), (3, 0.1))
_REGULARIZE_TRIGGER = 1e-6


def _z_strict(k: int, params: BlockParams, threshold: float) -> complex:
    return complex(sum(pair_weight(pr, params, threshold) for pr in diagram_pairs(k)))


def z_coeff(k: int, params: BlockParams, regularize: bool = False) -> complex:
    """Level-k instanton coefficient, summed over all pairs of total size k.

    For rational gamma^2 single pairs can have vanishing E(Q - E) although the
    level sum is analytic in gamma.  With ``regularize`` such points are
    evaluated as the limit gamma' -> gamma from symmetric offsets
    gamma(1 +- j*1e-3), j = 1..3, combined to cancel the eps^2 and eps^4 terms.
    If the degeneracy comes from the momentum (P = 0) the same limit is taken in P,
    or along both directions at once.
    Without it a :class:`DegenerateParameters` error is raised.
    """
    if k < 0:
        raise ValueError("level must be non-negative")
    if k == 0:
        return 1.0 + 0j
    if params.alpha == 0:
        return complex(len(diagram_pairs(k)))
    if not regularize:
        return _z_strict(k, params, DEGENERACY_THRESHOLD)
    try:
        return _z_strict(k, params, _REGULARIZE_TRIGGER)
    except DegenerateParameters:
        pass
    for step in ({"gamma": 1e-3 * params.gamma}, {"P": 1e-3},
                 {"gamma": 1e-3 * params.gamma, "P": 1e-3}):
        try:
            return _symmetric_limit(k, params, step)
        except DegenerateParameters:
            continue
    raise DegenerateParameters(f"no regular neighbourhood found for level {k}")


def _symmetric_limit(k: int, params: BlockParams, step: dict) -> complex:
    """Even Richardson limit along the line params + t * step."""
    total = 0j
    for j, w in _RICHARDSON:
        plus = params.replace(**{n: getattr(params, n) + j * e for n, e in step.items()})
        minus = params.replace(**{n: getattr(params, n) - j * e for n, e in step.items()})
        total += w * (_z_strict(k, plus, DEGENERACY_THRESHOLD) + _z_strict(k, minus, DEGENERACY_THRESHOLD)) / 2
    return total


def instanton_series(params: BlockParams, K: int, regularize: bool = True) -> QSeries:
    """sum_k z_coeff(k) q^{2k} truncated at q^K."""
    c = np.zeros(K + 1, complex)
    for k in range(K // 2 + 1):
        c[2 * k] = z_coeff(k, params, regularize)
    return QSeries(c)


def block_series(params: BlockParams, K: int = 24, regularize: bool = True) -> QSeries:
    """Torus block: (prod(1 - q^{2k}))^{1 - alpha(Q - alpha/2)} times the instanton series.

    ``regularize`` is forwarded to :func:`z_coeff` (on by default, so rational
    gamma^2 such as gamma = 1 is handled by the limiting procedure).
    """
    if K < 0:
        raise ValueError("order must be non-negative")
    a = params.alpha
    pref = pow_real(eta_norm_series(K), 1 - a * (params.Q - a / 2))
    return mul(pref, instanton_series(params, K, regularize))
