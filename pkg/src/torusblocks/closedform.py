"""Closed forms for the q^0 coefficient A_0 and the constants of its shift equation."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .hypergeom import connection_coeffs, hgf_level
from .qseries import QSeries, eta_norm_series, pow_real
from .specfn import BlockParams, PoleError, gamma_complex, log_double_gamma, loggamma, rgamma
from .zamo import p_mn, r_mn


def two_pi_phase_pow(x) -> complex:
    """(2 pi e^{i pi})**x taken as (2 pi)**x * e^{i pi x}."""
    return cmath.exp(x * (math.log(2 * math.pi) + 1j * math.pi))


def _log_gamma_one_minus(gamma: float) -> float:
    return math.log(gamma_complex(1 - gamma ** 2 / 4).real)


def log_a0_closed(params: BlockParams) -> complex:
    g = params.gamma
    a = complex(params.alpha)
    P = complex(params.P)
    Q = params.Q
    ldg = lambda z: log_double_gamma(z, g)
    val = 1j * math.pi * a * a / 2 + (g * a / 4) * math.log(g / 2) - math.pi * a * P / 2
    val += (a / g) * _log_gamma_one_minus(g)
    val += ldg(Q - a / 2) + ldg(2 / g + a / 2) + ldg(Q - a / 2 - 1j * P) + ldg(Q - a / 2 + 1j * P)
    val -= ldg(2 / g) + ldg(Q - 1j * P) + ldg(Q + 1j * P) + ldg(Q - a)
    return val


def a0_closed(params: BlockParams) -> complex:
    """A_0 (the q^0 coefficient of A^q) from the product of double gamma values."""
    if params.alpha == 0:
        return 1.0 + 0j
    return cmath.exp(log_a0_closed(params))


def a0_integer_N(N: int, gamma: float, P) -> complex:
    """A_0 at alpha = -N gamma as a finite product of Euler gamma values.

    The P-dependent gammas sit in the denominator and are applied as 1/Gamma,
    so the zeros at P = +-P_{m,n} (1 <= m <= N) come out exactly.
    """
    if N < 1:
        raise ValueError("N must be a positive integer")
    P = complex(P)
    g2 = gamma ** 2 / 4
    val = 1j * math.pi * gamma ** 2 * N * N / 2 + math.pi * gamma * P * N / 2
    val -= N * _log_gamma_one_minus(gamma)
    for j in range(1, N + 1):
        val += loggamma(1 - j * g2) + loggamma(1 + (2 * N - j + 1) * g2)
    out = cmath.exp(val)
    for j in range(1, N + 1):
        out *= rgamma(1 + j * g2 + 0.5j * gamma * P) * rgamma(1 + j * g2 - 0.5j * gamma * P)
    return out


def inv_a0_integer_N(N: int, gamma: float, P) -> complex:
    """1/A_0 at alpha = -N gamma; it has poles at P = P_{m,n}, 1 <= m <= N."""
    P = complex(P)
    g2 = gamma ** 2 / 4
    val = -1j * math.pi * gamma ** 2 * N * N / 2 - math.pi * gamma * P * N / 2
    val += N * _log_gamma_one_minus(gamma)
    for j in range(1, N + 1):
        val -= loggamma(1 - j * g2) + loggamma(1 + (2 * N - j + 1) * g2)
        val += loggamma(1 + j * g2 + 0.5j * gamma * P) + loggamma(1 + j * g2 - 0.5j * gamma * P)
    return cmath.exp(val)


def numeric_residue_inv_a0(N: int, gamma: float, m: int, n: int, h: float = 1e-4) -> complex:
    """Residue of 1/A_0 at P_{m,n} from a small circle (trapezoid, 16 nodes)."""
    Pmn = p_mn(m, n, gamma)
    nodes = 16
    total = 0j
    for k in range(nodes):
        z = h * cmath.exp(2j * math.pi * k / nodes)
        total += inv_a0_integer_N(N, gamma, Pmn + z) * z
    return total / nodes


def residue_inv_a0(N: int, gamma: float, m: int, n: int) -> complex:
    """Predicted residue of 1/A_0 at P = P_{m,n} (alpha = -N gamma)."""
    alpha = -N * gamma
    params = BlockParams(gamma, 0.0, alpha)
    Pmn = p_mn(m, n, gamma)
    return (cmath.exp(1j * math.pi * alpha * gamma * m / 2) * r_mn(m, n, params)
            / (2 * Pmn * a0_integer_N(N, gamma, p_mn(-m, n, gamma))))


# ---------------------------------------------------------------------------
# shift-equation constants

def _indicator(chi: float, gamma: float) -> float:
    return 4 / gamma ** 2 if abs(chi - 2 / gamma) < 1e-14 and abs(chi - gamma / 2) > 1e-14 else 1.0


def _check_chi(chi: float, gamma: float):
    if not (abs(chi - gamma / 2) < 1e-14 or abs(chi - 2 / gamma) < 1e-14):
        raise ValueError("chi must be gamma/2 or 2/gamma")


def y0(alpha, chi: float, params: BlockParams) -> complex:
    """Y_0(alpha, chi): A_0(alpha - chi) = Y_0 A_0(alpha + chi)."""
    g = params.gamma
    _check_chi(chi, g)
    p = params.replace(alpha=alpha)
    l = p.l_chi(chi)
    P = complex(p.P)
    val = 4j * math.pi * l - 2j * math.pi * chi ** 2 + math.pi * chi * P
    val -= (2 * chi / g) * _log_gamma_one_minus(g)
    val += loggamma(2 * chi / g - l) + loggamma(1 + 2 * l - chi ** 2) + loggamma(1 + 2 * l)
    val -= loggamma(1 + l) + loggamma(1 + l - 1j * chi * P) + loggamma(1 + l + 1j * chi * P)
    return cmath.exp(val) * _indicator(chi, g)


def w_minus(params: BlockParams, chi: float) -> complex:
    g = params.gamma
    _check_chi(chi, g)
    l = params.l_chi(chi)
    return cmath.exp(l * math.log(math.pi)) * two_pi_phase_pow(
        -(2 + 2 * g * l / chi + 4 * l / (chi * g) + 6 * l * l / chi ** 2) / 3)


def w_plus(params: BlockParams, chi: float) -> complex:
    g = params.gamma
    _check_chi(chi, g)
    a = complex(params.alpha)
    Q = params.Q
    P = complex(params.P)
    l = params.l_chi(chi)
    if abs(Q - a) < 1e-14:
        raise PoleError("W^+ has a pole at alpha = Q")
    wp = -cmath.exp(2j * math.pi * l - 2j * math.pi * chi ** 2)
    wp *= two_pi_phase_pow(-(g * l / chi + 2 * l / chi ** 2 - 8 * l + 6 * l * l / chi ** 2) / 3)
    wp *= cmath.exp((-l - 1) * math.log(math.pi))
    wp *= (1 - cmath.exp(2 * math.pi * chi * P - 2j * math.pi * l)) / (chi * (Q - a))
    wp *= _indicator(chi, g)
    wp *= cmath.exp(loggamma(a * chi / 2 - chi ** 2 / 2 + 2 * chi / g) + loggamma(1 - a * chi)
                    + loggamma(a * chi - chi ** 2) - loggamma(a * chi / 2 - chi ** 2 / 2)
                    - (2 * chi / g) * _log_gamma_one_minus(g))
    return wp


def w_pm(params: BlockParams, chi: float) -> tuple:
    """(W^-, W^+) for the given chi."""
    return w_minus(params, chi), w_plus(params, chi)


def eta_powers(params: BlockParams, chi: float) -> tuple:
    l = params.l_chi(chi)
    base = (4 / 3) * l * (l + 1) / chi ** 2
    return base + (2 / 3) * l + 2 / 3, base - (2 / 3) * l


@dataclass(frozen=True)
class EtaSeries:
    """Theta'(0)**power = q^{power/4} * sum_n coeffs_n q^n."""

    power: complex
    coeffs: QSeries

    @property
    def leading(self) -> complex:
        return self.coeffs[0]

    def normalized(self) -> QSeries:
        return self.coeffs * (1 / self.leading)


def eta_pm_series(params: BlockParams, chi: float, K: int = 24) -> tuple:
    """(eta^-, eta^+) expansions of powers of Theta'(0) = -2 pi eta(q)^3."""
    out = []
    for power in eta_powers(params, chi):
        series = pow_real(eta_norm_series(K), 3 * power) * two_pi_phase_pow(power)
        out.append(EtaSeries(power, series))
    return tuple(out)


@dataclass(frozen=True)
class ShiftConstants:
    chi: float
    l_chi: complex
    w_minus: complex
    w_plus: complex
    gamma01: complex
    gamma02: complex
    eta_minus: EtaSeries
    eta_plus: EtaSeries


def shift_constants(params: BlockParams, chi: float, K: int = 24) -> ShiftConstants:
    wm, wp = w_pm(params, chi)
    g1, g2 = connection_coeffs(hgf_level(params, chi, 0))
    em, ep = eta_pm_series(params, chi, K)
    return ShiftConstants(chi, params.l_chi(chi), wm, wp, g1, g2, em, ep)


def assembled_ratio(params: BlockParams, chi: float) -> complex:
    """-(W+/W-)(Gamma_{0,2}/Gamma_{0,1})(1 + e^{pi chi P + i pi l})/(1 - e^{pi chi P - i pi l})(eta0+/eta0-)."""
    sc = shift_constants(params, chi, K=0)
    l = sc.l_chi
    P = complex(params.P)
    ratio = -(sc.w_plus / sc.w_minus) * (sc.gamma02 / sc.gamma01)
    ratio *= (1 + cmath.exp(math.pi * chi * P + 1j * math.pi * l)) / (1 - cmath.exp(math.pi * chi * P - 1j * math.pi * l))
    return ratio * sc.eta_plus.leading / sc.eta_minus.leading


def shift_residual(params: BlockParams, chi: float) -> float:
    """Relative residual of A_0(alpha - chi) - Y_0 A_0(alpha + chi)."""
    a = params.alpha
    lhs = a0_closed(params.replace(alpha=a - chi))
    rhs = y0(a, chi, params) * a0_closed(params.replace(alpha=a + chi))
    return abs(lhs - rhs) / abs(lhs)
