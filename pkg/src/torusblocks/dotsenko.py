"""Integer-charge route: the N-fold Selberg-type integral for A^q at alpha = -N gamma.

The integrand is singular where points meet each other or the endpoints.
N = 1 uses Gauss-Jacobi with the endpoint powers as weight.  N = 2 splits the
ordered simplex by its largest gap and uses polar coordinates in the two
small gaps, so every singular power becomes a Jacobi weight.
"""

from __future__ import annotations

import cmath
import math
import time
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.special import roots_jacobi

from .closedform import a0_integer_N
from .qseries import QSeries, eta_norm_series, mul, pow_real
from .report import VerifyReport
from .specfn import ModularParam, abs_theta, eta, eta_norm, theta_frac_pow
from .zamo import p_mn

MAX_CONDITION = 1e10


class QuadratureError(RuntimeError):
    """The refinement estimate exceeded the requested tolerance."""


class ExtractionError(ValueError):
    pass


@dataclass(frozen=True)
class DFConfig:
    N: int = 1
    quad_points: int = 40
    q_nodes: tuple = ()
    tol: float = 1e-9

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 1:
            raise ValueError("N must be a positive integer")
        if self.quad_points < 4:
            raise ValueError("quad_points must be at least 4")


@dataclass(frozen=True)
class DFResult:
    value: complex
    error: float
    points: int


@lru_cache(maxsize=256)
def gauss_jacobi01(n: int, a: float, b: float):
    """Nodes and weights for int_0^1 f(t) t^a (1 - t)^b dt."""
    x, w = roots_jacobi(n, b, a)
    return (1 + x) / 2, w / 2 ** (a + b + 1)


def _check_range(N: int, gamma: float):
    if N >= 4 / gamma ** 2:
        raise ValueError(f"N = {N} is not below 4/gamma^2 = {4 / gamma ** 2:.6g}; the integral diverges")
    if N >= 2 and gamma ** 2 / 2 >= 1:
        raise ValueError("pair singularity |x - y|^(-gamma^2/2) is not integrable for gamma >= sqrt(2)")


def _log_h(g, m):
    """log(|Theta(g)| / (g (1 - g))), smooth on [0, 1]."""
    return np.log(abs_theta(g, m)) - np.log(g) - np.log1p(-g)


def _integral_n1(gamma, P, m, n):
    c = gamma ** 2 / 2
    t, w = gauss_jacobi01(n, c, c)
    f = np.exp(c * _log_h(t, m) + math.pi * gamma * P * t)
    return complex(np.sum(w * f))


def _integral_n2(gamma, P, m, n):
    e_end = gamma ** 2
    e_pair = -gamma ** 2 / 2
    expo = (e_end, e_pair, e_end)
    total = 0j
    for k in range(3):
        i, j = [g for g in range(3) if g != k]
        ea, eb, ek = expo[i], expo[j], expo[k]
        beta = 1 + ea + eb + ek
        rho, wr = gauss_jacobi01(n, beta, 0.0)
        for half in (0, 1):
            if half == 0:
                sig, ws = gauss_jacobi01(n, ea, 0.0)
                s = sig / 2
                ws = ws * 2.0 ** (-ea - 1) * (1 - s) ** eb
                rmax = 1 / (2 - s)
            else:
                sig, ws = gauss_jacobi01(n, eb, 0.0)
                s = 1 - sig / 2
                ws = ws * 2.0 ** (-eb - 1) * s ** ea
                rmax = 1 / (1 + s)
            S = s[:, None]
            R = rmax[:, None] * rho[None, :]
            a = R * S
            b = R * (1 - S)
            gk = 1 - R
            gaps = [None, None, None]
            gaps[i], gaps[j], gaps[k] = a, b, gk
            logf = (ea * (np.log1p(-a) + _log_h(a, m)) + eb * (np.log1p(-b) + _log_h(b, m))
                    + ek * (np.log(gk) + _log_h(gk, m)))
            x1 = gaps[0]
            x2 = gaps[0] + gaps[1]
            f = np.exp(logf + math.pi * gamma * P * (x1 + x2))
            wts = ws[:, None] * (rmax ** (beta + 1))[:, None] * wr[None, :]
            total += complex(np.sum(wts * f))
    return 2 * total


def df_integral(N: int, gamma: float, P, m, n: int) -> complex:
    """The N-fold integral over [0,1]^N including the Theta phase."""
    P = complex(P)
    _check_range(N, gamma)
    if N == 1:
        val = _integral_n1(gamma, P, m, n)
    elif N == 2:
        val = _integral_n2(gamma, P, m, n)
    else:
        raise NotImplementedError("the singular quadrature is implemented for N = 1 and N = 2")
    c = N * gamma ** 2 / 2
    phase = theta_frac_pow(0.5, c, m) / abs_theta(0.5, m) ** c
    return val * phase ** N


def df_prefactor(N: int, gamma: float, m) -> complex:
    a = -N * gamma
    Q = gamma / 2 + 2 / gamma
    m = ModularParam.from_q(m) if not isinstance(m, ModularParam) else m
    qp = a * a / 24 - a * Q / 12 + 1 / 6
    ep = 5 * a * gamma / 4 + 2 * a / gamma - 5 * a * a / 4 - 2
    return m.qpow(qp) * cmath.exp(ep * cmath.log(eta(m)))


def df_A_q_result(cfg: DFConfig, gamma: float, P, q) -> DFResult:
    m = _real_modular(q)
    n = cfg.quad_points
    pref = df_prefactor(cfg.N, gamma, m)
    fine = pref * df_integral(cfg.N, gamma, P, m, n)
    coarse = pref * df_integral(cfg.N, gamma, P, m, max(2, n // 2))
    err = abs(fine - coarse)
    return DFResult(fine, err, n)


def df_A_q(cfg: DFConfig, gamma: float, P, q) -> complex:
    """A^q at alpha = -N gamma from the N-fold integral.

    Raises QuadratureError when halving the rule moves the value by more than
    ``cfg.tol`` relative.
    """
    res = df_A_q_result(cfg, gamma, P, q)
    if res.error > cfg.tol * max(abs(res.value), 1e-300):
        raise QuadratureError(f"quadrature not converged: estimate {res.error:.3g} at {res.points} points")
    return res.value


def _real_modular(q) -> ModularParam:
    if isinstance(q, ModularParam):
        m = q
    else:
        m = ModularParam.from_q(q)
    qv = m.q
    if not (m.is_real and 0 < qv.real < 1):
        raise ValueError("q must be real in (0, 1)")
    return m


def df_A_tilde(cfg: DFConfig, gamma: float, P, q) -> complex:
    """A^q / A_0 with A_0 from the closed gamma product."""
    return df_A_q(cfg, gamma, P, q) / a0_integer_N(cfg.N, gamma, P)


# ---------------------------------------------------------------------------
# coefficient extraction

@dataclass(frozen=True)
class Extraction:
    series: QSeries
    condition: float
    nodes: np.ndarray = field(repr=False)
    fit_residual: float = 0.0
    eta_weight: float = 0.0
    tail: float = 0.0


def chebyshev_nodes(count: int, q_max: float) -> np.ndarray:
    j = np.arange(count)
    return q_max / 2 * (1 + np.cos(math.pi * (j + 0.5) / count))


def _cheb_to_monomial(coef: np.ndarray, q_max: float, K: int) -> np.ndarray:
    out = np.zeros(K + 1, complex)
    for part, unit in ((coef.real, 1.0), (coef.imag, 1j)):
        poly = np.polynomial.Chebyshev(part, domain=[0, q_max]).convert(kind=np.polynomial.Polynomial)
        out[:len(poly.coef)] += unit * poly.coef
    return out


def extract_q_coeffs(evaluator, K: int, q_max: float = 0.35, n_nodes: int | None = None,
                     eta_weight=0.0) -> Extraction:
    """Least-squares polynomial of degree K through evaluator at Chebyshev nodes in (0, q_max].

    ``eta_weight`` multiplies the data by prod(1 - q^{2k})**beta before the fit
    and divides the fitted series by the same factor exactly afterwards.  Blocks
    have Taylor coefficients growing like a large power of the index, and a
    suitable beta removes most of that growth.  ``"auto"`` picks the integer
    beta in [0, 24] whose fit has the smallest trailing Chebyshev coefficients.
    """
    if n_nodes is None:
        n_nodes = 2 * (K + 1)
    if K + 1 > n_nodes:
        raise ExtractionError(f"degree {K} needs at least {K + 1} nodes, got {n_nodes}")
    if not 0 < q_max < 1:
        raise ExtractionError("q_max must lie in (0, 1)")
    nodes = chebyshev_nodes(n_nodes, q_max)
    values = np.array([complex(evaluator(float(x))) for x in nodes])
    V = np.polynomial.chebyshev.chebvander(2 * nodes / q_max - 1, K)
    cond = float(np.linalg.cond(V))
    if cond > MAX_CONDITION:
        raise ExtractionError(f"fit is ill-conditioned (condition number {cond:.3g})")
    log_eta = np.log(np.array([eta_norm(x).real for x in nodes]))

    def fit(beta):
        data = values * np.exp(beta * log_eta)
        coef, *_ = np.linalg.lstsq(V, data, rcond=None)
        tail = float(np.max(np.abs(coef[-3:])) / max(abs(coef[0]), 1e-300)) if K >= 3 else 0.0
        return coef, float(np.max(np.abs(V @ coef - data))), tail

    if eta_weight == "auto":
        trials = [(b,) + fit(b) for b in range(25)]
        beta, coef, resid, tail = min(trials, key=lambda t: t[3])
    else:
        beta = float(eta_weight)
        coef, resid, tail = fit(beta)
    out = QSeries(_cheb_to_monomial(coef, q_max, K))
    if beta:
        out = mul(out, pow_real(eta_norm_series(K), -beta))
    return Extraction(out, cond, nodes, resid, float(beta), tail)


def df_coefficients(cfg: DFConfig, gamma: float, P, K: int = 16, q_max: float = 0.35) -> Extraction:
    """Taylor coefficients of A^q / A_0 from the integral at real q nodes."""
    return extract_q_coeffs(lambda q: df_A_tilde(cfg, gamma, P, q), K, q_max, eta_weight="auto")


# ---------------------------------------------------------------------------
# identities

def verify_momentum_shift(cfg: DFConfig, gamma: float, m: int, n: int, q: float,
                          tol: float = 1e-6) -> VerifyReport:
    """A^q(P_{m,n}) against q^{2nm} e^{-i pi alpha gamma m / 2} A^q(P_{-m,n})."""
    t0 = time.perf_counter()
    alpha = -cfg.N * gamma
    lhs = df_A_q(cfg, gamma, p_mn(m, n, gamma), q)
    if m == 0:
        rhs = q ** (2 * n * m) * lhs
    else:
        rhs = (q ** (2 * n * m) * cmath.exp(-1j * math.pi * alpha * gamma * m / 2)
               * df_A_q(cfg, gamma, p_mn(-m, n, gamma), q))
    scale = max(abs(lhs), abs(rhs), 1e-300)
    res = abs(lhs - rhs) / scale
    cfg_echo = {"N": cfg.N, "gamma": gamma, "m": m, "n": n, "q": q, "quad_points": cfg.quad_points}
    return VerifyReport("momentum-shift", f"df(P_{m},{n})", f"df(P_-{m},{n})", lhs, rhs, res, tol,
                        int(1000 * (time.perf_counter() - t0)), cfg_echo)


def evenness_residual(cfg: DFConfig, gamma: float, P, q) -> float:
    a = df_A_tilde(cfg, gamma, P, q)
    b = df_A_tilde(cfg, gamma, -complex(P), q)
    return abs(a - b) / abs(a)
