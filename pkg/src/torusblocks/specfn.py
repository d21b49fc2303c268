"""Special functions on the torus: theta, eta, Weierstrass p, gamma, double gamma.

Conventions
-----------
The nome is q = exp(i*pi*tau).  Theta has zeros on the lattice Z + tau*Z and
satisfies Theta(u + 1) = -Theta(u); its derivative at the origin is
-2*pi*eta(q)**3.  Fractional powers of Theta use a single fixed branch of
log Theta, see :func:`log_theta`.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial import chebyshev as _cheb
from numpy.polynomial import polynomial as _poly
from scipy import special as _sp

from .qseries import eta_norm_series

LOG_2PI = math.log(2 * math.pi)


class PoleError(ValueError):
    """Evaluation requested at (or numerically on top of) a pole."""


class DomainError(ValueError):
    """Argument outside the documented domain of a function."""


# ---------------------------------------------------------------------------
# parameter bundles

@dataclass(frozen=True)
class ModularParam:
    """Modular parameter tau (Im tau > 0) and nome q = exp(i pi tau)."""

    tau: complex

    def __post_init__(self):
        tau = complex(self.tau)
        if not tau.imag > 0:
            raise DomainError(f"tau must lie in the upper half plane, got {tau}")
        object.__setattr__(self, "tau", tau)

    @classmethod
    def from_q(cls, q) -> "ModularParam":
        q = complex(q)
        if not 0 < abs(q) < 1:
            raise DomainError(f"nome must satisfy 0 < |q| < 1, got {q}")
        return cls(cmath.log(q) / (1j * math.pi))

    @property
    def q(self) -> complex:
        return cmath.exp(1j * math.pi * self.tau)

    @property
    def is_real(self) -> bool:
        return self.tau.real == 0.0

    def qpow(self, s) -> complex:
        """q**s on the branch q**s = exp(i pi tau s)."""
        return cmath.exp(1j * math.pi * self.tau * s)


def as_modular(m) -> ModularParam:
    return m if isinstance(m, ModularParam) else ModularParam.from_q(m)


@dataclass(frozen=True)
class BlockParams:
    """Coupling gamma in (0, 2), momentum P and insertion weight alpha."""

    gamma: float
    P: complex = 0.0
    alpha: complex = 0.0

    def __post_init__(self):
        g = float(self.gamma)
        if not 0 < g < 2:
            raise DomainError(f"gamma must lie in (0, 2), got {g}")
        object.__setattr__(self, "gamma", g)
        object.__setattr__(self, "P", _maybe_real(self.P))
        object.__setattr__(self, "alpha", _maybe_real(self.alpha))

    @property
    def Q(self) -> float:
        return self.gamma / 2 + 2 / self.gamma

    @property
    def c(self) -> float:
        return 1 + 6 * self.Q ** 2

    @property
    def delta_alpha(self):
        return self.alpha / 2 * (self.Q - self.alpha / 2)

    @property
    def delta(self):
        return (self.Q ** 2 + self.P ** 2) / 4

    def l_chi(self, chi: float):
        return chi ** 2 / 2 - self.alpha * chi / 2

    def chis(self) -> tuple:
        return (self.gamma / 2, 2 / self.gamma)

    def replace(self, **kw) -> "BlockParams":
        d = dict(gamma=self.gamma, P=self.P, alpha=self.alpha)
        d.update(kw)
        return BlockParams(**d)


def _maybe_real(x):
    x = complex(x)
    return x.real if x.imag == 0 else x


# ---------------------------------------------------------------------------
# Euler gamma

def _check_gamma_pole(z):
    if z.imag == 0 and z.real <= 0 and z.real == round(z.real):
        raise PoleError(f"Gamma has a pole at {z.real:g}")


def gamma_complex(z) -> complex:
    """Euler Gamma at complex z (scipy backend, reflection handled inside)."""
    z = complex(z)
    _check_gamma_pole(z)
    if z.imag == 0:
        return complex(_sp.gamma(z.real))
    return complex(_sp.gamma(z))


def loggamma(z) -> complex:
    z = complex(z)
    _check_gamma_pole(z)
    return complex(_sp.loggamma(z))


def rgamma(z) -> complex:
    """1/Gamma(z), entire."""
    return complex(_sp.rgamma(complex(z)))


# ---------------------------------------------------------------------------
# Barnes-type double gamma Gamma_{gamma/2}

_SHIFT_THRESHOLD = 0.5
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(24)
_SMALL_T_TERMS = 60


def _on_pole_lattice(z: complex, a: float, b: float, tol: float = 1e-10) -> bool:
    if z.real > tol or abs(z.imag) > tol:
        return False
    span = -z.real
    for n in range(int(span / a) + 2):
        m = (span - n * a) / b
        for mm in (math.floor(m), math.ceil(m)):
            if mm >= 0 and abs(z + n * a + mm * b) < tol:
                return True
    return False


def _small_t_coeffs(w: complex, a: float, b: float, M: int) -> np.ndarray:
    """Taylor coefficients of the log-double-gamma integrand about t = 0."""
    n = M + 3
    k = np.arange(n)
    fact = _sp.factorial(2 * k + 1)
    sa = np.zeros(n)
    sb = np.zeros(n)
    half = n // 2 + 1
    sa[0::2] = ((a / 2) ** (2 * k[:half]) / fact[:half])[: len(sa[0::2])]
    sb[0::2] = ((b / 2) ** (2 * k[:half]) / fact[:half])[: len(sb[0::2])]
    prod = np.convolve(sa, sb)[:n]
    g = np.zeros(n)
    g[0] = 1.0
    for j in range(1, n):
        g[j] = -np.dot(prod[1 : j + 1], g[j - 1 :: -1][:j])
    E = np.array([(-w) ** (j + 1) / math.factorial(j + 1) for j in range(n)], complex)
    H = np.convolve(E, g)[:n]
    D = H[1:] - np.array([(w * w / 2) * (-1) ** j / math.factorial(j) for j in range(n - 1)])
    return D[1 : M + 1]


def _ldg_integrand(t: np.ndarray, z: complex, a: float, b: float) -> np.ndarray:
    Q = a + b
    w = z - Q / 2
    num = np.exp(-z * t) - np.exp(-Q * t / 2)
    den = np.expm1(-a * t) * np.expm1(-b * t)
    return (num / den - (w * w / 2) * np.exp(-t) + w / t) / t


def _log_double_gamma_quad(z: complex, a: float, b: float) -> complex:
    Q = a + b
    w = z - Q / 2
    if w == 0:
        return 0j
    pole_dist = 2 * math.pi / max(a, b)
    t0 = min(0.5, 0.25 * pole_dist, 2.0 / abs(w))
    d = _small_t_coeffs(w, a, b, _SMALL_T_TERMS)
    powers = np.arange(1, d.size + 1)
    head = complex(np.sum(d * t0 ** powers / powers))
    decay = min(z.real, Q / 2)
    T = max(40.0, 38.0 / decay)
    h = min(1.0, 0.5 * pole_dist, 6.0 / max(abs(z.imag), 1e-300))
    npan = int(math.ceil((T - t0) / h))
    edges = np.linspace(t0, T, npan + 1)
    mid = 0.5 * (edges[1:] + edges[:-1])
    half = 0.5 * (edges[1:] - edges[:-1])
    t = (mid[:, None] + half[:, None] * _GL_NODES[None, :]).ravel()
    wts = (half[:, None] * _GL_WEIGHTS[None, :]).ravel()
    body = complex(np.dot(wts, _ldg_integrand(t, z, a, b)))
    tail = -(w * w / 2) * _sp.exp1(T) + w / T
    return head + body + tail


@lru_cache(maxsize=65536)
def _log_double_gamma_cached(zr: float, zi: float, gamma: float) -> complex:
    z = complex(zr, zi)
    a, b = gamma / 2, 2 / gamma
    if _on_pole_lattice(z, a, b):
        raise PoleError(f"double gamma has a pole at z = {z}")
    acc = 0j
    while z.real < _SHIFT_THRESHOLD:
        # Gamma2(z) = Gamma(a z) Gamma2(z + a) / (sqrt(2 pi) a^(a z - 1/2))
        acc += loggamma(a * z) - 0.5 * LOG_2PI - (a * z - 0.5) * math.log(a)
        z = z + a
    return acc + _log_double_gamma_quad(z, a, b)


def log_double_gamma(z, gamma: float) -> complex:
    """log Gamma_{gamma/2}(z); branch of the imaginary part is not normalized."""
    z = complex(z)
    if not 0 < gamma < 2:
        raise DomainError("gamma must lie in (0, 2)")
    return _log_double_gamma_cached(z.real, z.imag, float(gamma))


def double_gamma(z, gamma: float) -> complex:
    """Gamma_{gamma/2}(z), normalized by Gamma_{gamma/2}(Q/2) = 1."""
    return cmath.exp(log_double_gamma(z, gamma))


def s_gamma(z, gamma: float) -> complex:
    """S(z) = Gamma_{gamma/2}(z) / Gamma_{gamma/2}(Q - z)."""
    Q = gamma / 2 + 2 / gamma
    z = complex(z)
    return cmath.exp(log_double_gamma(z, gamma) - log_double_gamma(Q - z, gamma))


def log_s_gamma(z, gamma: float) -> complex:
    Q = gamma / 2 + 2 / gamma
    z = complex(z)
    return log_double_gamma(z, gamma) - log_double_gamma(Q - z, gamma)


# ---------------------------------------------------------------------------
# theta and eta

def _kmax(q: complex) -> int:
    aq = abs(q)
    if aq == 0:
        return 0
    if aq >= 1:
        raise DomainError(f"|q| must be < 1, got {aq}")
    bound = 1e-16 * (1 - aq * aq)
    return max(1, int(math.ceil(math.log(bound) / (2 * math.log(aq)))) + 1)


def eta(m) -> complex:
    """Dedekind eta(q) = q^{1/12} prod (1 - q^{2k})."""
    m = as_modular(m)
    q = m.q
    K = _kmax(q)
    k = np.arange(1, K + 1)
    return m.qpow(1 / 12) * complex(np.prod(1 - q ** (2 * k)))


def eta_norm(m) -> complex:
    """q^{-1/12} eta(q) = prod (1 - q^{2k})."""
    m = as_modular(m)
    k = np.arange(1, _kmax(m.q) + 1)
    return complex(np.prod(1 - m.q ** (2 * k)))


def _logf_derivs(u: np.ndarray, q: complex, K: int):
    """Derivatives (orders 1..3) of sum_k log(1 - 2 cos(2 pi u) q^{2k} + q^{4k})."""
    k = np.arange(1, K + 1)
    q2 = q ** (2 * k)
    c = np.cos(2 * np.pi * u)[..., None]
    s = np.sin(2 * np.pi * u)[..., None]
    f = 1 - 2 * c * q2 + q2 * q2
    f1 = 4 * np.pi * s * q2 / f
    f2 = 8 * np.pi ** 2 * c * q2 / f
    f3 = -16 * np.pi ** 3 * s * q2 / f
    d1 = f1
    d2 = f2 - f1 ** 2
    d3 = f3 - 3 * f1 * f2 + 2 * f1 ** 3
    return np.prod(f, axis=-1), d1.sum(-1), d2.sum(-1), d3.sum(-1)


def jacobi_theta(u, m, deriv: int = 0):
    """Theta_tau(u) or its u-derivative of order ``deriv`` (0..3).

    Theta(u) = -2 q^{1/4} sin(pi u) prod_k (1 - q^{2k})(1 - 2 cos(2 pi u) q^{2k} + q^{4k}).
    Derivatives come from differentiating the truncated product exactly.
    """
    if deriv not in (0, 1, 2, 3):
        raise ValueError("deriv must be 0, 1, 2 or 3")
    m = as_modular(m)
    q = m.q
    u_arr = np.asarray(u, dtype=complex)
    K = _kmax(q)
    k = np.arange(1, K + 1)
    pref = -2 * m.qpow(0.25) * np.prod(1 - q ** (2 * k))
    G, g1, g2, g3 = _logf_derivs(u_arr, q, K)
    Gd = [G, G * g1, G * (g2 + g1 ** 2), G * (g3 + 3 * g1 * g2 + g1 ** 3)]
    pu = np.pi * u_arr
    sd = [np.sin(pu), np.pi * np.cos(pu), -np.pi ** 2 * np.sin(pu), -np.pi ** 3 * np.cos(pu)]
    binom = [[1], [1, 1], [1, 2, 1], [1, 3, 3, 1]][deriv]
    val = sum(binom[j] * sd[j] * Gd[deriv - j] for j in range(deriv + 1))
    val = pref * val
    return complex(val) if np.ndim(val) == 0 else val


def theta_prime0(m) -> complex:
    return jacobi_theta(0.0, m, 1)


def theta_log_derivative(u, m):
    """Theta'/Theta via pi cot(pi u) + 4 pi sum_n q^{2n}/(1-q^{2n}) sin(2 pi n u)."""
    m = as_modular(m)
    q = m.q
    K = _kmax(q)
    n = np.arange(1, K + 1)
    u_arr = np.asarray(u, dtype=complex)
    q2n = q ** (2 * n)
    tail = 4 * np.pi * np.sum(q2n / (1 - q2n) * np.sin(2 * np.pi * n * u_arr[..., None]), axis=-1)
    val = np.pi / np.tan(np.pi * u_arr) + tail
    return complex(val) if np.ndim(val) == 0 else val


def _lattice_coords(u: complex, tau: complex):
    y = u.imag / tau.imag
    x = u.real - y * tau.real
    return x, y


def _log_sin_pi(u: complex) -> complex:
    """Branch of log sin(pi u): 0 at u = 1/2, continued through the upper half plane
    and through the vertical strip over (0, 1) into the lower half plane."""
    if u.imag >= 0:
        return math.log(0.5) + 0.5j * math.pi - 1j * math.pi * u + cmath.log(1 - cmath.exp(2j * math.pi * u))
    return math.log(0.5) - 0.5j * math.pi + 1j * math.pi * u + cmath.log(1 - cmath.exp(-2j * math.pi * u))


def _log_phi(u: complex, m: ModularParam) -> complex:
    q = m.q
    K = _kmax(q)
    k = np.arange(1, K + 1)
    q2 = q ** (2 * k)
    e = cmath.exp(2j * math.pi * u)
    s = np.sum(np.log(1 - q2) + np.log(1 - q2 * e) + np.log(1 - q2 / e))
    return 1j * math.pi + math.log(2) + 1j * math.pi * m.tau / 4 + complex(s)


def log_theta(u, m) -> complex:
    """Fixed branch of log Theta_tau(u).

    log Theta = log sin(pi u) + log phi_tau(u), where log phi has imaginary
    part pi on the real axis for real q and is continued analytically in
    (u, tau).  Points with lattice coordinate |y| > 1 are brought back with
    Theta(u + tau) = -q^{-1} e^{-2 pi i u} Theta(u) (requires 0 < x < 1).
    """
    m = as_modular(m)
    u = complex(u)
    x, y = _lattice_coords(u, m.tau)
    if abs(y - round(y)) < 1e-13 and abs(x - round(x)) < 1e-13:
        raise PoleError(f"Theta vanishes at lattice point u = {u}")
    shift = 0j
    while y > 1:
        if not 0 < x < 1:
            raise DomainError(f"u = {u} outside the branch domain of log Theta")
        u = u - m.tau
        y -= 1
        shift += -2j * math.pi * (u - 0.5 + m.tau / 2)
    while y < -1:
        if not 0 < x < 1:
            raise DomainError(f"u = {u} outside the branch domain of log Theta")
        shift -= -2j * math.pi * (u - 0.5 + m.tau / 2)
        u = u + m.tau
        y += 1
    if y < 0 and not 0 < x < 1:
        raise DomainError(f"u = {u} outside the branch domain of log Theta")
    return _log_sin_pi(u) + _log_phi(u, m) + shift


def theta_frac_pow(u, c, m) -> complex:
    """Theta_tau(u)**c on the branch of :func:`log_theta`.

    For real q and 0 < x < 1 this gives exp(i pi c) |Theta(x)|**c.
    """
    return cmath.exp(c * log_theta(u, m))


def abs_theta(x, m):
    """|Theta_tau(x)| for real x (vectorized), real or complex q."""
    return np.abs(jacobi_theta(np.asarray(x, dtype=float), m, 0))


# ---------------------------------------------------------------------------
# Weierstrass p

def weierstrass_p(u, m, route: str = "theta"):
    """Weierstrass p for the lattice Z + tau Z (normalized periods 1, tau)."""
    m = as_modular(m)
    u_arr = np.asarray(u, dtype=complex)
    x, y = _lattice_coords(complex(np.ravel(u_arr)[0]), m.tau) if u_arr.size == 1 else (0.5, 0.5)
    if u_arr.size == 1 and abs(x - round(x)) < 1e-13 and abs(y - round(y)) < 1e-13:
        raise PoleError("Weierstrass p has a pole on the period lattice")
    if route == "theta":
        t0 = jacobi_theta(u_arr, m, 0)
        t1 = jacobi_theta(u_arr, m, 1)
        t2 = jacobi_theta(u_arr, m, 2)
        c = jacobi_theta(0.0, m, 3) / jacobi_theta(0.0, m, 1) / 3
        val = (t1 / t0) ** 2 - t2 / t0 + c
    elif route == "series":
        q = m.q
        n = np.arange(1, _kmax(q) + 1)
        q2n = q ** (2 * n)
        cos_terms = np.cos(2 * np.pi * n * u_arr[..., None])
        val = (np.pi ** 2 / np.sin(np.pi * u_arr) ** 2
               - 8 * np.pi ** 2 * np.sum(n * q2n / (1 - q2n) * cos_terms, axis=-1)
               - np.pi ** 2 / 3
               + 8 * np.pi ** 2 * np.sum(q2n / (1 - q2n) ** 2))
    else:
        raise ValueError("route must be 'theta' or 'series'")
    return complex(val) if np.ndim(val) == 0 else val


def wp_poly(n: int) -> np.ndarray:
    """Coefficients (ascending in w) of the q^n coefficient of p, written in w = sin^2(pi u).

    Only even n = 2N contribute: 8 pi^2 [sigma_1(N) - sum_{d | N} d T_d(1 - 2w)].
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if n % 2:
        return np.zeros(1)
    N = n // 2
    divisors = [d for d in range(1, N + 1) if N % d == 0]
    poly = np.array([float(sum(divisors))])
    for d in divisors:
        Td = _cheb.cheb2poly([0] * d + [1])  # T_d(s), ascending in s
        # substitute s = 1 - 2w
        sub = np.zeros(1)
        power = np.ones(1)
        for coef in Td:
            sub = _poly.polyadd(sub, coef * power)
            power = _poly.polymul(power, [1.0, -2.0])
        poly = _poly.polysub(poly, d * sub)
    return _poly.polytrim(8 * np.pi ** 2 * poly, tol=0) if np.any(poly) else np.zeros(1)


# ---------------------------------------------------------------------------
# boundary reflection coefficient

def _exp_real_power(base: float, expo) -> complex:
    return cmath.exp(expo * math.log(base))


def reflection_coeff(alpha, chi: float, P, gamma: float) -> complex:
    """Boundary reflection coefficient Rbar(alpha, 1, exp(-i pi gamma chi / 2 + pi gamma P))."""
    Q = gamma / 2 + 2 / gamma
    alpha = complex(alpha)
    P = complex(P)
    if abs(Q - alpha) < 1e-14:
        raise PoleError("reflection coefficient has a pole at alpha = Q")
    s = Q - alpha
    log_g1 = math.log(gamma_complex(1 - gamma ** 2 / 4).real)
    log_val = ((2 / gamma) * s - 0.5) * LOG_2PI
    log_val += ((gamma / 2) * s - 0.5) * math.log(2 / gamma)
    log_val -= cmath.log(s) + (2 / gamma) * s * log_g1
    log_val += log_double_gamma(alpha - gamma / 2, gamma)
    log_val += -1j * math.pi * (chi / 2 + 1j * P) * s
    log_val -= log_double_gamma(s, gamma)
    log_val -= log_s_gamma(alpha / 2 + chi / 2 + 1j * P, gamma)
    log_val -= log_s_gamma(alpha / 2 - chi / 2 - 1j * P, gamma)
    return cmath.exp(log_val)


def eta_from_series(q: float, K: int = 80) -> complex:
    """q^{1/12} times the truncated eta_norm_series evaluated at q (reference helper)."""
    return q ** (1 / 12) * eta_norm_series(K)(q)
