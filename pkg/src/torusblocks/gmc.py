"""Monte Carlo route: truncated log-correlated fields on the circle and GMC moments.

Fields are synthesized on a uniform midpoint grid with one inverse real FFT per
sample.  The deterministic insertion |Theta(x)|^c e^{pi gamma P x} is integrated
exactly over each grid cell (Gauss-Jacobi in the two endpoint cells), so the
endpoint singularity never meets a point evaluation.

Samples are drawn in fixed-size chunks; chunk k uses the stream
SeedSequence([seed, k]).  Results depend on neither the worker count nor the
scheduling order.
"""

from __future__ import annotations

import cmath
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from functools import lru_cache

import numpy as np
from scipy.special import roots_legendre

from .closedform import a0_closed, two_pi_phase_pow
from .dotsenko import gauss_jacobi01
from .specfn import BlockParams, ModularParam, PoleError, abs_theta, eta, gamma_complex, reflection_coeff

CHUNK = 500
BATCHES = 50
THREADS_ENV = "TORUS_BLOCKS_THREADS"


class MomentRangeError(ValueError):
    """Parameters outside the range where the GMC moment is finite or the grid rule is valid."""


@dataclass(frozen=True)
class MCConfig:
    samples: int = 200_000
    seed: int = 0
    N_modes: int = 512
    grid_points: int = 4096
    f_cutoff: float = 1e-10
    richardson: int = 2
    threads: int | None = None

    def __post_init__(self):
        for name in ("samples", "N_modes", "grid_points"):
            if int(getattr(self, name)) <= 0:
                raise ValueError(f"{name} must be positive")
        if not 0 < self.f_cutoff < 1:
            raise ValueError("f_cutoff must lie in (0, 1)")
        if 2 * self.N_modes >= self.grid_points:
            raise ValueError("grid_points must exceed 2 * N_modes")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.richardson not in (0, 1, 2):
            raise ValueError("richardson must be 0, 1 or 2")
        if self.N_modes % (2 ** self.richardson):
            raise ValueError("N_modes must be divisible by 2**richardson")

    def echo(self) -> dict:
        d = asdict(self)
        d.pop("threads")
        return d


def worker_count(cfg: MCConfig) -> int:
    if cfg.threads is not None:
        return max(1, int(cfg.threads))
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ValueError(f"{THREADS_ENV} must be an integer, got {env!r}") from None
    return 1


def _real_q(m) -> tuple:
    m = m if isinstance(m, ModularParam) else ModularParam.from_q(m)
    q = m.q
    if not (m.is_real and 0 < q.real < 1):
        raise ValueError("the field covariance formulas need real q in (0, 1)")
    return m, float(q.real)


# ---------------------------------------------------------------------------
# fields

@dataclass(frozen=True)
class FieldLayout:
    """Mode bookkeeping for Y_inf (n <= N) and F_tau ((n, m) with q^{nm} >= cutoff)."""

    N_modes: int
    q: float
    cutoff: float
    pairs: tuple = field(init=False)

    def __post_init__(self):
        pairs = []
        n = 1
        while self.q ** n >= self.cutoff:
            m = 1
            while self.q ** (n * m) >= self.cutoff:
                pairs.append((n, m))
                m += 1
            n += 1
        object.__setattr__(self, "pairs", tuple(pairs))

    @property
    def dim(self) -> int:
        return 2 * self.N_modes + 2 * len(self.pairs)

    def variance_inf(self) -> float:
        return float(np.sum(2.0 / np.arange(1, self.N_modes + 1)))

    def variance_f(self) -> float:
        return float(sum(4 * self.q ** (2 * n * m) / n for n, m in self.pairs))

    def variance(self) -> float:
        return self.variance_inf() + self.variance_f()

    def pair_arrays(self):
        if not self.pairs:
            return np.zeros(0, int), np.zeros(0)
        n = np.array([p[0] for p in self.pairs])
        amp = np.array([2 * self.q ** (a * b) / math.sqrt(a) for a, b in self.pairs])
        return n, amp


@dataclass(frozen=True)
class FieldSample:
    """One draw of the Gaussian coefficients; evaluation helpers give the fields at any x."""

    layout: FieldLayout
    a: np.ndarray
    b: np.ndarray
    a_nm: np.ndarray
    b_nm: np.ndarray

    def y_inf(self, x):
        x = np.asarray(x, dtype=float)
        n = np.arange(1, self.layout.N_modes + 1)
        ph = 2 * math.pi * np.multiply.outer(x, n)
        return (np.cos(ph) @ (self.a * np.sqrt(2 / n))) + (np.sin(ph) @ (self.b * np.sqrt(2 / n)))

    def f_tau(self, x):
        x = np.asarray(x, dtype=float)
        n, amp = self.layout.pair_arrays()
        if n.size == 0:
            return np.zeros_like(x)
        ph = 2 * math.pi * np.multiply.outer(x, n)
        return np.cos(ph) @ (self.a_nm * amp) + np.sin(ph) @ (self.b_nm * amp)

    def y_tau(self, x):
        return self.y_inf(x) + self.f_tau(x)

    def grid_values(self, M: int) -> np.ndarray:
        """Y_tau at the midpoints (j + 1/2)/M."""
        return _synthesize(self.layout, self.as_row()[None, :], M)[0]

    def as_row(self) -> np.ndarray:
        return np.concatenate([self.a, self.b, self.a_nm, self.b_nm])


def _split_row(layout: FieldLayout, row: np.ndarray) -> FieldSample:
    N = layout.N_modes
    k = len(layout.pairs)
    return FieldSample(layout, row[:N], row[N:2 * N], row[2 * N:2 * N + k], row[2 * N + k:])


def sample_field(rng: np.random.Generator, m, cfg: MCConfig) -> FieldSample:
    """One draw of (a_n, b_n, a_nm, b_nm), all i.i.d. standard normal."""
    _, q = _real_q(m)
    layout = FieldLayout(cfg.N_modes, q, cfg.f_cutoff)
    return _split_row(layout, rng.standard_normal(layout.dim))


def _synthesize(layout: FieldLayout, rows: np.ndarray, M: int, limit: int | None = None) -> np.ndarray:
    """Fields at the M midpoints for each row of coefficients (one irfft per row).

    ``limit`` keeps only the first ``limit`` modes of Y_inf (F_tau is kept whole).
    """
    N = layout.N_modes
    L = N if limit is None else limit
    k = len(layout.pairs)
    n = np.arange(1, L + 1)
    X = np.zeros((rows.shape[0], M // 2 + 1), complex)
    X[:, 1:L + 1] = np.sqrt(2 / n) * (rows[:, :L] - 1j * rows[:, N:N + L])
    if k:
        pn, amp = layout.pair_arrays()
        coef = amp * (rows[:, 2 * N:2 * N + k] - 1j * rows[:, 2 * N + k:])
        for col in range(k):
            X[:, pn[col]] += coef[:, col]
    top = X.shape[1]
    shift = np.exp(1j * math.pi * np.arange(top) / M)
    X *= (M / 2) * shift
    return np.fft.irfft(X, n=M, axis=1)


# ---------------------------------------------------------------------------
# deterministic cell weights

def _cell_points(npts: int):
    x, w = roots_legendre(npts)
    return (1 + x) / 2, w / 2


def cell_weights(M: int, c: float, gamma: float, P, m, npts: int = 8) -> np.ndarray:
    """W_j = int over [j/M, (j+1)/M] of |Theta(x)|^c e^{pi gamma P x} dx."""
    if c <= -1:
        raise MomentRangeError(f"insertion exponent {c:.6g} <= -1 is not integrable against the grid")
    m, _ = _real_q(m)
    P = complex(P)
    h = 1.0 / M
    t, w = _cell_points(npts)
    x = (np.arange(M)[:, None] + t[None, :]) * h
    interior = np.abs(abs_theta(x[1:-1].ravel(), m)).reshape(M - 2, npts)
    W = np.empty(M, complex)
    W[1:-1] = h * np.sum(w * interior ** c * np.exp(math.pi * gamma * P * x[1:-1]), axis=1)
    # endpoint cells: |Theta(x)| = x * smooth near 0 and (1 - x) * smooth near 1
    tj, wj = gauss_jacobi01(npts, c, 0.0)
    x0 = h * tj
    s0 = (abs_theta(x0, m) / x0) ** c
    W[0] = h ** (1 + c) * np.sum(wj * s0 * np.exp(math.pi * gamma * P * x0))
    x1 = 1 - h * tj
    s1 = (abs_theta(x1, m) / (1 - x1)) ** c
    W[-1] = h ** (1 + c) * np.sum(wj * s1 * np.exp(math.pi * gamma * P * x1))
    return W


# ---------------------------------------------------------------------------
# integrals and moments

def gmc_integral(sample: FieldSample, weight, cfg: MCConfig, gamma: float) -> complex:
    """Grid GMC integral of ``weight`` for one field draw.

    ``weight`` is either a callable (midpoint rule, weight(x) / M per cell) or
    an array of precomputed cell weights of length grid_points.
    """
    M = cfg.grid_points
    if callable(weight):
        x = (np.arange(M) + 0.5) / M
        W = np.asarray(weight(x), dtype=complex) / M
    else:
        W = np.asarray(weight, dtype=complex)
    Y = sample.grid_values(M)
    e = np.exp(gamma / 2 * Y - gamma ** 2 / 8 * sample.layout.variance())
    val = complex(np.sum(W * e))
    if not np.isfinite(val):
        raise FloatingPointError("GMC integral overflowed")
    return val


def mode_exponents(gamma: float, c: float) -> tuple:
    """Decay powers of the truncation bias in N_modes.

    The bulk term decays like N^-(1 - gamma^2/2) (second moment of the missing
    small-scale mass); an endpoint insertion |x|^c adds N^-(2 + 2c - gamma^2/2).
    The second power is capped at 1 and kept at least 1/4 above the first so
    the extrapolation weights stay moderate.
    """
    s1 = 1 - gamma ** 2 / 2
    s2 = max(min(2 + 2 * c - gamma ** 2 / 2, 1.0), s1 + 0.25)
    return s1, s2


def richardson_weights(levels: int, gamma: float, c: float) -> np.ndarray:
    """Weights on the estimates at N / 2^levels, ..., N / 2, N cancelling the leading powers."""
    if levels == 0:
        return np.array([1.0])
    s1 = 1 - gamma ** 2 / 2
    if s1 <= 0:
        raise MomentRangeError("mode extrapolation needs gamma < sqrt(2); use richardson = 0")
    powers = mode_exponents(gamma, c)[:levels]
    k = np.arange(levels, -1, -1)
    A = np.vstack([np.ones(levels + 1)] + [2.0 ** (k * s) for s in powers])
    rhs = np.zeros(levels + 1)
    rhs[0] = 1
    return np.linalg.solve(A, rhs)


def _moment_chunk(args):
    layout, W, gamma, power, seed, index, count, M, weights = args
    rng = np.random.default_rng(np.random.SeedSequence([seed, index]))
    rows = rng.standard_normal((count, layout.dim))
    levels = len(weights) - 1
    vf = layout.variance_f()
    out = np.zeros(count, complex)
    raw = None
    for j, w in enumerate(weights):
        L = layout.N_modes >> (levels - j)
        Y = _synthesize(layout, rows, M, L)
        var = float(np.sum(2.0 / np.arange(1, L + 1))) + vf
        e = np.exp(gamma / 2 * Y - gamma ** 2 / 8 * var)
        if np.isrealobj(W):
            I = (e * W).sum(axis=1).astype(complex)
        else:
            I = (e * W).sum(axis=1)
        val = np.power(I, power)
        if not np.all(np.isfinite(val)):
            raise FloatingPointError("GMC moment overflowed")
        out += w * val
        raw = val
    return out, raw


@dataclass(frozen=True)
class MomentEstimate:
    mean: complex
    stderr: float
    raw_mean: complex
    raw_stderr: float
    samples: np.ndarray = field(repr=False)


def gmc_moment(c: float, power: float, gamma: float, P, m, cfg: MCConfig) -> MomentEstimate:
    """E[(int |Theta|^c e^{pi gamma P x} dGMC)^power] with batch-means error.

    With ``cfg.richardson`` > 0 every draw is also evaluated with its first
    N/2 (and N/4) modes only, and the per-draw values are combined to cancel
    the leading truncation bias.  ``raw_mean`` is the plain N-mode estimate.
    """
    m, q = _real_q(m)
    layout = FieldLayout(cfg.N_modes, q, cfg.f_cutoff)
    W = cell_weights(cfg.grid_points, c, gamma, P, m)
    if not np.any(W.imag):
        W = W.real.copy()
    weights = richardson_weights(cfg.richardson, gamma, c)
    jobs = []
    start = 0
    index = 0
    while start < cfg.samples:
        count = min(CHUNK, cfg.samples - start)
        jobs.append((layout, W, gamma, power, cfg.seed, index, count, cfg.grid_points, weights))
        start += count
        index += 1
    workers = worker_count(cfg)
    if workers == 1:
        parts = [_moment_chunk(j) for j in jobs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_moment_chunk, jobs))
    values = np.concatenate([p[0] for p in parts])
    raw = np.concatenate([p[1] for p in parts])
    return MomentEstimate(complex(values.sum() / values.size), batch_stderr(values),
                          complex(raw.sum() / raw.size), batch_stderr(raw), values)


def batch_stderr(values: np.ndarray, batches: int = BATCHES) -> float:
    """Standard error of the mean from batch means (plain estimate for small samples)."""
    values = np.asarray(values, dtype=complex)
    if values.size < 2:
        return float("nan")
    if values.size < 2 * batches:
        chunks = [values[i:i + 1] for i in range(values.size)]
    else:
        chunks = np.array_split(values, batches)
    means = np.array([c.mean() for c in chunks])
    var = np.var(means.real, ddof=1) + np.var(means.imag, ddof=1)
    return float(math.sqrt(var / len(means)))


# ---------------------------------------------------------------------------
# block estimators

def check_moment_range(params: BlockParams):
    """Preconditions of the direct estimator."""
    g = params.gamma
    a = params.alpha
    if not -4 / g < a < params.Q:
        raise MomentRangeError(f"alpha = {a} outside (-4/gamma, Q) = ({-4 / g:.6g}, {params.Q:.6g})")
    if a * g / 2 >= 1:
        raise MomentRangeError("alpha * gamma / 2 >= 1: the insertion is not integrable against the grid")


def _a_prefactor(params: BlockParams, m: ModularParam) -> complex:
    a = params.alpha
    g = params.gamma
    qp = (-a * g - 2 * a / g + 2) / 12
    ep = a * g + 2 * a / g - 1.5 * a * a - 2
    return m.qpow(qp) * cmath.exp(ep * cmath.log(eta(m))) * cmath.exp(1j * math.pi * a * a / 2)


def estimate_A_q(params: BlockParams, m, cfg: MCConfig) -> tuple:
    """(value, stderr) of A^q by Monte Carlo; exact at alpha = 0."""
    m, _ = _real_q(m)
    check_moment_range(params)
    pref = _a_prefactor(params, m)
    if params.alpha == 0:
        return pref, 0.0
    g = params.gamma
    est = gmc_moment(-params.alpha * g / 2, -params.alpha / g, g, params.P, m, cfg)
    return pref * est.mean, abs(pref) * est.stderr


def g_prefactor(params: BlockParams, m) -> complex:
    """(q^{-1/12} eta)^{1 - alpha(Q - alpha/2)} / A_0."""
    m, _ = _real_q(m)
    a = params.alpha
    base = m.qpow(-1 / 12) * eta(m)
    return cmath.exp((1 - a * (params.Q - a / 2)) * cmath.log(base)) / a0_closed(params)


def estimate_G(params: BlockParams, m, cfg: MCConfig) -> tuple:
    """(value, stderr) of the probabilistic block; A_0 taken in closed form."""
    value, err = estimate_A_q(params, m, cfg)
    f = g_prefactor(params, m)
    return f * value, abs(f) * err


# ---------------------------------------------------------------------------
# extension beyond alpha = Q

def reflected_exponents(params: BlockParams) -> tuple:
    """(insertion weight 2Q - alpha, Theta exponent, moment power)."""
    g = params.gamma
    a = params.alpha
    ins = 2 * params.Q - a
    return ins, -g * ins / 2, a / g - 4 / g ** 2 - 1


def check_reflected_range(params: BlockParams):
    g = params.gamma
    a = params.alpha
    Q = params.Q
    if not Q < a < 2 * Q:
        raise MomentRangeError(f"alpha = {a} outside (Q, 2Q) = ({Q:.6g}, {2 * Q:.6g})")
    ins, c, p = reflected_exponents(params)
    bound = min(4 / g ** 2, 2 / g * (Q - ins))
    if not p < bound:
        raise MomentRangeError(f"moment power {p:.6g} not below {bound:.6g}")


_LIMIT_WEIGHTS = ((1, 1.5), (2, -0.6), (3, 0.1))


def reflected_prefactor(params: BlockParams, m) -> complex:
    """Explicit factor multiplying the GMC expectation for alpha in (Q, 2Q).

    Individual gamma and double-gamma factors can sit on poles that cancel in
    the product (e.g. gamma = 1, alpha = 4); there the value is taken as the
    even Richardson limit from alpha +- j * 1e-3.
    """
    m, _ = _real_q(m)
    try:
        return _reflected_prefactor(params, m)
    except (PoleError, ZeroDivisionError):
        a = params.alpha
        total = 0j
        for j, w in _LIMIT_WEIGHTS:
            total += w * (_reflected_prefactor(params.replace(alpha=a + j * 1e-3), m)
                          + _reflected_prefactor(params.replace(alpha=a - j * 1e-3), m)) / 2
        return total


def _reflected_prefactor(params: BlockParams, m: ModularParam) -> complex:
    g = params.gamma
    a = params.alpha
    Q = params.Q
    P = complex(params.P)
    e = eta(m)
    log_eta = cmath.log(e)
    val = -m.qpow((1 - a / g - Q * (Q + g / 2 - a)) / 6)
    val *= cmath.exp((1.5 * a * g + 2 * a / g - 2 - 1.5 * a * a + (Q + g / 2 - a) * (3 * a - 4 * Q)) * log_eta)
    p = (Q - a) * (g - a)
    val *= two_pi_phase_pow(p) * cmath.exp(3 * p * log_eta)
    val *= cmath.exp(1j * math.pi * (a * g / 2 - (a - g / 2 - Q) * (a - 2 * Q)))
    val *= cmath.exp((a - g / 2 - Q) * (Q - a) * math.log(2 * math.pi))
    val /= (1 - a / g) * (1 - cmath.exp(math.pi * g * P - 1j * math.pi * g * g / 2 + 1j * math.pi * a * g / 2))
    val *= gamma_complex(-g * g / 4) * gamma_complex(2 * a / g - 1 - 4 / g ** 2) * gamma_complex(1 + 4 / g ** 2 - a / g)
    val /= gamma_complex(a * g / 2 - 1 - g * g / 2) * gamma_complex(1 + g * g / 4 - a * g / 2) * gamma_complex(a / g - 1)
    val *= reflection_coeff(a - g / 2, g / 2, P, g)
    return val


def estimate_reflected_A(params: BlockParams, m, cfg: MCConfig) -> tuple:
    """(value, stderr) of the extension of A^q to alpha in (Q, 2Q)."""
    m, _ = _real_q(m)
    check_reflected_range(params)
    _, c, p = reflected_exponents(params)
    pref = reflected_prefactor(params, m) * cmath.exp(1j * math.pi * c * p)
    est = gmc_moment(c, p, params.gamma, params.P, m, cfg)
    return pref * est.mean, abs(pref) * est.stderr
