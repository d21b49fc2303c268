import cmath
import math

import numpy as np
import pytest
from scipy import integrate

from torusblocks.gmc import (FieldLayout, MCConfig, MomentRangeError, _a_prefactor, batch_stderr, cell_weights,
                             check_moment_range, check_reflected_range, estimate_A_q, estimate_G, gmc_moment,
                             mode_exponents, reflected_prefactor, richardson_weights, sample_field, worker_count)
from torusblocks.specfn import BlockParams, ModularParam, abs_theta, eta_norm

SMALL = dict(N_modes=32, grid_points=128, richardson=0)


def test_fft_matches_direct_sum():
    cfg = MCConfig(**SMALL)
    s = sample_field(np.random.default_rng(1), 0.3, cfg)
    M = cfg.grid_points
    x = (np.arange(M) + 0.5) / M
    assert np.max(np.abs(s.grid_values(M) - s.y_tau(x))) < 1e-11


def test_f_variance_is_log_eta():
    q = 0.3
    lay = FieldLayout(8, q, 1e-14)
    assert abs(lay.variance_f() + 4 * math.log(eta_norm(q).real)) < 1e-12


def test_empirical_covariance():
    cfg = MCConfig(**SMALL)
    rng = np.random.default_rng(7)
    x, y = 0.2, 0.35
    draws = np.array([[s.y_tau(x), s.y_tau(y)] for s in (sample_field(rng, 0.4, cfg) for _ in range(4000))])
    lay = FieldLayout(32, 0.4, cfg.f_cutoff)
    n = np.arange(1, 33)
    cov_inf = np.sum(2 / n * np.cos(2 * math.pi * n * (x - y)))
    pn, amp = lay.pair_arrays()
    cov_f = np.sum(amp ** 2 * np.cos(2 * math.pi * pn * (x - y)))
    emp = np.cov(draws.T)
    assert abs(emp[0, 0] - lay.variance()) < 0.08 * lay.variance()
    assert abs(emp[0, 1] - (cov_inf + cov_f)) < 0.15


def test_cell_weights_against_quad():
    g, P, m = 0.8, 0.4, ModularParam.from_q(0.2)
    c = 0.6
    M = 64
    W = cell_weights(M, c, g, P, m)
    f = lambda x: abs_theta(x, m) ** c * math.exp(math.pi * g * P * x)
    for j in (0, 5, M - 1):
        ref, _ = integrate.quad(f, j / M, (j + 1) / M, epsabs=1e-15, epsrel=1e-13)
        assert abs(W[j] - ref) < 1e-11 * ref
    with pytest.raises(MomentRangeError):
        cell_weights(M, -1.0, g, P, m)


def test_unit_weight_mean_is_one():
    cfg = MCConfig(samples=4000, **SMALL)
    est = gmc_moment(0.0, 1.0, 1.0, 0.0, 0.2, cfg)
    assert abs(est.mean - 1) < 4 * est.stderr


def test_second_moment_double_integral():
    g, q = 0.9, 0.25
    cfg = MCConfig(samples=20000, **SMALL)
    est = gmc_moment(0.0, 2.0, g, 0.0, q, cfg)
    M = cfg.grid_points
    x = (np.arange(M) + 0.5) / M
    d = x[:, None] - x[None, :]
    lay = FieldLayout(32, q, cfg.f_cutoff)
    n = np.arange(1, 33)
    C = np.sum(2 / n * np.cos(2 * math.pi * n * d[..., None]), axis=-1)
    pn, amp = lay.pair_arrays()
    C += np.sum(amp ** 2 * np.cos(2 * math.pi * pn * d[..., None]), axis=-1)
    ref = np.sum(np.exp(g * g / 4 * C)) / M ** 2
    assert abs(est.mean - ref) < 4 * est.stderr


def test_richardson_weights():
    for levels in (1, 2):
        w = richardson_weights(levels, 1.0, 0.3)
        assert abs(w.sum() - 1) < 1e-13
        k = np.arange(levels, -1, -1)
        for s in mode_exponents(1.0, 0.3)[:levels]:
            assert abs(np.sum(w * 2.0 ** (k * s))) < 1e-12
    assert np.array_equal(richardson_weights(0, 1.0, 0.3), [1.0])
    with pytest.raises(MomentRangeError):
        richardson_weights(1, 1.5, 0.0)


def test_alpha_zero_exact():
    p = BlockParams(1.0, 0.3, 0.0)
    v, e = estimate_A_q(p, 0.2, MCConfig(samples=10))
    assert e == 0.0
    m = ModularParam.from_q(0.2)
    assert v == _a_prefactor(p, m)


def test_phase_of_estimate():
    p = BlockParams(0.8, 0.4, -0.8)
    v, _ = estimate_A_q(p, 0.2, MCConfig(samples=500, **SMALL))
    pref = _a_prefactor(p, ModularParam.from_q(0.2))
    assert abs(cmath.phase(v) - cmath.phase(pref)) < 1e-12
    assert abs(cmath.phase(pref) - math.remainder(math.pi * 0.64 / 2, 2 * math.pi)) < 1e-12


def test_block_estimate_near_one_small_q():
    p = BlockParams(0.8, 0.4, -0.8)
    v, e = estimate_G(p, 0.02, MCConfig(samples=4000, N_modes=128, grid_points=512))
    assert abs(v - 1) < 4 * e + 1e-3


def test_moment_range():
    with pytest.raises(MomentRangeError):
        check_moment_range(BlockParams(1.0, 0.3, 2.6))
    with pytest.raises(MomentRangeError):
        check_moment_range(BlockParams(1.0, 0.3, -4.1))
    with pytest.raises(MomentRangeError):
        check_moment_range(BlockParams(1.5, 0.3, 1.4))  # alpha gamma / 2 >= 1
    check_moment_range(BlockParams(1.0, 0.3, 1.2))


@pytest.mark.parametrize("alpha", [2.4, 5.0, 5.1, 1.0])
def test_reflected_range_flags(alpha):
    # Q = 2.5, 2Q = 5 at gamma = 1
    with pytest.raises(MomentRangeError):
        check_reflected_range(BlockParams(1.0, 0.4, alpha))


def test_reflected_range_accepts_interior():
    check_reflected_range(BlockParams(1.0, 0.4, 3.3))


def test_reflected_prefactor_at_removable_pole():
    # gamma and double-gamma poles cancel at gamma = 1, alpha = 4 and the product vanishes there
    m = ModularParam.from_q(0.1)
    at = reflected_prefactor(BlockParams(1.0, 0.4, 4.0), m)
    assert np.isfinite(abs(at))
    f = lambda a: reflected_prefactor(BlockParams(1.0, 0.4, a), m)
    even = [(f(4 + e) + f(4 - e)) / 2 for e in (0.005, 0.01)]
    extrap = (4 * even[0] - even[1]) / 3
    assert abs(at - extrap) < 1e-3 * abs(f(4.005))


def test_thread_determinism():
    p = BlockParams(0.8, 0.4, -0.8)
    a = estimate_A_q(p, 0.2, MCConfig(samples=3000, threads=1, **SMALL))
    b = estimate_A_q(p, 0.2, MCConfig(samples=3000, threads=3, **SMALL))
    assert a == b


def test_worker_count_env(monkeypatch):
    monkeypatch.setenv("TORUS_BLOCKS_THREADS", "4")
    assert worker_count(MCConfig()) == 4
    assert worker_count(MCConfig(threads=2)) == 2
    monkeypatch.setenv("TORUS_BLOCKS_THREADS", "x")
    with pytest.raises(ValueError):
        worker_count(MCConfig())


@pytest.mark.parametrize("kw", [dict(samples=0), dict(f_cutoff=2.0), dict(N_modes=512, grid_points=1000),
                                dict(seed=-1), dict(richardson=3), dict(N_modes=30)])
def test_config_validation(kw):
    with pytest.raises(ValueError):
        MCConfig(**kw)


def test_batch_stderr():
    v = np.random.default_rng(3).standard_normal(100_000)
    assert abs(batch_stderr(v) - 1 / math.sqrt(v.size)) < 0.3 / math.sqrt(v.size)
    assert math.isnan(batch_stderr(np.ones(1)))
