import math

import numpy as np
import pytest
from scipy import integrate, special

from torusblocks.dotsenko import (DFConfig, ExtractionError, QuadratureError, chebyshev_nodes, df_A_q, df_A_q_result,
                                  df_A_tilde, df_coefficients, df_integral, evenness_residual, extract_q_coeffs,
                                  gauss_jacobi01, verify_momentum_shift)
from torusblocks.nekrasov import instanton_series
from torusblocks.qseries import eta_norm_series, pow_real
from torusblocks.specfn import BlockParams, ModularParam, abs_theta, eta_norm


@pytest.mark.parametrize("a,b", [(0.32, 0.32), (0.5, 0.0), (-0.4, 1.3)])
def test_gauss_jacobi_moments(a, b):
    t, w = gauss_jacobi01(12, a, b)
    for k in range(10):
        assert abs(np.sum(w * t ** k) - special.beta(a + k + 1, b + 1)) < 1e-13


def test_n1_against_adaptive_quadrature():
    g, P, m = 0.8, 0.5, ModularParam.from_q(0.2)
    c = g * g / 2
    ref, _ = integrate.quad(lambda x: abs_theta(x, m) ** c * math.exp(math.pi * g * P * x), 0, 1,
                            epsabs=1e-13, epsrel=1e-12)
    assert abs(abs(df_integral(1, g, P, m, 40)) - ref) < 1e-11


@pytest.mark.slow
def test_n2_against_adaptive_quadrature():
    g, P, m = 0.8, 0.5, ModularParam.from_q(0.2)

    def f(y, x):
        return ((abs_theta(x, m) * abs_theta(y, m)) ** (g * g) * abs_theta(y - x, m) ** (-g * g / 2)
                * math.exp(math.pi * g * P * (x + y)))

    ref, _ = integrate.dblquad(f, 0, 1, lambda x: x, 1, epsabs=1e-8, epsrel=1e-7)
    val = abs(df_integral(2, g, P, m, 30))
    assert abs(val - 2 * ref) < 1e-6 * val


def test_phase():
    g, m = 0.9, ModularParam.from_q(0.15)
    for N in (1, 2):
        z = df_integral(N, g, 0.3, m, 30)
        arg = np.angle(z)
        expect = math.remainder(math.pi * N * N * g * g / 2, 2 * math.pi)
        assert abs(arg - expect) < 1e-12


@pytest.mark.parametrize("N", [1, 2])
def test_refinement(N):
    cfg = DFConfig(N=N, quad_points=40)
    res = df_A_q_result(cfg, 0.8, 0.4, 0.25)
    assert res.error < 1e-12 * abs(res.value)
    finer = df_A_q(DFConfig(N=N, quad_points=60), 0.8, 0.4, 0.25)
    assert abs(finer - res.value) < 1e-12 * abs(res.value)


def test_unconverged_raises():
    with pytest.raises(QuadratureError):
        df_A_q(DFConfig(N=2, quad_points=4, tol=1e-14), 0.8, 0.4, 0.3)


def test_range_checks():
    with pytest.raises(ValueError):
        df_A_q(DFConfig(N=3), 1.2, 0.3, 0.1)  # N >= 4/gamma^2
    with pytest.raises(ValueError):
        df_A_q(DFConfig(N=2), 1.45, 0.3, 0.1)
    with pytest.raises(NotImplementedError):
        df_A_q(DFConfig(N=3), 0.5, 0.3, 0.1)
    with pytest.raises(ValueError):
        df_A_q(DFConfig(), 0.8, 0.3, 1.2)
    with pytest.raises(ValueError):
        DFConfig(N=0)


@pytest.mark.parametrize("N", [1, 2])
def test_even_in_P(N):
    assert evenness_residual(DFConfig(N=N), 0.8, 0.45, 0.2) < 1e-12


@pytest.mark.parametrize("N,m,n", [(1, 1, 1), (2, 1, 1), (2, 2, 1), (1, 1, 2)])
def test_momentum_shift(N, m, n):
    rep = verify_momentum_shift(DFConfig(N=N), 0.8, m, n, 0.2)
    assert rep.passed, rep.residual


def test_small_q_limit():
    assert abs(df_A_tilde(DFConfig(), 0.8, 0.4, 1e-3) - 1) < 1e-5


def test_extract_polynomial():
    # monomial conversion amplifies rounding by about (2/q_max)^k
    ex = extract_q_coeffs(lambda q: 1 + 3 * q * q, 6)
    assert np.max(np.abs(ex.series.coeffs - [1, 0, 3, 0, 0, 0, 0])) < 1e-8
    assert ex.fit_residual < 1e-14


def test_extract_eta_round_trip():
    ex = extract_q_coeffs(lambda q: eta_norm(q).real ** -5, 10, eta_weight=5)
    ref = pow_real(eta_norm_series(10), -5).coeffs
    assert np.max(np.abs(ex.series.coeffs[:7] - ref[:7]) / np.abs(ref[:7] + (ref[:7] == 0))) < 1e-7
    auto = extract_q_coeffs(lambda q: eta_norm(q).real ** -5, 10, eta_weight="auto")
    assert auto.eta_weight == 5


def test_extract_validation():
    with pytest.raises(ExtractionError):
        extract_q_coeffs(lambda q: 1.0, 10, n_nodes=8)
    with pytest.raises(ExtractionError):
        extract_q_coeffs(lambda q: 1.0, 4, q_max=1.5)
    nodes = chebyshev_nodes(9, 0.3)
    assert np.all((nodes > 0) & (nodes < 0.3))


def test_n1_coefficients_match_block():
    g, P = 0.8, 0.5
    ex = df_coefficients(DFConfig(N=1), g, P)
    ref = instanton_series(BlockParams(g, P, -g), 16).coeffs
    err = np.abs(ex.series.coeffs[:7] - ref[:7]) / np.maximum(1, np.abs(ref[:7]))
    assert np.max(err) < 1e-5
