import cmath

import numpy as np
import pytest
from hypothesis import given, strategies as st

from torusblocks.hypergeom import (HGFParams, apply_operator, connection_coeffs, connection_residual, gauss_value,
                                   hyp2f1_coeffs,
                                   hgf_level, hyp2f1, particular_solution, solution_with_value)
from torusblocks.qseries import series
from torusblocks.specfn import BlockParams

PARAMS = [HGFParams(0.3 + 0.2j, -0.4, 1.7), HGFParams(0.5, 0.25, 1.5), HGFParams(-0.2 + 0.1j, 0.35 - 0.3j, 0.8 + 0.1j)]


@pytest.mark.parametrize("p", PARAMS)
def test_gauss_value_at_one(p):
    assert abs(hyp2f1(p, 1.0) - gauss_value(p)) < 1e-10 * abs(gauss_value(p))


def test_hyp2f1_elementary():
    # 2F1(1, 1; 2; w) = -log(1 - w)/w
    for w in (0.3, -0.7, 0.5 + 0.4j):
        assert abs(hyp2f1(HGFParams(1, 1, 2), w) + cmath.log(1 - w) / w) < 1e-13


@given(st.floats(-0.9, 0.9), st.floats(-0.3, 0.3))
def test_connection_identity(x, y):
    w = complex(0.5 + 0.4 * x, y)
    for p in PARAMS:
        assert connection_residual(p, w) < 1e-9


def test_level_parameters():
    params = BlockParams(1.1, 0.4, 0.5)
    for chi in params.chis():
        p = hgf_level(params, chi, 0)
        l = params.l_chi(chi)
        assert abs(p.A + p.B + l) < 1e-14 and abs(p.C - (0.5 - l)) < 1e-14
        g1, g2 = connection_coeffs(p)
        assert np.isfinite(abs(g1)) and np.isfinite(abs(g2))


@pytest.mark.parametrize("X", ["0", "1-C"])
def test_particular_solution_residual(X):
    p = HGFParams(0.3 + 0.1j, -0.45, 0.62)
    g = series([1.0, -0.5, 0.25, 0.1], 3)
    f = particular_solution(g, p, X)
    e = 0.0 if X == "0" else 1 - p.C
    for w in (0.2, 0.45 + 0.1j, 0.6):
        rhs = cmath.exp(e * cmath.log(w)) * g(w)
        assert abs(apply_operator(f, p, w, e) - rhs) < 1e-9


@pytest.mark.parametrize("p", [HGFParams(0.3 + 0.2j, -0.4, 0.6), PARAMS[1]])
def test_solution_with_value_closed_form(p):
    # g = -AB has the constant solution 1, so f_a = 1 + (a - 1) 2F1(w) / 2F1(1)
    a = 2.0 - 0.5j
    f = solution_with_value(series([-p.A * p.B]), p, a)
    expect = (a - 1) * hyp2f1_coeffs(p, 6) / gauss_value(p)
    expect[0] += 1
    assert np.max(np.abs(f.coeffs[:7] - expect)) < 1e-9
    assert abs(f(0.4) - (1 + (a - 1) * hyp2f1(p, 0.4) / gauss_value(p))) < 1e-9
