import numpy as np
import pytest
from hypothesis import given, strategies as st

from torusblocks.nekrasov import block_series
from torusblocks.qseries import eta_norm_series, pow_real
from torusblocks.specfn import BlockParams
from torusblocks.zamo import (ResidueIndex, ResonantMomentum, _s_mn, p_mn, r_mn, recursion_series, resonance_margin,
                              resubstitution_residual)


@pytest.mark.parametrize("m,n", [(1, 1), (1, 2), (2, 1), (2, 3), (3, 3)])
def test_s_set_size(m, n):
    S = _s_mn(m, n)
    assert len(S) == len(set(S)) == 4 * m * n - 2
    assert (0, 0) not in S and (m, n) not in S


def test_r11_by_hand():
    p = BlockParams(1.2, 0.3, 0.8)
    g, x = p.gamma, p.Q - p.alpha / 2
    num = x * (x - g / 2) * (x - 2 / g) * (x - g / 2 - 2 / g)
    den = (2 / g) * (g / 2)
    assert abs(r_mn(1, 1, p) - 2 * num / den) < 1e-13


def test_r12_by_hand():
    p = BlockParams(0.9, 0.3, 0.5)
    g, x = p.gamma, p.Q - p.alpha / 2
    num = np.prod([x + j * g / 2 + 2 * l / g for j in (-1, 0) for l in (-2, -1, 0, 1)])
    den = np.prod([j * g / 2 + 2 * l / g for j, l in [(0, -1), (0, 1), (0, 2), (1, -1), (1, 0), (1, 1)]])
    assert abs(r_mn(1, 2, p) - 2 * num / den) < 1e-12 * abs(r_mn(1, 2, p))


def test_p_mn():
    assert p_mn(1, 1, 1.0) == 2.5j
    assert p_mn(-2, 1, 2.0) == -1j


def test_residue_index_validation():
    with pytest.raises(ValueError):
        ResidueIndex(0, 1)


@given(st.floats(0.55, 1.8), st.floats(0.05, 1.5), st.floats(-1.0, 2.0))
def test_matches_nekrasov(g, P, alpha):
    p = BlockParams(g, P, alpha)
    a = recursion_series(p, 10).coeffs
    b = block_series(p, 10).coeffs
    assert np.max(np.abs(a - b) / np.maximum(1, np.abs(b))) < 1e-7


def test_alpha_zero_is_inverse_eta():
    p = BlockParams(1.3, 0.4, 0.0)
    assert np.allclose(recursion_series(p, 16).coeffs, pow_real(eta_norm_series(16), -1).coeffs, atol=1e-13)


def test_resonance_raises():
    p = BlockParams(1.0, p_mn(1, 1, 1.0), 0.4)
    with pytest.raises(ResonantMomentum):
        recursion_series(p, 4)
    assert resonance_margin(p, 4) < 1e-12


def test_resubstitution():
    p = BlockParams(1.25, 0.6, 0.9)
    assert resubstitution_residual(p, 12) < 1e-12
