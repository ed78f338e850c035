import dataclasses
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import random_phase
from crossris import linkmodel as lm
from crossris.channel import draw_channel_set
from crossris.config import SystemConfig
from oracles import surrogate_terms_mp


def unit_channels(N=1, M=1, P=4.0, sigma=1.0, rho_si=0.5, li=1.0):
    cfg = SystemConfig(N=N, M=M)
    ch = draw_channel_set(cfg, np.random.default_rng(0))
    one_v = (np.ones(N, complex), np.ones(N, complex))
    return dataclasses.replace(
        ch, h_r=one_v, g_r=one_v, g_ap=one_v, H_0=(np.ones((M, N), complex),) * 2,
        power=np.full(2, P), noise_up=np.full(2, sigma), noise_down=np.full(2, li * sigma),
        rho_si=rho_si, bandwidth=np.ones(2))


def test_cascade_unit_channels():
    ch = unit_channels(N=1, M=4, P=4.0)
    np.testing.assert_allclose(lm.cascade(ch, np.ones(1), "1U"), np.full(4, 2.0))
    assert lm.cascade(ch, np.zeros(1), "2D") == 0


def test_cascade_summation_oracle():
    cfg = SystemConfig(N=2, M=3)
    ch = draw_channel_set(cfg, np.random.default_rng(1))
    phi = random_phase(np.random.default_rng(2), 2)
    for i in range(2):
        sp = math.sqrt(ch.power[i])
        up = sum(sp * ch.H_0[i][:, n] * phi[n] * ch.h_r[i][n] for n in range(2))
        down = sum(sp * ch.g_r[i][n] * phi[n] * ch.h_r[i][n] for n in range(2))
        np.testing.assert_allclose(lm.cascade(ch, phi, f"{i + 1}U"), up, rtol=1e-13)
        assert lm.cascade(ch, phi, f"{i + 1}D") == pytest.approx(down, rel=1e-13)
    assert np.allclose(lm.cascade(ch, np.zeros(2), "1U"), 0)


def test_cascade_rejects_wrong_length(channels):
    with pytest.raises(ValueError):
        lm.cascade(channels, np.ones(3), "1U")
    with pytest.raises(ValueError):
        lm.cascade(channels, np.ones(channels.N), "3U")


def test_mmse_scalar_examples():
    assert lm.mmse_receiver(1.0, 1.0) == pytest.approx(0.5)
    assert lm.mmse_receiver(0.0, 1.0) == 0
    np.testing.assert_array_equal(lm.mmse_receiver(np.zeros(4), 1.0), np.zeros(4))


def test_mmse_matches_matrix_inverse():
    rng = np.random.default_rng(3)
    for _ in range(20):
        h = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        s2 = rng.uniform(0.1, 2.0)
        ref = np.linalg.solve(np.outer(h, h.conj()) + s2 * np.eye(4), h)
        np.testing.assert_allclose(lm.mmse_receiver(h, s2), ref, rtol=1e-12)


def test_mmse_beats_random_beamformers():
    rng = np.random.default_rng(4)
    h = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    best = lm.beamformer_sinr(h, lm.mmse_receiver(h, 0.3), 0.3)
    for _ in range(100):
        w = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        w /= np.linalg.norm(w)
        assert lm.beamformer_sinr(h, w, 0.3) <= best * (1 + 1e-12)
    assert best == pytest.approx(np.vdot(h, h).real / 0.3, rel=1e-10)


def test_sinr_examples():
    ch = unit_channels(N=1, M=1, P=2.0, sigma=1.0)
    assert lm.sinr(ch, np.ones(1), "1U") == pytest.approx(2.0)
    ch = unit_channels(N=1, M=1, P=1.0, sigma=0.5, rho_si=0.5)
    assert lm.sinr(ch, np.ones(1), "1D") == pytest.approx(1.0)


@given(st.floats(-30.0, 60.0))
def test_downlink_sinr_ceiling(power_dbm):
    cfg = SystemConfig(power_dbm=power_dbm)
    ch = draw_channel_set(cfg, np.random.default_rng(5))
    for link in ("1D", "2D"):
        assert lm.sinr(ch, np.ones(cfg.N), link) < 1.0 / cfg.rho_si


def test_capacity_examples():
    assert lm.capacity(1.0, 0.0) == 0.0
    assert lm.capacity(10e6, 1.0) == pytest.approx(10e6)
    assert lm.capacity(1.0, 3.0) == pytest.approx(2.0)
    with pytest.raises(ValueError):
        lm.capacity(1.0, -1.0)


def test_mse_examples():
    ch = unit_channels(N=1, M=1, P=1.0, sigma=1.0)
    assert lm.mse(ch, np.ones(1), np.array([0.5]), "1U") == pytest.approx(0.5)
    assert lm.mse(ch, np.ones(1), np.zeros(1), "1U") == pytest.approx(1.0)
    assert lm.mse(ch, np.ones(1), 0.0, "1D") == pytest.approx(1.0)


def test_weight_and_surrogate_examples():
    assert lm.optimal_weight(0.5) == 2.0
    assert lm.optimal_weight(1.0) == 1.0
    assert lm.surrogate_rate(1.0, 2.0, 0.5) == pytest.approx(1.0)
    assert lm.surrogate_rate(1.0, 1.0, 1.0) == pytest.approx(0.0)
    for e in (0.1, 0.5, 0.9):
        peak = lm.surrogate_rate(1.0, 1 / e, e)
        assert peak >= lm.surrogate_rate(1.0, 1 / e + 0.1, e)
        assert peak >= lm.surrogate_rate(1.0, 1 / e - 0.1, e)
    with pytest.raises(ValueError):
        lm.optimal_weight(0.0)


@pytest.mark.parametrize("seed", range(10))
def test_mse_deficit_complements_mse(seed):
    ch, phi = _instance(seed)
    rng = np.random.default_rng(seed)
    for link in lm.LINKS:
        w = rng.standard_normal(4) + 1j * rng.standard_normal(4) if link[1] == "U" else complex(rng.normal(), rng.normal())
        w = w * 1e-3
        e, d = lm.mse(ch, phi, w, link), lm.mse_deficit(ch, phi, w, link)
        assert e + d == pytest.approx(1.0, abs=1e-12)


def test_surrogate_deficit_form_matches_plain_form():
    for mu, e in ((2.0, 0.5), (1.3, 0.6), (5.0, 0.01), (1.0, 1.0)):
        assert lm.surrogate_rate(3.0, mu, e, deficit=1 - e) == pytest.approx(lm.surrogate_rate(3.0, mu, e), abs=1e-12)


def test_surrogate_deficit_form_tiny_sinr():
    ch = unit_channels(N=1, M=1, P=1e-10, sigma=1.0)
    phi = np.ones(1)
    bf = lm.beamformers(ch, phi)
    w = lm._w_for(bf, "1U")
    e, d = lm.mse(ch, phi, w, "1U"), lm.mse_deficit(ch, phi, w, "1U")
    got = lm.surrogate_rate(1.0, lm.optimal_weight(e), e, deficit=d)
    assert got == pytest.approx(math.log2(1 + 1e-10), rel=1e-12)


def test_aux_weights_positive():
    with pytest.raises(ValueError):
        lm.AuxWeights(mu_up=np.array([1.0, -1.0]), mu_down=np.ones(2))


def _instance(seed):
    rng = np.random.default_rng(seed)
    cfg = SystemConfig(power_dbm=rng.uniform(0, 40), rho_si=rng.uniform(0.05, 1.0))
    ch = draw_channel_set(cfg, rng)
    return ch, random_phase(rng, cfg.N, relaxed=bool(seed % 2))


@pytest.mark.parametrize("seed", range(10))
def test_mmse_sinr_identity(seed):
    ch, phi = _instance(seed)
    bf = lm.beamformers(ch, phi)
    for link in lm.LINKS:
        g = lm.sinr(ch, phi, link)
        e = lm.mse(ch, phi, lm._w_for(bf, link), link)
        assert e == pytest.approx(1.0 / (1.0 + g), rel=1e-10)


@pytest.mark.parametrize("seed", range(10))
def test_uplink_mmse_equals_mrc(seed):
    ch, phi = _instance(seed)
    bf = lm.beamformers(ch, phi)
    for i in range(2):
        h = lm.cascade(ch, phi, f"{i + 1}U")
        mrc = np.vdot(h, h).real / ch.noise_up[i]
        assert lm.beamformer_sinr(h, bf.w_up[i], ch.noise_up[i]) == pytest.approx(mrc, rel=1e-10)


@pytest.mark.parametrize("seed", range(5))
def test_quad_forms_match_direct_evaluation(seed):
    ch, phi0 = _instance(seed)
    bf = lm.beamformers(ch, phi0)
    mu = lm.aux_weights(ch, phi0, bf)
    slots = np.array([0.3, 0.7, 0.7, 0.3])
    forms = lm.quad_forms(ch, bf, mu, slots)
    rng = np.random.default_rng(100 + seed)
    for _ in range(20):
        phi = random_phase(rng, ch.N, relaxed=True)
        got = np.array([f.value(phi) for f in forms])
        np.testing.assert_allclose(got, surrogate_terms_mp(ch, phi, bf, mu, slots), rtol=1e-9)


def test_quad_forms_structure(channels):
    phi = np.ones(channels.N)
    bf = lm.beamformers(channels, phi)
    mu = lm.aux_weights(channels, phi, bf)
    base = lm.quad_forms(channels, bf, mu, np.ones(4))
    doubled = lm.quad_forms(channels, bf, mu, np.array([2.0, 1.0, 1.0, 1.0]))
    for f in base:
        assert np.allclose(f.B, f.B.conj().T)
        assert np.linalg.eigvalsh(f.B).min() >= -1e-9 * np.abs(f.B).max()
        np.testing.assert_allclose(f.factor.conj().T @ f.factor, f.B, rtol=1e-12, atol=0)
    np.testing.assert_allclose(doubled[0].A, 2 * base[0].A)
    np.testing.assert_allclose(doubled[0].B, 2 * base[0].B)
    assert doubled[0].C == pytest.approx(2 * base[0].C)
    np.testing.assert_array_equal(doubled[1].A, base[1].A)
    small = SystemConfig(N=1)
    ch1 = draw_channel_set(small, np.random.default_rng(0))
    bf1 = lm.beamformers(ch1, np.ones(1))
    for f in lm.quad_forms(ch1, bf1, lm.aux_weights(ch1, np.ones(1), bf1), np.ones(4)):
        assert f.B.shape == (1, 1) and f.B[0, 0].imag == 0 and f.B[0, 0].real >= 0


def test_quad_form_value_is_real_and_vectorized(channels):
    rng = np.random.default_rng(9)
    phi = np.ones(channels.N)
    bf = lm.beamformers(channels, phi)
    forms = lm.quad_forms(channels, bf, lm.aux_weights(channels, phi, bf), np.ones(4))
    batch = np.array([random_phase(rng, channels.N, relaxed=True) for _ in range(5)])
    vals = forms[2].value(batch)
    assert vals.dtype == float and vals.shape == (5,)
    np.testing.assert_allclose(vals, [forms[2].value(p) for p in batch], rtol=1e-12)


def _fd_gradient(form, phi, h=1e-6):
    g = np.zeros_like(phi)
    for n in range(phi.size):
        e = np.zeros_like(phi)
        e[n] = h
        dx = (form.value(phi + e) - form.value(phi - e)) / (2 * h)
        dy = (form.value(phi + 1j * e) - form.value(phi - 1j * e)) / (2 * h)
        g[n] = 0.5 * (dx + 1j * dy)
    return g


@pytest.mark.parametrize("seed", range(5))
def test_gradient_matches_finite_differences(seed):
    rng = np.random.default_rng(seed)
    N = 4
    A = rng.standard_normal(N) + 1j * rng.standard_normal(N)
    X = rng.standard_normal((N, N)) + 1j * rng.standard_normal((N, N))
    form = lm.QuadForm(A=A, B=X.conj().T @ X, C=rng.standard_normal())
    phi = random_phase(rng, N, relaxed=True)
    g = form.gradient(phi)
    np.testing.assert_allclose(g, _fd_gradient(form, phi), rtol=1e-5, atol=1e-5 * np.abs(g).max())
