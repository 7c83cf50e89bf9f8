import numpy as np
import pytest

from qamfbmc.channel import default_sample_rate, pdp_preset, realize_channel
from qamfbmc.equalizer import (
    ZF_FLOOR,
    CsiState,
    equalizer_gains,
    gains_with_estimation_error,
    interference_noise_variance,
    mmse_gains,
    zf_gains,
)
from qamfbmc.filterbank import SirReport
from qamfbmc.numerics import RngStream, gaussian_complex


def eva_response(i, n=1024):
    return realize_channel(pdp_preset("eva"), default_sample_rate(256), RngStream(31, i)).frequency_response(n)


def test_zf_inverts_channel():
    h = eva_response(0)
    g = zf_gains(CsiState(h))
    np.testing.assert_allclose(g.gains * h, 1.0, atol=1e-12)
    assert g.kind == "zf" and g.csi == "perfect"
    assert np.asarray(g).shape == h.shape


def test_cp_ofdm_two_tap_recovery():
    X = np.exp(2j * np.pi * np.random.default_rng(0).random(32))
    h = np.array([1.0, 0.0, 0.4 - 0.3j])
    x = np.fft.ifft(X)
    tx = np.r_[x[-4:], x]
    rx = np.convolve(tx, h)[4 : 4 + 32]
    est = zf_gains(CsiState(np.fft.fft(h, 32))).gains * np.fft.fft(rx)
    np.testing.assert_allclose(est, X, atol=1e-10)


def test_mmse_formula():
    h = np.array([1.0, 0.5j, -2.0])
    g = mmse_gains(CsiState(h, 0.25)).gains
    np.testing.assert_allclose(g, np.conj(h) / (np.abs(h) ** 2 + 0.25))


def test_mmse_at_zero_noise_is_zf():
    h = eva_response(1)
    np.testing.assert_array_equal(mmse_gains(CsiState(h, 0.0)).gains, zf_gains(CsiState(h)).gains)


def test_mmse_converges_to_zf_monotonically():
    for i in range(10):
        h = eva_response(i)
        zf = zf_gains(CsiState(h)).gains
        diffs = [np.max(np.abs(mmse_gains(CsiState(h, s)).gains - zf)) for s in (1, 1e-2, 1e-4, 1e-8)]
        assert all(b < a for a, b in zip(diffs, diffs[1:]))


def test_mmse_zf_difference_closed_form():
    # g_zf - g_mmse = sigma2 conj(h) / (|h|^2 (|h|^2 + sigma2)), so it is at most sigma2/|h|^3
    h = eva_response(2)
    s2 = 1e-8
    d = zf_gains(CsiState(h)).gains - mmse_gains(CsiState(h, s2)).gains
    a2 = np.abs(h) ** 2
    np.testing.assert_allclose(d, s2 * np.conj(h) / (a2 * (a2 + s2)), rtol=1e-6, atol=1e-18)
    assert np.all(np.abs(d) <= s2 / np.abs(h) ** 3 * (1 + 1e-6))


def test_zf_scale_equivariance():
    h = eva_response(3)
    alpha = 0.7 - 1.3j
    np.testing.assert_allclose(zf_gains(CsiState(alpha * h)).gains, zf_gains(CsiState(h)).gains / alpha, rtol=1e-12)


def test_zf_clamps_nulls():
    h = np.array([1.0, 1e-9, 0.0, 0.5])
    g = zf_gains(CsiState(h)).gains
    assert np.all(np.isfinite(g))
    assert g[2] == 0
    assert abs(g[1]) == pytest.approx(1e-9 / 1e-12)
    assert abs(g[3]) == pytest.approx(2.0)
    assert ZF_FLOOR == 1e-6
    assert np.all(zf_gains(CsiState(np.zeros(3))).gains == 0)


def test_mmse_per_bin_mse_not_above_zf():
    # scalar model y = h s + n with E|s|^2 = 1 and E|n|^2 = s2; mse(g) = |g h - 1|^2 + |g|^2 s2
    h = eva_response(4)
    for s2 in (1e-3, 0.1, 1.0):
        gm = mmse_gains(CsiState(h, s2)).gains
        gz = zf_gains(CsiState(h)).gains
        mse = lambda g: np.abs(g * h - 1) ** 2 + np.abs(g) ** 2 * s2
        assert np.all(mse(gm) <= mse(gz) + 1e-12)


def test_estimation_error_uses_only_the_estimate():
    h = eva_response(5)
    est = h + gaussian_complex(RngStream(4), 0.01, h.shape)
    g = gains_with_estimation_error(CsiState(h, 0.1), "mmse", est)
    assert g.csi == "perturbed"
    np.testing.assert_allclose(g.gains, mmse_gains(CsiState(est, 0.1)).gains)
    other = gains_with_estimation_error(CsiState(2 * h, 0.1), "mmse", est)
    np.testing.assert_array_equal(other.gains, g.gains)


def test_zf_distortion_grows_with_error():
    rng = RngStream(5)
    h = np.tile(eva_response(6, 256), 40)
    curve = []
    for s in (1e-4, 1e-3, 1e-2, 1e-1):
        est = h + gaussian_complex(rng.child(int(-np.log10(s))), s, h.shape)
        g = gains_with_estimation_error(CsiState(h), "zf", est).gains
        curve.append(np.median(np.abs(g * h - 1) ** 2))
    assert curve[0] > 0
    assert all(b > a for a, b in zip(curve, curve[1:]))


def test_dispatch_and_validation():
    h = np.ones(4)
    assert equalizer_gains(CsiState(h), "zf").kind == "zf"
    assert equalizer_gains(CsiState(h, 1.0), "mmse").kind == "mmse"
    with pytest.raises(ValueError):
        equalizer_gains(CsiState(h), "lmmse")
    with pytest.raises(ValueError):
        CsiState(np.array([np.nan]))
    with pytest.raises(ValueError):
        CsiState(h, -1.0)


def test_interference_noise_variance():
    rep = SirReport(np.ones(4), np.zeros(4), np.full(4, 0.02))
    assert interference_noise_variance(None, 0.1) == pytest.approx(0.1)
    assert interference_noise_variance(rep, 0.1, 0.25) == pytest.approx((0.1 + rep.mean_interference) / 0.25)
    with pytest.raises(ValueError):
        interference_noise_variance(None, -1.0)
