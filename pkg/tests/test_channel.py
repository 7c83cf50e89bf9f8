import numpy as np
import pytest

from qamfbmc.channel import (
    PDP_PRESETS,
    ChannelRealization,
    PhaseNoiseParams,
    PowerDelayProfile,
    add_awgn,
    apply_channel,
    apply_phase_noise,
    default_sample_rate,
    pdp_preset,
    perturb_channel_estimate,
    phase_noise_preset,
    phase_noise_trajectory,
    realize_channel,
)
from qamfbmc.numerics import RngStream
from qamfbmc.txrx import FrameBuffer


def test_default_sample_rate():
    assert default_sample_rate(1024) == pytest.approx(15.36e6)


def test_eva_preset_values():
    eva = pdp_preset("eva")
    assert len(eva.delays_s) == 9
    assert eva.delays_s[-1] == pytest.approx(2.51e-6)
    assert eva.powers_db[0] == 0.0 and eva.powers_db[-1] == -16.9
    assert not PDP_PRESETS["awgn"].fading
    with pytest.raises(ValueError):
        pdp_preset("etu")


def test_pdp_validation():
    with pytest.raises(ValueError):
        PowerDelayProfile((), ())
    with pytest.raises(ValueError):
        PowerDelayProfile((0.0, 1e-7), (0.0,))
    with pytest.raises(ValueError):
        PowerDelayProfile((1e-7, 1e-7), (0.0, 0.0))
    with pytest.raises(ValueError):
        PowerDelayProfile((-1e-9,), (0.0,))


def test_awgn_channel_is_identity():
    ch = realize_channel(pdp_preset("awgn"), 3.84e6, RngStream(1))
    assert ch.h.tolist() == [1.0]


def test_eva_realization_taps_and_energy():
    fs = default_sample_rate(256)
    ch = realize_channel(pdp_preset("eva"), fs, RngStream(2))
    assert len(ch) == round(2.51e-6 * fs) + 1
    assert np.vdot(ch.h, ch.h).real == pytest.approx(1.0)
    assert realize_channel(pdp_preset("eva"), fs, RngStream(2)).h.tolist() == ch.h.tolist()


def test_eva_average_tap_powers():
    # 1 us rounds to sample 4 at 3.84 MHz
    fs = 3.84e6
    pdp = PowerDelayProfile((0.0, 1e-6), (0.0, -6.0))
    p = np.mean([np.abs(realize_channel(pdp, fs, RngStream(3, i)).h) ** 2 for i in range(4000)], axis=0)
    assert len(p) == 5 and p[0] > p[4] > 0
    assert np.sum(p[1:4]) == 0.0
    ratio = np.mean([
        np.abs(np.fft.fft(realize_channel(pdp, fs, RngStream(4, i)).h)) ** 2 for i in range(200)
    ])
    assert ratio == pytest.approx(1.0, rel=1e-9)


def test_realization_checks():
    with pytest.raises(ValueError):
        ChannelRealization(np.array([]))
    with pytest.raises(ValueError):
        realize_channel(pdp_preset("eva"), 0.0, RngStream(1))
    with pytest.raises(ValueError):
        ChannelRealization(np.ones(4)).frequency_response(3)


def test_frequency_response_matches_dft_sum():
    h = np.array([1.0, 0.5j, -0.25])
    n = 8
    ref = [sum(h[t] * np.exp(-2j * np.pi * k * t / n) for t in range(3)) for k in range(n)]
    np.testing.assert_allclose(ChannelRealization(h).frequency_response(n), ref, atol=1e-14)


def test_apply_channel_keeps_frame_metadata():
    f = FrameBuffer(np.ones(8, dtype=complex), 4, 8)
    out = apply_channel(f, ChannelRealization(np.array([1.0, 1.0])))
    assert isinstance(out, FrameBuffer) and len(out) == 9 and out.spacing == 4
    assert out.samples.tolist() == [1] + [2] * 7 + [1]


def test_awgn_noise_level():
    rng = RngStream(5)
    x = np.exp(2j * np.pi * np.random.default_rng(0).random(400_000))  # unit power
    noisy, N0 = add_awgn(x, 3.0, 2, 1.0, rng)
    assert N0 == pytest.approx(1 / (2 * 10**0.3))
    assert np.mean(np.abs(noisy - x) ** 2) == pytest.approx(N0, rel=0.01)


def test_awgn_region_and_scale():
    x = np.r_[np.zeros(100), 2 * np.ones(100)].astype(complex)
    _, N0 = add_awgn(x, 0.0, 2, 0.5, RngStream(6), region=slice(100, 200), symbol_energy_scale=1.5)
    assert N0 == pytest.approx(4 * 1.5 / (2 * 0.5))
    with pytest.raises(ValueError):
        add_awgn(np.zeros(4), 0.0, 2, 1.0, RngStream(6))
    with pytest.raises(ValueError):
        add_awgn(x, 0.0, 2, 1.0, RngStream(6), region=slice(0, 0))


def test_phase_noise_presets_scale_with_carrier():
    lo, hi = phase_noise_preset("pn-3.5GHz"), phase_noise_preset("pn-28GHz")
    assert lo.effective_variance == pytest.approx(1e-6)
    assert hi.effective_variance == pytest.approx(64e-6)
    assert phase_noise_preset("none") is None
    assert phase_noise_preset("pn-28GHz", 2e-6).effective_variance == pytest.approx(128e-6)
    with pytest.raises(ValueError):
        phase_noise_preset("pn-60GHz")
    with pytest.raises(ValueError):
        PhaseNoiseParams(-1.0, 1e9)


def test_phase_noise_increments():
    p = PhaseNoiseParams(4e-4, 3.5e9)
    phi = phase_noise_trajectory(200_001, p, RngStream(7))
    assert phi[0] == 0.0
    d = np.diff(phi)
    assert np.var(d) == pytest.approx(4e-4, rel=0.02)
    assert abs(np.corrcoef(d[:-1], d[1:])[0, 1]) < 0.01
    assert phase_noise_trajectory(0, p, RngStream(7)).size == 0


def test_phase_noise_variance_grows_linearly():
    p = PhaseNoiseParams(1e-4, 3.5e9)
    ends = np.array([phase_noise_trajectory(101, p, RngStream(8, i))[-1] for i in range(4000)])
    assert np.var(ends) == pytest.approx(100 * 1e-4, rel=0.08)


def test_apply_phase_noise_modes():
    x = np.ones(3, dtype=complex)
    phi = np.array([0.0, 0.1, -0.2])
    np.testing.assert_allclose(apply_phase_noise(x, phi), np.exp(1j * phi))
    np.testing.assert_allclose(apply_phase_noise(x, phi, "linearized"), 1 + 1j * phi)
    with pytest.raises(ValueError):
        apply_phase_noise(x, phi, "taylor")
    with pytest.raises(ValueError):
        apply_phase_noise(x, phi[:2])


def test_estimate_error_statistics():
    h = np.ones(200_000, dtype=complex)
    est = perturb_channel_estimate(h, 0.01, RngStream(9))
    e = est - h
    assert np.mean(np.abs(e) ** 2) == pytest.approx(0.01, rel=0.01)
    assert abs(np.mean(e)) < 1e-3
    assert np.array_equal(perturb_channel_estimate(h[:5], 0.0, RngStream(9)), h[:5])
    with pytest.raises(ValueError):
        perturb_channel_estimate(h, -1.0, RngStream(9))
