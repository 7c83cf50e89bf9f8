import numpy as np
import pytest
from scipy.stats import norm

from qamfbmc.metrics import (
    BerCounter,
    PsdEstimate,
    ber_report,
    ber_update,
    oob_emission,
    psd_welch,
    theoretical_qpsk_ber,
    wilson_interval,
)
from qamfbmc.numerics import RngStream, gaussian_complex


def wilson_by_roots(k, n, conf=0.95):
    """Endpoints solve (p_hat - p)^2 = z^2 p (1 - p) / n."""
    z2 = norm.ppf(0.5 + conf / 2) ** 2
    ph = k / n
    roots = np.roots([1 + z2 / n, -(2 * ph + z2 / n), ph * ph])
    return tuple(sorted(roots.real))


def test_counter_merge_and_validation():
    c = BerCounter(3, 10) + BerCounter(1, 5)
    assert c == BerCounter(4, 15)
    with pytest.raises(ValueError):
        BerCounter(5, 4)
    with pytest.raises(ValueError):
        BerCounter(-1, 4)


def test_ber_update():
    c = ber_update(BerCounter(), [0, 1, 1, 0], [0, 0, 1, 1])
    assert c == BerCounter(2, 4)
    with pytest.raises(ValueError):
        ber_update(c, [0, 1], [0])


@pytest.mark.parametrize("k,n", [(1, 10), (10, 100), (37, 2000), (500, 1000), (3, 2_000_000)])
def test_wilson_matches_quadratic_roots(k, n):
    np.testing.assert_allclose(wilson_interval(k, n), wilson_by_roots(k, n), rtol=1e-9, atol=1e-15)


def test_wilson_reference_value():
    lo, hi = wilson_interval(10, 100)
    assert lo == pytest.approx(0.05523, abs=1e-5)
    assert hi == pytest.approx(0.17437, abs=1e-5)


def test_wilson_one_percent():
    lo, hi = wilson_interval(10, 1000)
    assert lo == pytest.approx(0.0054, abs=1e-4)
    assert hi == pytest.approx(0.0183, abs=1e-4)


def test_wilson_edges():
    lo, hi = wilson_interval(0, 50)
    assert lo == 0.0 and 0 < hi < 0.08
    lo, hi = wilson_interval(50, 50)
    assert hi == 1.0 and lo > 0.92
    assert wilson_interval(0, 0) == (0.0, 1.0)
    assert wilson_interval(10, 100, 0.99)[0] < wilson_interval(10, 100, 0.9)[0]


def test_wilson_coverage():
    rng = np.random.default_rng(0)
    p, n = 0.01, 5000
    ks = rng.binomial(n, p, 4000)
    covered = np.mean([lo <= p <= hi for lo, hi in (wilson_interval(k, n) for k in ks)])
    assert 0.93 <= covered <= 0.97


def test_ber_report():
    r = ber_report(BerCounter(25, 1000))
    assert r.ber == 0.025 and r.lo < 0.025 < r.hi and (r.errors, r.bits) == (25, 1000)
    assert ber_report(BerCounter()).ber == 0.0


def test_theoretical_qpsk_ber():
    assert theoretical_qpsk_ber(0.0) == pytest.approx(0.0786496, rel=1e-5)
    assert theoretical_qpsk_ber(6.0) == pytest.approx(2.38829e-3, rel=1e-4)
    assert np.shape(theoretical_qpsk_ber([0, 2, 4])) == (3,)


def test_welch_white_noise_level():
    x = gaussian_complex(RngStream(1), 2.0, 2**18)
    psd = psd_welch(x, 1024)
    assert np.all(np.diff(psd.freqs) > 0)
    assert psd.freqs[-1] == 0.5 and psd.freqs[0] > -0.5
    assert np.median(psd.density) == pytest.approx(2.0, rel=0.05)
    assert psd.total_power() == pytest.approx(np.mean(np.abs(x) ** 2), rel=0.02)
    assert psd.resolution == 1 / 1024
    assert psd.noverlap == 512


def test_welch_tone_location_and_power():
    n = np.arange(2**16)
    x = 3.0 * np.exp(2j * np.pi * 0.125 * n)
    psd = psd_welch(x, 512, window="hann")
    assert psd.freqs[np.argmax(psd.density)] == pytest.approx(0.125)
    assert psd.total_power() == pytest.approx(9.0, rel=1e-6)


def test_welch_errors():
    with pytest.raises(ValueError):
        psd_welch(np.zeros(100), 256)
    with pytest.raises(ValueError):
        psd_welch(np.zeros(1000), 256, overlap=1.0)


def test_oob_emission_synthetic():
    f = np.linspace(-0.5, 0.5, 1001)
    dens = np.where(np.abs(f) <= 0.2, 1.0, 1e-4)
    psd = PsdEstimate(f, dens)
    np.testing.assert_allclose(oob_emission(psd, (-0.2, 0.2), [0.01, 0.1]), [-40.0, -40.0])
    asym = PsdEstimate(f, np.where(np.abs(f) <= 0.2, 1.0, np.where(f > 0, 1e-3, 1e-5)))
    assert oob_emission(asym, (-0.2, 0.2), [0.05])[0] == pytest.approx(10 * np.log10(0.5 * (1e-3 + 1e-5)))


def test_oob_emission_errors():
    psd = PsdEstimate(np.linspace(-0.5, 0.5, 11), np.ones(11))
    with pytest.raises(ValueError):
        oob_emission(psd, (0.2, -0.2), [0.1])
    with pytest.raises(ValueError):
        oob_emission(psd, (-0.2, 0.2), [0.0])
    with pytest.raises(ValueError):
        oob_emission(psd, (0.01, 0.02), [0.1])
