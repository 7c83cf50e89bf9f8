"""BER accounting, Welch PSD, out-of-band emission and theoretical references."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import welch
from scipy.stats import norm

from .numerics import qfunc

__all__ = [
    "BerCounter",
    "BerReport",
    "ber_update",
    "ber_report",
    "wilson_interval",
    "PsdEstimate",
    "psd_welch",
    "oob_emission",
    "theoretical_qpsk_ber",
]


@dataclass(frozen=True)
class BerCounter:
    errors: int = 0
    bits: int = 0

    def __post_init__(self):
        if self.errors < 0 or self.bits < 0 or self.errors > self.bits:
            raise ValueError(f"invalid counts: {self.errors} errors in {self.bits} bits")

    def merge(self, other: "BerCounter") -> "BerCounter":
        return BerCounter(self.errors + other.errors, self.bits + other.bits)

    __add__ = merge


@dataclass(frozen=True)
class BerReport:
    ber: float
    lo: float
    hi: float
    errors: int
    bits: int


def ber_update(counter: BerCounter, tx_bits, rx_bits) -> BerCounter:
    tx = np.asarray(tx_bits).reshape(-1)
    rx = np.asarray(rx_bits).reshape(-1)
    if tx.size != rx.size:
        raise ValueError(f"bit sequences differ in length: {tx.size} vs {rx.size}")
    return BerCounter(counter.errors + int(np.count_nonzero(tx != rx)), counter.bits + tx.size)


def wilson_interval(errors: int, n: int, confidence: float = 0.95) -> tuple[float, float]:
    if n == 0:
        return 0.0, 1.0
    z = norm.ppf(0.5 + confidence / 2)
    p = errors / n
    denom = 1 + z * z / n
    centre = (p + z * z / (2 * n)) / denom
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
    lo = 0.0 if errors == 0 else max(0.0, centre - half)
    hi = 1.0 if errors == n else min(1.0, centre + half)
    return lo, hi


def ber_report(counter: BerCounter, confidence: float = 0.95) -> BerReport:
    lo, hi = wilson_interval(counter.errors, counter.bits, confidence)
    ber = counter.errors / counter.bits if counter.bits else 0.0
    return BerReport(ber, lo, hi, counter.errors, counter.bits)


# --------------------------------------------------------------------------
# Spectra
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class PsdEstimate:
    """Two-sided density in power per (cycle/sample) on an ascending grid in (-0.5, 0.5]."""

    freqs: np.ndarray
    density: np.ndarray
    nperseg: int = 0
    noverlap: int = 0
    window: str = ""

    @property
    def density_db(self) -> np.ndarray:
        return 10 * np.log10(np.maximum(self.density, 1e-300))

    @property
    def resolution(self) -> float:
        return 1.0 / self.nperseg if self.nperseg else float(np.median(np.diff(self.freqs)))

    def total_power(self) -> float:
        return float(np.sum(self.density) * self.resolution)


def psd_welch(stream, nperseg: int = 4096, overlap: float = 0.5, window: str = "hann") -> PsdEstimate:
    """Averaged modified periodograms; integrates to the mean sample power."""
    x = np.asarray(stream, dtype=complex)
    if nperseg < 2 or x.size < nperseg:
        raise ValueError(f"stream of {x.size} samples is shorter than the {nperseg}-sample segment")
    if not 0 <= overlap < 1:
        raise ValueError("overlap fraction must lie in [0, 1)")
    noverlap = int(round(overlap * nperseg))
    f, p = welch(x, fs=1.0, window=window, nperseg=nperseg, noverlap=noverlap,
                 detrend=False, return_onesided=False, scaling="density")
    f = np.where(np.isclose(f, -0.5), 0.5, f)
    order = np.argsort(f)
    return PsdEstimate(f[order], p[order], nperseg, noverlap, window)


def oob_emission(psd: PsdEstimate, band, offsets) -> np.ndarray:
    """Density at each offset beyond both band edges, in dB relative to the mean in-band density.

    ``band`` is ``(lo, hi)`` in cycles/sample; ``offsets`` are positive
    distances beyond the edges.  The upper and lower readings are averaged in
    linear power.
    """
    lo, hi = map(float, band)
    if not lo < hi:
        raise ValueError("band edges must satisfy lo < hi")
    offsets = np.atleast_1d(np.asarray(offsets, dtype=float))
    if np.any(offsets <= 0):
        raise ValueError("offsets must lie outside the band (strictly positive distance from the edge)")
    inband = (psd.freqs >= lo) & (psd.freqs <= hi)
    if not inband.any():
        raise ValueError("no PSD bins inside the band")
    ref = float(np.mean(psd.density[inband]))
    upper = np.interp(hi + offsets, psd.freqs, psd.density)
    lower = np.interp(lo - offsets, psd.freqs, psd.density)
    return 10 * np.log10(np.maximum(0.5 * (upper + lower), 1e-300) / ref)


def theoretical_qpsk_ber(ebn0_db) -> np.ndarray | float:
    """Gray QPSK on AWGN, ``Q(sqrt(2 Eb/N0))``."""
    return qfunc(np.sqrt(2.0 * 10.0 ** (np.asarray(ebn0_db, dtype=float) / 10.0)))
