"""One-tap frequency-domain ZF and MMSE equalizers."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .filterbank import SirReport

__all__ = [
    "ZF_FLOOR",
    "CsiState",
    "EqualizerGains",
    "zf_gains",
    "mmse_gains",
    "equalizer_gains",
    "gains_with_estimation_error",
    "interference_noise_variance",
]

# bins weaker than ZF_FLOOR * max|h| are treated as nulls
ZF_FLOOR = 1e-6


@dataclass(frozen=True)
class CsiState:
    """Receiver-side channel knowledge: per-bin response and ``sigma_IN2``."""

    h_freq: np.ndarray
    sigma_IN2: float = 0.0

    def __post_init__(self):
        h = np.array(self.h_freq, dtype=complex)
        if not np.all(np.isfinite(h)):
            raise ValueError("channel estimate contains non-finite values")
        if self.sigma_IN2 < 0:
            raise ValueError(f"sigma_IN2 must be >= 0, got {self.sigma_IN2}")
        h.setflags(write=False)
        object.__setattr__(self, "h_freq", h)


@dataclass(frozen=True)
class EqualizerGains:
    gains: np.ndarray
    kind: str
    csi: str = "perfect"

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.gains, dtype=dtype)


def zf_gains(csi: CsiState) -> EqualizerGains:
    """``conj(h)/|h|^2``; near-null bins get a bounded gain instead of blowing up."""
    h = csi.h_freq
    mag2 = np.abs(h) ** 2
    peak2 = float(mag2.max(initial=0.0))
    if peak2 == 0.0:
        return EqualizerGains(np.zeros_like(h), "zf")
    weak = mag2 < (ZF_FLOOR**2) * peak2
    denom = np.where(weak, 1e-12 * peak2, mag2)
    return EqualizerGains(np.conj(h) / denom, "zf")


def mmse_gains(csi: CsiState) -> EqualizerGains:
    """``conj(h)/(|h|^2 + sigma_IN2)``."""
    if csi.sigma_IN2 == 0.0:
        return EqualizerGains(zf_gains(csi).gains, "mmse")
    h = csi.h_freq
    return EqualizerGains(np.conj(h) / (np.abs(h) ** 2 + csi.sigma_IN2), "mmse")


def equalizer_gains(csi: CsiState, kind: str) -> EqualizerGains:
    if kind == "zf":
        return zf_gains(csi)
    if kind == "mmse":
        return mmse_gains(csi)
    raise ValueError(f"equalizer must be 'zf' or 'mmse', got {kind!r}")


def gains_with_estimation_error(csi: CsiState, kind: str, perturbed_h) -> EqualizerGains:
    """Same formulas on the erroneous estimate; the true response in ``csi`` is not used."""
    noisy = CsiState(perturbed_h, csi.sigma_IN2)
    g = equalizer_gains(noisy, kind)
    return EqualizerGains(g.gains, g.kind, "perturbed")


def interference_noise_variance(report: SirReport | None, N0: float, bin_power: float = 1.0) -> float:
    """Noise plus residual self-interference, relative to the per-bin signal power.

    ``report`` is the filter bank's SIR report (None for OFDM).  For QAM-FBMC
    the ``M`` unit-energy pulses spread over ``N`` bins, so pass
    ``bin_power = M/N``.
    """
    if N0 < 0:
        raise ValueError(f"N0 must be >= 0, got {N0}")
    si = 0.0 if report is None else report.mean_interference
    return (N0 + si) / bin_power
