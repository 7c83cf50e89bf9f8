"""Propagation and RF impairments: multipath, AWGN, phase noise, CSI error."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .numerics import RngStream, gaussian_complex
from .txrx import FrameBuffer

__all__ = [
    "SUBCARRIER_SPACING_HZ",
    "default_sample_rate",
    "PowerDelayProfile",
    "PDP_PRESETS",
    "pdp_preset",
    "ChannelRealization",
    "realize_channel",
    "apply_channel",
    "add_awgn",
    "PhaseNoiseParams",
    "PHASE_NOISE_PRESETS",
    "phase_noise_preset",
    "phase_noise_trajectory",
    "apply_phase_noise",
    "perturb_channel_estimate",
]

SUBCARRIER_SPACING_HZ = 15e3


def default_sample_rate(M: int) -> float:
    """``M`` subcarriers at 15 kHz spacing (15.36 MHz for M = 1024)."""
    return M * SUBCARRIER_SPACING_HZ


def _samples(frame):
    return frame.samples if isinstance(frame, FrameBuffer) else np.asarray(frame, dtype=complex)


def _like(frame, samples):
    return frame.replace(samples) if isinstance(frame, FrameBuffer) else samples


# --------------------------------------------------------------------------
# Multipath
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class PowerDelayProfile:
    """Tapped delay line; ``fading=False`` gives deterministic tap amplitudes."""

    delays_s: tuple[float, ...]
    powers_db: tuple[float, ...]
    name: str = "custom"
    fading: bool = True

    def __post_init__(self):
        d = tuple(float(x) for x in self.delays_s)
        p = tuple(float(x) for x in self.powers_db)
        if not d:
            raise ValueError("power delay profile needs at least one tap")
        if len(d) != len(p):
            raise ValueError(f"{len(d)} delays but {len(p)} powers")
        if d[0] < 0 or any(b <= a for a, b in zip(d, d[1:])):
            raise ValueError("tap delays must be non-negative and strictly increasing")
        if not all(math.isfinite(x) for x in d + p):
            raise ValueError("tap delays and powers must be finite")
        object.__setattr__(self, "delays_s", d)
        object.__setattr__(self, "powers_db", p)


PDP_PRESETS = {
    "awgn": PowerDelayProfile((0.0,), (0.0,), name="awgn", fading=False),
    "eva": PowerDelayProfile(
        tuple(t * 1e-9 for t in (0, 30, 150, 310, 370, 710, 1090, 1730, 2510)),
        (0.0, -1.5, -1.4, -3.6, -0.6, -9.1, -7.0, -12.0, -16.9),
        name="eva",
    ),
}


def pdp_preset(name: str) -> PowerDelayProfile:
    try:
        return PDP_PRESETS[name]
    except KeyError:
        raise ValueError(f"unknown channel preset {name!r}; choose from {sorted(PDP_PRESETS)}") from None


@dataclass(frozen=True)
class ChannelRealization:
    """Sample-spaced impulse response with unit total power."""

    h: np.ndarray

    def __post_init__(self):
        h = np.array(self.h, dtype=complex).reshape(-1)
        if h.size == 0:
            raise ValueError("impulse response must have at least one tap")
        h.setflags(write=False)
        object.__setattr__(self, "h", h)

    def __len__(self) -> int:
        return self.h.size

    def frequency_response(self, n: int) -> np.ndarray:
        """Per-bin gain of an ``n``-point window (unnormalized DFT of the zero-padded response)."""
        if n < self.h.size:
            raise ValueError(f"window of {n} bins is shorter than the {self.h.size}-tap response")
        return np.fft.fft(self.h, n)


def realize_channel(pdp: PowerDelayProfile, fs: float, rng: RngStream) -> ChannelRealization:
    if fs <= 0:
        raise ValueError(f"sample rate must be positive, got {fs}")
    idx = np.rint(np.asarray(pdp.delays_s) * fs).astype(int)
    amp = np.sqrt(10.0 ** (np.asarray(pdp.powers_db) / 10.0))
    if pdp.fading:
        taps = amp * gaussian_complex(rng, 1.0, amp.size)
    else:
        taps = amp.astype(complex)
    h = np.zeros(idx.max() + 1, dtype=complex)
    np.add.at(h, idx, taps)
    energy = np.vdot(h, h).real
    if energy == 0.0:
        raise ValueError("channel realization has zero energy")
    return ChannelRealization(h / math.sqrt(energy))


def apply_channel(frame, channel):
    """Linear convolution; the output is ``len(h) - 1`` samples longer."""
    h = channel.h if isinstance(channel, ChannelRealization) else np.asarray(channel, dtype=complex)
    return _like(frame, np.convolve(_samples(frame), h))


# --------------------------------------------------------------------------
# Additive noise
# --------------------------------------------------------------------------


def add_awgn(frame, ebn0_db: float, bits_per_symbol: int, code_rate: float, rng: RngStream,
             region: slice | None = None, symbol_energy_scale: float = 1.0):
    """Add complex white noise at the requested Eb/N0; returns ``(noisy, N0)``.

    Energy per QAM symbol is the per-sample power measured over ``region``
    times ``symbol_energy_scale`` (``M / active subcarriers``: one QAM symbol
    per subcarrier every ``M`` useful samples).  ``N0`` is the noise variance
    per sample, which the unitary DFT carries unchanged to every bin.
    """
    x = _samples(frame)
    measured = x[region] if region is not None else x
    if measured.size == 0:
        raise ValueError("cannot measure signal power over an empty region")
    power = float(np.mean(np.abs(measured) ** 2))
    if not power > 0.0:
        raise ValueError("measured signal power is zero")
    ebn0 = 10.0 ** (ebn0_db / 10.0)
    N0 = power * symbol_energy_scale / (bits_per_symbol * code_rate * ebn0)
    return _like(frame, x + gaussian_complex(rng, N0, x.size)), N0


# --------------------------------------------------------------------------
# Phase noise
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class PhaseNoiseParams:
    """Wiener phase noise; ``sigma2`` is the per-sample increment variance at ``f_ref``."""

    sigma2: float
    fc: float
    f_ref: float = 3.5e9

    def __post_init__(self):
        if self.sigma2 < 0:
            raise ValueError(f"phase-noise increment variance must be >= 0, got {self.sigma2}")
        if self.fc <= 0 or self.f_ref <= 0:
            raise ValueError("carrier and reference frequencies must be positive")

    @property
    def effective_variance(self) -> float:
        """Increment variance at the carrier; grows with ``fc**2``."""
        return self.sigma2 * (self.fc / self.f_ref) ** 2


PN_SIGMA2_DEFAULT = 1e-6

PHASE_NOISE_PRESETS = {
    "pn-3.5GHz": PhaseNoiseParams(PN_SIGMA2_DEFAULT, 3.5e9),
    "pn-28GHz": PhaseNoiseParams(PN_SIGMA2_DEFAULT, 28e9),
}


def phase_noise_preset(name: str, sigma2: float | None = None) -> PhaseNoiseParams | None:
    """Named preset, optionally with a different reference variance; ``"none"`` gives None."""
    if name == "none":
        return None
    try:
        p = PHASE_NOISE_PRESETS[name]
    except KeyError:
        choices = sorted(PHASE_NOISE_PRESETS) + ["none"]
        raise ValueError(f"unknown phase-noise preset {name!r}; choose from {choices}") from None
    return p if sigma2 is None else PhaseNoiseParams(sigma2, p.fc, p.f_ref)


def phase_noise_trajectory(n: int, params: PhaseNoiseParams, rng: RngStream) -> np.ndarray:
    """Random walk ``phi[0] = 0``, ``phi[i] = phi[i-1] + N(0, effective_variance)``."""
    if n < 0:
        raise ValueError("trajectory length must be >= 0")
    phi = np.zeros(n)
    if n > 1:
        steps = math.sqrt(params.effective_variance) * rng.normal(n - 1)
        phi[1:] = np.cumsum(steps)
    return phi


def apply_phase_noise(frame, phi, mode: str = "exact"):
    """Multiply by ``exp(j phi)`` or, in ``linearized`` mode, by ``1 + j phi``."""
    x = _samples(frame)
    phi = np.asarray(phi, dtype=float)
    if phi.shape != x.shape:
        raise ValueError(f"phase trajectory has {phi.size} samples, frame has {x.size}")
    if mode == "exact":
        rot = np.exp(1j * phi)
    elif mode == "linearized":
        rot = 1.0 + 1j * phi
    else:
        raise ValueError(f"phase-noise mode must be 'exact' or 'linearized', got {mode!r}")
    return _like(frame, x * rot)


# --------------------------------------------------------------------------
# Channel-estimate error
# --------------------------------------------------------------------------


def perturb_channel_estimate(h_freq, sigma_er2: float, rng: RngStream) -> np.ndarray:
    """Add i.i.d. complex Gaussian error of variance ``sigma_er2`` to every bin."""
    if sigma_er2 < 0:
        raise ValueError(f"estimation-error variance must be >= 0, got {sigma_er2}")
    h_freq = np.asarray(h_freq, dtype=complex)
    err = gaussian_complex(rng, sigma_er2, h_freq.shape)
    return h_freq + err
