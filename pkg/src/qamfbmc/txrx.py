"""QAM-FBMC and CP-OFDM modulation chains.

QAM-FBMC synthesis per symbol and bank ``b``: gather the sub-band symbols
``D[s*B + b]``, take an ``M/B``-point IDFT, repeat it ``B*L`` times to length
``N``, window by ``q_b[n] exp(j 2 pi b n / M)`` and sum over banks.  Symbols
advance by ``M`` samples and overlap-add.  The receiver cuts ``N``-sample
windows at multiples of ``M``, takes an ``N``-point DFT, applies one-tap gains
per bin and correlates with each sibling filter.

Arrays carry symbols along the last axis; leading axes are symbol/batch axes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .filterbank import FilterBank
from .numerics import dft

__all__ = [
    "QAM_ORDERS",
    "bits_per_symbol",
    "qam_map",
    "qam_llr",
    "harden",
    "qam_demap_hard",
    "FrameBuffer",
    "fbmc_modulate",
    "frame_synthesize",
    "fbmc_frame",
    "slice_receive",
    "slice_windows",
    "fbmc_demodulate",
    "subcarrier_average",
    "OfdmConfig",
    "ofdm_modulate",
    "ofdm_demodulate",
    "ofdm_frame",
]

QAM_ORDERS = (4, 16, 64)


# --------------------------------------------------------------------------
# Gray QAM
# --------------------------------------------------------------------------


def bits_per_symbol(order: int) -> int:
    if order not in QAM_ORDERS:
        raise ValueError(f"unsupported QAM order {order}; choose from {QAM_ORDERS}")
    return int(math.log2(order))


def _pam_levels(k: int) -> np.ndarray:
    """Amplitude of every k-bit Gray label, indexed by the label's integer value (MSB first)."""
    labels = np.arange(2**k)
    bits = (labels[:, None] >> np.arange(k - 1, -1, -1)) & 1
    amp = 1 - 2 * bits[:, -1]
    for j in range(k - 2, -1, -1):
        amp = (1 - 2 * bits[:, j]) * (2 ** (k - 1 - j) - amp)
    return amp.astype(float), bits


def _axis_scale(order: int) -> float:
    k = bits_per_symbol(order) // 2
    return math.sqrt(2 * (4**k - 1) / 3)


def qam_map(bits, order: int = 4) -> np.ndarray:
    """Gray-mapped, unit-average-energy QAM symbols.

    Even-indexed bits of each group drive the in-phase axis and odd-indexed
    bits the quadrature axis; a leading 0 maps to the positive half-plane,
    so QPSK ``(0, 0)`` is ``(1 + 1j)/sqrt(2)``.
    """
    bps = bits_per_symbol(order)
    bits = np.asarray(bits, dtype=np.int64).reshape(-1)
    if bits.size % bps:
        raise ValueError(f"bit count {bits.size} is not a multiple of {bps}")
    groups = bits.reshape(-1, bps)
    k = bps // 2
    weights = 1 << np.arange(k - 1, -1, -1)
    levels, _ = _pam_levels(k)
    i_idx = groups[:, 0::2] @ weights
    q_idx = groups[:, 1::2] @ weights
    return (levels[i_idx] + 1j * levels[q_idx]) / _axis_scale(order)


def qam_llr(symbols, noise_var, order: int = 4) -> np.ndarray:
    """Max-log LLRs, positive when bit 0 is more likely.

    ``noise_var`` is the complex noise variance ``E|n|^2`` per symbol, scalar
    or broadcastable to ``symbols``.
    """
    bps = bits_per_symbol(order)
    k = bps // 2
    y = np.asarray(symbols, dtype=complex).reshape(-1) * _axis_scale(order)
    nv = np.broadcast_to(np.asarray(noise_var, dtype=float), np.shape(symbols)).reshape(-1)
    nv = np.maximum(nv * _axis_scale(order) ** 2, 1e-300)
    levels, labels = _pam_levels(k)
    out = np.empty((y.size, bps))
    for axis, comp in ((0, y.real), (1, y.imag)):
        d2 = (comp[:, None] - levels[None, :]) ** 2
        for j in range(k):
            one = labels[:, j] == 1
            d1 = d2[:, one].min(axis=1)
            d0 = d2[:, ~one].min(axis=1)
            out[:, 2 * j + axis] = (d1 - d0) / nv
    return out.reshape(-1)


def harden(llrs) -> np.ndarray:
    return (np.asarray(llrs) < 0).astype(np.uint8)


def qam_demap_hard(symbols, order: int = 4) -> np.ndarray:
    """Nearest-point Gray demapping."""
    return harden(qam_llr(symbols, 1.0, order))


# --------------------------------------------------------------------------
# QAM-FBMC
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class FrameBuffer:
    """Overlap-added sample stream; symbol ``k`` starts at ``k*spacing``."""

    samples: np.ndarray
    spacing: int
    window: int

    def __len__(self) -> int:
        return self.samples.size

    def replace(self, samples) -> "FrameBuffer":
        return FrameBuffer(np.asarray(samples, dtype=complex), self.spacing, self.window)


def fbmc_modulate(D, bank: FilterBank) -> np.ndarray:
    """Time-domain QAM-FBMC symbol(s) of length ``N`` from ``M`` data symbols."""
    cfg = bank.config
    D = np.asarray(D, dtype=complex)
    if D.shape[-1] != cfg.M:
        raise ValueError(f"expected {cfg.M} symbols on the last axis, got {D.shape[-1]}")
    Ms = cfg.subband_size
    n = np.arange(cfg.N)
    x = np.zeros(D.shape[:-1] + (cfg.N,), dtype=complex)
    for b in range(cfg.B):
        sub = np.fft.ifft(D[..., b :: cfg.B], axis=-1) * Ms
        rep = np.tile(sub, (1,) * (D.ndim - 1) + (cfg.B * cfg.L,))
        x += rep * (bank.windows[b] * np.exp(2j * np.pi * b * n / cfg.M))
    return x


def frame_synthesize(grid, bank: FilterBank) -> FrameBuffer:
    """Overlap-add ``K`` symbols with an ``M``-sample advance."""
    cfg = bank.config
    grid = np.atleast_2d(np.asarray(grid, dtype=complex))
    if grid.shape[-1] != cfg.M:
        raise ValueError(f"grid must have {cfg.M} columns, got {grid.shape[-1]}")
    K = grid.shape[0]
    pulses = fbmc_modulate(grid, bank).reshape(K, cfg.L, cfg.M)
    blocks = np.zeros((K + cfg.L - 1, cfg.M), dtype=complex)
    for l in range(cfg.L):
        blocks[l : l + K] += pulses[:, l, :]
    return FrameBuffer(blocks.reshape(-1), cfg.M, cfg.N)


def fbmc_frame(data_grid, bank: FilterBank) -> FrameBuffer:
    """Frame with ``L-1`` zero guard symbols before and after the data symbols.

    Data symbol ``i`` then sits at symbol slot ``i + L - 1``.
    """
    cfg = bank.config
    data_grid = np.atleast_2d(np.asarray(data_grid, dtype=complex))
    guard = np.zeros((cfg.L - 1, cfg.M), dtype=complex)
    return frame_synthesize(np.concatenate([guard, data_grid, guard]), bank)


def slice_receive(frame: FrameBuffer, k0: int) -> np.ndarray:
    """The ``N`` samples starting at ``k0*M``."""
    start = k0 * frame.spacing
    if k0 < 0 or start + frame.window > len(frame):
        raise ValueError(f"window of symbol {k0} does not lie inside the {len(frame)}-sample frame")
    return frame.samples[start : start + frame.window].copy()


def slice_windows(samples, starts, length: int) -> np.ndarray:
    """Stack ``samples[s : s + length]`` for every start (copy)."""
    samples = np.asarray(samples)
    starts = np.asarray(starts, dtype=int)
    if starts.size and (starts.min() < 0 or starts.max() + length > samples.size):
        raise ValueError("receive window outside the sample buffer")
    idx = starts[:, None] + np.arange(length)[None, :]
    return samples[idx]


def fbmc_demodulate(x_freq, gains, bank: FilterBank) -> np.ndarray:
    """Matched-filter outputs ``Pf[:, m]^H diag(gains) x_freq`` for every subcarrier.

    ``x_freq`` is the unitary N-point DFT of receive window(s); ``gains`` has
    length ``N`` or the same leading shape as ``x_freq``.
    """
    cfg = bank.config
    x_freq = np.asarray(x_freq, dtype=complex)
    gains = np.asarray(gains, dtype=complex)
    if x_freq.shape[-1] != cfg.N or gains.shape[-1] != cfg.N:
        raise ValueError(f"receive spectra and gains must have length N={cfg.N}")
    y = dft(gains * x_freq, inverse=True)
    Ms = cfg.subband_size
    n = np.arange(cfg.N)
    out = np.empty(np.broadcast_shapes(x_freq.shape, gains.shape)[:-1] + (cfg.M,), dtype=complex)
    for b in range(cfg.B):
        z = y * np.conj(bank.windows[b] * np.exp(2j * np.pi * b * n / cfg.M))
        folded = z.reshape(z.shape[:-1] + (cfg.B * cfg.L, Ms)).sum(axis=-2)
        out[..., b :: cfg.B] = np.fft.fft(folded, axis=-1)
    return out


def subcarrier_average(values, bank: FilterBank) -> np.ndarray:
    """``sum_n |Pf[n, m]|^2 values[n]`` for every subcarrier ``m``.

    With ``values = gains * h`` this is the mean gain the matched filter of
    subcarrier ``m`` applies to its own symbol; with ``|gains|^2`` it is the
    factor by which white bin noise is scaled.  Computed as a circular
    correlation with each bank's power spectrum.
    """
    cfg = bank.config
    values = np.asarray(values, dtype=complex)
    if values.shape[-1] != cfg.N:
        raise ValueError(f"expected length N={cfg.N} on the last axis")
    V = np.fft.fft(values, axis=-1)
    out = np.empty(values.shape[:-1] + (cfg.M,), dtype=complex)
    for b in range(cfg.B):
        power = np.abs(dft(bank.windows[b])) ** 2
        corr = np.fft.ifft(np.conj(np.fft.fft(power)) * V, axis=-1)
        out[..., b :: cfg.B] = corr[..., cfg.L * np.arange(b, cfg.M, cfg.B)]
    return out


# --------------------------------------------------------------------------
# CP-OFDM baseline
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class OfdmConfig:
    M: int
    cp_len: int | None = None

    def __post_init__(self):
        if self.M < 1:
            raise ValueError("M must be positive")
        cp = math.ceil(self.M / 14) if self.cp_len is None else int(self.cp_len)
        if not 0 <= cp < self.M:
            raise ValueError(f"cp_len must satisfy 0 <= cp_len < M, got {cp}")
        object.__setattr__(self, "cp_len", cp)

    @property
    def symbol_len(self) -> int:
        return self.M + self.cp_len

    @property
    def efficiency(self) -> float:
        """Fraction of air time carrying data, ``M/(M + cp_len)``."""
        return self.M / self.symbol_len


def ofdm_modulate(D, cfg: OfdmConfig) -> np.ndarray:
    D = np.asarray(D, dtype=complex)
    if D.shape[-1] != cfg.M:
        raise ValueError(f"expected {cfg.M} symbols on the last axis, got {D.shape[-1]}")
    x = dft(D, inverse=True)
    return np.concatenate([x[..., cfg.M - cfg.cp_len :], x], axis=-1)


def ofdm_demodulate(window, gains, cfg: OfdmConfig) -> np.ndarray:
    """Drop the CP, DFT and apply per-tone gains."""
    window = np.asarray(window, dtype=complex)
    if window.shape[-1] != cfg.symbol_len:
        raise ValueError(f"expected windows of {cfg.symbol_len} samples, got {window.shape[-1]}")
    gains = np.asarray(gains, dtype=complex)
    if gains.shape[-1] != cfg.M:
        raise ValueError(f"gains must have length M={cfg.M}")
    return gains * dft(window[..., cfg.cp_len :])


def ofdm_frame(grid, cfg: OfdmConfig) -> FrameBuffer:
    grid = np.atleast_2d(np.asarray(grid, dtype=complex))
    return FrameBuffer(ofdm_modulate(grid, cfg).reshape(-1), cfg.symbol_len, cfg.symbol_len)
