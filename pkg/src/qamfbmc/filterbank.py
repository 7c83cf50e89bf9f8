"""Prototype filters, modulated sibling filters and the frequency filter matrix.

Subcarrier ``m = s*B + b`` of a QAM-FBMC symbol uses the sibling filter

    p_{b,s}[n] = q_b[n] * exp(j*2*pi*(B*s + b)*n/M),   n = 0 .. N-1,

where ``q_b`` is the prototype of bank ``b`` and ``N = L*M``.  Filters are
stored with unit energy, so with the unitary DFT every column of the
frequency filter matrix has unit norm.

Shipped presets (two banks):

``type1``
    PHYDYAS prototype on the even bank; the odd bank is its polyphase
    complement, which cancels every even/odd coupling exactly.  Highest
    self-interference ratio, but the odd bank has OFDM-like spectral tails.
``type2``
    Optimised smooth pair with low out-of-band emission; the price is a
    self-interference ratio near 16 dB.
``cyclic-shift``
    Even bank PHYDYAS, odd bank the same window cyclically shifted by N/2.
    Kept as a reference point; its self-interference is severe.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

from . import _taps
from .numerics import dft

__all__ = [
    "FilterBankConfig",
    "PrototypeFilter",
    "FilterBank",
    "FilterFileError",
    "SirReport",
    "PRESETS",
    "phydyas_window",
    "make_filter_bank",
    "modulated_filter",
    "frequency_filter_matrix",
    "interference_profile",
    "load_filter_bank",
    "save_filter_bank",
]

PHYDYAS_TAPS = {
    2: (1.0, math.sqrt(2) / 2),
    3: (1.0, 0.911438, 0.411438),
    4: (1.0, 0.971960, math.sqrt(2) / 2, 0.235147),
}

_UNIT_ENERGY_TOL = 1e-13


@dataclass(frozen=True)
class FilterBankConfig:
    """Lattice dimensions: ``M`` subcarriers in ``B`` banks, overlap ``L``."""

    M: int
    B: int = 2
    L: int = 4

    def __post_init__(self):
        for name in ("M", "B", "L"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or v < 1:
                raise ValueError(f"{name} must be a positive integer, got {v!r}")
        if self.M % self.B:
            raise ValueError(f"M={self.M} is not divisible by B={self.B}")

    @property
    def N(self) -> int:
        return self.L * self.M

    @property
    def subband_size(self) -> int:
        """Subcarriers per bank, i.e. the reduced IFFT size ``M/B``."""
        return self.M // self.B


@dataclass(frozen=True)
class PrototypeFilter:
    bank: int
    coefficients: np.ndarray

    def __post_init__(self):
        c = np.array(self.coefficients, dtype=complex)
        if c.ndim != 1 or c.size == 0:
            raise ValueError("prototype coefficients must be a non-empty 1-D sequence")
        if not np.all(np.isfinite(c)):
            raise ValueError("prototype coefficients must be finite")
        energy = float(np.vdot(c, c).real)
        if energy == 0.0:
            raise ValueError(f"prototype of bank {self.bank} has zero energy")
        if abs(energy - 1.0) > _UNIT_ENERGY_TOL:
            c = c / math.sqrt(energy)
        c.setflags(write=False)
        object.__setattr__(self, "coefficients", c)

    def __len__(self) -> int:
        return self.coefficients.size


@dataclass(frozen=True)
class FilterBank:
    """Immutable set of ``B`` unit-energy prototypes for one lattice."""

    config: FilterBankConfig
    prototypes: tuple[PrototypeFilter, ...]
    name: str = field(default="custom", compare=False)

    def __post_init__(self):
        protos = tuple(
            p if isinstance(p, PrototypeFilter) else PrototypeFilter(b, p)
            for b, p in enumerate(self.prototypes)
        )
        if len(protos) != self.config.B:
            raise ValueError(f"expected {self.config.B} prototypes, got {len(protos)}")
        for b, p in enumerate(protos):
            if p.bank != b:
                raise ValueError(f"prototype {b} carries bank index {p.bank}")
            if len(p) != self.config.N:
                raise ValueError(f"prototype {b} has length {len(p)}, expected N={self.config.N}")
        object.__setattr__(self, "prototypes", protos)

    @cached_property
    def windows(self) -> np.ndarray:
        """``(B, N)`` array of prototype coefficients."""
        w = np.stack([p.coefficients for p in self.prototypes])
        w.setflags(write=False)
        return w

    @cached_property
    def Pf(self) -> np.ndarray:
        """Dense ``N x M`` frequency filter matrix (test/oracle scale only)."""
        return frequency_filter_matrix(self)

    @property
    def M(self) -> int:
        return self.config.M

    @property
    def N(self) -> int:
        return self.config.N


# --------------------------------------------------------------------------
# Prototype construction
# --------------------------------------------------------------------------


def _frequency_sampled(taps, N: int, half_sample: bool = True) -> np.ndarray:
    """Window ``sum_i taps[i] exp(j 2 pi i (n + 1/2) / N)`` with symmetric tap indices."""
    taps = np.asarray(taps, dtype=complex)
    T = (taps.size - 1) // 2
    n = np.arange(N) + (0.5 if half_sample else 0.0)
    i = np.arange(-T, T + 1)
    return np.exp(2j * np.pi * np.outer(n, i) / N) @ taps


def phydyas_window(N: int, L: int = 4) -> np.ndarray:
    """Real, symmetric PHYDYAS window of length ``N`` with ``2L-1`` frequency taps."""
    if L not in PHYDYAS_TAPS:
        raise ValueError(f"PHYDYAS coefficients available for L in {sorted(PHYDYAS_TAPS)}, got {L}")
    H = PHYDYAS_TAPS[L]
    taps = [(-1) ** abs(i) * H[abs(i)] for i in range(-(L - 1), L)]
    return _frequency_sampled(taps, N).real


def polyphase_complement(q0: np.ndarray, M: int, L: int) -> np.ndarray:
    """Odd-bank window orthogonal to every odd-offset shift of ``q0``.

    With ``v_r`` the length-L polyphase vector of ``q0`` at phase ``r``, the
    odd bank takes ``conj(v_{r+M/2})`` time-reversed at phase ``r``.  All
    even/odd cross-correlations then cancel pairwise.
    """
    if M % 2:
        raise ValueError("polyphase complement needs an even M")
    poly = np.asarray(q0, dtype=complex).reshape(L, M)
    swapped = np.roll(poly, -M // 2, axis=1)
    return np.conj(swapped[::-1, :]).reshape(-1)


def _preset_windows(preset: str, cfg: FilterBankConfig) -> np.ndarray:
    M, B, L, N = cfg.M, cfg.B, cfg.L, cfg.N
    if preset == "rect":
        if B != 1 or L != 1:
            raise ValueError("the rectangular (CP-less OFDM) preset requires B=1, L=1")
        return np.ones((1, N), dtype=complex)
    if preset == "phydyas":
        if B != 1:
            raise ValueError("the single-bank PHYDYAS preset requires B=1")
        return phydyas_window(N, L)[None, :]
    if B != 2:
        raise ValueError(f"preset {preset!r} is defined for B=2, got B={B}")
    if preset == "type1":
        q0 = phydyas_window(N, L)
        return np.stack([q0, polyphase_complement(q0, M, L)])
    if preset == "type2":
        if L != 4:
            raise ValueError("the type2 taps were designed for L=4")
        return np.stack([
            _frequency_sampled(_taps.TYPE2_BANK0_TAPS, N),
            _frequency_sampled(_taps.TYPE2_BANK1_TAPS, N),
        ])
    if preset == "cyclic-shift":
        q0 = phydyas_window(N, L)
        return np.stack([q0, np.roll(q0, N // 2)])
    raise ValueError(f"unknown filter preset {preset!r}; choose from {sorted(PRESETS)}")


PRESETS = ("type1", "type2", "cyclic-shift", "phydyas", "rect")


def make_filter_bank(config: FilterBankConfig, preset: str = "type1") -> FilterBank:
    w = _preset_windows(preset, config)
    return FilterBank(config, tuple(PrototypeFilter(b, w[b]) for b in range(config.B)), name=preset)


# --------------------------------------------------------------------------
# Modulated filters and the frequency filter matrix
# --------------------------------------------------------------------------


def modulated_filter(bank: FilterBank, b: int, s: int) -> np.ndarray:
    """Sibling filter ``p_{b,s}[n]`` for subcarrier ``m = B*s + b``."""
    cfg = bank.config
    if not 0 <= b < cfg.B:
        raise ValueError(f"bank index {b} outside [0, {cfg.B})")
    if not 0 <= s < cfg.subband_size:
        raise ValueError(f"sub-band index {s} outside [0, {cfg.subband_size})")
    n = np.arange(cfg.N)
    m = cfg.B * s + b
    return bank.windows[b] * np.exp(2j * np.pi * m * n / cfg.M)


def frequency_filter_matrix(bank: FilterBank) -> np.ndarray:
    """``N x M`` matrix whose column ``m = B*s + b`` is ``dft(p_{b,s})``.

    Built by circularly shifting the prototype spectrum: modulating by
    ``exp(j 2 pi m n / M)`` moves the N-point DFT by ``L*m`` bins.
    """
    cfg = bank.config
    spectra = dft(bank.windows, axis=-1)  # (B, N)
    Pf = np.empty((cfg.N, cfg.M), dtype=complex)
    for m in range(cfg.M):
        Pf[:, m] = np.roll(spectra[m % cfg.B], cfg.L * m)
    return Pf


# --------------------------------------------------------------------------
# Self-interference
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class SirReport:
    """Per-subcarrier self-interference under an ideal channel.

    ``intra`` is the power leaking in from other subcarriers of the same
    symbol, ``cross`` the power from the ``2L-2`` overlapping neighbours.
    """

    desired: np.ndarray
    intra: np.ndarray
    cross: np.ndarray

    @property
    def interference(self) -> np.ndarray:
        return self.intra + self.cross

    @property
    def sir_db(self) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return np.where(
                self.interference < 1e-20,
                np.inf,
                10 * np.log10(self.desired / np.maximum(self.interference, 1e-300)),
            )

    @property
    def min_sir_db(self) -> float:
        return float(np.min(self.sir_db))

    @property
    def mean_interference(self) -> float:
        """Interference power per subcarrier relative to unit symbol power."""
        return float(np.mean(self.interference / self.desired))


def cross_ambiguity(qa: np.ndarray, qb: np.ndarray, M: int, k: int) -> np.ndarray:
    """Inner products ``sum_n conj(qa[n]) qb[n - kM] exp(j 2 pi d n / M)`` for ``d = 0..M-1``.

    This is the coupling from subcarrier ``m + d`` of symbol ``k`` into the
    matched filter of subcarrier ``m`` of symbol 0 (window ``[0, N)``).
    """
    N = qa.size
    shift = k * M
    u = np.zeros(N, dtype=complex)
    if abs(shift) < N:
        if shift >= 0:
            u[shift:] = np.conj(qa[shift:]) * qb[: N - shift]
        else:
            u[: N + shift] = np.conj(qa[: N + shift]) * qb[-shift:]
    folded = u.reshape(-1, M).sum(axis=0)
    return np.fft.ifft(folded) * M


def interference_profile(bank: FilterBank) -> SirReport:
    """Desired gain and interference power for every subcarrier, ideal channel."""
    cfg = bank.config
    M, B, L = cfg.M, cfg.B, cfg.L
    q = bank.windows
    d = np.arange(M)
    desired = np.empty(B)
    intra = np.zeros(B)
    cross = np.zeros(B)
    for b in range(B):
        for bp in range(B):
            allowed = (d - (bp - b)) % B == 0
            for k in range(-(L - 1), L):
                P = np.abs(cross_ambiguity(q[b], q[bp], M, k)) ** 2
                P = P[allowed]
                if k == 0:
                    if bp == b:
                        desired[b] = P[0]
                        P = P[1:]
                    intra[b] += P.sum()
                else:
                    cross[b] += P.sum()
    bank_of = np.arange(M) % B
    return SirReport(desired=desired[bank_of], intra=intra[bank_of], cross=cross[bank_of])


# --------------------------------------------------------------------------
# Coefficient files
# --------------------------------------------------------------------------


class FilterFileError(ValueError):
    """Malformed filter coefficient file; message names the line and field."""

    def __init__(self, path, line: int | None, message: str):
        where = f"{path}:{line}" if line is not None else str(path)
        super().__init__(f"{where}: {message}")
        self.path = path
        self.line = line


def save_filter_bank(bank: FilterBank, path) -> None:
    cfg = bank.config
    with open(path, "w", encoding="ascii") as fh:
        fh.write(f"# qamfbmc filter bank: {bank.name}\n")
        fh.write(f"{cfg.M} {cfg.B} {cfg.L}\n")
        for b, proto in enumerate(bank.prototypes):
            fh.write(f"# bank {b}\n")
            for c in proto.coefficients:
                fh.write(f"{float(c.real)!r} {float(c.imag)!r}\n")


def load_filter_bank(path, expected: FilterBankConfig | None = None) -> FilterBank:
    """Read a coefficient file; optionally require a specific ``(M, B, L)``."""
    path = Path(path)
    rows: list[tuple[int, str]] = []
    with open(path, encoding="ascii") as fh:
        for lineno, raw in enumerate(fh, start=1):
            text = raw.strip()
            if text and not text.startswith("#"):
                rows.append((lineno, text))
    if not rows:
        raise FilterFileError(path, None, "empty file, expected header 'M B L'")

    lineno, header = rows[0]
    fields = header.split()
    if len(fields) != 3:
        raise FilterFileError(path, lineno, f"header needs 3 integers 'M B L', got {header!r}")
    dims = []
    for name, tok in zip("MBL", fields):
        try:
            dims.append(int(tok))
        except ValueError:
            raise FilterFileError(path, lineno, f"header field {name}={tok!r} is not an integer") from None
    try:
        cfg = FilterBankConfig(*dims)
    except ValueError as exc:
        raise FilterFileError(path, lineno, str(exc)) from None
    if expected is not None and (cfg.M, cfg.B, cfg.L) != (expected.M, expected.B, expected.L):
        raise FilterFileError(
            path, lineno,
            f"header (M,B,L)=({cfg.M},{cfg.B},{cfg.L}) does not match configured "
            f"({expected.M},{expected.B},{expected.L})",
        )

    body = rows[1:]
    if len(body) != cfg.B * cfg.N:
        raise FilterFileError(
            path, None,
            f"expected {cfg.B} blocks of N={cfg.N} coefficient lines, found {len(body)} lines",
        )
    coeffs = np.empty(cfg.B * cfg.N, dtype=complex)
    for i, (lineno, text) in enumerate(body):
        parts = text.split()
        if len(parts) != 2:
            raise FilterFileError(path, lineno, f"expected 're im', got {text!r}")
        try:
            re, im = float(parts[0]), float(parts[1])
        except ValueError:
            raise FilterFileError(path, lineno, f"non-numeric coefficient {text!r}") from None
        if not (math.isfinite(re) and math.isfinite(im)):
            raise FilterFileError(path, lineno, "coefficient is not finite")
        coeffs[i] = complex(re, im)
    blocks = coeffs.reshape(cfg.B, cfg.N)
    return FilterBank(
        cfg, tuple(PrototypeFilter(b, blocks[b]) for b in range(cfg.B)), name=path.stem
    )
