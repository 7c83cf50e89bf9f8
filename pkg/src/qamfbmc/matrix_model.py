"""Dense matrix description of one QAM-FBMC receive window.

The window of symbol 0 is ``W_N x_R = sum_{k=-L}^{L-1} W_N T[k] H W_N^H Pf D[k]``,
where ``H`` is the ``(N+M) x N`` convolution (Toeplitz) matrix of the channel
and ``T[k]`` the ``N x (N+M)`` shift-and-slice selector that places the
channel output of symbol ``k`` (which starts at sample ``k*M``) into the
window ``[0, N)``.  Phase noise multiplies the window by ``diag(exp(j phi))``.

Everything here is ``O(N^2)`` or worse and meant for small ``M``: it is the
reference the fast pipeline is checked against.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import toeplitz

from .filterbank import FilterBank, FilterBankConfig

__all__ = [
    "symbol_offsets",
    "toeplitz_channel",
    "shift_slice_matrix",
    "unitary_dft_matrix",
    "effective_channel",
    "received_window",
    "received_spectrum",
    "phase_noise_matrix",
    "linearized_phase_terms",
]


def symbol_offsets(cfg: FilterBankConfig) -> range:
    """Symbol indices ``k = -L .. L-1`` that can reach the window of symbol 0."""
    return range(-cfg.L, cfg.L)


def toeplitz_channel(h, cfg: FilterBankConfig) -> np.ndarray:
    """``(N+M) x N`` linear-convolution matrix; ``len(h)`` must not exceed ``M+1``."""
    h = np.asarray(h, dtype=complex)
    if h.size > cfg.M + 1:
        raise ValueError(f"channel of {h.size} taps is longer than M+1={cfg.M + 1}")
    col = np.zeros(cfg.N + cfg.M, dtype=complex)
    col[: h.size] = h
    row = np.zeros(cfg.N, dtype=complex)
    row[0] = h[0]
    return toeplitz(col, row)


def shift_slice_matrix(k: int, cfg: FilterBankConfig) -> np.ndarray:
    """``N x (N+M)`` selector with ``T[i, j] = 1`` when ``j == i - k*M``."""
    N, M = cfg.N, cfg.M
    T = np.zeros((N, N + M))
    i = np.arange(N)
    j = i - k * M
    ok = (j >= 0) & (j < N + M)
    T[i[ok], j[ok]] = 1.0
    return T


def unitary_dft_matrix(n: int) -> np.ndarray:
    idx = np.arange(n)
    return np.exp(-2j * np.pi * np.outer(idx, idx) / n) / np.sqrt(n)


def phase_noise_matrix(phi) -> np.ndarray:
    return np.diag(np.exp(1j * np.asarray(phi, dtype=float)))


def effective_channel(h, k: int, cfg: FilterBankConfig, phi=None) -> np.ndarray:
    """Frequency-domain coupling ``W_N [P] T[k] H W_N^H`` from symbol ``k`` into window 0."""
    W = unitary_dft_matrix(cfg.N)
    A = shift_slice_matrix(k, cfg) @ toeplitz_channel(h, cfg)
    if phi is not None:
        A = phase_noise_matrix(phi) @ A
    return W @ A @ W.conj().T


def received_window(grid, bank: FilterBank, h, phi=None) -> np.ndarray:
    """Time-domain window of symbol 0 for ``grid`` rows ``k = -L .. L-1``."""
    cfg = bank.config
    grid = np.asarray(grid, dtype=complex)
    if grid.shape != (2 * cfg.L, cfg.M):
        raise ValueError(f"grid must have shape {(2 * cfg.L, cfg.M)} (rows k = -L..L-1)")
    W = unitary_dft_matrix(cfg.N)
    H = toeplitz_channel(h, cfg)
    x = np.zeros(cfg.N, dtype=complex)
    for row, k in enumerate(symbol_offsets(cfg)):
        x += shift_slice_matrix(k, cfg) @ (H @ (W.conj().T @ (bank.Pf @ grid[row])))
    if phi is not None:
        x = phase_noise_matrix(phi) @ x
    return x


def received_spectrum(grid, bank: FilterBank, h, phi=None) -> np.ndarray:
    """``sum_k Hbar[k] Pf D[k]``: unitary N-point DFT of :func:`received_window`."""
    cfg = bank.config
    grid = np.asarray(grid, dtype=complex)
    out = np.zeros(cfg.N, dtype=complex)
    for row, k in enumerate(symbol_offsets(cfg)):
        out += effective_channel(h, k, cfg, phi) @ (bank.Pf @ grid[row])
    return out


def linearized_phase_terms(x_window, phi) -> tuple[np.ndarray, np.ndarray]:
    """Split ``(I + j diag(phi)) x`` into the phase-free part and the first-order term."""
    x = np.asarray(x_window, dtype=complex)
    return x.copy(), 1j * np.asarray(phi, dtype=float) * x
