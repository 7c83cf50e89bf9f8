"""Rate-1/2 convolutional code with zero-tail termination and a soft Viterbi decoder."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

__all__ = ["ConvCode", "conv_encode", "viterbi_decode", "coded_length"]


@dataclass(frozen=True)
class ConvCode:
    """Feed-forward code; generator MSBs tap the current input bit."""

    K: int = 7
    polys: tuple[int, int] = (0o133, 0o171)

    def __post_init__(self):
        if self.K < 2:
            raise ValueError("constraint length must be >= 2")
        if len(self.polys) != 2:
            raise ValueError("rate-1/2 code needs exactly two generators")
        for g in self.polys:
            if not 0 < g < 2**self.K:
                raise ValueError(f"generator {g:o} (octal) must be nonzero with degree < K={self.K}")

    @property
    def n_states(self) -> int:
        return 2 ** (self.K - 1)

    def taps(self, j: int) -> np.ndarray:
        """Generator ``j`` as 0/1 taps on ``u[t], u[t-1], ..., u[t-K+1]``."""
        g = self.polys[j]
        return np.array([(g >> (self.K - 1 - i)) & 1 for i in range(self.K)], dtype=np.int64)

    @cached_property
    def trellis(self):
        """``(prev_states, outputs)`` for every next state and both predecessors.

        State is ``u[t-1] .. u[t-K+1]`` with ``u[t-1]`` as MSB.  For next state
        ``s'`` the input bit is ``s' >> (K-2)`` and predecessor ``x`` is
        ``((s' << 1) | x) & (n_states - 1)``.
        """
        S, K = self.n_states, self.K
        nxt = np.arange(S)
        u = nxt >> (K - 2)
        prev = np.stack([((nxt << 1) | x) & (S - 1) for x in (0, 1)], axis=1)  # (S, 2)
        reg = (u[:, None] << (K - 1)) | prev
        out = np.stack(
            [np.array([bin(int(r) & g).count("1") & 1 for r in reg.ravel()]).reshape(S, 2) for g in self.polys],
            axis=-1,
        )  # (S, 2, 2): next state, predecessor, output bit j
        return prev, out


def coded_length(n_bits: int, code: ConvCode) -> int:
    return 2 * (n_bits + code.K - 1)


def conv_encode(bits, code: ConvCode = ConvCode()) -> np.ndarray:
    """Encode, appending ``K-1`` zero tail bits; output interleaves the two generators."""
    u = np.concatenate([np.asarray(bits, dtype=np.int64).reshape(-1), np.zeros(code.K - 1, np.int64)])
    out = np.empty(2 * u.size, dtype=np.uint8)
    for j in range(2):
        out[j::2] = np.convolve(u, code.taps(j))[: u.size] & 1
    return out


def viterbi_decode(llrs, code: ConvCode = ConvCode()) -> np.ndarray:
    """Maximum-likelihood input bits for one block or a batch of blocks.

    ``llrs`` has shape ``(..., 2*(n + K - 1))`` with positive values favouring
    bit 0.  Branch metric is ``sum (1 - 2c) * llr``.  Among equally likely
    paths the lexicographically smallest input sequence wins: survivors are
    ranked by history, and a tie picks the better-ranked predecessor.
    """
    llrs = np.asarray(llrs, dtype=float)
    if llrs.shape[-1] % 2:
        raise ValueError(f"LLR count {llrs.shape[-1]} is not divisible by 2")
    lead = llrs.shape[:-1]
    steps = llrs.shape[-1] // 2
    n = steps - (code.K - 1)
    if n < 0:
        raise ValueError(f"need at least {2 * (code.K - 1)} LLRs for the tail")
    L = llrs.reshape(-1, steps, 2)
    nb = L.shape[0]
    S = code.n_states
    prev, out = code.trellis
    sign = 1.0 - 2.0 * out  # (S, 2, 2)

    metric = np.full((nb, S), -np.inf)
    metric[:, 0] = 0.0
    rank = np.zeros((nb, S), dtype=np.int64)
    u_of = (np.arange(S) >> (code.K - 2)).astype(np.int64)
    choice = np.empty((steps, nb, S), dtype=np.uint8)
    rows = np.arange(nb)[:, None]
    for t in range(steps):
        branch = np.einsum("bj,spj->bsp", L[:, t, :], sign)  # (nb, S, 2)
        if t >= n:
            # tail: only input 0 is allowed
            branch = np.where((u_of == 1)[None, :, None], -np.inf, branch)
        cand = metric[:, prev] + branch  # (nb, S, 2)
        pr = rank[:, prev]
        pick = (cand[..., 1] > cand[..., 0]) | ((cand[..., 1] == cand[..., 0]) & (pr[..., 1] < pr[..., 0]))
        pick = pick.astype(np.uint8)
        choice[t] = pick
        metric = np.take_along_axis(cand, pick[..., None].astype(np.intp), axis=-1)[..., 0]
        src_rank = np.take_along_axis(pr, pick[..., None].astype(np.intp), axis=-1)[..., 0]
        key = src_rank * 2 + u_of[None, :]
        rank = np.argsort(np.argsort(key, axis=1), axis=1)

    state = np.zeros(nb, dtype=np.int64)
    decoded = np.empty((nb, steps), dtype=np.uint8)
    for t in range(steps - 1, -1, -1):
        decoded[:, t] = u_of[state]
        state = prev[state, choice[t, rows[:, 0], state]]
    return decoded[:, :n].reshape(lead + (n,))
