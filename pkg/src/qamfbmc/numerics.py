"""Transforms, random streams and scalar helpers shared by the simulator.

All transforms use the unitary ``1/sqrt(N)`` normalization in both directions,
so that ``dft(dft(x), inverse=True) == x`` and Parseval holds without extra
factors.
"""

from __future__ import annotations

import numpy as np
from scipy.special import erfc

__all__ = [
    "dft",
    "RngStream",
    "rng_stream",
    "gaussian_complex",
    "qfunc",
]


def dft(x, inverse: bool = False, axis: int = -1) -> np.ndarray:
    """Unitary DFT (or IDFT) of arbitrary length along ``axis``.

    Parameters
    ----------
    x : array_like
        Complex samples. Any length >= 1, prime lengths included.
    inverse : bool
        Compute the inverse transform.
    axis : int
        Axis to transform; leading axes are batch dimensions.

    Raises
    ------
    ValueError
        If the transform length is zero.
    """
    x = np.asarray(x, dtype=complex)
    if x.ndim == 0 or x.shape[axis] == 0:
        raise ValueError("dft requires a transform length >= 1")
    # pocketfft: mixed-radix kernels with a Bluestein path for large prime factors
    if inverse:
        return np.fft.ifft(x, axis=axis, norm="ortho")
    return np.fft.fft(x, axis=axis, norm="ortho")


class RngStream:
    """Reproducible random stream addressed by ``(seed, stream_id, ...)``.

    Streams with different ids are statistically independent, and a given
    address yields the same samples regardless of which process draws them
    or in which order the streams are created.
    """

    def __init__(self, seed: int, *stream_id: int):
        if seed < 0 or seed >= 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")
        self.seed = int(seed)
        self.stream_id = tuple(int(s) for s in stream_id)
        ss = np.random.SeedSequence(self.seed, spawn_key=self.stream_id)
        self.generator = np.random.Generator(np.random.Philox(ss))

    def child(self, *sub_id: int) -> "RngStream":
        """Independent stream nested under this one."""
        return RngStream(self.seed, *self.stream_id, *sub_id)

    def bits(self, n) -> np.ndarray:
        return self.generator.integers(0, 2, size=n, dtype=np.uint8)

    def normal(self, size) -> np.ndarray:
        return self.generator.standard_normal(size)

    def __repr__(self) -> str:
        return f"RngStream(seed={self.seed}, stream_id={self.stream_id})"


def rng_stream(seed: int, *stream_id: int) -> RngStream:
    return RngStream(seed, *stream_id)


def gaussian_complex(rng: RngStream, variance: float, n) -> np.ndarray:
    """Circularly-symmetric complex Gaussian samples with ``E|z|^2 = variance``.

    ``n`` may be an int or a shape tuple. The underlying unit-variance draws
    do not depend on ``variance``, so sweeping the variance with the same
    stream scales one fixed noise realization.
    """
    if variance < 0:
        raise ValueError(f"variance must be >= 0, got {variance}")
    shape = (n,) if np.isscalar(n) else tuple(n)
    z = rng.normal((2,) + shape)
    return np.sqrt(variance / 2.0) * (z[0] + 1j * z[1])


def qfunc(x) -> np.ndarray | float:
    """Gaussian tail probability ``Q(x) = P(Z > x)``."""
    out = 0.5 * erfc(np.asarray(x, dtype=float) / np.sqrt(2.0))
    return float(out) if np.ndim(out) == 0 else out
