import itertools
from functools import lru_cache

import numpy as np
import pytest

from qamfbmc.coding import ConvCode, coded_length, conv_encode, viterbi_decode

CODE = ConvCode()


@lru_cache(maxsize=4)
def codebook(n, code):
    inputs = np.array(list(itertools.product((0, 1), repeat=n)), dtype=np.int64)
    return inputs, np.stack([conv_encode(u, code) for u in inputs])


def brute_force_ml(llr, n, code=CODE):
    """Exhaustive search over all 2^n inputs; ties go to the smallest input read MSB-first."""
    inputs, words = codebook(n, code)
    score = ((1.0 - 2.0 * words) * llr).sum(axis=1)
    return inputs[np.argmax(score)]  # argmax returns the first, i.e. smallest, maximiser


def test_reference_impulse_response():
    assert "".join(map(str, conv_encode([1]))) == "11011111001011"


def test_encoder_linearity():
    rng = np.random.default_rng(0)
    a, b = rng.integers(0, 2, 40), rng.integers(0, 2, 40)
    assert np.array_equal(conv_encode(a ^ b), conv_encode(a) ^ conv_encode(b))


def test_encoder_against_shift_register():
    rng = np.random.default_rng(1)
    u = rng.integers(0, 2, 30)
    reg = [0] * 7
    ref = []
    for bit in list(u) + [0] * 6:
        reg = [int(bit)] + reg[:-1]
        for g in CODE.polys:
            taps = [(g >> (6 - i)) & 1 for i in range(7)]
            ref.append(sum(t * r for t, r in zip(taps, reg)) % 2)
    assert conv_encode(u).tolist() == ref
    assert coded_length(30, CODE) == len(ref)


def test_code_validation():
    assert CODE.n_states == 64
    with pytest.raises(ValueError):
        ConvCode(1)
    with pytest.raises(ValueError):
        ConvCode(3, (0o7,))
    with pytest.raises(ValueError):
        ConvCode(3, (0o17, 0o5))


@pytest.mark.parametrize("n", [1, 12, 100])
def test_noiseless_decoding(n):
    u = np.random.default_rng(n).integers(0, 2, n)
    llr = 4.0 * (1 - 2.0 * conv_encode(u))
    assert np.array_equal(viterbi_decode(llr), u)


def test_viterbi_matches_brute_force_ml():
    rng = np.random.default_rng(2)
    n = 12
    llrs = []
    for _ in range(200):
        u = rng.integers(0, 2, n)
        llrs.append((1 - 2.0 * conv_encode(u)) + rng.normal(0, 1.2, coded_length(n, CODE)))
    llrs = np.array(llrs)
    batch = viterbi_decode(llrs)
    for llr, dec in zip(llrs, batch):
        assert np.array_equal(dec, brute_force_ml(llr, n))


def test_ties_resolved_like_brute_force():
    rng = np.random.default_rng(3)
    n = 12
    for _ in range(100):
        # coarse integer LLRs with many erasures produce exact metric ties
        llr = rng.integers(-1, 2, coded_length(n, CODE)) * (rng.random(coded_length(n, CODE)) < 0.4)
        assert np.array_equal(viterbi_decode(llr.astype(float)), brute_force_ml(llr.astype(float), n))
    assert not viterbi_decode(np.zeros(coded_length(n, CODE))).any()


def test_small_code_brute_force():
    code = ConvCode(3, (0o7, 0o5))
    rng = np.random.default_rng(4)
    for _ in range(30):
        llr = rng.normal(0, 1, coded_length(8, code))
        assert np.array_equal(viterbi_decode(llr, code), brute_force_ml(llr, 8, code))


def test_batch_shapes_and_errors():
    llr = np.zeros((2, 3, coded_length(5, CODE)))
    assert viterbi_decode(llr).shape == (2, 3, 5)
    assert viterbi_decode(np.zeros(12)).shape == (0,)
    with pytest.raises(ValueError):
        viterbi_decode(np.zeros(13))
    with pytest.raises(ValueError):
        viterbi_decode(np.zeros(10))
