import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sparseofdm.fec import (
    QAM16_POINTS,
    CodeSpec,
    conv_encode,
    deinterleave,
    hard_bits_to_llr,
    interleave,
    qam16_demap_hard,
    qam16_llr,
    qam16_map,
    viterbi_decode,
)


def test_codespec_validation():
    with pytest.raises(ValueError):
        CodeSpec(constraint_length=3, generators=(0o171, 0o133))


def test_zero_input_gives_zero_codeword():
    out = conv_encode(np.zeros(10, dtype=int))
    assert out.size == 32 and not out.any()


def test_impulse_response_is_generators():
    out = conv_encode([1])
    g0 = [1, 1, 1, 1, 0, 0, 1]  # 171 octal
    g1 = [1, 0, 1, 1, 0, 1, 1]  # 133 octal
    expected = [b for pair in zip(g0, g1) for b in pair]
    np.testing.assert_array_equal(out[:14], expected)


def test_encode_length_and_determinism(rng):
    bits = rng.integers(0, 2, 1000)
    a, b = conv_encode(bits), conv_encode(bits)
    assert a.size == 2012
    np.testing.assert_array_equal(a, b)


def test_encode_matches_shift_register_oracle(rng):
    bits = rng.integers(0, 2, 200)
    reg = [0] * 7
    out = []
    for u in list(bits) + [0] * 6:
        reg = [u] + reg[:6]
        for g in (0o171, 0o133):
            taps = [(g >> (6 - k)) & 1 for k in range(7)]
            out.append(sum(t * r for t, r in zip(taps, reg)) % 2)
    np.testing.assert_array_equal(conv_encode(bits), out)


def test_viterbi_noiseless_zero():
    np.testing.assert_array_equal(viterbi_decode(np.ones(64)), np.zeros(26))


def test_viterbi_round_trip(rng):
    bits = rng.integers(0, 2, 1000)
    np.testing.assert_array_equal(viterbi_decode(hard_bits_to_llr(conv_encode(bits))), bits)


def test_viterbi_batch_equals_single(rng):
    bits = rng.integers(0, 2, (3, 50))
    llr = np.stack([hard_bits_to_llr(conv_encode(b)) for b in bits]) + rng.normal(0, 0.8, (3, 112))
    batch = viterbi_decode(llr)
    for i in range(3):
        np.testing.assert_array_equal(batch[i], viterbi_decode(llr[i]))


def test_viterbi_corrects_sparse_errors():
    r = np.random.default_rng(7)
    bits = r.integers(0, 2, (100, 1000))
    coded = np.stack([conv_encode(b) for b in bits])
    flips = r.random(coded.shape) < 0.02
    rx = coded ^ flips
    pre = flips.mean()
    post = np.mean(viterbi_decode(1.0 - 2.0 * rx) != bits)
    assert post < pre


def test_viterbi_scale_invariance(rng):
    bits = rng.integers(0, 2, 300)
    llr = hard_bits_to_llr(conv_encode(bits)) + rng.normal(0, 1.0, 612)
    np.testing.assert_array_equal(viterbi_decode(llr), viterbi_decode(7.5 * llr))


def test_viterbi_rejects_bad_length():
    with pytest.raises(ValueError):
        viterbi_decode(np.ones(33))


@pytest.mark.parametrize("seq,rows,expected", [
    (list("abcdef"), 1, list("abcdef")),
    (list("abcdef"), 2, list("acebdf")),
])
def test_interleave_examples(seq, rows, expected):
    assert list(interleave(seq, rows)) == expected


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 16), st.integers(1, 16), st.integers(0, 2**32 - 1))
def test_interleave_inverse(rows, cols, seed):
    x = np.random.default_rng(seed).integers(0, 1000, rows * cols)
    np.testing.assert_array_equal(deinterleave(interleave(x, rows), rows), x)
    np.testing.assert_array_equal(interleave(deinterleave(x, rows), rows), x)


def test_interleave_divisibility():
    with pytest.raises(ValueError):
        interleave(np.arange(10), 3)


def test_qam16_mapping():
    assert qam16_map([0, 0, 0, 0])[0] == pytest.approx((3 + 3j) / np.sqrt(10))
    assert qam16_map([1, 0, 1, 1])[0] == pytest.approx((-3 - 1j) / np.sqrt(10))
    assert abs(np.mean(np.abs(QAM16_POINTS) ** 2) - 1.0) <= 1e-12
    assert len(set(np.round(QAM16_POINTS, 9))) == 16
    with pytest.raises(ValueError):
        qam16_map([0, 1, 1])


def test_qam16_gray_neighbours_differ_in_one_bit():
    pts = qam16_map(np.array(list(itertools.product([0, 1], repeat=4))).reshape(-1))
    bits = np.array(list(itertools.product([0, 1], repeat=4)))
    step = 2 / np.sqrt(10)
    for i, j in itertools.combinations(range(16), 2):
        if abs(abs(pts[i] - pts[j]) - step) < 1e-9:
            assert np.sum(bits[i] != bits[j]) == 1


def test_qam16_hard_round_trip(rng):
    bits = rng.integers(0, 2, 400)
    np.testing.assert_array_equal(qam16_demap_hard(qam16_map(bits)), bits)


def test_qam16_llr_signs_and_symmetry():
    llr = qam16_llr(qam16_map([0, 0, 0, 0])[0], 1e-3)
    assert np.all(llr > 10)
    assert qam16_llr(0j, 1.0)[0] == 0.0
    with pytest.raises(ValueError):
        qam16_llr(0j, 0.0)


def test_qam16_llr_matches_exhaustive_oracle(rng):
    bits = np.array(list(itertools.product([0, 1], repeat=4)))
    pts = np.array([qam16_map(b)[0] for b in bits])
    ys = rng.normal(0, 0.8, 500) + 1j * rng.normal(0, 0.8, 500)
    nv = 0.37
    got = qam16_llr(ys, nv)
    for y, row in zip(ys, got):
        d = np.abs(y - pts) ** 2
        for b in range(4):
            expected = (d[bits[:, b] == 1].min() - d[bits[:, b] == 0].min()) / nv
            assert row[b] == pytest.approx(expected, abs=1e-12)
