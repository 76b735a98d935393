"""Convolutional coding, Viterbi decoding, block interleaving and 16-QAM."""
from dataclasses import dataclass

import numpy as np

from ._validation import check_bits, check_positive

__all__ = [
    "CodeSpec",
    "conv_encode",
    "viterbi_decode",
    "hard_bits_to_llr",
    "interleave",
    "deinterleave",
    "qam16_map",
    "qam16_demap_hard",
    "qam16_llr",
    "QAM16_POINTS",
]


@dataclass(frozen=True)
class CodeSpec:
    """Rate-1/2 feedforward convolutional code.

    Generators are octal tap masks with the most significant bit acting on
    the current input bit.
    """

    constraint_length: int = 7
    generators: tuple = (0o171, 0o133)

    def __post_init__(self):
        if len(self.generators) != 2:
            raise ValueError("only rate 1/2 codes are supported")
        limit = 1 << self.constraint_length
        for g in self.generators:
            if not 0 < g < limit:
                raise ValueError(f"generator {g:o} does not fit in constraint length {self.constraint_length}")

    @property
    def memory(self):
        return self.constraint_length - 1

    @property
    def n_states(self):
        return 1 << self.memory


DEFAULT_CODE = CodeSpec()


def _parity(x):
    x = np.asarray(x, dtype=np.int64)
    out = np.zeros_like(x)
    while np.any(x):
        out ^= x & 1
        x = x >> 1
    return out


def _trellis(spec):
    # state = last `memory` inputs, newest in the MSB; register = u<<memory | state
    m = spec.memory
    states = np.arange(spec.n_states)
    tables = {}
    for u in (0, 1):
        reg = (u << m) | states
        out = np.stack([_parity(reg & g) for g in spec.generators], axis=-1)
        tables[u] = (reg >> 1, out)
    return tables


def conv_encode(bits, spec=DEFAULT_CODE):
    """Encode ``bits`` starting and ending in the zero state.

    ``memory`` zero tail bits are appended, so the output has
    ``2 * (len(bits) + memory)`` bits, interleaved as ``[c0_0, c1_0, c0_1, ...]``.
    """
    bits = check_bits(bits)
    if bits.size == 0:
        raise ValueError("bits must not be empty")
    m = spec.memory
    u = np.concatenate([bits, np.zeros(m, dtype=np.uint8)]).astype(np.int64)
    # reg[t] = sum_k u[t-k] << (m-k)
    padded = np.concatenate([np.zeros(m, dtype=np.int64), u])
    reg = np.zeros(u.size, dtype=np.int64)
    for k in range(m + 1):
        reg |= padded[m - k: m - k + u.size] << (m - k)
    out = np.stack([_parity(reg & g) for g in spec.generators], axis=-1)
    return out.reshape(-1).astype(np.uint8)


def hard_bits_to_llr(bits):
    """Map hard bits to +/-1 LLRs (bit 0 -> +1)."""
    return 1.0 - 2.0 * check_bits(bits).astype(np.float64)


def viterbi_decode(llrs, spec=DEFAULT_CODE):
    """Max-log Viterbi decoding of zero-tail terminated codewords.

    ``llrs`` is either one codeword (1-D) or a batch of equal-length
    codewords (2-D, one per row). Positive LLR means bit 0 is more likely.
    Returns the information bits with the tail removed.
    """
    llrs = np.asarray(llrs, dtype=np.float64)
    single = llrs.ndim == 1
    if single:
        llrs = llrs[None, :]
    if llrs.ndim != 2:
        raise ValueError("llrs must be 1-D or 2-D")
    n_coded = llrs.shape[1]
    if n_coded % 2 or n_coded // 2 <= spec.memory:
        raise ValueError(f"codeword length {n_coded} is not a tail-terminated rate-1/2 codeword")
    if not np.all(np.isfinite(llrs)):
        raise ValueError("llrs contain NaN or Inf")

    n_steps = n_coded // 2
    n_states = spec.n_states
    m = spec.memory
    batch = llrs.shape[0]

    # predecessors of each next state: ns = u<<(m-1) | s>>1, so s = (ns<<1 & mask) | b
    ns = np.arange(n_states)
    u_of_ns = ns >> (m - 1)
    pred = np.stack([((ns << 1) & (n_states - 1)) | b for b in (0, 1)], axis=-1)
    tables = _trellis(spec)
    outs = np.empty((n_states, 2, 2), dtype=np.int64)
    for b in (0, 1):
        for u in (0, 1):
            sel = u_of_ns == u
            outs[sel, b] = tables[u][1][pred[sel, b]]
    # branch code index 0..3 = 2*c0 + c1
    code_idx = outs[..., 0] * 2 + outs[..., 1]

    pairs = llrs.reshape(batch, n_steps, 2)
    sign = np.array([[1, 1], [1, -1], [-1, 1], [-1, -1]], dtype=np.float64)
    neg_inf = -np.inf
    pm = np.full((batch, n_states), neg_inf)
    pm[:, 0] = 0.0
    decisions = np.empty((n_steps, batch, n_states), dtype=np.uint8)
    p0, p1 = pred[:, 0], pred[:, 1]
    c0, c1 = code_idx[:, 0], code_idx[:, 1]
    for t in range(n_steps):
        bm = pairs[:, t, :] @ sign.T  # (batch, 4) correlation metrics
        cand0 = pm[:, p0] + bm[:, c0]
        cand1 = pm[:, p1] + bm[:, c1]
        choose1 = cand1 > cand0
        decisions[t] = choose1
        pm = np.where(choose1, cand1, cand0)
        # keep metrics bounded on long frames
        pm -= pm.max(axis=1, keepdims=True)

    state = np.zeros(batch, dtype=np.int64)
    rows = np.arange(batch)
    decoded = np.empty((batch, n_steps), dtype=np.uint8)
    for t in range(n_steps - 1, -1, -1):
        decoded[:, t] = state >> (m - 1)
        b = decisions[t, rows, state]
        state = ((state << 1) & (n_states - 1)) | b
    decoded = decoded[:, : n_steps - m]
    return decoded[0] if single else decoded


def interleave(x, rows=64):
    """Block interleaver over a ``rows``-row array.

    The input fills the array column by column and is read out row by row,
    so ``[a, b, c, d, e, f]`` with two rows becomes ``[a, c, e, b, d, f]``.
    """
    x = np.asarray(x)
    if rows < 1 or x.shape[0] % rows:
        raise ValueError(f"length {x.shape[0]} is not divisible by rows={rows}")
    return x.reshape(-1, rows).T.reshape(-1)


def deinterleave(x, rows=64):
    x = np.asarray(x)
    if rows < 1 or x.shape[0] % rows:
        raise ValueError(f"length {x.shape[0]} is not divisible by rows={rows}")
    return x.reshape(rows, -1).T.reshape(-1)


_LEVELS = np.array([3.0, 1.0, -3.0, -1.0])  # indexed by 2*b0 + b1: 00, 01, 10, 11
_SCALE = 1.0 / np.sqrt(10.0)


def _all_points():
    idx = np.arange(16)
    bits = (idx[:, None] >> np.array([3, 2, 1, 0])) & 1
    re = _LEVELS[2 * bits[:, 0] + bits[:, 1]]
    im = _LEVELS[2 * bits[:, 2] + bits[:, 3]]
    return (re + 1j * im) * _SCALE, bits.astype(np.uint8)


QAM16_POINTS, QAM16_BITS = _all_points()


def qam16_map(bits):
    """Gray-mapped 16-QAM with unit average power.

    Bits ``b0 b1`` select the real level and ``b2 b3`` the imaginary level,
    with ``00 -> +3, 01 -> +1, 11 -> -1, 10 -> -3`` (scaled by 1/sqrt(10)).
    """
    bits = check_bits(bits)
    if bits.size % 4:
        raise ValueError("bit count must be divisible by 4")
    b = bits.reshape(-1, 4).astype(np.int64)
    re = _LEVELS[2 * b[:, 0] + b[:, 1]]
    im = _LEVELS[2 * b[:, 2] + b[:, 3]]
    return (re + 1j * im) * _SCALE


def _axis_bits(v):
    # nearest level on one axis -> (msb, lsb)
    lv = np.clip(np.round((np.asarray(v) / _SCALE + 3) / 2), 0, 3) * 2 - 3
    msb = (lv < 0).astype(np.uint8)
    lsb = (np.abs(lv) == 1).astype(np.uint8)
    return msb, lsb


def qam16_demap_hard(symbols):
    symbols = np.asarray(symbols, dtype=np.complex128).reshape(-1)
    b0, b1 = _axis_bits(symbols.real)
    b2, b3 = _axis_bits(symbols.imag)
    return np.stack([b0, b1, b2, b3], axis=-1).reshape(-1)


def _axis_llr(v, noise_var):
    # max-log LLRs of the (msb, lsb) pair for one PAM-4 axis
    lv = _LEVELS * _SCALE
    d = (np.asarray(v)[..., None] - lv) ** 2  # distances to +3, +1, -3, -1
    msb0 = np.minimum(d[..., 0], d[..., 1])  # levels with msb 0
    msb1 = np.minimum(d[..., 2], d[..., 3])
    lsb0 = np.minimum(d[..., 0], d[..., 2])
    lsb1 = np.minimum(d[..., 1], d[..., 3])
    return (msb1 - msb0) / noise_var, (lsb1 - lsb0) / noise_var


def qam16_llr(symbol, noise_var):
    """Max-log LLRs of the four bits carried by each symbol.

    ``noise_var`` is the total complex noise variance ``2*sigma^2`` (scalar or
    one per symbol). Output shape is ``symbol.shape + (4,)``.
    """
    symbol = np.asarray(symbol, dtype=np.complex128)
    nv = np.asarray(noise_var, dtype=np.float64)
    if np.any(~np.isfinite(nv)) or np.any(nv <= 0):
        raise ValueError("noise_var must be positive")
    if nv.ndim == 0:
        check_positive(float(nv), "noise_var")
    # real and imaginary axes are independent under the product mapping
    l0, l1 = _axis_llr(symbol.real, nv)
    l2, l3 = _axis_llr(symbol.imag, nv)
    return np.stack([l0, l1, l2, l3], axis=-1)
