"""Bit pipeline: QAM mapping, rate-1/2 convolutional code, interleaving,
Viterbi decoding.

Labeling convention used throughout: a symbol index is its bit pattern
read MSB-first, so constellation index 0b0110 carries the bits
(0, 1, 1, 0). For 16-QAM the first two bits select the real axis and the
last two the imaginary axis, Gray coded per axis:

    bit pair 00 -> -3, 01 -> -1, 11 -> +1, 10 -> +3, scaled by 1/sqrt(10).

LLR sign convention everywhere: positive LLR means the bit is 0.
"""

from dataclasses import dataclass, field

import numpy as np

from ._kernels import viterbi_acs
from .streams import substream

__all__ = [
    "Constellation",
    "qam16",
    "qpsk",
    "bpsk",
    "qam16_map",
    "ConvCode",
    "CODE",
    "conv_encode",
    "interleave",
    "deinterleave",
    "viterbi_decode",
    "Frame",
    "build_frame",
    "frame_info_bit_count",
    "VECTORS_PER_FRAME",
]

VECTORS_PER_FRAME = 64


@dataclass(frozen=True)
class Constellation:
    """Scalar constellation with an MSB-first index labeling.

    points[i] is the symbol whose bit pattern is the binary expansion of
    i; bit_table[i] spells that pattern out. Average energy is 1.
    """

    name: str
    points: np.ndarray
    bits_per_symbol: int
    bit_table: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.complex128)
        if pts.ndim != 1 or len(pts) != 2 ** self.bits_per_symbol:
            raise ValueError("points must list 2**bits_per_symbol symbols")
        object.__setattr__(self, "points", pts)
        idx = np.arange(len(pts))
        table = np.zeros((len(pts), self.bits_per_symbol), dtype=np.uint8)
        for j in range(self.bits_per_symbol):
            table[:, j] = (idx >> (self.bits_per_symbol - 1 - j)) & 1
        object.__setattr__(self, "bit_table", table)

    def bits_to_indices(self, bits):
        bits = np.asarray(bits, dtype=np.int64)
        if bits.ndim != 1 or bits.size % self.bits_per_symbol:
            raise ValueError(
                f"bit count must be a multiple of {self.bits_per_symbol}"
            )
        if np.any((bits != 0) & (bits != 1)):
            raise ValueError("bits must be 0 or 1")
        groups = bits.reshape(-1, self.bits_per_symbol)
        weights = 1 << np.arange(self.bits_per_symbol - 1, -1, -1)
        return groups @ weights

    def indices_to_bits(self, indices):
        indices = np.asarray(indices, dtype=np.int64)
        return self.bit_table[indices].reshape(indices.shape + (self.bits_per_symbol,))

    def map_bits(self, bits):
        """Symbols for a bit sequence (length a multiple of bits_per_symbol)."""
        return self.points[self.bits_to_indices(bits)]

    def quantize(self, values):
        """Nearest-point indices, entrywise; exact midpoints go to the
        lower index."""
        values = np.asarray(values, dtype=np.complex128)
        d2 = np.abs(values[..., None] - self.points) ** 2
        return np.argmin(d2, axis=-1)

    def demap_hard(self, values):
        """Nearest-point bit decisions, flattened in symbol order."""
        return self.indices_to_bits(self.quantize(values)).reshape(-1)


def qam16():
    """16-QAM, Gray per axis, unit average energy (see module docstring)."""
    amp = {0b00: -3.0, 0b01: -1.0, 0b11: 1.0, 0b10: 3.0}
    pts = np.empty(16, dtype=np.complex128)
    for i in range(16):
        re = amp[(i >> 2) & 0b11]
        im = amp[i & 0b11]
        pts[i] = (re + 1j * im) / np.sqrt(10.0)
    return Constellation("16qam", pts, 4)


def qpsk():
    """QPSK: first bit -> real axis, second -> imaginary; 0 -> -1, 1 -> +1."""
    pts = np.array(
        [(-1 - 1j), (-1 + 1j), (1 - 1j), (1 + 1j)], dtype=np.complex128
    ) / np.sqrt(2.0)
    return Constellation("qpsk", pts, 2)


def bpsk():
    """BPSK with bit 0 -> +1, bit 1 -> -1."""
    return Constellation("bpsk", np.array([1.0 + 0j, -1.0 + 0j]), 1)


def qam16_map(bits):
    """16-QAM symbols for a bit sequence (4 bits per symbol)."""
    return qam16().map_bits(bits)


@dataclass(frozen=True)
class ConvCode:
    """Rate-1/2 convolutional code, generators octal (133, 171),
    constraint length 7."""

    generators: tuple = (0o133, 0o171)
    constraint_length: int = 7

    @property
    def memory(self):
        return self.constraint_length - 1

    def taps(self, g):
        """MSB-first tap array of one generator (current input first)."""
        return np.array(
            [(g >> (self.constraint_length - 1 - i)) & 1 for i in range(self.constraint_length)],
            dtype=np.int64,
        )


CODE = ConvCode()

# +-1 branch labels per 7-bit register value (bit 6 = current input),
# used by the Viterbi correlation metric.
def _branch_signs(g):
    regs = np.arange(128)
    parity = np.zeros(128, dtype=np.int64)
    for b in range(7):
        parity ^= (regs >> b) & ((g >> b) & 1)
    return (1.0 - 2.0 * parity).astype(np.float64)


_SGN0, _SGN1 = (_branch_signs(g) for g in CODE.generators)


def conv_encode(info_bits):
    """Encode with zero-state start and six zero tail bits.

    Output has 2*(len + 6) bits; even positions carry the octal-133
    stream, odd positions the octal-171 stream.
    """
    u = np.asarray(info_bits, dtype=np.int64)
    if u.ndim != 1:
        raise ValueError("info_bits must be a flat bit sequence")
    if np.any((u != 0) & (u != 1)):
        raise ValueError("bits must be 0 or 1")
    out = np.empty(2 * (u.size + CODE.memory), dtype=np.int64)
    for k, g in enumerate(CODE.generators):
        stream = np.convolve(u, CODE.taps(g)) % 2 if u.size else np.zeros(CODE.memory, np.int64)
        out[k::2] = stream
    return out


def interleave(seq, seed):
    """Apply the pseudo-random permutation keyed by ``seed``.

    The permutation comes from the package's counter-based generator
    (Fisher-Yates shuffle as implemented by numpy's Generator), so the
    same seed always produces the same order.
    """
    seq = np.asarray(seq)
    perm = substream(seed).permutation(seq.size)
    return seq[perm]


def deinterleave(seq, seed):
    """Invert interleave for the same seed and length."""
    seq = np.asarray(seq)
    perm = substream(seed).permutation(seq.size)
    out = np.empty_like(seq)
    out[perm] = seq
    return out


def viterbi_decode(values, soft=False):
    """Maximum-likelihood decoding on the 64-state trellis.

    values holds, per coded bit, either hard decisions {0,1} (soft=False,
    Hamming metric) or LLRs with positive meaning bit 0 (soft=True,
    correlation metric). Length must be 2*(k + 6) for some k >= 1; the
    path is forced to start and end in state 0 (zero tail) and the six
    tail bits are stripped from the result.
    """
    values = np.asarray(values, dtype=np.float64)
    if values.ndim != 1 or values.size % 2:
        raise ValueError("coded sequence length must be even")
    steps = values.size // 2
    n_info = steps - CODE.memory
    if n_info < 1:
        raise ValueError("sequence too short for a terminated frame")
    if soft:
        llr = values
    else:
        hard = values.astype(np.int64)
        if np.any((hard != 0) & (hard != 1)):
            raise ValueError("hard input must be 0/1 bits")
        llr = 1.0 - 2.0 * hard
    bits = viterbi_acs(
        np.ascontiguousarray(llr[0::2]),
        np.ascontiguousarray(llr[1::2]),
        _SGN0,
        _SGN1,
    )
    return bits[:n_info].astype(np.int64)


@dataclass(frozen=True)
class Frame:
    """One coded frame: bits at each pipeline stage plus the symbol block.

    symbol_vectors has shape (m_t, VECTORS_PER_FRAME); column j is the
    j-th transmit vector, filled with consecutive symbols.
    """

    info_bits: np.ndarray
    coded_bits: np.ndarray
    interleaved_bits: np.ndarray
    symbol_vectors: np.ndarray
    interleaver_seed: int


def frame_info_bit_count(m_t, bits_per_symbol, n_vectors=VECTORS_PER_FRAME):
    """Information bits per frame so that the rate-1/2 coded, terminated
    frame exactly fills n_vectors symbol vectors (506 for 4x4 16-QAM)."""
    coded = n_vectors * m_t * bits_per_symbol
    if coded % 2:
        raise ValueError("coded bit count must be even")
    info = coded // 2 - CODE.memory
    if info < 1:
        raise ValueError("frame too small for the terminated code")
    return info


def build_frame(info_bits, m_t, constellation, interleaver_seed):
    """Run the transmit-side pipeline: encode, interleave, map, block."""
    info_bits = np.asarray(info_bits, dtype=np.int64)
    coded = conv_encode(info_bits)
    inter = interleave(coded, interleaver_seed)
    if inter.size % (m_t * constellation.bits_per_symbol):
        raise ValueError("coded bits do not fill a whole number of vectors")
    symbols = constellation.map_bits(inter)
    vectors = symbols.reshape(-1, m_t).T.copy()
    return Frame(
        info_bits=info_bits,
        coded_bits=coded,
        interleaved_bits=inter,
        symbol_vectors=vectors,
        interleaver_seed=int(interleaver_seed),
    )
