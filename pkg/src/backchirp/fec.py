"""Hamming(7,4) link coding, block interleaving, and multi-receiver combining.

Codeword bit order is p1 p2 d1 p3 d2 d3 d4 with
    p1 = d1 ^ d2 ^ d4,  p2 = d1 ^ d3 ^ d4,  p3 = d2 ^ d3 ^ d4,
so a nonzero syndrome names the errored position directly (1-indexed).
The interleaver writes D codewords as the columns of a 7 x D matrix and
transmits row-major, dispersing a burst of up to D consecutive channel
errors into at most one error per codeword.
"""

from dataclasses import dataclass

import numpy as np

CODEWORD_LEN = 7
DATA_BITS = 4


@dataclass(frozen=True)
class InterleaverConfig:
    depth: int = 20  # codewords per block

    def __post_init__(self):
        if self.depth < 1:
            raise ValueError("interleave depth must be >= 1")

    @property
    def block_bits(self):
        return CODEWORD_LEN * self.depth


def _as_bits(bits, length=None):
    arr = np.asarray(bits, dtype=np.uint8)
    if not np.all((arr == 0) | (arr == 1)):
        raise ValueError("bits must be 0/1")
    if length is not None and arr.size != length:
        raise ValueError(f"expected {length} bits, got {arr.size}")
    return arr


def hamming74_encode(nibble):
    """4 data bits -> systematic 7-bit codeword (p1 p2 d1 p3 d2 d3 d4)."""
    d1, d2, d3, d4 = _as_bits(nibble, DATA_BITS)
    p1 = d1 ^ d2 ^ d4
    p2 = d1 ^ d3 ^ d4
    p3 = d2 ^ d3 ^ d4
    return np.array([p1, p2, d1, p3, d2, d3, d4], dtype=np.uint8)


def hamming74_decode(word):
    """Syndrome-decode a 7-bit word.

    Returns (nibble, corrected). Any single-bit error is corrected; two-bit
    errors miscorrect silently, which is inherent to the code.
    """
    w = _as_bits(word, CODEWORD_LEN).copy()
    s1 = w[0] ^ w[2] ^ w[4] ^ w[6]
    s2 = w[1] ^ w[2] ^ w[5] ^ w[6]
    s3 = w[3] ^ w[4] ^ w[5] ^ w[6]
    syndrome = s1 | (s2 << 1) | (s3 << 2)
    if syndrome:
        w[syndrome - 1] ^= 1
    return np.array([w[2], w[4], w[5], w[6]], dtype=np.uint8), bool(syndrome)


def encode_block(data_bits, cfg):
    """Hamming-encode nibbles, zero-padding to fill whole interleave blocks."""
    data = _as_bits(data_bits)
    n_nibbles = -(-data.size // DATA_BITS)
    n_codewords = -(-max(n_nibbles, 1) // cfg.depth) * cfg.depth
    padded = np.zeros(n_codewords * DATA_BITS, dtype=np.uint8)
    padded[:data.size] = data
    nibbles = padded.reshape(-1, DATA_BITS)
    words = np.concatenate([hamming74_encode(nib) for nib in nibbles])
    out = [interleave(words[i:i + cfg.block_bits], cfg)
           for i in range(0, words.size, cfg.block_bits)]
    return np.concatenate(out)


def decode_block(bits, cfg, n_data_bits):
    """Invert encode_block: deinterleave, decode, trim padding.

    Returns (data_bits, corrected_count).
    """
    coded = _as_bits(bits)
    if coded.size % cfg.block_bits:
        raise ValueError("coded length is not a whole number of interleave blocks")
    words = np.concatenate([deinterleave(coded[i:i + cfg.block_bits], cfg)
                            for i in range(0, coded.size, cfg.block_bits)])
    data = []
    corrected = 0
    for i in range(0, words.size, CODEWORD_LEN):
        nib, fixed = hamming74_decode(words[i:i + CODEWORD_LEN])
        data.append(nib)
        corrected += fixed
    return np.concatenate(data)[:n_data_bits], corrected


def coded_length(n_data_bits, cfg):
    """Transmitted bit count for n_data_bits of payload through the pipeline."""
    n_nibbles = -(-n_data_bits // DATA_BITS)
    n_codewords = -(-max(n_nibbles, 1) // cfg.depth) * cfg.depth
    return n_codewords * CODEWORD_LEN


def interleave(bits, cfg):
    """Write D codewords in columns, read out in rows."""
    b = _as_bits(bits, cfg.block_bits)
    return b.reshape(cfg.depth, CODEWORD_LEN).T.reshape(-1).copy()


def deinterleave(bits, cfg):
    """Write in rows, read out in columns: exact inverse of interleave."""
    b = _as_bits(bits, cfg.block_bits)
    return b.reshape(CODEWORD_LEN, cfg.depth).T.reshape(-1).copy()


def coherent_combine(per_receiver, separations=None):
    """Merge per-receiver soft decisions into one hard bit sequence.

    Each entry is (bits, margins) with margins signed toward bit one. The
    margin sums decide each bit; exact ties fall back to the hard decision
    of the receiver with the widest cluster separation.
    """
    if not per_receiver:
        raise ValueError("need at least one receiver")
    bit_arrays = [_as_bits(bits) for bits, _ in per_receiver]
    margin_arrays = [np.asarray(m, dtype=float) for _, m in per_receiver]
    n = bit_arrays[0].size
    for bits, margins in zip(bit_arrays, margin_arrays):
        if bits.size != n or margins.size != n:
            raise ValueError("receiver bit/margin lengths differ")
    total = np.sum(margin_arrays, axis=0)
    if separations is None:
        best = 0
    else:
        best = int(np.argmax(separations))
    out = (total > 0).astype(np.uint8)
    ties = total == 0
    out[ties] = bit_arrays[best][ties]
    return out
