"""Rate-1/2 convolutional coding, block interleaving and bit/symbol mapping.

The default code is the industry-standard constraint-length-7 pair
(171, 133) octal.  Encoding is terminated: K-1 zero bits flush the register,
so a length-n message produces exactly 2*(n + K - 1) coded bits.  Decoding is
hard-decision Viterbi over the full trellis (start and end in state 0).
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

__all__ = [
    "CodeConfig",
    "DEFAULT_CODE",
    "encode",
    "viterbi_decode",
    "interleave",
    "deinterleave",
    "map_bits_to_symbols",
    "map_symbols_to_bits",
]


@dataclass(frozen=True)
class CodeConfig:
    """Convolutional code parameters; rate is fixed at 1/2."""

    constraint_length: int = 7
    generators_octal: tuple[int, int] = (0o171, 0o133)
    interleaver_seed: int = 1234

    def __post_init__(self) -> None:
        k = self.constraint_length
        if k < 2:
            raise ValueError("constraint length must be >= 2")
        for g in self.generators_octal:
            if not (0 < g < (1 << k)):
                raise ValueError("generator degree must be below the constraint length")

    @property
    def rate(self) -> float:
        return 0.5


DEFAULT_CODE = CodeConfig()


def _generator_taps(config: CodeConfig) -> list[np.ndarray]:
    """Each generator as K tap bits, most significant tap = current input bit."""
    k = config.constraint_length
    return [
        np.array([(g >> (k - 1 - i)) & 1 for i in range(k)], dtype=np.uint8)
        for g in config.generators_octal
    ]


def encode(bits: np.ndarray, config: CodeConfig = DEFAULT_CODE) -> np.ndarray:
    """Terminated rate-1/2 encoding; output interleaves the two generator streams."""
    bits = np.asarray(bits, dtype=np.uint8).reshape(-1)
    k = config.constraint_length
    flushed = np.concatenate([bits, np.zeros(k - 1, dtype=np.uint8)])
    streams = [np.convolve(flushed, taps)[: flushed.size] % 2 for taps in _generator_taps(config)]
    out = np.empty(2 * flushed.size, dtype=np.uint8)
    out[0::2], out[1::2] = streams
    return out


@lru_cache(maxsize=8)
def _trellis(constraint_length: int, g0: int, g1: int):
    """Predecessor tables for the vectorized add-compare-select recursion."""
    config = CodeConfig(constraint_length, (g0, g1))
    taps = _generator_taps(config)
    k = constraint_length
    n_states = 1 << (k - 1)
    states = np.arange(n_states)
    next_state = np.empty((n_states, 2), dtype=np.intp)
    out_sym = np.empty((n_states, 2), dtype=np.intp)
    for b in (0, 1):
        reg = (b << (k - 1)) | states  # current bit in the MSB, oldest in the LSB
        o = [np.zeros(n_states, dtype=np.intp), np.zeros(n_states, dtype=np.intp)]
        for i in range(k):
            bit = (reg >> (k - 1 - i)) & 1
            for j in (0, 1):
                if taps[j][i]:
                    o[j] ^= bit
        out_sym[:, b] = (o[0] << 1) | o[1]
        next_state[:, b] = reg >> 1
    pred_state = np.empty((n_states, 2), dtype=np.intp)
    pred_bit = np.empty((n_states, 2), dtype=np.uint8)
    pred_out = np.empty((n_states, 2), dtype=np.intp)
    fill = np.zeros(n_states, dtype=np.intp)
    for s in range(n_states):
        for b in (0, 1):
            t = next_state[s, b]
            pred_state[t, fill[t]] = s
            pred_bit[t, fill[t]] = b
            pred_out[t, fill[t]] = out_sym[s, b]
            fill[t] += 1
    hamming = np.array([[bin(i ^ j).count("1") for j in range(4)] for i in range(4)], dtype=np.int64)
    return pred_state, pred_bit, pred_out, hamming


def viterbi_decode(coded_bits: np.ndarray, config: CodeConfig = DEFAULT_CODE) -> np.ndarray:
    """Maximum-likelihood hard-decision decoding of a terminated stream."""
    coded = np.asarray(coded_bits, dtype=np.uint8).reshape(-1)
    k = config.constraint_length
    if coded.size % 2:
        raise ValueError("coded stream length must be even")
    n_steps = coded.size // 2
    if n_steps < k - 1:
        raise ValueError("coded stream shorter than the termination tail")
    pred_state, pred_bit, pred_out, hamming = _trellis(k, *config.generators_octal)
    n_states = pred_state.shape[0]
    received = (coded[0::2].astype(np.intp) << 1) | coded[1::2]

    big = np.int64(1) << 40  # effectively +inf for path metrics
    metrics = np.full(n_states, big, dtype=np.int64)
    metrics[0] = 0
    choices = np.empty((n_steps, n_states), dtype=np.uint8)
    idx = np.arange(n_states)
    for t in range(n_steps):
        cand = metrics[pred_state] + hamming[pred_out, received[t]]
        best = cand.argmin(axis=1)
        choices[t] = best
        metrics = cand[idx, best]

    state = 0  # termination forces the final state
    decoded = np.empty(n_steps, dtype=np.uint8)
    for t in range(n_steps - 1, -1, -1):
        j = choices[t, state]
        decoded[t] = pred_bit[state, j]
        state = pred_state[state, j]
    return decoded[: n_steps - (k - 1)]


def _permutation(n: int, seed: int) -> np.ndarray:
    return np.random.default_rng(seed).permutation(n)


def interleave(bits: np.ndarray, seed: int) -> np.ndarray:
    """Seeded uniform permutation of the block; inverse is deinterleave."""
    bits = np.asarray(bits)
    return bits[_permutation(bits.size, seed)]


def deinterleave(bits: np.ndarray, seed: int) -> np.ndarray:
    bits = np.asarray(bits)
    perm = _permutation(bits.size, seed)
    out = np.empty_like(bits)
    out[perm] = bits
    return out


def _bits_per_symbol(m_order: int) -> int:
    k = int(m_order).bit_length() - 1
    if m_order < 2 or (1 << k) != m_order:
        raise ValueError("m_order must be a power of two")
    return k


def map_bits_to_symbols(bits: np.ndarray, n_clusters: int, m_order: int) -> np.ndarray:
    """Pack each MSB-first group of log2(M) bits into one symbol.

    The bit count must fill whole frames of n_clusters symbols.
    """
    bits = np.asarray(bits, dtype=np.uint8).reshape(-1)
    k = _bits_per_symbol(m_order)
    if bits.size == 0 or bits.size % (n_clusters * k):
        raise ValueError("bit count must be a positive multiple of n_clusters * log2(m_order)")
    groups = bits.reshape(-1, k).astype(np.int64)
    weights = 1 << np.arange(k - 1, -1, -1)
    return groups @ weights


def map_symbols_to_bits(symbols: np.ndarray, n_clusters: int, m_order: int) -> np.ndarray:
    """Exact inverse of map_bits_to_symbols."""
    symbols = np.asarray(symbols, dtype=np.int64).reshape(-1)
    k = _bits_per_symbol(m_order)
    if symbols.size == 0 or symbols.size % n_clusters:
        raise ValueError("symbol count must be a positive multiple of n_clusters")
    if symbols.min() < 0 or symbols.max() >= m_order:
        raise ValueError("symbol out of range")
    shifts = np.arange(k - 1, -1, -1)
    return ((symbols[:, None] >> shifts) & 1).astype(np.uint8).reshape(-1)
