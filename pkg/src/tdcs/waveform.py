"""Phase-vector generation, FMW synthesis and multi-cluster CCSK modulation.

Transform convention: the inverse DFT carries the 1/N factor (numpy's
default), the forward DFT carries none.  With the energy scale
lambda = sqrt(N / N_C) applied to the inverse transform of the masked phase
vector, every transmitted frame body has unit energy.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .channel import WaveformFrame
from .spectrum import ClusterPartition

__all__ = [
    "PhaseVector",
    "Fmw",
    "SymbolVector",
    "generate_phase_vector",
    "energy_scale",
    "synthesize_fmw",
    "modulate",
    "save_fmw",
    "load_fmw",
]


@dataclass(frozen=True, eq=False)
class PhaseVector:
    """User-specific unit-magnitude complex phases, one per spectrum bin."""

    phases: np.ndarray
    seed: int

    def __post_init__(self) -> None:
        phases = np.asarray(self.phases, dtype=np.complex128)
        if np.abs(np.abs(phases) - 1.0).max() > 1e-9:
            raise ValueError("phase vector entries must have unit magnitude")
        object.__setattr__(self, "phases", phases)

    @property
    def n_bins(self) -> int:
        return int(self.phases.size)


def generate_phase_vector(
    seed: int,
    n_bins: int,
    angle_source: Callable[[np.random.Generator, int], np.ndarray] | None = None,
) -> PhaseVector:
    """Seeded pseudorandom phases, uniform on [0, 2*pi) by default.

    `angle_source(rng, n)` may supply alternative angle constructions
    (e.g. quantized m-sequence phases) without changing callers.
    """
    if n_bins < 2:
        raise ValueError("n_bins must be >= 2")
    rng = np.random.default_rng(seed)
    if angle_source is None:
        angles = rng.uniform(0.0, 2.0 * np.pi, n_bins)
    else:
        angles = np.asarray(angle_source(rng, n_bins), dtype=float)
        if angles.shape != (n_bins,):
            raise ValueError("angle_source must return n_bins angles")
    return PhaseVector(np.exp(1j * angles), seed)


def energy_scale(n_bins: int, n_unoccupied: int) -> float:
    """sqrt(N / N_C): normalizes the frame body to unit energy."""
    if not (0 < n_unoccupied <= n_bins):
        raise ValueError("need 0 < n_unoccupied <= n_bins")
    return math.sqrt(n_bins / n_unoccupied)


@dataclass(frozen=True, eq=False)
class Fmw:
    """Fundamental modulation waveform of one cluster."""

    time_samples: np.ndarray
    source_cluster: np.ndarray
    scale: float  # energy normalization applied at synthesis


def synthesize_fmw(
    cluster: np.ndarray,
    phase: PhaseVector,
    n_bins: int,
    scale: float,
) -> Fmw:
    """Inverse transform of the cluster-masked phase vector, scaled by `scale`.

    The scale is shared by all clusters of a partition:
    sqrt(N / N_C) with N_C the *total* unoccupied count.
    """
    cluster = np.asarray(cluster, dtype=np.intp)
    if cluster.size == 0:
        raise ValueError("empty cluster")
    if cluster.min() < 0 or cluster.max() >= n_bins:
        raise ValueError("cluster indices out of range")
    spectrum = np.zeros(n_bins, dtype=np.complex128)
    spectrum[cluster] = phase.phases[cluster]
    return Fmw(scale * np.fft.ifft(spectrum), cluster, float(scale))


@dataclass(frozen=True, eq=False)
class SymbolVector:
    """One CCSK data symbol per cluster, each in {0, ..., m_order-1}."""

    symbols: np.ndarray
    m_order: int

    def __post_init__(self) -> None:
        symbols = np.asarray(self.symbols, dtype=np.int64)
        if symbols.ndim != 1 or symbols.size == 0:
            raise ValueError("symbols must be a non-empty 1-D sequence")
        if self.m_order < 2:
            raise ValueError("m_order must be >= 2")
        if symbols.min() < 0 or symbols.max() >= self.m_order:
            raise ValueError("symbol out of range")
        object.__setattr__(self, "symbols", symbols)

    @property
    def n_clusters(self) -> int:
        return int(self.symbols.size)


def modulate(
    partition: ClusterPartition,
    phase: PhaseVector,
    symbols: SymbolVector,
) -> WaveformFrame:
    """One frame carrying symbols.symbols[l] on cluster l.

    Each symbol S cyclically shifts its cluster's FMW by S*N/M samples,
    realized as a per-bin phase ramp exp(-2j*pi*S*k/M) so that a single
    inverse transform produces the summed frame.  Body energy is 1.
    """
    n = partition.n_bins
    m = symbols.m_order
    if n % m:
        raise ValueError("m_order must divide n_bins")
    if symbols.n_clusters != partition.n_clusters:
        raise ValueError("one symbol per cluster required")
    if phase.n_bins != n:
        raise ValueError("phase vector length mismatch")
    spectrum = np.zeros(n, dtype=np.complex128)
    for s, cluster in zip(symbols.symbols, partition.clusters):
        spectrum[cluster] = phase.phases[cluster] * np.exp(-2j * np.pi * s * cluster / m)
    scale = energy_scale(n, partition.n_covered)
    return WaveformFrame(scale * np.fft.ifft(spectrum), n, has_cp=False)


def save_fmw(samples: np.ndarray | Fmw, path) -> None:
    """Two-column text dump (real, imaginary) per sample."""
    if isinstance(samples, Fmw):
        samples = samples.time_samples
    samples = np.asarray(samples, dtype=np.complex128)
    np.savetxt(path, np.column_stack([samples.real, samples.imag]), fmt="%.18e")


def load_fmw(path) -> np.ndarray:
    """Read a dump written by save_fmw."""
    data = np.loadtxt(path, ndmin=2)
    return data[:, 0] + 1j * data[:, 1]
