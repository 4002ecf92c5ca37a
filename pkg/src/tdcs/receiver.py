"""CCSK demodulation: frequency-domain correlation and real-part peak detection.

The receiver correlates the received body against each cluster's local
reference (the cluster-masked phase vector) entirely in the frequency
domain; disjoint cluster supports make the correlator output for cluster l
independent of every other cluster's symbol.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .spectrum import ClusterPartition
from .waveform import PhaseVector, SymbolVector

__all__ = ["CorrelationOutput", "correlate", "detect", "correlation_output", "demodulate_frame"]


def correlate(received_body: np.ndarray, cluster: np.ndarray, phase: PhaseVector) -> np.ndarray:
    """Cyclic cross-correlation of the body with one cluster's reference FMW.

    Computed as ifft(fft(r) * conj(reference spectrum)); bins outside the
    cluster contribute exactly zero.
    """
    received_body = np.asarray(received_body, dtype=np.complex128)
    return _correlate_freq(np.fft.fft(received_body), cluster, phase)


def _correlate_freq(received_freq: np.ndarray, cluster: np.ndarray, phase: PhaseVector) -> np.ndarray:
    reference = np.zeros(received_freq.size, dtype=np.complex128)
    reference[cluster] = phase.phases[cluster]
    return np.fft.ifft(received_freq * reference.conj())


def detect(correlation: np.ndarray, m_order: int) -> int:
    """Symbol with the largest Re{correlation} among the M valid shift delays.

    Valid delays are multiples of N/M; ties resolve to the smallest symbol.
    """
    n = correlation.size
    if n % m_order:
        raise ValueError("m_order must divide the correlation length")
    candidates = correlation[:: n // m_order].real
    return int(np.argmax(candidates))


@dataclass(frozen=True, eq=False)
class CorrelationOutput:
    """Per-cluster correlator outputs with the detected symbols."""

    values: tuple[np.ndarray, ...]
    detected_symbols: np.ndarray


def correlation_output(
    received_body: np.ndarray,
    partition: ClusterPartition,
    phase: PhaseVector,
    m_order: int,
) -> CorrelationOutput:
    """Correlate and detect every cluster; one forward transform total."""
    received_freq = np.fft.fft(np.asarray(received_body, dtype=np.complex128))
    values = tuple(_correlate_freq(received_freq, c, phase) for c in partition.clusters)
    detected = np.array([detect(y, m_order) for y in values], dtype=np.int64)
    return CorrelationOutput(values=values, detected_symbols=detected)


def demodulate_frame(
    received_body: np.ndarray,
    partition: ClusterPartition,
    phase: PhaseVector,
    m_order: int,
) -> SymbolVector:
    """Recover one symbol per cluster from a CP-free frame body."""
    out = correlation_output(received_body, partition, phase, m_order)
    return SymbolVector(out.detected_symbols, m_order)
