"""Spectrum availability modelling, cluster partitioning and sidelobe analysis.

The band of width W is split into N bins; a binary availability mask marks
bins that carry no licensed/occupied signal.  The unoccupied bins are divided
into L equal-size clusters, either as consecutive blocks ("continuous") or as
blocks of a seeded random permutation ("random").  The quality metric of a
partition is the largest normalized autocorrelation sidelobe over all
clusters and all nonzero cyclic delays; the detector thresholds on the real
part, so ranking uses Re{.} and the magnitude is reported alongside.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .seeding import derive_seed

__all__ = [
    "BandScenario",
    "DEFAULT_SCENARIO",
    "AvailabilityVector",
    "ClusterPartition",
    "SidelobeReport",
    "build_availability",
    "partition_continuous",
    "partition_random",
    "normalized_sidelobes",
    "largest_sidelobe",
    "sidelobe_report",
    "best_random_partition",
    "search_space_size",
    "save_partition",
    "load_partition",
]


@dataclass(frozen=True)
class BandScenario:
    """A band of `bandwidth_hz` with half-open occupied sub-ranges [lo, hi)."""

    bandwidth_hz: float
    occupied_ranges_hz: tuple[tuple[float, float], ...] = ()

    def __post_init__(self) -> None:
        if self.bandwidth_hz <= 0:
            raise ValueError("bandwidth must be positive")
        ranges = tuple((float(lo), float(hi)) for lo, hi in self.occupied_ranges_hz)
        for lo, hi in ranges:
            if not (0.0 <= lo < hi <= self.bandwidth_hz):
                raise ValueError(f"occupied range [{lo}, {hi}) outside [0, W)")
        object.__setattr__(self, "occupied_ranges_hz", ranges)

    def merged_occupied_ranges(self) -> list[tuple[float, float]]:
        """Occupied ranges with overlaps merged (union)."""
        merged: list[tuple[float, float]] = []
        for lo, hi in sorted(self.occupied_ranges_hz):
            if merged and lo <= merged[-1][1]:
                merged[-1] = (merged[-1][0], max(merged[-1][1], hi))
            else:
                merged.append((lo, hi))
        return merged

    @property
    def occupied_width_hz(self) -> float:
        return sum(hi - lo for lo, hi in self.merged_occupied_ranges())

    @property
    def unoccupied_ratio(self) -> float:
        """Fraction of the band left unoccupied."""
        return 1.0 - self.occupied_width_hz / self.bandwidth_hz


# 10 MHz band, 3/4 unoccupied: busy sub-bands at 2.5-3.75 and 6.25-7.5 MHz.
DEFAULT_SCENARIO = BandScenario(10e6, ((2.5e6, 3.75e6), (6.25e6, 7.5e6)))


@dataclass(frozen=True, eq=False)
class AvailabilityVector:
    """Binary mask over N spectrum bins; 1 marks an unoccupied bin."""

    mask: np.ndarray

    def __post_init__(self) -> None:
        mask = np.asarray(self.mask, dtype=np.uint8)
        if mask.ndim != 1 or mask.size < 1:
            raise ValueError("mask must be a non-empty 1-D sequence")
        if not np.all((mask == 0) | (mask == 1)):
            raise ValueError("mask must be binary")
        if not mask.any():
            raise ValueError("no spectrum holes")
        object.__setattr__(self, "mask", mask)

    @cached_property
    def unoccupied(self) -> np.ndarray:
        """Ascending indices of unoccupied bins."""
        return np.flatnonzero(self.mask)

    @property
    def n_bins(self) -> int:
        return int(self.mask.size)

    @property
    def n_unoccupied(self) -> int:
        return int(self.unoccupied.size)


def build_availability(scenario: BandScenario, n_bins: int) -> AvailabilityVector:
    """Discretize a band scenario onto `n_bins` bins.

    Bin k is occupied iff its center frequency (k + 0.5) * W / N falls inside
    any occupied range.  Raises "no spectrum holes" when every bin is busy.
    """
    if n_bins < 2:
        raise ValueError("n_bins must be >= 2")
    centers = (np.arange(n_bins) + 0.5) * (scenario.bandwidth_hz / n_bins)
    occupied = np.zeros(n_bins, dtype=bool)
    for lo, hi in scenario.merged_occupied_ranges():
        occupied |= (centers >= lo) & (centers < hi)
    return AvailabilityVector(np.where(occupied, 0, 1).astype(np.uint8))


@dataclass(frozen=True, eq=False)
class ClusterPartition:
    """L disjoint, equal-size sets of bin indices covering the unoccupied set."""

    clusters: tuple[np.ndarray, ...]
    n_bins: int

    def __post_init__(self) -> None:
        if not self.clusters:
            raise ValueError("partition needs at least one cluster")
        clusters = tuple(np.sort(np.asarray(c, dtype=np.intp)) for c in self.clusters)
        size = clusters[0].size
        if size == 0:
            raise ValueError("empty cluster")
        if any(c.size != size for c in clusters):
            raise ValueError("cluster size mismatch")
        allbins = np.concatenate(clusters)
        if allbins.min() < 0 or allbins.max() >= self.n_bins:
            raise ValueError("bin index out of range")
        if np.unique(allbins).size != allbins.size:
            raise ValueError("clusters are not disjoint")
        object.__setattr__(self, "clusters", clusters)

    @property
    def n_clusters(self) -> int:
        return len(self.clusters)

    @property
    def cluster_size(self) -> int:
        return int(self.clusters[0].size)

    @property
    def n_covered(self) -> int:
        return self.n_clusters * self.cluster_size

    def covered_bins(self) -> np.ndarray:
        """All bins of the partition, ascending."""
        return np.sort(np.concatenate(self.clusters))


def _check_divides(avail: AvailabilityVector, n_clusters: int) -> None:
    if n_clusters < 1:
        raise ValueError("n_clusters must be >= 1")
    if avail.n_unoccupied % n_clusters:
        raise ValueError(
            f"cluster size mismatch: {n_clusters} does not divide "
            f"{avail.n_unoccupied} unoccupied bins"
        )


def partition_continuous(avail: AvailabilityVector, n_clusters: int) -> ClusterPartition:
    """Split the unoccupied bins into consecutive equal blocks."""
    _check_divides(avail, n_clusters)
    blocks = np.split(avail.unoccupied, n_clusters)
    return ClusterPartition(tuple(blocks), avail.n_bins)


def partition_random(avail: AvailabilityVector, n_clusters: int, seed: int) -> ClusterPartition:
    """Split a seeded uniform permutation of the unoccupied bins into equal blocks."""
    _check_divides(avail, n_clusters)
    rng = np.random.default_rng(seed)
    perm = rng.permutation(avail.unoccupied)
    return ClusterPartition(tuple(np.split(perm, n_clusters)), avail.n_bins)


def normalized_sidelobes(cluster: np.ndarray, n_bins: int) -> np.ndarray:
    """Normalized cyclic autocorrelation sidelobes of one cluster.

    Returns the length N-1 complex sequence
        (1/|cluster|) * sum_{p in cluster} exp(+2j*pi*p*tau/N),  tau = 1..N-1.
    The tau = 0 mainlobe is exactly 1 and is excluded.
    """
    cluster = np.asarray(cluster, dtype=np.intp)
    if cluster.size == 0:
        raise ValueError("empty cluster")
    indicator = np.zeros(n_bins)
    indicator[cluster] = 1.0
    full = np.fft.ifft(indicator) * n_bins
    return full[1:] / cluster.size


def _sidelobe_matrix(partition: ClusterPartition) -> np.ndarray:
    """(L, N-1) complex sidelobes for all clusters via one batched transform."""
    n = partition.n_bins
    indicator = np.zeros((partition.n_clusters, n))
    for i, c in enumerate(partition.clusters):
        indicator[i, c] = 1.0
    full = np.fft.ifft(indicator, axis=1) * n
    return full[:, 1:] / partition.cluster_size


def largest_sidelobe(partition: ClusterPartition) -> float:
    """Largest Re{normalized sidelobe} over all clusters and nonzero delays."""
    return float(_sidelobe_matrix(partition).real.max())


@dataclass(frozen=True, eq=False)
class SidelobeReport:
    """Per-cluster normalized sidelobes with the partition-wide maxima."""

    per_cluster: tuple[np.ndarray, ...]
    beta: float            # max real part (the detection-relevant metric)
    beta_magnitude: float  # max |.| , reported alongside


def sidelobe_report(partition: ClusterPartition) -> SidelobeReport:
    mat = _sidelobe_matrix(partition)
    return SidelobeReport(
        per_cluster=tuple(mat),
        beta=float(mat.real.max()),
        beta_magnitude=float(np.abs(mat).max()),
    )


def best_random_partition(
    avail: AvailabilityVector,
    n_clusters: int,
    trials: int = 10_000,
    seed: int = 0,
) -> tuple[float, ClusterPartition]:
    """Monte-Carlo search for the random partition with the smallest largest sidelobe.

    Trial i draws partition_random with sub-seed derive_seed(seed, i), so a
    parallel evaluation of the same trial indices reproduces the serial
    result.  Among equal minima the first-found partition wins.  The returned
    minimum is non-increasing in `trials` for a fixed seed.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    _check_divides(avail, n_clusters)
    best_beta = math.inf
    best: ClusterPartition | None = None
    for i in range(trials):
        candidate = partition_random(avail, n_clusters, derive_seed(seed, i))
        beta = largest_sidelobe(candidate)
        if beta < best_beta:
            best_beta, best = beta, candidate
    assert best is not None
    return best_beta, best


def search_space_size(n_unoccupied: int, n_clusters: int) -> tuple[int, float]:
    """Number of ordered equal-size partitions, exact and via Stirling's formula.

    exact    = N_C! / ((N_C/L)!)^L
    stirling ~ (2*pi*N_C)^((1-L)/2) * L^(N_C + L/2)
    """
    if n_clusters < 1 or n_unoccupied < 1:
        raise ValueError("need n_unoccupied >= 1 and n_clusters >= 1")
    if n_unoccupied % n_clusters:
        raise ValueError("cluster size mismatch")
    exact = math.factorial(n_unoccupied) // (
        math.factorial(n_unoccupied // n_clusters) ** n_clusters
    )
    log_estimate = 0.5 * (1 - n_clusters) * math.log(2 * math.pi * n_unoccupied) + (
        n_unoccupied + n_clusters / 2
    ) * math.log(n_clusters)
    estimate = math.exp(log_estimate) if log_estimate < 700 else math.inf
    return exact, estimate


def save_partition(partition: ClusterPartition, path) -> None:
    """Write one line per cluster: ascending bin indices, space-separated."""
    with open(path, "w") as fh:
        for cluster in partition.clusters:
            fh.write(" ".join(str(int(b)) for b in cluster) + "\n")


def load_partition(path, n_bins: int, avail: AvailabilityVector | None = None) -> ClusterPartition:
    """Read a partition file; validates against `avail` when provided."""
    clusters = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line:
                clusters.append(np.array([int(tok) for tok in line.split()], dtype=np.intp))
    partition = ClusterPartition(tuple(clusters), n_bins)
    if avail is not None:
        if not np.array_equal(partition.covered_bins(), avail.unoccupied):
            raise ValueError("partition does not cover the unoccupied set")
    return partition
