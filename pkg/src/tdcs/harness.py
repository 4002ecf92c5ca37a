"""Batch simulation harness: BER sweeps, efficiency studies, sidelobe studies.

All sweeps are deterministic given (config, seed): every sweep point draws
from a generator seeded by (seed, point index), so a worker pool and a
serial loop produce byte-identical CSV output.  The frame pipeline here is a
batched reimplementation of the single-frame operations in waveform/
channel/receiver (one transform per batch row); equivalence between the two
paths is covered by the test suite.
"""
from __future__ import annotations

import configparser
import dataclasses
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .coding import (
    CodeConfig,
    deinterleave,
    encode,
    interleave,
    map_bits_to_symbols,
    map_symbols_to_bits,
    viterbi_decode,
)
from .channel import COST207_RA6, ChannelProfile, load_profile
from .seeding import derive_rng, derive_seed
from .spectrum import (
    AvailabilityVector,
    BandScenario,
    ClusterPartition,
    DEFAULT_SCENARIO,
    best_random_partition,
    build_availability,
    largest_sidelobe,
    partition_continuous,
    sidelobe_report,
)
from .waveform import generate_phase_vector

__all__ = [
    "SimConfig",
    "BerRecord",
    "EfficiencyRecord",
    "SidelobeRecord",
    "spectrum_efficiency",
    "validate_config",
    "load_sim_config",
    "run_ber_sweep",
    "run_efficiency_study",
    "run_sidelobe_study",
    "write_records_csv",
    "write_manifest",
]

# Sub-seed namespace tags (arguments to derive_seed after the master seed).
_TAG_PHASE = 11
_TAG_PARTITION = 12
_TAG_POINT = 13

BUILTIN_PROFILES = {"cost207_ra6": COST207_RA6}


@dataclass
class SimConfig:
    """Sweep description; defaults mirror the 10 MHz two-hole study band."""

    scenario: BandScenario = DEFAULT_SCENARIO
    n_bins: int = 256
    m_order: int | None = None  # None means m_order = n_bins
    clusters: tuple[int, ...] = (1, 2, 4, 8)
    scheme: str = "random"  # "continuous" | "random"
    seed: int = 1
    ebn0_grid_db: tuple[float, ...] = tuple(float(x) for x in range(0, 11))
    channel_kind: str = "awgn"  # "awgn" | "multipath"
    profile: ChannelProfile = COST207_RA6
    coding: bool = False
    code: CodeConfig = field(default_factory=CodeConfig)
    frames_per_block: int = 128
    max_frames: int = 1_000_000
    min_bit_errors: int = 200
    batch_frames: int = 2048
    partition_trials: int = 10_000
    target_ber: float = 1e-3
    bisect_tol_db: float = 0.1
    workers: int = 1

    def __post_init__(self) -> None:
        if self.m_order is None:
            self.m_order = self.n_bins
        self.clusters = tuple(int(c) for c in self.clusters)
        self.ebn0_grid_db = tuple(float(x) for x in self.ebn0_grid_db)

    @property
    def info_bits_per_frame(self) -> dict[int, float]:
        """Information bits per frame for each cluster count."""
        k = int(math.log2(self.m_order))
        rate = self.code.rate if self.coding else 1.0
        return {c: c * k * rate for c in self.clusters}


@dataclass(frozen=True)
class BerRecord:
    scheme: str
    n_bins: int
    n_clusters: int
    ebn0_db: float
    frames: int
    bits: int
    bit_errors: int
    symbol_errors: int
    ber: float
    ser: float


@dataclass(frozen=True)
class EfficiencyRecord:
    scheme: str
    n_bins: int
    n_clusters: int
    eta_bits_per_s_per_hz: float
    required_ebn0_db: float  # NaN when the target is not reached within the grid
    target_ber: float
    reached: bool


@dataclass(frozen=True)
class SidelobeRecord:
    n_bins: int
    n_unoccupied: int
    n_clusters: int
    trials: int
    beta_continuous: float
    beta_continuous_abs: float
    beta_min_random: float
    beta_min_random_abs: float


def spectrum_efficiency(
    n_bins: int,
    m_order: int,
    n_clusters: int,
    scenario: BandScenario = DEFAULT_SCENARIO,
) -> float:
    """L * delta_f * log2(M) / (gamma * W) in bits/s/Hz; L=1 is the classic system."""
    gamma = scenario.unoccupied_ratio
    if gamma <= 0:
        raise ValueError("unoccupied ratio is zero: no spectrum holes")
    delta_f = scenario.bandwidth_hz / n_bins
    return n_clusters * delta_f * math.log2(m_order) / (gamma * scenario.bandwidth_hz)


def validate_config(config: SimConfig) -> AvailabilityVector:
    """Check every derived constraint up front; returns the availability vector."""
    if config.scheme not in ("continuous", "random"):
        raise ValueError(f"unknown scheme {config.scheme!r}")
    if config.channel_kind not in ("awgn", "multipath"):
        raise ValueError(f"unknown channel kind {config.channel_kind!r}")
    m = config.m_order
    if m < 2 or (m & (m - 1)):
        raise ValueError("m_order must be a power of two")
    if config.n_bins % m:
        raise ValueError("m_order must divide n_bins")
    if not config.ebn0_grid_db:
        raise ValueError("empty Eb/N0 grid")
    if config.min_bit_errors < 1 or config.max_frames < 1 or config.batch_frames < 1:
        raise ValueError("stop rule fields must be positive")
    avail = build_availability(config.scenario, config.n_bins)
    for c in config.clusters:
        if c < 1 or avail.n_unoccupied % c:
            raise ValueError(
                f"cluster count {c} does not divide {avail.n_unoccupied} unoccupied bins"
            )
    if config.channel_kind == "multipath":
        if config.n_bins % 4:
            raise ValueError("multipath requires n_bins divisible by 4 (CP length N/4)")
        delays = np.rint(
            np.asarray(config.profile.tap_delays_us) * 1e-6 * config.scenario.bandwidth_hz
        ).astype(int)
        if delays.max() > config.n_bins // 4:
            raise ValueError("CP too short for the profile's maximum delay")
    if config.coding:
        k = int(math.log2(m))
        for c in config.clusters:
            coded_len = config.frames_per_block * c * k
            if coded_len // 2 - (config.code.constraint_length - 1) < 1:
                raise ValueError("frames_per_block too small for the code termination tail")
    return avail


# --------------------------------------------------------------------------
# Batched link engine


@dataclass(frozen=True, eq=False)
class _Link:
    """Per-(config, L) precomputation shared by all sweep points."""

    n_bins: int
    m_order: int
    step: int
    scale: float
    n_covered: int
    cluster_bins: tuple[np.ndarray, ...]
    phases: np.ndarray
    ref_conj: np.ndarray  # (L, N) conjugated cluster references
    popcount: np.ndarray  # bit-errors lookup for symbol XOR values
    partition: ClusterPartition
    beta: float


def _build_link(config: SimConfig, avail: AvailabilityVector, n_clusters: int) -> _Link:
    if config.scheme == "continuous":
        partition = partition_continuous(avail, n_clusters)
        beta = largest_sidelobe(partition)
    else:
        beta, partition = best_random_partition(
            avail,
            n_clusters,
            trials=config.partition_trials,
            seed=derive_seed(config.seed, _TAG_PARTITION, n_clusters),
        )
    phase = generate_phase_vector(derive_seed(config.seed, _TAG_PHASE), config.n_bins)
    n = config.n_bins
    refs = np.zeros((n_clusters, n), dtype=np.complex128)
    for i, bins in enumerate(partition.clusters):
        refs[i, bins] = phase.phases[bins]
    return _Link(
        n_bins=n,
        m_order=config.m_order,
        step=n // config.m_order,
        scale=math.sqrt(n / partition.n_covered),
        n_covered=partition.n_covered,
        cluster_bins=partition.clusters,
        phases=phase.phases,
        ref_conj=refs.conj(),
        popcount=np.array([bin(v).count("1") for v in range(config.m_order)], dtype=np.int64),
        partition=partition,
        beta=beta,
    )


@dataclass(frozen=True)
class _Multipath:
    delays_samples: np.ndarray
    powers: np.ndarray  # normalized linear tap powers

    @property
    def memory(self) -> int:
        return int(self.delays_samples.max())


def _multipath_spec(config: SimConfig) -> _Multipath | None:
    if config.channel_kind != "multipath":
        return None
    delays = np.rint(
        np.asarray(config.profile.tap_delays_us) * 1e-6 * config.scenario.bandwidth_hz
    ).astype(int)
    return _Multipath(delays, config.profile.normalized_linear_powers())


def _complex_noise(rng: np.random.Generator, shape: tuple[int, ...], variance: float) -> np.ndarray:
    scale = math.sqrt(variance / 2.0)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def _pass_frames(
    link: _Link,
    multipath: _Multipath | None,
    symbols: np.ndarray,
    noise_variance: float,
    rng: np.random.Generator,
) -> np.ndarray:
    """Modulate a (B, L) symbol matrix, run it through the channel, detect.

    Returns the (B, L) detected symbols.  Per batch row this mirrors
    modulate -> [add_cp -> apply_multipath] -> add_awgn -> [remove_cp ->
    mmse_equalize] -> demodulate_frame.
    """
    n, m = link.n_bins, link.m_order
    n_frames = symbols.shape[0]
    spectrum = np.zeros((n_frames, n), dtype=np.complex128)
    for l, bins in enumerate(link.cluster_bins):
        ramp = np.exp(-2j * np.pi * np.outer(symbols[:, l], bins) / m)
        spectrum[:, bins] = link.phases[bins] * ramp
    x = link.scale * np.fft.ifft(spectrum, axis=1)

    if multipath is None:
        if noise_variance > 0:
            x = x + _complex_noise(rng, x.shape, noise_variance)
        received_freq = np.fft.fft(x, axis=1)
    else:
        cp = n // 4
        extended = np.concatenate([x[:, -cp:], x], axis=1)
        gains = _complex_noise(rng, (n_frames, multipath.powers.size), 1.0)
        gains *= np.sqrt(multipath.powers)
        taps = np.zeros((n_frames, multipath.memory + 1), dtype=np.complex128)
        np.add.at(taps, (np.arange(n_frames)[:, None], multipath.delays_samples[None, :]), gains)
        faded = np.zeros_like(extended)
        length = extended.shape[1]
        for delay in range(multipath.memory + 1):
            faded[:, delay:] += taps[:, delay : delay + 1] * extended[:, : length - delay]
        if noise_variance > 0:
            faded = faded + _complex_noise(rng, faded.shape, noise_variance)
        body = faded[:, cp:]
        response = np.fft.fft(taps, n=n, axis=1)
        nsr = noise_variance * link.n_covered  # n * sigma^2 / scale^2
        received_freq = (
            np.fft.fft(body, axis=1) * response.conj() / (np.abs(response) ** 2 + nsr)
        )

    detected = np.empty_like(symbols)
    for l in range(len(link.cluster_bins)):
        correlation = np.fft.ifft(received_freq * link.ref_conj[l], axis=1)
        detected[:, l] = correlation[:, :: link.step].real.argmax(axis=1)
    return detected


def _simulate_point(
    link: _Link,
    multipath: _Multipath | None,
    config: SimConfig,
    ebn0_db: float,
    point_seed: int,
) -> tuple[int, int, int, int]:
    """Run one (L, Eb/N0) point; returns (frames, bits, bit_errors, symbol_errors)."""
    n_clusters = len(link.cluster_bins)
    k = int(math.log2(link.m_order))
    rng = np.random.default_rng(point_seed)
    frames = bits = bit_errors = symbol_errors = 0

    if not config.coding:
        info_bits = n_clusters * k
        noise_variance = 0.0 if math.isinf(ebn0_db) else 1.0 / (info_bits * 10 ** (ebn0_db / 10))
        while bit_errors < config.min_bit_errors and frames < config.max_frames:
            batch = min(config.batch_frames, config.max_frames - frames)
            sent = rng.integers(0, link.m_order, (batch, n_clusters))
            detected = _pass_frames(link, multipath, sent, noise_variance, rng)
            symbol_errors += int((detected != sent).sum())
            bit_errors += int(link.popcount[np.bitwise_xor(detected, sent)].sum())
            frames += batch
            bits += batch * info_bits
        return frames, bits, bit_errors, symbol_errors

    # Coded: blocks of frames_per_block frames share one terminated codeword.
    code = config.code
    n_block = config.frames_per_block
    coded_len = n_block * n_clusters * k
    info_len = coded_len // 2 - (code.constraint_length - 1)
    # Eb accounting uses the nominal rate 1/2; the termination tail is a
    # fixed per-block overhead of 2*(K-1) coded bits.
    info_bits_nominal = n_clusters * k * code.rate
    noise_variance = (
        0.0 if math.isinf(ebn0_db) else 1.0 / (info_bits_nominal * 10 ** (ebn0_db / 10))
    )
    while bit_errors < config.min_bit_errors and frames < config.max_frames:
        message = rng.integers(0, 2, info_len, dtype=np.uint8)
        coded = encode(message, code)
        sent_bits = interleave(coded, code.interleaver_seed)
        sent = map_bits_to_symbols(sent_bits, n_clusters, link.m_order).reshape(
            n_block, n_clusters
        )
        detected = _pass_frames(link, multipath, sent, noise_variance, rng)
        symbol_errors += int((detected != sent).sum())
        received_bits = map_symbols_to_bits(detected.reshape(-1), n_clusters, link.m_order)
        decoded = viterbi_decode(deinterleave(received_bits, code.interleaver_seed), code)
        bit_errors += int((decoded != message).sum())
        bits += info_len
        frames += n_block
    return frames, bits, bit_errors, symbol_errors


def _run_point_job(args) -> BerRecord:
    link, multipath, config, ebn0_db, point_seed = args
    frames, bits, bit_errors, symbol_errors = _simulate_point(
        link, multipath, config, ebn0_db, point_seed
    )
    symbols = frames * len(link.cluster_bins)
    return BerRecord(
        scheme=config.scheme,
        n_bins=config.n_bins,
        n_clusters=len(link.cluster_bins),
        ebn0_db=ebn0_db,
        frames=frames,
        bits=bits,
        bit_errors=bit_errors,
        symbol_errors=symbol_errors,
        ber=bit_errors / bits if bits else math.nan,
        ser=symbol_errors / symbols if symbols else math.nan,
    )


# --------------------------------------------------------------------------
# Sweeps


def run_ber_sweep(config: SimConfig, progress=None) -> list[BerRecord]:
    """Simulate every (L, Eb/N0) grid point until the stop rule fires.

    Points run independently (optionally on a process pool); records are
    returned in config order regardless of completion order.  `progress`,
    when given, is called with each finished BerRecord.
    """
    avail = validate_config(config)
    multipath = _multipath_spec(config)
    jobs = []
    point_index = 0
    for n_clusters in config.clusters:
        link = _build_link(config, avail, n_clusters)
        for ebn0_db in config.ebn0_grid_db:
            seed = derive_seed(config.seed, _TAG_POINT, point_index)
            jobs.append((link, multipath, config, ebn0_db, seed))
            point_index += 1
    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            records = list(pool.map(_run_point_job, jobs))
    else:
        records = []
        for job in jobs:
            records.append(_run_point_job(job))
            if progress is not None:
                progress(records[-1])
        return records
    if progress is not None:
        for record in records:
            progress(record)
    return records


def _bisect_required_ebn0(
    evaluate, lo: float, hi: float, target_ber: float, tol_db: float
) -> tuple[float, bool]:
    """Smallest Eb/N0 (within tol) whose measured BER is <= target."""
    if evaluate(hi) > target_ber:
        return math.nan, False
    if evaluate(lo) <= target_ber:
        return lo, True
    while hi - lo > tol_db:
        mid = 0.5 * (lo + hi)
        if evaluate(mid) <= target_ber:
            hi = mid
        else:
            lo = mid
    return hi, True


def run_efficiency_study(config: SimConfig, progress=None) -> list[EfficiencyRecord]:
    """Required Eb/N0 at the target BER (bisection over the grid span) per L."""
    avail = validate_config(config)
    multipath = _multipath_spec(config)
    lo, hi = min(config.ebn0_grid_db), max(config.ebn0_grid_db)
    records = []
    eval_counter = 0
    for n_clusters in config.clusters:
        link = _build_link(config, avail, n_clusters)

        def evaluate(ebn0_db: float) -> float:
            nonlocal eval_counter
            seed = derive_seed(config.seed, _TAG_POINT, eval_counter)
            eval_counter += 1
            frames, bits, bit_errors, _ = _simulate_point(
                link, multipath, config, ebn0_db, seed
            )
            return bit_errors / bits if bits else math.nan

        required, reached = _bisect_required_ebn0(
            evaluate, lo, hi, config.target_ber, config.bisect_tol_db
        )
        record = EfficiencyRecord(
            scheme=config.scheme,
            n_bins=config.n_bins,
            n_clusters=n_clusters,
            eta_bits_per_s_per_hz=spectrum_efficiency(
                config.n_bins, config.m_order, n_clusters, config.scenario
            ),
            required_ebn0_db=required,
            target_ber=config.target_ber,
            reached=reached,
        )
        records.append(record)
        if progress is not None:
            progress(record)
    return records


def run_sidelobe_study(config: SimConfig, progress=None) -> list[SidelobeRecord]:
    """Largest-sidelobe comparison: continuous vs best-of-trials random, per L."""
    avail = validate_config(config)
    records = []
    for n_clusters in config.clusters:
        continuous = partition_continuous(avail, n_clusters)
        report_cont = sidelobe_report(continuous)
        _, best = best_random_partition(
            avail,
            n_clusters,
            trials=config.partition_trials,
            seed=derive_seed(config.seed, _TAG_PARTITION, n_clusters),
        )
        report_rand = sidelobe_report(best)
        record = SidelobeRecord(
            n_bins=config.n_bins,
            n_unoccupied=avail.n_unoccupied,
            n_clusters=n_clusters,
            trials=config.partition_trials,
            beta_continuous=report_cont.beta,
            beta_continuous_abs=report_cont.beta_magnitude,
            beta_min_random=report_rand.beta,
            beta_min_random_abs=report_rand.beta_magnitude,
        )
        records.append(record)
        if progress is not None:
            progress(record)
    return records


# --------------------------------------------------------------------------
# Output and configuration files


def write_records_csv(records, path) -> None:
    """Header row plus one dataclass record per line."""
    if not records:
        raise ValueError("no records to write")
    names = [f.name for f in dataclasses.fields(records[0])]
    with open(path, "w") as fh:
        fh.write(",".join(names) + "\n")
        for record in records:
            fh.write(",".join(str(getattr(record, n)) for n in names) + "\n")


def write_manifest(config: SimConfig, path, extra: dict | None = None) -> None:
    """JSON manifest of the run: full config plus derived seed material."""
    payload = {
        "config": {
            "scenario": {
                "bandwidth_hz": config.scenario.bandwidth_hz,
                "occupied_ranges_hz": list(map(list, config.scenario.occupied_ranges_hz)),
            },
            "n_bins": config.n_bins,
            "m_order": config.m_order,
            "clusters": list(config.clusters),
            "scheme": config.scheme,
            "seed": config.seed,
            "ebn0_grid_db": list(config.ebn0_grid_db),
            "channel_kind": config.channel_kind,
            "profile": {
                "name": config.profile.name,
                "tap_delays_us": list(config.profile.tap_delays_us),
                "tap_powers_db": list(config.profile.tap_powers_db),
            },
            "coding": config.coding,
            "code": dataclasses.asdict(config.code),
            "frames_per_block": config.frames_per_block,
            "max_frames": config.max_frames,
            "min_bit_errors": config.min_bit_errors,
            "batch_frames": config.batch_frames,
            "partition_trials": config.partition_trials,
            "target_ber": config.target_ber,
            "bisect_tol_db": config.bisect_tol_db,
            "workers": config.workers,
        },
        "derived_seeds": {
            "phase": derive_seed(config.seed, _TAG_PHASE),
            "partition_search": {
                str(c): derive_seed(config.seed, _TAG_PARTITION, c) for c in config.clusters
            },
            "point_seed_rule": "derive_seed(seed, 13, point_index)",
        },
    }
    if extra:
        payload.update(extra)
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _parse_ranges(text: str) -> tuple[tuple[float, float], ...]:
    ranges = []
    for token in text.replace(",", " ").split():
        lo, hi = token.split(":")
        ranges.append((float(lo), float(hi)))
    return tuple(ranges)


def _parse_floats(text: str) -> tuple[float, ...]:
    return tuple(float(tok) for tok in text.replace(",", " ").split())


def _parse_ints(text: str) -> tuple[int, ...]:
    return tuple(int(tok) for tok in text.replace(",", " ").split())


def load_sim_config(path=None) -> SimConfig:
    """Build a SimConfig from an INI-style file; missing keys keep defaults.

    Sections and keys mirror the SimConfig fields: [scenario] bandwidth_hz,
    occupied_ranges_hz (lo:hi tokens); [waveform] n_bins, m_order; [sweep]
    clusters, scheme, ebn0_grid_db, seed, max_frames, min_bit_errors,
    batch_frames, partition_trials, target_ber, bisect_tol_db, workers;
    [channel] kind, profile (builtin name or file path); [coding] enabled,
    constraint_length, generators_octal, interleaver_seed, frames_per_block.
    """
    defaults = SimConfig()
    if path is None:
        return defaults
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    with open(path) as fh:
        parser.read_file(fh)

    def get(section: str, key: str, fallback):
        if parser.has_option(section, key):
            return parser.get(section, key)
        return fallback

    scenario = BandScenario(
        bandwidth_hz=float(get("scenario", "bandwidth_hz", defaults.scenario.bandwidth_hz)),
        occupied_ranges_hz=(
            _parse_ranges(parser.get("scenario", "occupied_ranges_hz"))
            if parser.has_option("scenario", "occupied_ranges_hz")
            else defaults.scenario.occupied_ranges_hz
        ),
    )
    n_bins = int(float(get("waveform", "n_bins", defaults.n_bins)))
    m_order = get("waveform", "m_order", None)
    profile_ref = get("channel", "profile", "cost207_ra6")
    profile = BUILTIN_PROFILES.get(str(profile_ref).lower())
    if profile is None:
        profile = load_profile(profile_ref)
    code = CodeConfig(
        constraint_length=int(get("coding", "constraint_length", 7)),
        generators_octal=tuple(
            int(tok, 8) for tok in str(get("coding", "generators_octal", "171 133")).split()
        ),
        interleaver_seed=int(get("coding", "interleaver_seed", 1234)),
    )
    return SimConfig(
        scenario=scenario,
        n_bins=n_bins,
        m_order=int(float(m_order)) if m_order is not None else None,
        clusters=_parse_ints(str(get("sweep", "clusters", "1 2 4 8"))),
        scheme=str(get("sweep", "scheme", defaults.scheme)),
        seed=int(get("sweep", "seed", defaults.seed)),
        ebn0_grid_db=_parse_floats(
            str(get("sweep", "ebn0_grid_db", " ".join(map(str, defaults.ebn0_grid_db))))
        ),
        channel_kind=str(get("channel", "kind", defaults.channel_kind)),
        profile=profile,
        coding=str(get("coding", "enabled", "false")).lower() in ("1", "true", "yes", "on"),
        code=code,
        frames_per_block=int(get("coding", "frames_per_block", defaults.frames_per_block)),
        max_frames=int(float(get("sweep", "max_frames", defaults.max_frames))),
        min_bit_errors=int(get("sweep", "min_bit_errors", defaults.min_bit_errors)),
        batch_frames=int(get("sweep", "batch_frames", defaults.batch_frames)),
        partition_trials=int(float(get("sweep", "partition_trials", defaults.partition_trials))),
        target_ber=float(get("sweep", "target_ber", defaults.target_ber)),
        bisect_tol_db=float(get("sweep", "bisect_tol_db", defaults.bisect_tol_db)),
        workers=int(get("sweep", "workers", defaults.workers)),
    )
