"""Batch command line: ber / efficiency / sidelobes / design / info.

Every subcommand reads an optional INI config (see harness.load_sim_config)
and writes CSV or text artifacts; a JSON manifest of all seeds can be
requested for any sweep.
"""
from __future__ import annotations

import argparse
import sys

from .harness import (
    SimConfig,
    load_sim_config,
    run_ber_sweep,
    run_efficiency_study,
    run_sidelobe_study,
    spectrum_efficiency,
    validate_config,
    write_manifest,
    write_records_csv,
)
from .seeding import derive_seed
from .spectrum import (
    best_random_partition,
    build_availability,
    partition_continuous,
    save_partition,
    search_space_size,
    sidelobe_report,
)
from .waveform import energy_scale, generate_phase_vector, save_fmw, synthesize_fmw

_TAG_PHASE = 11  # must match harness: the design dump and the sweeps share phases
_TAG_PARTITION = 12


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="INI config file (defaults mirror the 10 MHz study band)")
    parser.add_argument("--n-bins", type=int, help="override number of spectrum bins")
    parser.add_argument("--m-order", type=int, help="override CCSK modulation order")
    parser.add_argument("--clusters", help="override cluster counts, e.g. '1 2 4 8'")
    parser.add_argument("--scheme", choices=["continuous", "random"], help="allocation scheme")
    parser.add_argument("--seed", type=int, help="master seed")
    parser.add_argument("--workers", type=int, help="process pool size for sweep points")


def _load(args: argparse.Namespace) -> SimConfig:
    config = load_sim_config(args.config)
    if args.n_bins is not None:
        config.n_bins = args.n_bins
        config.m_order = args.m_order if args.m_order is not None else args.n_bins
    elif args.m_order is not None:
        config.m_order = args.m_order
    if args.clusters is not None:
        config.clusters = tuple(int(tok) for tok in args.clusters.replace(",", " ").split())
    if args.scheme is not None:
        config.scheme = args.scheme
    if args.seed is not None:
        config.seed = args.seed
    if args.workers is not None:
        config.workers = args.workers
    return config


def _echo(record) -> None:
    print(record, flush=True)


def _cmd_ber(args: argparse.Namespace) -> int:
    config = _load(args)
    records = run_ber_sweep(config, progress=_echo)
    write_records_csv(records, args.out)
    if args.manifest:
        write_manifest(config, args.manifest)
    print(f"wrote {len(records)} records to {args.out}")
    return 0


def _cmd_efficiency(args: argparse.Namespace) -> int:
    config = _load(args)
    if args.target_ber is not None:
        config.target_ber = args.target_ber
    records = run_efficiency_study(config, progress=_echo)
    write_records_csv(records, args.out)
    if args.manifest:
        write_manifest(config, args.manifest)
    print(f"wrote {len(records)} records to {args.out}")
    return 0


def _cmd_sidelobes(args: argparse.Namespace) -> int:
    config = _load(args)
    if args.trials is not None:
        config.partition_trials = args.trials
    records = run_sidelobe_study(config, progress=_echo)
    write_records_csv(records, args.out)
    if args.manifest:
        write_manifest(config, args.manifest)
    print(f"wrote {len(records)} records to {args.out}")
    return 0


def _cmd_design(args: argparse.Namespace) -> int:
    config = _load(args)
    avail = validate_config(config)
    n_clusters = config.clusters[0] if args.n_clusters is None else args.n_clusters
    if config.scheme == "continuous":
        partition = partition_continuous(avail, n_clusters)
    else:
        _, partition = best_random_partition(
            avail,
            n_clusters,
            trials=config.partition_trials if args.trials is None else args.trials,
            seed=derive_seed(config.seed, _TAG_PARTITION, n_clusters),
        )
    report = sidelobe_report(partition)
    save_partition(partition, args.partition_out)
    phase = generate_phase_vector(derive_seed(config.seed, _TAG_PHASE), config.n_bins)
    fmw = synthesize_fmw(
        partition.clusters[args.cluster_index],
        phase,
        config.n_bins,
        energy_scale(config.n_bins, partition.n_covered),
    )
    save_fmw(fmw, args.fmw_out)
    print(
        f"{config.scheme} partition, L={n_clusters}: largest sidelobe "
        f"Re={report.beta:.6f} |.|={report.beta_magnitude:.6f}"
    )
    print(f"wrote partition to {args.partition_out} and cluster {args.cluster_index} "
          f"FMW to {args.fmw_out}")
    return 0


def _format_big(value: int) -> str:
    text = str(value)
    if len(text) <= 15:
        return text
    return f"{text[0]}.{text[1:7]}e+{len(text) - 1}"


def _cmd_info(args: argparse.Namespace) -> int:
    config = _load(args)
    avail = validate_config(config)
    scenario = config.scenario
    print(f"bandwidth: {scenario.bandwidth_hz:g} Hz, bin spacing "
          f"{scenario.bandwidth_hz / config.n_bins:g} Hz")
    print(f"unoccupied ratio: {scenario.unoccupied_ratio:g} "
          f"(bin level {avail.n_unoccupied}/{avail.n_bins})")
    print(f"m_order: {config.m_order} ({config.m_order.bit_length() - 1} bits/symbol)")
    print("clusters  efficiency(bits/s/Hz)  partitions(exact)  partitions(stirling)")
    for n_clusters in config.clusters:
        eta = spectrum_efficiency(config.n_bins, config.m_order, n_clusters, scenario)
        exact, stirling = search_space_size(avail.n_unoccupied, n_clusters)
        print(f"{n_clusters:8d}  {eta:21.6f}  {_format_big(exact):>17}  {stirling:20.6e}")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="tdcs",
        description="Cluster-based TDCS link simulator: sweeps, studies and design exports.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ber", help="BER vs Eb/N0 sweep, CSV out")
    _add_common(p)
    p.add_argument("--out", default="ber.csv")
    p.add_argument("--manifest", help="write a JSON seed manifest")
    p.set_defaults(func=_cmd_ber)

    p = sub.add_parser("efficiency", help="required Eb/N0 at a target BER per cluster count")
    _add_common(p)
    p.add_argument("--target-ber", type=float, help="override the target BER")
    p.add_argument("--out", default="efficiency.csv")
    p.add_argument("--manifest", help="write a JSON seed manifest")
    p.set_defaults(func=_cmd_efficiency)

    p = sub.add_parser("sidelobes", help="continuous vs best-random largest sidelobes")
    _add_common(p)
    p.add_argument("--trials", type=int, help="random partitions sampled per cluster count")
    p.add_argument("--out", default="sidelobes.csv")
    p.add_argument("--manifest", help="write a JSON seed manifest")
    p.set_defaults(func=_cmd_sidelobes)

    p = sub.add_parser("design", help="export a partition and one cluster's FMW")
    _add_common(p)
    p.add_argument("--n-clusters", type=int, help="cluster count (default: first of config)")
    p.add_argument("--trials", type=int, help="random-search trials")
    p.add_argument("--cluster-index", type=int, default=0)
    p.add_argument("--partition-out", default="partition.txt")
    p.add_argument("--fmw-out", default="fmw.txt")
    p.set_defaults(func=_cmd_design)

    p = sub.add_parser("info", help="closed-form analytics for the configured band")
    _add_common(p)
    p.set_defaults(func=_cmd_info)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
