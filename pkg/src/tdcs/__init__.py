"""Cluster-based transform domain communication system (TDCS) simulator.

Synthesizes noise-like waveforms on the unoccupied bins of a partially busy
band, splits those bins into clusters that each carry an independent CCSK
data stream, and measures the spectrum-efficiency / BER trade-off of
continuous vs random bin allocation over AWGN and multipath channels.
"""

from .channel import (
    COST207_RA6,
    ChannelProfile,
    ChannelRealization,
    WaveformFrame,
    add_awgn,
    add_cp,
    apply_multipath,
    draw_realization,
    ebn0_to_noise_variance,
    load_profile,
    mmse_equalize,
    remove_cp,
    save_profile,
)
from .coding import (
    DEFAULT_CODE,
    CodeConfig,
    deinterleave,
    encode,
    interleave,
    map_bits_to_symbols,
    map_symbols_to_bits,
    viterbi_decode,
)
from .harness import (
    BerRecord,
    EfficiencyRecord,
    SidelobeRecord,
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
from .receiver import CorrelationOutput, correlate, correlation_output, demodulate_frame, detect
from .spectrum import (
    DEFAULT_SCENARIO,
    AvailabilityVector,
    BandScenario,
    ClusterPartition,
    SidelobeReport,
    best_random_partition,
    build_availability,
    largest_sidelobe,
    load_partition,
    normalized_sidelobes,
    partition_continuous,
    partition_random,
    save_partition,
    search_space_size,
    sidelobe_report,
)
from .waveform import (
    Fmw,
    PhaseVector,
    SymbolVector,
    energy_scale,
    generate_phase_vector,
    load_fmw,
    modulate,
    save_fmw,
    synthesize_fmw,
)

__version__ = "0.1.0"
