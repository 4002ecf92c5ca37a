import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tdcs.spectrum import ClusterPartition, partition_continuous, partition_random
from tdcs.waveform import (
    SymbolVector,
    energy_scale,
    generate_phase_vector,
    load_fmw,
    modulate,
    save_fmw,
    synthesize_fmw,
)


def test_phase_vector_unit_magnitude():
    phase = generate_phase_vector(3, 512)
    assert np.abs(np.abs(phase.phases) - 1.0).max() < 1e-12


def test_phase_vector_deterministic():
    a = generate_phase_vector(42, 256)
    b = generate_phase_vector(42, 256)
    assert np.array_equal(a.phases, b.phases)


def test_phase_vectors_differ_between_seeds():
    a = generate_phase_vector(1, 1024)
    b = generate_phase_vector(2, 1024)
    differing = np.mean(np.abs(a.phases - b.phases) > 1e-9)
    assert differing >= 0.90


def test_phase_vector_pluggable_angles():
    phase = generate_phase_vector(0, 8, angle_source=lambda rng, n: np.zeros(n))
    assert np.allclose(phase.phases, 1.0)


def test_fmw_spectrum_support(avail_256):
    part = partition_random(avail_256, 8, seed=1)
    phase = generate_phase_vector(5, 256)
    scale = energy_scale(256, avail_256.n_unoccupied)
    fmw = synthesize_fmw(part.clusters[2], phase, 256, scale)
    spectrum = np.fft.fft(fmw.time_samples)
    on = np.zeros(256, dtype=bool)
    on[part.clusters[2]] = True
    assert np.allclose(spectrum[on], scale * phase.phases[on], atol=1e-12)
    assert np.abs(spectrum[~on]).max() < 1e-12


def test_fmw_full_hole_set_energy_is_one(avail_256):
    part = partition_continuous(avail_256, 1)
    phase = generate_phase_vector(5, 256)
    scale = energy_scale(256, avail_256.n_unoccupied)
    fmw = synthesize_fmw(part.clusters[0], phase, 256, scale)
    assert np.sum(np.abs(fmw.time_samples) ** 2) == pytest.approx(1.0, abs=1e-12)


def test_fmw_single_bin_constant_envelope():
    phase = generate_phase_vector(5, 64)
    fmw = synthesize_fmw(np.array([11]), phase, 64, scale=2.0)
    assert np.allclose(np.abs(fmw.time_samples), 2.0 / 64, atol=1e-12)


def test_fmw_empty_cluster_raises():
    phase = generate_phase_vector(5, 64)
    with pytest.raises(ValueError, match="empty"):
        synthesize_fmw(np.array([], dtype=int), phase, 64, 1.0)


def test_symbol_vector_range_checked():
    with pytest.raises(ValueError, match="out of range"):
        SymbolVector(np.array([256]), 256)


def test_modulate_zero_shift_equals_fmw(avail_256):
    part = partition_continuous(avail_256, 1)
    phase = generate_phase_vector(9, 256)
    scale = energy_scale(256, avail_256.n_unoccupied)
    fmw = synthesize_fmw(part.clusters[0], phase, 256, scale)
    frame = modulate(part, phase, SymbolVector(np.array([0]), 256))
    assert np.allclose(frame.samples, fmw.time_samples, atol=1e-12)


@pytest.mark.parametrize("symbol", [1, 5, 100, 255])
def test_modulate_shift_theorem(avail_256, symbol):
    part = partition_continuous(avail_256, 1)
    phase = generate_phase_vector(9, 256)
    scale = energy_scale(256, avail_256.n_unoccupied)
    fmw = synthesize_fmw(part.clusters[0], phase, 256, scale)
    frame = modulate(part, phase, SymbolVector(np.array([symbol]), 256))
    shifted = np.roll(fmw.time_samples, symbol)  # shift step N/M = 1 here
    assert np.allclose(frame.samples, shifted, atol=1e-12)


def test_modulate_sub_order_shift_granularity(avail_256):
    # M = 64 < N = 256: a symbol shifts by N/M = 4 samples
    part = partition_continuous(avail_256, 1)
    phase = generate_phase_vector(9, 256)
    scale = energy_scale(256, avail_256.n_unoccupied)
    fmw = synthesize_fmw(part.clusters[0], phase, 256, scale)
    frame = modulate(part, phase, SymbolVector(np.array([3]), 64))
    assert np.allclose(frame.samples, np.roll(fmw.time_samples, 12), atol=1e-12)


@settings(max_examples=30, deadline=None)
@given(
    n_clusters=st.sampled_from([1, 2, 4, 8, 16]),
    seed=st.integers(0, 2**31 - 1),
)
def test_modulate_unit_energy_and_support(avail_256, n_clusters, seed):
    part = partition_random(avail_256, n_clusters, seed)
    phase = generate_phase_vector(9, 256)
    rng = np.random.default_rng(seed)
    symbols = SymbolVector(rng.integers(0, 256, n_clusters), 256)
    frame = modulate(part, phase, symbols)
    assert np.sum(np.abs(frame.samples) ** 2) == pytest.approx(1.0, abs=1e-9)
    spectrum = np.fft.fft(frame.samples)
    assert np.abs(spectrum[avail_256.mask == 0]).max() < 1e-9


def test_modulate_cluster_components_orthogonal(avail_256):
    # disjoint supports: the frequency-domain inner product of two cluster
    # components is exactly zero on the constructed spectra, and at float
    # residue level after a transform round trip
    part = partition_random(avail_256, 4, seed=2)
    phase = generate_phase_vector(9, 256)
    scale = energy_scale(256, avail_256.n_unoccupied)
    built = []
    for cluster in part.clusters:
        spectrum = np.zeros(256, dtype=complex)
        spectrum[cluster] = scale * phase.phases[cluster]
        built.append(spectrum)
    roundtrip = [
        np.fft.fft(synthesize_fmw(c, phase, 256, scale).time_samples) for c in part.clusters
    ]
    for i in range(4):
        for j in range(i + 1, 4):
            assert np.vdot(built[i], built[j]) == 0.0
            assert abs(np.vdot(roundtrip[i], roundtrip[j])) < 1e-12


def test_modulate_symbol_count_mismatch(avail_256):
    part = partition_random(avail_256, 4, seed=2)
    phase = generate_phase_vector(9, 256)
    with pytest.raises(ValueError, match="one symbol per cluster"):
        modulate(part, phase, SymbolVector(np.array([0, 1]), 256))


def test_modulate_order_must_divide_bins():
    part = ClusterPartition((np.arange(6),), 6)
    phase = generate_phase_vector(9, 6)
    with pytest.raises(ValueError, match="divide"):
        modulate(part, phase, SymbolVector(np.array([0]), 4))


def test_fmw_dump_roundtrip(tmp_path, avail_256):
    phase = generate_phase_vector(5, 256)
    fmw = synthesize_fmw(avail_256.unoccupied, phase, 256, 1.2)
    path = tmp_path / "fmw.txt"
    save_fmw(fmw, path)
    loaded = load_fmw(path)
    assert np.allclose(loaded, fmw.time_samples, atol=1e-15)
    first = path.read_text().splitlines()[0].split()
    assert len(first) == 2  # real, imaginary columns
