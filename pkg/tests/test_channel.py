import numpy as np
import pytest

from tdcs.channel import (
    COST207_RA6,
    ChannelProfile,
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
from tdcs.seeding import derive_seed
from tdcs.spectrum import partition_random
from tdcs.waveform import SymbolVector, generate_phase_vector, modulate


def _random_frame(n_bins, seed=0):
    rng = np.random.default_rng(seed)
    samples = rng.standard_normal(n_bins) + 1j * rng.standard_normal(n_bins)
    return WaveformFrame(samples, n_bins)


# -------------------------------------------------------------------- AWGN


def test_zero_variance_is_bit_exact():
    frame = _random_frame(64)
    out = add_awgn(frame, 0.0, seed=1)
    assert np.array_equal(out.samples, frame.samples)


def test_noise_variance_calibration():
    n = 1 << 20  # ~1e6 samples
    frame = WaveformFrame(np.zeros(n, dtype=complex), n)
    sigma2 = 0.37
    out = add_awgn(frame, sigma2, seed=7)
    measured = np.mean(np.abs(out.samples) ** 2)
    assert abs(measured / sigma2 - 1.0) < 0.01


def test_noise_independent_between_seeds():
    n = 1 << 20
    frame = WaveformFrame(np.zeros(n, dtype=complex), n)
    a = add_awgn(frame, 1.0, seed=1).samples
    b = add_awgn(frame, 1.0, seed=2).samples
    corr = np.abs(np.vdot(a, b)) / n
    assert corr < 3.0 / np.sqrt(n)


def test_noise_deterministic_per_seed():
    frame = _random_frame(128)
    a = add_awgn(frame, 0.5, seed=33)
    b = add_awgn(frame, 0.5, seed=33)
    assert np.array_equal(a.samples, b.samples)


# ------------------------------------------------------------- calibration


def test_ebn0_conversion_closed_form():
    assert ebn0_to_noise_variance(0.0, 8, 1.0) == pytest.approx(1.0 / 8.0)
    assert ebn0_to_noise_variance(10.0, 8, 1.0) == pytest.approx(1.0 / 80.0)
    assert ebn0_to_noise_variance(float("inf"), 8, 1.0) == 0.0


def test_ebn0_conversion_rejects_bad_bits():
    with pytest.raises(ValueError):
        ebn0_to_noise_variance(0.0, 0, 1.0)


# ---------------------------------------------------------------------- CP


def test_cp_roundtrip_bit_exact():
    frame = _random_frame(64)
    assert np.array_equal(remove_cp(add_cp(frame)).samples, frame.samples)


def test_cp_length_and_content():
    frame = _random_frame(64)
    extended = add_cp(frame)
    assert extended.samples.size == 64 + 16
    assert np.array_equal(extended.samples[:16], frame.samples[-16:])


def test_remove_cp_without_prefix_raises():
    with pytest.raises(ValueError, match="no cyclic prefix"):
        remove_cp(_random_frame(64))


def test_add_cp_twice_raises():
    with pytest.raises(ValueError, match="already"):
        add_cp(add_cp(_random_frame(64)))


# ------------------------------------------------------------ realizations


def test_single_tap_profile_is_flat():
    profile = ChannelProfile("flat", (0.0,), (0.0,))
    real = draw_realization(profile, 10e6, seed=3, n_bins=64)
    assert np.allclose(np.abs(real.freq_response), np.abs(real.taps[0]), atol=1e-12)


def test_tap_power_normalization():
    total = 0.0
    draws = 10_000
    for i in range(draws):
        real = draw_realization(COST207_RA6, 10e6, seed=derive_seed(5, i), n_bins=32)
        total += np.sum(np.abs(real.taps) ** 2)
    assert abs(total / draws - 1.0) < 0.02


def test_cost207_ra6_fits_cp_at_10mhz():
    real = draw_realization(COST207_RA6, 10e6, seed=0, n_bins=256)
    assert real.memory <= 5  # 0.5 us at 10 MHz
    assert real.memory < 256 // 4


def test_cp_too_short_raises():
    profile = ChannelProfile("long", (0.0, 3.0), (0.0, -3.0))
    with pytest.raises(ValueError, match="CP too short"):
        draw_realization(profile, 10e6, seed=0, n_bins=64)


def test_freq_response_is_fft_of_taps():
    real = draw_realization(COST207_RA6, 10e6, seed=11, n_bins=128)
    assert np.allclose(real.freq_response, np.fft.fft(real.taps, n=128), atol=1e-12)


# ---------------------------------------------------------------- multipath


def test_identity_tap_passthrough():
    profile = ChannelProfile("flat", (0.0,), (0.0,))
    real = draw_realization(profile, 10e6, seed=3, n_bins=64)
    frame = add_cp(_random_frame(64))
    out = apply_multipath(frame, real)
    assert np.allclose(out.samples, real.taps[0] * frame.samples, atol=1e-12)


def test_multipath_requires_cp():
    real = draw_realization(COST207_RA6, 10e6, seed=3, n_bins=64)
    with pytest.raises(ValueError, match="CP-extended"):
        apply_multipath(_random_frame(64), real)


def test_cp_circularity_gives_per_bin_multiplication():
    # after CP removal the body spectrum is H_k * X_k (noiseless)
    frame = _random_frame(256, seed=4)
    real = draw_realization(COST207_RA6, 10e6, seed=9, n_bins=256)
    received = remove_cp(apply_multipath(add_cp(frame), real))
    lhs = np.fft.fft(received.samples)
    rhs = real.freq_response * np.fft.fft(frame.samples)
    assert np.abs(lhs - rhs).max() < 1e-9


def test_cp_circularity_with_noise_decomposition():
    frame = _random_frame(256, seed=4)
    real = draw_realization(COST207_RA6, 10e6, seed=9, n_bins=256)
    faded = apply_multipath(add_cp(frame), real)
    noisy = add_awgn(faded, 0.25, seed=21)
    noise = noisy.samples - faded.samples  # regenerate exactly what was injected
    lhs = np.fft.fft(remove_cp(noisy).samples)
    rhs = real.freq_response * np.fft.fft(frame.samples) + np.fft.fft(noise[64:])
    assert np.abs(lhs - rhs).max() < 1e-9


def test_two_tap_channel_matches_direct_convolution():
    profile = ChannelProfile("two", (0.0, 0.2), (0.0, -3.0))
    real = draw_realization(profile, 10e6, seed=13, n_bins=32)
    frame = add_cp(_random_frame(32, seed=2))
    out = apply_multipath(frame, real)
    direct = np.zeros_like(frame.samples)
    for delay, tap in enumerate(real.taps):
        shifted = np.concatenate([np.zeros(delay, dtype=complex), frame.samples[: frame.samples.size - delay]])
        direct += tap * shifted
    assert np.allclose(out.samples, direct, atol=1e-12)


# --------------------------------------------------------------------- MMSE


def test_mmse_flat_channel_identity_limit():
    profile = ChannelProfile("flat", (0.0,), (0.0,))
    real = draw_realization(profile, 10e6, seed=3, n_bins=64)
    # force H = 1 exactly
    object.__setattr__(real, "freq_response", np.ones(64, dtype=complex))
    x = np.arange(64).astype(complex)
    assert np.allclose(mmse_equalize(x, real, 0.0), x, atol=1e-12)


def test_mmse_scalar_channel_divides():
    profile = ChannelProfile("flat", (0.0,), (0.0,))
    real = draw_realization(profile, 10e6, seed=3, n_bins=64)
    object.__setattr__(real, "freq_response", 2.0 * np.ones(64, dtype=complex))
    x = np.ones(64, dtype=complex)
    assert np.allclose(mmse_equalize(x, real, 0.0), x / 2.0, atol=1e-12)


def test_mmse_noiseless_multipath_loopback(avail_256):
    part = partition_random(avail_256, 4, seed=6)
    phase = generate_phase_vector(8, 256)
    symbols = SymbolVector(np.array([7, 99, 0, 255]), 256)
    frame = modulate(part, phase, symbols)
    real = draw_realization(COST207_RA6, 10e6, seed=77, n_bins=256)
    received = remove_cp(apply_multipath(add_cp(frame), real))
    sigma2 = 1e-12  # regularizes nulls; effectively noiseless
    equalized_freq = mmse_equalize(
        np.fft.fft(received.samples), real, sigma2, signal_bin_power=256 / 192
    )
    from tdcs.receiver import demodulate_frame

    out = demodulate_frame(np.fft.ifft(equalized_freq), part, phase, 256)
    assert np.array_equal(out.symbols, symbols.symbols)


# ------------------------------------------------------------ profile files


def test_profile_file_roundtrip(tmp_path):
    path = tmp_path / "ra6.profile"
    save_profile(COST207_RA6, path)
    loaded = load_profile(path)
    assert loaded == COST207_RA6
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "COST207-RAx6"
    assert len(lines) == 7


def test_profile_powers_normalized():
    p = COST207_RA6.normalized_linear_powers()
    assert p.sum() == pytest.approx(1.0)
    assert (p > 0).all()
