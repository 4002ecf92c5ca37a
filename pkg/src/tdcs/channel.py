"""AWGN and block-fading multipath channels with cyclic-prefix handling.

Conventions fixed here and relied on everywhere else:
  * noise_variance is the per-complex-sample variance (sigma^2/2 per
    dimension), injected over the full frame including any cyclic prefix;
  * Eb/N0 counts information bits per frame against the frame *body* energy,
    so sigma^2 = frame_energy / (info_bits * 10^(ebn0_db/10));
  * the cyclic prefix is N/4 samples, a copy of the body tail, which turns
    channel memory <= N/4 into circular convolution after prefix removal.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

__all__ = [
    "WaveformFrame",
    "ChannelProfile",
    "ChannelRealization",
    "COST207_RA6",
    "add_awgn",
    "ebn0_to_noise_variance",
    "add_cp",
    "remove_cp",
    "draw_realization",
    "apply_multipath",
    "mmse_equalize",
    "load_profile",
    "save_profile",
]


@dataclass(frozen=True, eq=False)
class WaveformFrame:
    """Complex baseband samples of one symbol frame, optionally CP-extended."""

    samples: np.ndarray
    n_bins: int
    has_cp: bool = False

    def __post_init__(self) -> None:
        samples = np.asarray(self.samples, dtype=np.complex128)
        expected = self.n_bins + self.n_bins // 4 if self.has_cp else self.n_bins
        if samples.ndim != 1 or samples.size != expected:
            raise ValueError(
                f"frame length {samples.size} does not match n_bins={self.n_bins}"
                f" (has_cp={self.has_cp})"
            )
        object.__setattr__(self, "samples", samples)

    @property
    def body(self) -> np.ndarray:
        """Samples without the cyclic prefix."""
        return self.samples[self.n_bins // 4 :] if self.has_cp else self.samples

    @property
    def energy(self) -> float:
        return float(np.sum(np.abs(self.samples) ** 2))


def add_awgn(frame: WaveformFrame, noise_variance: float, seed: int) -> WaveformFrame:
    """Add circularly-symmetric complex Gaussian noise of the given per-sample variance."""
    if noise_variance < 0:
        raise ValueError("noise variance must be >= 0")
    if noise_variance == 0:
        return replace(frame, samples=frame.samples.copy())
    rng = np.random.default_rng(seed)
    scale = np.sqrt(noise_variance / 2.0)
    noise = scale * (
        rng.standard_normal(frame.samples.size)
        + 1j * rng.standard_normal(frame.samples.size)
    )
    return replace(frame, samples=frame.samples + noise)


def ebn0_to_noise_variance(
    ebn0_db: float,
    info_bits_per_frame: float,
    frame_energy: float = 1.0,
    frame_length_samples: int | None = None,
) -> float:
    """Per-sample noise variance for a requested information-bit Eb/N0.

    sigma^2 = frame_energy / (info_bits_per_frame * 10^(ebn0_db/10)).
    Noise is injected per sample over the whole (possibly CP-extended) frame
    while the signal energy is accounted on the body, so the frame length
    does not enter the formula; the parameter is accepted only to make the
    adopted convention explicit at call sites.
    """
    del frame_length_samples
    if info_bits_per_frame <= 0:
        raise ValueError("info_bits_per_frame must be positive")
    if frame_energy <= 0:
        raise ValueError("frame_energy must be positive")
    eb = frame_energy / info_bits_per_frame
    return eb / 10.0 ** (ebn0_db / 10.0)


def add_cp(frame: WaveformFrame) -> WaveformFrame:
    """Prepend the last N/4 body samples as a cyclic prefix."""
    if frame.has_cp:
        raise ValueError("frame already has a cyclic prefix")
    n = frame.n_bins
    if n % 4:
        raise ValueError("n_bins must be divisible by 4 for a length-N/4 prefix")
    samples = np.concatenate([frame.samples[-n // 4 :], frame.samples])
    return WaveformFrame(samples, n, has_cp=True)


def remove_cp(frame: WaveformFrame) -> WaveformFrame:
    """Drop the cyclic prefix; exact inverse of add_cp."""
    if not frame.has_cp:
        raise ValueError("frame has no cyclic prefix")
    return WaveformFrame(frame.samples[frame.n_bins // 4 :], frame.n_bins, has_cp=False)


@dataclass(frozen=True)
class ChannelProfile:
    """Tapped-delay-line power profile; linear powers are normalized to sum 1."""

    name: str
    tap_delays_us: tuple[float, ...]
    tap_powers_db: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.tap_delays_us) != len(self.tap_powers_db) or not self.tap_delays_us:
            raise ValueError("profile needs matching, non-empty delay/power lists")
        if any(d < 0 for d in self.tap_delays_us):
            raise ValueError("tap delays must be >= 0")
        object.__setattr__(self, "tap_delays_us", tuple(float(d) for d in self.tap_delays_us))
        object.__setattr__(self, "tap_powers_db", tuple(float(p) for p in self.tap_powers_db))

    def normalized_linear_powers(self) -> np.ndarray:
        p = 10.0 ** (np.asarray(self.tap_powers_db) / 10.0)
        return p / p.sum()


# Standard rural-area 6-tap profile used by the multipath experiments.
COST207_RA6 = ChannelProfile(
    name="COST207-RAx6",
    tap_delays_us=(0.0, 0.1, 0.2, 0.3, 0.4, 0.5),
    tap_powers_db=(0.0, -4.0, -8.0, -12.0, -16.0, -20.0),
)


@dataclass(frozen=True, eq=False)
class ChannelRealization:
    """One block-fading draw: sample-spaced taps and their N-bin frequency response."""

    taps: np.ndarray
    freq_response: np.ndarray

    @property
    def n_bins(self) -> int:
        return int(self.freq_response.size)

    @property
    def memory(self) -> int:
        return int(self.taps.size - 1)


def draw_realization(
    profile: ChannelProfile,
    sample_rate_hz: float,
    seed: int,
    n_bins: int,
) -> ChannelRealization:
    """Draw one Rayleigh realization: independent complex Gaussian taps.

    Each tap has variance equal to its normalized linear power; delays are
    rounded to the nearest sample.  Block fading: call once per frame.
    """
    if sample_rate_hz <= 0:
        raise ValueError("sample rate must be positive")
    delays = np.rint(np.asarray(profile.tap_delays_us) * 1e-6 * sample_rate_hz).astype(int)
    if delays.max() > n_bins // 4:
        raise ValueError("CP too short for the profile's maximum delay")
    powers = profile.normalized_linear_powers()
    rng = np.random.default_rng(seed)
    gains = np.sqrt(powers / 2.0) * (
        rng.standard_normal(powers.size) + 1j * rng.standard_normal(powers.size)
    )
    taps = np.zeros(delays.max() + 1, dtype=np.complex128)
    np.add.at(taps, delays, gains)
    return ChannelRealization(taps=taps, freq_response=np.fft.fft(taps, n=n_bins))


def apply_multipath(frame: WaveformFrame, realization: ChannelRealization) -> WaveformFrame:
    """Linear convolution with the taps, truncated to the frame length.

    With a cyclic prefix at least as long as the channel memory, the frame
    body after prefix removal equals the circular convolution of the
    transmitted body with the taps.
    """
    if not frame.has_cp:
        raise ValueError("multipath needs a CP-extended frame")
    if frame.n_bins != realization.n_bins:
        raise ValueError("realization drawn for a different n_bins")
    if realization.memory > frame.n_bins // 4:
        raise ValueError("CP too short for the channel memory")
    convolved = np.convolve(frame.samples, realization.taps)[: frame.samples.size]
    return replace(frame, samples=convolved)


def mmse_equalize(
    received_freq: np.ndarray,
    realization: ChannelRealization,
    noise_variance: float,
    signal_bin_power: float = 1.0,
) -> np.ndarray:
    """Per-bin MMSE scaling conj(H) / (|H|^2 + NSR) of the received spectrum.

    `signal_bin_power` is the average |X_k|^2 on transmitted bins under the
    unscaled forward transform; the per-bin noise power is then
    n_bins * noise_variance, giving NSR = n_bins * noise_variance / signal_bin_power.
    A positive noise variance regularizes spectral nulls of H.
    """
    if signal_bin_power <= 0:
        raise ValueError("signal_bin_power must be positive")
    h = realization.freq_response
    nsr = realization.n_bins * noise_variance / signal_bin_power
    return received_freq * h.conj() / (np.abs(h) ** 2 + nsr)


def save_profile(profile: ChannelProfile, path) -> None:
    """Write the profile as: name line, then one 'delay_us power_db' per line."""
    with open(path, "w") as fh:
        fh.write(profile.name + "\n")
        for d, p in zip(profile.tap_delays_us, profile.tap_powers_db):
            fh.write(f"{d:g} {p:g}\n")


def load_profile(path) -> ChannelProfile:
    """Read a profile written by save_profile."""
    with open(path) as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if len(lines) < 2:
        raise ValueError("profile file needs a name and at least one tap")
    delays, powers = [], []
    for ln in lines[1:]:
        d, p = ln.split()
        delays.append(float(d))
        powers.append(float(p))
    return ChannelProfile(lines[0], tuple(delays), tuple(powers))
