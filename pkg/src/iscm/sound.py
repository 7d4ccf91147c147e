"""Impact audio: modal synthesis, spectrogram features, auditory encodings.

Impacts are rendered as sums of exponentially damped sinusoids whose
frequencies, decay rates and gains come from the material presets. A step's
events are mixed over a fixed-length window with a little background noise,
converted to a log-magnitude STFT image, resized to 32x32 and normalized by
a fixed global constant so loudness survives normalization.

Two auditory encodings are provided for the crossmodal head to predict:
a binary silence/event label from thresholded spectrogram energy, and a
36-dim feature from a frozen randomly initialized conv net.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import ConfigurationError, UsageError
from .materials import MATERIALS, MaterialPreset

# Saturating impulse-to-gain map: tanh(impulse / IMPULSE_REF).
IMPULSE_REF = 0.05

SPECTROGRAM_SIZE = 32
AUDITORY_FEATURE_DIM = 36

# Calibrated as 2x the largest noise-only spectrogram mean observed over
# 1000 steps at the default noise amplitude (see calibrate_silence_threshold).
DEFAULT_SILENCE_THRESHOLD = 0.0065


@dataclass(frozen=True)
class SoundConfig:
    sample_rate: int = 16000
    step_duration: float = 0.1  # audio window rendered per control step, s
    noise_amplitude: float = 0.003
    silence_threshold: float = DEFAULT_SILENCE_THRESHOLD
    stft_window: int = 256
    stft_hop: int = 64
    encoder_seed: int = 12345

    def __post_init__(self):
        if self.sample_rate <= 0 or self.step_duration <= 0:
            raise ConfigurationError("sample_rate and step_duration must be > 0")
        if not self.stft_window > self.stft_hop > 0:
            raise ConfigurationError("need stft_window > stft_hop > 0")
        if self.silence_threshold <= 0:
            raise ConfigurationError("silence_threshold must be > 0")
        if self.noise_amplitude < 0:
            raise ConfigurationError("noise_amplitude must be >= 0")
        if self.n_samples < self.stft_window:
            raise ConfigurationError("audio window shorter than one STFT frame")

    @property
    def n_samples(self) -> int:
        return int(round(self.sample_rate * self.step_duration))


@dataclass(frozen=True)
class Waveform:
    samples: np.ndarray  # 1-D, clipped to [-1, 1]
    sample_rate: int


def synthesize_impact(impulse: float, preset: MaterialPreset, config: SoundConfig) -> Waveform:
    """Damped-sinusoid ring of one impact. Zero impulse gives silence."""
    if impulse < 0:
        raise UsageError("impulse must be >= 0")
    preset.check_nyquist(config.sample_rate)
    n = config.n_samples
    gain = np.tanh(impulse / IMPULSE_REF)
    if gain == 0.0:
        return Waveform(samples=np.zeros(n), sample_rate=config.sample_rate)
    t = np.arange(n) / config.sample_rate
    samples = np.zeros(n)
    for freq, damping, mode_gain in zip(
        preset.modal_freqs, preset.modal_dampings, preset.modal_gains
    ):
        samples += mode_gain * gain * np.exp(-damping * t) * np.sin(2.0 * np.pi * freq * t)
    return Waveform(samples=np.clip(samples, -1.0, 1.0), sample_rate=config.sample_rate)


def mix_step_audio(
    events: Sequence[tuple[float, MaterialPreset, float]],
    config: SoundConfig,
    rng: np.random.Generator | None = None,
) -> Waveform:
    """Sum per-event impacts at their onsets, add background noise, clip.

    Events are (impulse, preset, onset_seconds) with onsets inside
    [0, step_duration). Noise is uniform in [-noise_amplitude, +noise_amplitude]
    and exactly one noise draw is consumed per call, so a fixed rng yields a
    reproducible per-step noise stream regardless of how many events occur.
    """
    n = config.n_samples
    total = np.zeros(n)
    for impulse, preset, onset in events:
        if not 0.0 <= onset < config.step_duration:
            raise UsageError(f"event onset {onset} outside [0, {config.step_duration})")
        start = int(round(onset * config.sample_rate))
        ring = synthesize_impact(impulse, preset, config).samples
        total[start:] += ring[: n - start]
    if config.noise_amplitude > 0.0:
        if rng is None:
            raise UsageError("mix_step_audio needs an rng when noise_amplitude > 0")
        total = total + rng.uniform(-config.noise_amplitude, config.noise_amplitude, n)
    return Waveform(samples=np.clip(total, -1.0, 1.0), sample_rate=config.sample_rate)


def stft_magnitudes(waveform: Waveform, config: SoundConfig) -> np.ndarray:
    """Hann-windowed magnitude STFT, shape (freq_bins, frames), no padding."""
    x = waveform.samples
    if len(x) != config.n_samples:
        raise UsageError(f"waveform length {len(x)} does not match config ({config.n_samples})")
    window = np.hanning(config.stft_window)
    frames = sliding_window_view(x, config.stft_window)[:: config.stft_hop]
    return np.abs(np.fft.rfft(frames * window, axis=1)).T


def global_normalizer(config: SoundConfig) -> float:
    """Fixed spectrogram scale: log1p of the largest magnitude any clipped
    waveform can produce (the window sum). Keeping this constant across
    presets preserves relative loudness in the normalized image."""
    return float(np.log1p(np.hanning(config.stft_window).sum()))


def _resize_bilinear(image: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Plain bilinear resize with half-pixel centers."""
    in_h, in_w = image.shape

    def axis_coords(n_out, n_in):
        coords = (np.arange(n_out) + 0.5) * (n_in / n_out) - 0.5
        coords = np.clip(coords, 0.0, n_in - 1.0)
        lo = np.floor(coords).astype(int)
        hi = np.minimum(lo + 1, n_in - 1)
        frac = coords - lo
        return lo, hi, frac

    r_lo, r_hi, r_f = axis_coords(out_h, in_h)
    c_lo, c_hi, c_f = axis_coords(out_w, in_w)
    top = image[np.ix_(r_lo, c_lo)] * (1 - c_f) + image[np.ix_(r_lo, c_hi)] * c_f
    bottom = image[np.ix_(r_hi, c_lo)] * (1 - c_f) + image[np.ix_(r_hi, c_hi)] * c_f
    return top * (1 - r_f[:, None]) + bottom * r_f[:, None]


def stft_spectrogram(waveform: Waveform, config: SoundConfig) -> np.ndarray:
    """32x32 spectrogram in [0, 1]: log1p magnitudes, resized, fixed scale.

    Rows are frequency (low first), columns are time.
    """
    mags = np.log1p(stft_magnitudes(waveform, config))
    small = _resize_bilinear(mags, SPECTROGRAM_SIZE, SPECTROGRAM_SIZE)
    scaled = small / global_normalizer(config)
    return np.clip(scaled, 0.0, 1.0).astype(np.float32)


def discriminate(spec_stack: np.ndarray, threshold: float) -> int:
    """1 iff the stack's mean magnitude strictly exceeds the threshold."""
    stack = np.asarray(spec_stack)
    if stack.shape != (SPECTROGRAM_SIZE, SPECTROGRAM_SIZE, 3):
        raise UsageError(f"expected spectrogram stack of shape (32, 32, 3), got {stack.shape}")
    return int(stack.mean() > threshold)


class RandomSpectrogramEncoder:
    """Frozen random conv net mapping a 32x32x3 stack to a 36-dim feature.

    Two stride-2 valid conv layers with ReLU, then a dense layer. Parameters
    are drawn once from a uniform fan-in initialization seeded by
    encoder_seed and never trained; the output serves as a stable
    regression target.
    """

    def __init__(self, encoder_seed: int):
        rng = np.random.default_rng(encoder_seed)

        def uniform(shape, fan_in):
            bound = 1.0 / np.sqrt(fan_in)
            return rng.uniform(-bound, bound, shape)

        self.w1 = uniform((8, 3, 3, 3), fan_in=3 * 9)
        self.b1 = uniform(8, fan_in=3 * 9)
        self.w2 = uniform((16, 8, 3, 3), fan_in=8 * 9)
        self.b2 = uniform(16, fan_in=8 * 9)
        flat = 16 * 7 * 7
        self.w3 = uniform((AUDITORY_FEATURE_DIM, flat), fan_in=flat)
        self.b3 = uniform(AUDITORY_FEATURE_DIM, fan_in=flat)

    @staticmethod
    def _conv(x: np.ndarray, weight: np.ndarray, bias: np.ndarray) -> np.ndarray:
        # x: (B, C, H, W); valid 3x3 convolution with stride 2.
        windows = sliding_window_view(x, (3, 3), axis=(2, 3))[:, :, ::2, ::2]
        out = np.einsum("bchwij,ocij->bohw", windows, weight)
        return out + bias[None, :, None, None]

    def encode_batch(self, stacks: np.ndarray) -> np.ndarray:
        stacks = np.asarray(stacks, dtype=np.float64)
        if stacks.ndim != 4 or stacks.shape[1:] != (SPECTROGRAM_SIZE, SPECTROGRAM_SIZE, 3):
            raise UsageError(f"expected stacks of shape (B, 32, 32, 3), got {stacks.shape}")
        x = stacks.transpose(0, 3, 1, 2)  # to (B, C, H, W)
        x = np.maximum(self._conv(x, self.w1, self.b1), 0.0)
        x = np.maximum(self._conv(x, self.w2, self.b2), 0.0)
        flat = x.reshape(x.shape[0], -1)
        return flat @ self.w3.T + self.b3

    def encode(self, spec_stack: np.ndarray) -> np.ndarray:
        return self.encode_batch(np.asarray(spec_stack)[None])[0]


def random_encode(spec_stack: np.ndarray, encoder_seed: int) -> np.ndarray:
    """One-shot convenience wrapper around RandomSpectrogramEncoder."""
    return RandomSpectrogramEncoder(encoder_seed).encode(spec_stack)


class AudioPipeline:
    """Per-step adapter from environment impact events to one spectrogram.

    All impacts within a control step are mixed at onset zero; at the
    spectrogram's time resolution the sub-step timing of contacts is not
    observable anyway.
    """

    def __init__(self, config: SoundConfig):
        self.config = config
        self._rng: np.random.Generator | None = None
        for preset in MATERIALS.values():
            preset.check_nyquist(config.sample_rate)

    def reset(self, seed: int) -> None:
        self._rng = np.random.default_rng(seed)

    def step_waveform(self, events) -> Waveform:
        if self._rng is None:
            raise UsageError("audio pipeline used before reset()")
        mix_events = [(e.magnitude, MATERIALS[e.material], 0.0) for e in events]
        return mix_step_audio(mix_events, self.config, self._rng)

    def step_spectrogram(self, events) -> np.ndarray:
        return stft_spectrogram(self.step_waveform(events), self.config)


def calibrate_silence_threshold(
    config: SoundConfig, steps: int = 1000, seed: int = 0
) -> float:
    """2x the largest noise-only spectrogram mean over many steps.

    Anything quieter than this is silence by construction; any synthesized
    impact at the default noise level lands above it.
    """
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(steps):
        spec = stft_spectrogram(mix_step_audio([], config, rng), config)
        worst = max(worst, float(spec.mean()))
    return 2.0 * worst
