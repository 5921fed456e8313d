"""Complex baseband excitation signals.

The multitone generator places tones on integer bins of the record length, so
the signal is exactly periodic over the record and spectrally clean outside
the occupied band.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from dpdlab.errors import DegenerateSignalError, InvalidConfigError
from dpdlab.pa import SalehParams

# Sample rate must give at least this much oversampling relative to the
# occupied bandwidth so low-order spectral regrowth stays below Nyquist.
MIN_OVERSAMPLING = 4.0


@dataclass(frozen=True)
class ComplexSignal:
    """Uniformly sampled complex baseband sequence."""

    samples: np.ndarray
    sample_rate_hz: float
    occupied_bandwidth_hz: float

    def __post_init__(self):
        s = np.ascontiguousarray(self.samples, dtype=complex)
        if s.ndim != 1 or s.size == 0:
            raise InvalidConfigError("samples must be a non-empty 1-D sequence")
        if not np.all(np.isfinite(s.real)) or not np.all(np.isfinite(s.imag)):
            raise InvalidConfigError("samples must be finite")
        if self.sample_rate_hz <= 0 or self.occupied_bandwidth_hz <= 0:
            raise InvalidConfigError("rates must be positive")
        if self.sample_rate_hz < MIN_OVERSAMPLING * self.occupied_bandwidth_hz:
            raise InvalidConfigError(
                f"sample rate must be >= {MIN_OVERSAMPLING}x the occupied bandwidth"
            )
        object.__setattr__(self, "samples", s)

    def __len__(self):
        return self.samples.size

    def mean_power(self) -> float:
        return float(np.mean(np.abs(self.samples) ** 2))

    def peak_amplitude(self) -> float:
        return float(np.max(np.abs(self.samples)))

    def with_samples(self, samples) -> "ComplexSignal":
        return ComplexSignal(samples, self.sample_rate_hz, self.occupied_bandwidth_hz)


def generate_multitone(
    num_samples: int,
    num_tones: int,
    occupied_bandwidth_hz: float,
    sample_rate_hz: float,
    seed: int,
) -> ComplexSignal:
    """Sum of equally spaced unit tones inside the occupied band.

    Tone frequencies are snapped to integer bins of the record so the signal
    is periodic over `num_samples`. Phases are uniform random from `seed` and
    the result is normalized to unit mean power.
    """
    if num_samples < 1 or num_tones < 1:
        raise InvalidConfigError("num_samples and num_tones must be positive")
    if sample_rate_hz < MIN_OVERSAMPLING * occupied_bandwidth_hz:
        raise InvalidConfigError(
            f"sample rate must be >= {MIN_OVERSAMPLING}x the occupied bandwidth"
        )
    # Tones sit at the centers of num_tones equal sub-bands of the occupied
    # band; distinct record bins require enough record length.
    targets = (np.arange(num_tones) + 0.5) / num_tones - 0.5
    bins = np.round(targets * occupied_bandwidth_hz * num_samples / sample_rate_hz)
    if len(np.unique(bins)) != num_tones:
        raise InvalidConfigError(
            "record too short to give every tone a distinct frequency bin"
        )
    rng = np.random.default_rng(seed)
    phases = rng.uniform(0.0, 2.0 * np.pi, size=num_tones)

    spectrum = np.zeros(num_samples, dtype=complex)
    spectrum[bins.astype(int) % num_samples] = num_samples * np.exp(1j * phases)
    samples = np.fft.ifft(spectrum)
    samples /= np.sqrt(np.mean(np.abs(samples) ** 2))
    return ComplexSignal(samples, sample_rate_hz, occupied_bandwidth_hz)


def normalize_power(signal: ComplexSignal, target_db: float) -> ComplexSignal:
    """Rescale so the mean power equals 10^(target_db / 10)."""
    power = signal.mean_power()
    if power == 0.0:
        raise DegenerateSignalError("cannot normalize an all-zero signal")
    target = 10.0 ** (target_db / 10.0)
    return signal.with_samples(signal.samples * np.sqrt(target / power))


def set_drive_level(
    signal: ComplexSignal, backoff_db: float, params: SalehParams
) -> ComplexSignal:
    """Scale so the peak amplitude sits `backoff_db` below PA saturation.

    Saturation is the input amplitude maximizing the AM/AM curve,
    1 / sqrt(beta_a).
    """
    if backoff_db < 0:
        raise InvalidConfigError("backoff_db must be >= 0")
    peak = signal.peak_amplitude()
    if peak == 0.0:
        raise DegenerateSignalError("cannot set drive level of an all-zero signal")
    target_peak = params.input_saturation * 10.0 ** (-backoff_db / 20.0)
    return signal.with_samples(signal.samples * (target_peak / peak))


def dump_signal(signal: ComplexSignal, path):
    """Binary dump: little-endian interleaved float64 (re, im) + JSON sidecar."""
    path = Path(path)
    interleaved = np.empty(2 * len(signal), dtype="<f8")
    interleaved[0::2] = signal.samples.real
    interleaved[1::2] = signal.samples.imag
    path.write_bytes(interleaved.tobytes())
    sidecar = {
        "sample_rate_hz": signal.sample_rate_hz,
        "occupied_bandwidth_hz": signal.occupied_bandwidth_hz,
        "num_samples": len(signal),
    }
    path.with_suffix(path.suffix + ".json").write_text(json.dumps(sidecar, indent=2))


def load_signal(path) -> ComplexSignal:
    path = Path(path)
    sidecar = json.loads(path.with_suffix(path.suffix + ".json").read_text())
    raw = np.frombuffer(path.read_bytes(), dtype="<f8")
    samples = raw[0::2] + 1j * raw[1::2]
    return ComplexSignal(
        samples, sidecar["sample_rate_hz"], sidecar["occupied_bandwidth_hz"]
    )
