"""Linearization metrics: EVM, normalized PSD, adjacent-channel power."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import signal as sps

from dpdlab.errors import DegenerateSignalError, InvalidConfigError
from dpdlab.waveform import ComplexSignal


def _samples(x):
    return x.samples if isinstance(x, ComplexSignal) else np.asarray(x, dtype=complex)


def evm(y, s, skip: int = 0) -> float:
    """Error vector magnitude in percent.

    y is the gain-scaled amplifier output, s the reference message; both
    complex, so the error and reference powers use magnitude squares. `skip`
    drops the startup transient (typically the basis memory length).
    """
    y = _samples(y)
    s = _samples(s)
    if y.shape != s.shape:
        raise InvalidConfigError("signals must have equal length")
    y = y[skip:]
    s = s[skip:]
    ref = float(np.sum(np.abs(s) ** 2))
    if ref == 0.0:
        raise DegenerateSignalError("reference signal has zero power")
    return 100.0 * float(np.sqrt(np.sum(np.abs(y - s) ** 2) / ref))


def psd(x: ComplexSignal, segment_len: int = 1024, overlap: float = 0.5):
    """Averaged-periodogram density, in-band mean normalized to 0 dB.

    Hann taper, two-sided (complex baseband), frequencies centered. Returns
    (freq_hz, power_db).
    """
    samples = x.samples
    if segment_len > samples.size:
        raise InvalidConfigError("segment length exceeds the signal length")
    if segment_len & (segment_len - 1):
        raise InvalidConfigError("segment length must be a power of two")
    if not 0.0 <= overlap < 1.0:
        raise InvalidConfigError("overlap must lie in [0, 1)")
    # 4-term cosine-sum taper: sidelobes near -92 dB, low enough to read
    # adjacent-channel floors next to discrete in-band tones
    freqs, p_lin = sps.welch(
        samples,
        fs=x.sample_rate_hz,
        window="blackmanharris",
        nperseg=segment_len,
        noverlap=int(segment_len * overlap),
        detrend=False,
        return_onesided=False,
        scaling="density",
    )
    freqs = np.fft.fftshift(freqs)
    p_lin = np.fft.fftshift(p_lin)
    in_band = np.abs(freqs) <= x.occupied_bandwidth_hz / 2.0
    p_lin = p_lin / np.mean(p_lin[in_band])
    return freqs, 10.0 * np.log10(np.maximum(p_lin, 1e-300))


def band_mean_db(freqs, power_db, center_hz: float, width_hz: float) -> float:
    """Mean linear power over a band, in dB."""
    mask = np.abs(freqs - center_hz) <= width_hz / 2.0
    if not np.any(mask):
        raise InvalidConfigError("band lies outside the PSD grid")
    return 10.0 * float(np.log10(np.mean(10.0 ** (power_db[mask] / 10.0))))


def acpr(psd_output, band_hz: float, adjacent_offset_hz: float) -> float:
    """Adjacent-band mean power relative to in-band mean power, in dB.

    Averages the upper and lower adjacent bands (each band_hz wide, centered
    adjacent_offset_hz away from the carrier).
    """
    freqs, power_db = psd_output
    freqs = np.asarray(freqs)
    nyquist = np.max(np.abs(freqs))
    if adjacent_offset_hz + band_hz / 2.0 > nyquist:
        raise InvalidConfigError("adjacent band exceeds the Nyquist range")
    inband = band_mean_db(freqs, power_db, 0.0, band_hz)
    upper = 10.0 ** (band_mean_db(freqs, power_db, adjacent_offset_hz, band_hz) / 10.0)
    lower = 10.0 ** (band_mean_db(freqs, power_db, -adjacent_offset_hz, band_hz) / 10.0)
    return 10.0 * float(np.log10((upper + lower) / 2.0)) - inband


@dataclass(frozen=True)
class MetricsReport:
    """Per-amplifier EVM plus spectral figures for one trained scheme."""

    evm_percent: tuple
    mean_evm_percent: float
    acpr_db: float

    def to_json(self, path):
        payload = {
            "evm_percent": list(self.evm_percent),
            "mean_evm_percent": self.mean_evm_percent,
            "acpr_db": self.acpr_db,
        }
        Path(path).write_text(json.dumps(payload, indent=2))


def report(Yp: np.ndarray, reference: ComplexSignal, skip: int,
           segment_len: int, overlap: float, acpr_offset_hz: float) -> MetricsReport:
    """Score a bank of scaled outputs against the reference message."""
    values = tuple(
        evm(Yp[:, l], reference.samples, skip=skip) for l in range(Yp.shape[1])
    )
    out = ComplexSignal(Yp[:, 0], reference.sample_rate_hz, reference.occupied_bandwidth_hz)
    spectrum = psd(out, segment_len=segment_len, overlap=overlap)
    return MetricsReport(
        evm_percent=values,
        mean_evm_percent=float(np.mean(values)),
        acpr_db=acpr(spectrum, reference.occupied_bandwidth_hz, acpr_offset_hz),
    )
