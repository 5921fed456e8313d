import numpy as np
import pytest

from dpdlab.errors import DegenerateSignalError, InvalidConfigError
from dpdlab.metrics import acpr, band_mean_db, evm, psd, report
from dpdlab.pa import apply_bank, make_bank, sample_pa_params
from dpdlab.waveform import ComplexSignal, generate_multitone, normalize_power, set_drive_level


def _sig(samples, fs=16e6, bw=2e6):
    return ComplexSignal(np.asarray(samples, dtype=complex), fs, bw)


def test_evm_identity():
    s = generate_multitone(1024, 4, 2e6, 16e6, seed=0).samples
    assert evm(s, s) == 0.0


def test_evm_uniform_amplitude_error():
    s = generate_multitone(1024, 4, 2e6, 16e6, seed=1).samples
    assert evm(1.1 * s, s) == pytest.approx(10.0, abs=1e-9)


def test_evm_constant_phase_error():
    s = generate_multitone(1024, 4, 2e6, 16e6, seed=2).samples
    expected = 100.0 * abs(np.exp(0.1j) - 1.0)
    assert evm(s * np.exp(0.1j), s) == pytest.approx(expected, abs=1e-9)


def test_evm_error_scale_equivariance():
    rng = np.random.default_rng(3)
    s = rng.standard_normal(512) + 1j * rng.standard_normal(512)
    d = rng.standard_normal(512) + 1j * rng.standard_normal(512)
    assert evm(s + 3.0 * d, s) == pytest.approx(3.0 * evm(s + d, s), rel=1e-12)


def test_evm_zero_iff_equal():
    rng = np.random.default_rng(4)
    s = rng.standard_normal(256) + 1j * rng.standard_normal(256)
    y = s.copy()
    y[100] += 1e-6
    assert evm(y, s) > 0.0
    assert evm(s.copy(), s) == 0.0


def test_evm_skip_and_errors():
    s = np.ones(16, dtype=complex)
    y = s.copy()
    y[:5] = 99.0  # startup garbage
    assert evm(y, s, skip=5) == 0.0
    with pytest.raises(InvalidConfigError):
        evm(np.ones(8, complex), np.ones(9, complex))
    with pytest.raises(DegenerateSignalError):
        evm(np.ones(8, complex), np.zeros(8, complex))


def test_psd_tone_at_zero_db():
    # single tone on a segment bin; occupied band covers only that bin
    fs, seg = 16e6, 256
    n = np.arange(4096)
    tone = np.exp(2j * np.pi * 16 * n / seg)  # exactly on segment bin 16
    sig = ComplexSignal(tone, fs, fs / seg / 2)  # band = one bin around 0... tone at bin 16
    freqs, db = psd(sig, segment_len=seg)
    # normalize against a band centered on the tone instead: use band_mean_db
    peak = freqs[np.argmax(db)]
    assert peak == pytest.approx(16 * fs / seg, abs=1e-6)


def test_psd_single_bin_band_normalization():
    fs, seg = 16e6, 256
    n = np.arange(8192)
    tone = np.exp(2j * np.pi * 0 * n / seg) * (1.0 + 0j)  # DC tone
    sig = ComplexSignal(tone, fs, fs / seg)  # occupied band ~ the DC bin
    freqs, db = psd(sig, segment_len=seg)
    in_band = np.abs(freqs) <= sig.occupied_bandwidth_hz / 2
    mean_lin = np.mean(10.0 ** (db[in_band] / 10.0))
    assert 10.0 * np.log10(mean_lin) == pytest.approx(0.0, abs=1e-9)
    assert db[np.argmin(np.abs(freqs))] == pytest.approx(0.0, abs=0.1)


def test_psd_white_noise_flat():
    rng = np.random.default_rng(5)
    x = (rng.standard_normal(2**16) + 1j * rng.standard_normal(2**16)) / np.sqrt(2)
    sig = ComplexSignal(x, 16e6, 4e6)
    freqs, db = psd(sig, segment_len=1024)
    assert np.max(db) < 1.5 and np.min(db) > -1.5


def test_psd_in_band_average_is_zero_db():
    sig = generate_multitone(2**14, 16, 2e6, 16e6, seed=6)
    freqs, db = psd(sig)
    in_band = np.abs(freqs) <= 1e6
    assert 10 * np.log10(np.mean(10 ** (db[in_band] / 10))) == pytest.approx(0.0, abs=1e-9)


def test_psd_parseval():
    # with the in-band mean pinned to one, the integrated normalized density
    # of a band-limited signal must equal the occupied bandwidth
    sig = generate_multitone(2**15, 64, 2e6, 16e6, seed=7)
    freqs, db = psd(sig)
    df = freqs[1] - freqs[0]
    total = np.sum(10 ** (db / 10)) * df
    assert total == pytest.approx(sig.occupied_bandwidth_hz, rel=0.01)


def test_psd_validation():
    sig = generate_multitone(512, 4, 2e6, 16e6, seed=8)
    with pytest.raises(InvalidConfigError):
        psd(sig, segment_len=1024)
    with pytest.raises(InvalidConfigError):
        psd(sig, segment_len=100)
    with pytest.raises(InvalidConfigError):
        psd(sig, segment_len=256, overlap=1.0)


def test_acpr_clean_input_floor():
    sig = generate_multitone(2**15, 32, 2e6, 16e6, seed=9)
    assert acpr(psd(sig), 2e6, 3e6) <= -60.0


def test_acpr_passthrough_matches_input():
    sig = generate_multitone(2**14, 16, 2e6, 16e6, seed=10)
    spectrum = psd(sig)
    assert acpr(spectrum, 2e6, 3e6) == acpr(psd(sig), 2e6, 3e6)


def test_acpr_saturated_amplifier_regrowth():
    # regression baseline: a bank driven with zero backoff regrows above -30 dB
    params = sample_pa_params(1, seed=11)
    bank = make_bank(params)
    sig = generate_multitone(2**15, 32, 2e6, 16e6, seed=12)
    sig = set_drive_level(sig, 0.0, params[0])
    y = apply_bank(sig.samples[:, None], bank)[:, 0] / params[0].linear_gain
    spectrum = psd(ComplexSignal(y, 16e6, 2e6))
    assert acpr(spectrum, 2e6, 3e6) >= -30.0


def test_acpr_band_validation():
    sig = generate_multitone(2**13, 8, 2e6, 16e6, seed=13)
    with pytest.raises(InvalidConfigError):
        acpr(psd(sig), 2e6, 8e6)
    with pytest.raises(InvalidConfigError):
        band_mean_db(np.array([0.0, 1.0]), np.array([0.0, 0.0]), 10.0, 0.5)


def test_report_structure(tmp_path):
    sig = normalize_power(generate_multitone(2**13, 8, 2e6, 16e6, seed=14), 0.0)
    params = sample_pa_params(2, seed=15)
    bank = make_bank(params)
    drive = set_drive_level(sig, 7.0, params[0])
    Yp = apply_bank(np.tile(drive.samples[:, None], (1, 2)), bank) / bank.gains[None, :]
    rep = report(Yp, drive, skip=5, segment_len=512, overlap=0.5, acpr_offset_hz=3e6)
    assert len(rep.evm_percent) == 2
    assert rep.mean_evm_percent == pytest.approx(np.mean(rep.evm_percent))
    rep.to_json(tmp_path / "m.json")
    import json

    payload = json.loads((tmp_path / "m.json").read_text())
    assert payload["evm_percent"] == list(rep.evm_percent)
