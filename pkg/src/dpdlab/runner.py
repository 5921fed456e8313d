"""Experiment driver: build the system from a config, train, score, write files.

Every artifact is written to a temp file and atomically renamed, so an output
directory never holds a half-written file. CSV output is RFC-4180 (CRLF,
header row, '.' decimal); floats use repr, which round-trips exactly and
keeps reruns byte-identical.
"""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from dpdlab import metrics as met
from dpdlab import waveform as wf
from dpdlab.config import ExperimentConfig
from dpdlab.errors import DivergenceError
from dpdlab.gmp import estimate_dominance
from dpdlab.pa import apply_bank, bank_feedback, load_params, make_bank, sample_pa_params
from dpdlab.structures import dump_coeffs
from dpdlab.training import (
    RpemHyper,
    TrainRun,
    predistorted_pass,
    train,
    train_full,
)

PILOT_ITERS = 8  # short full-structure run used when dominance = auto


@dataclass
class ExperimentResult:
    out_dir: Path
    summary: dict          # algorithm -> per-PA EVM list
    diverged: list         # algorithms that raised a divergence error


def _atomic_write(path: Path, write_fn):
    tmp = path.with_suffix(path.suffix + ".tmp")
    with open(tmp, "w", newline="") as fh:
        write_fn(fh)
    os.replace(tmp, path)


def _write_psd_csv(path: Path, freqs, power_db):
    def write(fh):
        w = csv.writer(fh, lineterminator="\r\n")
        w.writerow(["frequency_hz", "power_db"])
        for f, p in zip(freqs, power_db):
            w.writerow([repr(float(f)), repr(float(p))])

    _atomic_write(path, write)


def _write_telemetry_csv(path: Path, run: TrainRun):
    branches = len(run.error_history[0]) if run.error_history else 0

    def write(fh):
        w = csv.writer(fh, lineterminator="\r\n")
        w.writerow(
            ["iteration"]
            + [f"mean_abs_err_branch_{b + 1}" for b in range(branches)]
            + ["max_coeff_delta"]
        )
        for i, (errs, delta) in enumerate(zip(run.error_history, run.delta_history), 1):
            w.writerow([i] + [repr(float(e)) for e in errs] + [repr(float(delta))])

    _atomic_write(path, write)


def _write_summary_csv(path: Path, summary: dict, S: int):
    def write(fh):
        w = csv.writer(fh, lineterminator="\r\n")
        w.writerow(["algorithm"] + [f"evm_percent_pa_{l + 1}" for l in range(S)] + ["mean"])
        for algo, evms in summary.items():
            w.writerow([algo] + [repr(float(e)) for e in evms] + [repr(float(np.mean(evms)))])

    _atomic_write(path, write)


def build_system(config: ExperimentConfig):
    """Signal, amplifier bank and basis config from a validated experiment config."""
    w = config.waveform
    signal = wf.generate_multitone(
        w.num_samples, w.num_tones, w.bandwidth_hz, w.sample_rate_hz, w.seed
    )
    if config.pa.params_file:
        params = load_params(config.pa.params_file)
    else:
        params = sample_pa_params(config.pa.count, config.pa.param_seed)
    weights = None
    if config.pa.weight_phases:
        weights = np.exp(1j * np.asarray(config.pa.weight_phases))
    bank = make_bank(params, weights=weights)
    # drive the bank so even the earliest-saturating amplifier keeps the
    # requested headroom
    reference = max(params, key=lambda p: p.beta_a)
    signal = wf.set_drive_level(signal, w.backoff_db, reference)

    gmp = config.gmp_config()
    if not config.gmp.dominance:
        hyper = _hyper(config)
        pilot = TrainRun(
            algorithm="full",
            hyper=hyper,
            block_len=config.trainer.block_len,
            max_iters=PILOT_ITERS,
            convergence_tol=config.trainer.convergence_tol,
        )
        result = train_full(signal, bank, gmp, hyper, pilot)
        gmp = gmp.with_dominance(estimate_dominance(result.coeffs.matrix(), gmp))
    return signal, bank, gmp


def _hyper(config: ExperimentConfig) -> RpemHyper:
    t = config.trainer
    return RpemHyper(rho=t.rho, lambda0=t.lambda0, mu=t.mu)


def run_experiment(
    config: ExperimentConfig,
    out_dir=None,
    seed: int = None,
    algorithms=None,
) -> ExperimentResult:
    """Train the selected algorithms and write all result artifacts.

    `seed` overrides the waveform seed; `algorithms` restricts the run.
    Divergence of one algorithm is recorded (partial artifacts stay on disk)
    and reported in the result instead of aborting the others.
    """
    if seed is not None:
        config = replace(config, waveform=replace(config.waveform, seed=seed))
    algorithms = tuple(algorithms or config.trainer.algorithms)
    out = Path(out_dir or config.output.directory)
    out.mkdir(parents=True, exist_ok=True)

    signal, bank, gmp = build_system(config)
    scheme = None
    if any(a.startswith("grouped") for a in algorithms):
        scheme = config.grouping_scheme()
    hyper = _hyper(config)
    mcfg = config.metrics
    skip = gmp.memory

    freqs, p_in = met.psd(signal, mcfg.psd_segment, mcfg.psd_overlap)
    _write_psd_csv(out / "psd_input.csv", freqs, p_in)

    X0 = np.tile(signal.samples[:, None], (1, bank.size))
    Yp0 = bank_feedback(apply_bank(X0, bank), bank)
    nodpd = signal.with_samples(Yp0[:, 0])
    freqs, p0 = met.psd(nodpd, mcfg.psd_segment, mcfg.psd_overlap)
    _write_psd_csv(out / "psd_nodpd.csv", freqs, p0)
    met.report(
        Yp0, signal, skip, mcfg.psd_segment, mcfg.psd_overlap, mcfg.acpr_offset_hz
    ).to_json(out / "metrics_nodpd.json")

    if config.output.dump_signals:
        wf.dump_signal(signal, out / "signal_input.bin")

    summary = {}
    diverged = []
    for algo in algorithms:
        run = TrainRun(
            algorithm=algo,
            hyper=hyper,
            scheme=scheme if algo.startswith("grouped") else None,
            block_len=config.trainer.block_len,
            max_iters=config.trainer.max_iters,
            convergence_tol=config.trainer.convergence_tol,
            window=config.trainer.window,
            update_period=config.trainer.update_period,
            feedback_noise_db=config.pa.feedback_noise_db,
        )
        try:
            result = train(signal, bank, gmp, hyper, run)
        except DivergenceError:
            diverged.append(algo)
            _write_telemetry_csv(out / f"telemetry_{algo}.csv", run)
            continue
        _write_telemetry_csv(out / f"telemetry_{algo}.csv", run)
        dump_coeffs(result.coeffs, out / f"coeffs_{algo}.json")

        _, Yp = predistorted_pass(signal, bank, gmp, result.coeffs)
        report = met.report(
            Yp, signal, skip, mcfg.psd_segment, mcfg.psd_overlap, mcfg.acpr_offset_hz
        )
        report.to_json(out / f"metrics_{algo}.json")
        linearized = signal.with_samples(Yp[:, 0])
        freqs, p_out = met.psd(linearized, mcfg.psd_segment, mcfg.psd_overlap)
        _write_psd_csv(out / f"psd_{algo}.csv", freqs, p_out)
        summary[algo] = list(report.evm_percent)

        if config.output.dump_signals:
            for l in range(bank.size):
                wf.dump_signal(
                    signal.with_samples(Yp[:, l]), out / f"signal_{algo}_pa{l + 1}.bin"
                )

    _write_summary_csv(out / "summary.csv", summary, bank.size)
    return ExperimentResult(out_dir=out, summary=summary, diverged=diverged)


def complexity_table(config: ExperimentConfig) -> str:
    """Text table of structural costs: full vs grouped plus reduction ratios."""
    from dpdlab.structures import complexity, ff_complexity

    scheme = config.grouping_scheme()
    gmp = config.gmp_config()
    lc = complexity(scheme)
    ff = ff_complexity(config.pa.count, gmp.num_terms)
    lines = [
        f"{'':12s}{'multipliers':>12s}{'adders':>8s}{'rf_chains':>10s}",
        f"{'full':12s}{ff.multipliers:>12d}{ff.adders:>8d}{ff.rf_chains:>10d}",
        f"{'grouped':12s}{lc.multipliers:>12d}{lc.adders:>8d}{lc.rf_chains:>10d}",
        (
            f"{'reduction':12s}{ff.multipliers / lc.multipliers:>12.2f}"
            f"{ff.adders / lc.adders:>8.2f}{ff.rf_chains / lc.rf_chains:>10.2f}"
        ),
    ]
    return "\n".join(lines)
