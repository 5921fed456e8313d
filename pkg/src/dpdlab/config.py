"""Experiment configuration: INI file with comments, one section per concern."""

from __future__ import annotations

import configparser
import io
from dataclasses import dataclass, field, fields
from fractions import Fraction
from pathlib import Path

from dpdlab.errors import InvalidConfigError, InvalidSchemeError
from dpdlab.gmp import ORDER_MAJOR, GmpConfig
from dpdlab.structures import GroupingScheme, build_scheme
from dpdlab.training import ALGORITHMS


@dataclass(frozen=True)
class WaveformSection:
    num_samples: int = 262144
    num_tones: int = 64
    bandwidth_hz: float = 4e6
    sample_rate_hz: float = 256e6
    backoff_db: float = 7.0
    seed: int = 1


@dataclass(frozen=True)
class PaSection:
    count: int = 8
    param_seed: int = 1001
    params_file: str = ""          # optional explicit Saleh parameters (JSON)
    weight_phases: tuple = ()      # radians; empty = all-ones weights
    feedback_noise_db: float = None  # relative noise floor; None = noiseless


@dataclass(frozen=True)
class GmpSection:
    order: int = 5
    memory: int = 5
    active_indices: tuple = (4, 5, 9, 10, 14, 15, 19, 20, 24, 25)
    dominance: tuple = (4, 5, 14, 15, 19, 20, 24, 25, 9, 10)  # or () for auto
    index_layout: str = ORDER_MAJOR


@dataclass(frozen=True)
class SchemeSection:
    nu: int = 1
    ratio: Fraction = Fraction(1, 2)
    group_sizes: tuple = (4, 6)


@dataclass(frozen=True)
class TrainerSection:
    algorithms: tuple = ("full", "single", "grouped-avg", "grouped-block", "grouped-sweep")
    rho: float = 0.95
    lambda0: float = 0.99
    mu: float = 0.2
    update_period: int = 1
    block_len: int = 4096
    max_iters: int = 64
    convergence_tol: float = 1e-6
    window: int = 5


@dataclass(frozen=True)
class MetricsSection:
    psd_segment: int = 1024
    psd_overlap: float = 0.5
    acpr_offset_hz: float = 6e6


@dataclass(frozen=True)
class OutputSection:
    directory: str = "out"
    dump_signals: bool = False


@dataclass(frozen=True)
class ExperimentConfig:
    waveform: WaveformSection = field(default_factory=WaveformSection)
    pa: PaSection = field(default_factory=PaSection)
    gmp: GmpSection = field(default_factory=GmpSection)
    scheme: SchemeSection = field(default_factory=SchemeSection)
    trainer: TrainerSection = field(default_factory=TrainerSection)
    metrics: MetricsSection = field(default_factory=MetricsSection)
    output: OutputSection = field(default_factory=OutputSection)

    def gmp_config(self) -> GmpConfig:
        dom = self.gmp.dominance or None
        return GmpConfig(
            order=self.gmp.order,
            memory=self.gmp.memory,
            active_indices=self.gmp.active_indices,
            dominance=dom,
            index_layout=self.gmp.index_layout,
        )

    def grouping_scheme(self) -> GroupingScheme:
        return build_scheme(
            S=self.pa.count,
            nu=self.scheme.nu,
            r=self.scheme.ratio,
            n_list=self.scheme.group_sizes,
        )


_SECTIONS = {
    "waveform": WaveformSection,
    "pa": PaSection,
    "gmp": GmpSection,
    "scheme": SchemeSection,
    "trainer": TrainerSection,
    "metrics": MetricsSection,
    "output": OutputSection,
}


def _parse_value(name: str, typ, raw: str):
    raw = raw.strip()
    if typ is int:
        return int(raw)
    if typ is float or name == "feedback_noise_db":
        return None if raw == "" else float(raw)
    if typ is bool:
        if raw.lower() in ("true", "yes", "1", "on"):
            return True
        if raw.lower() in ("false", "no", "0", "off"):
            return False
        raise ValueError(f"not a boolean: {raw!r}")
    if typ is str:
        return raw
    if typ is Fraction:
        return Fraction(raw)
    if typ is tuple:
        if raw in ("", "auto"):
            return ()
        items = [v.strip() for v in raw.split(",") if v.strip()]
        if name in ("algorithms",):
            return tuple(items)
        if name in ("weight_phases",):
            return tuple(float(v) for v in items)
        return tuple(int(v) for v in items)
    raise ValueError(f"unsupported field type for {name}")


def _format_value(value) -> str:
    if value is None:
        return ""
    if isinstance(value, tuple):
        return ",".join(str(v) for v in value)
    if isinstance(value, bool):
        return "true" if value else "false"
    return str(value)


def load_config(path) -> ExperimentConfig:
    """Parse and fully validate; raises InvalidConfigError on the first issue."""
    report, config = _read(path)
    if report:
        raise InvalidConfigError("; ".join(report))
    return config


def validate_config(path) -> list:
    """Every violated invariant as 'section.field: problem', without running."""
    report, _ = _read(path)
    return report


def _read(path):
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        text = Path(path).read_text()
    except OSError as exc:
        return [f"file: {exc}"], None
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        return [f"file: not a valid config: {exc.message.splitlines()[0]}"], None

    report = []
    sections = {}
    for name, cls in _SECTIONS.items():
        defaults = cls()
        if not parser.has_section(name):
            report.append(f"{name}: section missing (using defaults)")
            sections[name] = defaults
            continue
        kwargs = {}
        known = {f.name: f.type for f in fields(cls)}
        for key in parser[name]:
            if key not in known:
                report.append(f"{name}.{key}: unknown field")
                continue
            typ = type(getattr(defaults, key)) if getattr(defaults, key) is not None else float
            if isinstance(getattr(defaults, key), tuple):
                typ = tuple
            if isinstance(getattr(defaults, key), Fraction):
                typ = Fraction
            try:
                kwargs[key] = _parse_value(key, typ, parser[name][key])
            except (ValueError, ZeroDivisionError) as exc:
                report.append(f"{name}.{key}: {exc}")
        try:
            sections[name] = cls(**kwargs)
        except TypeError as exc:
            report.append(f"{name}: {exc}")
            sections[name] = defaults

    config = ExperimentConfig(**sections)
    report.extend(_check_cross_field(config))
    return report, config


def _check_cross_field(config: ExperimentConfig) -> list:
    report = []
    w = config.waveform
    if w.num_samples < 1 or w.num_tones < 1:
        report.append("waveform.num_samples/num_tones: must be positive")
    if w.sample_rate_hz < 4.0 * w.bandwidth_hz:
        report.append("waveform.sample_rate_hz: below 4x the occupied bandwidth")
    if w.backoff_db < 0:
        report.append("waveform.backoff_db: must be >= 0")
    if config.pa.count < 1:
        report.append("pa.count: must be >= 1")
    if config.pa.weight_phases and len(config.pa.weight_phases) != config.pa.count:
        report.append("pa.weight_phases: need one phase per amplifier")
    try:
        gmp = config.gmp_config()
        if config.gmp.dominance == () and not config.gmp.active_indices:
            report.append("gmp.active_indices: empty")
    except InvalidConfigError as exc:
        report.append(f"gmp: {exc}")
        gmp = None
    needs_scheme = any(a.startswith("grouped") for a in config.trainer.algorithms)
    if needs_scheme:
        try:
            scheme = config.grouping_scheme()
            if gmp is not None and scheme.num_terms != gmp.num_terms:
                report.append(
                    "scheme.group_sizes: sum must equal the active basis-term count"
                )
        except InvalidSchemeError as exc:
            report.append(f"scheme: {exc}")
    for algo in config.trainer.algorithms:
        if algo not in ALGORITHMS:
            report.append(f"trainer.algorithms: unknown algorithm {algo!r}")
    t = config.trainer
    if not (0 < t.rho < 1 and 0 < t.lambda0 <= 1 and t.mu > 0):
        report.append("trainer: rho in (0,1), lambda0 in (0,1], mu > 0 required")
    if t.block_len < 1 or t.max_iters < 1 or t.update_period < 1:
        report.append("trainer: block_len, max_iters, update_period must be positive")
    m = config.metrics
    if m.psd_segment & (m.psd_segment - 1) or m.psd_segment < 2:
        report.append("metrics.psd_segment: must be a power of two")
    if not 0 <= m.psd_overlap < 1:
        report.append("metrics.psd_overlap: must lie in [0, 1)")
    if m.acpr_offset_hz + w.bandwidth_hz / 2 > w.sample_rate_hz / 2:
        report.append("metrics.acpr_offset_hz: adjacent band exceeds Nyquist")
    return report


def dump_config(config: ExperimentConfig) -> str:
    """Canonical INI rendering; load(dump(c)) == c."""
    parser = configparser.ConfigParser()
    for name, cls in _SECTIONS.items():
        section = getattr(config, name)
        parser[name] = {
            f.name: _format_value(getattr(section, f.name)) for f in fields(cls)
        }
    out = io.StringIO()
    parser.write(out)
    return out.getvalue()


def save_config(config: ExperimentConfig, path):
    Path(path).write_text(dump_config(config))
