"""Experiment recipes and report emission.

The experiment families mirror the reference protocol: E1.1 is the base
cell-population run, E1.2 sweeps the antigen multiplier, E1.3 sweeps the
moving-window size, and E2 sweeps the detector-space dimensionality of the
negative-selection baseline under 10-fold cross-validation. Every sweep
point is averaged over the configured seed list, and the E1 sweeps carry a
two-sided Mann-Whitney comparison of per-seed TP rates against the base run.
"""
from __future__ import annotations

import dataclasses
import logging
import math
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .dataset import (
    ConnectionRecord,
    binarize_label,
    kfold_split,
    read_kdd_file,
)
from .dca import (
    DcaConfig,
    classify_types,
    run_dca_with_log,
    write_mcav_table,
)
from .errors import ConfigurationError, ReportError
from .evaluation import (
    ConfusionRates,
    MannWhitneyResult,
    RunResult,
    average_runs,
    confusion_from_types,
    mann_whitney_two_sided,
    perfect_mcav,
    type_instance_counts,
)
from .nsa import NsaParams, run_nsa
from .signals import (
    DEFAULT_SIGNAL_ATTRIBUTES,
    SignalConfig,
    antigen_stream,
    attribute_gains,
    default_signal_config,
    load_signal_config,
    signal_stream,
)

logger = logging.getLogger(__name__)

# Reference classification rates of the decision-tree benchmark, echoed in
# report footers for comparison; never computed here.
C45_REFERENCE_TP_RATE = 0.988
C45_REFERENCE_FP_RATE = 0.008

DEFAULT_SEEDS = tuple(range(1, 11))
DEFAULT_MULTIPLIERS = (5, 10, 50, 100)
DEFAULT_WINDOWS = (2, 3, 5, 7, 10, 100, 1000)
DEFAULT_DIMENSIONS = tuple(range(2, 11))

EXPERIMENT_IDS = ("E1.1", "E1.2", "E1.3", "E2", "custom")


@dataclass
class ExperimentConfig:
    experiment: str
    data_path: Path
    output_dir: Path
    seeds: tuple[int, ...] = DEFAULT_SEEDS
    dca: DcaConfig = field(default_factory=DcaConfig)
    nsa: NsaParams = field(default_factory=NsaParams)
    multipliers: tuple[int, ...] = DEFAULT_MULTIPLIERS
    windows: tuple[int, ...] = DEFAULT_WINDOWS
    dimensions: tuple[int, ...] = DEFAULT_DIMENSIONS
    folds: int = 10
    fold_seed: int = 1
    range_config_path: Path | None = None
    alpha: float = 0.05
    write_mcav_tables: bool = True

    def __post_init__(self):
        if self.experiment not in EXPERIMENT_IDS:
            raise ConfigurationError(
                f"unknown experiment {self.experiment!r}; "
                f"expected one of {EXPERIMENT_IDS}"
            )
        if not self.seeds:
            raise ConfigurationError("seed list must be non-empty")
        if any(k < 1 for k in self.multipliers):
            raise ConfigurationError("multipliers must be >= 1")
        if any(w < 1 for w in self.windows):
            raise ConfigurationError("window sizes must be >= 1")
        if any(d < 1 for d in self.dimensions):
            raise ConfigurationError("dimensions must be >= 1")


@dataclass(frozen=True)
class SweepPoint:
    """One averaged result row plus its per-seed breakdown."""

    category: str
    parameter: str
    mean: ConfusionRates
    per_seed: tuple[RunResult, ...]
    mann_whitney: MannWhitneyResult | None = None


def _signal_config(config: ExperimentConfig,
                   records: Sequence[ConnectionRecord]) -> SignalConfig:
    if config.range_config_path is not None:
        return load_signal_config(config.range_config_path)
    return default_signal_config(records)


def _dca_sweep_point(
    category: str,
    parameter: str,
    dca: DcaConfig,
    antigens: list[str],
    signals: np.ndarray,
    truth: dict[str, str],
    weights: dict[str, int],
    config: ExperimentConfig,
    mcav_dir: Path | None,
) -> SweepPoint:
    per_seed = []
    for seed in config.seeds:
        mcav, log = run_dca_with_log(antigens, signals, dca, seed)
        predicted = classify_types(mcav, dca.mcav_threshold)
        truth_presented = {antigen: truth[antigen] for antigen in predicted}
        rates = confusion_from_types(predicted, truth_presented, weights)
        per_seed.append(RunResult(f"{category}:{parameter}", seed, rates))
        if mcav_dir is not None:
            safe_param = parameter.replace("=", "_")
            write_mcav_table(
                mcav, log, dca.mcav_threshold,
                mcav_dir / f"mcav_{category}_{safe_param}_seed{seed}.tsv",
            )
        logger.info("%s %s seed=%d tp=%.4f fp=%s", category, parameter, seed,
                    rates.tp_rate, _fmt(rates.fp_rate))
    return SweepPoint(category, parameter, average_runs(per_seed),
                      tuple(per_seed))


def _with_mann_whitney(point: SweepPoint, base: SweepPoint,
                       alpha: float) -> SweepPoint:
    test = mann_whitney_two_sided(
        [r.rates.tp_rate for r in point.per_seed],
        [r.rates.tp_rate for r in base.per_seed],
        alpha,
    )
    return dataclasses.replace(point, mann_whitney=test)


def run_experiment(config: ExperimentConfig) -> list[SweepPoint]:
    """Execute one experiment family and write its reports."""
    records = read_kdd_file(config.data_path)
    if not records:
        raise ConfigurationError(f"{config.data_path}: no records")
    out_dir = Path(config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    mcav_dir = out_dir / "mcav" if config.write_mcav_tables else None
    if mcav_dir is not None:
        mcav_dir.mkdir(exist_ok=True)

    if config.experiment == "E2":
        points = _run_e2(config, records)
    else:
        points = _run_e1(config, records, mcav_dir)

    emit_report(points, config, out_dir)
    return points


def _run_e1(config: ExperimentConfig, records: Sequence[ConnectionRecord],
            mcav_dir: Path | None) -> list[SweepPoint]:
    ranges = _signal_config(config, records)
    antigens = antigen_stream(records)
    signals = signal_stream(records, ranges)
    labels = [binarize_label(r.label) for r in records]
    truth = classify_types(perfect_mcav(antigens, labels),
                           config.dca.mcav_threshold)
    weights = type_instance_counts(antigens)

    base_dca = dataclasses.replace(config.dca, multiplier=1, window=1)
    base = _dca_sweep_point("E1.1", "-", base_dca, antigens, signals,
                            truth, weights, config, mcav_dir)
    points = [base]

    if config.experiment == "E1.1":
        return points
    if config.experiment == "E1.2":
        for k in config.multipliers:
            dca = dataclasses.replace(config.dca, multiplier=k, window=1)
            point = _dca_sweep_point("E1.2", str(k), dca, antigens, signals,
                                     truth, weights, config, mcav_dir)
            points.append(_with_mann_whitney(point, base, config.alpha))
    elif config.experiment == "E1.3":
        for w in config.windows:
            dca = dataclasses.replace(config.dca, multiplier=1, window=w)
            point = _dca_sweep_point("E1.3", str(w), dca, antigens, signals,
                                     truth, weights, config, mcav_dir)
            points.append(_with_mann_whitney(point, base, config.alpha))
    else:  # custom: run the configuration exactly as given
        point = _dca_sweep_point(
            "custom",
            f"k={config.dca.multiplier},w={config.dca.window}",
            config.dca, antigens, signals, truth, weights, config, mcav_dir,
        )
        points = [base, _with_mann_whitney(point, base, config.alpha)]
    return points


def _run_e2(config: ExperimentConfig,
            records: Sequence[ConnectionRecord]) -> list[SweepPoint]:
    ranges = _signal_config(config, records)
    attributes = ranges.attribute_names or DEFAULT_SIGNAL_ATTRIBUTES
    folds = kfold_split(len(records), config.folds, config.fold_seed)
    points = []
    for d in config.dimensions:
        if d > len(attributes):
            raise ConfigurationError(
                f"dimension {d} exceeds the {len(attributes)} configured "
                f"attributes"
            )
        subset = attributes[:d]
        per_seed = []
        for seed in config.seeds:
            _, mean = run_nsa(records, subset, folds, config.nsa, seed)
            per_seed.append(RunResult(f"E2:{d}", seed, mean))
            logger.info("E2 d=%d seed=%d tp=%s fp=%s", d, seed,
                        _fmt(mean.tp_rate), _fmt(mean.fp_rate))
        points.append(SweepPoint("E2", str(d), average_runs(per_seed),
                                 tuple(per_seed)))
    return points


# ---------------------------------------------------------------------------
# Report emission
# ---------------------------------------------------------------------------

def _fmt(value: float) -> str:
    return "NA" if math.isnan(value) else f"{value:.6f}"


def _atomic_write(path: Path, body: str) -> None:
    tmp = path.with_suffix(path.suffix + ".tmp")
    try:
        tmp.write_text(body)
        os.replace(tmp, path)
    except OSError as exc:
        raise ReportError(f"cannot write {path}: {exc}") from exc


def emit_report(points: Sequence[SweepPoint], config: ExperimentConfig,
                out_dir: Path) -> None:
    """Write the results table, per-seed breakdown, ROC points, Mann-Whitney
    appendix and provenance block. Content is deterministic per config."""
    if not points:
        raise ReportError("no results to report")
    out_dir = Path(out_dir)

    lines = ["category\tparameter\ttp_rate\ttn_rate\tfp_rate\tfn_rate"]
    for p in points:
        r = p.mean
        lines.append(
            f"{p.category}\t{p.parameter}\t{_fmt(r.tp_rate)}\t"
            f"{_fmt(r.tn_rate)}\t{_fmt(r.fp_rate)}\t{_fmt(r.fn_rate)}"
        )
    _atomic_write(out_dir / "results.tsv", "\n".join(lines) + "\n")

    lines = ["category\tparameter\tseed\ttp_rate\ttn_rate\tfp_rate\tfn_rate"]
    for p in points:
        for run in p.per_seed:
            r = run.rates
            lines.append(
                f"{p.category}\t{p.parameter}\t{run.seed}\t"
                f"{_fmt(r.tp_rate)}\t{_fmt(r.tn_rate)}\t"
                f"{_fmt(r.fp_rate)}\t{_fmt(r.fn_rate)}"
            )
    _atomic_write(out_dir / "per_seed.tsv", "\n".join(lines) + "\n")

    lines = ["fp_rate\ttp_rate\tlabel"]
    for p in points:
        label = f"{p.category}" if p.parameter == "-" else \
            f"{p.category}({p.parameter})"
        lines.append(f"{_fmt(p.mean.fp_rate)}\t{_fmt(p.mean.tp_rate)}\t{label}")
    _atomic_write(out_dir / "roc_points.tsv", "\n".join(lines) + "\n")

    tested = [p for p in points if p.mann_whitney is not None]
    if tested:
        lines = ["category\tparameter\tu_statistic\tp_value\treject"]
        for p in tested:
            t = p.mann_whitney
            lines.append(
                f"{p.category}\t{p.parameter}\t{t.u_statistic:.1f}\t"
                f"{t.p_value:.6f}\t{str(t.reject).lower()}"
            )
        _atomic_write(out_dir / "mannwhitney.tsv", "\n".join(lines) + "\n")

    provenance = [
        f"dca-ids {__version__}",
        f"experiment: {config.experiment}",
        f"data: {config.data_path}",
        f"seeds: {','.join(str(s) for s in config.seeds)}",
        f"population_size: {config.dca.population_size}",
        f"threshold_range: [{config.dca.threshold_low}, "
        f"{config.dca.threshold_high}]",
        f"cells_per_step: {config.dca.cells_per_step}",
        f"mcav_threshold: {config.dca.mcav_threshold}",
        f"multiplier: {config.dca.multiplier}",
        f"window: {config.dca.window}",
        f"nsa_self_radius: {config.nsa.self_radius}",
        f"nsa_detector_radius: {config.nsa.detector_radius}",
        f"nsa_detector_count: {config.nsa.detector_count}",
        f"folds: {config.folds} (seed {config.fold_seed})",
        f"range_config: {config.range_config_path or 'built-in defaults'}",
        f"alpha: {config.alpha}",
        "",
        "reference decision-tree benchmark (not computed): "
        f"tp_rate={C45_REFERENCE_TP_RATE} fp_rate={C45_REFERENCE_FP_RATE}",
    ]
    _atomic_write(out_dir / "provenance.txt", "\n".join(provenance) + "\n")


def emit_infogain(records: Sequence[ConnectionRecord], destination: Path) -> None:
    """Write attribute/gain pairs, best first, flagging the default signal
    attributes."""
    gains = attribute_gains(records)
    lines = ["attribute\tgain\tdefault_signal_attribute"]
    for name, gain in gains:
        flagged = "yes" if name in DEFAULT_SIGNAL_ATTRIBUTES else "no"
        lines.append(f"{name}\t{gain:.6f}\t{flagged}")
    _atomic_write(Path(destination), "\n".join(lines) + "\n")
