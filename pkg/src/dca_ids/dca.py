"""The dendritic-cell population: signal transform, cell lifecycle, tissue
stepping and MCAV scoring.

A run streams (antigen, signal-triple) pairs through a fixed-size cell
population. Each step a random subset of cells samples the current signal and
receives the step's antigen copies; cells whose cumulative costimulation
crosses their migration threshold present their stored antigens with a
mature/semi-mature context and are replaced by naive cells. After the stream,
surviving cells are flushed so no sampled antigen is lost. The per-type
fraction of mature presentations is the MCAV score.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .dataset import ANOMALOUS, NORMAL
from .errors import ConfigurationError
from .signals import apply_time_window

# Weights from input category (rows: PAMP, DS, SS) to output signal
# (columns: Csm, Semi, Mat).
DEFAULT_WEIGHTS = np.array(
    [
        [2.0, 0.0, 2.0],
        [1.0, 0.0, 1.0],
        [3.0, 3.0, -3.0],
    ]
)


def transform_signals(
    triple: Sequence[float], weights: np.ndarray = DEFAULT_WEIGHTS
) -> tuple[float, float, float]:
    """Weighted sum of the input triple into (csm, semi, mat)."""
    out = np.asarray(triple, dtype=float) @ np.asarray(weights, dtype=float)
    return float(out[0]), float(out[1]), float(out[2])


@dataclass
class DendriticCell:
    """One cell: cumulative output accumulators, sampled antigens and the
    migration threshold ending its sampling life."""

    migration_threshold: float
    csm: float = 0.0
    semi: float = 0.0
    mat: float = 0.0
    antigens: list[str] = field(default_factory=list)

    def sample(
        self,
        antigens: Sequence[str],
        triple: Sequence[float],
        weights: np.ndarray = DEFAULT_WEIGHTS,
    ) -> None:
        """Store antigen copies and accumulate one transformed signal step."""
        self.antigens.extend(antigens)
        csm, semi, mat = transform_signals(triple, weights)
        self.accumulate(csm, semi, mat)

    def accumulate(self, csm: float, semi: float, mat: float) -> None:
        self.csm += csm
        self.semi += semi
        self.mat += mat

    def should_migrate(self) -> bool:
        """True once cumulative csm strictly exceeds the threshold."""
        return self.csm > self.migration_threshold

    def context(self) -> int:
        """1 (mature) when semi <= mat, else 0 (semi-mature)."""
        return 1 if self.semi <= self.mat else 0


class PresentationLog:
    """Per-antigen-type tallies of presentations and mature presentations."""

    def __init__(self):
        self._counts: dict[str, list[int]] = {}

    def log(self, antigens: Sequence[str], context: int) -> None:
        for antigen in antigens:
            entry = self._counts.setdefault(antigen, [0, 0])
            entry[0] += context
            entry[1] += 1

    def mature_count(self, antigen: str) -> int:
        return self._counts.get(antigen, [0, 0])[0]

    def total_count(self, antigen: str) -> int:
        return self._counts.get(antigen, [0, 0])[1]

    @property
    def total_presentations(self) -> int:
        return sum(entry[1] for entry in self._counts.values())

    def types(self) -> list[str]:
        return list(self._counts)


def compute_mcav(log: PresentationLog) -> dict[str, float]:
    """mature / total per presented type; never-presented types are absent."""
    return {
        antigen: log.mature_count(antigen) / log.total_count(antigen)
        for antigen in log.types()
    }


def classify_types(
    mcav: dict[str, float], threshold: float
) -> dict[str, str]:
    """Anomalous iff the MCAV strictly exceeds the threshold."""
    if not 0.0 <= threshold <= 1.0:
        raise ConfigurationError(
            f"MCAV threshold must lie in [0,1], got {threshold}"
        )
    return {
        antigen: (ANOMALOUS if value > threshold else NORMAL)
        for antigen, value in mcav.items()
    }


@dataclass
class TissueState:
    """Per-step staging area: antigen copies awaiting sampling plus the
    current signal triple. The store is drained every step."""

    antigen_store: list[str] = field(default_factory=list)
    current_signal: tuple[float, float, float] = (0.0, 0.0, 0.0)


@dataclass
class DcaConfig:
    """Run parameters; defaults follow the reference experiment setup."""

    population_size: int = 100
    threshold_low: float = 100.0
    threshold_high: float = 300.0
    cells_per_step: int = 10
    multiplier: int = 1
    window: int = 1
    mcav_threshold: float = 0.8
    weights: np.ndarray = field(default_factory=lambda: DEFAULT_WEIGHTS.copy())

    def __post_init__(self):
        if self.population_size < 1:
            raise ConfigurationError("population_size must be >= 1")
        if not 0 < self.cells_per_step <= self.population_size:
            raise ConfigurationError(
                "cells_per_step must be in [1, population_size]"
            )
        if self.threshold_low > self.threshold_high:
            raise ConfigurationError("threshold range is inverted")
        if self.multiplier < 1:
            raise ConfigurationError("multiplier must be >= 1")
        if self.window < 1:
            raise ConfigurationError("window must be >= 1")
        if not 0.0 <= self.mcav_threshold <= 1.0:
            raise ConfigurationError("mcav_threshold must lie in [0,1]")


def _new_threshold(rng: np.random.Generator, config: DcaConfig) -> float:
    return float(rng.uniform(config.threshold_low, config.threshold_high))


def init_population(rng: np.random.Generator, config: DcaConfig) -> list[DendriticCell]:
    return [
        DendriticCell(_new_threshold(rng, config))
        for _ in range(config.population_size)
    ]


def tissue_step(
    state: TissueState,
    population: list[DendriticCell],
    antigen_copies: Sequence[str],
    triple: Sequence[float],
    rng: np.random.Generator,
    log: PresentationLog,
    config: DcaConfig,
) -> None:
    """Process one stream position.

    Random draw order is fixed: antigen placement permutation, cell
    selection, then replacement thresholds for migrated cells in selection
    order.
    """
    state.current_signal = tuple(float(v) for v in triple)
    placement = rng.permutation(len(antigen_copies))
    state.antigen_store = [antigen_copies[i] for i in placement]

    selected = rng.choice(
        config.population_size, size=config.cells_per_step, replace=False
    )
    csm, semi, mat = transform_signals(triple, config.weights)

    # Deal the stored copies round-robin across the selected cells, then let
    # every selected cell sample the current signal.
    for position, antigen in enumerate(state.antigen_store):
        cell = population[selected[position % len(selected)]]
        cell.antigens.append(antigen)
    state.antigen_store = []

    for index in selected:
        population[index].accumulate(csm, semi, mat)

    for index in selected:
        cell = population[index]
        if cell.should_migrate():
            log.log(cell.antigens, cell.context())
            population[index] = DendriticCell(_new_threshold(rng, config))


def flush_population(
    population: list[DendriticCell], log: PresentationLog
) -> None:
    """Present every surviving cell's stored antigens at end of stream."""
    for cell in population:
        if cell.antigens:
            log.log(cell.antigens, cell.context())
            cell.antigens = []


def run_dca(
    antigens: Sequence[str],
    signals: np.ndarray,
    config: DcaConfig,
    seed: int,
) -> dict[str, float]:
    """Full pass over an antigen stream and its raw signal stream.

    Applies the moving time window, then feeds each record's multiplied
    antigen copies and windowed signal through one tissue step. Returns the
    per-type MCAV table. Deterministic per seed.
    """
    mcav, _ = run_dca_with_log(antigens, signals, config, seed)
    return mcav


def run_dca_with_log(
    antigens: Sequence[str],
    signals: np.ndarray,
    config: DcaConfig,
    seed: int,
) -> tuple[dict[str, float], PresentationLog]:
    """Like run_dca but also returns the presentation log (for audits)."""
    if len(antigens) != len(signals):
        raise ConfigurationError(
            "antigen stream and signal stream must be index-aligned"
        )
    windowed = apply_time_window(np.asarray(signals, dtype=float), config.window)
    rng = np.random.default_rng(seed)
    population = init_population(rng, config)
    state = TissueState()
    log = PresentationLog()
    for antigen, triple in zip(antigens, windowed):
        copies = [antigen] * config.multiplier
        tissue_step(state, population, copies, triple, rng, log, config)
    flush_population(population, log)
    return compute_mcav(log), log


def write_mcav_table(
    mcav: dict[str, float],
    log: PresentationLog,
    threshold: float,
    path: str | Path,
) -> None:
    """Delimited export: antigen-type, total, mature, mcav, classification."""
    labels = classify_types(mcav, threshold)
    with open(path, "w") as handle:
        handle.write("antigen_type\ttotal_count\tmature_count\tmcav\tclass\n")
        for antigen in sorted(mcav):
            handle.write(
                f"{antigen}\t{log.total_count(antigen)}\t"
                f"{log.mature_count(antigen)}\t{mcav[antigen]:.6f}\t"
                f"{labels[antigen]}\n"
            )
