"""Real-valued negative selection with constant-sized detectors.

Detectors are random points in the unit hypercube censored against the
normal (self) set: a candidate survives only if its ball cannot intersect
any self ball. Test points matching any surviving detector are classified
anomalous.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.spatial import cKDTree

from .dataset import (
    ANOMALOUS,
    NORMAL,
    ConnectionRecord,
    attribute_matrix,
    binarize_label,
    minmax_fit,
    minmax_apply,
)
from .errors import ConfigurationError

logger = logging.getLogger(__name__)

DEFAULT_SELF_RADIUS = 0.1
DEFAULT_DETECTOR_RADIUS = 0.1
DEFAULT_DETECTOR_COUNT = 1000


@dataclass(frozen=True)
class Detector:
    center: np.ndarray
    radius: float


def euclidean_match(a: Sequence[float], b: Sequence[float], r: float) -> bool:
    """True iff the Euclidean distance between a and b is strictly below r."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return float(np.linalg.norm(a - b)) < r


def generate_detectors(
    self_points: np.ndarray,
    count: int,
    dimension: int,
    seed: int,
    max_attempts: int | None = None,
    self_radius: float = DEFAULT_SELF_RADIUS,
    detector_radius: float = DEFAULT_DETECTOR_RADIUS,
) -> np.ndarray:
    """Draw detector centers uniformly in [0,1]^d, censored against self.

    A candidate is rejected when its distance to any self point falls below
    self_radius + detector_radius. Stops at ``count`` detectors or when the
    attempt budget (default 100 x count) runs out, returning fewer with a
    warning. Candidates are committed in draw order, so the result is
    deterministic per seed.
    """
    if count < 1:
        raise ConfigurationError(f"detector count must be >= 1, got {count}")
    if dimension < 1:
        raise ConfigurationError(f"dimension must be >= 1, got {dimension}")
    if max_attempts is None:
        max_attempts = 100 * count
    rng = np.random.default_rng(seed)
    self_points = np.asarray(self_points, dtype=float).reshape(-1, dimension)
    tree = cKDTree(self_points) if len(self_points) else None
    censor_radius = self_radius + detector_radius

    accepted: list[np.ndarray] = []
    attempts = 0
    batch = 1024
    while len(accepted) < count and attempts < max_attempts:
        size = min(batch, max_attempts - attempts)
        candidates = rng.random((size, dimension))
        attempts += size
        if tree is None:
            keep = np.ones(size, dtype=bool)
        else:
            distances, _ = tree.query(candidates, k=1)
            keep = distances >= censor_radius
        for candidate in candidates[keep]:
            accepted.append(candidate)
            if len(accepted) == count:
                break
    if len(accepted) < count:
        logger.warning(
            "detector generation exhausted %d attempts with %d/%d detectors "
            "(dimension %d)", max_attempts, len(accepted), count, dimension,
        )
    if not accepted:
        return np.empty((0, dimension))
    return np.array(accepted)


def classify_points(
    points: np.ndarray,
    detectors: np.ndarray,
    detector_radius: float = DEFAULT_DETECTOR_RADIUS,
) -> list[str]:
    """Anomalous iff a point strictly matches at least one detector."""
    points = np.asarray(points, dtype=float)
    if len(detectors) == 0:
        return [NORMAL] * len(points)
    if points.shape[1] != detectors.shape[1]:
        raise ValueError(
            f"dimension mismatch: points {points.shape[1]}d, "
            f"detectors {detectors.shape[1]}d"
        )
    tree = cKDTree(detectors)
    distances, _ = tree.query(points, k=1)
    return [ANOMALOUS if d < detector_radius else NORMAL for d in distances]


def classify_point(
    point: Sequence[float],
    detectors: np.ndarray,
    detector_radius: float = DEFAULT_DETECTOR_RADIUS,
) -> str:
    return classify_points(
        np.asarray(point, dtype=float)[None, :], detectors, detector_radius
    )[0]


@dataclass
class NsaParams:
    self_radius: float = DEFAULT_SELF_RADIUS
    detector_radius: float = DEFAULT_DETECTOR_RADIUS
    detector_count: int = DEFAULT_DETECTOR_COUNT
    max_attempts: int | None = None


def run_nsa_fold(
    train_matrix: np.ndarray,
    train_labels: Sequence[str],
    test_matrix: np.ndarray,
    test_labels: Sequence[str],
    params: NsaParams,
    seed: int,
):
    """One cross-validation fold: fit bounds on training data, censor
    detectors against the normalized normal training instances, classify the
    normalized test instances. Returns (predicted labels, detectors)."""
    lo, hi = minmax_fit(train_matrix)
    train_norm = minmax_apply(train_matrix, lo, hi)
    test_norm = minmax_apply(test_matrix, lo, hi)
    self_points = train_norm[
        np.array([label == NORMAL for label in train_labels])
    ]
    detectors = generate_detectors(
        self_points,
        params.detector_count,
        train_matrix.shape[1],
        seed,
        params.max_attempts,
        params.self_radius,
        params.detector_radius,
    )
    predictions = classify_points(test_norm, detectors, params.detector_radius)
    return predictions, detectors


def run_nsa(
    records: Sequence[ConnectionRecord],
    attributes: Sequence[str],
    folds: np.ndarray,
    params: NsaParams,
    seed: int,
):
    """Full cross-validated run over the given attribute subset.

    Returns (per-fold ConfusionRates list, averaged ConfusionRates). Folds
    without any normal training instance are skipped with a warning.
    """
    from .evaluation import average_rates, confusion_from_instances

    if not 1 <= len(attributes):
        raise ConfigurationError("need at least one attribute")
    matrix = attribute_matrix(records, attributes)
    labels = [binarize_label(r.label) for r in records]
    folds = np.asarray(folds)
    per_fold = []
    for fold in range(int(folds.max()) + 1):
        test_mask = folds == fold
        train_mask = ~test_mask
        train_labels = [l for l, m in zip(labels, train_mask) if m]
        if NORMAL not in train_labels:
            logger.warning("fold %d has no normal training instances; skipped",
                           fold)
            continue
        test_labels = [l for l, m in zip(labels, test_mask) if m]
        predictions, _ = run_nsa_fold(
            matrix[train_mask], train_labels,
            matrix[test_mask], test_labels,
            params, seed,
        )
        per_fold.append(confusion_from_instances(predictions, test_labels))
    if not per_fold:
        raise ConfigurationError("every fold was skipped; no results")
    return per_fold, average_rates(per_fold)


def write_detectors(
    detectors: np.ndarray, radius: float, path: str | Path
) -> None:
    """Export: radius header line, then one center per line."""
    with open(path, "w") as handle:
        handle.write(f"# radius {radius:.10g}\n")
        for center in detectors:
            handle.write("\t".join(f"{v:.10g}" for v in center) + "\n")


def read_detectors(path: str | Path) -> tuple[np.ndarray, float]:
    radius = DEFAULT_DETECTOR_RADIUS
    centers = []
    with open(path) as handle:
        for line in handle:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                parts = line.split()
                if len(parts) >= 3 and parts[1] == "radius":
                    radius = float(parts[2])
                continue
            centers.append([float(v) for v in line.split()])
    return np.array(centers), radius
