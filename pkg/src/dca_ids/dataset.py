"""KDD-99 connection record ingestion, label binarization, folds and normalization.

The file format is one connection per line: 42 comma-separated fields, the
last field being the raw label (optionally terminated by a period, as in the
distributed archive). Plain text and gzip files are both accepted.
"""
from __future__ import annotations

import gzip
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, Literal, Sequence

import numpy as np

from .errors import ConfigurationError, ParseError

# Attribute schema of the KDD Cup 1999 connection records, in file order.
ATTRIBUTE_NAMES: tuple[str, ...] = (
    "duration",
    "protocol_type",
    "service",
    "flag",
    "src_bytes",
    "dst_bytes",
    "land",
    "wrong_fragment",
    "urgent",
    "hot",
    "num_failed_logins",
    "logged_in",
    "num_compromised",
    "root_shell",
    "su_attempted",
    "num_root",
    "num_file_creations",
    "num_shells",
    "num_access_files",
    "num_outbound_cmds",
    "is_host_login",
    "is_guest_login",
    "count",
    "srv_count",
    "serror_rate",
    "srv_serror_rate",
    "rerror_rate",
    "srv_rerror_rate",
    "same_srv_rate",
    "diff_srv_rate",
    "srv_diff_host_rate",
    "dst_host_count",
    "dst_host_srv_count",
    "dst_host_same_srv_rate",
    "dst_host_diff_srv_rate",
    "dst_host_same_src_port_rate",
    "dst_host_srv_diff_host_rate",
    "dst_host_serror_rate",
    "dst_host_srv_serror_rate",
    "dst_host_rerror_rate",
    "dst_host_srv_rerror_rate",
)

# The seven symbolic attributes per the kddcup.names header.
NOMINAL_ATTRIBUTES: frozenset[str] = frozenset(
    {"protocol_type", "service", "flag", "land", "logged_in",
     "is_host_login", "is_guest_login"}
)

CONTINUOUS_ATTRIBUTES: tuple[str, ...] = tuple(
    name for name in ATTRIBUTE_NAMES if name not in NOMINAL_ATTRIBUTES
)

_INDEX: dict[str, int] = {name: i for i, name in enumerate(ATTRIBUTE_NAMES)}

NORMAL = "normal"
ANOMALOUS = "anomalous"
BinaryLabel = Literal["normal", "anomalous"]


@dataclass(frozen=True)
class ConnectionRecord:
    """One parsed connection: 41 attributes (str for nominal, float for
    continuous) in schema order, plus the raw label with any trailing period
    stripped."""

    values: tuple
    label: str

    def attribute(self, name: str):
        return self.values[_INDEX[name]]

    def numeric(self, name: str) -> float:
        """Attribute value as a number; binary nominals ('0'/'1') convert too."""
        value = self.values[_INDEX[name]]
        return float(value)

    @property
    def protocol(self) -> str:
        return self.values[_INDEX["protocol_type"]]

    @property
    def service(self) -> str:
        return self.values[_INDEX["service"]]

    @property
    def flag(self) -> str:
        return self.values[_INDEX["flag"]]

    def serialize(self) -> str:
        fields = []
        for name, value in zip(ATTRIBUTE_NAMES, self.values):
            if name in NOMINAL_ATTRIBUTES:
                fields.append(value)
            else:
                fields.append(f"{value:.10g}")
        fields.append(self.label)
        return ",".join(fields)


def binarize_label(label: str) -> BinaryLabel:
    """'normal' stays normal; every attack label becomes anomalous."""
    return NORMAL if label == NORMAL else ANOMALOUS


def parse_kdd_record(line: str, line_number: int = 0) -> ConnectionRecord:
    """Parse one comma-separated connection line into a typed record."""
    fields = line.strip().split(",")
    if len(fields) != len(ATTRIBUTE_NAMES) + 1:
        raise ParseError(
            f"line {line_number}: expected 42 fields, got {len(fields)}"
        )
    values = []
    for i, name in enumerate(ATTRIBUTE_NAMES):
        raw = fields[i]
        if name in NOMINAL_ATTRIBUTES:
            values.append(raw)
            continue
        try:
            value = float(raw)
        except ValueError:
            raise ParseError(
                f"line {line_number}: non-numeric value {raw!r} "
                f"in continuous column {i + 1} ({name})"
            ) from None
        if not np.isfinite(value) or value < 0:
            raise ParseError(
                f"line {line_number}: continuous column {i + 1} ({name}) "
                f"must be finite and non-negative, got {raw!r}"
            )
        values.append(value)
    label = fields[-1].rstrip(".")
    return ConnectionRecord(values=tuple(values), label=label)


def iter_kdd_file(path: str | Path) -> Iterator[ConnectionRecord]:
    """Stream records from a plain or gzip-compressed KDD file."""
    path = Path(path)
    opener = gzip.open if path.suffix == ".gz" else open
    with opener(path, "rt") as handle:
        for line_number, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            yield parse_kdd_record(line, line_number)


def read_kdd_file(path: str | Path) -> list[ConnectionRecord]:
    return list(iter_kdd_file(path))


def kfold_split(n_records: int, k: int, seed: int) -> np.ndarray:
    """Assign each record index a fold in [0, k) by seeded permutation.

    Fold sizes differ by at most one. Deterministic for a given seed.
    """
    if k < 2:
        raise ConfigurationError(f"k must be >= 2, got {k}")
    if n_records < 1:
        raise ConfigurationError("cannot split an empty record sequence")
    if k > n_records:
        raise ConfigurationError(
            f"k={k} exceeds the record count {n_records}"
        )
    rng = np.random.default_rng(seed)
    order = rng.permutation(n_records)
    folds = np.empty(n_records, dtype=np.int64)
    folds[order] = np.arange(n_records) % k
    return folds


def write_fold_assignments(path: str | Path, folds: Sequence[int]) -> None:
    """Two-column delimited export: record index, fold index."""
    with open(path, "w") as handle:
        for index, fold in enumerate(folds):
            handle.write(f"{index}\t{fold}\n")


def minmax_fit(train: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-column (min, max) bounds computed on the training split only."""
    train = np.asarray(train, dtype=float)
    if train.size == 0:
        raise ConfigurationError("cannot fit min-max bounds on empty data")
    return train.min(axis=0), train.max(axis=0)


def minmax_apply(values: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """Map into [0,1] with clamping; degenerate columns (max == min) map to 0."""
    values = np.asarray(values, dtype=float)
    span = hi - lo
    with np.errstate(divide="ignore", invalid="ignore"):
        scaled = np.where(span > 0, (values - lo) / np.where(span > 0, span, 1.0), 0.0)
    return np.clip(scaled, 0.0, 1.0)


def minmax_normalize(
    train: np.ndarray, test: np.ndarray | None = None
) -> np.ndarray | tuple[np.ndarray, np.ndarray]:
    """Min-max normalize with bounds from the training split.

    Training values land in [0,1] exactly; test values are clamped into
    [0,1]. With ``test=None`` only the normalized training data is returned.
    """
    lo, hi = minmax_fit(train)
    train_norm = minmax_apply(train, lo, hi)
    if test is None:
        return train_norm
    return train_norm, minmax_apply(test, lo, hi)


def attribute_matrix(
    records: Iterable[ConnectionRecord], attributes: Sequence[str]
) -> np.ndarray:
    """Numeric matrix (records x attributes) for the given attribute names."""
    return np.array(
        [[record.numeric(name) for name in attributes] for record in records],
        dtype=float,
    )
