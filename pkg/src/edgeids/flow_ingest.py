"""Loading, cleaning, scaling, splitting and partitioning of flow records.

Flow records are CICFlowMeter-style CSV exports: one row per bidirectional
flow, a few identifier columns (flow id, addresses, timestamp), roughly
eighty numeric flow statistics and a textual ``Label`` column.
"""

from __future__ import annotations

import csv
import json
import logging
import math
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .exceptions import DataError

logger = logging.getLogger(__name__)

ID_COLUMNS = frozenset(
    {"flow id", "source ip", "src ip", "destination ip", "dst ip", "timestamp"}
)
MISSING_TOKENS = frozenset({"", "nan", "null", "none", "na", "n/a"})
BENIGN = "benign"


def _frozen(a, dtype):
    a = np.array(a, dtype=dtype, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class RawTable:
    headers: tuple
    rows: list
    source_path: str = ""

    def __post_init__(self):
        object.__setattr__(self, "headers", tuple(h.strip() for h in self.headers))
        if len(set(self.headers)) != len(self.headers):
            raise DataError(f"duplicate column names in {self.source_path or 'table'}")
        width = len(self.headers)
        for i, row in enumerate(self.rows):
            if len(row) != width:
                raise DataError(f"row {i} has {len(row)} cells, expected {width}")

    @property
    def n_rows(self):
        return len(self.rows)

    def column(self, name):
        j = self.headers.index(name)
        return [row[j] for row in self.rows]


@dataclass(frozen=True, eq=False)
class FeatureMatrix:
    """Dense finite feature matrix with binary labels (0 benign, 1 attack)."""

    features: np.ndarray
    labels: np.ndarray
    feature_names: tuple

    def __post_init__(self):
        X = _frozen(self.features, np.float64)
        y = _frozen(self.labels, np.int64)
        if X.ndim != 2:
            raise DataError("features must be a 2-D matrix")
        if X.shape[0] < 1:
            raise DataError("feature matrix has no rows")
        if y.shape != (X.shape[0],):
            raise DataError(f"{y.shape[0]} labels for {X.shape[0]} rows")
        if len(self.feature_names) != X.shape[1]:
            raise DataError(
                f"{len(self.feature_names)} feature names for {X.shape[1]} columns"
            )
        if not np.all(np.isfinite(X)):
            raise DataError("features contain NaN or infinite values")
        if not np.all((y == 0) | (y == 1)):
            raise DataError("labels must be 0 or 1")
        object.__setattr__(self, "features", X)
        object.__setattr__(self, "labels", y)
        object.__setattr__(self, "feature_names", tuple(self.feature_names))

    @property
    def n_rows(self):
        return self.features.shape[0]

    @property
    def n_cols(self):
        return self.features.shape[1]

    def class_counts(self):
        """Return ``(n_benign, n_attack)``."""
        n_attack = int(self.labels.sum())
        return self.n_rows - n_attack, n_attack

    def subset(self, index):
        index = np.asarray(index, dtype=np.int64)
        return FeatureMatrix(self.features[index], self.labels[index], self.feature_names)

    def with_labels(self, labels):
        return FeatureMatrix(self.features, labels, self.feature_names)

    def equals(self, other):
        return (
            self.feature_names == other.feature_names
            and np.array_equal(self.features, other.features)
            and np.array_equal(self.labels, other.labels)
        )

    def to_raw_table(self, label_column="Label"):
        """Render back to string cells; labels become ``BENIGN``/``ATTACK``."""
        names = {0: "BENIGN", 1: "ATTACK"}
        rows = [
            [repr(float(v)) for v in row] + [names[int(lab)]]
            for row, lab in zip(self.features, self.labels)
        ]
        return RawTable(self.feature_names + (label_column,), rows)


@dataclass(frozen=True, eq=False)
class ScalerParams:
    means: np.ndarray
    std_devs: np.ndarray

    def __post_init__(self):
        m = _frozen(self.means, np.float64)
        s = _frozen(self.std_devs, np.float64)
        if m.shape != s.shape or m.ndim != 1:
            raise DataError("scaler means and std_devs must be equal-length vectors")
        if not np.all(s > 0):
            raise DataError("scaler std_devs must be strictly positive")
        object.__setattr__(self, "means", m)
        object.__setattr__(self, "std_devs", s)

    def to_dict(self):
        return {"means": self.means.tolist(), "std_devs": self.std_devs.tolist()}

    @classmethod
    def from_dict(cls, d):
        return cls(np.asarray(d["means"]), np.asarray(d["std_devs"]))


@dataclass(frozen=True)
class SplitPair:
    train: FeatureMatrix
    test: FeatureMatrix
    seed: int
    ratio: float
    train_index: np.ndarray = field(repr=False)
    test_index: np.ndarray = field(repr=False)


@dataclass(frozen=True, eq=False)
class PartitionPlan:
    assignments: np.ndarray
    k: int
    scheme: str
    seed: int
    alpha: Optional[float] = None

    def client_indices(self):
        """Row indices owned by each client, ascending within a client."""
        return [np.flatnonzero(self.assignments == c) for c in range(self.k)]

    def sizes(self):
        return np.bincount(self.assignments, minlength=self.k)


# --------------------------------------------------------------------------
# loading


def load_flow_csv(path) -> RawTable:
    """Read a comma-separated flow export with a header row.

    Header names are whitespace-trimmed. CICFlowMeter exports repeat a
    few header names (``Fwd Header Length`` appears twice); repeats get a
    ``.1``, ``.2`` suffix so column names stay unique. Blank lines are
    skipped. Cells are returned untouched as strings.
    """
    path = Path(path)
    if not path.is_file():
        raise DataError(f"no such file: {path}")
    with open(path, newline="", encoding="utf-8-sig") as fh:
        reader = csv.reader(fh)
        try:
            raw_headers = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file, header row required") from None
        headers = _dedupe_headers([h.strip() for h in raw_headers])
        width = len(headers)
        rows = []
        for row in reader:
            if not row:
                continue
            if len(row) != width:
                raise DataError(
                    f"{path}: line {reader.line_num} has {len(row)} cells, "
                    f"header has {width}"
                )
            rows.append(row)
    return RawTable(tuple(headers), rows, str(path))


def _dedupe_headers(headers):
    seen = {}
    out = []
    for h in headers:
        if h in seen:
            seen[h] += 1
            out.append(f"{h}.{seen[h]}")
        else:
            seen[h] = 0
            out.append(h)
    return out


# --------------------------------------------------------------------------
# cleaning


def binarize_labels(raw_labels: Sequence[str]) -> np.ndarray:
    """Map ``BENIGN`` (any case, surrounding whitespace ignored) to 0, else 1."""
    out = np.empty(len(raw_labels), dtype=np.int64)
    for i, lab in enumerate(raw_labels):
        s = str(lab).strip()
        if not s:
            raise DataError(f"empty label at row {i}")
        out[i] = 0 if s.lower() == BENIGN else 1
    return out


def _resolve_label_column(headers, label_column):
    if label_column in headers:
        return label_column
    wanted = label_column.strip().lower()
    for h in headers:
        if h.lower() == wanted:
            return h
    raise DataError(f"label column {label_column!r} not found")


def _parse_column(cells):
    """Parse a column to float64; missing tokens become NaN.

    Returns None when any non-missing cell is not a number.
    """
    arr = np.char.strip(np.asarray(cells, dtype=str))
    missing = np.isin(np.char.lower(arr), list(MISSING_TOKENS))
    arr = np.where(missing, "nan", arr)
    try:
        return arr.astype(np.float64)
    except ValueError:
        return None


def clean(table: RawTable, label_column: str = "Label", drop_duplicates: bool = True) -> FeatureMatrix:
    """Turn a raw flow table into a finite numeric FeatureMatrix.

    Drops identifier columns and every column with a non-numeric cell,
    treats infinities as missing, drops rows with missing values and
    (by default) exact duplicate rows, and binarizes the label column.
    Row order of survivors is preserved.
    """
    label_name = _resolve_label_column(table.headers, label_column)
    labels = binarize_labels(table.column(label_name)) if table.rows else np.zeros(0, np.int64)

    names = []
    columns = []
    for j, name in enumerate(table.headers):
        if name == label_name or name.lower() in ID_COLUMNS:
            continue
        values = _parse_column([row[j] for row in table.rows])
        if values is None:
            logger.debug("dropping non-numeric column %r", name)
            continue
        names.append(name)
        columns.append(values)
    if not names:
        raise DataError("no numeric feature columns survive cleaning")

    X = np.column_stack(columns) if table.rows else np.zeros((0, len(names)))
    X[np.isinf(X)] = np.nan
    keep = ~np.isnan(X).any(axis=1)
    X, labels = X[keep], labels[keep]
    n_missing = int((~keep).sum())

    n_dupes = 0
    if drop_duplicates and X.shape[0]:
        combined = np.column_stack([X, labels.astype(np.float64)])
        # +0.0 folds -0.0 into 0.0 so byte-level uniqueness matches value equality
        _, first = np.unique(combined + 0.0, axis=0, return_index=True)
        first.sort()
        n_dupes = X.shape[0] - first.size
        X, labels = X[first], labels[first]

    logger.info(
        "clean: %d rows in, %d with missing/inf dropped, %d duplicates dropped, %d columns kept",
        table.n_rows, n_missing, n_dupes, len(names),
    )
    if X.shape[0] == 0:
        raise DataError("no rows survive cleaning")
    return FeatureMatrix(X, labels, tuple(names))


# --------------------------------------------------------------------------
# scaling


def fit_scaler(train: FeatureMatrix) -> ScalerParams:
    """Per-feature mean and population standard deviation (zero std -> 1)."""
    if train.n_rows < 2:
        raise DataError("need at least 2 rows to fit a scaler")
    means = train.features.mean(axis=0)
    std = train.features.std(axis=0)
    std = np.where(std > 0, std, 1.0)
    return ScalerParams(means, std)


def apply_scaler(params: ScalerParams, m: FeatureMatrix) -> FeatureMatrix:
    if m.n_cols != params.means.shape[0]:
        raise DataError(
            f"scaler fitted on {params.means.shape[0]} features, matrix has {m.n_cols}"
        )
    return FeatureMatrix((m.features - params.means) / params.std_devs, m.labels, m.feature_names)


# --------------------------------------------------------------------------
# splitting and partitioning


def _round_half_up(x):
    return int(math.floor(x + 0.5))


def stratified_split(m: FeatureMatrix, ratio: float = 0.8, seed: int = 0) -> SplitPair:
    """Seeded per-class shuffle, then take the first ``ratio`` share of each class.

    Each class contributes ``round((1 - ratio) * n_class)`` rows to the
    test side, clamped so both sides keep at least one row of each class.
    Index sets are returned in ascending order.
    """
    if not 0 < ratio < 1:
        raise DataError(f"split ratio must lie in (0, 1), got {ratio}")
    rng = np.random.default_rng(seed)
    train_parts, test_parts = [], []
    for c in (0, 1):
        idx = np.flatnonzero(m.labels == c)
        if idx.size < 2:
            raise DataError(f"class {c} has {idx.size} rows; need at least 2 to split")
        perm = rng.permutation(idx)
        n_test = min(max(_round_half_up((1 - ratio) * idx.size), 1), idx.size - 1)
        test_parts.append(perm[:n_test])
        train_parts.append(perm[n_test:])
    train_idx = np.sort(np.concatenate(train_parts))
    test_idx = np.sort(np.concatenate(test_parts))
    return SplitPair(m.subset(train_idx), m.subset(test_idx), seed, ratio, train_idx, test_idx)


def partition_clients(
    train: FeatureMatrix,
    k: int,
    scheme: str = "iid",
    alpha: float = 0.5,
    seed: int = 0,
    max_resample: int = 100,
) -> PartitionPlan:
    """Assign every training row to one of ``k`` simulated clients.

    ``iid``: seeded shuffle dealt round-robin. ``dirichlet``: for each class
    draw client proportions from Dirichlet(alpha, ..., alpha) and cut the
    shuffled class rows accordingly. Empty clients trigger a fresh draw;
    after ``max_resample`` failures a row is moved from the largest client.
    """
    n = train.n_rows
    if k < 2:
        raise DataError(f"need at least 2 clients, got {k}")
    if k > n:
        raise DataError(f"{k} clients but only {n} rows")
    rng = np.random.default_rng(seed)
    scheme = scheme.lower()

    if scheme == "iid":
        assignments = np.empty(n, dtype=np.int64)
        assignments[rng.permutation(n)] = np.arange(n) % k
        return PartitionPlan(assignments, k, "iid", seed)

    if scheme != "dirichlet":
        raise DataError(f"unknown partition scheme {scheme!r}")
    if not alpha > 0:
        raise DataError(f"dirichlet alpha must be positive, got {alpha}")

    for _ in range(max_resample + 1):
        assignments = _dirichlet_draw(train.labels, k, alpha, rng)
        if np.all(np.bincount(assignments, minlength=k) > 0):
            break
    else:
        assignments = _repair_empty(assignments, k, rng)
    return PartitionPlan(assignments, k, "dirichlet", seed, alpha)


def _dirichlet_draw(labels, k, alpha, rng):
    assignments = np.empty(labels.size, dtype=np.int64)
    for c in (0, 1):
        idx = rng.permutation(np.flatnonzero(labels == c))
        if idx.size == 0:
            continue
        p = rng.dirichlet(np.full(k, float(alpha)))
        cuts = np.floor(np.cumsum(p)[:-1] * idx.size).astype(np.int64)
        for client, part in enumerate(np.split(idx, cuts)):
            assignments[part] = client
    return assignments


def _repair_empty(assignments, k, rng):
    assignments = assignments.copy()
    sizes = np.bincount(assignments, minlength=k)
    for client in np.flatnonzero(sizes == 0):
        donor = int(np.argmax(sizes))
        row = rng.choice(np.flatnonzero(assignments == donor))
        assignments[row] = client
        sizes[donor] -= 1
        sizes[client] += 1
    return assignments


# --------------------------------------------------------------------------
# on-disk cache

CACHE_FORMAT = "edgeids-prepared"
CACHE_VERSION = 1


def write_cache(out_dir, split: SplitPair, scaler: Optional[ScalerParams], meta=None):
    """Write ``train.npz``/``test.npz`` plus a ``meta.json`` sidecar."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for name, m in (("train", split.train), ("test", split.test)):
        np.savez(out / f"{name}.npz", features=m.features, labels=m.labels)
    record = {
        "format": CACHE_FORMAT,
        "version": CACHE_VERSION,
        "feature_names": list(split.train.feature_names),
        "scaler": scaler.to_dict() if scaler is not None else None,
        "seed": split.seed,
        "ratio": split.ratio,
        "train_rows": split.train.n_rows,
        "test_rows": split.test.n_rows,
    }
    record.update(meta or {})
    (out / "meta.json").write_text(json.dumps(record, indent=2, sort_keys=True) + "\n")
    return out


def read_cache(cache_dir):
    """Inverse of :func:`write_cache`: returns ``(train, test, meta)``."""
    cache = Path(cache_dir)
    meta_path = cache / "meta.json"
    if not meta_path.is_file():
        raise DataError(f"{cache}: not a prepared cache (meta.json missing)")
    meta = json.loads(meta_path.read_text())
    if meta.get("format") != CACHE_FORMAT:
        raise DataError(f"{meta_path}: unrecognized format {meta.get('format')!r}")
    names = tuple(meta["feature_names"])
    parts = []
    for name in ("train", "test"):
        with np.load(cache / f"{name}.npz") as z:
            parts.append(FeatureMatrix(z["features"], z["labels"], names))
    return parts[0], parts[1], meta


def default_data_dir():
    """Directory named by ``EDGEIDS_DATA_DIR``, else the working directory."""
    return Path(os.environ.get("EDGEIDS_DATA_DIR", "."))
