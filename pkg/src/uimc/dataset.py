"""Multi-view datasets, missingness simulation and on-disk formats.

A complete dataset holds one feature matrix per view, each shaped
(n_features, n_instances) so that columns index instances.  Incompleteness
is simulated by deleting whole columns per view; the surviving columns are
compacted (original order preserved) and an indicator matrix records where
each compacted column came from.
"""

import json
import math
import warnings
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np


class ViewClass(Enum):
    """Availability class of a view relative to the other views."""

    STRONG = "strong"    # below-average missing rate
    WEAK = "weak"        # above-average missing rate
    NEUTRAL = "neutral"  # missing rate exactly at the average
    DYING = "dying"      # fewer presented instances than clusters


@dataclass(frozen=True)
class MultiViewDataset:
    """Complete multi-view data: one (d_v, m) matrix per view."""

    views: tuple
    c: int
    labels: np.ndarray | None = None

    def __post_init__(self):
        if len(self.views) == 0:
            raise ValueError("dataset needs at least one view")
        m = self.views[0].shape[1]
        for v, x in enumerate(self.views):
            if x.ndim != 2 or x.shape[1] != m:
                raise ValueError(f"view {v} has {x.shape[1]} columns, expected {m}")
            if x.shape[0] < 1:
                raise ValueError(f"view {v} has no features")
        if self.c < 2:
            raise ValueError("cluster count must be at least 2")
        if self.labels is not None:
            if len(self.labels) != m:
                raise ValueError(f"{len(self.labels)} labels for {m} instances")
            if self.labels.min() < 0 or self.labels.max() >= self.c:
                raise ValueError("labels must be dense integers in [0, c)")

    @property
    def m(self):
        return self.views[0].shape[1]

    @property
    def n_views(self):
        return len(self.views)


@dataclass(frozen=True)
class IndicatorMatrix:
    """Binary (k_v, m) matrix mapping compacted columns to original positions.

    Row i carries a single 1 at column ``presented[i]``; ``presented`` is
    strictly increasing, so compaction preserves original instance order.
    """

    presented: np.ndarray
    m: int

    def __post_init__(self):
        p = self.presented
        if p.ndim != 1:
            raise ValueError("presented must be a flat index array")
        if p.size and (p.min() < 0 or p.max() >= self.m):
            raise ValueError("presented index out of range")
        if p.size > 1 and not np.all(np.diff(p) > 0):
            raise ValueError("presented indices must be strictly increasing")

    @property
    def k(self):
        return int(self.presented.size)

    @property
    def entries(self):
        """Materialize the dense 0/1 matrix."""
        dense = np.zeros((self.k, self.m))
        dense[np.arange(self.k), self.presented] = 1.0
        return dense


def build_indicator(presented, m):
    """Build an IndicatorMatrix from strictly increasing original indices."""
    idx = np.asarray(presented, dtype=np.intp).reshape(-1)
    return IndicatorMatrix(presented=idx, m=int(m))


@dataclass(frozen=True)
class MaskSpec:
    """Per-view missing rates plus the seed that realizes them."""

    rates: tuple
    seed: int = 0

    def __post_init__(self):
        for r in self.rates:
            if not 0.0 <= r <= 1.0:
                raise ValueError(f"missing rate {r} outside [0, 1]")


@dataclass(frozen=True)
class IncompleteDataset:
    """Per-view compacted matrices with their indicators and view classes."""

    views: tuple
    indicators: tuple
    c: int
    m: int
    classifications: tuple = ()
    labels: np.ndarray | None = None

    def __post_init__(self):
        if len(self.views) != len(self.indicators):
            raise ValueError("views and indicators length mismatch")
        for v, (x, ind) in enumerate(zip(self.views, self.indicators)):
            if x.shape[1] != ind.k:
                raise ValueError(f"view {v}: {x.shape[1]} columns, {ind.k} presented")
            if ind.m != self.m:
                raise ValueError(f"view {v}: indicator built for m={ind.m}, not {self.m}")

    @property
    def n_views(self):
        return len(self.views)

    @property
    def presented_counts(self):
        return tuple(ind.k for ind in self.indicators)

    @property
    def missing_rates(self):
        return tuple(1.0 - ind.k / self.m for ind in self.indicators)


def _removal_count(rate, m):
    # half-up rounding of rate*m
    return int(math.floor(rate * m + 0.5))


def classify_from_counts(counts, m, c):
    """Tag each view by comparing its presented count to the across-view mean.

    Fewer presented instances than clusters makes a view DYING regardless of
    the mean comparison.  The mean comparison is done on integer counts
    (k_v * n_views vs sum of counts), which is exact.
    """
    counts = [int(k) for k in counts]
    n = len(counts)
    total = sum(counts)
    tags = []
    for k in counts:
        if k < c:
            tags.append(ViewClass.DYING)
        elif k * n > total:
            tags.append(ViewClass.STRONG)
        elif k * n < total:
            tags.append(ViewClass.WEAK)
        else:
            tags.append(ViewClass.NEUTRAL)
    return tuple(tags)


def classify_views(incomplete):
    """Assign STRONG/WEAK/NEUTRAL/DYING tags to the views of a dataset."""
    return classify_from_counts(incomplete.presented_counts, incomplete.m, incomplete.c)


def apply_mask(data, spec):
    """Delete columns per view at the given rates and compact the survivors.

    For view v exactly round(rate_v * m) distinct columns are removed,
    chosen uniformly at random; draws consume a single generator seeded with
    ``spec.seed`` in view order, so the result is reproducible bit for bit.
    """
    if len(spec.rates) != data.n_views:
        raise ValueError(f"{len(spec.rates)} rates for {data.n_views} views")
    rng = np.random.default_rng(spec.seed)
    m = data.m
    views = []
    indicators = []
    for x, rate in zip(data.views, spec.rates):
        n_remove = _removal_count(rate, m)
        removed = rng.choice(m, size=n_remove, replace=False)
        keep = np.setdiff1d(np.arange(m), removed)
        views.append(x[:, keep].copy())
        indicators.append(build_indicator(keep, m))
    covered = np.zeros(m, dtype=bool)
    for ind in indicators:
        covered[ind.presented] = True
    if not covered.all():
        warnings.warn(
            f"{int((~covered).sum())} instance(s) are missing from every view",
            stacklevel=2,
        )
    tags = classify_from_counts([ind.k for ind in indicators], m, data.c)
    return IncompleteDataset(
        views=tuple(views),
        indicators=tuple(indicators),
        c=data.c,
        m=m,
        classifications=tags,
        labels=None if data.labels is None else data.labels.copy(),
    )


def as_incomplete(data):
    """View a complete dataset as an IncompleteDataset with identity
    indicators (nothing missing, all views neutral)."""
    indicators = tuple(build_indicator(np.arange(data.m), data.m) for _ in data.views)
    return IncompleteDataset(
        views=tuple(x.copy() for x in data.views),
        indicators=indicators,
        c=data.c,
        m=data.m,
        classifications=classify_from_counts([data.m] * data.n_views, data.m, data.c),
        labels=None if data.labels is None else data.labels.copy(),
    )


def mean_fill(incomplete):
    """Reconstruct full (d_v, m) views, filling missing columns with the
    per-view mean of the presented columns."""
    filled = []
    for v, (x, ind) in enumerate(zip(incomplete.views, incomplete.indicators)):
        if ind.k == 0:
            raise ValueError(f"view {v} has no presented instances to average")
        col_mean = x.mean(axis=1, keepdims=True)
        full = np.tile(col_mean, (1, incomplete.m))
        full[:, ind.presented] = x
        filled.append(full)
    return MultiViewDataset(
        views=tuple(filled),
        c=incomplete.c,
        labels=None if incomplete.labels is None else incomplete.labels.copy(),
    )


# ---------------------------------------------------------------------------
# On-disk formats.
#
# Complete dataset manifest (JSON):
#   {"views": [csv, ...], "labels": path-or-null, "c": int}
# Each view CSV has one row per instance (m rows, d_v columns); the labels
# file has one integer per line.  Incomplete datasets add "m", "dims" and
# the per-view "presented" index lists so that empty views survive a
# round trip.
# ---------------------------------------------------------------------------

_CSV_FMT = "%.17g"


def _read_view_csv(path):
    raw = np.loadtxt(path, delimiter=",", ndmin=2)
    return raw.T  # rows are instances on disk, columns in memory


def _write_view_csv(path, x):
    np.savetxt(path, x.T, delimiter=",", fmt=_CSV_FMT)


def _encode_labels(raw):
    _, dense = np.unique(np.asarray(raw, dtype=np.int64), return_inverse=True)
    return dense.astype(np.int64)


def load_dataset(manifest_path):
    """Load a complete dataset from its JSON manifest.

    Relative paths inside the manifest resolve against the manifest's
    directory.  Labels are re-encoded to dense 0-based integers.
    """
    manifest_path = Path(manifest_path)
    try:
        doc = json.loads(manifest_path.read_text())
    except json.JSONDecodeError as exc:
        raise ValueError(f"malformed manifest {manifest_path}: {exc}") from exc
    if not isinstance(doc, dict) or "views" not in doc or "c" not in doc:
        raise ValueError(f"manifest {manifest_path} must define 'views' and 'c'")
    base = manifest_path.parent
    views = [_read_view_csv(base / p) for p in doc["views"]]
    labels = None
    if doc.get("labels"):
        raw = np.loadtxt(base / doc["labels"], dtype=np.int64, ndmin=1)
        labels = _encode_labels(raw)
    return MultiViewDataset(views=tuple(views), c=int(doc["c"]), labels=labels)


def save_dataset(data, out_dir, name="dataset"):
    """Write a complete dataset (manifest + view CSVs + labels) and return
    the manifest path."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    view_files = []
    for v, x in enumerate(data.views):
        fname = f"{name}_view{v}.csv"
        _write_view_csv(out_dir / fname, x)
        view_files.append(fname)
    labels_file = None
    if data.labels is not None:
        labels_file = f"{name}_labels.txt"
        np.savetxt(out_dir / labels_file, data.labels, fmt="%d")
    manifest = {"views": view_files, "labels": labels_file, "c": data.c}
    manifest_path = out_dir / f"{name}.json"
    manifest_path.write_text(json.dumps(manifest, indent=2) + "\n")
    return manifest_path


def save_incomplete(incomplete, out_dir, name="masked"):
    """Write an incomplete dataset and return its manifest path."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    view_files = []
    for v, x in enumerate(incomplete.views):
        fname = f"{name}_view{v}.csv"
        _write_view_csv(out_dir / fname, x)
        view_files.append(fname)
    labels_file = None
    if incomplete.labels is not None:
        labels_file = f"{name}_labels.txt"
        np.savetxt(out_dir / labels_file, incomplete.labels, fmt="%d")
    manifest = {
        "views": view_files,
        "labels": labels_file,
        "c": incomplete.c,
        "m": incomplete.m,
        "dims": [int(x.shape[0]) for x in incomplete.views],
        "presented": [ind.presented.tolist() for ind in incomplete.indicators],
    }
    manifest_path = out_dir / f"{name}.json"
    manifest_path.write_text(json.dumps(manifest, indent=2) + "\n")
    return manifest_path


def load_incomplete(manifest_path):
    """Load an incomplete dataset written by :func:`save_incomplete`."""
    manifest_path = Path(manifest_path)
    try:
        doc = json.loads(manifest_path.read_text())
    except json.JSONDecodeError as exc:
        raise ValueError(f"malformed manifest {manifest_path}: {exc}") from exc
    for key in ("views", "c", "m", "presented", "dims"):
        if key not in doc:
            raise ValueError(f"manifest {manifest_path} missing '{key}'")
    base = manifest_path.parent
    m = int(doc["m"])
    views = []
    indicators = []
    for path, idx, d in zip(doc["views"], doc["presented"], doc["dims"]):
        ind = build_indicator(idx, m)
        if ind.k == 0:
            x = np.zeros((int(d), 0))
        else:
            x = _read_view_csv(base / path)
            if x.shape != (int(d), ind.k):
                raise ValueError(f"{path}: shape {x.shape}, expected ({d}, {ind.k})")
        views.append(x)
        indicators.append(ind)
    labels = None
    if doc.get("labels"):
        labels = _encode_labels(np.loadtxt(base / doc["labels"], dtype=np.int64, ndmin=1))
    ds = IncompleteDataset(
        views=tuple(views),
        indicators=tuple(indicators),
        c=int(doc["c"]),
        m=m,
        labels=labels,
    )
    return IncompleteDataset(
        views=ds.views,
        indicators=ds.indicators,
        c=ds.c,
        m=ds.m,
        classifications=classify_views(ds),
        labels=ds.labels,
    )


def load_mask_spec(path, n_views=None):
    """Read a mask file: either {"rates": [...], "seed": int} or an explicit
    {"presented": [[...], ...]} list for exact reproduction.

    Returns a MaskSpec in the first case and a list of index arrays in the
    second.
    """
    doc = json.loads(Path(path).read_text())
    if "presented" in doc:
        idx = doc["presented"]
        if n_views is not None and len(idx) != n_views:
            raise ValueError(f"{len(idx)} presented lists for {n_views} views")
        return [np.asarray(p, dtype=np.intp) for p in idx]
    if "rates" in doc:
        return MaskSpec(rates=tuple(float(r) for r in doc["rates"]), seed=int(doc.get("seed", 0)))
    raise ValueError(f"mask file {path} needs 'rates' or 'presented'")


def mask_from_presented(data, presented_lists):
    """Build an IncompleteDataset from explicit per-view presented indices."""
    if len(presented_lists) != data.n_views:
        raise ValueError("one presented list per view required")
    views = []
    indicators = []
    for x, idx in zip(data.views, presented_lists):
        ind = build_indicator(idx, data.m)
        views.append(x[:, ind.presented].copy())
        indicators.append(ind)
    tags = classify_from_counts([ind.k for ind in indicators], data.m, data.c)
    return IncompleteDataset(
        views=tuple(views),
        indicators=tuple(indicators),
        c=data.c,
        m=data.m,
        classifications=tags,
        labels=None if data.labels is None else data.labels.copy(),
    )


@dataclass
class ClusteringReport:
    """Everything a single clustering run produced."""

    method: str
    labels: np.ndarray
    metrics: dict = field(default_factory=dict)
    objective_trace: list = field(default_factory=list)
    weight_trace: list = field(default_factory=list)
    wall_time: float = 0.0
    extra: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "method": self.method,
            "labels": np.asarray(self.labels).astype(int).tolist(),
            "metrics": {k: float(v) for k, v in self.metrics.items()},
            "objective_trace": [float(x) for x in self.objective_trace],
            "weight_trace": [[float(w) for w in row] for row in self.weight_trace],
            "wall_time": float(self.wall_time),
            "extra": self.extra,
        }


def save_report(report, path):
    """Write a ClusteringReport as JSON."""
    Path(path).write_text(json.dumps(report.to_dict(), indent=2) + "\n")
    return Path(path)


def load_report(path):
    doc = json.loads(Path(path).read_text())
    return ClusteringReport(
        method=doc["method"],
        labels=np.asarray(doc["labels"], dtype=np.int64),
        metrics=doc.get("metrics", {}),
        objective_trace=doc.get("objective_trace", []),
        weight_trace=doc.get("weight_trace", []),
        wall_time=doc.get("wall_time", 0.0),
        extra=doc.get("extra", {}),
    )
