"""Data-exploration exports: per-class histograms, Pearson correlations,
scatter pairs, and constant-feature detection. Everything is emitted as
plot-ready CSV/JSON, never rendered images."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .dataset import CATEGORIES, AttackTaxonomy, LabeledDataset, categories
from .preprocess import fit_encoder, encode
from .schema import DEFAULT_SCHEMA, FeatureSchema


@dataclass(frozen=True)
class HistogramReport:
    feature: str
    edges: np.ndarray                 # (bins + 1,), strictly increasing
    counts: dict[str, np.ndarray]     # category -> per-bin counts

    def to_csv(self) -> str:
        cats = list(self.counts)
        lines = ["edge_low,edge_high," + ",".join(cats)]
        for i in range(len(self.edges) - 1):
            row = [repr(float(self.edges[i])), repr(float(self.edges[i + 1]))]
            row += [str(int(self.counts[c][i])) for c in cats]
            lines.append(",".join(row))
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class CorrelationMatrix:
    values: np.ndarray        # (d, d), exactly symmetric, zeros on masked pairs
    constant_mask: np.ndarray  # (d,) True where correlation is undefined

    def to_csv(self, names: tuple[str, ...]) -> str:
        lines = ["feature," + ",".join(names)]
        for i, name in enumerate(names):
            cells = []
            for j in range(len(names)):
                if self.constant_mask[i] or self.constant_mask[j]:
                    cells.append("")
                else:
                    cells.append(repr(float(self.values[i, j])))
            lines.append(name + "," + ",".join(cells))
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class RedundancyReport:
    constant_features: tuple[tuple[str, str], ...]  # (name, constant raw value)

    def to_json(self) -> str:
        return json.dumps(
            {"constant_features": [{"name": n, "value": v} for n, v in self.constant_features]},
            indent=2, sort_keys=True,
        )


def _numeric_view(ds: LabeledDataset, schema: FeatureSchema) -> np.ndarray:
    """Encoded matrix for exploration; codes are fit on this dataset."""
    return encode(fit_encoder(ds, schema), ds, schema)


def histogram(
    ds: LabeledDataset,
    taxonomy: AttackTaxonomy,
    feature: str,
    bins: int = 40,
    schema: FeatureSchema = DEFAULT_SCHEMA,
) -> HistogramReport:
    """Uniform bins over the pooled [min, max]; the last bin is right-closed."""
    if bins < 1:
        raise ValueError("bins must be >= 1")
    j = schema.index_of(feature)
    values = _numeric_view(ds, schema)[:, j]
    if values.size == 0:
        raise ValueError("empty dataset")
    lo, hi = float(values.min()), float(values.max())
    if hi == lo:
        hi = lo + 1.0
    edges = np.linspace(lo, hi, bins + 1)
    scaled = (values - lo) / (hi - lo) * bins
    idx = np.minimum(scaled.astype(np.int64), bins - 1)
    cats = categories(ds, taxonomy)
    counts = {
        cat: np.bincount(idx[cats == cat], minlength=bins).astype(np.int64)
        for cat in CATEGORIES
    }
    return HistogramReport(feature=feature, edges=edges, counts=counts)


def pearson_matrix(matrix: np.ndarray) -> CorrelationMatrix:
    """Pearson r per column pair, computed once and mirrored; constant
    columns are masked as undefined rather than propagating NaN."""
    matrix = np.asarray(matrix, dtype=np.float64)
    if matrix.ndim != 2 or matrix.shape[0] < 2:
        raise ValueError("need at least 2 rows")
    d = matrix.shape[1]
    centered = matrix - matrix.mean(axis=0)
    std = matrix.std(axis=0)
    mask = std == 0
    out = np.zeros((d, d))
    n = matrix.shape[0]
    for i in range(d):
        if mask[i]:
            continue
        out[i, i] = 1.0
        for j in range(i + 1, d):
            if mask[j]:
                continue
            r = (centered[:, i] @ centered[:, j]) / (n * std[i] * std[j])
            r = min(1.0, max(-1.0, r))
            out[i, j] = r
            out[j, i] = r
    return CorrelationMatrix(values=out, constant_mask=mask)


def scatter_rows(
    ds: LabeledDataset,
    feature_x: str,
    feature_y: str,
    taxonomy: AttackTaxonomy,
    schema: FeatureSchema = DEFAULT_SCHEMA,
) -> list[tuple[str, str, str]]:
    """(x, y, category) per record, raw feature values kept verbatim."""
    jx = schema.index_of(feature_x)
    jy = schema.index_of(feature_y)
    cats = categories(ds, taxonomy)
    return [
        (rec.features[jx], rec.features[jy], cat)
        for rec, cat in zip(ds.records, cats)
    ]


def scatter_csv(rows: list[tuple[str, str, str]], feature_x: str, feature_y: str) -> str:
    lines = [f"{feature_x},{feature_y},category"]
    lines += [",".join(r) for r in rows]
    return "\n".join(lines) + "\n"


def find_constant_features(
    ds: LabeledDataset, schema: FeatureSchema = DEFAULT_SCHEMA
) -> RedundancyReport:
    """Features whose raw value never varies across the dataset."""
    found: list[tuple[str, str]] = []
    for e in schema.entries:
        first = ds.records[0].features[e.index]
        if all(rec.features[e.index] == first for rec in ds.records):
            found.append((e.name, first))
    return RedundancyReport(constant_features=tuple(found))


DEFAULT_HISTOGRAM_FEATURES = (
    "protocol_type", "count", "serror_rate", "dst_host_srv_diff_host_rate",
)
DEFAULT_SCATTER_PAIRS = (
    ("dst_host_rerror_rate", "dst_host_diff_srv_rate"),
    ("count", "serror_rate"),
)


def write_exploration(
    ds: LabeledDataset,
    taxonomy: AttackTaxonomy,
    out_dir: str | Path,
    features: tuple[str, ...] = DEFAULT_HISTOGRAM_FEATURES,
    scatter_pairs: tuple[tuple[str, str], ...] = DEFAULT_SCATTER_PAIRS,
    bins: int = 40,
    schema: FeatureSchema = DEFAULT_SCHEMA,
) -> list[Path]:
    """Emit histograms/, correlation.csv, scatter_*.csv and redundancy.json."""
    out = Path(out_dir)
    (out / "histograms").mkdir(parents=True, exist_ok=True)
    written = []
    for feature in features:
        report = histogram(ds, taxonomy, feature, bins=bins, schema=schema)
        path = out / "histograms" / f"{feature}.csv"
        path.write_text(report.to_csv())
        written.append(path)
    corr = pearson_matrix(_numeric_view(ds, schema))
    path = out / "correlation.csv"
    path.write_text(corr.to_csv(schema.names))
    written.append(path)
    for fx, fy in scatter_pairs:
        rows = scatter_rows(ds, fx, fy, taxonomy, schema)
        path = out / f"scatter_{fx}_{fy}.csv"
        path.write_text(scatter_csv(rows, fx, fy))
        written.append(path)
    path = out / "redundancy.json"
    path.write_text(find_constant_features(ds, schema).to_json() + "\n")
    written.append(path)
    return written
