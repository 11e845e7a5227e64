"""Fit-on-train feature transforms: LabelCount encoding and z-scoring.

The three categorical features are replaced by integer codes ranked by
training-set frequency (codes 1..K ascending with frequency, 0 reserved
for categories never seen in training). Every column is then
standardized with the population mean/std of the training matrix.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .dataset import LabeledDataset
from .errors import VersionSkewError
from .schema import DEFAULT_SCHEMA, FeatureSchema

PIPELINE_FORMAT_VERSION = 1


@dataclass(frozen=True)
class FeatureMatrix:
    """Dense numeric matrix with a row-aligned label vector."""

    values: np.ndarray           # (n, d) float64
    labels: np.ndarray           # (n,) object
    provenance: str = "unknown"

    def __post_init__(self) -> None:
        if self.values.ndim != 2:
            raise ValueError(f"values must be 2-D, got shape {self.values.shape}")
        if len(self.labels) != self.values.shape[0]:
            raise ValueError("row count does not match label count")
        if not np.isfinite(self.values).all():
            raise ValueError("matrix contains non-finite entries")

    @property
    def n_rows(self) -> int:
        return self.values.shape[0]

    def select(self, mask: np.ndarray, provenance: str | None = None) -> "FeatureMatrix":
        return FeatureMatrix(
            values=self.values[mask],
            labels=self.labels[mask],
            provenance=provenance or self.provenance,
        )


@dataclass(frozen=True)
class LabelCountEncoder:
    """Per categorical feature: category -> (train count, code).

    Codes run 1..K ascending with frequency, so the most frequent
    category gets the largest code; ties go to the lexicographically
    smaller name. Code 0 is reserved for unseen categories.
    """

    tables: dict[str, dict[str, tuple[int, int]]]

    def code(self, feature: str, category: str) -> int:
        return self.tables[feature].get(category, (0, 0))[1]


@dataclass(frozen=True)
class Standardizer:
    mu: np.ndarray      # (d,)
    sigma: np.ndarray   # (d,) population std, >= 0

    def __post_init__(self) -> None:
        if self.mu.shape != self.sigma.shape:
            raise ValueError("mu and sigma shapes differ")
        if (self.sigma < 0).any():
            raise ValueError("negative sigma")


@dataclass(frozen=True)
class FittedPipeline:
    """Frozen preprocessing state; encoder and standardizer must come
    from the same training dataset (use :func:`fit_pipeline`).

    ``dropped`` lists train-constant features removed from the output
    matrix; it stays empty unless fitting asked for constant-column
    dropping, keeping the full 41-wide layout by default.
    """

    schema: FeatureSchema
    encoder: LabelCountEncoder
    standardizer: Standardizer
    dropped: tuple[str, ...] = ()

    @property
    def feature_names(self) -> tuple[str, ...]:
        return tuple(n for n in self.schema.names if n not in self.dropped)

    def transform(self, ds: LabeledDataset) -> FeatureMatrix:
        """Encode then standardize; pure, never mutates fitted state."""
        raw = encode(self.encoder, ds, self.schema)
        fm = standardize(self.standardizer, raw, labels=ds.labels(), provenance=ds.split)
        if not self.dropped:
            return fm
        keep = [j for j, n in enumerate(self.schema.names) if n not in self.dropped]
        return FeatureMatrix(values=fm.values[:, keep], labels=fm.labels, provenance=fm.provenance)

    def to_json(self) -> str:
        doc = {
            "format_version": PIPELINE_FORMAT_VERSION,
            "kind": "pipeline",
            "features": [
                {"name": name, "mu": float(m), "sigma": float(s)}
                for name, m, s in zip(
                    self.schema.names, self.standardizer.mu, self.standardizer.sigma
                )
            ],
            "encoders": {
                feature: {cat: [int(count), int(code)] for cat, (count, code) in table.items()}
                for feature, table in self.encoder.tables.items()
            },
            "dropped_features": list(self.dropped),
        }
        return json.dumps(doc, indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str, schema: FeatureSchema = DEFAULT_SCHEMA) -> "FittedPipeline":
        doc = json.loads(text)
        version = doc.get("format_version")
        if version != PIPELINE_FORMAT_VERSION:
            raise VersionSkewError(
                f"pipeline format version {version!r} unsupported (expected {PIPELINE_FORMAT_VERSION})"
            )
        names = [f["name"] for f in doc["features"]]
        if list(schema.names) != names:
            raise ValueError("pipeline feature names do not match schema")
        mu = np.array([f["mu"] for f in doc["features"]], dtype=np.float64)
        sigma = np.array([f["sigma"] for f in doc["features"]], dtype=np.float64)
        tables = {
            feature: {cat: (int(c[0]), int(c[1])) for cat, c in table.items()}
            for feature, table in doc["encoders"].items()
        }
        return cls(
            schema=schema,
            encoder=LabelCountEncoder(tables=tables),
            standardizer=Standardizer(mu=mu, sigma=sigma),
            dropped=tuple(doc.get("dropped_features", [])),
        )


def fit_encoder(train: LabeledDataset, schema: FeatureSchema = DEFAULT_SCHEMA) -> LabelCountEncoder:
    """Count categories per categorical feature and assign frequency-ranked codes."""
    tables: dict[str, dict[str, tuple[int, int]]] = {}
    for j in schema.categorical_indices:
        counts: dict[str, int] = {}
        for rec in train.records:
            counts[rec.features[j]] = counts.get(rec.features[j], 0) + 1
        # ascending frequency, ties by ascending name -> codes 1..K
        ordered = sorted(counts.items(), key=lambda kv: (kv[1], kv[0]))
        tables[schema.names[j]] = {
            cat: (count, code) for code, (cat, count) in enumerate(ordered, start=1)
        }
    return LabelCountEncoder(tables=tables)


def encode(
    enc: LabelCountEncoder, ds: LabeledDataset, schema: FeatureSchema = DEFAULT_SCHEMA
) -> np.ndarray:
    """Raw records to a float matrix; unseen categories map to code 0."""
    categorical = set(schema.categorical_indices)
    names = schema.names
    n, d = len(ds.records), len(names)
    out = np.empty((n, d), dtype=np.float64)
    for i, rec in enumerate(ds.records):
        f = rec.features
        for j in range(d):
            if j in categorical:
                out[i, j] = enc.code(names[j], f[j])
            else:
                out[i, j] = float(f[j])
    return out


def fit_standardizer(matrix: np.ndarray) -> Standardizer:
    """Per-column mean and population (divide-by-n) standard deviation."""
    if matrix.ndim != 2 or matrix.shape[0] < 1:
        raise ValueError("need a non-empty 2-D matrix")
    if not np.isfinite(matrix).all():
        raise ValueError("matrix contains non-finite entries")
    mu = matrix.mean(axis=0)
    sigma = matrix.std(axis=0)  # ddof=0
    return Standardizer(mu=mu, sigma=sigma)


def standardize(
    s: Standardizer,
    matrix: np.ndarray,
    labels: np.ndarray | None = None,
    provenance: str = "unknown",
) -> FeatureMatrix:
    """Z = (x - mu) / sigma per cell; sigma=0 columns map to 0 everywhere."""
    if matrix.ndim != 2 or matrix.shape[1] != s.mu.shape[0]:
        raise ValueError(
            f"column mismatch: matrix has {matrix.shape[1] if matrix.ndim == 2 else '?'} columns, "
            f"standardizer expects {s.mu.shape[0]}"
        )
    safe = np.where(s.sigma > 0, s.sigma, 1.0)
    z = (matrix - s.mu) / safe
    z[:, s.sigma == 0] = 0.0
    if labels is None:
        labels = np.array([""] * matrix.shape[0], dtype=object)
    return FeatureMatrix(values=z, labels=np.asarray(labels, dtype=object), provenance=provenance)


def fit_pipeline(
    train: LabeledDataset,
    schema: FeatureSchema = DEFAULT_SCHEMA,
    drop_constant: bool = False,
) -> FittedPipeline:
    """Fit encoder and standardizer on the same training dataset.

    With ``drop_constant`` the train-constant (sigma = 0) columns are
    removed from transformed output; off by default so the feature
    count stays at 41.
    """
    enc = fit_encoder(train, schema)
    raw = encode(enc, train, schema)
    std = fit_standardizer(raw)
    dropped: tuple[str, ...] = ()
    if drop_constant:
        dropped = tuple(n for n, s in zip(schema.names, std.sigma) if s == 0)
    return FittedPipeline(schema=schema, encoder=enc, standardizer=std, dropped=dropped)
