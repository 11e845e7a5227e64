"""NSL-KDD file parsing, attack taxonomy, and synthetic fixtures.

A record line has 43 comma-separated fields: 41 features, the attack
label, and a difficulty score. The difficulty column is parsed and kept
but never used as a model feature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable

import numpy as np

from .schema import CATEGORICAL, DEFAULT_SCHEMA, FeatureSchema

CATEGORIES = ("Normal", "DoS", "Probe", "R2L", "U2R")
ATTACK_CATEGORIES = ("DoS", "Probe", "R2L", "U2R")

NORMAL = "normal"
ATTACK = "attack"


class KddParseError(ValueError):
    """Raised for malformed NSL-KDD input (bad arity, bad numerics, empty file)."""


class UnknownLabelError(KeyError):
    """Raised when an attack name is missing from the taxonomy."""


@dataclass(frozen=True)
class ConnectionRecord:
    """One connection: 41 raw feature strings, attack label, difficulty 0-21."""

    features: tuple[str, ...]
    label: str
    difficulty: int

    def to_line(self) -> str:
        return ",".join(self.features) + f",{self.label},{self.difficulty}"


@dataclass(frozen=True)
class LabeledDataset:
    records: tuple[ConnectionRecord, ...]
    split: str  # train | test | fixture

    def __post_init__(self) -> None:
        if not self.records:
            raise KddParseError("dataset is empty")
        if self.split not in ("train", "test", "fixture"):
            raise ValueError(f"bad split tag: {self.split!r}")

    def __len__(self) -> int:
        return len(self.records)

    def labels(self) -> np.ndarray:
        return np.array([r.label for r in self.records], dtype=object)


@dataclass(frozen=True)
class AttackTaxonomy:
    """Mapping from raw attack name to one of the five categories."""

    mapping: dict[str, str]

    def __post_init__(self) -> None:
        for name, cat in self.mapping.items():
            if cat not in CATEGORIES:
                raise ValueError(f"taxonomy maps {name!r} to unknown category {cat!r}")
        if self.mapping.get(NORMAL) != "Normal":
            raise ValueError("taxonomy must map 'normal' to Normal")


def load_taxonomy(path: str | Path | None = None) -> AttackTaxonomy:
    """Load a `name,category` mapping file; defaults to the bundled one."""
    if path is None:
        text = resources.files("nidkit.data").joinpath("taxonomy.csv").read_text()
    else:
        text = Path(path).read_text()
    mapping: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split(",")
        if len(parts) != 2:
            raise KddParseError(f"taxonomy line {lineno}: expected 'name,category', got {raw!r}")
        name, cat = parts[0].strip(), parts[1].strip()
        if name in mapping and mapping[name] != cat:
            raise KddParseError(f"taxonomy line {lineno}: conflicting entry for {name!r}")
        mapping[name] = cat
    return AttackTaxonomy(mapping=mapping)


def _validate_numeric(value: str, feature_name: str, lineno: int) -> None:
    try:
        x = float(value)
    except ValueError:
        raise KddParseError(
            f"line {lineno}: feature {feature_name!r} is not numeric: {value!r}"
        ) from None
    if not math.isfinite(x) or x < 0:
        raise KddParseError(
            f"line {lineno}: feature {feature_name!r} must be finite and non-negative, got {value!r}"
        )


def parse_kdd_lines(
    lines: Iterable[str], split: str, schema: FeatureSchema = DEFAULT_SCHEMA
) -> LabeledDataset:
    categorical = set(schema.categorical_indices)
    names = schema.names
    records: list[ConnectionRecord] = []
    for lineno, raw in enumerate(lines, start=1):
        line = raw.rstrip("\r\n").rstrip()
        if not line:
            continue
        fields = line.split(",")
        if len(fields) != 43:
            raise KddParseError(f"line {lineno}: expected 43 fields, got {len(fields)}")
        for j in range(41):
            if j not in categorical:
                _validate_numeric(fields[j], names[j], lineno)
        try:
            difficulty = int(fields[42])
        except ValueError:
            raise KddParseError(
                f"line {lineno}: difficulty must be an integer, got {fields[42]!r}"
            ) from None
        if not 0 <= difficulty <= 21:
            raise KddParseError(
                f"line {lineno}: difficulty must be in 0..21, got {difficulty}"
            )
        records.append(
            ConnectionRecord(features=tuple(fields[:41]), label=fields[41], difficulty=difficulty)
        )
    if not records:
        raise KddParseError("no records found")
    return LabeledDataset(records=tuple(records), split=split)


def parse_kdd_file(
    path: str | Path, split: str = "train", schema: FeatureSchema = DEFAULT_SCHEMA
) -> LabeledDataset:
    """Parse an NSL-KDD text file (43 comma-separated fields per line)."""
    with open(path, "r", encoding="utf-8") as fh:
        return parse_kdd_lines(fh, split=split, schema=schema)


def write_kdd_file(ds: LabeledDataset, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in ds.records:
            fh.write(rec.to_line() + "\n")


def categorize(label: str, taxonomy: AttackTaxonomy) -> str:
    try:
        return taxonomy.mapping[label]
    except KeyError:
        raise UnknownLabelError(f"attack name not in taxonomy: {label!r}") from None


def categories(ds: LabeledDataset, taxonomy: AttackTaxonomy) -> np.ndarray:
    """Per-record category, in dataset order."""
    return np.array([categorize(r.label, taxonomy) for r in ds.records], dtype=object)


def binary_labels(ds: LabeledDataset, taxonomy: AttackTaxonomy) -> np.ndarray:
    """Collapse categories to the normal-vs-attack label space."""
    cats = categories(ds, taxonomy)
    return np.where(cats == "Normal", NORMAL, ATTACK).astype(object)


def fourclass_labels(ds: LabeledDataset, taxonomy: AttackTaxonomy) -> np.ndarray:
    """Category per record for an attacks-only dataset; Normal rows are rejected."""
    cats = categories(ds, taxonomy)
    bad = np.nonzero(cats == "Normal")[0]
    if bad.size:
        raise ValueError(f"normal record at row {bad[0]}; four-class labels need attacks only")
    return cats


# --- synthetic fixture -------------------------------------------------

# Per-category blob centers on a handful of discriminative features; all
# other continuous features sit near zero. Values chosen so the five
# blobs stay well separated after z-scoring.
_FIXTURE_CENTERS: dict[str, dict[str, float]] = {
    "Normal": {"duration": 50, "src_bytes": 1000, "dst_bytes": 2000, "count": 5,
               "srv_count": 6, "serror_rate": 0.01, "rerror_rate": 0.02,
               "dst_host_count": 30, "same_srv_rate": 0.9},
    "DoS": {"duration": 2, "src_bytes": 200, "dst_bytes": 0, "count": 400,
            "srv_count": 300, "serror_rate": 0.95, "rerror_rate": 0.02,
            "dst_host_count": 250, "same_srv_rate": 0.05},
    "Probe": {"duration": 8, "src_bytes": 40, "dst_bytes": 10, "count": 150,
              "srv_count": 20, "serror_rate": 0.3, "rerror_rate": 0.7,
              "dst_host_count": 180, "same_srv_rate": 0.2,
              "dst_host_srv_diff_host_rate": 0.8, "diff_srv_rate": 0.6},
    "R2L": {"duration": 400, "src_bytes": 3000, "dst_bytes": 500, "count": 3,
            "srv_count": 3, "serror_rate": 0.02, "rerror_rate": 0.05,
            "dst_host_count": 10, "hot": 20, "num_failed_logins": 4,
            "same_srv_rate": 0.8},
    "U2R": {"duration": 800, "src_bytes": 500, "dst_bytes": 300, "count": 2,
            "srv_count": 2, "serror_rate": 0.02, "rerror_rate": 0.02,
            "dst_host_count": 5, "hot": 8, "num_root": 8,
            "num_file_creations": 5, "same_srv_rate": 0.85},
}

_FIXTURE_CATEGORICALS: dict[str, tuple[str, str, str]] = {
    "Normal": ("tcp", "http", "SF"),
    "DoS": ("icmp", "ecr_i", "S0"),
    "Probe": ("tcp", "private", "REJ"),
    "R2L": ("tcp", "ftp", "SF"),
    "U2R": ("tcp", "telnet", "SF"),
}

_FIXTURE_ALT_CATEGORICALS = ("udp", "domain_u", "RSTR")

_FIXTURE_LABELS: dict[str, tuple[str, ...]] = {
    "Normal": ("normal",),
    "DoS": ("neptune", "smurf", "back"),
    "Probe": ("satan", "nmap", "portsweep"),
    "R2L": ("guess_passwd", "warezclient"),
    "U2R": ("rootkit", "buffer_overflow"),
}

_FIXTURE_BINARY_ON: dict[str, tuple[str, ...]] = {
    "Normal": ("logged_in",),
    "DoS": (),
    "Probe": (),
    "R2L": ("logged_in", "is_guest_login"),
    "U2R": ("logged_in", "root_shell"),
}


def make_fixture(
    n_per_class: int, seed: int, schema: FeatureSchema = DEFAULT_SCHEMA
) -> LabeledDataset:
    """Deterministic schema-valid dataset: one Gaussian blob per category."""
    if n_per_class < 1:
        raise ValueError("n_per_class must be >= 1")
    rng = np.random.default_rng(seed)
    binary_names = {e.name for e in schema.entries if e.kind == "binary"}
    records: list[ConnectionRecord] = []
    for cat in CATEGORIES:
        centers = _FIXTURE_CENTERS[cat]
        proto, service, flag = _FIXTURE_CATEGORICALS[cat]
        labels = _FIXTURE_LABELS[cat]
        on = set(_FIXTURE_BINARY_ON[cat])
        for i in range(n_per_class):
            fields: list[str] = []
            use_alt = rng.random() < 0.15
            for e in schema.entries:
                if e.kind == CATEGORICAL:
                    typical = {"protocol_type": proto, "service": service, "flag": flag}[e.name]
                    alt = _FIXTURE_ALT_CATEGORICALS[schema.categorical_indices.index(e.index)]
                    fields.append(alt if use_alt else typical)
                elif e.name in binary_names:
                    fields.append("1" if e.name in on else "0")
                else:
                    center = centers.get(e.name, 0.0)
                    sigma = max(0.02 * center, 0.01) if center else 0.0
                    value = max(0.0, center + sigma * rng.standard_normal())
                    if e.name == "num_outbound_cmds":
                        value = 0.0  # constant column, as in the real dumps
                    fields.append(f"{value:.3f}")
            records.append(
                ConnectionRecord(
                    features=tuple(fields),
                    label=labels[i % len(labels)],
                    difficulty=int(rng.integers(0, 22)),
                )
            )
    return LabeledDataset(records=tuple(records), split="fixture")
