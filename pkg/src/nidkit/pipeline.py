"""End-to-end orchestration for the two-stage hierarchy.

Stage 1 screens every connection with the autoencoder detector; rows
flagged as attacks flow into the stage-2 attack typer. Commands write
machine-readable artifacts (JSON/CSV) under one output directory and
are deterministic given (config, seed).
"""

from __future__ import annotations

import json
import logging
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import baselines as bl
from . import classifier as clf_mod
from . import detector as det_mod
from . import explore as explore_mod
from . import metrics as metrics_mod
from . import neural
from .dataset import (
    ATTACK,
    NORMAL,
    AttackTaxonomy,
    LabeledDataset,
    binary_labels,
    categories,
    fourclass_labels,
    load_taxonomy,
    parse_kdd_file,
)
from .preprocess import FeatureMatrix, FittedPipeline, fit_pipeline
from .resample import SmoteConfig, SvmSmoteConfig

log = logging.getLogger("nidkit")

REPORT_FORMAT_VERSION = 1
BINARY_CLASS_ORDER = (NORMAL, ATTACK)

BASELINE_NAMES = (
    "decision_tree",
    "random_forest",
    "naive_bayes",
    "svm",
    "adaboost",
    "gradient_boosting",
    "mlp",
)

BASELINE_DISPLAY = {
    "decision_tree": "Decision Tree",
    "random_forest": "Random Forest",
    "naive_bayes": "Naive Bayes",
    "svm": "SVM",
    "adaboost": "AdaBoost",
    "gradient_boosting": "Gradient Boosting",
    "mlp": "MLP",
}


class UnknownBaselineError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    train_path: str | None = None
    test_path: str | None = None
    taxonomy_path: str | None = None
    out_dir: str = "out"
    seed: int = 0
    calibration: str = "quantile"  # quantile | labeled_f1
    calibration_q: float = 0.95
    oversample: str = "on"         # on | off | both
    max_epochs: int = 200
    batch_size: int = 32
    patience: int = 6
    val_fraction: float = 0.15
    baselines: tuple[str, ...] = BASELINE_NAMES
    histogram_bins: int = 40
    histogram_features: tuple[str, ...] = explore_mod.DEFAULT_HISTOGRAM_FEATURES
    scatter_pairs: tuple[tuple[str, str], ...] = explore_mod.DEFAULT_SCATTER_PAIRS

    def train_config(self, loss: str, seed_offset: int = 0) -> neural.TrainConfig:
        return neural.TrainConfig(
            batch_size=self.batch_size,
            val_fraction=self.val_fraction,
            patience=self.patience,
            max_epochs=self.max_epochs,
            seed=self.seed + seed_offset,
            loss=loss,
        )


def _out(cfg: RunConfig) -> Path:
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _require(path: str | None, what: str) -> Path:
    if path is None:
        raise FileNotFoundError(f"missing required {what} path")
    p = Path(path)
    if not p.exists():
        raise FileNotFoundError(f"{what} file not found: {p}")
    return p


def _taxonomy(cfg: RunConfig) -> AttackTaxonomy:
    return load_taxonomy(cfg.taxonomy_path)


def _binary_stratified_split(
    labels: np.ndarray, fraction: float, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    train_parts, val_parts = [], []
    for cls in np.unique(labels):
        rows = np.nonzero(labels == cls)[0]
        perm = rng.permutation(rows.size)
        n_val = min(int(round(rows.size * fraction)), rows.size - 1)
        val_parts.append(rows[perm[:n_val]])
        train_parts.append(rows[perm[n_val:]])
    return np.sort(np.concatenate(train_parts)), np.sort(np.concatenate(val_parts))


def _load_or_fit_pipeline(cfg: RunConfig, train_ds: LabeledDataset) -> FittedPipeline:
    path = _out(cfg) / "pipeline.json"
    if path.exists():
        log.info("reusing fitted pipeline at %s", path)
        return FittedPipeline.from_json(path.read_text())
    pipe = fit_pipeline(train_ds)
    path.write_text(pipe.to_json() + "\n")
    log.info("fitted preprocessing pipeline -> %s", path)
    return pipe


# --- commands ------------------------------------------------------------


def run_explore(cfg: RunConfig) -> list[Path]:
    train = parse_kdd_file(_require(cfg.train_path, "train"), split="train")
    taxonomy = _taxonomy(cfg)
    out = _out(cfg) / "explore"
    written = explore_mod.write_exploration(
        train, taxonomy, out,
        features=cfg.histogram_features,
        scatter_pairs=cfg.scatter_pairs,
        bins=cfg.histogram_bins,
    )
    log.info("wrote %d exploration files under %s", len(written), out)
    return written


def run_train_binary(cfg: RunConfig) -> Path:
    t0 = time.perf_counter()
    train = parse_kdd_file(_require(cfg.train_path, "train"), split="train")
    taxonomy = _taxonomy(cfg)
    pipe = _load_or_fit_pipeline(cfg, train)
    fm = pipe.transform(train)
    bin_labels = binary_labels(train, taxonomy)
    fm = FeatureMatrix(values=fm.values, labels=bin_labels, provenance="train")
    if not (bin_labels == NORMAL).any():
        raise ValueError("training data has no normal rows; cannot train the detector")

    ss = np.random.SeedSequence(cfg.seed)
    split_rng, ae_rng = [np.random.default_rng(s) for s in ss.spawn(2)]
    train_idx, val_idx = _binary_stratified_split(bin_labels, cfg.val_fraction, split_rng)
    train_part = fm.select(train_idx)
    val_part = fm.select(val_idx)
    normals_train = train_part.select(train_part.labels == NORMAL)
    normals_val = val_part.select(val_part.labels == NORMAL)
    if normals_val.n_rows == 0:
        # degenerate tiny input: fall back to the training normals so the
        # early-stopping and calibration sets are never empty
        log.warning("validation split holds no normal rows; calibrating on training normals")
        normals_val = normals_train

    tcfg = cfg.train_config("mse")
    model, history = det_mod.train_on_normal(
        normals_train, det_mod.AutoencoderConfig(), tcfg, ae_rng, validation=normals_val
    )
    calib_set = normals_val if cfg.calibration == "quantile" else val_part
    alpha, calib = det_mod.calibrate_threshold(
        model, calib_set, method=cfg.calibration, q=cfg.calibration_q
    )
    det = det_mod.AnomalyDetector(model=model, alpha=alpha, calibration=calib)
    out = _out(cfg)
    (out / "detector.json").write_text(det.to_json() + "\n")
    report = {
        "alpha": alpha,
        "calibration": calib,
        "epochs": history.n_epochs,
        "best_epoch": history.best_epoch,
        "final_val_loss": history.val_loss[history.best_epoch],
        "n_train_normals": int(normals_train.n_rows),
        "n_val_rows": int(val_part.n_rows),
        "seconds": time.perf_counter() - t0,
    }
    (out / "train_binary_report.json").write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    log.info("trained detector (alpha=%.6g, %d epochs) -> %s", alpha, history.n_epochs, out)
    return out / "detector.json"


def _variants(cfg: RunConfig) -> list[str]:
    if cfg.oversample == "both":
        return ["plain", "oversampled"]
    return ["oversampled" if cfg.oversample == "on" else "plain"]


def classifier_filename(variant: str) -> str:
    return f"classifier_{variant}.json"


def run_train_multiclass(cfg: RunConfig) -> list[Path]:
    t0 = time.perf_counter()
    train = parse_kdd_file(_require(cfg.train_path, "train"), split="train")
    taxonomy = _taxonomy(cfg)
    pipe = _load_or_fit_pipeline(cfg, train)
    cats = categories(train, taxonomy)
    attack_rows = np.nonzero(cats != "Normal")[0]
    if attack_rows.size == 0:
        raise ValueError("training data has no attack rows")
    fm = pipe.transform(train)
    attacks = FeatureMatrix(
        values=fm.values[attack_rows], labels=cats[attack_rows], provenance="train"
    )

    out = _out(cfg)
    written: list[Path] = []
    info_all: dict[str, dict] = {}
    for variant in _variants(cfg):
        # same init/shuffle stream for both variants: the only difference
        # between them should be the oversampling step
        rng = np.random.default_rng(cfg.seed + 17)
        oversample = None
        if variant == "oversampled":
            oversample = SvmSmoteConfig(
                smote=SmoteConfig(seed=cfg.seed),
                svm=bl.LinearSvmConfig(seed=cfg.seed),
            )
        clf, info = clf_mod.train_fourclass(
            attacks,
            oversample=oversample,
            tcfg=cfg.train_config("cross_entropy"),
            rng=rng,
        )
        path = out / classifier_filename(variant)
        path.write_text(clf.to_json() + "\n")
        info_all[variant] = info
        written.append(path)
        if oversample is not None:
            log.info("oversampled class counts: %s", info.get("class_counts_after"))
        log.info("trained %s classifier (%d epochs) -> %s", variant, info["epochs"], path)
    info_all["seconds"] = {"total": time.perf_counter() - t0}
    (out / "train_multiclass_report.json").write_text(
        json.dumps(info_all, indent=2, sort_keys=True) + "\n"
    )
    return written


def _binary_report(cm: metrics_mod.ConfusionMatrix) -> dict:
    attack_pos = metrics_mod.binary_metrics(cm, positive_class=ATTACK)
    normal_pos = metrics_mod.binary_metrics(cm, positive_class=NORMAL)
    return {
        "classes": list(BINARY_CLASS_ORDER),
        "confusion": cm.counts.tolist(),
        "attack_positive": attack_pos.to_dict(),
        "normal_positive": normal_pos.to_dict(),
    }


def run_evaluate(cfg: RunConfig) -> Path:
    out = _out(cfg)
    test = parse_kdd_file(_require(cfg.test_path, "test"), split="test")
    taxonomy = _taxonomy(cfg)
    pipe = FittedPipeline.from_json(_require(str(out / "pipeline.json"), "pipeline").read_text())
    det = det_mod.AnomalyDetector.from_json(
        _require(str(out / "detector.json"), "detector").read_text()
    )

    timings: dict[str, float] = {}
    t0 = time.perf_counter()
    fm = pipe.transform(test)
    cats = categories(test, taxonomy)
    true_bin = binary_labels(test, taxonomy)
    timings["preprocess"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    errors, verdicts = det_mod.verdict_array(det, fm.values)
    timings["stage1"] = time.perf_counter() - t0
    (out / "scores.csv").write_text(det_mod.scores_to_csv(errors, verdicts))
    cm1 = metrics_mod.confusion(true_bin, verdicts, BINARY_CLASS_ORDER)
    stage1 = _binary_report(cm1)
    stage1["alpha"] = det.alpha
    stage1["calibration"] = det.calibration
    (out / "stage1_confusion.csv").write_text(cm1.to_csv())

    report: dict = {
        "format_version": REPORT_FORMAT_VERSION,
        "stage1": stage1,
        "stage2": {},
        "counts": {
            "test_rows": int(fm.n_rows),
            "stage1_predicted_attacks": int((verdicts == ATTACK).sum()),
        },
    }

    is_attack_true = true_bin == ATTACK
    is_attack_pred = verdicts == ATTACK
    if not is_attack_true.any():
        raise ValueError("test data has no attack rows; cannot evaluate stage 2")
    attack_labels = fourclass_labels(
        LabeledDataset(
            records=tuple(r for r, a in zip(test.records, is_attack_true) if a), split="test"
        ),
        taxonomy,
    )
    for variant in _variants(cfg):
        path = out / classifier_filename(variant)
        if not path.exists():
            raise FileNotFoundError(f"classifier file not found: {path}")
        clf = clf_mod.AttackClassifier.from_json(path.read_text())
        t0 = time.perf_counter()
        section: dict = {"trained_with_oversampling": clf.trained_with_oversampling}

        gt_values = fm.values[is_attack_true]
        predicted, _ = clf_mod.predict(clf, gt_values)
        gt_report = metrics_mod.multiclass_report(attack_labels, predicted, clf.class_order)
        section["ground_truth"] = gt_report.to_dict()
        (out / f"stage2_{variant}_groundtruth_confusion.csv").write_text(
            gt_report.confusion.to_csv()
        )

        survivors = is_attack_true & is_attack_pred
        false_positive_normals = int((is_attack_pred & ~is_attack_true).sum())
        section["false_positive_normals"] = false_positive_normals
        surv_labels = attack_labels[is_attack_pred[is_attack_true]]
        if surv_labels.size:
            surv_pred, _ = clf_mod.predict(clf, fm.values[survivors])
            surv_report = metrics_mod.multiclass_report(surv_labels, surv_pred, clf.class_order)
            section["survivors"] = surv_report.to_dict()
            (out / f"stage2_{variant}_survivors_confusion.csv").write_text(
                surv_report.confusion.to_csv()
            )
            surv_counts = {
                c: int((surv_pred == c).sum()) for c in clf.class_order
            }
        else:
            section["survivors"] = None
            surv_counts = {c: 0 for c in clf.class_order}
        dispositions = {"normal": int((verdicts == NORMAL).sum()),
                        "false_positive_normal": false_positive_normals, **surv_counts}
        section["dispositions"] = dispositions
        if sum(dispositions.values()) != fm.n_rows:
            raise RuntimeError("disposition counts do not conserve the test rows")
        timings[f"stage2_{variant}"] = time.perf_counter() - t0
        report["stage2"][variant] = section

    report["timings_seconds"] = timings
    path = out / "report.json"
    path.write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    log.info(
        "stage1 accuracy %.4f / f1 %.4f; %d predicted attacks of %d rows",
        stage1["attack_positive"]["accuracy"], stage1["attack_positive"]["f1"],
        report["counts"]["stage1_predicted_attacks"], fm.n_rows,
    )
    return path


def _fit_baseline(name: str, data: np.ndarray, labels: np.ndarray, cfg: RunConfig):
    """Returns a predict(values) -> label array callable."""
    if name == "decision_tree":
        model = bl.fit_tree(data, labels)
        return model.predict
    if name == "random_forest":
        model = bl.fit_forest(data, labels, bl.ForestConfig(seed=cfg.seed))
        return model.predict
    if name == "naive_bayes":
        model = bl.fit_gnb(data, labels)
        return model.predict
    if name == "svm":
        y = np.where(labels == ATTACK, 1.0, -1.0)
        model = bl.fit_linear_svm(data, y, bl.LinearSvmConfig(seed=cfg.seed))

        def svm_predict(values: np.ndarray) -> np.ndarray:
            return np.where(model.predict(values) > 0, ATTACK, NORMAL).astype(object)

        return svm_predict
    if name == "adaboost":
        model = bl.fit_adaboost(data, labels, bl.AdaBoostConfig(seed=cfg.seed))
        return model.predict
    if name == "gradient_boosting":
        model = bl.fit_gradient_boost(data, labels, bl.GradientBoostConfig(seed=cfg.seed))
        return model.predict
    if name == "mlp":
        model = bl.fit_mlp_baseline(
            data, labels, cfg.train_config("cross_entropy"),
            rng=np.random.default_rng(cfg.seed + 29),
        )
        return model.predict
    raise UnknownBaselineError(
        f"unknown baseline {name!r}; valid names: {', '.join(BASELINE_NAMES)}"
    )


def run_baselines(cfg: RunConfig) -> Path:
    for name in cfg.baselines:
        if name not in BASELINE_NAMES:
            raise UnknownBaselineError(
                f"unknown baseline {name!r}; valid names: {', '.join(BASELINE_NAMES)}"
            )
    train = parse_kdd_file(_require(cfg.train_path, "train"), split="train")
    test = parse_kdd_file(_require(cfg.test_path, "test"), split="test")
    taxonomy = _taxonomy(cfg)
    pipe = fit_pipeline(train)
    train_fm = pipe.transform(train)
    test_fm = pipe.transform(test)
    y_train = binary_labels(train, taxonomy)
    y_test = binary_labels(test, taxonomy)

    rows = []
    details: dict[str, dict] = {}
    for name in cfg.baselines:
        t0 = time.perf_counter()
        predictor = _fit_baseline(name, train_fm.values, y_train, cfg)
        predicted = predictor(test_fm.values)
        seconds = time.perf_counter() - t0
        cm = metrics_mod.confusion(y_test, predicted, BINARY_CLASS_ORDER)
        attack_pos = metrics_mod.binary_metrics(cm, positive_class=ATTACK)
        rows.append(
            (BASELINE_DISPLAY[name], attack_pos.accuracy, attack_pos.precision,
             attack_pos.recall, attack_pos.f1)
        )
        details[name] = _binary_report(cm)
        details[name]["seconds"] = seconds
        log.info("%s: accuracy %.4f f1 %.4f (%.1fs)", BASELINE_DISPLAY[name],
                 attack_pos.accuracy, attack_pos.f1, seconds)

    out = _out(cfg)
    lines = ["model,accuracy,precision,recall,f1"]
    for display, acc, prec, rec, f1 in rows:
        lines.append(f"{display},{acc:.4f},{prec:.4f},{rec:.4f},{f1:.4f}")
    csv_path = out / "baselines.csv"
    csv_path.write_text("\n".join(lines) + "\n")
    (out / "baselines.json").write_text(json.dumps(details, indent=2, sort_keys=True) + "\n")
    return csv_path


def run_pipeline(cfg: RunConfig) -> Path:
    run_train_binary(cfg)
    run_train_multiclass(cfg)
    return run_evaluate(cfg)
