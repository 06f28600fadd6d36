"""Leave-one-patient-out evaluation, confusion matrices, and ROC/AUC.

The cross-validation unit is the patient: every fold trains on all
other patients' windows and tests on the held-out patient's, so no
individual contributes to both sides (checked at runtime).  Fold
confusion matrices pool by element-wise summation; for binary detectors
the ROC pools the per-fold probability scores and the AUC is reported
both pooled and averaged over folds.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from sklearn.base import clone

from .errors import ValidationError
from .features import FeatureVector, build_feature_vectors
from .ingest import Window
from .modelio import atomic_write_text

__all__ = [
    "lopo_folds",
    "ConfusionMatrix",
    "confusion_matrix",
    "RocCurve",
    "roc_auc",
    "FoldResult",
    "LopoResult",
    "run_lopo",
    "format_report",
    "write_report_files",
]


def lopo_folds(patient_ids) -> list[tuple[str, tuple[str, ...]]]:
    """One (test_patient, train_patients) pair per distinct patient.

    Folds are ordered by sorted patient id; needs at least two patients.
    """
    ids = sorted(set(patient_ids))
    if len(ids) < 2:
        raise ValidationError(f"leave-one-patient-out needs >= 2 patients, got {len(ids)}")
    return [(pid, tuple(p for p in ids if p != pid)) for pid in ids]


@dataclass(frozen=True)
class ConfusionMatrix:
    """Counts with rows = true label, columns = predicted label."""

    labels: tuple[int, ...]
    counts: np.ndarray

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.int64)
        L = len(self.labels)
        if counts.shape != (L, L):
            raise ValidationError(f"counts must be ({L}, {L}), got {counts.shape}")
        if np.any(counts < 0):
            raise ValidationError("confusion counts must be non-negative")
        object.__setattr__(self, "counts", counts)

    @property
    def n_total(self) -> int:
        return int(self.counts.sum())

    @property
    def accuracy(self) -> float:
        if self.n_total == 0:
            raise ValidationError("accuracy undefined for an empty confusion matrix")
        return float(np.trace(self.counts)) / self.n_total

    def recall(self, label: int) -> float:
        i = self.labels.index(label)
        row = self.counts[i].sum()
        return float(self.counts[i, i]) / row if row else float("nan")

    def __add__(self, other: "ConfusionMatrix") -> "ConfusionMatrix":
        if self.labels != other.labels:
            raise ValidationError("cannot pool confusion matrices with different labels")
        return ConfusionMatrix(self.labels, self.counts + other.counts)


def confusion_matrix(y_true, y_pred, labels) -> ConfusionMatrix:
    """Count (true, predicted) pairs over a fixed label set."""
    labels = tuple(int(l) for l in labels)
    index = {l: i for i, l in enumerate(labels)}
    y_true = np.asarray(y_true).ravel()
    y_pred = np.asarray(y_pred).ravel()
    if y_true.shape != y_pred.shape:
        raise ValidationError("y_true and y_pred must be equal length")
    counts = np.zeros((len(labels), len(labels)), dtype=np.int64)
    for t, p in zip(y_true, y_pred):
        if int(t) not in index or int(p) not in index:
            raise ValidationError(f"label outside {labels}: true={t}, pred={p}")
        counts[index[int(t)], index[int(p)]] += 1
    return ConfusionMatrix(labels, counts)


@dataclass(frozen=True)
class RocCurve:
    """Operating points from sweeping a decision threshold downward.

    ``thresholds[0]`` is +inf (the (0, 0) corner); ``fpr``/``tpr`` are
    cumulative rates at each distinct score.  ``auc`` integrates by the
    trapezoid rule, which credits score ties with half weight -- exactly
    the pairwise ranking statistic.
    """

    thresholds: np.ndarray
    fpr: np.ndarray
    tpr: np.ndarray
    auc: float


def roc_auc(scores, labels) -> RocCurve:
    """ROC curve and area for binary labels against real-valued scores.

    Parameters
    ----------
    scores : array-like of float
        Higher means more confidently positive.
    labels : array-like of {0, 1}

    Raises
    ------
    ValidationError
        If either class is absent (the area is undefined).
    """
    scores = np.asarray(scores, dtype=np.float64).ravel()
    labels = np.asarray(labels).ravel()
    if scores.shape != labels.shape or scores.shape[0] == 0:
        raise ValidationError("scores and labels must be equal-length and non-empty")
    if not set(np.unique(labels)) <= {0, 1}:
        raise ValidationError("labels must be 0/1")
    if not np.all(np.isfinite(scores)):
        raise ValidationError("scores must be finite")
    n_pos = int((labels == 1).sum())
    n_neg = labels.shape[0] - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValidationError("ROC requires both classes present")

    order = np.argsort(-scores, kind="stable")
    sorted_scores = scores[order]
    hits = (labels[order] == 1).astype(np.int64)
    # Collapse ties: keep the last index of each distinct score.
    boundary = np.flatnonzero(np.diff(sorted_scores) != 0)
    last = np.concatenate([boundary, [scores.shape[0] - 1]])
    tp = np.cumsum(hits)[last]
    fp = (last + 1) - tp

    tp = np.concatenate([[0], tp])
    fp = np.concatenate([[0], fp])
    # Integer trapezoid sum, exact before the single final division.
    area2 = int(np.sum((fp[1:] - fp[:-1]) * (tp[1:] + tp[:-1])))
    return RocCurve(
        thresholds=np.concatenate([[np.inf], sorted_scores[last]]),
        fpr=fp / n_neg,
        tpr=tp / n_pos,
        auc=area2 / (2.0 * n_pos * n_neg),
    )


# ---------------------------------------------------------------------------
# Leave-one-patient-out driver
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FoldResult:
    patient_id: str
    n_test: int
    confusion: ConfusionMatrix
    auc: float | None


@dataclass(frozen=True)
class LopoResult:
    detector_kind: str
    labels: tuple[int, ...]
    folds: tuple[FoldResult, ...]
    pooled: ConfusionMatrix
    pooled_auc: float | None
    mean_auc: float | None
    skipped: tuple[tuple[str, str], ...]
    roc: RocCurve | None = None

    @property
    def n_folds(self) -> int:
        return len(self.folds) + len(self.skipped)

    @property
    def accuracy(self) -> float:
        return self.pooled.accuracy


def run_lopo(
    windows: list[Window],
    detector,
    features: list[FeatureVector] | None = None,
) -> LopoResult:
    """Evaluate an unfitted detector by leave-one-patient-out.

    Windows are filtered to the detector's activity; features are built
    once (or taken pre-aligned with ``windows``) and reused across all
    folds.  A fold whose training side collapses to a single class is
    skipped and reported, not silently dropped.  Train/test patient
    disjointness is re-checked at runtime on every fold.
    """
    if features is None:
        keep = [w for w in windows if w.activity == detector.activity]
        feats = build_feature_vectors(keep, detector.wavelet_taps)
    else:
        if len(features) != len(windows):
            raise ValidationError("features and windows must align one-to-one")
        pairs = [(w, f) for w, f in zip(windows, features) if w.activity == detector.activity]
        keep = [w for w, _ in pairs]
        feats = [f for _, f in pairs]
    if not keep:
        raise ValidationError(f"no {detector.activity!r} windows to evaluate")

    labels = (0, 1, 2) if detector.kind == "rest_tremor" else (0, 1)
    binary = detector.kind != "rest_tremor"

    folds: list[FoldResult] = []
    skipped: list[tuple[str, str]] = []
    pooled = ConfusionMatrix(labels, np.zeros((len(labels), len(labels)), dtype=np.int64))
    pooled_scores: list[np.ndarray] = []
    pooled_truth: list[np.ndarray] = []
    fold_aucs: list[float] = []

    for test_pid, train_pids in lopo_folds([w.patient_id for w in keep]):
        test_idx = [i for i, w in enumerate(keep) if w.patient_id == test_pid]
        train_idx = [i for i, w in enumerate(keep) if w.patient_id != test_pid]
        train_windows = [keep[i] for i in train_idx]
        test_windows = [keep[i] for i in test_idx]

        leak = {w.patient_id for w in train_windows} & {w.patient_id for w in test_windows}
        if leak or {w.patient_id for w in train_windows} - set(train_pids):
            raise RuntimeError(f"patient leakage in fold {test_pid}: {sorted(leak)}")

        model = clone(detector)
        try:
            model.fit(train_windows, [feats[i] for i in train_idx])
        except ValidationError as exc:
            skipped.append((test_pid, str(exc)))
            continue

        test_feats = [feats[i] for i in test_idx]
        y_true = np.array([getattr(w, model.label_field) for w in test_windows])
        y_pred = model.predict(test_windows, test_feats)
        cm = confusion_matrix(y_true, y_pred, labels)
        pooled = pooled + cm

        auc = None
        if binary:
            scores = model.probability(test_windows, test_feats)
            pooled_scores.append(scores)
            pooled_truth.append(y_true)
            if len(set(y_true.tolist())) == 2:
                auc = roc_auc(scores, y_true).auc
                fold_aucs.append(auc)
        folds.append(FoldResult(test_pid, len(test_idx), cm, auc))

    curve = None
    mean_auc = None
    if binary and pooled_scores:
        truth = np.concatenate(pooled_truth)
        if len(set(truth.tolist())) == 2:
            curve = roc_auc(np.concatenate(pooled_scores), truth)
        if fold_aucs:
            mean_auc = float(np.mean(fold_aucs))
    return LopoResult(
        detector_kind=detector.kind,
        labels=labels,
        folds=tuple(folds),
        pooled=pooled,
        pooled_auc=curve.auc if curve is not None else None,
        mean_auc=mean_auc,
        skipped=tuple(skipped),
        roc=curve,
    )


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------

def _format_confusion(cm: ConfusionMatrix) -> list[str]:
    width = max(8, len(str(int(cm.counts.max(initial=0)))) + 2)
    head = "          " + "".join(f"pred {l}".rjust(width) for l in cm.labels)
    lines = [head]
    for i, label in enumerate(cm.labels):
        row = "".join(str(int(c)).rjust(width) for c in cm.counts[i])
        lines.append(f"true {label}    " + row)
    return lines


def format_report(result: LopoResult, provenance: dict | None = None) -> str:
    """Render a LOPO result as the plain-text evaluation report."""
    lines = ["# wristpd evaluation report"]
    for key in sorted(provenance or {}):
        lines.append(f"# {key} = {provenance[key]}")
    lines.append("")
    lines.append(f"detector = {result.detector_kind}")
    lines.append(
        f"leave-one-patient-out cross-validation over {result.n_folds} folds (one per patient)"
    )
    lines.append(f"windows evaluated = {result.pooled.n_total}")
    if result.skipped:
        for pid, reason in result.skipped:
            lines.append(f"skipped fold {pid}: {reason}")
    lines.append("")
    lines.append("pooled confusion matrix (rows = true, columns = predicted):")
    lines.extend(_format_confusion(result.pooled))
    lines.append("")
    lines.append(f"accuracy = {result.accuracy:.4f}")
    for label in result.labels:
        lines.append(f"recall[{label}] = {result.pooled.recall(label):.4f}")
    if result.pooled_auc is not None:
        lines.append(f"auc_pooled = {result.pooled_auc:.4f}")
    if result.mean_auc is not None:
        lines.append(f"auc_fold_mean = {result.mean_auc:.4f}")
    lines.append("")
    lines.append("per-fold results:")
    for fr in result.folds:
        auc_txt = f" auc={fr.auc:.4f}" if fr.auc is not None else ""
        lines.append(
            f"fold {fr.patient_id}: windows={fr.n_test} accuracy={fr.confusion.accuracy:.4f}"
            + auc_txt
        )
    return "\n".join(lines) + "\n"


def write_report_files(
    result: LopoResult, out_dir: str | Path, provenance: dict | None = None
) -> list[Path]:
    """Write report.txt, confusion.csv, folds.csv, and (binary) roc.csv.

    Outputs are deterministic: no timestamps, floats via ``repr``.
    Returns the written paths.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []

    report = out_dir / "report.txt"
    atomic_write_text(report, format_report(result, provenance))
    written.append(report)

    confusion = out_dir / "confusion.csv"
    rows = ["true_label," + ",".join(f"pred_{l}" for l in result.labels)]
    for i, label in enumerate(result.labels):
        rows.append(f"{label}," + ",".join(str(int(c)) for c in result.pooled.counts[i]))
    atomic_write_text(confusion, "\n".join(rows) + "\n")
    written.append(confusion)

    folds = out_dir / "folds.csv"
    rows = ["patient_id,n_windows,accuracy,auc"]
    for fr in result.folds:
        auc_txt = repr(fr.auc) if fr.auc is not None else ""
        rows.append(f"{fr.patient_id},{fr.n_test},{repr(fr.confusion.accuracy)},{auc_txt}")
    atomic_write_text(folds, "\n".join(rows) + "\n")
    written.append(folds)

    if result.roc is not None:
        roc_path = out_dir / "roc.csv"
        rows = ["threshold,fpr,tpr"]
        for thr, fpr, tpr in zip(result.roc.thresholds, result.roc.fpr, result.roc.tpr):
            rows.append(f"{repr(float(thr))},{repr(float(fpr))},{repr(float(tpr))}")
        atomic_write_text(roc_path, "\n".join(rows) + "\n")
        written.append(roc_path)
    return written
