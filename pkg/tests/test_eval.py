"""Cross-validation, confusion-matrix and ROC tests.

AUC values are checked against a brute-force pairwise oracle (every
positive/negative score pair, ties get half credit), which the
trapezoid integration must match exactly.
"""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wristpd import (
    ConfusionMatrix,
    RestDyskinesiaDetector,
    ValidationError,
    WalkingDyskinesiaDetector,
    Window,
    confusion_matrix,
    lopo_folds,
    roc_auc,
    run_lopo,
    write_report_files,
    format_report,
)

RATE = 50.0
N = 512


def pairwise_auc(scores, labels):
    """O(n^2) ranking statistic: P(score+ > score-) + 0.5 P(tie)."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    pos = scores[labels == 1]
    neg = scores[labels == 0]
    greater = int(np.sum(pos[:, None] > neg[None, :]))
    equal = int(np.sum(pos[:, None] == neg[None, :]))
    return (2 * greater + equal) / (2.0 * len(pos) * len(neg))


def walking_window(pid, dyskinesia, seed):
    rng = np.random.default_rng(seed)
    t = np.arange(N) / RATE
    gait = 0.3 * np.sin(2.0 * np.pi * 2.0 * t + rng.uniform(0, 6.28))
    wiggle = 0.15 * np.sin(2.0 * np.pi * 1.4 * t + rng.uniform(0, 6.28))
    noise = 0.01 * rng.normal(size=(3, N))
    x = noise[0] + (wiggle if dyskinesia else 0.0)
    y = noise[1] + (wiggle if dyskinesia else 0.0)
    z = noise[2] + gait
    return Window(pid, "Walking", 0.0, N / RATE, x, y, z, dyskinesia=dyskinesia)


def walking_patient(pid, seed, labels=(0, 1, 0, 1, 0, 1)):
    return [walking_window(pid, d, seed * 1000 + i) for i, d in enumerate(labels)]


# ---------------------------------------------------------------------------
# Fold enumeration
# ---------------------------------------------------------------------------

def test_lopo_folds_enumeration():
    folds = lopo_folds(["B", "A", "C", "A"])
    assert folds == [
        ("A", ("B", "C")),
        ("B", ("A", "C")),
        ("C", ("A", "B")),
    ]


def test_lopo_folds_one_per_patient():
    ids = [f"p{i:02d}" for i in range(19)]
    folds = lopo_folds(ids * 3)
    assert len(folds) == 19
    for test_pid, train_pids in folds:
        assert test_pid not in train_pids
        assert len(train_pids) == 18


def test_lopo_folds_needs_two_patients():
    with pytest.raises(ValidationError):
        lopo_folds(["solo", "solo"])


# ---------------------------------------------------------------------------
# Confusion matrices
# ---------------------------------------------------------------------------

def test_confusion_matrix_counts_pairs():
    cm = confusion_matrix([0, 1, 2, 1, 0], [0, 2, 2, 1, 1], labels=(0, 1, 2))
    np.testing.assert_array_equal(cm.counts, [[1, 1, 0], [0, 1, 1], [0, 0, 1]])
    assert cm.n_total == 5
    assert cm.accuracy == pytest.approx(3 / 5)
    assert cm.recall(0) == pytest.approx(0.5)


def test_confusion_matrix_rejects_unknown_labels():
    with pytest.raises(ValidationError):
        confusion_matrix([0, 3], [0, 0], labels=(0, 1, 2))
    with pytest.raises(ValidationError):
        confusion_matrix([0, 1], [0], labels=(0, 1))


def test_confusion_matrix_pooling():
    a = confusion_matrix([0, 1], [0, 1], labels=(0, 1))
    b = confusion_matrix([0, 0, 1], [1, 0, 1], labels=(0, 1))
    pooled = a + b
    np.testing.assert_array_equal(pooled.counts, [[2, 1], [0, 2]])
    with pytest.raises(ValidationError):
        a + confusion_matrix([0], [0], labels=(0, 1, 2))


def test_empty_confusion_matrix_has_no_accuracy():
    cm = ConfusionMatrix((0, 1), np.zeros((2, 2), dtype=int))
    with pytest.raises(ValidationError):
        cm.accuracy
    with pytest.raises(ValidationError):
        ConfusionMatrix((0, 1), np.zeros((3, 3), dtype=int))
    with pytest.raises(ValidationError):
        ConfusionMatrix((0, 1), np.array([[1, -1], [0, 0]]))


def test_three_level_confusion_accuracy_arithmetic():
    # a 3x3 matrix with heavy diagonal dominance in class 0, taken from a
    # realistic level-distribution: accuracy is the diagonal sum over total
    counts = np.array([[1531, 28, 8], [390, 159, 10], [22, 52, 218]])
    y_true = np.repeat([0, 0, 0, 1, 1, 1, 2, 2, 2], counts.ravel())
    y_pred = np.tile([0, 1, 2], 3).repeat(counts.ravel())
    cm = confusion_matrix(y_true, y_pred, labels=(0, 1, 2))
    np.testing.assert_array_equal(cm.counts, counts)
    assert cm.n_total == 2418
    assert cm.accuracy == (1531 + 159 + 218) / 2418
    assert cm.recall(2) == 218 / 292


# ---------------------------------------------------------------------------
# ROC / AUC
# ---------------------------------------------------------------------------

def test_roc_auc_textbook_example():
    curve = roc_auc([0.1, 0.4, 0.35, 0.8], [0, 0, 1, 1])
    assert curve.auc == 0.75
    assert curve.thresholds[0] == np.inf
    assert curve.fpr[0] == 0.0 and curve.tpr[0] == 0.0
    assert curve.fpr[-1] == 1.0 and curve.tpr[-1] == 1.0


def test_roc_auc_perfect_and_inverted():
    assert roc_auc([0.1, 0.2, 0.8, 0.9], [0, 0, 1, 1]).auc == 1.0
    assert roc_auc([0.9, 0.8, 0.2, 0.1], [0, 0, 1, 1]).auc == 0.0
    assert roc_auc([0.5, 0.5, 0.5, 0.5], [0, 0, 1, 1]).auc == 0.5


def test_roc_curve_is_monotone_staircase():
    rng = np.random.default_rng(41)
    scores = np.round(rng.normal(size=200), 1)  # heavy ties
    labels = (scores + rng.normal(size=200) > 0).astype(int)
    curve = roc_auc(scores, labels)
    assert np.all(np.diff(curve.fpr) >= 0)
    assert np.all(np.diff(curve.tpr) >= 0)
    assert np.all(np.diff(curve.thresholds) < 0)  # strictly decreasing after inf
    assert len(curve.thresholds) == len(np.unique(scores)) + 1


def test_roc_auc_matches_pairwise_oracle_seeded():
    rng = np.random.default_rng(43)
    for _ in range(25):
        n = int(rng.integers(2, 400))
        scores = rng.choice([0.0, 0.1, 0.25, 0.5, 0.75, 1.0], size=n)
        labels = rng.integers(0, 2, size=n)
        if len(set(labels.tolist())) < 2:
            continue
        assert roc_auc(scores, labels).auc == pairwise_auc(scores, labels)


@settings(max_examples=60, deadline=None)
@given(
    st.lists(
        st.tuples(st.sampled_from([0.0, 0.25, 0.5, 0.75, 1.0]), st.integers(0, 1)),
        min_size=2,
        max_size=60,
    ).filter(lambda rows: len({l for _, l in rows}) == 2)
)
def test_roc_auc_matches_pairwise_oracle(rows):
    scores = [s for s, _ in rows]
    labels = [l for _, l in rows]
    assert roc_auc(scores, labels).auc == pairwise_auc(scores, labels)


def test_roc_auc_validation():
    with pytest.raises(ValidationError):
        roc_auc([0.1, 0.2], [1, 1])  # single class
    with pytest.raises(ValidationError):
        roc_auc([0.1], [0, 1])
    with pytest.raises(ValidationError):
        roc_auc([], [])
    with pytest.raises(ValidationError):
        roc_auc([0.1, np.nan], [0, 1])
    with pytest.raises(ValidationError):
        roc_auc([0.1, 0.2], [0, 2])


# ---------------------------------------------------------------------------
# LOPO driver
# ---------------------------------------------------------------------------

def test_run_lopo_identical_patients_give_identical_folds():
    windows = walking_patient("pA", seed=1) + [
        Window("pB", w.activity, w.start, w.end, w.x, w.y, w.z, dyskinesia=w.dyskinesia)
        for w in walking_patient("pA", seed=1)
    ]
    result = run_lopo(windows, WalkingDyskinesiaDetector())
    assert [f.patient_id for f in result.folds] == ["pA", "pB"]
    np.testing.assert_array_equal(result.folds[0].confusion.counts, result.folds[1].confusion.counts)
    assert result.folds[0].auc == result.folds[1].auc


def test_run_lopo_pools_fold_matrices():
    windows = []
    for i, pid in enumerate(["pA", "pB", "pC"]):
        windows.extend(walking_patient(pid, seed=10 + i))
    result = run_lopo(windows, WalkingDyskinesiaDetector())
    assert result.n_folds == 3
    summed = sum((f.confusion.counts for f in result.folds), np.zeros((2, 2), dtype=np.int64))
    np.testing.assert_array_equal(result.pooled.counts, summed)
    assert result.pooled.n_total == len(windows)
    assert result.pooled_auc is not None
    assert result.roc is not None


def test_run_lopo_skips_single_class_training_folds():
    # pA is all-negative; the fold testing pB must train on pA alone and
    # gets skipped with a reason, while the pA fold still runs
    windows = walking_patient("pA", seed=21, labels=(0, 0, 0, 0)) + walking_patient(
        "pB", seed=22
    )
    result = run_lopo(windows, WalkingDyskinesiaDetector())
    assert [f.patient_id for f in result.folds] == ["pA"]
    assert len(result.skipped) == 1
    assert result.skipped[0][0] == "pB"
    assert "single" in result.skipped[0][1]
    assert result.n_folds == 2


def test_run_lopo_filters_other_activities():
    windows = []
    for i, pid in enumerate(["pA", "pB"]):
        windows.extend(walking_patient(pid, seed=30 + i))
    windows.append(
        Window("pA", "Resting", 0.0, N / RATE, *np.zeros((3, N)), dyskinesia=0)
    )
    result = run_lopo(windows, WalkingDyskinesiaDetector())
    assert result.pooled.n_total == len(windows) - 1
    with pytest.raises(ValidationError, match="no 'GrossUpperLimb'"):
        from wristpd import BradykinesiaDetector

        run_lopo(windows, BradykinesiaDetector())


def test_run_lopo_leaves_detector_unfitted():
    windows = walking_patient("pA", seed=31) + walking_patient("pB", seed=32)
    detector = WalkingDyskinesiaDetector()
    run_lopo(windows, detector)
    assert not hasattr(detector, "svm_")  # folds fit clones only


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------

@pytest.fixture(scope="module")
def small_lopo_result():
    windows = []
    for i, pid in enumerate(["pA", "pB", "pC"]):
        windows.extend(walking_patient(pid, seed=50 + i))
    return run_lopo(windows, WalkingDyskinesiaDetector())


def test_format_report_structure(small_lopo_result):
    text = format_report(small_lopo_result, provenance={"tool": "wristpd test"})
    assert text.startswith("# wristpd evaluation report\n# tool = wristpd test\n")
    assert "leave-one-patient-out cross-validation over 3 folds (one per patient)" in text
    assert "accuracy = " in text
    assert "auc_pooled = " in text
    assert "auc_fold_mean = " in text
    assert "fold pA:" in text and "fold pC:" in text
    assert "pred 0" in text and "true 1" in text


def test_write_report_files_deterministic(tmp_path, small_lopo_result):
    first = tmp_path / "first"
    second = tmp_path / "second"
    names = [p.name for p in write_report_files(small_lopo_result, first)]
    assert names == ["report.txt", "confusion.csv", "folds.csv", "roc.csv"]
    write_report_files(small_lopo_result, second)
    for name in names:
        assert (first / name).read_bytes() == (second / name).read_bytes()
    confusion = (first / "confusion.csv").read_text().splitlines()
    assert confusion[0] == "true_label,pred_0,pred_1"
    assert len(confusion) == 3
    roc = (first / "roc.csv").read_text().splitlines()
    assert roc[0] == "threshold,fpr,tpr"
    assert roc[1].startswith("inf,0.0,0.0")
