"""Symptom detectors built on the one-vs-all margin machinery.

Four window-level detectors, each tied to one scripted activity:

* rest tremor (3 levels) -- trains on the axis-averaged relative scale
  distribution, predicts a level per axis, and thresholds the summed
  axis levels twice (> theta1 -> 2, > theta2 -> 1, else 0);
* rest dyskinesia -- trains on absolute and relative energies
  concatenated, votes per axis, any positive axis (count > threshold)
  flags the window;
* bradykinesia -- same per-axis voting on relative energies alone,
  during gross upper-limb movement;
* walking dyskinesia -- single machine on the dominant-axis energy
  ratios, no per-axis stage.

Binary detectors also expose a window probability: the per-axis
calibrated positive-class probabilities averaged over axes (or the
single calibrated probability for walking).
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator

from .errors import ValidationError
from .features import FeatureVector, build_feature_vectors
from .ingest import Window
from .svm import OneVsRestSVM, _check_fitted

__all__ = [
    "DETECTOR_KINDS",
    "combine_axis_predictions",
    "RestTremorDetector",
    "RestDyskinesiaDetector",
    "WalkingDyskinesiaDetector",
    "BradykinesiaDetector",
    "make_detector",
]


def combine_axis_predictions(axis_levels, theta1: int = 2, theta2: int = 0) -> int:
    """Collapse per-axis tremor levels into a window level.

    The axis levels are summed; a total above ``theta1`` means level 2,
    above ``theta2`` level 1, otherwise 0.  Requires
    ``0 <= theta2 < theta1 <= 6`` (three axes, max level 2 each).
    """
    _check_thresholds(theta1, theta2)
    total = int(np.sum(axis_levels))
    if total > theta1:
        return 2
    if total > theta2:
        return 1
    return 0


def _check_thresholds(theta1: int, theta2: int) -> None:
    if not 0 <= theta2 < theta1 <= 6:
        raise ValidationError(
            f"thresholds must satisfy 0 <= theta2 < theta1 <= 6, got theta1={theta1}, theta2={theta2}"
        )


def _prepare(detector, windows: list[Window], features) -> list[FeatureVector]:
    """Shared fit/predict input validation; returns aligned features."""
    if not windows:
        raise ValidationError("no windows supplied")
    bad = sorted({w.activity for w in windows} - {detector.activity})
    if bad:
        raise ValidationError(
            f"{detector.kind} expects {detector.activity!r} windows, also got {bad}"
        )
    if features is None:
        features = build_feature_vectors(windows, detector.wavelet_taps)
    if len(features) != len(windows):
        raise ValidationError("features and windows must align one-to-one")
    return features


class _SymptomDetector(BaseEstimator):
    """Shared plumbing: label extraction, fitting, axis-row batching."""

    kind: str
    activity: str
    label_field: str

    def _labels(self, windows: list[Window]) -> np.ndarray:
        return np.array([getattr(w, self.label_field) for w in windows], dtype=int)

    def _train_matrix(self, features: list[FeatureVector]) -> np.ndarray:
        raise NotImplementedError

    def fit(self, windows: list[Window], features: list[FeatureVector] | None = None):
        features = _prepare(self, windows, features)
        labels = self._labels(windows)
        if np.unique(labels).shape[0] < 2:
            raise ValidationError(
                f"training windows contain a single {self.label_field} class"
            )
        self.svm_ = OneVsRestSVM(
            C=self.C,
            calibration_fraction=self.calibration_fraction,
            random_state=self.random_state,
        ).fit(self._train_matrix(features), labels)
        self.k_ = features[0].k
        return self


class RestTremorDetector(_SymptomDetector):
    """Three-level rest-tremor scorer for resting-activity windows.

    Parameters
    ----------
    C : float
        Margin penalty for every underlying binary machine.
    theta1, theta2 : int
        Axis-sum thresholds, ``0 <= theta2 < theta1 <= 6``.
    wavelet_taps : int
        Daubechies filter length used when features are built here.
    calibration_fraction, random_state :
        Passed to the one-vs-all machinery.
    """

    kind = "rest_tremor"
    activity = "Resting"
    label_field = "tremor"

    def __init__(
        self,
        C: float = 1.0,
        theta1: int = 2,
        theta2: int = 0,
        wavelet_taps: int = 4,
        calibration_fraction: float = 0.2,
        random_state: int = 42,
    ):
        self.C = C
        self.theta1 = theta1
        self.theta2 = theta2
        self.wavelet_taps = wavelet_taps
        self.calibration_fraction = calibration_fraction
        self.random_state = random_state

    def fit(self, windows, features=None) -> "RestTremorDetector":
        _check_thresholds(self.theta1, self.theta2)
        return super().fit(windows, features)

    def _train_matrix(self, features):
        return np.vstack([fv.rel_avg for fv in features])

    def axis_levels(self, windows, features=None) -> np.ndarray:
        """Per-axis predicted levels, shape (n_windows, 3)."""
        _check_fitted(self, "svm_")
        features = _prepare(self, windows, features)
        rows = np.vstack([fv.rel for fv in features])  # (3n, k), axis-major per window
        return self.svm_.predict(rows).reshape(len(windows), 3)

    def predict(self, windows, features=None) -> np.ndarray:
        """Window tremor levels in {0, 1, 2}."""
        _check_thresholds(self.theta1, self.theta2)
        totals = self.axis_levels(windows, features).sum(axis=1)
        return np.select([totals > self.theta1, totals > self.theta2], [2, 1], default=0)


class _AxisVoteDetector(_SymptomDetector):
    """Binary detector that trains on averaged features and votes per axis."""

    def __init__(
        self,
        C: float = 1.0,
        axis_vote_threshold: int = 0,
        wavelet_taps: int = 4,
        calibration_fraction: float = 0.2,
        random_state: int = 42,
    ):
        self.C = C
        self.axis_vote_threshold = axis_vote_threshold
        self.wavelet_taps = wavelet_taps
        self.calibration_fraction = calibration_fraction
        self.random_state = random_state

    def _axis_rows(self, features: list[FeatureVector]) -> np.ndarray:
        raise NotImplementedError

    def _positive_column(self) -> int:
        return int(np.flatnonzero(self.svm_.classes_ == 1)[0])

    def axis_votes(self, windows, features=None) -> np.ndarray:
        """Per-axis binary predictions, shape (n_windows, 3)."""
        _check_fitted(self, "svm_")
        features = _prepare(self, windows, features)
        rows = self._axis_rows(features)
        return (self.svm_.predict(rows) == 1).astype(int).reshape(len(windows), 3)

    def predict(self, windows, features=None) -> np.ndarray:
        """1 when more than ``axis_vote_threshold`` axes vote positive."""
        positives = self.axis_votes(windows, features).sum(axis=1)
        return (positives > self.axis_vote_threshold).astype(int)

    def probability(self, windows, features=None) -> np.ndarray:
        """Mean over axes of the calibrated positive-class probability."""
        _check_fitted(self, "svm_")
        features = _prepare(self, windows, features)
        rows = self._axis_rows(features)
        probs = self.svm_.calibrated_probability(rows)[:, self._positive_column()]
        return probs.reshape(len(windows), 3).mean(axis=1)


class RestDyskinesiaDetector(_AxisVoteDetector):
    """Dyskinesia-at-rest flag; uses absolute and relative energies.

    Training rows concatenate the axis-averaged absolute energies with
    the axis-averaged relative distribution (2k features); prediction
    applies the same recipe per axis and flags the window when more than
    ``axis_vote_threshold`` axes come out positive (default: any axis).
    """

    kind = "rest_dyskinesia"
    activity = "Resting"
    label_field = "dyskinesia"

    def _train_matrix(self, features):
        return np.vstack([np.concatenate([fv.cont_avg, fv.rel_avg]) for fv in features])

    def _axis_rows(self, features):
        return np.vstack(
            [
                np.concatenate([fv.cont[a], fv.rel[a]])
                for fv in features
                for a in range(3)
            ]
        )


class BradykinesiaDetector(_AxisVoteDetector):
    """Gross-upper-limb bradykinesia flag on relative energies only."""

    kind = "bradykinesia"
    activity = "GrossUpperLimb"
    label_field = "bradykinesia"

    def _train_matrix(self, features):
        return np.vstack([fv.rel_avg for fv in features])

    def _axis_rows(self, features):
        return np.vstack([fv.rel for fv in features])


class WalkingDyskinesiaDetector(_SymptomDetector):
    """Dyskinesia-while-walking flag on dominant-axis energy ratios.

    A single machine on the per-window ratio vector w; no per-axis
    voting (the ratio already folds the three axes together).
    """

    kind = "walking_dyskinesia"
    activity = "Walking"
    label_field = "dyskinesia"

    def __init__(
        self,
        C: float = 1.0,
        wavelet_taps: int = 4,
        calibration_fraction: float = 0.2,
        random_state: int = 42,
    ):
        self.C = C
        self.wavelet_taps = wavelet_taps
        self.calibration_fraction = calibration_fraction
        self.random_state = random_state

    def _train_matrix(self, features):
        return np.vstack([fv.w for fv in features])

    def predict(self, windows, features=None) -> np.ndarray:
        _check_fitted(self, "svm_")
        features = _prepare(self, windows, features)
        return (self.svm_.predict(self._train_matrix(features)) == 1).astype(int)

    def probability(self, windows, features=None) -> np.ndarray:
        _check_fitted(self, "svm_")
        features = _prepare(self, windows, features)
        col = int(np.flatnonzero(self.svm_.classes_ == 1)[0])
        return self.svm_.calibrated_probability(self._train_matrix(features))[:, col]


DETECTOR_KINDS = {
    "rest_tremor": RestTremorDetector,
    "rest_dyskinesia": RestDyskinesiaDetector,
    "walking_dyskinesia": WalkingDyskinesiaDetector,
    "bradykinesia": BradykinesiaDetector,
}


def make_detector(kind: str, **params):
    """Instantiate a detector by kind name; unknown names raise."""
    if kind not in DETECTOR_KINDS:
        raise ValidationError(
            f"unknown detector kind {kind!r}; choose one of {sorted(DETECTOR_KINDS)}"
        )
    return DETECTOR_KINDS[kind](**params)
