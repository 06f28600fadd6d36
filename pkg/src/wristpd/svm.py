"""Soft-margin linear SVM trained from scratch, plus sigmoid calibration.

The binary trainer solves the dual problem by sequential minimal
optimisation with maximal-violating-pair working-set selection, on
internally standardised features.  It stops when the duality gap --
computed against the primal with the bias minimised exactly over the
hinge breakpoints -- falls below ``tol``.  No external solver is used.

Multi-class problems are handled one-vs-all: one binary machine per
class (classes in sorted order), prediction by largest margin, ties
resolved toward the lower label.  Margins are mapped to probabilities
with a per-class sigmoid ``P = 1 / (1 + exp(A*margin + B))`` fitted by
regularised Newton iterations on a held-in calibration subset.
"""

from __future__ import annotations

import logging

import numpy as np
from scipy.special import expit
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.exceptions import NotFittedError

from .errors import ValidationError

__all__ = [
    "LinearMarginSVM",
    "OneVsRestSVM",
    "fit_sigmoid",
    "calibrate_probability",
    "sigmoid_probability",
]

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# Validation helpers
# ---------------------------------------------------------------------------

def _check_matrix(X, n_features: int | None = None) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] == 0 or X.shape[1] == 0:
        raise ValidationError(f"expected a non-empty 2-D feature matrix, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise ValidationError("feature matrix contains NaN or infinite values")
    if n_features is not None and X.shape[1] != n_features:
        raise ValidationError(
            f"feature dimension mismatch: model expects {n_features}, got {X.shape[1]}"
        )
    return X


def _check_fitted(estimator, attr: str) -> None:
    if not hasattr(estimator, attr):
        raise NotFittedError(
            f"{type(estimator).__name__} is not fitted yet; call fit() first"
        )


# ---------------------------------------------------------------------------
# Dual solver
# ---------------------------------------------------------------------------

def _optimal_bias(margins: np.ndarray, y: np.ndarray, C: float) -> tuple[float, float]:
    """Exact minimiser of the primal hinge sum over the bias.

    The primal is piecewise linear in b, so its minimum lies at one of
    the breakpoints ``b_i = y_i - margin_i``.  Returns (b, hinge_sum).
    """
    cand = y - margins
    hinge = np.maximum(0.0, 1.0 - y[None, :] * (margins[None, :] + cand[:, None]))
    sums = hinge.sum(axis=1)
    best = int(np.argmin(sums))
    return float(cand[best]), float(C * sums[best])


def _solve_smo(
    Xs: np.ndarray,
    y: np.ndarray,
    C: float,
    tol: float,
    max_iter: int,
    dual_history: list[float] | None = None,
) -> tuple[np.ndarray, np.ndarray, float, float, int]:
    """Run SMO on pre-standardised features.

    Returns (alpha, w, b, dual_gap, n_iter).  Deterministic: the
    maximal-violating pair is unique up to argmax/argmin tie-breaking,
    which numpy resolves to the first index.  When ``dual_history`` is
    given, the dual objective is appended at every gap check.
    """
    n = Xs.shape[0]
    alpha = np.zeros(n)
    w = np.zeros(Xs.shape[1])
    xsq = np.einsum("ij,ij->i", Xs, Xs)
    pos = y > 0
    gap = np.inf
    it = 0
    while it < max_iter:
        # yg[i] = y_i - margin_i is -y_i * (gradient of the dual);
        # KKT optimality: max over the "up" set <= min over the "low" set.
        yg = y - Xs @ w
        up = (pos & (alpha < C)) | (~pos & (alpha > 0))
        low = (pos & (alpha > 0)) | (~pos & (alpha < C))
        yg_up = np.where(up, yg, -np.inf)
        yg_low = np.where(low, yg, np.inf)
        i = int(np.argmax(yg_up))
        j = int(np.argmin(yg_low))
        violation = yg_up[i] - yg_low[j]

        if it % 64 == 0 or violation < 1e-12:
            margins = Xs @ w
            _, hinge_sum = _optimal_bias(margins, y, C)
            primal = 0.5 * float(w @ w) + hinge_sum
            dual = float(alpha.sum()) - 0.5 * float(w @ w)
            gap = primal - dual
            if dual_history is not None:
                dual_history.append(dual)
            if gap <= tol or violation < 1e-12:
                break

        # Step along (alpha_i += y_i*d, alpha_j -= y_j*d), which preserves
        # sum(y*alpha) = 0; unconstrained optimum d = violation / ||x_i - x_j||^2.
        eta = max(xsq[i] + xsq[j] - 2.0 * float(Xs[i] @ Xs[j]), 1e-12)
        delta = violation / eta
        if pos[i]:
            d_lo, d_hi = -alpha[i], C - alpha[i]
        else:
            d_lo, d_hi = alpha[i] - C, alpha[i]
        if pos[j]:
            d_lo, d_hi = max(d_lo, alpha[j] - C), min(d_hi, alpha[j])
        else:
            d_lo, d_hi = max(d_lo, -alpha[j]), min(d_hi, C - alpha[j])
        delta = min(max(delta, d_lo), d_hi)
        if delta != 0.0:
            alpha[i] += y[i] * delta
            alpha[j] -= y[j] * delta
            w += delta * (Xs[i] - Xs[j])
        it += 1
    else:
        logger.warning("SMO hit the iteration cap (%d) with duality gap %.3g", max_iter, gap)

    # Bias: midpoint of the KKT interval, falling back to the exact primal
    # minimiser if a box-degenerate problem empties either side.
    yg = y - Xs @ w
    up = (pos & (alpha < C)) | (~pos & (alpha > 0))
    low = (pos & (alpha > 0)) | (~pos & (alpha < C))
    m_up = np.max(np.where(up, yg, -np.inf))
    m_low = np.min(np.where(low, yg, np.inf))
    if np.isfinite(m_up) and np.isfinite(m_low):
        b = 0.5 * (m_up + m_low)
    else:
        b, _ = _optimal_bias(Xs @ w, y, C)
    return alpha, w, float(b), float(gap), it


class LinearMarginSVM(BaseEstimator):
    """Binary soft-margin linear SVM with labels in {-1, +1}.

    Features are standardised internally (constant columns get unit
    scale); ``decision_function`` returns ``w . standardised(x) + b``.

    Parameters
    ----------
    C : float
        Soft-margin penalty, > 0.
    tol : float
        Duality-gap stopping threshold.
    max_iter : int
        Hard cap on SMO pair updates.
    """

    def __init__(self, C: float = 1.0, tol: float = 1e-4, max_iter: int = 1_000_000):
        self.C = C
        self.tol = tol
        self.max_iter = max_iter

    def fit(self, X, y) -> "LinearMarginSVM":
        X = _check_matrix(X)
        y = np.asarray(y, dtype=np.float64).ravel()
        if y.shape[0] != X.shape[0]:
            raise ValidationError("X and y must have the same number of rows")
        labels = set(np.unique(y))
        if not labels <= {-1.0, 1.0}:
            raise ValidationError(f"labels must be -1/+1, got {sorted(labels)}")
        if len(labels) < 2:
            raise ValidationError("training data contains a single class")
        if self.C <= 0:
            raise ValidationError(f"C must be positive, got {self.C}")

        self.mean_ = X.mean(axis=0)
        scale = X.std(axis=0)
        scale[scale == 0.0] = 1.0
        self.scale_ = scale
        Xs = (X - self.mean_) / self.scale_

        history: list[float] = []
        alpha, w, b, gap, it = _solve_smo(
            Xs, y, float(self.C), float(self.tol), int(self.max_iter), dual_history=history
        )
        self.dual_history_ = history
        self.coef_ = w
        self.intercept_ = b
        self.dual_coef_ = alpha
        self.dual_gap_ = gap
        self.n_iter_ = it
        self.n_features_in_ = X.shape[1]
        return self

    def decision_function(self, X) -> np.ndarray:
        _check_fitted(self, "coef_")
        X = _check_matrix(X, self.n_features_in_)
        return ((X - self.mean_) / self.scale_) @ self.coef_ + self.intercept_

    def predict(self, X) -> np.ndarray:
        """Sign of the margin; an exact zero counts as +1."""
        return np.where(self.decision_function(X) >= 0.0, 1.0, -1.0)


# ---------------------------------------------------------------------------
# Sigmoid calibration
# ---------------------------------------------------------------------------

def fit_sigmoid(
    margins: np.ndarray, positive: np.ndarray, max_newton: int = 100
) -> tuple[float, float]:
    """Fit A, B of ``P(+1 | m) = 1 / (1 + exp(A*m + B))`` by Newton descent.

    Targets are regularised by class counts -- ``(N+ + 1) / (N+ + 2)`` for
    positives, ``1 / (N- + 2)`` for negatives -- so the fit stays proper
    on small or separable calibration sets.  Uses damped Newton steps
    with backtracking on the cross-entropy objective.
    """
    margins = np.asarray(margins, dtype=np.float64).ravel()
    positive = np.asarray(positive, dtype=bool).ravel()
    if margins.shape != positive.shape or margins.shape[0] == 0:
        raise ValidationError("margins and labels must be equal-length and non-empty")
    n_pos = int(positive.sum())
    n_neg = positive.shape[0] - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValidationError("calibration requires both classes present")

    t = np.where(positive, (n_pos + 1.0) / (n_pos + 2.0), 1.0 / (n_neg + 2.0))

    def objective(a: float, b: float) -> float:
        z = a * margins + b
        return float(np.sum(t * z + np.logaddexp(0.0, -z)))

    ridge = 1e-12
    A = 0.0
    B = float(np.log((n_neg + 1.0) / (n_pos + 1.0)))
    fval = objective(A, B)
    for _ in range(max_newton):
        z = A * margins + B
        p = expit(-z)  # P(+1)
        d2 = p * expit(z)
        h11 = float((margins * margins * d2).sum()) + ridge
        h22 = float(d2.sum()) + ridge
        h21 = float((margins * d2).sum())
        d1 = t - p
        g1 = float((margins * d1).sum())  # dF/dA
        g2 = float(d1.sum())  # dF/dB
        if abs(g1) < 1e-5 and abs(g2) < 1e-5:
            break
        det = h11 * h22 - h21 * h21
        dA = -(h22 * g1 - h21 * g2) / det
        dB = -(-h21 * g1 + h11 * g2) / det
        descent = g1 * dA + g2 * dB
        step = 1.0
        while step >= 1e-10:
            new_f = objective(A + step * dA, B + step * dB)
            if new_f < fval + 1e-4 * step * descent:
                A, B, fval = A + step * dA, B + step * dB, new_f
                break
            step *= 0.5
        else:
            break  # line search exhausted; current point is good enough
    return float(A), float(B)


def sigmoid_probability(a: float, b: float, margins) -> np.ndarray:
    """Apply a fitted sigmoid to margins: ``1 / (1 + exp(a*m + b))``."""
    return expit(-(a * np.asarray(margins, dtype=np.float64) + b))


def calibrate_probability(model: LinearMarginSVM, X_val, y_val) -> tuple[float, float]:
    """Fit sigmoid parameters for a trained binary machine on held-out rows.

    ``y_val`` uses -1/+1 (anything > 0 counts as positive); raises if the
    validation labels are single-class.
    """
    y_val = np.asarray(y_val, dtype=np.float64).ravel()
    return fit_sigmoid(model.decision_function(X_val), y_val > 0)


# ---------------------------------------------------------------------------
# One-vs-all wrapper
# ---------------------------------------------------------------------------

def _calibration_subset(
    yb: np.ndarray, fraction: float, rng: np.random.Generator
) -> np.ndarray:
    """Indices of the last ``fraction`` of each class after a seeded shuffle."""
    picked = []
    for side in (1.0, -1.0):
        idx = np.flatnonzero(yb == side)
        perm = rng.permutation(idx)
        take = max(1, int(fraction * idx.shape[0]))
        picked.append(perm[-take:])
    return np.concatenate(picked)


class OneVsRestSVM(BaseEstimator, ClassifierMixin):
    """One binary :class:`LinearMarginSVM` per class, argmax prediction.

    Each machine trains on all rows (its class vs the rest) and gets a
    sigmoid calibrated on the last ``calibration_fraction`` of each side
    after a shuffle seeded by ``random_state``.

    Parameters
    ----------
    C, tol, max_iter :
        Passed to every binary machine.
    calibration_fraction : float
        Held-in share per class used to fit the sigmoids, in (0, 1).
    random_state : int
        Seed for the calibration-subset shuffle (training itself is
        deterministic regardless).
    """

    def __init__(
        self,
        C: float = 1.0,
        tol: float = 1e-4,
        max_iter: int = 1_000_000,
        calibration_fraction: float = 0.2,
        random_state: int = 42,
    ):
        self.C = C
        self.tol = tol
        self.max_iter = max_iter
        self.calibration_fraction = calibration_fraction
        self.random_state = random_state

    def fit(self, X, y) -> "OneVsRestSVM":
        X = _check_matrix(X)
        y = np.asarray(y).ravel()
        if y.shape[0] != X.shape[0]:
            raise ValidationError("X and y must have the same number of rows")
        if not 0.0 < self.calibration_fraction < 1.0:
            raise ValidationError(
                f"calibration_fraction must lie in (0, 1), got {self.calibration_fraction}"
            )
        classes = np.unique(y)
        if classes.shape[0] < 2:
            raise ValidationError(f"need at least two classes, got {classes.tolist()}")

        rng = np.random.default_rng(self.random_state)
        estimators = []
        calibrations = []
        for cls in classes:
            yb = np.where(y == cls, 1.0, -1.0)
            est = LinearMarginSVM(C=self.C, tol=self.tol, max_iter=self.max_iter).fit(X, yb)
            cal = _calibration_subset(yb, float(self.calibration_fraction), rng)
            calibrations.append(fit_sigmoid(est.decision_function(X[cal]), yb[cal] > 0))
            estimators.append(est)
        self.classes_ = classes
        self.estimators_ = estimators
        self.calibration_ = calibrations
        self.n_features_in_ = X.shape[1]
        return self

    def decision_function(self, X) -> np.ndarray:
        """Margins of every per-class machine, shape (n, n_classes)."""
        _check_fitted(self, "estimators_")
        X = _check_matrix(X, self.n_features_in_)
        return np.column_stack([est.decision_function(X) for est in self.estimators_])

    def predict(self, X) -> np.ndarray:
        """Class with the largest margin; ties go to the lower label."""
        margins = self.decision_function(X)
        return self.classes_[np.argmax(margins, axis=1)]

    def calibrated_probability(self, X) -> np.ndarray:
        """Per-class sigmoid probabilities, shape (n, n_classes).

        These are independent one-vs-rest probabilities; rows need not
        sum to one.
        """
        margins = self.decision_function(X)
        cols = [
            sigmoid_probability(a, b, margins[:, idx])
            for idx, (a, b) in enumerate(self.calibration_)
        ]
        return np.column_stack(cols)
