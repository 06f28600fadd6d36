"""Per-window feature extraction from wavelet scale energies.

For each axis a of a window, ``cont_a`` holds the k detail-scale energies
and ``rel_a`` their normalisation

    rel_a[j] = cont_a[j] / sum_i cont_a[i]

(the approximation/DC energy is excluded from the sum, so gravity does
not dilute the distribution; an all-zero axis falls back to the uniform
distribution 1/k).  ``rel_avg`` averages the three axis distributions.
The walking-dyskinesia feature divides the two weaker axes' energies by
the dominant one per scale:

    w[j] = cont_b[j] * cont_c[j] / max(cont_d[j], eps)

where d is the axis with the largest total detail energy in the window.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ValidationError
from .ingest import Window
from .wavelet import dwt_forward, scale_energies

__all__ = [
    "AXES",
    "FeatureVector",
    "relative_energies",
    "mean_relative",
    "walking_axis_ratio",
    "build_feature_vector",
    "build_feature_vectors",
    "feature_names",
    "write_features_csv",
]

AXES = ("x", "y", "z")

RATIO_EPS = 1e-12


@dataclass(frozen=True)
class FeatureVector:
    """All per-window features, axis rows ordered x, y, z.

    Attributes
    ----------
    cont : ndarray, shape (3, k)
        Absolute detail-scale energies per axis.
    rel : ndarray, shape (3, k)
        Normalised scale distributions per axis (each row sums to 1).
    rel_avg : ndarray, shape (k,)
        Mean of the three ``rel`` rows.
    w : ndarray, shape (k,)
        Dominant-axis energy ratios for walking dyskinesia.
    degenerate_axes : tuple of int
        Indices of axes whose total detail energy was zero (their ``rel``
        row is the uniform fallback).
    """

    cont: np.ndarray
    rel: np.ndarray
    rel_avg: np.ndarray
    w: np.ndarray
    degenerate_axes: tuple[int, ...] = ()

    @property
    def k(self) -> int:
        return self.cont.shape[1]

    @property
    def cont_avg(self) -> np.ndarray:
        return self.cont.mean(axis=0)


def relative_energies(cont: np.ndarray) -> np.ndarray:
    """Normalise one axis's scale energies to a distribution.

    Energies must be non-negative; an all-zero vector maps to the uniform
    distribution so downstream classifiers never see NaN.
    """
    cont = np.asarray(cont, dtype=np.float64)
    if cont.ndim != 1 or cont.shape[0] == 0:
        raise ValidationError("cont must be a non-empty 1-D array")
    if np.any(cont < 0) or not np.all(np.isfinite(cont)):
        raise ValidationError("scale energies must be finite and non-negative")
    total = cont.sum()
    if total == 0.0:
        return np.full(cont.shape[0], 1.0 / cont.shape[0])
    return cont / total


def mean_relative(rel_x: np.ndarray, rel_y: np.ndarray, rel_z: np.ndarray) -> np.ndarray:
    """Average the three per-axis distributions (still sums to 1)."""
    rel = np.vstack([rel_x, rel_y, rel_z])
    return rel.mean(axis=0)


def walking_axis_ratio(
    cont_x: np.ndarray,
    cont_y: np.ndarray,
    cont_z: np.ndarray,
    eps: float = RATIO_EPS,
) -> np.ndarray:
    """Per-scale ratio ``w = cont_y * cont_z / max(cont_x, eps)``.

    ``cont_x`` plays the dominant-axis role (the gait axis), so during
    plain walking w stays near zero and off-axis oscillations inflate
    it.  Symmetric in y and z; ``eps`` keeps zero-energy levels finite.
    Callers pick which physical axis is dominant (see
    :func:`build_feature_vector`).
    """
    cont = np.vstack([cont_x, cont_y, cont_z]).astype(np.float64)
    if np.any(cont < 0):
        raise ValidationError("scale energies must be non-negative")
    return cont[1] * cont[2] / np.maximum(cont[0], eps)


def build_feature_vector(window: Window, wavelet_taps: int = 4) -> FeatureVector:
    """Transform one window's three axes and assemble every feature."""
    cont_rows = []
    degenerate = []
    for a, signal in enumerate((window.x, window.y, window.z)):
        energies = scale_energies(dwt_forward(signal, taps=wavelet_taps))
        cont_rows.append(energies.cont)
        if energies.cont.sum() == 0.0:
            degenerate.append(a)
    cont = np.vstack(cont_rows)
    rel = np.vstack([relative_energies(row) for row in cont])
    dominant = int(np.argmax(cont.sum(axis=1)))
    weaker = [a for a in range(3) if a != dominant]
    return FeatureVector(
        cont=cont,
        rel=rel,
        rel_avg=rel.mean(axis=0),
        w=walking_axis_ratio(cont[dominant], cont[weaker[0]], cont[weaker[1]]),
        degenerate_axes=tuple(degenerate),
    )


def build_feature_vectors(
    windows: list[Window], wavelet_taps: int = 4
) -> list[FeatureVector]:
    """Featurise a window list (order preserved)."""
    return [build_feature_vector(w, wavelet_taps) for w in windows]


# ---------------------------------------------------------------------------
# CSV export
# ---------------------------------------------------------------------------

def feature_names(k: int) -> list[str]:
    """Column names for the flattened feature block, scale index 1-based."""
    names = []
    for kind in ("cont", "rel"):
        for axis in AXES:
            names.extend(f"{kind}_{axis}_{j}" for j in range(1, k + 1))
    names.extend(f"rel_avg_{j}" for j in range(1, k + 1))
    names.extend(f"w_{j}" for j in range(1, k + 1))
    return names


def write_features_csv(
    path: str | Path,
    windows: list[Window],
    features: list[FeatureVector] | None = None,
    wavelet_taps: int = 4,
) -> None:
    """Write one row per window: identifiers, labels, then all features.

    Floats are serialised with ``repr`` so the file round-trips exactly.
    """
    if features is None:
        features = build_feature_vectors(windows, wavelet_taps)
    if len(features) != len(windows):
        raise ValidationError("features and windows must align one-to-one")
    if not windows:
        raise ValidationError("nothing to export: no windows")
    k = features[0].k
    header = ["patient_id", "activity", "tremor", "dyskinesia", "bradykinesia"]
    header += feature_names(k)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for win, fv in zip(windows, features):
            if fv.k != k:
                raise ValidationError("inconsistent scale count across windows")
            values = np.concatenate([fv.cont.ravel(), fv.rel.ravel(), fv.rel_avg, fv.w])
            writer.writerow(
                [win.patient_id, win.activity, win.tremor, win.dyskinesia, win.bradykinesia]
                + [repr(float(v)) for v in values]
            )
