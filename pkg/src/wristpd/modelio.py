"""Plain-text persistence for fitted detectors.

A model file is a ``key = value`` document: a ``format`` line, comment
lines (``#``) carrying provenance (tool version, flags, seed -- never
timestamps), the detector's constructor parameters, and one block of
standardisation/weight/sigmoid arrays per class.  Floats are written
with ``repr`` so save -> load -> save reproduces the file byte for byte.
Acceleration is expected in g; the file records that unit.
"""

from __future__ import annotations

import os
import tempfile
from pathlib import Path

import numpy as np

from ._version import __version__
from .errors import ParseError, ValidationError
from .svm import LinearMarginSVM, OneVsRestSVM
from .symptoms import DETECTOR_KINDS, make_detector

__all__ = ["save_detector", "load_detector", "atomic_write_text"]

_FORMAT = "wristpd-detector/1"

_INT_KEYS = {
    "theta1",
    "theta2",
    "wavelet_taps",
    "random_state",
    "axis_vote_threshold",
    "k",
    "n_features",
}
_FLOAT_KEYS = {"C", "calibration_fraction"}


def atomic_write_text(path: str | Path, text: str) -> None:
    """Write a file via a same-directory temp file and atomic rename."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _fmt_vector(values: np.ndarray) -> str:
    return ",".join(repr(float(v)) for v in np.asarray(values, dtype=np.float64).ravel())


def _parse_vector(text: str) -> np.ndarray:
    try:
        return np.array([float(part) for part in text.split(",")], dtype=np.float64)
    except ValueError as exc:
        raise ParseError(f"bad float vector: {exc}") from exc


def save_detector(detector, path: str | Path, provenance: dict | None = None) -> None:
    """Serialise a fitted detector (atomically) to a text model file.

    Parameters
    ----------
    detector :
        A fitted detector from :mod:`wristpd.symptoms`.
    path : str or Path
    provenance : dict, optional
        Flag name -> value pairs echoed as header comments.
    """
    if not hasattr(detector, "svm_"):
        raise ValidationError("detector is not fitted; nothing to save")
    svm: OneVsRestSVM = detector.svm_

    lines = [f"format = {_FORMAT}", f"# tool = wristpd {__version__}"]
    for key in sorted(provenance or {}):
        lines.append(f"# {key} = {provenance[key]}")
    lines.append(f"kind = {detector.kind}")
    lines.append(f"activity = {detector.activity}")
    lines.append("acceleration_unit = g")
    for key, value in sorted(detector.get_params().items()):
        if key in _FLOAT_KEYS:
            lines.append(f"{key} = {repr(float(value))}")
        else:
            lines.append(f"{key} = {int(value)}")
    lines.append(f"k = {detector.k_}")
    lines.append(f"n_features = {svm.n_features_in_}")
    lines.append("classes = " + ",".join(str(int(c)) for c in svm.classes_))
    for cls, est, (a, b) in zip(svm.classes_, svm.estimators_, svm.calibration_):
        prefix = f"class_{int(cls)}"
        lines.append(f"{prefix}_mean = {_fmt_vector(est.mean_)}")
        lines.append(f"{prefix}_scale = {_fmt_vector(est.scale_)}")
        lines.append(f"{prefix}_coef = {_fmt_vector(est.coef_)}")
        lines.append(f"{prefix}_intercept = {repr(float(est.intercept_))}")
        lines.append(f"{prefix}_sigmoid_a = {repr(float(a))}")
        lines.append(f"{prefix}_sigmoid_b = {repr(float(b))}")
    atomic_write_text(path, "\n".join(lines) + "\n")


def _read_pairs(path: Path) -> dict[str, str]:
    pairs: dict[str, str] = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise ParseError(f"{path.name}: expected 'key = value'", line=lineno)
            pairs[key.strip()] = value.strip()
    return pairs


def load_detector(path: str | Path):
    """Reconstruct a fitted detector from a model file.

    The returned object predicts identically to the one that was saved;
    re-saving it reproduces the input file byte for byte.
    """
    path = Path(path)
    pairs = _read_pairs(path)

    if pairs.get("format") != _FORMAT:
        raise ParseError(f"{path.name}: not a {_FORMAT} file (format = {pairs.get('format')!r})")
    kind = pairs.get("kind")
    if kind not in DETECTOR_KINDS:
        raise ParseError(f"{path.name}: unknown detector kind {kind!r}")

    def need(key: str) -> str:
        if key not in pairs:
            raise ParseError(f"{path.name}: missing key {key!r}")
        return pairs[key]

    params = {}
    for key in DETECTOR_KINDS[kind]().get_params():
        raw = need(key)
        try:
            params[key] = int(raw) if key in _INT_KEYS else float(raw)
        except ValueError as exc:
            raise ParseError(f"{path.name}: bad value for {key!r}: {raw!r}") from exc
    detector = make_detector(kind, **params)

    classes = np.array([int(c) for c in need("classes").split(",")])
    n_features = int(need("n_features"))
    svm = OneVsRestSVM(
        C=params["C"],
        calibration_fraction=params["calibration_fraction"],
        random_state=params["random_state"],
    )
    estimators = []
    calibrations = []
    for cls in classes:
        prefix = f"class_{int(cls)}"
        est = LinearMarginSVM(C=params["C"])
        est.mean_ = _parse_vector(need(f"{prefix}_mean"))
        est.scale_ = _parse_vector(need(f"{prefix}_scale"))
        est.coef_ = _parse_vector(need(f"{prefix}_coef"))
        est.intercept_ = float(need(f"{prefix}_intercept"))
        est.n_features_in_ = n_features
        if not (est.mean_.shape == est.scale_.shape == est.coef_.shape == (n_features,)):
            raise ParseError(f"{path.name}: inconsistent vector lengths for {prefix}")
        estimators.append(est)
        calibrations.append(
            (float(need(f"{prefix}_sigmoid_a")), float(need(f"{prefix}_sigmoid_b")))
        )
    svm.classes_ = classes
    svm.estimators_ = estimators
    svm.calibration_ = calibrations
    svm.n_features_in_ = n_features

    detector.svm_ = svm
    detector.k_ = int(need("k"))
    return detector
