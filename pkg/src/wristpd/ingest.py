"""Loading and windowing of wrist accelerometer recordings.

Two CSV inputs drive the pipeline:

* recording files with header ``t,x,y,z`` -- one tri-axial sample per row,
  acceleration in g, timestamps in seconds;
* a label file with header
  ``patient_id,start,end,activity,tremor,dyskinesia,bradykinesia`` -- one
  annotated task segment per row, tremor scored 0-4 by a rater and binned
  to three levels here.

Recordings are cut into fixed-duration, half-overlapping windows inside
each task segment; every window is resampled onto a power-of-two grid so
the wavelet stage sees a uniform length.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ParseError, ValidationError
from .wavelet import next_pow2, resample_to_pow2

__all__ = [
    "ACTIVITIES",
    "Recording",
    "TaskSegment",
    "Window",
    "bin_score",
    "parse_recording",
    "parse_labels",
    "segment_windows",
    "load_cohort",
    "windows_from_cohort",
]

logger = logging.getLogger(__name__)

ACTIVITIES = (
    "Resting",
    "GrossUpperLimb",
    "FineUpperLimb",
    "PeriodicHand",
    "Walking",
)

_RECORDING_HEADER = ["t", "x", "y", "z"]
_LABELS_HEADER = [
    "patient_id",
    "start",
    "end",
    "activity",
    "tremor",
    "dyskinesia",
    "bradykinesia",
]


@dataclass(frozen=True)
class Recording:
    """One continuous tri-axial recording for one patient.

    Attributes
    ----------
    patient_id : str
    t : ndarray, shape (n,)
        Strictly increasing timestamps in seconds.
    xyz : ndarray, shape (n, 3)
        Acceleration samples in g, columns x, y, z.
    nominal_rate : float
        Nominal sampling rate in Hz (used to size windows).
    """

    patient_id: str
    t: np.ndarray
    xyz: np.ndarray
    nominal_rate: float = 50.0

    def __post_init__(self):
        t = np.asarray(self.t, dtype=np.float64)
        xyz = np.asarray(self.xyz, dtype=np.float64)
        if t.ndim != 1 or t.shape[0] == 0:
            raise ValidationError("recording must contain at least one sample")
        if xyz.shape != (t.shape[0], 3):
            raise ValidationError(
                f"xyz must have shape ({t.shape[0]}, 3), got {xyz.shape}"
            )
        if t.shape[0] > 1 and np.any(np.diff(t) <= 0):
            bad = int(np.argmax(np.diff(t) <= 0)) + 1
            raise ValidationError(
                f"timestamps must be strictly increasing (violated at sample {bad})"
            )
        if self.nominal_rate <= 0:
            raise ValidationError("nominal_rate must be positive")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "xyz", xyz)

    @property
    def n_samples(self) -> int:
        return self.t.shape[0]

    @property
    def duration(self) -> float:
        return float(self.t[-1] - self.t[0])


@dataclass(frozen=True)
class TaskSegment:
    """A labelled span of a recording during one scripted activity.

    ``tremor`` is the binned level (0 none, 1 slight, 2 marked);
    ``dyskinesia`` and ``bradykinesia`` are presence flags.
    """

    patient_id: str
    start: float
    end: float
    activity: str
    tremor: int = 0
    dyskinesia: int = 0
    bradykinesia: int = 0

    def __post_init__(self):
        if not self.start < self.end:
            raise ValidationError(
                f"segment start must precede end, got [{self.start}, {self.end}]"
            )
        if self.activity not in ACTIVITIES:
            raise ValidationError(
                f"unknown activity {self.activity!r}; expected one of {ACTIVITIES}"
            )
        if self.tremor not in (0, 1, 2):
            raise ValidationError(f"binned tremor level must be 0, 1 or 2, got {self.tremor}")
        if self.dyskinesia not in (0, 1):
            raise ValidationError(f"dyskinesia flag must be 0 or 1, got {self.dyskinesia}")
        if self.bradykinesia not in (0, 1):
            raise ValidationError(f"bradykinesia flag must be 0 or 1, got {self.bradykinesia}")

    @property
    def duration(self) -> float:
        return self.end - self.start


@dataclass(frozen=True)
class Window:
    """A fixed-duration slice of a recording, resampled to 2**k samples.

    Inherits its labels from the task segment it was cut from.  The axis
    arrays all share one power-of-two length.
    """

    patient_id: str
    activity: str
    start: float
    end: float
    x: np.ndarray
    y: np.ndarray
    z: np.ndarray
    tremor: int = 0
    dyskinesia: int = 0
    bradykinesia: int = 0

    def __post_init__(self):
        n = self.x.shape[0]
        if self.y.shape[0] != n or self.z.shape[0] != n:
            raise ValidationError("window axes must share one length")
        if n < 2 or n & (n - 1):
            raise ValidationError(f"window length must be a power of two >= 2, got {n}")

    @property
    def n_samples(self) -> int:
        return self.x.shape[0]

    @property
    def label(self) -> dict[str, int]:
        return {
            "tremor": self.tremor,
            "dyskinesia": self.dyskinesia,
            "bradykinesia": self.bradykinesia,
        }


def bin_score(raw: int) -> int:
    """Bin a 0-4 rater tremor score to three levels: 0->0, 1->1, 2|3|4->2."""
    if raw in (0, 1):
        return int(raw)
    if raw in (2, 3, 4):
        return 2
    raise ValidationError(f"raw tremor score must be an integer in 0..4, got {raw!r}")


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

def _check_header(got: list[str] | None, want: list[str], path: Path) -> None:
    if got is None or [c.strip() for c in got] != want:
        raise ParseError(
            f"{path.name}: expected header {','.join(want)!r}, got {got!r}", line=1
        )


def parse_recording(
    path: str | Path, patient_id: str | None = None, nominal_rate: float = 50.0
) -> Recording:
    """Read a ``t,x,y,z`` CSV into a :class:`Recording`.

    Parameters
    ----------
    path : str or Path
    patient_id : str, optional
        Defaults to the file stem.
    nominal_rate : float
        Nominal sampling rate in Hz.

    Raises
    ------
    ParseError
        Malformed row or header (message carries the line number).
    ValidationError
        Timestamps not strictly increasing, or no samples.
    """
    path = Path(path)
    rows: list[tuple[float, float, float, float]] = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        _check_header(header, _RECORDING_HEADER, path)
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 4:
                raise ParseError(
                    f"{path.name}: expected 4 fields, got {len(row)}", line=lineno
                )
            try:
                rows.append((float(row[0]), float(row[1]), float(row[2]), float(row[3])))
            except ValueError as exc:
                raise ParseError(f"{path.name}: {exc}", line=lineno) from exc
    if not rows:
        raise ValidationError(f"{path.name}: recording contains no samples")
    data = np.asarray(rows, dtype=np.float64)
    return Recording(
        patient_id=patient_id if patient_id is not None else path.stem,
        t=data[:, 0],
        xyz=data[:, 1:4],
        nominal_rate=nominal_rate,
    )


def parse_labels(path: str | Path) -> list[TaskSegment]:
    """Read a task-segment label CSV.

    Tremor is read as the raw 0-4 score and binned via :func:`bin_score`;
    dyskinesia and bradykinesia must already be 0/1 flags.
    """
    path = Path(path)
    segments: list[TaskSegment] = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        _check_header(header, _LABELS_HEADER, path)
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 7:
                raise ParseError(
                    f"{path.name}: expected 7 fields, got {len(row)}", line=lineno
                )
            try:
                pid = row[0].strip()
                start, end = float(row[1]), float(row[2])
                activity = row[3].strip()
                tremor_raw, dysk, brady = int(row[4]), int(row[5]), int(row[6])
            except ValueError as exc:
                raise ParseError(f"{path.name}: {exc}", line=lineno) from exc
            try:
                segments.append(
                    TaskSegment(
                        patient_id=pid,
                        start=start,
                        end=end,
                        activity=activity,
                        tremor=bin_score(tremor_raw),
                        dyskinesia=dysk,
                        bradykinesia=brady,
                    )
                )
            except ValidationError as exc:
                raise ParseError(f"{path.name}: {exc}", line=lineno) from exc
    return segments


# ---------------------------------------------------------------------------
# Windowing
# ---------------------------------------------------------------------------

def segment_windows(
    recording: Recording,
    segments: list[TaskSegment],
    window_seconds: float = 10.0,
    overlap: float = 0.5,
    rate_tolerance: float = 0.05,
) -> list[Window]:
    """Cut a recording into labelled, power-of-two windows.

    Within each task segment belonging to this recording's patient,
    windows of ``window_seconds`` advance from the segment start by
    ``window_seconds * (1 - overlap)``; any window that would cross the
    segment end is dropped.  A window whose sample count deviates from
    the nominal ``window_seconds * nominal_rate`` by more than
    ``rate_tolerance`` (fractional) is dropped with a logged warning.
    Every surviving window is spline-resampled onto the fixed grid of
    ``next_pow2(round(window_seconds * nominal_rate))`` samples so all
    windows share one transform depth.

    Returns
    -------
    list of Window
        In segment order, then window order within each segment.
    """
    if window_seconds <= 0:
        raise ValidationError("window_seconds must be positive")
    if not 0.0 <= overlap < 1.0:
        raise ValidationError(f"overlap must lie in [0, 1), got {overlap}")

    stride = window_seconds * (1.0 - overlap)
    expected = window_seconds * recording.nominal_rate
    target = next_pow2(int(round(expected)))
    t = recording.t

    windows: list[Window] = []
    for seg in segments:
        if seg.patient_id != recording.patient_id:
            continue
        n_fit = int(np.floor((seg.duration - window_seconds) / stride + 1e-9)) + 1
        for i in range(max(n_fit, 0)):
            w_start = seg.start + i * stride
            w_end = w_start + window_seconds
            lo = int(np.searchsorted(t, w_start, side="left"))
            hi = int(np.searchsorted(t, w_end, side="left"))
            count = hi - lo
            if abs(count - expected) > rate_tolerance * expected or count < 4:
                logger.warning(
                    "dropping window [%s, %s) of %s: %d samples, expected %.0f",
                    w_start,
                    w_end,
                    recording.patient_id,
                    count,
                    expected,
                )
                continue
            ts = t[lo:hi]
            windows.append(
                Window(
                    patient_id=recording.patient_id,
                    activity=seg.activity,
                    start=w_start,
                    end=w_end,
                    x=resample_to_pow2(recording.xyz[lo:hi, 0], ts, target),
                    y=resample_to_pow2(recording.xyz[lo:hi, 1], ts, target),
                    z=resample_to_pow2(recording.xyz[lo:hi, 2], ts, target),
                    tremor=seg.tremor,
                    dyskinesia=seg.dyskinesia,
                    bradykinesia=seg.bradykinesia,
                )
            )
    return windows


# ---------------------------------------------------------------------------
# Cohort convenience loaders
# ---------------------------------------------------------------------------

def load_cohort(
    data_dir: str | Path, nominal_rate: float = 50.0
) -> tuple[list[Recording], list[TaskSegment]]:
    """Load ``labels.csv`` plus one ``<patient_id>.csv`` recording per patient.

    Patients are discovered from the label file and loaded in sorted id
    order; a missing recording file raises ``FileNotFoundError``.
    """
    data_dir = Path(data_dir)
    segments = parse_labels(data_dir / "labels.csv")
    recordings = []
    for pid in sorted({s.patient_id for s in segments}):
        rec_path = data_dir / f"{pid}.csv"
        if not rec_path.exists():
            raise FileNotFoundError(f"no recording file for patient {pid}: {rec_path}")
        recordings.append(parse_recording(rec_path, patient_id=pid, nominal_rate=nominal_rate))
    return recordings, segments


def windows_from_cohort(
    recordings: list[Recording],
    segments: list[TaskSegment],
    window_seconds: float = 10.0,
    overlap: float = 0.5,
) -> list[Window]:
    """Window every recording against the shared segment list."""
    out: list[Window] = []
    for rec in recordings:
        out.extend(segment_windows(rec, segments, window_seconds, overlap))
    return out
