"""Synthetic labelled cohorts emulating the pipeline's signal classes.

Real clinical recordings are private, so evaluation runs on generated
ones: white rest noise plus, per symptom, the characteristic additive
component -- a 4-6 Hz sinusoid for tremor (amplitude tiered by level,
on one axis for level 1 and two for level 2), an irregular 1-3 Hz
three-sinusoid sum for dyskinesia, a ~2 Hz dominant-axis gait signal
with harmonics for walking (dyskinesia then loads the other two axes),
and a 0.5-3 Hz arm-movement band whose amplitude a bradykinesia factor
shrinks.  A constant unit gravity vector with random orientation is
added so the DC component exercises the approximation coefficient.

Patients differ by a log-normal multiplicative amplitude jitter, and
every patient derives an independent RNG stream from (seed,
patient_index), so generation is reproducible and parallelisable.
Outputs are exactly the ingest CSV formats.
"""

from __future__ import annotations

import os
import tempfile
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from .errors import ParseError, ValidationError
from .ingest import Recording, TaskSegment

__all__ = ["CohortSpec", "read_cohort_spec", "generate_patient", "generate_cohort"]


@dataclass(frozen=True)
class CohortSpec:
    """Everything that determines a generated cohort, seed included.

    Amplitudes are in g.  Prevalences are the fraction of eligible
    segments carrying each symptom (rounded to a count).  The per-patient
    plan is ``rest_segments + walking_segments + gross_segments`` task
    segments of ``segment_seconds`` each, in shuffled order.
    """

    n_patients: int = 10
    seed: int = 42
    sample_rate: float = 50.0
    rest_segments: int = 8
    walking_segments: int = 6
    gross_segments: int = 6
    segment_seconds: float = 30.0
    tremor_prevalence: float = 0.6
    rest_dyskinesia_prevalence: float = 0.5
    walking_dyskinesia_prevalence: float = 0.5
    bradykinesia_prevalence: float = 0.5
    noise_sigma: float = 0.01
    tremor_amp_level1: float = 0.05
    tremor_amp_level2: float = 0.25
    dyskinesia_amp: float = 0.10
    walking_amp: float = 0.30
    gross_amp: float = 0.15
    brady_factor: float = 0.2
    jitter_sigma: float = 0.2

    def __post_init__(self):
        if self.n_patients < 1:
            raise ValidationError("n_patients must be >= 1")
        if self.sample_rate <= 0:
            raise ValidationError("sample_rate must be positive")
        if self.segment_seconds <= 0:
            raise ValidationError("segment durations must be positive")
        if min(self.rest_segments, self.walking_segments, self.gross_segments) < 0:
            raise ValidationError("segment counts must be non-negative")
        if self.rest_segments + self.walking_segments + self.gross_segments < 1:
            raise ValidationError("the task plan must contain at least one segment")
        for name in (
            "tremor_prevalence",
            "rest_dyskinesia_prevalence",
            "walking_dyskinesia_prevalence",
            "bradykinesia_prevalence",
        ):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValidationError(f"{name} must lie in [0, 1], got {value}")
        if not 0.0 < self.tremor_amp_level1 < self.tremor_amp_level2:
            raise ValidationError(
                "tremor amplitudes must satisfy 0 < level1 < level2, got "
                f"{self.tremor_amp_level1} and {self.tremor_amp_level2}"
            )
        if self.noise_sigma < 0 or self.jitter_sigma < 0:
            raise ValidationError("noise_sigma and jitter_sigma must be non-negative")
        if min(self.dyskinesia_amp, self.walking_amp, self.gross_amp) <= 0:
            raise ValidationError("component amplitudes must be positive")
        if not 0.0 < self.brady_factor <= 1.0:
            raise ValidationError(f"brady_factor must lie in (0, 1], got {self.brady_factor}")


_INT_FIELDS = {"n_patients", "seed", "rest_segments", "walking_segments", "gross_segments"}


def read_cohort_spec(path: str | Path) -> CohortSpec:
    """Parse a ``key = value`` spec file into a :class:`CohortSpec`.

    Blank lines and ``#`` comments are ignored; unknown keys and
    unparsable values raise.
    """
    path = Path(path)
    known = {f.name for f in fields(CohortSpec)}
    values: dict = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            key, sep, value = line.partition("=")
            key, value = key.strip(), value.strip()
            if not sep or not key:
                raise ParseError(f"{path.name}: expected 'key = value'", line=lineno)
            if key not in known:
                raise ValidationError(f"{path.name} line {lineno}: unknown spec key {key!r}")
            try:
                values[key] = int(value) if key in _INT_FIELDS else float(value)
            except ValueError as exc:
                raise ParseError(f"{path.name}: bad value for {key!r}: {value!r}", line=lineno) from exc
    return CohortSpec(**values)


# ---------------------------------------------------------------------------
# Signal components
# ---------------------------------------------------------------------------

def _irregular_oscillation(rng, tt, amplitude, f_low, f_high) -> np.ndarray:
    """Random-phase sum of three sinusoids in a band, RMS-normalised."""
    out = np.zeros_like(tt)
    for f in rng.uniform(f_low, f_high, size=3):
        phase = rng.uniform(0.0, 2.0 * np.pi)
        out += np.sin(2.0 * np.pi * f * tt + phase)
    return amplitude / np.sqrt(3.0) * out


def _patient_rng(seed: int, patient_index: int, stream: int = 0) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(patient_index, stream)))


def _spread(count: int, total: int, levels: tuple[int, ...], rng) -> list[int]:
    """Label list with ``count`` positives drawn from ``levels``, shuffled."""
    if levels == (1, 2):
        labels = [2] * (count // 2 + count % 2) + [1] * (count // 2)
    else:
        labels = [levels[0]] * count
    labels += [0] * (total - count)
    rng.shuffle(labels)
    return labels


def generate_patient(spec: CohortSpec, patient_index: int) -> tuple[Recording, list[TaskSegment]]:
    """Generate one patient's recording and its labelled task plan.

    Deterministic in (spec, patient_index); patients are mutually
    independent streams.  Segment labels follow the prevalences; tremor
    positives alternate level 2 / level 1 (level 2 first when odd).
    """
    if patient_index < 0 or patient_index >= spec.n_patients:
        raise ValidationError(
            f"patient_index must lie in [0, {spec.n_patients}), got {patient_index}"
        )
    rng = _patient_rng(spec.seed, patient_index)
    patient_id = f"P{patient_index:02d}"
    jitter = float(np.exp(rng.normal(0.0, spec.jitter_sigma)))

    # Assemble the labelled plan, then shuffle the segment order.
    tremor = _spread(
        round(spec.tremor_prevalence * spec.rest_segments), spec.rest_segments, (1, 2), rng
    )
    rest_dysk = _spread(
        round(spec.rest_dyskinesia_prevalence * spec.rest_segments),
        spec.rest_segments,
        (1,),
        rng,
    )
    walk_dysk = _spread(
        round(spec.walking_dyskinesia_prevalence * spec.walking_segments),
        spec.walking_segments,
        (1,),
        rng,
    )
    brady = _spread(
        round(spec.bradykinesia_prevalence * spec.gross_segments),
        spec.gross_segments,
        (1,),
        rng,
    )
    plan = (
        [("Resting", tremor[i], rest_dysk[i], 0) for i in range(spec.rest_segments)]
        + [("Walking", 0, walk_dysk[i], 0) for i in range(spec.walking_segments)]
        + [("GrossUpperLimb", 0, 0, brady[i]) for i in range(spec.gross_segments)]
    )
    rng.shuffle(plan)

    duration = spec.segment_seconds
    n_total = int(round(len(plan) * duration * spec.sample_rate))
    t = np.arange(n_total) / spec.sample_rate
    xyz = rng.normal(0.0, spec.noise_sigma, size=(n_total, 3))
    gravity = rng.normal(size=3)
    xyz += gravity / np.linalg.norm(gravity)

    segments: list[TaskSegment] = []
    for seg_idx, (activity, trem, dysk, brd) in enumerate(plan):
        t0 = seg_idx * duration
        i0 = int(round(t0 * spec.sample_rate))
        i1 = int(round((t0 + duration) * spec.sample_rate))
        tt = t[i0:i1] - t0
        if activity == "Resting":
            if trem > 0:
                f = rng.uniform(4.0, 6.0)
                amp = (spec.tremor_amp_level1 if trem == 1 else spec.tremor_amp_level2) * jitter
                # One affected axis at level 1, two at level 2: the summed
                # per-axis votes then grow with severity.
                for axis in rng.choice(3, size=trem, replace=False):
                    phase = rng.uniform(0.0, 2.0 * np.pi)
                    xyz[i0:i1, axis] += amp * np.sin(2.0 * np.pi * f * tt + phase)
            if dysk:
                for axis in range(3):
                    xyz[i0:i1, axis] += _irregular_oscillation(
                        rng, tt, spec.dyskinesia_amp * jitter, 1.0, 3.0
                    )
        elif activity == "Walking":
            dominant = int(rng.integers(3))
            f_gait = rng.uniform(1.8, 2.2)
            phase = rng.uniform(0.0, 2.0 * np.pi)
            base = spec.walking_amp * jitter
            xyz[i0:i1, dominant] += (
                base * np.sin(2.0 * np.pi * f_gait * tt + phase)
                + 0.4 * base * np.sin(2.0 * np.pi * 2.0 * f_gait * tt + 2.1 * phase)
                + 0.15 * base * np.sin(2.0 * np.pi * 3.0 * f_gait * tt + 0.7 * phase)
            )
            if dysk:
                for axis in (a for a in range(3) if a != dominant):
                    xyz[i0:i1, axis] += _irregular_oscillation(
                        rng, tt, spec.dyskinesia_amp * jitter, 1.0, 3.0
                    )
        else:  # GrossUpperLimb
            amp = spec.gross_amp * jitter * (spec.brady_factor if brd else 1.0)
            for axis in range(3):
                xyz[i0:i1, axis] += _irregular_oscillation(rng, tt, amp, 0.5, 3.0)
        segments.append(
            TaskSegment(
                patient_id=patient_id,
                start=t0,
                end=t0 + duration,
                activity=activity,
                tremor=trem,
                dyskinesia=dysk,
                bradykinesia=brd,
            )
        )
    recording = Recording(
        patient_id=patient_id, t=t, xyz=xyz, nominal_rate=spec.sample_rate
    )
    return recording, segments


# ---------------------------------------------------------------------------
# Cohort files
# ---------------------------------------------------------------------------

def _write_recording_csv(path: Path, recording: Recording) -> None:
    data = np.column_stack([recording.t, recording.xyz])
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write("t,x,y,z\n")
            np.savetxt(fh, data, fmt="%.6f", delimiter=",")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def generate_cohort(spec: CohortSpec, out_dir: str | Path) -> list[Path]:
    """Write ``<patient_id>.csv`` per patient plus one ``labels.csv``.

    The label file stores raw 0-4 tremor scores: level-2 segments get a
    score drawn from {2, 3, 4} (own seeded stream) so ingest's binning
    is exercised; levels 0/1 map to themselves.  Returns written paths,
    byte-deterministic in the spec.
    """
    if spec.n_patients < 2:
        raise ValidationError("a cohort needs n_patients >= 2 (leave-one-patient-out)")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    paths: list[Path] = []
    label_rows = ["patient_id,start,end,activity,tremor,dyskinesia,bradykinesia"]
    for index in range(spec.n_patients):
        recording, segments = generate_patient(spec, index)
        rec_path = out_dir / f"{recording.patient_id}.csv"
        _write_recording_csv(rec_path, recording)
        paths.append(rec_path)
        score_rng = _patient_rng(spec.seed, index, stream=1)
        for seg in segments:
            raw = int(score_rng.choice([2, 3, 4])) if seg.tremor == 2 else seg.tremor
            label_rows.append(
                f"{seg.patient_id},{seg.start:.2f},{seg.end:.2f},{seg.activity},"
                f"{raw},{seg.dyskinesia},{seg.bradykinesia}"
            )

    labels_path = out_dir / "labels.csv"
    fd, tmp = tempfile.mkstemp(dir=out_dir, prefix=".labels.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write("\n".join(label_rows) + "\n")
        os.replace(tmp, labels_path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    paths.append(labels_path)
    return paths
