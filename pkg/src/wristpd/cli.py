"""Command-line pipeline: synth, featurize, train, predict, evaluate.

Every subcommand shares the pipeline knobs (window length, overlap,
wavelet filter length, margin penalty, tremor thresholds, seed).  Exit
codes: 0 success, 2 bad input (parse/validation errors, missing files),
1 unexpected internal failure.  All outputs are deterministic -- same
inputs and flags give byte-identical files -- and written atomically.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from ._version import __version__
from .errors import ParseError, ValidationError
from .evaluate import run_lopo, write_report_files
from .features import build_feature_vectors, write_features_csv
from .ingest import (
    TaskSegment,
    load_cohort,
    parse_labels,
    parse_recording,
    segment_windows,
    windows_from_cohort,
)
from .modelio import atomic_write_text, load_detector, save_detector
from .symptoms import DETECTOR_KINDS, make_detector
from .synth import CohortSpec, generate_cohort, read_cohort_spec

__all__ = ["main", "build_parser"]

logger = logging.getLogger(__name__)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wristpd",
        description="Detect Parkinsonian motor symptoms in wrist accelerometer recordings.",
    )
    parser.add_argument("--version", action="version", version=f"wristpd {__version__}")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--window-seconds", type=float, default=10.0, help="window length (s)")
    common.add_argument("--overlap", type=float, default=0.5, help="window overlap fraction")
    common.add_argument(
        "--wavelet-order", type=int, default=4, help="Daubechies filter length (2/4/6/8)"
    )
    common.add_argument("--svm-c", type=float, default=1.0, help="soft-margin penalty C")
    common.add_argument("--theta1", type=int, default=2, help="tremor level-2 axis-sum threshold")
    common.add_argument("--theta2", type=int, default=0, help="tremor level-1 axis-sum threshold")
    common.add_argument("--seed", type=int, default=None, help="random seed (default 42)")

    sub = parser.add_subparsers(dest="command", required=True)

    p_synth = sub.add_parser(
        "synth", parents=[common], help="generate a synthetic labelled cohort"
    )
    p_synth.add_argument("--spec", type=Path, default=None, help="cohort spec file (key = value)")
    p_synth.add_argument("--out", type=Path, required=True, help="output directory")

    p_feat = sub.add_parser(
        "featurize", parents=[common], help="window a cohort and export features as CSV"
    )
    p_feat.add_argument("--data", type=Path, required=True, help="cohort directory")
    p_feat.add_argument("--out", type=Path, required=True, help="output CSV path")

    p_train = sub.add_parser(
        "train", parents=[common], help="train a symptom detector on a cohort"
    )
    p_train.add_argument("--data", type=Path, required=True, help="cohort directory")
    p_train.add_argument(
        "--detector", required=True, choices=sorted(DETECTOR_KINDS), help="detector kind"
    )
    p_train.add_argument("--out", type=Path, required=True, help="model file path")

    p_pred = sub.add_parser(
        "predict", parents=[common], help="apply a saved model to one recording"
    )
    p_pred.add_argument("--model", type=Path, required=True, help="model file")
    p_pred.add_argument("--recording", type=Path, required=True, help="recording CSV")
    p_pred.add_argument(
        "--labels",
        type=Path,
        default=None,
        help="label CSV with task segments; without it the whole recording is "
        "treated as one segment of the model's activity",
    )
    p_pred.add_argument("--out", type=Path, required=True, help="prediction CSV path")

    p_eval = sub.add_parser(
        "evaluate", parents=[common], help="leave-one-patient-out evaluation on a cohort"
    )
    p_eval.add_argument("--data", type=Path, required=True, help="cohort directory")
    p_eval.add_argument(
        "--detector", required=True, choices=sorted(DETECTOR_KINDS), help="detector kind"
    )
    p_eval.add_argument("--out", type=Path, required=True, help="output report directory")
    return parser


def _provenance(args: argparse.Namespace) -> dict:
    keys = ("window_seconds", "overlap", "wavelet_order", "svm_c", "theta1", "theta2", "seed")
    flags = {k: getattr(args, k) for k in keys if hasattr(args, k)}
    flags["tool"] = f"wristpd {__version__}"
    if getattr(args, "detector", None):
        flags["detector"] = args.detector
    return flags


def _detector_from_args(args: argparse.Namespace):
    params = dict(
        C=args.svm_c,
        wavelet_taps=args.wavelet_order,
        random_state=args.seed,
    )
    if args.detector == "rest_tremor":
        params.update(theta1=args.theta1, theta2=args.theta2)
    return make_detector(args.detector, **params)


def _load_windows(args: argparse.Namespace):
    recordings, segments = load_cohort(args.data)
    windows = windows_from_cohort(recordings, segments, args.window_seconds, args.overlap)
    if not windows:
        raise ValidationError(f"no usable windows found under {args.data}")
    return windows


def cmd_synth(args: argparse.Namespace) -> int:
    spec = read_cohort_spec(args.spec) if args.spec else CohortSpec()
    if args.seed_given and args.seed != spec.seed:
        spec = CohortSpec(**{**spec.__dict__, "seed": args.seed})
    paths = generate_cohort(spec, args.out)
    logger.info("wrote %d cohort files under %s", len(paths), args.out)
    return 0


def cmd_featurize(args: argparse.Namespace) -> int:
    windows = _load_windows(args)
    features = build_feature_vectors(windows, args.wavelet_order)
    args.out.parent.mkdir(parents=True, exist_ok=True)
    write_features_csv(args.out, windows, features)
    logger.info("wrote %d feature rows to %s", len(windows), args.out)
    return 0


def cmd_train(args: argparse.Namespace) -> int:
    detector = _detector_from_args(args)
    windows = [w for w in _load_windows(args) if w.activity == detector.activity]
    if not windows:
        raise ValidationError(f"no {detector.activity!r} windows in {args.data}")
    detector.fit(windows)
    args.out.parent.mkdir(parents=True, exist_ok=True)
    save_detector(detector, args.out, provenance=_provenance(args))
    logger.info("trained %s on %d windows -> %s", detector.kind, len(windows), args.out)
    return 0


def cmd_predict(args: argparse.Namespace) -> int:
    detector = load_detector(args.model)
    recording = parse_recording(args.recording)
    if args.labels is not None:
        segments = [
            s
            for s in parse_labels(args.labels)
            if s.patient_id == recording.patient_id and s.activity == detector.activity
        ]
    else:
        segments = [
            TaskSegment(
                patient_id=recording.patient_id,
                start=float(recording.t[0]),
                end=float(recording.t[-1]) + 1.0 / recording.nominal_rate,
                activity=detector.activity,
            )
        ]
    windows = segment_windows(recording, segments, args.window_seconds, args.overlap)

    with_probability = hasattr(detector, "probability")
    header = "window_start,window_end,prediction"
    rows = [header + ",probability" if with_probability else header]
    if windows:
        features = build_feature_vectors(windows, detector.wavelet_taps)
        predictions = detector.predict(windows, features)
        probabilities = detector.probability(windows, features) if with_probability else None
        for i, w in enumerate(windows):
            row = f"{w.start:.2f},{w.end:.2f},{int(predictions[i])}"
            if probabilities is not None:
                row += f",{repr(float(probabilities[i]))}"
            rows.append(row)
    args.out.parent.mkdir(parents=True, exist_ok=True)
    atomic_write_text(args.out, "\n".join(rows) + "\n")
    logger.info("wrote %d predictions to %s", len(rows) - 1, args.out)
    return 0


def cmd_evaluate(args: argparse.Namespace) -> int:
    detector = _detector_from_args(args)
    windows = _load_windows(args)
    result = run_lopo(windows, detector)
    write_report_files(result, args.out, provenance=_provenance(args))
    report = (args.out / "report.txt").read_text()
    sys.stdout.write(report)
    return 0


_COMMANDS = {
    "synth": cmd_synth,
    "featurize": cmd_featurize,
    "train": cmd_train,
    "predict": cmd_predict,
    "evaluate": cmd_evaluate,
}


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    args.seed_given = args.seed is not None
    if args.seed is None:
        args.seed = 42
    try:
        return _COMMANDS[args.command](args)
    except (ParseError, ValidationError, FileNotFoundError, NotADirectoryError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # pragma: no cover - defensive
        logger.exception("internal error: %s", exc)
        return 1


if __name__ == "__main__":
    sys.exit(main())
