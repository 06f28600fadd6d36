"""Wrist-accelerometer detection of Parkinsonian motor symptoms.

The pipeline: ingest tri-axial recordings and task labels, cut
half-overlapping 10 s windows, decompose each axis with a full-depth
Daubechies wavelet transform, summarise per-scale energies, and feed
them to from-scratch linear margin classifiers wrapped as four symptom
detectors (rest tremor, rest dyskinesia, walking dyskinesia, gross
upper-limb bradykinesia), evaluated leave-one-patient-out.
"""

from ._version import __version__
from .errors import ParseError, ValidationError
from .evaluate import (
    ConfusionMatrix,
    FoldResult,
    LopoResult,
    RocCurve,
    confusion_matrix,
    format_report,
    lopo_folds,
    roc_auc,
    run_lopo,
    write_report_files,
)
from .features import (
    FeatureVector,
    build_feature_vector,
    build_feature_vectors,
    feature_names,
    mean_relative,
    relative_energies,
    walking_axis_ratio,
    write_features_csv,
)
from .ingest import (
    ACTIVITIES,
    Recording,
    TaskSegment,
    Window,
    bin_score,
    load_cohort,
    parse_labels,
    parse_recording,
    segment_windows,
    windows_from_cohort,
)
from .modelio import load_detector, save_detector
from .svm import (
    LinearMarginSVM,
    OneVsRestSVM,
    calibrate_probability,
    fit_sigmoid,
    sigmoid_probability,
)
from .symptoms import (
    DETECTOR_KINDS,
    BradykinesiaDetector,
    RestDyskinesiaDetector,
    RestTremorDetector,
    WalkingDyskinesiaDetector,
    combine_axis_predictions,
    make_detector,
)
from .synth import CohortSpec, generate_cohort, generate_patient, read_cohort_spec
from .wavelet import (
    DAUBECHIES_TAPS,
    ScaleEnergies,
    WaveletCoeffs,
    band_edges,
    daubechies_filters,
    dwt_forward,
    dwt_inverse,
    next_pow2,
    resample_to_pow2,
    scale_energies,
)

__all__ = [
    "__version__",
    "ParseError",
    "ValidationError",
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
    "DAUBECHIES_TAPS",
    "daubechies_filters",
    "next_pow2",
    "resample_to_pow2",
    "WaveletCoeffs",
    "ScaleEnergies",
    "dwt_forward",
    "dwt_inverse",
    "scale_energies",
    "band_edges",
    "FeatureVector",
    "relative_energies",
    "mean_relative",
    "walking_axis_ratio",
    "build_feature_vector",
    "build_feature_vectors",
    "feature_names",
    "write_features_csv",
    "LinearMarginSVM",
    "OneVsRestSVM",
    "fit_sigmoid",
    "calibrate_probability",
    "sigmoid_probability",
    "DETECTOR_KINDS",
    "combine_axis_predictions",
    "RestTremorDetector",
    "RestDyskinesiaDetector",
    "WalkingDyskinesiaDetector",
    "BradykinesiaDetector",
    "make_detector",
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
    "save_detector",
    "load_detector",
    "CohortSpec",
    "read_cohort_spec",
    "generate_patient",
    "generate_cohort",
]
