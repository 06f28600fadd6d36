"""Shared fixtures: generated cohorts, window lists, feature caches.

Everything here is deterministic (fixed seeds), so fixtures are
session-scoped and safe to share across test modules.
"""

from __future__ import annotations

import numpy as np
import pytest

from wristpd import (
    CohortSpec,
    build_feature_vectors,
    generate_cohort,
    load_cohort,
    windows_from_cohort,
)


@pytest.fixture(scope="session")
def cohort_dir(tmp_path_factory):
    """Default 10-patient cohort written to disk (seed 42)."""
    out = tmp_path_factory.mktemp("cohort_default")
    generate_cohort(CohortSpec(), out)
    return out


@pytest.fixture(scope="session")
def cohort_windows(cohort_dir):
    recordings, segments = load_cohort(cohort_dir)
    return windows_from_cohort(recordings, segments)


@pytest.fixture(scope="session")
def cohort_features(cohort_windows):
    return build_feature_vectors(cohort_windows)


@pytest.fixture(scope="session")
def small_cohort_spec():
    """Three patients, short segments: enough windows for every detector
    to see both classes, small enough for fast CLI round trips."""
    return CohortSpec(
        n_patients=3,
        seed=7,
        rest_segments=4,
        walking_segments=2,
        gross_segments=2,
        segment_seconds=20.0,
    )


@pytest.fixture(scope="session")
def small_cohort_dir(tmp_path_factory, small_cohort_spec):
    out = tmp_path_factory.mktemp("cohort_small")
    generate_cohort(small_cohort_spec, out)
    return out


@pytest.fixture(scope="session")
def small_cohort_windows(small_cohort_dir):
    recordings, segments = load_cohort(small_cohort_dir)
    return windows_from_cohort(recordings, segments)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
