"""Per-scale energy feature tests."""

from __future__ import annotations

import csv

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wristpd import (
    ValidationError,
    Window,
    build_feature_vector,
    feature_names,
    mean_relative,
    relative_energies,
    walking_axis_ratio,
    write_features_csv,
)


def tone_window(freqs_by_axis, amps_by_axis, n=512, rate=50.0, noise=0.0, seed=0, **labels):
    """Window whose axes are single tones plus optional noise."""
    rng = np.random.default_rng(seed)
    t = np.arange(n) / rate
    axes = []
    for f, a in zip(freqs_by_axis, amps_by_axis):
        sig = a * np.sin(2.0 * np.pi * f * t) if a else np.zeros(n)
        axes.append(sig + noise * rng.normal(size=n))
    return Window("p", labels.pop("activity", "Resting"), 0.0, n / rate, *axes, **labels)


# ---------------------------------------------------------------------------
# relative_energies
# ---------------------------------------------------------------------------

def test_relative_energies_examples():
    out = relative_energies(np.array([0.0, 0.0, 4.0, 0.0, 0.0]))
    np.testing.assert_array_equal(out, [0.0, 0.0, 1.0, 0.0, 0.0])
    np.testing.assert_array_equal(relative_energies(np.array([1.0, 3.0])), [0.25, 0.75])
    np.testing.assert_allclose(relative_energies(np.full(9, 2.5)), np.full(9, 1.0 / 9.0))


def test_relative_energies_zero_vector_falls_back_to_uniform():
    np.testing.assert_array_equal(relative_energies(np.zeros(9)), np.full(9, 1.0 / 9.0))


def test_relative_energies_validation():
    with pytest.raises(ValidationError):
        relative_energies(np.array([1.0, -0.5]))
    with pytest.raises(ValidationError):
        relative_energies(np.array([1.0, np.inf]))
    with pytest.raises(ValidationError):
        relative_energies(np.array([]))
    with pytest.raises(ValidationError):
        relative_energies(np.ones((3, 3)))


@settings(max_examples=50, deadline=None)
@given(
    st.lists(st.floats(min_value=0.0, max_value=1e6), min_size=2, max_size=12),
    st.floats(min_value=1e-3, max_value=1e3),
)
def test_relative_energies_normalised_and_scale_invariant(cont, alpha):
    cont = np.asarray(cont)
    rel = relative_energies(cont)
    assert abs(rel.sum() - 1.0) <= 1e-12
    np.testing.assert_allclose(relative_energies(alpha * cont), rel, atol=1e-12)


def test_relative_energies_power_of_two_scaling_is_exact():
    rng = np.random.default_rng(8)
    cont = rng.uniform(0.0, 5.0, size=9)
    np.testing.assert_array_equal(relative_energies(4.0 * cont), relative_energies(cont))


# ---------------------------------------------------------------------------
# mean_relative
# ---------------------------------------------------------------------------

def test_mean_relative_examples():
    r = np.array([0.2, 0.8])
    np.testing.assert_allclose(mean_relative(r, r, r), r, rtol=1e-15)
    out = mean_relative(np.array([1.0, 0.0]), np.array([0.0, 1.0]), np.array([0.0, 1.0]))
    np.testing.assert_allclose(out, [1.0 / 3.0, 2.0 / 3.0])
    assert abs(out.sum() - 1.0) <= 1e-12


def test_mean_relative_length_mismatch():
    with pytest.raises(ValueError):
        mean_relative(np.ones(2) / 2, np.ones(3) / 3, np.ones(3) / 3)


# ---------------------------------------------------------------------------
# walking_axis_ratio
# ---------------------------------------------------------------------------

def test_walking_axis_ratio_examples():
    out = walking_axis_ratio(np.array([4.0]), np.array([2.0]), np.array([6.0]))
    np.testing.assert_array_equal(out, [3.0])
    # silent off-axes -> zero ratio regardless of the dominant energy
    out = walking_axis_ratio(np.array([5.0, 9.0]), np.zeros(2), np.array([1.0, 1.0]))
    np.testing.assert_array_equal(out, [0.0, 0.0])
    # equal energy everywhere -> ratio equals that energy
    e = np.array([0.5, 2.0, 7.0])
    np.testing.assert_allclose(walking_axis_ratio(e, e, e), e)


def test_walking_axis_ratio_symmetric_and_monotone_in_weak_axes():
    rng = np.random.default_rng(11)
    x, y, z = rng.uniform(0.1, 5.0, size=(3, 9))
    np.testing.assert_array_equal(walking_axis_ratio(x, y, z), walking_axis_ratio(x, z, y))
    grown = walking_axis_ratio(x, 2.0 * y, z)
    assert np.all(grown >= walking_axis_ratio(x, y, z))


def test_walking_axis_ratio_zero_denominator_stays_finite():
    out = walking_axis_ratio(np.zeros(3), np.ones(3), np.ones(3))
    assert np.all(np.isfinite(out))
    assert np.all(out > 0)


def test_walking_axis_ratio_rejects_negative():
    with pytest.raises(ValidationError):
        walking_axis_ratio(np.array([1.0]), np.array([-1.0]), np.array([1.0]))


# ---------------------------------------------------------------------------
# build_feature_vector
# ---------------------------------------------------------------------------

def test_feature_vector_shapes_for_512_sample_window():
    fv = build_feature_vector(tone_window([5.0, 2.0, 1.0], [0.2, 0.1, 0.1], noise=0.01))
    assert fv.k == 9  # log2(512)
    assert fv.cont.shape == (3, 9)
    assert fv.rel.shape == (3, 9)
    assert fv.rel_avg.shape == (9,)
    assert fv.w.shape == (9,)
    assert fv.cont_avg.shape == (9,)
    np.testing.assert_allclose(fv.rel.sum(axis=1), 1.0, atol=1e-12)
    assert abs(fv.rel_avg.sum() - 1.0) <= 1e-12
    assert fv.degenerate_axes == ()


def test_tremor_band_tone_peaks_in_level_three():
    # a 5 Hz tone on x lands in level 3 (3.125-6.25 Hz at 50 Hz); the x
    # row peaks there even though the noise-only axes stay flat
    fv = build_feature_vector(tone_window([5.0, 0.0, 0.0], [0.25, 0.0, 0.0], noise=0.005))
    assert int(np.argmax(fv.rel[0])) == 2
    # tremor on every axis pulls the averaged distribution with it
    fv = build_feature_vector(tone_window([5.0, 4.4, 5.7], [0.25, 0.2, 0.2], noise=0.005))
    assert int(np.argmax(fv.rel_avg)) == 2


def test_all_zero_window_degenerates_to_uniform():
    win = Window("p", "Resting", 0.0, 10.0, np.zeros(512), np.zeros(512), np.zeros(512))
    fv = build_feature_vector(win)
    assert fv.degenerate_axes == (0, 1, 2)
    np.testing.assert_array_equal(fv.cont, np.zeros((3, 9)))
    np.testing.assert_array_equal(fv.rel, np.full((3, 9), 1.0 / 9.0))
    np.testing.assert_array_equal(fv.w, np.zeros(9))


def test_gravity_offset_leaves_detail_features_unchanged():
    win = tone_window([5.0, 2.0, 0.0], [0.2, 0.1, 0.0], noise=0.01)
    shifted = Window(
        win.patient_id, win.activity, win.start, win.end,
        win.x + 0.3, win.y - 0.7, win.z + 0.64,
    )
    a, b = build_feature_vector(win), build_feature_vector(shifted)
    np.testing.assert_allclose(a.cont, b.cont, rtol=1e-9, atol=1e-12)
    np.testing.assert_allclose(a.rel, b.rel, atol=1e-9)


def test_amplitude_scaling_preserves_relative_features():
    win = tone_window([5.0, 2.0, 1.0], [0.2, 0.3, 0.1], noise=0.01)
    scaled = Window(
        win.patient_id, win.activity, win.start, win.end,
        4.0 * win.x, 4.0 * win.y, 4.0 * win.z,
    )
    a, b = build_feature_vector(win), build_feature_vector(scaled)
    np.testing.assert_array_equal(a.rel, b.rel)  # power-of-two scale: exact
    np.testing.assert_array_equal(a.rel_avg, b.rel_avg)
    np.testing.assert_array_equal(b.cont, 16.0 * a.cont)


def test_dominant_axis_feeds_ratio_denominator():
    # z carries the gait-like energy, so w = cont_x * cont_y / cont_z
    fv = build_feature_vector(tone_window([5.0, 5.0, 2.0], [0.1, 0.1, 1.0], noise=0.001))
    expected = fv.cont[0] * fv.cont[1] / np.maximum(fv.cont[2], 1e-12)
    np.testing.assert_array_equal(fv.w, expected)


# ---------------------------------------------------------------------------
# CSV export
# ---------------------------------------------------------------------------

def test_feature_names_layout():
    names = feature_names(2)
    assert names == [
        "cont_x_1", "cont_x_2", "cont_y_1", "cont_y_2", "cont_z_1", "cont_z_2",
        "rel_x_1", "rel_x_2", "rel_y_1", "rel_y_2", "rel_z_1", "rel_z_2",
        "rel_avg_1", "rel_avg_2", "w_1", "w_2",
    ]
    assert len(feature_names(9)) == 9 * 8


def test_write_features_csv_round_trips_exactly(tmp_path):
    windows = [
        tone_window([5.0, 0.0, 0.0], [0.2, 0.0, 0.0], noise=0.01, seed=i, tremor=1)
        for i in range(3)
    ]
    path = tmp_path / "features.csv"
    write_features_csv(path, windows)
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0][:5] == ["patient_id", "activity", "tremor", "dyskinesia", "bradykinesia"]
    assert rows[0][5:] == feature_names(9)
    assert len(rows) == 4
    fv = build_feature_vector(windows[0])
    got = np.array([float(v) for v in rows[1][5:]])
    expected = np.concatenate([fv.cont.ravel(), fv.rel.ravel(), fv.rel_avg, fv.w])
    np.testing.assert_array_equal(got, expected)  # repr() round-trips bit-exactly
    assert rows[1][2] == "1"


def test_write_features_csv_rejects_empty(tmp_path):
    with pytest.raises(ValidationError):
        write_features_csv(tmp_path / "f.csv", [])
