"""Measurement families and outcome statistics."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import twinfock as tf

from conftest import finite_difference


def closed_form_standard(i: float, phi: float) -> dict:
    """The seven nonzero outcome probabilities, written out locally so the
    test is independent of both package routes."""
    s, c = math.sin(phi), math.cos(phi)
    sh, ch = math.sin(phi / 2.0), math.cos(phi / 2.0)
    return {
        "2h000": i * s * s / 2.0,
        "02v00": i * s * s / 2.0,
        "1h1v00": i * c * c,
        "1h01h0": (1.0 - i) * s * s / 4.0,
        "01v01v": (1.0 - i) * s * s / 4.0,
        "1h001v": (1.0 - i) * ch**4,
        "01v1h0": (1.0 - i) * sh**4,
        "001h1v": 0.0,
        "002h0": 0.0,
        "0002v": 0.0,
    }


def test_standard_measurement_structure(basis1):
    m = tf.standard_measurement(basis1)
    assert len(m) == 10
    assert m.complete
    assert m.labels[:3] == ["2h000", "02v00", "1h1v00"]
    assert m.ranks.tolist() == [1] * 10


def test_coarse_measurement_structure(basis1):
    m = tf.coarse_measurement(basis1)
    assert m.labels == ["2h0", "02v", "1h1v"]
    assert m.ranks.tolist() == [3, 3, 4]
    assert m.complete


def test_noisy_optimal_measurement_structure(basis1):
    m = tf.noisy_optimal_measurement(basis1)
    assert len(m) == 10
    assert m.complete
    assert m.ranks.tolist() == [1] * 10
    assert m.labels[0] == "plus:2h000:02v00"
    assert m.labels[1] == "minus:2h000:02v00"


def test_outcome_validation(basis1):
    v = np.zeros((1, 10), dtype=complex)
    v[0, 0] = 0.5
    with pytest.raises(ValueError):
        tf.MeasurementOutcome("bad", v)  # not normalized
    dup = np.zeros((2, 10), dtype=complex)
    dup[:, 0] = 1.0
    with pytest.raises(ValueError):
        tf.MeasurementOutcome("bad", dup)  # rows not orthogonal


def test_incomplete_projector_set_rejected(basis1):
    m = tf.standard_measurement(basis1)
    with pytest.raises(ValueError):
        tf.ProjectiveMeasurement(basis1, m.outcomes[:4], complete=True, name="partial")


@settings(max_examples=40)
@given(
    st.floats(min_value=0.0, max_value=1.0),
    st.floats(min_value=-7.0, max_value=7.0),
)
def test_standard_probabilities_match_closed_forms(i, phi):
    basis = tf.build_basis(1)
    meas = tf.standard_measurement(basis)
    table = tf.outcome_probabilities(tf.pure_probe(basis, i), meas, phi)
    expected = closed_form_standard(i, phi)
    for label in meas.labels:
        assert table.probability(label) == pytest.approx(expected[label], abs=1e-12)
    assert table.probabilities.sum() == pytest.approx(1.0, abs=1e-12)


def test_closed_form_curves_match_matrix_route(basis1):
    meas = tf.standard_measurement(basis1)
    phis = np.linspace(0.0, 2.0 * math.pi, 37)
    for i in (0.0, 0.31, 0.93, 1.0):
        labels, p, dp = tf.standard_probability_curves(i, phis)
        pm, dpm = tf.probability_grid(tf.pure_probe(basis1, i), meas, phis)
        assert labels == meas.labels
        assert np.max(np.abs(p - pm)) < 1e-12
        assert np.max(np.abs(dp - dpm)) < 1e-12


def test_derivatives_match_finite_differences(basis1):
    meas = tf.standard_measurement(basis1)
    probe = tf.pure_probe(basis1, 0.47)
    for phi in (0.3, 1.2, 2.9):
        table = tf.outcome_probabilities(probe, meas, phi)

        def p_at(x, lab):
            return tf.outcome_probabilities(probe, meas, x).probability(lab)

        for lab in meas.labels[:7]:
            numeric = finite_difference(lambda x: p_at(x, lab), phi)
            assert table.derivative(lab) == pytest.approx(numeric, abs=1e-9)


def test_coarse_probabilities_are_group_sums(basis1):
    probe = tf.pure_probe(basis1, 0.62)
    phis = np.linspace(0.0, 2.0 * math.pi, 29)
    p_std, dp_std = tf.probability_grid(probe, tf.standard_measurement(basis1), phis)
    p_crs, dp_crs = tf.probability_grid(probe, tf.coarse_measurement(basis1), phis)
    groups = ([0, 3, 8], [1, 4, 9], [2, 5, 6, 7])
    for g, idx in enumerate(groups):
        assert np.max(np.abs(p_crs[g] - p_std[idx].sum(axis=0))) < 1e-12
        assert np.max(np.abs(dp_crs[g] - dp_std[idx].sum(axis=0))) < 1e-12
    labels, p_formula, _ = tf.coarse_probability_curves(0.62, phis)
    assert labels == ["2h0", "02v", "1h1v"]
    assert np.max(np.abs(p_formula - p_crs)) < 1e-12


def test_white_noise_is_rank_aware(basis1):
    # under the depolarized probe, each outcome gains eps * rank / d, so
    # coarse outcomes keep summing to one
    probe = tf.pure_probe(basis1, 0.8)
    eps = 0.3
    for meas in (tf.coarse_measurement(basis1), tf.noisy_optimal_measurement(basis1)):
        p, dp = tf.probability_grid(probe, meas, np.array([0.7]), noise=eps)
        assert p.sum() == pytest.approx(1.0, abs=1e-12)
        p0, dp0 = tf.probability_grid(probe, meas, np.array([0.7]))
        d = basis1.dimension
        assert np.allclose(p[:, 0], (1 - eps) * p0[:, 0] + eps * meas.ranks / d)
        assert np.allclose(dp[:, 0], (1 - eps) * dp0[:, 0])


def test_noisy_pure_route_matches_density_route(basis1):
    meas = tf.standard_measurement(basis1)
    i, eps, phi = 0.47, 0.06, 1.1
    direct = tf.outcome_probabilities(tf.pure_probe(basis1, i), meas, phi, noise=eps)
    via_rho = tf.outcome_probabilities(tf.mixed_probe(basis1, i, eps), meas, phi)
    assert np.max(np.abs(direct.probabilities - via_rho.probabilities)) < 1e-12
    assert np.max(np.abs(direct.derivatives - via_rho.derivatives)) < 1e-12


def test_double_noise_application_refused(basis1):
    meas = tf.standard_measurement(basis1)
    rho = tf.mixed_probe(basis1, 0.5, 0.06)
    with pytest.raises(ValueError):
        tf.outcome_probabilities(rho, meas, 0.3, noise=0.06)
    with pytest.raises(ValueError):
        tf.probability_grid(rho, meas, np.array([0.3]), noise=0.06)


def test_probability_grid_matches_pointwise(basis1):
    meas = tf.noisy_optimal_measurement(basis1)
    probe = tf.pure_probe(basis1, 0.9)
    phis = np.linspace(0.1, 3.0, 11)
    p, dp = tf.probability_grid(probe, meas, phis, noise=0.06)
    for k, phi in enumerate(phis):
        table = tf.outcome_probabilities(probe, meas, phi, noise=0.06)
        assert np.max(np.abs(p[:, k] - table.probabilities)) < 1e-12
        assert np.max(np.abs(dp[:, k] - table.derivatives)) < 1e-12


def test_density_grid_route(basis1):
    meas = tf.standard_measurement(basis1)
    rho = tf.mixed_probe(basis1, 0.3, 0.2)
    phis = np.linspace(0.0, 3.0, 7)
    p, dp = tf.probability_grid(rho, meas, phis)
    labels, p_pure, dp_pure = tf.standard_probability_curves(0.3, phis)
    assert np.max(np.abs(p - ((1 - 0.2) * p_pure + 0.2 / 10))) < 1e-12
    assert np.max(np.abs(dp - (1 - 0.2) * dp_pure)) < 1e-12


def test_probability_table_accessors(basis1):
    meas = tf.standard_measurement(basis1)
    table = tf.outcome_probabilities(tf.pure_probe(basis1, 1.0), meas, math.pi / 2)
    d = table.as_dict()
    assert set(d) == set(meas.labels)
    assert d["2h000"] == pytest.approx(0.5)
    assert d["02v00"] == pytest.approx(0.5)
    assert table.probability("1h1v00") == pytest.approx(0.0, abs=1e-12)
