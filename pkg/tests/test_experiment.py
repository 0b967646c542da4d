"""Counting-experiment simulation and analysis chain."""

import math

import numpy as np
import pytest

import twinfock as tf
from twinfock.experiment import INFORMATIVE_PTP, NoiseTargetError, UnidentifiableFitError


@pytest.fixture(scope="module")
def small_config():
    return tf.ExperimentConfig(
        i_values=(0.0, 0.47, 0.93),
        phis=tuple((k + 0.5) * 2 * math.pi / 16 for k in range(16)),
        mean_total_counts=2e4,
    )


def test_config_defaults_and_validation():
    cfg = tf.ExperimentConfig()
    assert cfg.i_values == (0.0, 0.23, 0.47, 0.70, 0.93)
    assert cfg.noise == 0.06
    assert cfg.mean_total_counts == 1e5
    assert cfg.i_max == 0.93
    assert len(cfg.phis) == 32
    with pytest.raises(ValueError):
        tf.ExperimentConfig(i_values=())
    with pytest.raises(ValueError):
        tf.ExperimentConfig(i_values=(0.95,), i_max=0.93)
    with pytest.raises(ValueError):
        tf.ExperimentConfig(mean_total_counts=0)
    with pytest.raises(ValueError):
        tf.ExperimentConfig(noise=1.0)


def test_config_roundtrip_dict_and_file(tmp_path):
    cfg = tf.ExperimentConfig(i_values=(0.0, 0.5), seed=99)
    assert tf.ExperimentConfig.from_dict(cfg.to_dict()) == cfg
    with pytest.raises(ValueError):
        tf.ExperimentConfig.from_dict({"seed": 1, "bogus": 2})

    json_path = tmp_path / "config.json"
    cfg.to_file(json_path)
    assert tf.ExperimentConfig.from_file(json_path) == cfg

    kv_path = tmp_path / "config.txt"
    kv_path.write_text(
        "# comment line\n"
        "i_values = 0.0, 0.5\n"
        "seed = 99\n"
        "noise = 0.06\n"
    )
    loaded = tf.ExperimentConfig.from_file(kv_path)
    assert loaded.i_values == (0.0, 0.5)
    assert loaded.seed == 99


def test_simulate_counts_shape_and_determinism(small_config):
    records = tf.simulate_counts(small_config)
    assert len(records) == 3 * 16
    again = tf.simulate_counts(small_config)
    assert all(
        a.counts == b.counts and a.phi == b.phi for a, b in zip(records, again)
    )
    other = tf.simulate_counts(tf.scaled_config(small_config, seed=1))
    assert any(a.counts != b.counts for a, b in zip(records, other))
    for r in records:
        assert len(r.counts) == 10
        assert all(c >= 0 for c in r.counts.values())


def test_count_record_validation():
    with pytest.raises(ValueError):
        tf.CountRecord(0.5, 0.1, {"2h000": -1})
    with pytest.raises(ValueError):
        tf.CountRecord(0.5, 0.1, {"2h000": 1.5})


def test_counts_mean_tracks_noisy_model():
    # with many repetitions the empirical mean approaches the noisy curves
    cfg = tf.ExperimentConfig(i_values=(0.47,), mean_total_counts=1e6, seed=5)
    records = tf.simulate_counts(cfg)
    phis = np.array([r.phi for r in records])
    labels, p, _ = tf.noisy_standard_curves(0.47, cfg.noise, phis)
    counts = np.array([[r.counts[lab] for r in records] for lab in labels], dtype=float)
    rel = np.abs(counts / cfg.mean_total_counts - p)
    assert rel.max() < 5e-3  # Poisson noise at 1e6 counts


def test_fit_probability_recovers_linear_model():
    rng = np.random.default_rng(3)
    theory = np.sin(np.linspace(0, 2 * math.pi, 40)) ** 2
    rates = 0.94 * theory + 0.006 + rng.normal(0, 1e-4, theory.size)
    fit = tf.fit_probability("x", theory, rates)
    assert fit.scale == pytest.approx(0.94, abs=1e-3)
    assert fit.offset == pytest.approx(0.006, abs=1e-3)
    assert not fit.scale_warning
    assert fit.covariance.shape == (2, 2)
    assert fit.covariance[0, 0] > 0


def test_fit_probability_rejects_flat_theory():
    with pytest.raises(UnidentifiableFitError):
        tf.fit_probability("flat", np.full(12, 0.3), np.linspace(0, 1, 12))


def test_fit_records_split(small_config):
    records = tf.simulate_counts(small_config)
    bundles = tf.fit_records(records, small_config)
    assert set(bundles) == set(small_config.i_values)
    # fully distinguishable: the two-photon-per-port outcomes are dark
    assert len(bundles[0.0].fits) == 4
    assert len(bundles[0.0].background) == 6
    assert len(bundles[0.47].fits) == 7
    assert len(bundles[0.47].background) == 3
    for bundle in bundles.values():
        assert bundle.background_total == pytest.approx(
            sum(bundle.background.values())
        )
        for fit in bundle.fits.values():
            assert fit.scale == pytest.approx(1 - small_config.noise, abs=0.15)


def test_fitted_curves_normalized(small_config):
    records = tf.simulate_counts(small_config)
    bundle = tf.fit_records(records, small_config)[0.47]
    curves = tf.fitted_curves_fn(bundle)
    phis = np.linspace(0.3, 5.9, 23)
    q, dq = curves(phis)
    assert q.shape == (7, phis.size)
    # derivatives follow the quotient rule of the renormalization exactly
    h = 1e-6
    qp, _ = curves(phis + h)
    qm, _ = curves(phis - h)
    assert np.max(np.abs((qp - qm) / (2 * h) - dq)) < 1e-6


def test_fitted_curves_total_is_one(small_config):
    records = tf.simulate_counts(small_config)
    bundle = tf.fit_records(records, small_config)[0.93]
    curves = tf.fitted_curves_fn(bundle)
    q, dq = curves(np.linspace(0.0, 2 * math.pi, 17))
    # q are fractions of the full renormalized set: fitted fractions plus
    # the background fraction sum to one at every phase
    labels, p, dp = tf.standard_probability_curves(
        0.93, np.linspace(0.0, 2 * math.pi, 17)
    )
    index = {lab: m for m, lab in enumerate(labels)}
    raw = np.stack(
        [fit.scale * p[index[lab]] + fit.offset for lab, fit in bundle.fits.items()]
    )
    draw = np.stack([fit.scale * dp[index[lab]] for lab, fit in bundle.fits.items()])
    total = raw.sum(axis=0) + bundle.background_total
    dtotal = draw.sum(axis=0)
    assert np.max(np.abs(q.sum(axis=0) + bundle.background_total / total - 1.0)) < 1e-12
    # quotient rule: the fitted fractions and the background fraction share
    # one normalization, so their derivative sums cancel exactly
    expected_dsum = dtotal * bundle.background_total / total**2
    assert np.max(np.abs(dq.sum(axis=0) - expected_dsum)) < 1e-12


def test_max_fitted_fi_close_to_formula(small_config):
    cfg = tf.scaled_config(small_config, mean_total_counts=1e6, i_values=(0.0,))
    bundle = tf.fit_records(tf.simulate_counts(cfg), cfg)[0.0]
    phi_star, f_star = tf.max_fitted_fi(bundle)
    ref_phi, ref_f = tf.max_noisy_fi(0.0, cfg.noise)
    assert f_star == pytest.approx(ref_f, rel=0.02)


def test_fi_from_fit_returns_curve(small_config):
    bundle = tf.fit_records(tf.simulate_counts(small_config), small_config)[0.47]
    curve = tf.fi_from_fit(bundle)
    assert curve.peak is not None
    assert curve.phis.size == 400
    assert np.nanmax(curve.values) <= curve.peak[1] + 1e-6
    assert curve.provenance["method"] == "fitted"


def test_monte_carlo_errorbars_deterministic(small_config):
    cfg = tf.scaled_config(small_config, i_values=(0.0, 0.93))
    stats = tf.monte_carlo_errorbars(cfg, replicas=8)
    again = tf.monte_carlo_errorbars(cfg, replicas=8)
    for i in cfg.i_values:
        assert stats[i].mean == again[i].mean
        assert stats[i].std == again[i].std
        assert stats[i].values.shape == (8,)
        assert stats[i].std > 0
    with pytest.raises(ValueError):
        tf.monte_carlo_errorbars(cfg, replicas=1)


def test_estimate_noise_inverts_max_fi():
    target = tf.max_noisy_fi(0.0, 0.06)[1]
    est = tf.estimate_noise(target)
    assert est.epsilon == pytest.approx(0.06, abs=2e-6)
    assert est.achieved_fi == pytest.approx(target, abs=1e-4)
    assert est.iterations > 0


def test_estimate_noise_edges():
    # target at the noise-free value pins the estimate at zero
    noise_free_max = tf.max_noisy_fi(0.0, 0.0)[1]
    est = tf.estimate_noise(noise_free_max)
    assert est.epsilon == 0.0
    assert est.iterations == 0
    # a hair below the maximum still comes out at essentially zero noise
    assert tf.estimate_noise(2.0).epsilon < 1e-5
    with pytest.raises(NoiseTargetError):
        tf.estimate_noise(5.0)  # beyond the noise-free maximum
    with pytest.raises(NoiseTargetError):
        tf.estimate_noise(0.01)  # below the bracket's noisiest value
    with pytest.raises(ValueError):
        tf.estimate_noise(1.5, bracket=(0.5, 0.2))


def test_fi_summary_table(small_config):
    rows = tf.fi_summary_table(small_config, replicas=6)
    assert [r.indistinguishability for r in rows] == list(small_config.i_values)
    for row in rows:
        assert row.error_bar > 0
        assert row.qfi_pure == pytest.approx(
            tf.qfi_formula_pure(1, row.indistinguishability)
        )
        assert row.qfi_mixed == pytest.approx(
            tf.qfi_formula_mixed(1, row.indistinguishability, small_config.noise)
        )
        assert row.noisy_formula_max <= row.qfi_mixed + 1e-9
        assert row.fitted_max_fi > 0


def test_scaled_config():
    cfg = tf.ExperimentConfig()
    scaled = tf.scaled_config(cfg, mean_total_counts=1e4, seed=7)
    assert scaled.mean_total_counts == 1e4
    assert scaled.seed == 7
    assert scaled.i_values == cfg.i_values
