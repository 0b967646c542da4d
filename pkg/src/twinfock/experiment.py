"""Simulation of the photon-pair counting experiment and its analysis
chain: Poissonian coincidence counts per setting, per-outcome linear fits
of normalized rates against the theory curves, Fisher information of the
fitted distributions, Monte-Carlo error bars, and noise estimation
anchored at the fully distinguishable setting.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from twinfock import _kernels as kernels
from twinfock.fisher import (
    FisherCurve,
    fi_of_curves,
    max_fi_of_curves,
    max_noisy_fi,
    qfi_formula_mixed,
    qfi_formula_pure,
)
from twinfock.fock import sector_dimension
from twinfock.measurement import standard_probability_curves
from twinfock.probes import _clamp_unit

# an outcome is fit only if its theory curve actually moves with phase
INFORMATIVE_PTP = 1e-9

_DEFAULT_PHIS = tuple((k + 0.5) * 2.0 * math.pi / 32 for k in range(32))


class UnidentifiableFitError(ValueError):
    """The theory curve for this outcome is constant, so the scale of the
    linear model cannot be identified from data."""


class NoiseTargetError(ValueError):
    """The requested Fisher-information value cannot be produced by any
    noise level inside the search bracket."""


@dataclass(frozen=True)
class ExperimentConfig:
    """Settings of one simulated run.

    ``visibility`` is recorded for provenance only (the measured fringe
    visibility of the source); the forward model is controlled by
    ``i_max``, ``noise`` and the count scale.
    """

    i_values: tuple = (0.0, 0.23, 0.47, 0.70, 0.93)
    phis: tuple = _DEFAULT_PHIS
    mean_total_counts: float = 1e5
    noise: float = 0.06
    i_max: float = 0.93
    visibility: float = 0.87
    seed: int = 20210

    def __post_init__(self):
        i_values = tuple(float(i) for i in self.i_values)
        phis = tuple(float(p) for p in self.phis)
        if not i_values or not phis:
            raise ValueError("i_values and phis must be nonempty")
        i_max = _clamp_unit(self.i_max, "i_max")
        for i in i_values:
            if not -1e-12 <= i <= i_max + 1e-12:
                raise ValueError(f"indistinguishability {i!r} outside [0, {i_max}]")
        if not self.mean_total_counts > 0:
            raise ValueError("mean_total_counts must be positive")
        noise = _clamp_unit(self.noise, "noise")
        if noise >= 1.0:
            raise ValueError("noise must be < 1")
        object.__setattr__(self, "i_values", i_values)
        object.__setattr__(self, "phis", phis)
        object.__setattr__(self, "mean_total_counts", float(self.mean_total_counts))
        object.__setattr__(self, "noise", noise)
        object.__setattr__(self, "i_max", i_max)
        object.__setattr__(self, "visibility", _clamp_unit(self.visibility, "visibility"))
        object.__setattr__(self, "seed", int(self.seed))

    def to_dict(self) -> dict:
        return {
            "i_values": list(self.i_values),
            "phis": list(self.phis),
            "mean_total_counts": self.mean_total_counts,
            "noise": self.noise,
            "i_max": self.i_max,
            "visibility": self.visibility,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        """Read a config from JSON or from key=value lines (lists comma
        separated, # comments allowed)."""
        text = Path(path).read_text()
        stripped = text.lstrip()
        if stripped.startswith("{"):
            return cls.from_dict(json.loads(text))
        data = {}
        for line in text.splitlines():
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            key, _, value = line.partition("=")
            key = key.strip()
            value = value.strip()
            if key in ("i_values", "phis"):
                data[key] = [float(v) for v in value.split(",") if v.strip()]
            elif key == "seed":
                data[key] = int(value)
            else:
                data[key] = float(value)
        return cls.from_dict(data)

    def to_file(self, path):
        Path(path).write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n")


@dataclass(frozen=True)
class CountRecord:
    indistinguishability: float
    phi: float
    counts: dict

    def __post_init__(self):
        for label, c in self.counts.items():
            if c < 0 or c != int(c):
                raise ValueError(f"count for {label!r} is not a nonnegative integer")


@dataclass(frozen=True)
class FitResult:
    outcome: str
    scale: float
    offset: float
    residual: float
    covariance: np.ndarray = field(compare=False)
    scale_warning: bool = False


@dataclass(frozen=True)
class FitBundle:
    """All per-outcome fits at one indistinguishability setting, plus the
    constant background levels of the outcomes that carry no phase
    information there."""

    indistinguishability: float
    phis: np.ndarray
    fits: dict
    background: dict

    @property
    def background_total(self) -> float:
        return float(sum(self.background.values()))


@dataclass(frozen=True)
class NoiseEstimate:
    epsilon: float
    bracket: tuple
    iterations: int
    achieved_fi: float


@dataclass(frozen=True)
class McStats:
    indistinguishability: float
    mean: float
    std: float
    values: np.ndarray = field(compare=False)


@dataclass(frozen=True)
class SummaryRow:
    indistinguishability: float
    fitted_max_fi: float
    fitted_max_phi: float
    error_bar: float
    noisy_formula_max: float
    qfi_mixed: float
    qfi_pure: float


def noisy_standard_curves(indist: float, noise: float, phis):
    """Closed-form outcome curves after the white-noise channel,
    p' = (1-eps) p + eps/d for each of the ten rank-1 outcomes."""
    labels, p, dp = standard_probability_curves(indist, phis)
    d = sector_dimension(2)
    return labels, (1.0 - noise) * p + noise / d, (1.0 - noise) * dp


def simulate_counts(config: ExperimentConfig, rng=None) -> list:
    """Draw independent Poisson counts per outcome for every (i, phi)
    setting; expected counts are mean_total_counts * p'."""
    if rng is None:
        rng = np.random.default_rng(config.seed)
    phis = np.asarray(config.phis)
    records = []
    for i in config.i_values:
        labels, p, _ = noisy_standard_curves(i, config.noise, phis)
        draws = rng.poisson(config.mean_total_counts * p)
        for k, phi in enumerate(phis):
            records.append(
                CountRecord(
                    indistinguishability=float(i),
                    phi=float(phi),
                    counts={lab: int(c) for lab, c in zip(labels, draws[:, k])},
                )
            )
    return records


def fit_probability(outcome: str, theory, rates) -> FitResult:
    """Least-squares fit of normalized rates to scale*theory + offset."""
    theory = np.asarray(theory, dtype=float)
    rates = np.asarray(rates, dtype=float)
    if theory.size < 3:
        raise ValueError("need at least 3 phase points to fit")
    a, b, rss = kernels.fit_linear(theory, rates)
    if math.isnan(a):
        raise UnidentifiableFitError(
            f"outcome {outcome!r}: theory curve is constant, scale unidentifiable"
        )
    dof = theory.size - 2
    design = np.column_stack([theory, np.ones_like(theory)])
    covariance = (rss / dof if dof > 0 else math.nan) * np.linalg.inv(
        design.T @ design
    )
    return FitResult(
        outcome=outcome,
        scale=float(a),
        offset=float(b),
        residual=float(rss),
        covariance=covariance,
        scale_warning=a < 0.0,
    )


def fit_records(records, config: ExperimentConfig) -> dict:
    """Fit every informative outcome at each indistinguishability setting.

    Rates are counts normalized by the total counts at each phase.
    Outcomes whose theory curve is constant at that setting become
    background levels (mean rate) instead of fits.
    """
    bundles = {}
    for i in config.i_values:
        recs = [r for r in records if r.indistinguishability == i]
        if not recs:
            raise ValueError(f"no records at indistinguishability {i!r}")
        phis = np.array([r.phi for r in recs])
        labels, theory, _ = standard_probability_curves(i, phis)
        counts = np.array([[r.counts[lab] for r in recs] for lab in labels], dtype=float)
        totals = counts.sum(axis=0)
        if np.any(totals <= 0):
            raise ValueError("a phase setting recorded zero total counts")
        rates = counts / totals
        fits = {}
        background = {}
        for m, label in enumerate(labels):
            if np.ptp(theory[m]) > INFORMATIVE_PTP:
                fits[label] = fit_probability(label, theory[m], rates[m])
            else:
                background[label] = float(rates[m].mean())
        bundles[i] = FitBundle(
            indistinguishability=float(i), phis=phis, fits=fits, background=background
        )
    return bundles


def fitted_curves_fn(bundle: FitBundle):
    """Probability curves implied by a bundle's fits, renormalized so the
    full outcome set (fitted plus constant background) sums to one, with
    exact quotient-rule derivatives.  Only fitted outcomes are returned;
    background outcomes enter through the normalization."""
    bg_total = bundle.background_total
    items = list(bundle.fits.items())

    def curves_fn(phis):
        labels, p, dp = standard_probability_curves(bundle.indistinguishability, phis)
        index = {lab: m for m, lab in enumerate(labels)}
        raw = np.stack([fit.scale * p[index[lab]] + fit.offset for lab, fit in items])
        draw = np.stack([fit.scale * dp[index[lab]] for lab, fit in items])
        total = raw.sum(axis=0) + bg_total
        dtotal = draw.sum(axis=0)
        q = raw / total
        dq = (draw - q * dtotal) / total
        return q, dq

    return curves_fn


def max_fitted_fi(bundle: FitBundle, strategy: str = "limit") -> tuple[float, float]:
    """Phase and value of the fitted-FI maximum.  The fitted curve is only
    2pi-periodic (independent per-outcome scales break the half-period
    symmetry), so the search covers [0, 2pi)."""
    return max_fi_of_curves(
        fitted_curves_fn(bundle),
        lo=0.0,
        hi=2.0 * math.pi,
        grid_points=4000,
        strategy=strategy,
    )


def fi_from_fit(bundle: FitBundle, phis=None, strategy: str = "limit") -> FisherCurve:
    """Fisher-information curve of the fitted outcome distribution."""
    curves_fn = fitted_curves_fn(bundle)
    if phis is None:
        phis = np.linspace(0.0, 2.0 * math.pi, 400, endpoint=False)
    phis = np.asarray(phis, dtype=float)
    values, statuses = fi_of_curves(curves_fn, phis, strategy, on_divergent="nan")
    peak = max_fitted_fi(bundle, strategy=strategy)
    return FisherCurve(
        phis=phis,
        values=values,
        statuses=statuses,
        provenance={
            "method": "fitted",
            "indistinguishability": bundle.indistinguishability,
            "strategy": strategy,
        },
        peak=peak,
    )


def monte_carlo_errorbars(config: ExperimentConfig, replicas: int) -> dict:
    """Distribution of the fitted-FI maximum over fresh Poisson draws.

    Replica seeds are spawned deterministically from the config seed, so
    the result is reproducible and independent of evaluation order.
    """
    if replicas < 2:
        raise ValueError("need at least 2 replicas")
    children = np.random.SeedSequence(config.seed).spawn(replicas)
    values = {i: np.empty(replicas) for i in config.i_values}
    for r, child in enumerate(children):
        records = simulate_counts(config, rng=np.random.default_rng(child))
        bundles = fit_records(records, config)
        for i, bundle in bundles.items():
            values[i][r] = max_fitted_fi(bundle)[1]
    return {
        i: McStats(
            indistinguishability=i,
            mean=float(v.mean()),
            std=float(v.std(ddof=1)),
            values=v,
        )
        for i, v in values.items()
    }


def estimate_noise(
    target_fi: float, bracket: tuple = (0.0, 0.9), tol: float = 1e-6
) -> NoiseEstimate:
    """Invert the noisy-FI maximum at zero indistinguishability: find the
    noise level whose best-phase FI equals the measured value.

    Bisection on a bracket where the map noise -> max FI is checked to be
    decreasing; tolerance is in the noise parameter.
    """
    lo, hi = float(bracket[0]), float(bracket[1])
    if not 0.0 <= lo < hi < 1.0:
        raise ValueError(f"bad bracket {bracket!r}")

    def best_fi(eps: float) -> float:
        return max_noisy_fi(0.0, eps)[1]

    f_lo = best_fi(lo)
    f_hi = best_fi(hi)
    f_mid = best_fi(0.5 * (lo + hi))
    if not f_lo > f_mid > f_hi:
        raise ArithmeticError("noise -> max-FI map is not decreasing on the bracket")
    if not f_hi <= target_fi <= f_lo + 1e-9:
        raise NoiseTargetError(
            f"target {target_fi!r} outside attainable range [{f_hi}, {f_lo}]"
        )
    if target_fi >= f_lo:
        return NoiseEstimate(epsilon=lo, bracket=(lo, hi), iterations=0, achieved_fi=f_lo)
    a, b = lo, hi
    iterations = 0
    while b - a > tol:
        mid = 0.5 * (a + b)
        if best_fi(mid) > target_fi:
            a = mid
        else:
            b = mid
        iterations += 1
    eps = 0.5 * (a + b)
    return NoiseEstimate(
        epsilon=eps, bracket=(lo, hi), iterations=iterations, achieved_fi=best_fi(eps)
    )


def fi_summary_table(config: ExperimentConfig, replicas: int = 100) -> list:
    """One row per indistinguishability setting: fitted-FI maximum from the
    config-seed dataset, its Monte-Carlo error bar, and the three theory
    references (noisy-FI formula maximum, mixed QFI, pure QFI)."""
    records = simulate_counts(config)
    bundles = fit_records(records, config)
    stats = monte_carlo_errorbars(config, replicas)
    rows = []
    for i in config.i_values:
        phi_star, fi_star = max_fitted_fi(bundles[i])
        rows.append(
            SummaryRow(
                indistinguishability=i,
                fitted_max_fi=fi_star,
                fitted_max_phi=phi_star,
                error_bar=stats[i].std,
                noisy_formula_max=max_noisy_fi(i, config.noise)[1],
                qfi_mixed=qfi_formula_mixed(1, i, config.noise),
                qfi_pure=qfi_formula_pure(1, i),
            )
        )
    return rows


def scaled_config(config: ExperimentConfig, **overrides) -> ExperimentConfig:
    """Convenience for sweeps: a copy of the config with fields replaced."""
    return replace(config, **overrides)
