"""Fisher information, quantum and classical.

Classical FI is evaluated from probability tables or grids with explicit
handling of degenerate phases (outcomes whose probability vanishes):
naive dropping of 0/0 terms is wrong at removable points, so the default
strategy evaluates the limit of dp^2/p by Richardson extrapolation around
the point.  Quantum FI comes in three independent routes (variance,
spectral, closed formula) that are cross-checked in the tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from twinfock import _kernels as kernels
from twinfock.fock import (
    DensityOperator,
    FockBasis,
    HermitianOperator,
    PureState,
    eigendecompose,
    phase_generator,
    sector_dimension,
    variance,
)
from twinfock.measurement import ProbabilityTable, ProjectiveMeasurement, probability_grid
from twinfock.probes import ProbeSpec, _clamp_unit

P_FLOOR = 1e-12
DERIVATIVE_TOL = 1e-9
LIMIT_STEP = 1e-6
ZERO_CURVE_FLOOR = 1e-30
SPECTRAL_FLOOR = 1e-12

STRATEGIES = ("limit", "strict", "drop")


class DegeneratePhaseError(ArithmeticError):
    """An outcome probability vanished at this phase and the caller asked
    for strict handling (or no evaluator was available for the limit)."""


class DivergentFisherTermError(ArithmeticError):
    """dp^2/p has p ~ 0 with dp bounded away from 0: the FI genuinely
    diverges at this phase."""


class DenominatorUnderflowError(ArithmeticError):
    """A closed-form Fisher expression was evaluated at a pole."""


@dataclass(frozen=True)
class QfiResult:
    value: float
    method: str
    probe_spec: ProbeSpec | None = None

    def __post_init__(self):
        if self.value < -1e-9:
            raise ValueError(f"negative quantum Fisher information {self.value!r}")
        object.__setattr__(self, "value", max(float(self.value), 0.0))


@dataclass(frozen=True)
class Thresholds:
    n: int
    noise: float
    i_min: float
    eps_max: float


@dataclass(frozen=True)
class FisherCurve:
    """Sampled Fisher information over a phase grid."""

    phis: np.ndarray
    values: np.ndarray
    statuses: tuple[str, ...]
    provenance: dict = field(compare=False)
    peak: tuple[float, float] | None = None  # (phi, value)

    def __post_init__(self):
        phis = np.array(self.phis, dtype=float)
        if phis.ndim != 1 or np.any(np.diff(phis) <= 0):
            raise ValueError("phase grid must be 1-D and strictly increasing")
        values = np.array(self.values, dtype=float)
        finite = values[np.isfinite(values)]
        if finite.size and finite.min() < -1e-9:
            raise ValueError("Fisher values below -1e-9; numerical failure upstream")
        values = np.where(np.isfinite(values) & (values < 0.0), 0.0, values)
        phis.flags.writeable = False
        values.flags.writeable = False
        object.__setattr__(self, "phis", phis)
        object.__setattr__(self, "values", values)


# ---------------------------------------------------------------- classical

def _richardson_term(curves_fn, phi: float, outcome: int) -> float:
    """Limit of dp^2/p at a removable zero, via two-scale symmetric
    evaluation and Richardson extrapolation."""

    def term(x: float) -> float:
        p, dp = curves_fn(np.array([x]))
        pv = float(p[outcome, 0])
        dv = float(dp[outcome, 0])
        if pv < ZERO_CURVE_FLOOR:
            if abs(dv) >= DERIVATIVE_TOL:
                raise DivergentFisherTermError(
                    f"outcome {outcome} diverges near phi={phi!r}"
                )
            return 0.0
        return dv * dv / pv

    h = LIMIT_STEP
    coarse = 0.5 * (term(phi + h) + term(phi - h))
    fine = 0.5 * (term(phi + h / 2.0) + term(phi - h / 2.0))
    return (4.0 * fine - coarse) / 3.0


def _fi_with_limits(curves_fn, phis, strategy="limit", on_divergent="raise"):
    """Classical FI over a grid with sub-floor-term handling.

    curves_fn(phis) must return probability and derivative arrays of shape
    (outcomes, len(phis)).  Returns (values, statuses); divergent points
    become NaN with status 'divergent' when on_divergent='nan'.
    """
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}; options: {STRATEGIES}")
    phis = np.asarray(phis, dtype=float)
    p, dp = curves_fn(phis)
    fi, flags = kernels.classical_fi_terms(p, dp, P_FLOOR, DERIVATIVE_TOL)
    fi = np.asarray(fi, dtype=float)
    statuses = ["ok"] * phis.size
    for k in np.nonzero(flags)[0]:
        if flags[k] & kernels.FLAG_DIVERGENT:
            if on_divergent == "raise":
                raise DivergentFisherTermError(
                    f"divergent Fisher term at phi={phis[k]!r}"
                )
            fi[k] = np.nan
            statuses[k] = "divergent"
            continue
        if strategy == "strict":
            raise DegeneratePhaseError(
                f"vanishing outcome probability at phi={phis[k]!r}; "
                "use the limit or drop strategy"
            )
        if strategy == "drop":
            statuses[k] = "dropped"
            continue
        degenerate = np.nonzero(
            (p[:, k] < P_FLOOR) & (np.abs(dp[:, k]) < DERIVATIVE_TOL)
        )[0]
        try:
            fi[k] += sum(_richardson_term(curves_fn, phis[k], m) for m in degenerate)
        except DivergentFisherTermError:
            if on_divergent == "raise":
                raise
            fi[k] = np.nan
            statuses[k] = "divergent"
            continue
        statuses[k] = "limit"
    return fi, tuple(statuses)


def _table_curves_fn(table: ProbabilityTable):
    """Adapt a table's single-phase evaluator to the grid interface,
    reusing the stored arrays at the table's own phase."""

    def curves_fn(phis):
        cols = []
        for x in phis:
            if x == table.phi:
                cols.append((table.probabilities, table.derivatives))
            elif table.evaluator is None:
                raise DegeneratePhaseError(
                    "probability table carries no evaluator; cannot take "
                    "the analytic limit away from its phase"
                )
            else:
                cols.append(table.evaluator(x))
        return (
            np.stack([c[0] for c in cols], axis=1),
            np.stack([c[1] for c in cols], axis=1),
        )

    return curves_fn


def fi_of_curves(curves_fn, phis, strategy: str = "limit", on_divergent: str = "raise"):
    """Classical FI of arbitrary probability curves over a grid.

    curves_fn(phis) -> (P, DP) arrays of shape (outcomes, len(phis));
    returns (values, statuses).  This is the entry point for fitted or
    otherwise synthetic outcome curves.
    """
    return _fi_with_limits(curves_fn, phis, strategy, on_divergent)


def classical_fi(table: ProbabilityTable, strategy: str = "limit") -> float:
    """Fisher information sum dp^2/p of one probability table.

    Sub-floor outcomes (p < 1e-12): divergent terms always raise; removable
    terms follow the strategy — 'limit' (default) evaluates the analytic
    limit through the table's evaluator, 'drop' skips them (wrong at
    removable 0/0 points, but cheap), 'strict' raises.
    """
    values, _ = _fi_with_limits(
        _table_curves_fn(table), np.array([table.phi]), strategy=strategy
    )
    return float(values[0])


def fi_curve(
    probe: PureState | DensityOperator,
    measurement: ProjectiveMeasurement,
    phis,
    noise: float = 0.0,
    strategy: str = "limit",
    on_divergent: str = "raise",
) -> FisherCurve:
    """Classical FI of a probe/measurement pair over a phase grid."""
    phis = np.asarray(phis, dtype=float)

    def curves_fn(grid):
        return probability_grid(probe, measurement, grid, noise)

    values, statuses = _fi_with_limits(curves_fn, phis, strategy, on_divergent)
    return FisherCurve(
        phis=phis,
        values=values,
        statuses=statuses,
        provenance={
            "method": "numeric",
            "measurement": measurement.name,
            "noise": float(noise),
            "strategy": strategy,
        },
    )


# ---------------------------------------------------------------- quantum

def _default_generator(basis: FockBasis, generator) -> HermitianOperator:
    return phase_generator(basis) if generator is None else generator


def qfi_pure(probe: PureState, generator: HermitianOperator | None = None) -> QfiResult:
    """Quantum Fisher information of a pure probe: 4 Var(H)."""
    if not isinstance(probe, PureState):
        raise TypeError("qfi_pure needs a PureState")
    h = _default_generator(probe.basis, generator)
    return QfiResult(4.0 * variance(probe, h), method="variance")


def qfi_mixed(
    probe: DensityOperator, generator: HermitianOperator | None = None
) -> QfiResult:
    """Quantum Fisher information of a density operator via the spectral
    sum 2 sum_{ij} (l_i - l_j)^2 / (l_i + l_j) |<e_i|H|e_j>|^2, restricted
    to eigenvalue pairs with l_i + l_j above the support floor."""
    if not isinstance(probe, DensityOperator):
        raise TypeError("qfi_mixed needs a DensityOperator")
    h = _default_generator(probe.basis, generator)
    spec = eigendecompose(probe)
    lam = spec.eigenvalues
    overlap = spec.eigenvectors.conj().T @ h.matrix @ spec.eigenvectors
    sums = lam[:, None] + lam[None, :]
    diffs = lam[:, None] - lam[None, :]
    mask = sums > SPECTRAL_FLOOR
    with np.errstate(divide="ignore", invalid="ignore"):
        weights = np.where(mask, diffs**2 / np.where(mask, sums, 1.0), 0.0)
    value = 2.0 * float(np.sum(weights * np.abs(overlap) ** 2))
    return QfiResult(value, method="spectral")


def qfi_formula_pure(n: int, indist: float) -> float:
    """Closed-form pure-probe QFI, 2 n^2 i + 2 n."""
    spec = ProbeSpec(n, indist)
    return 2.0 * spec.n**2 * spec.indistinguishability + 2.0 * spec.n


def qfi_formula_pure_parts(n: int, indist: float) -> tuple[float, float]:
    """Convex split of the pure QFI: i * 2n(n+1) from the indistinguishable
    component plus (1-i) * 2n from the distinguishable one."""
    spec = ProbeSpec(n, indist)
    i = spec.indistinguishability
    return (i * 2.0 * spec.n * (spec.n + 1), (1.0 - i) * 2.0 * spec.n)


def mixture_reduction_factor(n: int, noise: float) -> float:
    """QFI reduction of the white-noise mixture relative to the pure probe:
    (1-eps)^2 / (1 - (1 - 2/d) eps) with d the sector dimension."""
    eps = _clamp_unit(noise, "noise")
    if eps >= 1.0:
        raise ValueError("noise must be < 1")
    d = sector_dimension(2 * int(n))
    return (1.0 - eps) ** 2 / (1.0 - (1.0 - 2.0 / d) * eps)


def qfi_formula_mixed(n: int, indist: float, noise: float) -> float:
    """Closed-form QFI of the white-noise probe."""
    return mixture_reduction_factor(n, noise) * qfi_formula_pure(n, indist)


def path_variance_formulas(n: int, indist: float) -> tuple[float, float]:
    """Closed-form 4*Var for the two path generators separately.

    Per binomial component k (photons leaked to the second path label),
    the first path contributes 2n(n-k+1) - k and the second contributes k;
    both weighted by C(n,k) i^(n-k) (1-i)^k.  Their sum telescopes to the
    pure-probe QFI.
    """
    spec = ProbeSpec(n, indist)
    i = spec.indistinguishability
    n = spec.n
    var_a = 0.0
    var_b = 0.0
    for k in range(n + 1):
        weight = math.comb(n, k) * i ** (n - k) * (1.0 - i) ** k
        var_a += weight * (2.0 * n * (n - k + 1) - k)
        var_b += weight * k
    return var_a, var_b


def thresholds(n: int, noise: float) -> Thresholds:
    """Indistinguishability needed to beat the uncorrelated-probe limit at
    this noise, and the noise beyond which no indistinguishability helps."""
    eps = _clamp_unit(noise, "noise")
    if eps >= 1.0:
        raise ValueError("noise must be < 1")
    n = int(n)
    d = sector_dimension(2 * n)
    i_min = (2.0 + d * (1.0 - eps)) * eps / (n * d * (1.0 - eps) ** 2)
    eps_max = (
        2.0 + (2.0 * n + 1.0) * d - math.sqrt(4.0 + 4.0 * d + d * d + 8.0 * n * d)
    ) / (2.0 * (n + 1.0) * d)
    return Thresholds(n=n, noise=eps, i_min=i_min, eps_max=eps_max)


def qcrb(fisher_information: float) -> float:
    """Cramer-Rao variance bound 1/F."""
    f = float(fisher_information)
    if f <= 0.0:
        raise ValueError(f"Fisher information must be positive, got {f!r}")
    return 1.0 / f


# ------------------------------------------------------------ closed forms

def _scalar_from_kernel(values: np.ndarray, what: str, phi: float) -> float:
    v = float(values[0])
    if math.isnan(v):
        raise DenominatorUnderflowError(f"{what} evaluated at a pole, phi={phi!r}")
    return v


def noisy_fi_values(indist: float, noise: float, phis) -> np.ndarray:
    """Vector form of noisy_fi_formula; NaN marks poles instead of raising."""
    i = _clamp_unit(indist, "indistinguishability")
    eps = _clamp_unit(noise, "noise")
    return kernels.noisy_fi(i, eps, np.atleast_1d(np.asarray(phis, dtype=float)))


def noisy_fi_formula(indist: float, noise: float, phi: float) -> float:
    """Five-term closed-form FI of the port-resolved measurement on the
    white-noise single-pair probe."""
    return _scalar_from_kernel(
        noisy_fi_values(indist, noise, [phi]), "noisy FI form", phi
    )


def coarse_fi_values(indist: float, phis) -> np.ndarray:
    i = _clamp_unit(indist, "indistinguishability")
    return kernels.coarse_fi(i, np.atleast_1d(np.asarray(phis, dtype=float)))


def coarse_fi_formula(indist: float, phi: float) -> float:
    """Closed-form FI of the path-unresolved measurement; never exceeds the
    pure-probe QFI 2i+2 (asserted)."""
    val = _scalar_from_kernel(coarse_fi_values(indist, [phi]), "coarse FI form", phi)
    bound = qfi_formula_pure(1, indist)
    if val > bound + 1e-9:
        raise AssertionError(
            f"coarse FI {val!r} exceeds the quantum bound {bound!r}"
        )
    return val


def mprime_fi_values(noise: float, phis) -> np.ndarray:
    eps = _clamp_unit(noise, "noise")
    return kernels.mprime_fi(eps, np.atleast_1d(np.asarray(phis, dtype=float)))


def mprime_fi_formula(noise: float, phi: float) -> float:
    """Closed-form FI of the superposition measurement on the fully
    indistinguishable noisy probe (valid at indistinguishability 1)."""
    return _scalar_from_kernel(
        mprime_fi_values(noise, [phi]), "superposition-measurement FI form", phi
    )


# ------------------------------------------------------------- maximizers

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def _golden_max(f, lo: float, hi: float, tol: float) -> tuple[float, float]:
    a, b = lo, hi
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    return x, f(x)


def max_fisher_phi(
    values_fn,
    lo: float = 0.0,
    hi: float = math.pi,
    grid_points: int = 2000,
    tol: float = 1e-8,
) -> tuple[float, float]:
    """Maximize a vectorized phase curve: uniform grid scan (endpoint
    excluded) then golden-section refinement.  NaNs (poles) are skipped."""
    grid = np.linspace(lo, hi, grid_points, endpoint=False)
    vals = np.asarray(values_fn(grid), dtype=float)
    if not np.isfinite(vals).any():
        raise DenominatorUnderflowError("curve has no finite values on the grid")
    k = int(np.nanargmax(vals))
    a = grid[k - 1] if k > 0 else lo
    b = grid[k + 1] if k + 1 < grid.size else hi

    def scalar(x: float) -> float:
        v = float(np.asarray(values_fn(np.array([x])), dtype=float)[0])
        return -math.inf if math.isnan(v) else v

    x, fx = _golden_max(scalar, a, b, tol)
    if fx < vals[k]:
        return float(grid[k]), float(vals[k])
    return float(x), float(fx)


def max_noisy_fi(indist: float, noise: float) -> tuple[float, float]:
    """Phase and value maximizing the noisy closed-form FI."""
    return max_fisher_phi(lambda g: noisy_fi_values(indist, noise, g))


def max_fi_of_curves(
    curves_fn,
    lo: float = 0.0,
    hi: float = math.pi,
    grid_points: int = 2000,
    tol: float = 1e-8,
    strategy: str = "limit",
) -> tuple[float, float]:
    """Maximize the classical FI of probability curves (with limit handling)."""

    def values_fn(grid):
        values, _ = _fi_with_limits(curves_fn, grid, strategy, on_divergent="nan")
        return values

    return max_fisher_phi(values_fn, lo, hi, grid_points, tol)
