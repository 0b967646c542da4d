"""Projective measurements on the single-pair sector and their outcome
statistics.

Three families are provided: the port-and-path-resolved measurement (ten
occupation projectors), the path-unresolved coarse measurement (three
projector sums), and the superposition measurement that stays informative
under white noise.  Outcome probabilities carry analytic phase derivatives
so Fisher-information code never needs finite differences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import partial

import numpy as np

from twinfock.fock import (
    DensityOperator,
    FockBasis,
    PureState,
    _require_same_basis,
    occupation_label,
    phase_generator,
)
from twinfock.evolution import PhaseUnitary, derivative_state

ORTHOGONALITY_ATOL = 1e-12
COMPLETENESS_ATOL = 1e-10
PROBABILITY_CLAMP = 1e-12
PROBABILITY_SUM_ATOL = 1e-9

# canonical outcome order of the port-and-path-resolved measurement
STANDARD_OUTCOMES = (
    (2, 0, 0, 0),
    (0, 2, 0, 0),
    (1, 1, 0, 0),
    (1, 0, 1, 0),
    (0, 1, 0, 1),
    (1, 0, 0, 1),
    (0, 1, 1, 0),
    (0, 0, 1, 1),
    (0, 0, 2, 0),
    (0, 0, 0, 2),
)

# ports resolved, paths not: outcomes keyed by polarization content
COARSE_GROUPS = (
    ("2h0", ((2, 0, 0, 0), (1, 0, 1, 0), (0, 0, 2, 0))),
    ("02v", ((0, 2, 0, 0), (0, 1, 0, 1), (0, 0, 0, 2))),
    ("1h1v", ((1, 1, 0, 0), (1, 0, 0, 1), (0, 1, 1, 0), (0, 0, 1, 1))),
)

# pairs combined into +/- superpositions by the noise-robust measurement
_SUPERPOSITION_PAIRS = (
    ((2, 0, 0, 0), (0, 2, 0, 0)),
    ((1, 0, 1, 0), (0, 1, 0, 1)),
    ((1, 0, 0, 1), (0, 1, 1, 0)),
)
_SUPERPOSITION_SINGLES = ((1, 1, 0, 0), (0, 0, 1, 1), (0, 0, 2, 0), (0, 0, 0, 2))


@dataclass(frozen=True)
class MeasurementOutcome:
    """One outcome: a projector given by orthonormal row vectors (rank >= 1)."""

    label: str
    vectors: np.ndarray  # (rank, d) complex

    def __post_init__(self):
        vec = np.array(self.vectors, dtype=np.complex128)
        if vec.ndim != 2:
            raise ValueError("outcome vectors must form a (rank, d) array")
        gram = vec @ vec.conj().T
        if np.max(np.abs(gram - np.eye(vec.shape[0]))) > ORTHOGONALITY_ATOL:
            raise ValueError(f"outcome {self.label!r} vectors are not orthonormal")
        vec.flags.writeable = False
        object.__setattr__(self, "vectors", vec)

    @property
    def rank(self) -> int:
        return self.vectors.shape[0]


@dataclass(frozen=True)
class ProjectiveMeasurement:
    """Ordered list of mutually orthogonal projective outcomes."""

    basis: FockBasis
    outcomes: tuple[MeasurementOutcome, ...]
    complete: bool
    name: str
    _stack: np.ndarray = field(init=False, repr=False, compare=False)
    _bounds: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        d = self.basis.dimension
        stack = np.vstack([o.vectors for o in self.outcomes])
        if stack.shape[1] != d:
            raise ValueError("outcome vectors do not match the basis dimension")
        gram = stack @ stack.conj().T
        if np.max(np.abs(gram - np.eye(stack.shape[0]))) > ORTHOGONALITY_ATOL:
            raise ValueError("outcomes are not pairwise orthogonal")
        if self.complete:
            resolution = stack.conj().T @ stack
            if np.max(np.abs(resolution - np.eye(d))) > COMPLETENESS_ATOL:
                raise ValueError("completeness flag set but projectors do not sum to 1")
        bounds = []
        row = 0
        for o in self.outcomes:
            bounds.append((row, row + o.rank))
            row += o.rank
        stack.flags.writeable = False
        object.__setattr__(self, "_stack", stack)
        object.__setattr__(self, "_bounds", tuple(bounds))

    @property
    def labels(self) -> list[str]:
        return [o.label for o in self.outcomes]

    @property
    def ranks(self) -> np.ndarray:
        return np.array([o.rank for o in self.outcomes])

    def __len__(self) -> int:
        return len(self.outcomes)


def _basis_vector(basis: FockBasis, occupation) -> np.ndarray:
    v = np.zeros(basis.dimension, dtype=np.complex128)
    v[basis.index(occupation)] = 1.0
    return v


def _require_single_pair(basis: FockBasis):
    if basis.n != 1:
        raise ValueError("this measurement is defined on the n=1 sector only")


def standard_measurement(basis: FockBasis) -> ProjectiveMeasurement:
    """All ten occupation projectors of the single-pair sector."""
    _require_single_pair(basis)
    outcomes = tuple(
        MeasurementOutcome(occupation_label(occ), _basis_vector(basis, occ)[None, :])
        for occ in STANDARD_OUTCOMES
    )
    return ProjectiveMeasurement(basis, outcomes, complete=True, name="standard")


def coarse_measurement(basis: FockBasis) -> ProjectiveMeasurement:
    """Ports resolved but spatial paths not: three projector sums keyed by
    polarization content (two h, two v, or one of each)."""
    _require_single_pair(basis)
    outcomes = tuple(
        MeasurementOutcome(
            label, np.vstack([_basis_vector(basis, occ) for occ in group])
        )
        for label, group in COARSE_GROUPS
    )
    return ProjectiveMeasurement(basis, outcomes, complete=True, name="coarse")


def noisy_optimal_measurement(basis: FockBasis) -> ProjectiveMeasurement:
    """Ten projectors combining degenerate outcome pairs into +/- superpositions;
    retains phase information under white noise better than the standard set."""
    _require_single_pair(basis)
    outcomes = []
    inv = 1.0 / math.sqrt(2.0)
    for occ_a, occ_b in _SUPERPOSITION_PAIRS:
        va = _basis_vector(basis, occ_a)
        vb = _basis_vector(basis, occ_b)
        la, lb = occupation_label(occ_a), occupation_label(occ_b)
        outcomes.append(MeasurementOutcome(f"plus:{la}:{lb}", (inv * (va + vb))[None, :]))
        outcomes.append(MeasurementOutcome(f"minus:{la}:{lb}", (inv * (va - vb))[None, :]))
    for occ in _SUPERPOSITION_SINGLES:
        outcomes.append(
            MeasurementOutcome(occupation_label(occ), _basis_vector(basis, occ)[None, :])
        )
    return ProjectiveMeasurement(basis, tuple(outcomes), complete=True, name="noisy-optimal")


@dataclass(frozen=True)
class ProbabilityTable:
    """Outcome probabilities and their exact phase derivatives at one phase."""

    measurement: ProjectiveMeasurement
    phi: float
    noise: float
    probabilities: np.ndarray
    derivatives: np.ndarray
    evaluator: object = field(repr=False, compare=False, default=None)

    @property
    def labels(self) -> list[str]:
        return self.measurement.labels

    def probability(self, label: str) -> float:
        return float(self.probabilities[self.labels.index(label)])

    def derivative(self, label: str) -> float:
        return float(self.derivatives[self.labels.index(label)])

    def as_dict(self) -> dict:
        return dict(zip(self.labels, self.probabilities.tolist()))


def _group_sums(measurement: ProjectiveMeasurement, per_row: np.ndarray) -> np.ndarray:
    return np.array([per_row[lo:hi].sum() for lo, hi in measurement._bounds])


def _pure_arrays(probe, measurement, noise, phi):
    unitary = PhaseUnitary(probe.basis, phi)
    out = unitary.matrix @ probe.amplitudes
    dout = derivative_state(unitary, probe)
    amps = measurement._stack.conj() @ out
    damps = measurement._stack.conj() @ dout
    p = _group_sums(measurement, np.abs(amps) ** 2)
    dp = _group_sums(measurement, 2.0 * (amps.conj() * damps).real)
    if noise:
        d = probe.basis.dimension
        p = (1.0 - noise) * p + noise * measurement.ranks / d
        dp = (1.0 - noise) * dp
    return p, dp


def _mixed_arrays(probe, measurement, phi):
    unitary = PhaseUnitary(probe.basis, phi)
    u = unitary.matrix
    rho = u @ probe.matrix @ u.conj().T
    h = phase_generator(probe.basis).matrix
    drho = -1j * (h @ rho - rho @ h)
    stack = measurement._stack
    p = _group_sums(measurement, np.einsum("rd,de,re->r", stack.conj(), rho, stack).real)
    dp = _group_sums(measurement, np.einsum("rd,de,re->r", stack.conj(), drho, stack).real)
    return p, dp


def _table_arrays(probe, measurement, noise, phi):
    if isinstance(probe, PureState):
        p, dp = _pure_arrays(probe, measurement, noise, phi)
    else:
        p, dp = _mixed_arrays(probe, measurement, phi)
    if p.min() < -PROBABILITY_CLAMP or p.max() > 1.0 + PROBABILITY_CLAMP:
        raise ValueError(f"probability outside [0, 1] beyond tolerance at phi={phi!r}")
    p = np.clip(p, 0.0, 1.0)
    if measurement.complete and abs(p.sum() - 1.0) > PROBABILITY_SUM_ATOL:
        raise ValueError("complete measurement probabilities do not sum to 1")
    return p, dp


def outcome_probabilities(
    probe: PureState | DensityOperator,
    measurement: ProjectiveMeasurement,
    phi: float,
    noise: float = 0.0,
) -> ProbabilityTable:
    """Outcome distribution at phase ``phi`` with optional white noise.

    For a pure probe the white-noise channel is applied in closed form,
    p' = (1-eps)p + eps*rank/d.  A DensityOperator probe must carry its
    noise already; passing noise > 0 with one would apply it twice.
    """
    _require_same_basis(probe.basis, measurement.basis)
    if not 0.0 <= noise < 1.0:
        raise ValueError(f"noise={noise!r} outside [0, 1)")
    if noise and isinstance(probe, DensityOperator):
        raise ValueError(
            "refusing to add white noise on top of a density-operator probe; "
            "bake it into the state or pass a pure probe"
        )
    evaluator = partial(_table_arrays, probe, measurement, noise)
    p, dp = evaluator(phi)
    return ProbabilityTable(
        measurement=measurement,
        phi=float(phi),
        noise=float(noise),
        probabilities=p,
        derivatives=dp,
        evaluator=evaluator,
    )


def probability_grid(
    probe: PureState | DensityOperator,
    measurement: ProjectiveMeasurement,
    phis: np.ndarray,
    noise: float = 0.0,
):
    """Vectorized outcome probabilities over a phase grid.

    Returns (P, DP) of shape (outcomes, len(phis)).
    """
    _require_same_basis(probe.basis, measurement.basis)
    if not 0.0 <= noise < 1.0:
        raise ValueError(f"noise={noise!r} outside [0, 1)")
    phis = np.asarray(phis, dtype=float)
    if isinstance(probe, DensityOperator):
        if noise:
            raise ValueError("noise must be baked into a density-operator probe")
        cols = [_mixed_arrays(probe, measurement, phi) for phi in phis]
        p = np.stack([c[0] for c in cols], axis=1)
        dp = np.stack([c[1] for c in cols], axis=1)
        return p, dp
    spec = PhaseUnitary(probe.basis, 0.0).generator_spectrum
    v = spec.eigenvectors
    lam = spec.eigenvalues
    w = v.conj().T @ probe.amplitudes
    modes = np.exp(-1j * np.outer(lam, phis)) * w[:, None]  # (d, K)
    outs = v @ modes
    douts = v @ (-1j * lam[:, None] * modes)
    amps = measurement._stack.conj() @ outs  # (rows, K)
    damps = measurement._stack.conj() @ douts
    rows_p = np.abs(amps) ** 2
    rows_dp = 2.0 * (amps.conj() * damps).real
    p = np.stack([rows_p[lo:hi].sum(axis=0) for lo, hi in measurement._bounds])
    dp = np.stack([rows_dp[lo:hi].sum(axis=0) for lo, hi in measurement._bounds])
    if noise:
        d = probe.basis.dimension
        p = (1.0 - noise) * p + noise * measurement.ranks[:, None] / d
        dp = (1.0 - noise) * dp
    return p, dp


def standard_probability_curves(indistinguishability: float, phis: np.ndarray):
    """Closed-form outcome curves of the standard measurement on the pure
    single-pair probe: (labels, P, DP) with arrays shaped (10, len(phis)).

    The last three outcomes are identically zero; they are kept so the
    arrays align with the measurement's outcome order.
    """
    i = float(indistinguishability)
    phis = np.atleast_1d(np.asarray(phis, dtype=float))
    s, c = np.sin(phis), np.cos(phis)
    sh, ch = np.sin(phis / 2.0), np.cos(phis / 2.0)
    zero = np.zeros_like(phis)
    p = np.stack(
        [
            i * s**2 / 2.0,
            i * s**2 / 2.0,
            i * c**2,
            (1.0 - i) * s**2 / 4.0,
            (1.0 - i) * s**2 / 4.0,
            (1.0 - i) * ch**4,
            (1.0 - i) * sh**4,
            zero,
            zero,
            zero,
        ]
    )
    dp = np.stack(
        [
            i * s * c,
            i * s * c,
            -2.0 * i * c * s,
            (1.0 - i) * s * c / 2.0,
            (1.0 - i) * s * c / 2.0,
            -2.0 * (1.0 - i) * ch**3 * sh,
            2.0 * (1.0 - i) * sh**3 * ch,
            zero,
            zero,
            zero,
        ]
    )
    labels = [occupation_label(occ) for occ in STANDARD_OUTCOMES]
    return labels, p, dp


def coarse_probability_curves(indistinguishability: float, phis: np.ndarray):
    """Closed-form outcome curves of the coarse measurement: (labels, P, DP)."""
    i = float(indistinguishability)
    phis = np.atleast_1d(np.asarray(phis, dtype=float))
    s2 = np.sin(phis) ** 2
    two_phi = 2.0 * phis
    p_hh = (1.0 + i) * s2 / 4.0
    dp_hh = (1.0 + i) * np.sin(two_phi) / 4.0
    p_hv = (3.0 - i + (1.0 + i) * np.cos(two_phi)) / 4.0
    dp_hv = -(1.0 + i) * np.sin(two_phi) / 2.0
    labels = [label for label, _ in COARSE_GROUPS]
    return labels, np.stack([p_hh, p_hh, p_hv]), np.stack([dp_hh, dp_hh, dp_hv])
