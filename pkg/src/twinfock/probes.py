"""Probe states: n photon pairs with tunable indistinguishability, their
white-noise mixtures, and the wave-plate-angle parameterization used in
the two-photon experiment.

Indistinguishability ``i`` is the primary parameter everywhere; physical
wave-plate angles are a thin adapter on top (``indistinguishability_from_angle``),
so analysis code never handles angles.
"""

from __future__ import annotations

import math
import operator
from dataclasses import dataclass

import numpy as np

from twinfock.fock import DensityOperator, FockBasis, PureState

CLAMP_ATOL = 1e-12


def _clamp_unit(value: float, name: str, upper: float = 1.0) -> float:
    """Snap value onto [0, upper], tolerating 1e-12 of rounding overshoot."""
    v = float(value)
    if v < -CLAMP_ATOL or v > upper + CLAMP_ATOL:
        raise ValueError(f"{name}={value!r} outside [0, {upper}]")
    return min(max(v, 0.0), upper)


@dataclass(frozen=True)
class ProbeSpec:
    """Physical scenario: n photon pairs, indistinguishability, white noise."""

    n: int
    indistinguishability: float
    noise: float = 0.0

    def __post_init__(self):
        n = operator.index(self.n)
        if n < 1:
            raise ValueError(f"n={self.n} must be a positive integer")
        object.__setattr__(self, "n", n)
        object.__setattr__(
            self,
            "indistinguishability",
            _clamp_unit(self.indistinguishability, "indistinguishability"),
        )
        eps = _clamp_unit(self.noise, "noise")
        if eps >= 1.0:
            raise ValueError("noise must be < 1")
        object.__setattr__(self, "noise", eps)


@dataclass(frozen=True)
class PreparationAngle:
    """Physical angle of the preparation wave plate, with the visibility
    ceiling i_max on the indistinguishability it can reach."""

    varphi: float
    i_max: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "varphi", float(self.varphi))
        object.__setattr__(self, "i_max", _clamp_unit(self.i_max, "i_max"))

    @property
    def indistinguishability(self) -> float:
        return indistinguishability_from_angle(self.varphi, self.i_max)


def indistinguishability_from_angle(varphi: float, i_max: float = 1.0) -> float:
    """i_max * sin^2(2*varphi), clamped to [0, i_max] against rounding."""
    i_max = _clamp_unit(i_max, "i_max")
    s = math.sin(2.0 * varphi)
    return min(max(i_max * s * s, 0.0), i_max)


def pure_probe(basis: FockBasis, indistinguishability: float) -> PureState:
    """Probe of n photon pairs with pairwise indistinguishability ``i``.

    One port carries n photons of a single auxiliary label; the other port
    carries a binomial superposition of k photons leaked into the second
    label:  sum_k sqrt(C(n,k)) i^((n-k)/2) (1-i)^(k/2) |n, n-k, 0, k>.
    """
    i = _clamp_unit(indistinguishability, "indistinguishability")
    n = basis.n
    amps = np.zeros(basis.dimension, dtype=np.complex128)
    for k in range(n + 1):
        weight = math.comb(n, k) * i ** (n - k) * (1.0 - i) ** k
        amps[basis.index((n, n - k, 0, k))] = math.sqrt(weight)
    return PureState.normalized(basis, amps)


def mixed_probe(basis: FockBasis, indistinguishability: float, noise: float) -> DensityOperator:
    """White-noise mixture (1-eps)|psi><psi| + eps * Identity/d."""
    eps = _clamp_unit(noise, "noise")
    if eps >= 1.0:
        raise ValueError("noise must be < 1")
    psi = pure_probe(basis, indistinguishability).amplitudes
    d = basis.dimension
    rho = (1.0 - eps) * np.outer(psi, psi.conj()) + (eps / d) * np.eye(d)
    return DensityOperator(basis, rho)


def two_photon_probe(basis: FockBasis, varphi: float, i_max: float = 1.0) -> PureState:
    """Experimentally prepared single-pair probe, sqrt(i)|1h 1v 0 0> +
    sqrt(1-i)|1h 0 0 1v| with i set by the wave-plate angle."""
    if basis.n != 1:
        raise ValueError("two-photon probe needs the single-pair basis (n=1)")
    i = indistinguishability_from_angle(varphi, i_max)
    amps = np.zeros(basis.dimension, dtype=np.complex128)
    amps[basis.index((1, 1, 0, 0))] = math.sqrt(i)
    amps[basis.index((1, 0, 0, 1))] = math.sqrt(1.0 - i)
    return PureState.normalized(basis, amps)
