"""Phase encoding: the unitary exp(-i*phi*H) on any pair sector, its exact
derivative channel, and the concrete half-wave-plate transformation of the
two-photon experiment."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from twinfock.fock import (
    DensityOperator,
    FockBasis,
    PureState,
    Spectrum,
    _require_same_basis,
    build_basis,
    eigendecompose,
    phase_generator,
)


@lru_cache(maxsize=None)
def _generator_spectrum(n: int) -> Spectrum:
    spec = eigendecompose(phase_generator(build_basis(n)))
    spec.eigenvalues.flags.writeable = False
    spec.eigenvectors.flags.writeable = False
    return spec


@dataclass(frozen=True)
class PhaseUnitary:
    """exp(-i*phi*H) built from the cached eigendecomposition of H."""

    basis: FockBasis
    phi: float
    matrix: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "phi", float(self.phi))
        spec = _generator_spectrum(self.basis.n)
        v = spec.eigenvectors
        u = (v * np.exp(-1j * self.phi * spec.eigenvalues)) @ v.conj().T
        u.flags.writeable = False
        object.__setattr__(self, "matrix", u)

    @property
    def generator_spectrum(self) -> Spectrum:
        return _generator_spectrum(self.basis.n)

    def apply(self, state: PureState | DensityOperator):
        return apply_unitary(self, state)


def phase_unitary(basis: FockBasis, phi: float) -> PhaseUnitary:
    return PhaseUnitary(basis, phi)


def apply_unitary(
    unitary: PhaseUnitary, state: PureState | DensityOperator
) -> PureState | DensityOperator:
    """U|psi> or U rho U†, same kind as the input."""
    _require_same_basis(unitary.basis, state.basis)
    u = unitary.matrix
    if isinstance(state, PureState):
        return PureState(state.basis, u @ state.amplitudes)
    return DensityOperator(state.basis, u @ state.matrix @ u.conj().T)


def derivative_state(unitary: PhaseUnitary, state: PureState) -> np.ndarray:
    """d/dphi of U|psi>, i.e. -i H U |psi>.  Unnormalized vector; outcome
    derivatives follow as dp/dphi = 2 Re <out|P|d_out>."""
    _require_same_basis(unitary.basis, state.basis)
    h = phase_generator(state.basis).matrix
    return -1j * (h @ (unitary.matrix @ state.amplitudes))


@dataclass(frozen=True)
class HwpSetting:
    """Physical half-wave-plate angle; the interferometric phase is 4*theta."""

    theta: float

    @property
    def phase(self) -> float:
        return 4.0 * self.theta


def hwp_mode_matrix(theta: float) -> np.ndarray:
    """Single-photon action of the wave plate on the four modes.

    Within each path the port pair transforms as h -> c*h + s*v,
    v -> s*h - c*v with c = cos(2*theta), s = sin(2*theta); the plate is an
    improper rotation (determinant -1 per block), not exp(-i*phi*Jy).
    """
    c = math.cos(2.0 * theta)
    s = math.sin(2.0 * theta)
    block = np.array([[c, s], [s, -c]])
    out = np.zeros((4, 4))
    out[:2, :2] = block
    out[2:, 2:] = block
    return out


def hwp_interferometer(state: PureState, theta: float) -> PureState:
    """Send a two-photon state through the wave plate.

    Expands each two-photon creation monomial under the mode map: with
    T = hwp_mode_matrix, a†_m -> sum_i T[i, m] a†_i.  Only defined on the
    single-pair sector.
    """
    basis = state.basis
    if basis.n != 1:
        raise ValueError("wave-plate transform is defined on the n=1 sector only")
    t = hwp_mode_matrix(theta)
    sqrt2 = math.sqrt(2.0)
    out = np.zeros(basis.dimension, dtype=np.complex128)
    for j, occ in enumerate(basis.states):
        amp = state.amplitudes[j]
        if amp == 0:
            continue
        modes = [m for m, c in enumerate(occ) for _ in range(c)]
        m1, m2 = modes
        norm_in = sqrt2 if m1 == m2 else 1.0
        for i in range(4):
            ti = t[i, m1]
            if ti == 0.0:
                continue
            for k in range(4):
                tk = t[k, m2]
                if tk == 0.0:
                    continue
                target = [0, 0, 0, 0]
                target[i] += 1
                target[k] += 1
                weight = sqrt2 if i == k else 1.0
                out[basis.index(tuple(target))] += amp * ti * tk * weight / norm_in
    return PureState(basis, out)
