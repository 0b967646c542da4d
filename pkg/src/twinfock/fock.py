"""Fixed-photon-number Fock sector of a two-port interferometer with an
auxiliary distinguishing label.

Four bosonic modes: the two interferometer ports (horizontal/vertical
polarization in the photon-pair experiment) times two values of an
auxiliary label (spatial path a/b).  A probe of ``n`` photon pairs lives
in the 2n-photon sector, whose dimension is (2n+3)(2n+2)(2n+1)/6.  All
operators here are restricted to that sector, so no Fock-space cutoff is
ever involved; annihilation operators are rectangular maps into the
sector with one photon less.
"""

from __future__ import annotations

import math
import operator
from dataclasses import dataclass, field
from enum import IntEnum
from functools import lru_cache

import numpy as np

HERMITICITY_ATOL = 1e-12
NORM_ATOL = 1e-12
TRACE_ATOL = 1e-12
EIGENVALUE_FLOOR = -1e-12


class Mode(IntEnum):
    """The four modes, in the fixed order (h_a, v_a, h_b, v_b)."""

    H_A = 0
    V_A = 1
    H_B = 2
    V_B = 3

    @property
    def polarization(self) -> str:
        return "h" if self in (Mode.H_A, Mode.H_B) else "v"

    @property
    def path(self) -> "PathLabel":
        return PathLabel.A if self in (Mode.H_A, Mode.V_A) else PathLabel.B


class PathLabel(IntEnum):
    """Auxiliary label distinguishing otherwise identical photons."""

    A = 0
    B = 1

    @property
    def modes(self) -> tuple[Mode, Mode]:
        return (Mode.H_A, Mode.V_A) if self is PathLabel.A else (Mode.H_B, Mode.V_B)


_POL_LETTER = ("h", "v", "h", "v")


def occupation_label(occupation: tuple[int, int, int, int]) -> str:
    """Compact human-readable name of an occupation tuple.

    Each mode contributes its photon count, followed by its polarization
    letter when the count is nonzero: (1, 0, 0, 1) -> "1h001v".
    """
    parts = []
    for count, letter in zip(occupation, _POL_LETTER):
        parts.append(f"{count}{letter}" if count else "0")
    return "".join(parts)


def sector_dimension(total: int) -> int:
    """Number of four-mode occupations with the given photon total."""
    return math.comb(total + 3, 3)


@lru_cache(maxsize=None)
def _sector_states(total: int) -> tuple[tuple[int, int, int, int], ...]:
    # ascending lexicographic enumeration; index order is part of the API
    states = []
    for n0 in range(total + 1):
        for n1 in range(total - n0 + 1):
            for n2 in range(total - n0 - n1 + 1):
                states.append((n0, n1, n2, total - n0 - n1 - n2))
    return tuple(states)


@dataclass(frozen=True)
class FockBasis:
    """Ordered basis of the 2n-photon sector for ``n`` photon pairs."""

    n: int
    states: tuple[tuple[int, int, int, int], ...] = field(
        init=False, repr=False, compare=False
    )
    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        n = operator.index(self.n)
        if n < 1:
            raise ValueError(f"need at least one photon pair, got n={self.n}")
        object.__setattr__(self, "n", n)
        states = _sector_states(2 * n)
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "_index", {occ: i for i, occ in enumerate(states)})

    @property
    def total_photons(self) -> int:
        return 2 * self.n

    @property
    def dimension(self) -> int:
        return len(self.states)

    def index(self, occupation) -> int:
        occ = tuple(int(c) for c in occupation)
        try:
            return self._index[occ]
        except KeyError:
            raise KeyError(
                f"{occ} is not a {self.total_photons}-photon occupation"
            ) from None

    def occupation(self, index: int) -> tuple[int, int, int, int]:
        return self.states[index]

    def label(self, index: int) -> str:
        return occupation_label(self.states[index])

    def labels(self) -> list[str]:
        return [occupation_label(occ) for occ in self.states]


def build_basis(n: int) -> FockBasis:
    """Basis of the 2n-photon sector; rejects n < 1 and non-integer n."""
    return FockBasis(n)


@dataclass(frozen=True)
class PureState:
    """Normalized state vector over a :class:`FockBasis`."""

    basis: FockBasis
    amplitudes: np.ndarray

    def __post_init__(self):
        amp = np.array(self.amplitudes, dtype=np.complex128)
        if amp.shape != (self.basis.dimension,):
            raise ValueError(
                f"amplitude vector has shape {amp.shape}, "
                f"expected ({self.basis.dimension},)"
            )
        norm = np.linalg.norm(amp)
        if abs(norm - 1.0) > NORM_ATOL:
            raise ValueError(f"state norm {norm!r} is not 1 within {NORM_ATOL}")
        amp.flags.writeable = False
        object.__setattr__(self, "amplitudes", amp)

    @classmethod
    def normalized(cls, basis: FockBasis, amplitudes) -> "PureState":
        amp = np.asarray(amplitudes, dtype=np.complex128)
        norm = np.linalg.norm(amp)
        if norm == 0.0:
            raise ValueError("cannot normalize the zero vector")
        return cls(basis, amp / norm)

    def amplitude(self, occupation) -> complex:
        return complex(self.amplitudes[self.basis.index(occupation)])

    def density(self) -> "DensityOperator":
        return DensityOperator(self.basis, np.outer(self.amplitudes, self.amplitudes.conj()))


@dataclass(frozen=True)
class DensityOperator:
    """Density matrix over a :class:`FockBasis`; validated on construction."""

    basis: FockBasis
    matrix: np.ndarray

    def __post_init__(self):
        rho = np.array(self.matrix, dtype=np.complex128)
        d = self.basis.dimension
        if rho.shape != (d, d):
            raise ValueError(f"density matrix has shape {rho.shape}, expected ({d}, {d})")
        if np.max(np.abs(rho - rho.conj().T)) > HERMITICITY_ATOL:
            raise ValueError("density matrix is not Hermitian within tolerance")
        tr = np.trace(rho).real
        if abs(tr - 1.0) > TRACE_ATOL:
            raise ValueError(f"trace {tr!r} is not 1 within {TRACE_ATOL}")
        if np.linalg.eigvalsh(rho)[0] < EIGENVALUE_FLOOR:
            raise ValueError("density matrix has a negative eigenvalue beyond tolerance")
        rho.flags.writeable = False
        object.__setattr__(self, "matrix", rho)


@dataclass(frozen=True)
class HermitianOperator:
    """Hermitian sector operator tagged with its basis."""

    basis: FockBasis
    matrix: np.ndarray

    def __post_init__(self):
        mat = np.array(self.matrix, dtype=np.complex128)
        d = self.basis.dimension
        if mat.shape != (d, d):
            raise ValueError(f"operator has shape {mat.shape}, expected ({d}, {d})")
        if np.max(np.abs(mat - mat.conj().T)) > HERMITICITY_ATOL:
            raise ValueError("operator is not Hermitian within tolerance")
        mat.flags.writeable = False
        object.__setattr__(self, "matrix", mat)

    def __add__(self, other: "HermitianOperator") -> "HermitianOperator":
        _require_same_basis(self.basis, other.basis)
        return HermitianOperator(self.basis, self.matrix + other.matrix)


@dataclass(frozen=True)
class Spectrum:
    """Eigendecomposition of a Hermitian matrix (ascending eigenvalues)."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def _require_same_basis(a: FockBasis, b: FockBasis):
    if a != b:
        raise ValueError(f"basis mismatch: {a!r} vs {b!r}")


def annihilation_matrix(basis: FockBasis, mode: Mode) -> np.ndarray:
    """Annihilation operator as a rectangular matrix from the basis sector
    into the sector with one photon less.

    Nonzero elements: <occ - e_mode| a_mode |occ> = sqrt(occ[mode]).
    """
    mode = Mode(mode)
    lower = _sector_states(basis.total_photons - 1)
    lower_index = {occ: i for i, occ in enumerate(lower)}
    out = np.zeros((len(lower), basis.dimension), dtype=np.complex128)
    for j, occ in enumerate(basis.states):
        c = occ[mode]
        if c == 0:
            continue
        target = list(occ)
        target[mode] = c - 1
        out[lower_index[tuple(target)], j] = math.sqrt(c)
    return out


@lru_cache(maxsize=None)
def _jy_matrix(n: int, path: PathLabel) -> np.ndarray:
    basis = build_basis(n)
    a_h = annihilation_matrix(basis, path.modes[0])
    a_v = annihilation_matrix(basis, path.modes[1])
    hop = a_h.conj().T @ a_v  # h† v, square in the 2n sector
    mat = -0.5j * (hop - hop.conj().T)
    mat.flags.writeable = False
    return mat


def jy_operator(basis: FockBasis, path: PathLabel) -> HermitianOperator:
    """Angular-momentum y-component of one path's port pair,
    -i (h† v - h v†) / 2, restricted to the basis sector."""
    return HermitianOperator(basis, _jy_matrix(basis.n, PathLabel(path)))


def phase_generator(basis: FockBasis) -> HermitianOperator:
    """Generator of a common rotation of both paths' port pairs: J_a + J_b.

    Acts on each path identically, so it commutes with both path photon
    numbers; phase imprinting never mixes the distinguishing label.
    """
    return HermitianOperator(basis, _phase_generator_matrix(basis.n))


@lru_cache(maxsize=None)
def _phase_generator_matrix(n: int) -> np.ndarray:
    mat = _jy_matrix(n, PathLabel.A) + _jy_matrix(n, PathLabel.B)
    mat.flags.writeable = False
    return mat


def number_operator(basis: FockBasis, which: Mode | PathLabel) -> HermitianOperator:
    """Photon-number operator of a single mode, or of a path's two modes."""
    modes = which.modes if isinstance(which, PathLabel) else (Mode(which),)
    diag = np.zeros(basis.dimension)
    for j, occ in enumerate(basis.states):
        diag[j] = sum(occ[m] for m in modes)
    return HermitianOperator(basis, np.diag(diag.astype(np.complex128)))


def expectation(state: PureState | DensityOperator, op: HermitianOperator) -> float:
    """Real expectation value <op> in the given state."""
    _require_same_basis(state.basis, op.basis)
    if isinstance(state, PureState):
        val = np.vdot(state.amplitudes, op.matrix @ state.amplitudes)
    else:
        val = np.trace(op.matrix @ state.matrix)
    if abs(val.imag) > 1e-10:
        raise ValueError(f"expectation value has imaginary residue {val.imag!r}")
    return float(val.real)


def covariance(
    state: PureState | DensityOperator, op_a: HermitianOperator, op_b: HermitianOperator
) -> float:
    """Symmetrized covariance <{A,B}>/2 - <A><B>."""
    _require_same_basis(op_a.basis, op_b.basis)
    sym = HermitianOperator(
        op_a.basis, 0.5 * (op_a.matrix @ op_b.matrix + op_b.matrix @ op_a.matrix)
    )
    return expectation(state, sym) - expectation(state, op_a) * expectation(state, op_b)


def variance(state: PureState | DensityOperator, op: HermitianOperator) -> float:
    return covariance(state, op, op)


def eigendecompose(op: HermitianOperator | DensityOperator | np.ndarray) -> Spectrum:
    """Eigendecomposition with a hermiticity guard.

    Accepts a tagged operator, a density operator or a bare square matrix.
    """
    mat = op.matrix if isinstance(op, (HermitianOperator, DensityOperator)) else np.asarray(op)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {mat.shape}")
    scale = max(1.0, float(np.max(np.abs(mat))) if mat.size else 1.0)
    if np.max(np.abs(mat - mat.conj().T)) > 1e-10 * scale:
        raise ValueError("matrix is not Hermitian within tolerance")
    w, v = np.linalg.eigh(mat)
    return Spectrum(eigenvalues=w, eigenvectors=v)
