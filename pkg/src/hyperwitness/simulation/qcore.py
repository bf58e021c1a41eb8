"""
Dense Qubit States for Two-Photon Hyperentanglement
===================================================

Pure and mixed states over a labelled register of up to six qubits: two
parties (A, B) times three degrees of freedom (polarization ``pi``,
left/right momentum ``k``, internal/external emission cone ``c``).

The register order is fixed to (pi_A, pi_B, k_A, k_B, c_A, c_B) and basis
indices are big-endian in that order, so the hyperentangled state is a plain
Kronecker product of one Bell pair per DOF. |H>, |l>, |I> map to |0> and
|V>, |r>, |E> map to |1>.
"""

from __future__ import annotations

import math
import string
from dataclasses import dataclass
from enum import Enum
from typing import Any, Iterable, Mapping, Optional, Sequence, Union

import numpy as np

from ..utils.eigen import DEFAULT_MAX_SWEEPS, DEFAULT_TOLERANCE, jacobi_eigvalsh
from ..utils.error_handling import (
    InvalidDensityMatrix,
    InvalidParameter,
    InvalidProbability,
    InvalidSubsystem,
    NumericalInconsistency,
    RegisterConflict,
)
from ..utils.logger import get_logger

logger = get_logger(__name__)

NORM_TOLERANCE = 1e-12
HERMITIAN_TOLERANCE = 1e-12
TRACE_TOLERANCE = 1e-12
POSITIVITY_TOLERANCE = 1e-10
EIGENVALUE_CUTOFF = 1e-12
ENTROPY_SYMMETRY_TOLERANCE = 1e-9
MAX_QUBITS = 6


@dataclass(frozen=True)
class Tolerances:
    """Numerical tolerances of density-matrix checks and the eigen solver."""

    hermitian: float = HERMITIAN_TOLERANCE
    trace: float = TRACE_TOLERANCE
    positivity: float = POSITIVITY_TOLERANCE
    jacobi: float = DEFAULT_TOLERANCE
    jacobi_max_sweeps: int = DEFAULT_MAX_SWEEPS

    @classmethod
    def from_config(cls, numerics: Optional[Mapping[str, Any]]) -> "Tolerances":
        """Build from the ``numerics`` config section; missing keys keep defaults."""
        numerics = numerics or {}
        defaults = cls()
        return cls(
            hermitian=float(numerics.get("hermitian_tolerance", defaults.hermitian)),
            trace=float(numerics.get("trace_tolerance", defaults.trace)),
            positivity=float(numerics.get("positivity_tolerance", defaults.positivity)),
            jacobi=float(numerics.get("jacobi_tolerance", defaults.jacobi)),
            jacobi_max_sweeps=int(numerics.get("jacobi_max_sweeps", defaults.jacobi_max_sweeps)),
        )


DEFAULT_TOLERANCES = Tolerances()


class Party(Enum):
    """The two photons"""

    A = "A"
    B = "B"


class Dof(Enum):
    """Degrees of freedom, in register order"""

    PI = "pi"
    K = "k"
    C = "c"

    @classmethod
    def parse(cls, value: Union["Dof", str]) -> "Dof":
        if isinstance(value, Dof):
            return value
        try:
            return cls(str(value).lower())
        except ValueError as e:
            raise InvalidParameter(
                f"Unknown degree of freedom: {value!r} (expected pi, k or c)",
                component="qcore",
            ) from e


class BellKind(Enum):
    """|phi> = (|00> + e^{i phase}|11>)/sqrt2, |psi> = (|01> + e^{i phase}|10>)/sqrt2"""

    PHI = "phi"
    PSI = "psi"


# Basis letters for |0>, |1> of each DOF
BASIS_LETTERS: dict[Dof, tuple[str, str]] = {
    Dof.PI: ("H", "V"),
    Dof.K: ("l", "r"),
    Dof.C: ("I", "E"),
}

# Bell pair of each DOF in the ideal state
IDEAL_BELL: dict[Dof, BellKind] = {
    Dof.PI: BellKind.PHI,
    Dof.K: BellKind.PSI,
    Dof.C: BellKind.PHI,
}


@dataclass(frozen=True)
class QubitLabel:
    """One qubit: a party and a degree of freedom."""

    party: Party
    dof: Dof

    @property
    def name(self) -> str:
        return f"{self.dof.value}_{self.party.value}"

    @property
    def position(self) -> int:
        """Index in the canonical register."""
        return REGISTER.index(self)

    @classmethod
    def parse(cls, text: Union["QubitLabel", str]) -> "QubitLabel":
        """Parse labels such as ``pi_A`` or ``k_B``."""
        if isinstance(text, QubitLabel):
            return text
        dof, _, party = str(text).partition("_")
        try:
            return cls(Party(party.upper()), Dof(dof.lower()))
        except ValueError as e:
            raise InvalidParameter(
                f"Malformed qubit label: {text!r}", component="qcore"
            ) from e

    def __str__(self) -> str:
        return self.name


REGISTER: tuple[QubitLabel, ...] = tuple(
    QubitLabel(party, dof) for dof in Dof for party in Party
)


def dof_qubits(dof: Union[Dof, str]) -> tuple[QubitLabel, QubitLabel]:
    """(A, B) qubits of one degree of freedom."""
    dof = Dof.parse(dof)
    return QubitLabel(Party.A, dof), QubitLabel(Party.B, dof)


def party_qubits(party: Party, register: Sequence[QubitLabel] = REGISTER) -> frozenset:
    return frozenset(label for label in register if label.party == party)


def canonical_order(labels: Iterable[QubitLabel]) -> tuple[QubitLabel, ...]:
    """Sort labels into register order, rejecting duplicates."""
    labels = list(labels)
    if len(set(labels)) != len(labels):
        raise RegisterConflict(
            "Duplicate qubit labels", context={"labels": [str(x) for x in labels]}
        )
    return tuple(sorted(labels, key=lambda label: label.position))


def _check_register(register: tuple[QubitLabel, ...]) -> None:
    if not register or len(register) > MAX_QUBITS:
        raise RegisterConflict(
            f"Register must hold 1..{MAX_QUBITS} qubits, got {len(register)}"
        )
    if canonical_order(register) != register:
        raise RegisterConflict(
            "Register is not in canonical order",
            context={"register": [str(x) for x in register]},
        )


def _permutation(source: Sequence[QubitLabel], target: Sequence[QubitLabel]) -> list[int]:
    return [list(source).index(label) for label in target]


def _readonly(array: np.ndarray) -> np.ndarray:
    array.flags.writeable = False
    return array


@dataclass(frozen=True, eq=False)
class StateVector:
    """Normalized ket over an ordered register."""

    amplitudes: np.ndarray
    register: tuple[QubitLabel, ...] = REGISTER

    def __post_init__(self) -> None:
        register = tuple(QubitLabel.parse(x) for x in self.register)
        _check_register(register)
        amplitudes = np.array(self.amplitudes, dtype=complex).reshape(-1)
        if amplitudes.size != 2 ** len(register):
            raise InvalidParameter(
                f"{amplitudes.size} amplitudes do not fit {len(register)} qubits",
                component="qcore",
            )
        norm = float(np.linalg.norm(amplitudes))
        if abs(norm - 1.0) > NORM_TOLERANCE:
            raise InvalidParameter(
                f"State is not normalized (norm={norm:.15g})", component="qcore"
            )
        object.__setattr__(self, "amplitudes", _readonly(amplitudes))
        object.__setattr__(self, "register", register)

    @property
    def num_qubits(self) -> int:
        return len(self.register)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def basis_label(self, index: int) -> str:
        """Letters of one basis ket, e.g. ``HHlrII``."""
        bits = format(index, f"0{self.num_qubits}b")
        return "".join(
            BASIS_LETTERS[label.dof][int(bit)] for label, bit in zip(self.register, bits)
        )

    def nonzero(self, tol: float = NORM_TOLERANCE) -> list[tuple[int, complex]]:
        return [(int(i), complex(self.amplitudes[i])) for i in np.flatnonzero(np.abs(self.amplitudes) > tol)]

    def allclose(self, other: "StateVector", atol: float = 1e-12) -> bool:
        return self.register == other.register and bool(
            np.allclose(self.amplitudes, other.amplitudes, rtol=0.0, atol=atol)
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "register": [label.name for label in self.register],
            "amplitudes": [[float(a.real), float(a.imag)] for a in self.amplitudes],
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "StateVector":
        amplitudes = [complex(re, im) for re, im in data["amplitudes"]]
        register = tuple(QubitLabel.parse(x) for x in data["register"])
        return cls(np.array(amplitudes), register)


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Density operator over an ordered register.

    Construction checks shape only; physicality is checked by
    ``validate_density`` so that invalid inputs can still be represented
    and reported.
    """

    entries: np.ndarray
    register: tuple[QubitLabel, ...] = REGISTER

    def __post_init__(self) -> None:
        register = tuple(QubitLabel.parse(x) for x in self.register)
        _check_register(register)
        entries = np.array(self.entries, dtype=complex)
        dim = 2 ** len(register)
        if entries.shape != (dim, dim):
            raise InvalidParameter(
                f"Matrix of shape {entries.shape} does not fit {len(register)} qubits",
                component="qcore",
            )
        object.__setattr__(self, "entries", _readonly(entries))
        object.__setattr__(self, "register", register)

    @property
    def num_qubits(self) -> int:
        return len(self.register)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def trace(self) -> float:
        return float(np.trace(self.entries).real)

    def purity(self) -> float:
        return float(np.real(np.einsum("ij,ji->", self.entries, self.entries)))

    def allclose(self, other: "DensityMatrix", atol: float = 1e-12) -> bool:
        return self.register == other.register and bool(
            np.allclose(self.entries, other.entries, rtol=0.0, atol=atol)
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "register": [label.name for label in self.register],
            "dim": self.dim,
            "entries": [[float(z.real), float(z.imag)] for z in self.entries.reshape(-1)],
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "DensityMatrix":
        register = tuple(QubitLabel.parse(x) for x in data["register"])
        dim = 2 ** len(register)
        flat = np.array([complex(re, im) for re, im in data["entries"]])
        return cls(flat.reshape(dim, dim), register)


@dataclass(frozen=True)
class Bipartition:
    """Split of a register into two disjoint sides."""

    side_a: frozenset
    side_b: frozenset

    def __post_init__(self) -> None:
        object.__setattr__(self, "side_a", frozenset(QubitLabel.parse(x) for x in self.side_a))
        object.__setattr__(self, "side_b", frozenset(QubitLabel.parse(x) for x in self.side_b))

    @classmethod
    def between_parties(cls, register: Sequence[QubitLabel] = REGISTER) -> "Bipartition":
        """The A|B split: every qubit of photon A against every qubit of photon B."""
        return cls(party_qubits(Party.A, register), party_qubits(Party.B, register))

    def validate(self, register: Sequence[QubitLabel]) -> None:
        if self.side_a & self.side_b:
            raise InvalidSubsystem(
                "Bipartition sides overlap",
                context={"overlap": [str(x) for x in self.side_a & self.side_b]},
            )
        if (self.side_a | self.side_b) != frozenset(register):
            raise InvalidSubsystem(
                "Bipartition does not cover the register",
                context={"register": [str(x) for x in register]},
            )
        if not self.side_a or not self.side_b:
            raise InvalidSubsystem("Bipartition sides must be nonempty")


def qubit_state(label: Union[QubitLabel, str], bit: int) -> StateVector:
    """Single-qubit basis ket |bit>."""
    if bit not in (0, 1):
        raise InvalidParameter(f"Bit must be 0 or 1, got {bit!r}", component="qcore")
    amplitudes = np.zeros(2, dtype=complex)
    amplitudes[bit] = 1.0
    return StateVector(amplitudes, (QubitLabel.parse(label),))


def basis_state(bits: str, register: Sequence[QubitLabel] = REGISTER) -> StateVector:
    """Computational basis ket, bits given big-endian in register order."""
    register = tuple(register)
    if len(bits) != len(register) or set(bits) - {"0", "1"}:
        raise InvalidParameter(
            f"Bit string {bits!r} does not fit {len(register)} qubits", component="qcore"
        )
    amplitudes = np.zeros(2 ** len(register), dtype=complex)
    amplitudes[int(bits, 2)] = 1.0
    return StateVector(amplitudes, register)


def make_bell(
    kind: Union[BellKind, str], phase: float, dof: Union[Dof, str]
) -> StateVector:
    """Bell pair of one DOF with relative phase ``phase`` (radians)."""
    kind = BellKind(kind) if not isinstance(kind, BellKind) else kind
    if not math.isfinite(phase):
        raise InvalidParameter(f"Phase must be finite, got {phase!r}", component="qcore")

    amplitudes = np.zeros(4, dtype=complex)
    if kind is BellKind.PHI:
        amplitudes[0b00] = 1.0
        amplitudes[0b11] = np.exp(1j * phase)
    else:
        amplitudes[0b01] = 1.0
        amplitudes[0b10] = np.exp(1j * phase)
    return StateVector(amplitudes / math.sqrt(2.0), dof_qubits(dof))


def hyper_state(
    phase_pi: float = 0.0, phase_k: float = 0.0, phase_c: float = 0.0
) -> StateVector:
    """Six-qubit hyperentangled state |phi>_pi (x) |psi>_k (x) |phi>_c."""
    phases = {Dof.PI: phase_pi, Dof.K: phase_k, Dof.C: phase_c}
    state = tensor(make_bell(IDEAL_BELL[dof], phases[dof], dof) for dof in Dof)
    logger.debug(f"Built hyperentangled state with phases {tuple(phases.values())}")
    return state


def tensor(factors: Iterable[StateVector]) -> StateVector:
    """Tensor product of kets on disjoint registers, in canonical order."""
    factors = list(factors)
    if not factors:
        raise InvalidParameter("tensor needs at least one factor", component="qcore")
    labels = [label for factor in factors for label in factor.register]
    if len(set(labels)) != len(labels):
        raise RegisterConflict(
            "Factor registers overlap", context={"labels": [str(x) for x in labels]}
        )

    amplitudes = factors[0].amplitudes
    for factor in factors[1:]:
        amplitudes = np.kron(amplitudes, factor.amplitudes)

    target = canonical_order(labels)
    axes = _permutation(labels, target)
    amplitudes = amplitudes.reshape((2,) * len(labels)).transpose(axes).reshape(-1)
    return StateVector(amplitudes, target)


def tensor_density(factors: Iterable[DensityMatrix]) -> DensityMatrix:
    """Tensor product of density matrices on disjoint registers."""
    factors = list(factors)
    if not factors:
        raise InvalidParameter("tensor_density needs at least one factor", component="qcore")
    labels = [label for factor in factors for label in factor.register]
    if len(set(labels)) != len(labels):
        raise RegisterConflict(
            "Factor registers overlap", context={"labels": [str(x) for x in labels]}
        )

    entries = factors[0].entries
    for factor in factors[1:]:
        entries = np.kron(entries, factor.entries)

    n = len(labels)
    target = canonical_order(labels)
    perm = _permutation(labels, target)
    axes = perm + [n + p for p in perm]
    entries = entries.reshape((2,) * (2 * n)).transpose(axes).reshape(2**n, 2**n)
    return DensityMatrix(entries, target)


def density(state: StateVector) -> DensityMatrix:
    """|psi><psi|."""
    a = state.amplitudes
    return DensityMatrix(np.outer(a, a.conj()), state.register)


def maximally_mixed(register: Sequence[QubitLabel] = REGISTER) -> DensityMatrix:
    dim = 2 ** len(register)
    return DensityMatrix(np.eye(dim, dtype=complex) / dim, tuple(register))


def partial_trace(rho: DensityMatrix, keep: Iterable[Union[QubitLabel, str]]) -> DensityMatrix:
    """Trace out every qubit not in ``keep``."""
    keep = frozenset(QubitLabel.parse(x) for x in keep)
    register = rho.register
    if not keep:
        raise InvalidSubsystem("Nothing to keep: subsystem is empty")
    if not keep <= frozenset(register):
        raise InvalidSubsystem(
            "Subsystem is not part of the register",
            context={"unknown": [str(x) for x in keep - frozenset(register)]},
        )
    if keep == frozenset(register):
        raise InvalidSubsystem("Subsystem equals the full register")

    n = len(register)
    rows = list(string.ascii_letters[:n])
    cols = list(string.ascii_letters[n : 2 * n])
    kept = [i for i, label in enumerate(register) if label in keep]
    for i, label in enumerate(register):
        if label not in keep:
            cols[i] = rows[i]
    output = "".join(rows[i] for i in kept) + "".join(cols[i] for i in kept)
    subscripts = "".join(rows) + "".join(cols) + "->" + output

    reduced = np.einsum(subscripts, rho.entries.reshape((2,) * (2 * n)))
    dim = 2 ** len(kept)
    return DensityMatrix(reduced.reshape(dim, dim), tuple(register[i] for i in kept))


def validate_density(rho: DensityMatrix, tolerances: Tolerances = DEFAULT_TOLERANCES) -> None:
    """Raise InvalidDensityMatrix unless rho is Hermitian, unit trace and positive."""
    _check_hermitian_unit_trace(rho, tolerances)
    smallest = float(np.linalg.eigvalsh(rho.entries)[0])
    if smallest < -tolerances.positivity:
        raise InvalidDensityMatrix(
            "Density matrix has a negative eigenvalue",
            context={"min_eigenvalue": smallest},
        )


def _check_hermitian_unit_trace(rho: DensityMatrix, tolerances: Tolerances) -> None:
    deviation = float(np.max(np.abs(rho.entries - rho.entries.conj().T)))
    if deviation > tolerances.hermitian:
        raise InvalidDensityMatrix(
            "Density matrix is not Hermitian", context={"max_deviation": deviation}
        )
    trace = np.trace(rho.entries)
    if abs(trace - 1.0) > tolerances.trace:
        raise InvalidDensityMatrix(
            "Density matrix does not have unit trace",
            context={"trace": [float(trace.real), float(trace.imag)]},
        )


def von_neumann_entropy(rho: DensityMatrix, tolerances: Tolerances = DEFAULT_TOLERANCES) -> float:
    """S(rho) = -tr(rho log2 rho) in bits, with 0 log 0 = 0."""
    _check_hermitian_unit_trace(rho, tolerances)
    eigenvalues = jacobi_eigvalsh(
        rho.entries, tol=tolerances.jacobi, max_sweeps=tolerances.jacobi_max_sweeps
    )
    if eigenvalues[0] < -tolerances.positivity:
        raise InvalidDensityMatrix(
            "Density matrix has a negative eigenvalue",
            context={"min_eigenvalue": float(eigenvalues[0])},
        )
    eigenvalues = eigenvalues[eigenvalues > EIGENVALUE_CUTOFF]
    entropy = float(-np.sum(eigenvalues * np.log2(eigenvalues)))
    return max(entropy, 0.0)


def entropy_of_entanglement(
    state: StateVector,
    split: Optional[Bipartition] = None,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> float:
    """Entropy of either reduced state of a pure bipartite state, in bits."""
    split = split or Bipartition.between_parties(state.register)
    split.validate(state.register)

    rho = density(state)
    entropy_a = von_neumann_entropy(partial_trace(rho, split.side_a), tolerances)
    entropy_b = von_neumann_entropy(partial_trace(rho, split.side_b), tolerances)
    if abs(entropy_a - entropy_b) > ENTROPY_SYMMETRY_TOLERANCE:
        raise NumericalInconsistency(
            "Reduced entropies of a pure state disagree",
            component="qcore",
            context={"side_a": entropy_a, "side_b": entropy_b},
        )
    return entropy_a


def mix(rho1: DensityMatrix, rho2: DensityMatrix, p: float) -> DensityMatrix:
    """(1 - p) rho1 + p rho2."""
    if not 0.0 <= p <= 1.0:
        raise InvalidProbability(
            f"Mixing weight must lie in [0, 1], got {p!r}", component="qcore"
        )
    if rho1.register != rho2.register:
        raise RegisterConflict("Cannot mix states on different registers")
    if p == 0.0:
        return rho1
    if p == 1.0:
        return rho2
    return DensityMatrix((1.0 - p) * rho1.entries + p * rho2.entries, rho1.register)


def apply_local_unitaries(
    state: StateVector, unitaries: Mapping[Union[QubitLabel, str], np.ndarray]
) -> StateVector:
    """Apply a 2x2 unitary to each listed qubit."""
    n = state.num_qubits
    tensor_form = state.amplitudes.reshape((2,) * n)
    for key, matrix in unitaries.items():
        label = QubitLabel.parse(key)
        if label not in state.register:
            raise RegisterConflict(f"Qubit {label} is not in the state register")
        u = np.asarray(matrix, dtype=complex)
        if u.shape != (2, 2) or not np.allclose(u @ u.conj().T, np.eye(2), atol=1e-10):
            raise InvalidParameter(f"Matrix for {label} is not a 2x2 unitary", component="qcore")
        axis = state.register.index(label)
        tensor_form = np.moveaxis(np.tensordot(u, tensor_form, axes=([1], [axis])), 0, axis)
    return StateVector(tensor_form.reshape(-1), state.register)


def random_unitary(rng: np.random.Generator) -> np.ndarray:
    """Haar-random 2x2 unitary (QR of a complex Gaussian matrix)."""
    z = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_state(
    register: Sequence[QubitLabel] = REGISTER, rng: Optional[np.random.Generator] = None
) -> StateVector:
    rng = rng or np.random.default_rng()
    dim = 2 ** len(register)
    z = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return StateVector(z / np.linalg.norm(z), tuple(register))


def random_density(
    register: Sequence[QubitLabel] = REGISTER,
    rng: Optional[np.random.Generator] = None,
    rank: Optional[int] = None,
) -> DensityMatrix:
    rng = rng or np.random.default_rng()
    dim = 2 ** len(register)
    rank = rank or dim
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = g @ g.conj().T
    rho = (rho + rho.conj().T) / 2.0
    return DensityMatrix(rho / np.trace(rho).real, tuple(register))
