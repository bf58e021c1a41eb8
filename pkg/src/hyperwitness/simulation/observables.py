"""
Stabilizers and Entanglement Witnesses
======================================

Pauli strings over the labelled register, the six stabilizers of the ideal
hyperentangled state, the per-DOF and global witnesses built from them, and
the number of local measurement settings a witness needs.

Stabilizers (odd index = X-type, even index = Z-type):

    S1 = X X (pi)    S2 = Z Z (pi)
    S3 = X X (k)     S4 = -Z Z (k)
    S5 = X X (c)     S6 = Z Z (c)

They commute pairwise and square to the identity, so every witness is a
polynomial in them whose monomials are subsets of {1..6}. That polynomial is
computed once by ``witness_expansion`` and feeds both the operator form used
on simulated states and the measured-table evaluation in ``datalab``.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Any, Iterable, Mapping, Optional, Sequence, Union

import numpy as np

from ..utils.error_handling import (
    InvalidIndex,
    InvalidParameter,
    NumericalInconsistency,
    RegisterConflict,
    UnsupportedBasis,
)
from ..utils.logger import get_logger
from .qcore import REGISTER, DensityMatrix, Dof, QubitLabel, StateVector, dof_qubits

logger = get_logger(__name__)

IMAGINARY_TOLERANCE = 1e-8
COEFFICIENT_CUTOFF = 1e-15

PAULI_LETTERS = ("I", "X", "Y", "Z")

PAULI_MATRICES: dict[str, np.ndarray] = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}

# a * b = phase * product, for distinct non-identity letters
_PRODUCT_TABLE: dict[tuple[str, str], tuple[complex, str]] = {
    ("X", "Y"): (1j, "Z"),
    ("Y", "Z"): (1j, "X"),
    ("Z", "X"): (1j, "Y"),
    ("Y", "X"): (-1j, "Z"),
    ("Z", "Y"): (-1j, "X"),
    ("X", "Z"): (-1j, "Y"),
}

# stabilizer index -> (dof, letter, sign)
_STABILIZERS: dict[int, tuple[Dof, str, float]] = {
    1: (Dof.PI, "X", 1.0),
    2: (Dof.PI, "Z", 1.0),
    3: (Dof.K, "X", 1.0),
    4: (Dof.K, "Z", -1.0),
    5: (Dof.C, "X", 1.0),
    6: (Dof.C, "Z", 1.0),
}

# dof -> (x-type index, z-type index)
DOF_STABILIZERS: dict[Dof, tuple[int, int]] = {
    Dof.PI: (1, 2),
    Dof.K: (3, 4),
    Dof.C: (5, 6),
}

ODD_INDICES = (1, 3, 5)
EVEN_INDICES = (2, 4, 6)


def _multiply_letters(a: str, b: str) -> tuple[complex, str]:
    if a == "I":
        return 1.0, b
    if b == "I":
        return 1.0, a
    if a == b:
        return 1.0, "I"
    return _PRODUCT_TABLE[(a, b)]


@dataclass(frozen=True)
class PauliString:
    """Signed tensor product of Pauli letters; qubits not listed carry I."""

    letters: tuple[tuple[QubitLabel, str], ...] = ()
    coefficient: float = 1.0

    def __post_init__(self) -> None:
        items = self.letters.items() if isinstance(self.letters, Mapping) else self.letters
        normalized: dict[QubitLabel, str] = {}
        for key, letter in items:
            label = QubitLabel.parse(key)
            letter = str(letter).upper()
            if letter not in PAULI_LETTERS:
                raise InvalidParameter(
                    f"Unknown Pauli letter {letter!r} on {label}", component="observables"
                )
            if label in normalized:
                raise RegisterConflict(f"Qubit {label} listed twice in a Pauli string")
            if letter != "I":
                normalized[label] = letter
        ordered = tuple(sorted(normalized.items(), key=lambda item: item[0].position))
        object.__setattr__(self, "letters", ordered)
        object.__setattr__(self, "coefficient", float(self.coefficient))

    @classmethod
    def from_letters(
        cls, letters: Mapping[Union[QubitLabel, str], str], coefficient: float = 1.0
    ) -> "PauliString":
        return cls(tuple(letters.items()), coefficient)

    @property
    def support(self) -> frozenset:
        return frozenset(label for label, _ in self.letters)

    def letter(self, label: QubitLabel) -> str:
        return dict(self.letters).get(label, "I")

    def label(self, register: Sequence[QubitLabel] = REGISTER) -> str:
        """Compact text form, e.g. ``-IIZZII``."""
        sign = "-" if self.coefficient < 0 else "+"
        magnitude = "" if abs(abs(self.coefficient) - 1.0) < COEFFICIENT_CUTOFF else f"{abs(self.coefficient):g}*"
        return sign + magnitude + "".join(self.letter(label) for label in register)

    def __str__(self) -> str:
        return self.label()

    def multiply(self, other: "PauliString") -> tuple[complex, "PauliString"]:
        """Product self * other as (phase, string), phase a power of i."""
        mine, theirs = dict(self.letters), dict(other.letters)
        phase: complex = 1.0
        letters: dict[QubitLabel, str] = {}
        for label in set(mine) | set(theirs):
            factor, letter = _multiply_letters(mine.get(label, "I"), theirs.get(label, "I"))
            phase *= factor
            letters[label] = letter
        return phase, PauliString(tuple(letters.items()), self.coefficient * other.coefficient)

    def __mul__(self, other: "PauliString") -> "PauliString":
        phase, product = self.multiply(other)
        if abs(phase.imag) > 0.0:
            raise NumericalInconsistency(
                "Product of anticommuting Pauli strings is not Hermitian",
                component="observables",
                context={"left": str(self), "right": str(other)},
            )
        return PauliString(product.letters, product.coefficient * phase.real)

    def commutes_with(self, other: "PauliString") -> bool:
        mine = dict(self.letters)
        clashes = sum(
            1 for label, letter in other.letters if label in mine and mine[label] != letter
        )
        return clashes % 2 == 0

    def matrix(self, register: Sequence[QubitLabel] = REGISTER) -> np.ndarray:
        """Dense 2^n x 2^n matrix over ``register`` (coefficient included)."""
        register = tuple(register)
        outside = self.support - frozenset(register)
        if outside:
            raise RegisterConflict(
                "Pauli string acts outside the register",
                context={"qubits": [str(x) for x in outside]},
            )
        word = "".join(self.letter(label) for label in register)
        return self.coefficient * _kron_word(word)

    def to_dict(self) -> dict[str, Any]:
        return {
            "coefficient": self.coefficient,
            "letters": {label.name: letter for label, letter in self.letters},
        }


@lru_cache(maxsize=512)
def _kron_word(word: str) -> np.ndarray:
    result = np.ones((1, 1), dtype=complex)
    for letter in word:
        result = np.kron(result, PAULI_MATRICES[letter])
    result.flags.writeable = False
    return result


IDENTITY = PauliString()


@dataclass(frozen=True)
class ObservableSum:
    """constant * I + sum of weight * Pauli string.

    Strings keep their own sign (S4 = -Z Z makes some stabilizer products
    negative); the weight is the coefficient in front of the signed string.
    Identity strings are folded into the constant.
    """

    terms: tuple[tuple[float, PauliString], ...] = ()
    constant: float = 0.0

    def __post_init__(self) -> None:
        constant = float(self.constant)
        terms = []
        for weight, pauli in self.terms:
            weight = float(weight)
            if not pauli.letters:
                constant += weight * pauli.coefficient
            elif abs(weight * pauli.coefficient) > COEFFICIENT_CUTOFF:
                terms.append((weight, pauli))
        object.__setattr__(self, "terms", tuple(terms))
        object.__setattr__(self, "constant", constant)

    def __len__(self) -> int:
        return len(self.terms)

    def matrix(self, register: Sequence[QubitLabel] = REGISTER) -> np.ndarray:
        return _observable_matrix(self, tuple(register))

    def expectation(self, state: Union[StateVector, DensityMatrix]) -> float:
        return _expectation(self.matrix(state.register), state)

    def to_dict(self) -> dict[str, Any]:
        return {
            "constant": self.constant,
            "terms": [
                {"weight": weight, **pauli.to_dict()}
                for weight, pauli in self.terms
            ],
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "ObservableSum":
        try:
            terms = tuple(
                (
                    float(term["weight"]),
                    PauliString(tuple(term["letters"].items()), float(term.get("coefficient", 1.0))),
                )
                for term in data.get("terms", [])
            )
            return cls(terms, float(data.get("constant", 0.0)))
        except (KeyError, TypeError, AttributeError) as e:
            raise InvalidParameter(
                f"Malformed observable document: {e}", component="observables"
            ) from e


@lru_cache(maxsize=64)
def _observable_matrix(op: ObservableSum, register: tuple[QubitLabel, ...]) -> np.ndarray:
    dim = 2 ** len(register)
    total = op.constant * np.eye(dim, dtype=complex)
    for weight, pauli in op.terms:
        total = total + weight * pauli.matrix(register)
    total.flags.writeable = False
    return total


def _expectation(matrix: np.ndarray, state: Union[StateVector, DensityMatrix]) -> float:
    if isinstance(state, StateVector):
        a = state.amplitudes
        value = complex(np.vdot(a, matrix @ a))
    else:
        value = complex(np.einsum("ij,ji->", matrix, state.entries))
    if abs(value.imag) > IMAGINARY_TOLERANCE:
        raise NumericalInconsistency(
            "Expectation of a Hermitian observable has an imaginary part",
            component="observables",
            context={"real": value.real, "imag": value.imag},
        )
    return float(value.real)


def pauli_expectation(
    state: Union[StateVector, DensityMatrix], op: PauliString
) -> float:
    """<psi|P|psi> or tr(rho P)."""
    return _expectation(op.matrix(state.register), state)


# --------------------------------------------------------------------------
# Stabilizers
# --------------------------------------------------------------------------


def stabilizer(index: int) -> PauliString:
    """S_index of the ideal state, index in 1..6."""
    if index not in _STABILIZERS:
        raise InvalidIndex(
            f"Stabilizer index must be in 1..6, got {index!r}", context={"index": index}
        )
    dof, letter, sign = _STABILIZERS[index]
    return PauliString(tuple((label, letter) for label in dof_qubits(dof)), sign)


def stabilizer_product(indices: Iterable[int]) -> PauliString:
    """Product of stabilizers; repeated indices cancel (S_i^2 = 1)."""
    product = IDENTITY
    for index in indices:
        product = product * stabilizer(index)
    return product


# --------------------------------------------------------------------------
# Witnesses
# --------------------------------------------------------------------------


class WitnessName(Enum):
    PI = "Wpi"
    K = "Wk"
    C = "Wc"
    W2 = "W2"
    W3 = "W3"

    @property
    def dof(self) -> Optional[Dof]:
        return {"Wpi": Dof.PI, "Wk": Dof.K, "Wc": Dof.C}.get(self.value)


class WitnessForm(Enum):
    """``as_evaluated`` weights each per-DOF stabilizer by 1, ``as_printed`` by 2."""

    AS_PRINTED = "as_printed"
    AS_EVALUATED = "as_evaluated"


@dataclass(frozen=True)
class WitnessKind:
    kind: WitnessName
    form: WitnessForm = WitnessForm.AS_EVALUATED

    @classmethod
    def parse(
        cls,
        value: Union["WitnessKind", str],
        form: Union[WitnessForm, str] = WitnessForm.AS_EVALUATED,
    ) -> "WitnessKind":
        if isinstance(value, WitnessKind):
            return value
        try:
            return cls(WitnessName(str(value)), WitnessForm(form))
        except ValueError as e:
            raise InvalidParameter(
                f"Unknown witness {value!r} / form {form!r}",
                component="observables",
                context={
                    "kinds": [w.value for w in WitnessName],
                    "forms": [f.value for f in WitnessForm],
                },
            ) from e

    @property
    def name(self) -> str:
        return self.kind.value

    def __str__(self) -> str:
        if self.kind.dof is None:
            return self.name
        return f"{self.name}[{self.form.value}]"


ALL_WITNESSES: tuple[WitnessKind, ...] = tuple(WitnessKind(name) for name in WitnessName)

Polynomial = dict[frozenset, float]


def _poly_mul(left: Polynomial, right: Polynomial) -> Polynomial:
    product: Polynomial = {}
    for key_l, coeff_l in left.items():
        for key_r, coeff_r in right.items():
            key = key_l ^ key_r
            product[key] = product.get(key, 0.0) + coeff_l * coeff_r
    return product


def _poly_add(*polys: tuple[float, Polynomial]) -> Polynomial:
    total: Polynomial = {}
    for scale, poly in polys:
        for key, coeff in poly.items():
            total[key] = total.get(key, 0.0) + scale * coeff
    return total


def _projector_product(indices: Sequence[int]) -> Polynomial:
    """prod_i (1 + S_i)/2."""
    poly: Polynomial = {frozenset(): 1.0}
    for index in indices:
        poly = _poly_mul(poly, {frozenset(): 0.5, frozenset({index}): 0.5})
    return poly


@lru_cache(maxsize=None)
def _expansion(w: WitnessKind) -> tuple[float, tuple[tuple[frozenset, float], ...]]:
    unit: Polynomial = {frozenset(): 1.0}

    if w.kind.dof is not None:
        odd, even = DOF_STABILIZERS[w.kind.dof]
        weight = 2.0 if w.form is WitnessForm.AS_PRINTED else 1.0
        poly = {frozenset(): 1.0, frozenset({odd}): -weight, frozenset({even}): -weight}
    elif w.kind is WitnessName.W2:
        # 3 - 2 (prod (1+S_even)/2 + prod (1+S_odd)/2)
        poly = _poly_add(
            (3.0, unit),
            (-2.0, _projector_product(EVEN_INDICES)),
            (-2.0, _projector_product(ODD_INDICES)),
        )
    else:
        # 2 - 3 prod_dof (1 + S_odd + S_even)/3
        product = unit
        for odd, even in DOF_STABILIZERS.values():
            third = 1.0 / 3.0
            product = _poly_mul(
                product,
                {frozenset(): third, frozenset({odd}): third, frozenset({even}): third},
            )
        poly = _poly_add((2.0, unit), (-3.0, product))

    constant = poly.pop(frozenset(), 0.0)
    terms = tuple(
        (key, coeff)
        for key, coeff in sorted(poly.items(), key=lambda kv: (len(kv[0]), sorted(kv[0])))
        if abs(coeff) > COEFFICIENT_CUTOFF
    )
    return constant, terms


def witness_expansion(w: Union[WitnessKind, str]) -> tuple[float, dict[frozenset, float]]:
    """Witness as a stabilizer polynomial: (constant, {index set: coefficient})."""
    constant, terms = _expansion(WitnessKind.parse(w))
    return constant, dict(terms)


def witness_operator(w: Union[WitnessKind, str]) -> ObservableSum:
    """Witness expanded into Pauli strings over the six-qubit register."""
    constant, terms = _expansion(WitnessKind.parse(w))
    return ObservableSum(
        tuple((coeff, stabilizer_product(sorted(key))) for key, coeff in terms),
        constant,
    )


def evaluate_witness(
    state: Union[StateVector, DensityMatrix], w: Union[WitnessKind, str]
) -> float:
    """<W> on a six-qubit state; negative values certify entanglement."""
    if state.register != REGISTER:
        raise RegisterConflict(
            "Witnesses are defined on the full six-qubit register",
            context={"register": [str(x) for x in state.register]},
        )
    return witness_operator(w).expectation(state)


# --------------------------------------------------------------------------
# Measurement settings
# --------------------------------------------------------------------------


def _requirements(op: ObservableSum) -> list[dict[QubitLabel, str]]:
    requirements = []
    for _, pauli in op.terms:
        if any(letter == "Y" for _, letter in pauli.letters):
            raise UnsupportedBasis(
                "Settings accounting supports only X and Z letters",
                context={"term": str(pauli)},
            )
        requirements.append(dict(pauli.letters))
    return requirements


def _compatible(a: Mapping[QubitLabel, str], b: Mapping[QubitLabel, str]) -> bool:
    return all(b.get(label, letter) == letter for label, letter in a.items())


def _greedy_clique(order: list[int], conflicts: list[set[int]]) -> list[int]:
    clique: list[int] = []
    for node in order:
        if all(node in conflicts[member] for member in clique):
            clique.append(node)
    return clique


def _colour(
    order: list[int], conflicts: list[set[int]], k: int, fixed: dict[int, int]
) -> Optional[dict[int, int]]:
    colours = dict(fixed)

    def backtrack(position: int) -> bool:
        if position == len(order):
            return True
        node = order[position]
        if node in colours:
            return backtrack(position + 1)
        used = {colours[n] for n in conflicts[node] if n in colours}
        highest = max(colours.values(), default=-1)
        # new colours are interchangeable: trying the first unused one suffices
        for colour in range(min(k, highest + 2)):
            if colour in used:
                continue
            colours[node] = colour
            if backtrack(position + 1):
                return True
            del colours[node]
        return False

    return colours if backtrack(0) else None


def measurement_settings(
    op: ObservableSum, register: Sequence[QubitLabel] = REGISTER
) -> list[dict[QubitLabel, str]]:
    """
    Minimal list of local settings (X or Z on every qubit) such that every
    term of ``op`` is diagonal in at least one of them.

    Terms that agree letter-by-letter on their common qubits can share a
    setting, so the minimum is the chromatic number of the graph joining
    incompatible terms. It is found exactly by backtracking, starting from
    the size of a greedy clique.
    """
    requirements = _requirements(op)
    n = len(requirements)
    if n == 0:
        return []

    conflicts = [
        {j for j in range(n) if j != i and not _compatible(requirements[i], requirements[j])}
        for i in range(n)
    ]
    order = sorted(range(n), key=lambda i: (-len(requirements[i]), -len(conflicts[i]), i))
    clique = _greedy_clique(order, conflicts)
    fixed = {node: colour for colour, node in enumerate(clique)}

    for k in range(len(clique), n + 1):
        colouring = _colour(order, conflicts, k, fixed)
        if colouring is not None:
            break
    else:  # pragma: no cover - k = n always succeeds
        raise NumericalInconsistency("Setting search failed", component="observables")

    settings: list[dict[QubitLabel, str]] = []
    for colour in range(k):
        setting = {label: "Z" for label in register}
        for node, assigned in colouring.items():
            if assigned == colour:
                setting.update(requirements[node])
        settings.append(setting)

    logger.debug(f"{n} terms grouped into {k} settings (clique bound {len(clique)})")
    return settings


def settings_required(op: ObservableSum) -> int:
    return len(measurement_settings(op))
