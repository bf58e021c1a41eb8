"""
Measured Stabilizer Tables
==========================

Tables of measured stabilizer expectations (single stabilizers and products
of same-parity stabilizers), witness values computed from them with
first-order uncertainty propagation, and conversion of raw four-fold
coincidence counts into correlation expectations.

Measured products enter the witness polynomial as they are: a table entry for
S1S3 is used directly, never rebuilt from the entries for S1 and S3.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Mapping, Optional, Sequence, Union

import pandas as pd

from ..simulation.observables import (
    WitnessKind,
    pauli_expectation,
    stabilizer_product,
    witness_expansion,
)
from ..simulation.qcore import DensityMatrix, StateVector
from ..utils.error_handling import (
    EmptyData,
    InvalidParameter,
    MissingEntries,
    ParseError,
    safe_json_load,
)
from ..utils.logger import get_logger

logger = get_logger(__name__)

STABILIZER_INDICES = frozenset(range(1, 7))
SANITY_SIGMAS = 3.0


@dataclass(frozen=True)
class MeasuredValue:
    """A value with its 1-sigma uncertainty."""

    value: float
    sigma: float = 0.0

    def __post_init__(self) -> None:
        value, sigma = float(self.value), float(self.sigma)
        if not (math.isfinite(value) and math.isfinite(sigma)) or sigma < 0:
            raise InvalidParameter(
                f"Invalid measured value {value!r} ± {sigma!r}", component="datalab"
            )
        object.__setattr__(self, "value", value)
        object.__setattr__(self, "sigma", sigma)

    def __str__(self) -> str:
        return f"{self.value:.4f} ± {self.sigma:.4f}"

    def scaled(self, factor: float) -> "MeasuredValue":
        return MeasuredValue(self.value, self.sigma * factor)

    def to_dict(self) -> dict[str, float]:
        return {"value": self.value, "sigma": self.sigma}


def linear_combination(
    constant: float, terms: Iterable[tuple[float, MeasuredValue]]
) -> MeasuredValue:
    """constant + sum c_i x_i, sigma = sqrt(sum (c_i sigma_i)^2) for independent x_i."""
    value = float(constant)
    variance = 0.0
    for coefficient, measured in terms:
        value += coefficient * measured.value
        variance += (coefficient * measured.sigma) ** 2
    return MeasuredValue(value, math.sqrt(variance))


def _key(indices: Iterable[int]) -> frozenset:
    return frozenset(int(i) for i in indices)


def _same_parity(key: frozenset) -> bool:
    return len({i % 2 for i in key}) <= 1


@dataclass(frozen=True)
class StabilizerTable:
    """Measured expectation per stabilizer product, keyed by index set."""

    entries: Mapping[frozenset, MeasuredValue] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "entries", {_key(k): v for k, v in self.entries.items()}
        )

    def __contains__(self, key: Iterable[int]) -> bool:
        return _key(key) in self.entries

    def __len__(self) -> int:
        return len(self.entries)

    def __getitem__(self, key: Iterable[int]) -> MeasuredValue:
        return self.entries[_key(key)]

    def keys(self) -> list[frozenset]:
        return sorted(self.entries, key=lambda k: (len(k), sorted(k)))

    def scaled_sigmas(self, factor: float) -> "StabilizerTable":
        return StabilizerTable({k: v.scaled(factor) for k, v in self.entries.items()})

    def to_dict(self) -> dict[str, Any]:
        return {
            "entries": [
                {"ops": sorted(key), **self.entries[key].to_dict()} for key in self.keys()
            ]
        }

    def to_frame(self) -> pd.DataFrame:
        rows = [
            {
                "ops": "".join(f"S{i}" for i in sorted(key)),
                "value": self.entries[key].value,
                "sigma": self.entries[key].sigma,
            }
            for key in self.keys()
        ]
        return pd.DataFrame(rows, columns=["ops", "value", "sigma"])


def _number(raw: Any, location: str) -> float:
    if isinstance(raw, bool) or not isinstance(raw, (int, float)):
        raise ParseError(f"Expected a number, got {raw!r}", location=location)
    value = float(raw)
    if not math.isfinite(value):
        raise ParseError(f"Expected a finite number, got {raw!r}", location=location)
    return value


def parse_table(
    document: Union[str, Mapping[str, Any]],
    location: str = "<table>",
    strict_parity: bool = True,
) -> StabilizerTable:
    """
    Parse ``{"entries": [{"ops": [int, ...], "value": float, "sigma": float}]}``.

    Args:
        document: JSON text or the decoded object
        location: prefix used in ParseError locations (usually the file path)
        strict_parity: reject keys mixing odd and even stabilizer indices

    Raises:
        ParseError: on any schema violation, with the offending location
    """
    if isinstance(document, str):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as e:
            raise ParseError(
                f"Invalid JSON: {e.msg}", location=f"{location}:{e.lineno}:{e.colno}"
            ) from e

    if not isinstance(document, Mapping) or not isinstance(document.get("entries"), list):
        raise ParseError("Table must be an object with an 'entries' list", location=location)

    entries: dict[frozenset, MeasuredValue] = {}
    for i, entry in enumerate(document["entries"]):
        where = f"{location}:entries[{i}]"
        if not isinstance(entry, Mapping):
            raise ParseError("Entry must be an object", location=where)
        missing = {"ops", "value", "sigma"} - set(entry)
        if missing:
            raise ParseError(f"Entry lacks fields {sorted(missing)}", location=where)

        ops = entry["ops"]
        if (
            not isinstance(ops, list)
            or not ops
            or any(isinstance(i, bool) or not isinstance(i, int) for i in ops)
        ):
            raise ParseError("'ops' must be a nonempty list of integers", location=f"{where}.ops")
        key = frozenset(ops)
        if len(key) != len(ops):
            raise ParseError(f"Repeated stabilizer index in {ops}", location=f"{where}.ops")
        if not key <= STABILIZER_INDICES:
            raise ParseError(f"Stabilizer indices must lie in 1..6, got {ops}", location=f"{where}.ops")
        if strict_parity and not _same_parity(key):
            raise ParseError(
                f"Key {ops} mixes odd and even stabilizers", location=f"{where}.ops"
            )
        if key in entries:
            raise ParseError(f"Duplicate entry for {sorted(key)}", location=f"{where}.ops")

        value = _number(entry["value"], f"{where}.value")
        sigma = _number(entry["sigma"], f"{where}.sigma")
        if sigma < 0:
            raise ParseError(f"sigma must be non-negative, got {sigma}", location=f"{where}.sigma")
        if abs(value) > 1.0 + SANITY_SIGMAS * sigma:
            raise ParseError(
                f"Expectation {value} is outside [-1, 1] by more than {SANITY_SIGMAS:g} sigma",
                location=f"{where}.value",
            )
        entries[key] = MeasuredValue(value, sigma)

    logger.debug(f"Parsed {len(entries)} table entries from {location}")
    return StabilizerTable(entries)


def load_table(path: Union[str, Path], strict_parity: bool = True) -> StabilizerTable:
    return parse_table(safe_json_load(str(path)), location=str(path), strict_parity=strict_parity)


def witness_from_measurements(
    table: StabilizerTable, w: Union[WitnessKind, str]
) -> MeasuredValue:
    """Witness value from measured stabilizer products, with propagated sigma."""
    w = WitnessKind.parse(w)
    constant, coefficients = witness_expansion(w)

    missing = sorted(
        (sorted(key) for key in coefficients if key not in table.entries),
        key=lambda k: (len(k), k),
    )
    if missing:
        raise MissingEntries(
            f"Table lacks {len(missing)} products needed by {w}",
            missing=missing,
            witness=str(w),
        )

    result = linear_combination(
        constant, ((coeff, table.entries[key]) for key, coeff in coefficients.items())
    )
    logger.debug(f"{w} from {len(coefficients)} measured products: {result}")
    return result


@dataclass(frozen=True)
class CoincidenceQuad:
    """Coincidence counts of the four detector pairings (++, +-, -+, --)."""

    n_pp: int
    n_pm: int
    n_mp: int
    n_mm: int

    def __post_init__(self) -> None:
        for name in ("n_pp", "n_pm", "n_mp", "n_mm"):
            count = getattr(self, name)
            if isinstance(count, bool) or int(count) != count or count < 0:
                raise InvalidParameter(
                    f"{name} must be a non-negative integer, got {count!r}",
                    component="datalab",
                )
            object.__setattr__(self, name, int(count))

    @property
    def total(self) -> int:
        return self.n_pp + self.n_pm + self.n_mp + self.n_mm


def counts_to_expectation(q: CoincidenceQuad) -> MeasuredValue:
    """
    Correlation (n++ + n-- - n+- - n-+)/N with Poisson errors on each count.

    With a = n++ + n--, b = n+- + n-+ and N = a + b the propagated variance
    is 4ab/N^3.
    """
    if q.total == 0:
        raise EmptyData("No coincidences recorded", context={"counts": [q.n_pp, q.n_pm, q.n_mp, q.n_mm]})
    agree = q.n_pp + q.n_mm
    disagree = q.n_pm + q.n_mp
    total = float(q.total)
    value = (agree - disagree) / total
    sigma = math.sqrt(4.0 * agree * disagree / total**3)
    return MeasuredValue(value, sigma)


def table_from_counts(counts: Mapping[Iterable[int], CoincidenceQuad]) -> StabilizerTable:
    return StabilizerTable({_key(k): counts_to_expectation(q) for k, q in counts.items()})


def all_products() -> list[frozenset]:
    """Every nonempty subset of {1..6}."""
    return [
        frozenset(combo)
        for size in range(1, 7)
        for combo in itertools.combinations(range(1, 7), size)
    ]


def table_from_state(
    state: Union[StateVector, DensityMatrix],
    keys: Optional[Sequence[Iterable[int]]] = None,
) -> StabilizerTable:
    """Exact stabilizer-product expectations of a simulated state (sigma 0)."""
    keys = [_key(k) for k in keys] if keys is not None else all_products()
    entries = {
        key: MeasuredValue(pauli_expectation(state, stabilizer_product(sorted(key))), 0.0)
        for key in keys
    }
    return StabilizerTable(entries)
