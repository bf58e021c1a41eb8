"""
Noise Channels and Witness Robustness
=====================================

White noise, single-DOF dephasing and finite-visibility Bell mixtures acting
on the hyperentangled state, plus the noise level at which each witness
stops detecting entanglement.

White noise comes in two scopes. ``PER_DOF`` (the default) replaces each
DOF's Bell pair by I/4 with probability p, so every stabilizer expectation is
1 - p and W2, W3 are cubic in 1 - p. ``GLOBAL`` mixes the whole register
with I/64.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Mapping, Sequence, Union

import numpy as np
import pandas as pd
from scipy import optimize

from ..utils.error_handling import (
    InvalidParameter,
    InvalidProbability,
    NoThreshold,
    NumericalInconsistency,
    ParseError,
    RegisterConflict,
    safe_json_load,
)
from ..utils.logger import get_logger
from .observables import (
    ALL_WITNESSES,
    PauliString,
    WitnessForm,
    WitnessKind,
    WitnessName,
    evaluate_witness,
)
from .qcore import (
    IDEAL_BELL,
    DensityMatrix,
    Dof,
    density,
    dof_qubits,
    hyper_state,
    make_bell,
    maximally_mixed,
    mix,
    partial_trace,
    tensor_density,
)

logger = get_logger(__name__)

DEFAULT_THRESHOLD_TOLERANCE = 1e-6
DEFAULT_MONOTONICITY_GRID = 21
MONOTONICITY_SLACK = 1e-12
# sweep values this close to zero are reported as exactly zero
SWEEP_ZERO_SNAP = 1e-12

SWEEP_COLUMNS = {
    WitnessName.PI: "W_pi",
    WitnessName.K: "W_k",
    WitnessName.C: "W_c",
    WitnessName.W2: "W_2",
    WitnessName.W3: "W_3",
}


class WhiteNoiseScope(Enum):
    PER_DOF = "per_dof"
    GLOBAL = "global"


class Channel(Enum):
    """One-parameter channels for thresholds and sweeps."""

    WHITE = "white"
    GLOBAL_WHITE = "global-white"
    DEPHASE = "dephase"

    @classmethod
    def parse(cls, value: Union["Channel", str]) -> "Channel":
        if isinstance(value, Channel):
            return value
        try:
            return cls(str(value).lower())
        except ValueError as e:
            raise InvalidParameter(
                f"Unknown noise channel {value!r}",
                component="noise",
                context={"channels": [c.value for c in cls]},
            ) from e


def _check_probability(value: float, name: str) -> float:
    try:
        value = float(value)
    except (TypeError, ValueError) as e:
        raise InvalidProbability(f"{name} must be a number, got {value!r}") from e
    if not 0.0 <= value <= 1.0:
        raise InvalidProbability(
            f"{name} must lie in [0, 1], got {value!r}", context={name: value}
        )
    return value


def _dofs_in(register: Sequence) -> list[Dof]:
    present = []
    for dof in Dof:
        a, b = dof_qubits(dof)
        if a in register and b in register:
            present.append(dof)
        elif a in register or b in register:
            raise RegisterConflict(f"Register holds only one qubit of DOF {dof.value}")
    return present


def _depolarize_pair(rho: DensityMatrix, dof: Dof) -> DensityMatrix:
    """I/4 on the DOF pair tensored with the state of every other qubit."""
    pair = dof_qubits(dof)
    rest = [label for label in rho.register if label not in pair]
    if not rest:
        return maximally_mixed(rho.register)
    return tensor_density([partial_trace(rho, rest), maximally_mixed(pair)])


def white_noise(
    rho: DensityMatrix,
    p: float,
    scope: Union[WhiteNoiseScope, str] = WhiteNoiseScope.PER_DOF,
) -> DensityMatrix:
    """Admix white noise with probability p."""
    p = _check_probability(p, "p")
    scope = WhiteNoiseScope(scope)
    if p == 0.0:
        return rho

    if scope is WhiteNoiseScope.GLOBAL:
        return mix(rho, maximally_mixed(rho.register), p)

    for dof in _dofs_in(rho.register):
        rho = mix(rho, _depolarize_pair(rho, dof), p)
    return rho


def dephase_dof(rho: DensityMatrix, dof: Union[Dof, str], q: float) -> DensityMatrix:
    """
    (1 - q) rho + q Z rho Z, Z acting on party A's qubit of ``dof``.

    Leaves the Z-type stabilizer of the DOF unchanged and scales the X-type
    one by 1 - 2q.
    """
    q = _check_probability(q, "q")
    dof = Dof.parse(dof)
    if q == 0.0:
        return rho
    qubit_a, _ = dof_qubits(dof)
    if qubit_a not in rho.register:
        raise RegisterConflict(f"Qubit {qubit_a} is not in the register")

    z = PauliString(((qubit_a, "Z"),)).matrix(rho.register)
    flipped = DensityMatrix(z @ rho.entries @ z, rho.register)
    return mix(rho, flipped, q)


def visibility_state(v: Mapping[Union[Dof, str], float]) -> DensityMatrix:
    """
    Product over DOFs of ((1+v)/2)|bell><bell| + ((1-v)/2)|bell'><bell'|,
    bell' being the same Bell pair with its phase flipped. DOFs not listed
    get v = 1.
    """
    visibilities = {}
    for key, value in v.items():
        dof = Dof.parse(key)
        visibilities[dof] = _check_probability(value, f"v_{dof.value}")

    factors = []
    for dof in Dof:
        vis = visibilities.get(dof, 1.0)
        kind = IDEAL_BELL[dof]
        coherent = density(make_bell(kind, 0.0, dof))
        flipped = density(make_bell(kind, np.pi, dof))
        factors.append(mix(coherent, flipped, (1.0 - vis) / 2.0))
    return tensor_density(factors)


@dataclass
class NoiseModel:
    """Visibility loss, then per-DOF dephasing, then white noise."""

    white_fraction: float = 0.0
    dephase: dict[Dof, float] = field(default_factory=dict)
    visibility: dict[Dof, float] = field(default_factory=dict)
    white_scope: WhiteNoiseScope = WhiteNoiseScope.PER_DOF

    def __post_init__(self) -> None:
        self.white_fraction = _check_probability(self.white_fraction, "white_fraction")
        self.dephase = {
            Dof.parse(k): _check_probability(v, f"dephase.{Dof.parse(k).value}")
            for k, v in self.dephase.items()
        }
        self.visibility = {
            Dof.parse(k): _check_probability(v, f"visibility.{Dof.parse(k).value}")
            for k, v in self.visibility.items()
        }
        self.white_scope = WhiteNoiseScope(self.white_scope)

    @classmethod
    def from_dict(cls, data: Mapping[str, Any], location: str = "") -> "NoiseModel":
        if not isinstance(data, Mapping):
            raise ParseError("Noise model must be a JSON object", location=location)
        unknown = set(data) - {"white_fraction", "dephase", "visibility", "white_scope"}
        if unknown:
            raise ParseError(
                f"Unknown noise model keys: {sorted(unknown)}", location=location
            )
        for key in ("dephase", "visibility"):
            if not isinstance(data.get(key, {}), Mapping):
                raise ParseError(f"'{key}' must map DOF names to numbers", location=f"{location}:{key}")
        return cls(
            white_fraction=data.get("white_fraction", 0.0),
            dephase=dict(data.get("dephase", {})),
            visibility=dict(data.get("visibility", {})),
            white_scope=data.get("white_scope", WhiteNoiseScope.PER_DOF.value),
        )

    @classmethod
    def from_json(cls, path: Union[str, Path]) -> "NoiseModel":
        return cls.from_dict(safe_json_load(str(path)), location=str(path))

    def to_dict(self) -> dict[str, Any]:
        return {
            "white_fraction": self.white_fraction,
            "white_scope": self.white_scope.value,
            "dephase": {dof.value: q for dof, q in self.dephase.items()},
            "visibility": {dof.value: v for dof, v in self.visibility.items()},
        }

    def prepare(self) -> DensityMatrix:
        rho = visibility_state(self.visibility)
        for dof, q in self.dephase.items():
            rho = dephase_dof(rho, dof, q)
        return white_noise(rho, self.white_fraction, self.white_scope)


def apply_channel(
    rho: DensityMatrix, channel: Union[Channel, str], p: float
) -> DensityMatrix:
    channel = Channel.parse(channel)
    if channel is Channel.WHITE:
        return white_noise(rho, p, WhiteNoiseScope.PER_DOF)
    if channel is Channel.GLOBAL_WHITE:
        return white_noise(rho, p, WhiteNoiseScope.GLOBAL)
    for dof in Dof:
        rho = dephase_dof(rho, dof, p)
    return rho


def witness_noise_threshold(
    w: Union[WitnessKind, str],
    channel: Union[Channel, str] = Channel.WHITE,
    tol: float = DEFAULT_THRESHOLD_TOLERANCE,
    grid_points: int = DEFAULT_MONOTONICITY_GRID,
) -> float:
    """
    Noise level p* in [0, 1] at which <W> on the noisy ideal state crosses 0.

    Raises:
        InvalidParameter: tol is not positive
        NoThreshold: <W> does not change sign on [0, 1]
        NumericalInconsistency: <W> is not monotone in p on the monotonicity grid
    """
    if not tol > 0:
        raise InvalidParameter(f"tol must be positive, got {tol!r}", component="noise")
    w = WitnessKind.parse(w)
    channel = Channel.parse(channel)
    ideal = density(hyper_state())

    def witness_at(p: float) -> float:
        return evaluate_witness(apply_channel(ideal, channel, p), w)

    start, end = witness_at(0.0), witness_at(1.0)
    if start == 0.0:
        return 0.0
    if end == 0.0:
        return 1.0
    if start * end > 0.0:
        raise NoThreshold(
            f"{w} does not change sign under {channel.value} noise on [0, 1]",
            context={"witness": str(w), "at_0": start, "at_1": end},
        )

    samples = np.array([witness_at(p) for p in np.linspace(0.0, 1.0, grid_points)])
    steps = np.diff(samples)
    if not (np.all(steps >= -MONOTONICITY_SLACK) or np.all(steps <= MONOTONICITY_SLACK)):
        raise NumericalInconsistency(
            f"{w} is not monotone in the noise level",
            component="noise",
            context={"values": samples.tolist()},
        )

    root = optimize.bisect(witness_at, 0.0, 1.0, xtol=tol)
    logger.debug(f"Threshold of {w} under {channel.value} noise: {root:.8f}")
    return float(root)


def noise_sweep(
    grid: Sequence[float],
    channel: Union[Channel, str] = Channel.WHITE,
    form: Union[WitnessForm, str] = WitnessForm.AS_EVALUATED,
    workers: int = 1,
) -> pd.DataFrame:
    """Every witness on the noisy ideal state, one row per noise level, ordered by p."""
    channel = Channel.parse(channel)
    form = WitnessForm(form)
    levels = sorted(_check_probability(p, "p") for p in grid)
    if not levels:
        raise InvalidParameter("Noise grid is empty", component="noise")
    if workers < 1:
        raise InvalidParameter(f"workers must be >= 1, got {workers}", component="noise")

    ideal = density(hyper_state())
    witnesses = [WitnessKind(kind.kind, form) for kind in ALL_WITNESSES]

    def row(p: float) -> dict[str, float]:
        rho = apply_channel(ideal, channel, p)
        values = {"p": p}
        for w in witnesses:
            value = evaluate_witness(rho, w)
            values[SWEEP_COLUMNS[w.kind]] = 0.0 if abs(value) < SWEEP_ZERO_SNAP else value
        return values

    with ThreadPoolExecutor(max_workers=workers) as pool:
        rows = list(pool.map(row, levels))

    frame = pd.DataFrame(rows, columns=["p", *SWEEP_COLUMNS.values()])
    frame = frame.sort_values("p", kind="stable").reset_index(drop=True)
    logger.debug(f"Swept {len(frame)} noise levels of {channel.value} noise")
    return frame
