"""
Coincidence Interference Patterns
=================================

Parametric model of coincidence rate versus path delay behind the momentum
(first stage) and emission-cone (second stage) interferometers, seeded
Poisson sampling, FWHM extraction and least-squares visibility fits.

    R(x) = baseline * [1 - V * a * cos(phase) * exp(-4 ln2 x^2 / w^2)]

w = lambda^2 / dlambda for the first stage and twice that for the second;
``a`` is the phase-averaging factor of an unstable second-stage phase.
phase = 0 gives the dip, phase = pi the peak. Lengths are micrometres and
rates are coincidences per second.
"""

from __future__ import annotations

import dataclasses
import io
import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Optional, Sequence, TextIO, Union

import numpy as np
import pandas as pd
from scipy.optimize import curve_fit

from ..utils.error_handling import FitError, InvalidParameter, ParseError
from ..utils.logger import get_logger
from ..utils.verification import verify_data_integrity
from .datalab import MeasuredValue

logger = get_logger(__name__)

FOUR_LN2 = 4.0 * math.log(2.0)
MIN_FIT_POINTS = 7
CSV_COLUMNS = ["delay", "rate"]
CSV_FLOAT_FORMAT = "%.6g"


class Stage(Enum):
    FIRST = "first"
    SECOND = "second"


@dataclass(frozen=True)
class FringeConfig:
    """Interferometer and source parameters of one pattern."""

    wavelength: float = 0.728
    bandwidth: float = 0.006
    visibility: float = 1.0
    phase: float = 0.0
    baseline: float = 1000.0
    stage: Stage = Stage.FIRST
    phase_averaging: float = 1.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "stage", Stage(self.stage))
        problems = []
        if not self.wavelength > 0:
            problems.append(f"wavelength must be positive, got {self.wavelength!r}")
        if not self.bandwidth > 0:
            problems.append(f"bandwidth must be positive, got {self.bandwidth!r}")
        if not 0.0 <= self.visibility <= 1.0:
            problems.append(f"visibility must lie in [0, 1], got {self.visibility!r}")
        if not 0.0 <= self.phase_averaging <= 1.0:
            problems.append(f"phase_averaging must lie in [0, 1], got {self.phase_averaging!r}")
        if not self.baseline >= 0:
            problems.append(f"baseline must be non-negative, got {self.baseline!r}")
        if not math.isfinite(self.phase):
            problems.append(f"phase must be finite, got {self.phase!r}")
        if problems:
            raise InvalidParameter("; ".join(problems), component="fringe")

    @property
    def coherence_length(self) -> float:
        return self.wavelength**2 / self.bandwidth

    @property
    def fwhm(self) -> float:
        factor = 2.0 if self.stage is Stage.SECOND else 1.0
        return factor * self.coherence_length

    @property
    def contrast(self) -> float:
        """Signed depth of the pattern at zero delay, relative to baseline."""
        return self.visibility * self.phase_averaging * math.cos(self.phase)

    def replace(self, **changes) -> "FringeConfig":
        return dataclasses.replace(self, **changes)


@dataclass(frozen=True)
class PatternPoint:
    delay: float
    rate: float
    sigma: Optional[float] = None

    def __post_init__(self) -> None:
        if not self.rate >= 0:
            raise InvalidParameter(f"rate must be non-negative, got {self.rate!r}", component="fringe")


def envelope(delay: Union[float, np.ndarray], fwhm: float) -> Union[float, np.ndarray]:
    """Unit-peak Gaussian with the given full width at half maximum."""
    return np.exp(-FOUR_LN2 * np.square(delay) / fwhm**2)


def _model(delay, baseline, visibility, fwhm, modulation):
    return baseline * (1.0 - visibility * modulation * envelope(delay, fwhm))


def coincidence_rate(
    delay: Union[float, np.ndarray], cfg: FringeConfig
) -> Union[float, np.ndarray]:
    rate = cfg.baseline * (1.0 - cfg.contrast * envelope(delay, cfg.fwhm))
    return float(rate) if np.ndim(rate) == 0 else rate


def delay_grid(span: float, points: int) -> np.ndarray:
    """``points`` equally spaced delays on [-span, span]."""
    if not span > 0 or points < 2:
        raise InvalidParameter(
            f"Need span > 0 and at least 2 points, got span={span!r}, points={points!r}",
            component="fringe",
        )
    return np.linspace(-span, span, int(points))


def pattern(
    cfg: FringeConfig,
    delays: Sequence[float],
    integration_time: Optional[float] = None,
    seed: Optional[int] = None,
) -> list[PatternPoint]:
    """
    Rates on a delay grid.

    Without ``integration_time`` the exact model is returned. With it, counts
    are drawn from a Poisson distribution (seeded) and converted back to
    rates, with sigma = sqrt(max(N, 1)) / t.
    """
    delays = np.asarray(delays, dtype=float)
    if not np.all(np.isfinite(delays)):
        raise InvalidParameter("Delays must be finite", component="fringe")
    rates = np.atleast_1d(coincidence_rate(delays, cfg))

    if integration_time is None:
        return [PatternPoint(float(x), float(r)) for x, r in zip(delays, rates)]

    if not integration_time > 0:
        raise InvalidParameter(
            f"integration_time must be positive, got {integration_time!r}", component="fringe"
        )
    if seed is None:
        raise InvalidParameter("Poisson sampling needs an explicit seed", component="fringe")

    rng = np.random.default_rng(seed)
    counts = rng.poisson(rates * integration_time)
    sigmas = np.sqrt(np.maximum(counts, 1)) / integration_time
    logger.debug(f"Sampled {len(delays)} points, t={integration_time}s, seed={seed}")
    return [
        PatternPoint(float(x), float(n / integration_time), float(s))
        for x, n, s in zip(delays, counts, sigmas)
    ]


def _arrays(points: Sequence[PatternPoint]) -> tuple[np.ndarray, np.ndarray, Optional[np.ndarray]]:
    ordered = sorted(points, key=lambda p: p.delay)
    delays = np.array([p.delay for p in ordered], dtype=float)
    rates = np.array([p.rate for p in ordered], dtype=float)
    if all(p.sigma is not None for p in ordered):
        sigmas = np.array([p.sigma for p in ordered], dtype=float)
    else:
        sigmas = None
    return delays, rates, sigmas


def _edge_baseline(rates: np.ndarray) -> float:
    edge = max(1, len(rates) // 20)
    return float(np.mean(np.concatenate([rates[:edge], rates[-edge:]])))


def extract_fwhm(points: Sequence[PatternPoint], baseline: Optional[float] = None) -> float:
    """Width of the dip or peak at half depth, by linear interpolation."""
    delays, rates, _ = _arrays(points)
    if len(delays) < 3:
        raise FitError("Need at least 3 points to extract a width")
    baseline = _edge_baseline(rates) if baseline is None else baseline

    depth = np.abs(rates - baseline)
    centre = int(np.argmax(depth))
    half = depth[centre] / 2.0
    if half == 0.0:
        raise FitError("Pattern has no dip or peak")

    def crossing(indices: range) -> float:
        previous = centre
        for i in indices:
            if depth[i] <= half:
                x0, x1 = delays[previous], delays[i]
                d0, d1 = depth[previous], depth[i]
                return float(x0 + (d0 - half) * (x1 - x0) / (d0 - d1))
            previous = i
        raise FitError("Pattern does not fall to half depth inside the delay range")

    left = crossing(range(centre - 1, -1, -1))
    right = crossing(range(centre + 1, len(delays)))
    return right - left


def fit_visibility(
    points: Sequence[PatternPoint], cfg_prior: FringeConfig
) -> tuple[MeasuredValue, float]:
    """
    Least-squares fit of (baseline, V, FWHM) with the phase of ``cfg_prior``.

    Point sigmas, when every point has one, are used as absolute weights.

    Returns:
        (fitted visibility with 1-sigma, fitted FWHM)

    Raises:
        FitError: too few points, degenerate delays, span below one FWHM,
            cos(phase) = 0, or a fit that does not converge
    """
    delays, rates, sigmas = _arrays(points)
    if len(delays) < MIN_FIT_POINTS:
        raise FitError(f"Need at least {MIN_FIT_POINTS} points, got {len(delays)}")
    span = float(delays[-1] - delays[0])
    if span == 0.0:
        raise FitError("All delays are equal")
    if span < cfg_prior.fwhm:
        raise FitError(
            f"Delay span {span:.4g} is below one FWHM ({cfg_prior.fwhm:.4g})",
            context={"span": span, "fwhm": cfg_prior.fwhm},
        )
    modulation = math.cos(cfg_prior.phase) * cfg_prior.phase_averaging
    if abs(modulation) < 1e-9:
        raise FitError("Phase leaves no interference term to fit")

    baseline0 = _edge_baseline(rates)
    centre_rate = float(rates[np.argmin(np.abs(delays))])
    visibility0 = (baseline0 - centre_rate) / (baseline0 * modulation) if baseline0 > 0 else 0.0
    options = dict(
        sigma=sigmas, absolute_sigma=sigmas is not None, method="lm", ftol=1e-12, xtol=1e-12
    )

    try:
        if np.ptp(rates) == 0.0:
            # flat data carry no width information
            fwhm = cfg_prior.fwhm
            popt, pcov = curve_fit(
                lambda x, b, v: _model(x, b, v, fwhm, modulation),
                delays, rates, p0=[baseline0, 0.0], **options,
            )
        else:
            popt, pcov = curve_fit(
                lambda x, b, v, w: _model(x, b, v, w, modulation),
                delays, rates, p0=[baseline0, visibility0, cfg_prior.fwhm], **options,
            )
            fwhm = abs(float(popt[2]))
    except (RuntimeError, ValueError) as e:
        raise FitError(f"Visibility fit failed: {e}") from e

    sigma_v = float(np.sqrt(pcov[1, 1])) if np.isfinite(pcov[1, 1]) else math.nan
    if not math.isfinite(sigma_v) or sigma_v < 0:
        raise FitError("Covariance of the visibility could not be estimated")

    visibility = MeasuredValue(float(popt[1]), sigma_v)
    logger.debug(f"Fitted V = {visibility}, FWHM = {fwhm:.6g} um on {len(delays)} points")
    return visibility, fwhm


def pattern_frame(points: Sequence[PatternPoint]) -> pd.DataFrame:
    return pd.DataFrame(
        {"delay": [p.delay for p in points], "rate": [p.rate for p in points]},
        columns=CSV_COLUMNS,
    )


def write_pattern_csv(
    points: Sequence[PatternPoint], target: Union[str, Path, TextIO, None] = None
) -> str:
    """Write ``delay,rate`` CSV; returns the text when ``target`` is None."""
    frame = pattern_frame(points)
    if target is None:
        buffer = io.StringIO()
        frame.to_csv(buffer, index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n")
        return buffer.getvalue()
    frame.to_csv(target, index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n")
    return ""


def read_pattern_csv(source: Union[str, Path, TextIO]) -> list[PatternPoint]:
    location = str(source) if isinstance(source, (str, Path)) else "<stream>"
    try:
        frame = pd.read_csv(source)
    except FileNotFoundError as e:
        raise ParseError(f"File not found: {location}", location=location) from e
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
        raise ParseError(f"Unreadable pattern CSV: {e}", location=location) from e

    report = verify_data_integrity(
        frame,
        required_columns=CSV_COLUMNS,
        min_rows=1,
        check_duplicates=True,
        numeric_columns=CSV_COLUMNS,
    )
    if not report["passed"]:
        raise ParseError(
            f"Invalid pattern CSV: {'; '.join(report['issues'])}",
            location=location,
            context={"metrics": report["metrics"]},
        )
    if (frame["rate"] < 0).any():
        raise ParseError("Pattern CSV has negative rates", location=location)

    return [PatternPoint(float(x), float(r)) for x, r in zip(frame["delay"], frame["rate"])]
