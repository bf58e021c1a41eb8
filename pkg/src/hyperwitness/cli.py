"""
hyperwitness command line
=========================

    hyperwitness state --phases 0,0,0
    hyperwitness witness --kind W2 --noise white:0.1
    hyperwitness witness --kind W3 --threshold white
    hyperwitness noise-sweep --grid 0:1:0.01 --out sweep.csv
    hyperwitness table eval --witness Wpi
    hyperwitness fringe sim --stage first --visibility 0.815 --out pattern.csv
    hyperwitness fringe fit --in pattern.csv
    hyperwitness config show --out effective.yaml

Scalar results go to stdout as JSON, sweeps and patterns as CSV. Exit codes:
0 success, 1 domain error (printed as JSON), 2 usage error.
"""

import json
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional, Sequence

import click
import numpy as np

from .analysis.datalab import load_table, witness_from_measurements
from .analysis.fringe import (
    FringeConfig,
    Stage,
    delay_grid,
    fit_visibility,
    pattern,
    read_pattern_csv,
    write_pattern_csv,
)
from .config import ConfigManager
from .simulation.noise import (
    Channel,
    NoiseModel,
    WhiteNoiseScope,
    dephase_dof,
    noise_sweep,
    white_noise,
    witness_noise_threshold,
)
from .simulation.observables import WitnessForm, WitnessKind, WitnessName, evaluate_witness
from .simulation.qcore import Dof, Tolerances, entropy_of_entanglement, hyper_state
from .utils.error_handling import ConfigurationError, HyperwitnessError, handle_error
from .utils.logger import get_logger, set_level

logger = get_logger(__name__)

SIGNIFICANT_DIGITS = 6
MAX_GRID_POINTS = 1_000_000
LOG_LEVELS = ["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"]
WITNESS_CHOICES = [w.value for w in WitnessName]
FORM_CHOICES = [f.value for f in WitnessForm]
CHANNEL_CHOICES = [c.value for c in Channel]


def _round(x: float) -> float:
    return float(f"{x:.{SIGNIFICANT_DIGITS}g}")


def _emit(payload: dict[str, Any]) -> None:
    click.echo(json.dumps(payload))


@dataclass
class RunConfig:
    """One validated invocation, logged before it runs."""

    command: str
    options: dict[str, Any] = field(default_factory=dict)
    seed: Optional[int] = None
    output_path: Optional[str] = None

    @property
    def stochastic(self) -> bool:
        return self.options.get("integration_time") is not None

    def validate(self) -> "RunConfig":
        if self.stochastic and self.seed is None:
            raise click.UsageError(f"'{self.command}' samples counts and needs --seed")
        logger.info(f"Running {self.command}: {self.options}")
        return self


# --------------------------------------------------------------------------
# option parsing
# --------------------------------------------------------------------------


def _parse_phases(ctx, param, value: str) -> tuple[float, float, float]:
    try:
        phases = tuple(float(x) for x in value.split(","))
    except ValueError:
        raise click.BadParameter("expected three comma-separated numbers, e.g. 0,0,3.14159")
    if len(phases) != 3:
        raise click.BadParameter("expected exactly three phases (pi, k, c)")
    return phases


def _parse_grid(ctx, param, value: str) -> list[float]:
    try:
        start, stop, step = (float(x) for x in value.split(":"))
    except ValueError:
        raise click.BadParameter("expected start:stop:step, e.g. 0:1:0.01")
    if step <= 0 or stop < start:
        raise click.BadParameter("need step > 0 and stop >= start")
    count = int(round((stop - start) / step)) + 1
    if count > MAX_GRID_POINTS:
        raise click.BadParameter(f"grid has {count} points, at most {MAX_GRID_POINTS} allowed")
    end = start + (count - 1) * step
    if abs(end - stop) < 1e-9 * max(1.0, abs(stop)):
        end = stop
    return [float(x) for x in np.linspace(start, end, count)]


@dataclass(frozen=True)
class NoiseSpec:
    kind: str
    strength: float
    dof: Optional[Dof] = None

    def __str__(self) -> str:
        middle = f":{self.dof.value}" if self.dof else ""
        return f"{self.kind}{middle}:{self.strength:g}"


def _parse_noise(ctx, param, values: Sequence[str]) -> list[NoiseSpec]:
    specs = []
    for text in values:
        parts = text.split(":")
        try:
            if parts[0] in ("white", "global-white") and len(parts) == 2:
                specs.append(NoiseSpec(parts[0], float(parts[1])))
            elif parts[0] in ("dephase", "visibility") and len(parts) == 3:
                specs.append(NoiseSpec(parts[0], float(parts[2]), Dof(parts[1].lower())))
            else:
                raise ValueError(text)
        except ValueError:
            raise click.BadParameter(
                f"'{text}' is not white:p, global-white:p, dephase:<dof>:q or visibility:<dof>:v"
            )
    return specs


def _noisy_state(model: NoiseModel, specs: Sequence[NoiseSpec]):
    for spec in specs:
        if spec.kind == "visibility":
            model.visibility[spec.dof] = spec.strength
    model = NoiseModel(model.white_fraction, model.dephase, model.visibility, model.white_scope)
    rho = model.prepare()
    for spec in specs:
        if spec.kind == "white":
            rho = white_noise(rho, spec.strength, WhiteNoiseScope.PER_DOF)
        elif spec.kind == "global-white":
            rho = white_noise(rho, spec.strength, WhiteNoiseScope.GLOBAL)
        elif spec.kind == "dephase":
            rho = dephase_dof(rho, spec.dof, spec.strength)
    return rho


def _fringe_config(ctx: click.Context, **overrides) -> FringeConfig:
    defaults = ctx.obj.get_config("fringe", {})
    values = {
        "wavelength": defaults.get("wavelength_um", 0.728),
        "bandwidth": defaults.get("bandwidth_um", 0.006),
        "baseline": defaults.get("baseline", 1000.0),
    }
    values.update({k: v for k, v in overrides.items() if v is not None})
    return FringeConfig(**values)


def fringe_options(func):
    """Options shared by ``fringe sim`` and ``fringe fit``."""
    options = [
        click.option("--stage", type=click.Choice([s.value for s in Stage]), default="first", show_default=True),
        click.option("--phase", type=float, default=0.0, show_default=True, help="radians"),
        click.option("--phase-averaging", type=click.FloatRange(0, 1), default=1.0, show_default=True),
        click.option("--wavelength", type=float, default=None, help="um"),
        click.option("--bandwidth", type=float, default=None, help="um"),
    ]
    for option in reversed(options):
        func = option(func)
    return func


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------


@click.group()
@click.option("--config", "config_path", type=click.Path(dir_okay=False), default=None,
              help="YAML or JSON configuration file")
@click.option("--log-level", type=click.Choice(LOG_LEVELS, case_sensitive=False), default=None)
@click.pass_context
def cli(ctx: click.Context, config_path: Optional[str], log_level: Optional[str]) -> None:
    """Hyperentangled two-photon states and their entanglement witnesses."""
    try:
        ctx.obj = ConfigManager(config_path, strict=True)
    except ConfigurationError as e:
        raise click.BadParameter(e.message, param_hint="--config")
    set_level(
        log_level or ctx.obj.get_value("logging", "level", "INFO"),
        log_file=ctx.obj.get_value("logging", "file"),
    )


@cli.command()
@click.option("--phases", default="0,0,0", show_default=True, callback=_parse_phases,
              help="phase_pi,phase_k,phase_c in radians")
@click.pass_context
def state(ctx: click.Context, phases: tuple[float, float, float]) -> None:
    """Nonzero amplitudes and A|B entanglement entropy of the hyperentangled state."""
    RunConfig("state", {"phases": phases}).validate()
    tolerances = Tolerances.from_config(ctx.obj.get_config("numerics", {}))
    psi = hyper_state(*phases)
    _emit(
        {
            "register": [label.name for label in psi.register],
            "phases": list(phases),
            "amplitudes": [
                {
                    "index": index,
                    "basis": psi.basis_label(index),
                    "re": _round(amplitude.real),
                    "im": _round(amplitude.imag),
                }
                for index, amplitude in psi.nonzero()
            ],
            "entropy": _round(entropy_of_entanglement(psi, tolerances=tolerances)),
        }
    )


@cli.command()
@click.option("--kind", type=click.Choice(WITNESS_CHOICES), required=True)
@click.option("--form", type=click.Choice(FORM_CHOICES), default="as_evaluated", show_default=True)
@click.option("--noise", "noise_specs", multiple=True, callback=_parse_noise,
              help="white:p, global-white:p, dephase:<dof>:q or visibility:<dof>:v (repeatable)")
@click.option("--noise-model", type=click.Path(exists=True, dir_okay=False), default=None,
              help="NoiseModel JSON file")
@click.option("--threshold", type=click.Choice(CHANNEL_CHOICES), default=None,
              help="report the noise level at which the witness reaches 0")
@click.option("--tol", type=float, default=None, help="threshold bisection tolerance")
@click.pass_context
def witness(ctx, kind, form, noise_specs, noise_model, threshold, tol) -> None:
    """Witness expectation on the (noisy) hyperentangled state."""
    w = WitnessKind.parse(kind, form)
    RunConfig(
        "witness",
        {"kind": kind, "form": form, "noise": [str(s) for s in noise_specs],
         "noise_model": noise_model, "threshold": threshold},
    ).validate()

    if threshold is not None:
        if noise_specs or noise_model:
            raise click.UsageError("--threshold cannot be combined with --noise or --noise-model")
        noise_cfg = ctx.obj.get_config("noise", {})
        p_star = witness_noise_threshold(
            w,
            threshold,
            tol=tol if tol is not None else noise_cfg.get("threshold_tolerance", 1e-6),
            grid_points=noise_cfg.get("monotonicity_grid", 21),
        )
        _emit({"witness": str(w), "channel": threshold, "threshold": _round(p_star)})
        return

    model = NoiseModel.from_json(noise_model) if noise_model else NoiseModel()
    rho = _noisy_state(model, noise_specs)
    _emit(
        {
            "witness": str(w),
            "noise": [str(s) for s in noise_specs],
            "value": _round(evaluate_witness(rho, w)),
        }
    )


@cli.command("noise-sweep")
@click.option("--grid", default="0:1:0.01", show_default=True, callback=_parse_grid,
              help="start:stop:step of noise levels")
@click.option("--channel", type=click.Choice(CHANNEL_CHOICES), default="white", show_default=True)
@click.option("--form", type=click.Choice(FORM_CHOICES), default="as_evaluated", show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="CSV file (stdout if omitted)")
@click.option("--workers", type=click.IntRange(min=1), default=None)
@click.pass_context
def sweep(ctx, grid, channel, form, out, workers) -> None:
    """All witnesses against a noise level grid, as CSV."""
    workers = workers or ctx.obj.get_value("noise", "sweep_workers", 1)
    RunConfig("noise-sweep", {"points": len(grid), "channel": channel, "workers": workers},
              output_path=out).validate()

    frame = noise_sweep(grid, channel, form, workers)
    if out is None:
        click.echo(frame.to_csv(index=False, float_format="%.6g", lineterminator="\n"), nl=False)
        return
    frame.to_csv(out, index=False, float_format="%.6g", lineterminator="\n")
    _emit({"rows": len(frame), "out": str(out)})


@cli.group()
def table() -> None:
    """Measured stabilizer tables."""


def _table_path(ctx: click.Context, path: Optional[str]) -> Path:
    return Path(path) if path else ctx.obj.default_table_path()


@table.command("eval")
@click.option("--file", "path", type=click.Path(dir_okay=False), default=None,
              help="table JSON (bundled Table I if omitted)")
@click.option("--witness", "kind", type=click.Choice(WITNESS_CHOICES), required=True)
@click.option("--form", type=click.Choice(FORM_CHOICES), default="as_evaluated", show_default=True)
@click.pass_context
def table_eval(ctx, path, kind, form) -> None:
    """Witness value and uncertainty from measured stabilizer products."""
    path = _table_path(ctx, path)
    RunConfig("table eval", {"file": str(path), "witness": kind, "form": form}).validate()
    result = witness_from_measurements(load_table(path), WitnessKind.parse(kind, form))
    _emit(
        {
            "witness": kind,
            "value": _round(result.value),
            "sigma": _round(result.sigma),
            "display": str(result),
        }
    )


@table.command("show")
@click.option("--file", "path", type=click.Path(dir_okay=False), default=None)
@click.pass_context
def table_show(ctx, path) -> None:
    """Print the parsed table as JSON."""
    path = _table_path(ctx, path)
    RunConfig("table show", {"file": str(path)}).validate()
    _emit(load_table(path).to_dict())


@cli.group()
def fringe() -> None:
    """Coincidence interference patterns."""


@fringe.command("sim")
@fringe_options
@click.option("--visibility", type=click.FloatRange(0, 1), default=1.0, show_default=True)
@click.option("--baseline", type=float, default=None, help="coincidences/s")
@click.option("--span", type=float, default=None, help="delays run over [-span, span] um")
@click.option("--points", type=click.IntRange(min=2), default=None)
@click.option("--integration-time", type=float, default=None, help="s; enables Poisson sampling")
@click.option("--seed", type=int, default=None)
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="CSV file (stdout if omitted)")
@click.pass_context
def fringe_sim(ctx, stage, phase, phase_averaging, wavelength, bandwidth, visibility,
               baseline, span, points, integration_time, seed, out) -> None:
    """Simulate a coincidence pattern."""
    defaults = ctx.obj.get_config("fringe", {})
    span = span if span is not None else defaults.get("span_um", 300.0)
    points = points if points is not None else defaults.get("points", 121)
    RunConfig(
        "fringe sim",
        {"stage": stage, "phase": phase, "visibility": visibility, "span": span,
         "points": points, "integration_time": integration_time},
        seed=seed,
        output_path=out,
    ).validate()

    cfg = _fringe_config(
        ctx, stage=stage, phase=phase, phase_averaging=phase_averaging, wavelength=wavelength,
        bandwidth=bandwidth, visibility=visibility, baseline=baseline,
    )
    points_out = pattern(cfg, delay_grid(span, points), integration_time, seed)
    text = write_pattern_csv(points_out, out)
    if out is None:
        click.echo(text, nl=False)
    else:
        _emit({"rows": len(points_out), "out": str(out), "fwhm": _round(cfg.fwhm)})


@fringe.command("fit")
@fringe_options
@click.option("--in", "source", type=click.Path(exists=True, dir_okay=False), required=True)
@click.pass_context
def fringe_fit(ctx, stage, phase, phase_averaging, wavelength, bandwidth, source) -> None:
    """Fit visibility and FWHM to a pattern CSV."""
    RunConfig("fringe fit", {"in": source, "stage": stage, "phase": phase}).validate()
    prior = _fringe_config(
        ctx, stage=stage, phase=phase, phase_averaging=phase_averaging,
        wavelength=wavelength, bandwidth=bandwidth,
    )
    visibility, fwhm = fit_visibility(read_pattern_csv(source), prior)
    _emit(
        {
            "visibility": _round(visibility.value),
            "sigma": _round(visibility.sigma),
            "fwhm": _round(fwhm),
        }
    )


@cli.group("config")
def config_group() -> None:
    """Effective configuration."""


@config_group.command("show")
@click.option("--out", type=click.Path(dir_okay=False), default=None,
              help="write the merged configuration as YAML or JSON")
@click.pass_context
def config_show(ctx, out) -> None:
    """Print the merged configuration and its validation result."""
    RunConfig("config show", output_path=out).validate()
    if out is not None:
        if not ctx.obj.save_config(out):
            raise ConfigurationError(f"Could not write configuration to {out}", config_component="file")
        _emit({"out": str(out)})
        return
    _emit({"config": ctx.obj.get_all_config(), "validation": ctx.obj.validate_config()})


def run(argv: Optional[Sequence[str]] = None) -> int:
    """Run the CLI and return its exit code instead of exiting."""
    try:
        result = cli.main(
            args=list(argv) if argv is not None else None,
            prog_name="hyperwitness",
            standalone_mode=False,
        )
        return result if isinstance(result, int) else 0
    except click.ClickException as e:
        e.show()
        return e.exit_code
    except click.exceptions.Abort:
        click.echo("Aborted!", err=True)
        return 1
    except HyperwitnessError as e:
        logger.error(f"{e.error_type}: {e.message}")
        _emit(e.to_dict())
        return 1
    except Exception as e:
        _emit(handle_error(e, component="cli").to_dict())
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
