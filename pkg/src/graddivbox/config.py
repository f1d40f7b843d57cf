"""Run and sweep configuration: YAML schema, validation, round-trip serialization.

Schema (flat key paths shown as they appear in error messages):

    grid.dim, grid.n, grid.box_length, grid.dealias_fraction
    flow.nu, flow.gamma
    forcing.n_low, forcing.modes  (list of {m: [...], amplitude: [[re, im], ...]})
    stepper.dt, stepper.t_end, stepper.scheme, stepper.cfl_target
    stats.burn_in, stats.window
    seed, output_dir
    sweep.gamma_values, sweep.parallel_workers   (sweep configs only)

Physical parameters (viscosity, gamma, forcing, box size) have no defaults
and must be spelled out; numerical knobs (scheme, cfl_target,
dealias_fraction, n_low) default sensibly. stepper.t_end defaults to
stats.burn_in + stats.window.
"""

from __future__ import annotations

from dataclasses import dataclass

import yaml

from .forcing import ForcingSpec
from .grid import GridSpec
from .solver import FlowParams, StepperConfig


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending key."""


@dataclass(frozen=True)
class RunConfig:
    grid: GridSpec
    params: FlowParams
    forcing: ForcingSpec
    stepper: StepperConfig
    burn_in: float
    window: float
    seed: int
    output_dir: str

    def __post_init__(self):
        if not self.window > 0:
            raise ConfigError("stats.window must be positive")
        if self.burn_in < 0:
            raise ConfigError("stats.burn_in must be nonnegative")


@dataclass(frozen=True)
class SweepConfig:
    base: RunConfig
    gamma_values: tuple
    parallel_workers: int = 1

    def __post_init__(self):
        gv = tuple(float(g) for g in self.gamma_values)
        if not gv:
            raise ConfigError("sweep.gamma_values must be nonempty")
        if any(g < 0 for g in gv):
            raise ConfigError("sweep.gamma_values must be nonnegative")
        if any(b <= a for a, b in zip(gv, gv[1:])):
            raise ConfigError("sweep.gamma_values must be strictly increasing")
        if self.parallel_workers < 1:
            raise ConfigError("sweep.parallel_workers must be >= 1")
        object.__setattr__(self, "gamma_values", gv)


_REQUIRED = object()


def _get(d: dict, path: str, default=_REQUIRED):
    cur = d
    for part in path.split("."):
        if not isinstance(cur, dict) or part not in cur:
            if default is _REQUIRED:
                raise ConfigError(f"missing required config key: {path}")
            return default
        cur = cur[part]
    return cur


def _build_run_config(d: dict) -> RunConfig:
    try:
        grid = GridSpec(
            dim=int(_get(d, "grid.dim")),
            n=int(_get(d, "grid.n")),
            box_length=float(_get(d, "grid.box_length")),
            dealias_fraction=float(_get(d, "grid.dealias_fraction", 2.0 / 3.0)),
        )
    except ValueError as e:
        raise ConfigError(f"grid: {e}") from e
    try:
        params = FlowParams(nu=float(_get(d, "flow.nu")), gamma=float(_get(d, "flow.gamma")))
    except ValueError as e:
        raise ConfigError(f"flow: {e}") from e

    raw_modes = _get(d, "forcing.modes")
    if not isinstance(raw_modes, list):
        raise ConfigError("forcing.modes must be a list")
    modes = []
    for i, entry in enumerate(raw_modes):
        try:
            m = tuple(int(v) for v in entry["m"])
            amp = tuple(complex(re, im) for re, im in entry["amplitude"])
        except (KeyError, TypeError, ValueError) as e:
            raise ConfigError(f"forcing.modes[{i}]: expected m and amplitude [[re, im], ...] ({e})") from e
        modes.append((m, amp))
    try:
        forcing = ForcingSpec(grid=grid, modes=tuple(modes), n_low=int(_get(d, "forcing.n_low", 2)))
    except ValueError as e:
        raise ConfigError(f"forcing: {e}") from e

    burn_in = float(_get(d, "stats.burn_in", 0.0))
    window = float(_get(d, "stats.window"))
    try:
        stepper = StepperConfig(
            dt=float(_get(d, "stepper.dt")),
            t_end=float(_get(d, "stepper.t_end", burn_in + window)),
            scheme=str(_get(d, "stepper.scheme", "imex-ars222")),
            cfl_target=float(_get(d, "stepper.cfl_target", 0.4)),
        )
    except ValueError as e:
        raise ConfigError(f"stepper: {e}") from e

    return RunConfig(
        grid=grid,
        params=params,
        forcing=forcing,
        stepper=stepper,
        burn_in=burn_in,
        window=window,
        seed=int(_get(d, "seed", 0)),
        output_dir=str(_get(d, "output_dir", "out")),
    )


def run_config_to_dict(cfg: RunConfig) -> dict:
    return {
        "grid": {
            "dim": cfg.grid.dim,
            "n": cfg.grid.n,
            "box_length": cfg.grid.box_length,
            "dealias_fraction": cfg.grid.dealias_fraction,
        },
        "flow": {"nu": cfg.params.nu, "gamma": cfg.params.gamma},
        "forcing": {
            "n_low": cfg.forcing.n_low,
            "modes": [
                {"m": list(m), "amplitude": [[a.real, a.imag] for a in amp]}
                for m, amp in cfg.forcing.modes
            ],
        },
        "stepper": {
            "dt": cfg.stepper.dt,
            "t_end": cfg.stepper.t_end,
            "scheme": cfg.stepper.scheme,
            "cfl_target": cfg.stepper.cfl_target,
        },
        "stats": {"burn_in": cfg.burn_in, "window": cfg.window},
        "seed": cfg.seed,
        "output_dir": cfg.output_dir,
    }


def sweep_config_to_dict(cfg: SweepConfig) -> dict:
    d = run_config_to_dict(cfg.base)
    d["sweep"] = {
        "gamma_values": list(cfg.gamma_values),
        "parallel_workers": cfg.parallel_workers,
    }
    return d


def load_run_config(path) -> RunConfig:
    with open(path) as fh:
        d = yaml.safe_load(fh)
    if not isinstance(d, dict):
        raise ConfigError(f"config file {path} is not a mapping")
    return _build_run_config(d)


def load_sweep_config(path) -> SweepConfig:
    with open(path) as fh:
        d = yaml.safe_load(fh)
    if not isinstance(d, dict):
        raise ConfigError(f"config file {path} is not a mapping")
    base = _build_run_config(d)
    return SweepConfig(
        base=base,
        gamma_values=tuple(_get(d, "sweep.gamma_values")),
        parallel_workers=int(_get(d, "sweep.parallel_workers", 1)),
    )


def save_run_config(cfg: RunConfig, path) -> None:
    with open(path, "w") as fh:
        yaml.safe_dump(run_config_to_dict(cfg), fh, sort_keys=False)


def save_sweep_config(cfg: SweepConfig, path) -> None:
    with open(path, "w") as fh:
        yaml.safe_dump(sweep_config_to_dict(cfg), fh, sort_keys=False)
