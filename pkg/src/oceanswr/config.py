"""
Flat ``key = value`` experiment configuration.

Blank lines and ``#`` comments are ignored. Every key except
``experiment`` has a default; unknown, duplicated or ill-typed keys are
rejected with the offending key and line number. Environment variables
``OCEANSWR_<KEY>`` (key upper-cased) override file values.
"""

from __future__ import annotations

import dataclasses
import hashlib
import math
import os
from dataclasses import dataclass, fields

from .core import ConfigurationError, GridSpec, PhysicalParams
from .optimizer import SweepSpec, log_factors
from .swr import Guess, SwrConfig
from .transmission import TransmissionParams, alpha_taylor, beta_taylor

EXPERIMENTS = ("mono", "swr-zero-test", "swr-step", "optimize-alpha", "analyze-symbols", "convergence-study")
INITIALS = ("zero", "step", "csv")
ENV_PREFIX = "OCEANSWR_"


@dataclass(frozen=True)
class RunConfig:
    experiment: str
    # physics
    epsilon: float = 1e-3
    re: float = 1.0
    re_prime: float = 1.0
    fr: float = 1.0
    u0: float = 1.0
    v0: float = 0.0
    alpha_b: float = 0.0
    # grid (per subdomain; the monodomain has 2*nx - 1 columns)
    nx: int = 40
    nz: int = 10
    nt: int = 40
    T: float = 1.3
    half_length: float = 2.0
    # initial condition
    initial: str = "zero"
    step_height: float = 1.0
    step_start: float = -0.5  # fractions of half_length
    step_end: float = -0.25
    initial_csv: str = ""
    # Schwarz iteration
    alpha_factor: float = 1.0
    beta_factor: float = 1.0
    max_iterations: int = 20
    tolerance: float = 1e-12
    guess: str = "zero"
    periods: int = 1
    amplitude: float = 1.0
    parallel: bool = False
    # sweeps
    epsilons: tuple = (1e-2, 1e-3)
    alpha_min: float = 0.25
    alpha_max: float = 4.0
    alpha_points: int = 15
    fixed_iterations: int = 4
    trials: int = 3
    refine: bool = False
    beta_sweep: bool = False
    # symbols
    s: complex = complex(1.0, 0.5)
    eta: float = 0.3
    mode: int = 2
    # transport study
    levels: tuple = (20, 40, 80, 160)
    # output
    out: str = "out"
    seed: int = 0
    run_id: str = "run"
    snapshot_every: int = 0
    threads: int = 1

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigurationError(f"experiment must be one of {EXPERIMENTS}, got {self.experiment!r}")
        if self.initial not in INITIALS:
            raise ConfigurationError(f"initial must be one of {INITIALS}, got {self.initial!r}")
        if self.initial == "csv" and not os.path.exists(self.initial_csv):
            raise ConfigurationError(f"initial_csv {self.initial_csv!r} does not exist")
        if not self.step_start < self.step_end:
            raise ConfigurationError("step_start must be < step_end")
        if self.snapshot_every < 0 or self.threads < 1:
            raise ConfigurationError("snapshot_every must be >= 0 and threads >= 1")
        # constructing the derived objects runs their own validation
        params = self.physical()
        grid = self.grid()
        if self.experiment != "analyze-symbols":
            grid.check_cfl(params)
        self.swr()
        self.sweep()

    def physical(self) -> PhysicalParams:
        return PhysicalParams(epsilon=self.epsilon, re=self.re, re_prime=self.re_prime, fr=self.fr, u0=self.u0,
                              v0=self.v0, alpha_b=self.alpha_b)

    def grid(self) -> GridSpec:
        return GridSpec.uniform(self.nx, self.nz, self.nt, self.T, self.half_length)

    def transmission(self, params: PhysicalParams | None = None) -> TransmissionParams:
        p = params or self.physical()
        return TransmissionParams(self.alpha_factor * alpha_taylor(p), self.beta_factor * beta_taylor(p))

    def swr(self) -> SwrConfig:
        guess = Guess(self.guess, seed=self.seed if self.guess == "random" else None, periods=self.periods,
                      amplitude=self.amplitude)
        return SwrConfig(self.transmission(), self.max_iterations, self.tolerance, guess, self.parallel)

    def sweep(self) -> SweepSpec:
        return SweepSpec(alpha_grid=log_factors(self.alpha_points, self.alpha_min, self.alpha_max),
                         fixed_iterations=self.fixed_iterations, trials=self.trials, base_seed=self.seed,
                         refine=self.refine, threads=self.threads)


_FIELDS = {f.name: f for f in fields(RunConfig)}


def _parse_bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("true", "yes", "1", "on"):
        return True
    if t in ("false", "no", "0", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _parse_float(text: str) -> float:
    t = text.strip().lower()
    if t in ("inf", "infinity"):
        return math.inf
    return float(t)


def _parse_value(key: str, text: str):
    default = _FIELDS[key].default
    if key == "experiment" or isinstance(default, str):
        return text.strip()
    if isinstance(default, bool):
        return _parse_bool(text)
    if isinstance(default, int):
        return int(text.strip())
    if isinstance(default, float):
        return _parse_float(text)
    if isinstance(default, complex):
        return complex(text.strip().replace(" ", ""))
    if isinstance(default, tuple):
        kind = type(default[0])
        parts = [p for p in text.split(",") if p.strip()]
        if not parts:
            raise ValueError("empty list")
        return tuple(kind(_parse_float(p)) if kind is float else kind(p.strip()) for p in parts)
    raise ValueError(f"unsupported type for {key}")


def _format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return "inf" if math.isinf(value) else repr(value)
    if isinstance(value, complex):
        return repr(value).strip("()")
    if isinstance(value, tuple):
        return ",".join(_format_value(v) for v in value)
    return str(value)


def parse_config_text(text: str, source: str = "<config>", env=None) -> RunConfig:
    values = {}
    where = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"{source}:{lineno}: expected key=value, got {raw.strip()!r}")
        key, val = (part.strip() for part in line.split("=", 1))
        if key not in _FIELDS:
            raise ConfigurationError(f"{source}:{lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigurationError(f"{source}:{lineno}: duplicate key {key!r} (first on line {where[key]})")
        try:
            values[key] = _parse_value(key, val)
        except ValueError as exc:
            raise ConfigurationError(f"{source}:{lineno}: bad value for {key!r}: {exc}") from None
        where[key] = lineno
    for name, val in (env if env is not None else os.environ).items():
        if not name.startswith(ENV_PREFIX):
            continue
        key = name[len(ENV_PREFIX):].lower()
        if key not in _FIELDS:
            raise ConfigurationError(f"environment {name}: unknown key {key!r}")
        try:
            values[key] = _parse_value(key, val)
        except ValueError as exc:
            raise ConfigurationError(f"environment {name}: bad value for {key!r}: {exc}") from None
    if "experiment" not in values:
        raise ConfigurationError(f"{source}: missing required key 'experiment'")
    try:
        return RunConfig(**values)
    except (ConfigurationError, ValueError) as exc:
        raise ConfigurationError(f"{source}: {exc}") from None


def parse_config(path, env=None) -> RunConfig:
    with open(path) as fh:
        return parse_config_text(fh.read(), str(path), env)


def dump_config(cfg: RunConfig) -> str:
    return "".join(f"{f.name} = {_format_value(getattr(cfg, f.name))}\n" for f in fields(cfg))


def config_hash(cfg: RunConfig) -> str:
    """Digest of every run-defining key; the output directory is left out."""
    return hashlib.sha256(dump_config(dataclasses.replace(cfg, out="")).encode()).hexdigest()


def with_overrides(cfg: RunConfig, **changes) -> RunConfig:
    return dataclasses.replace(cfg, **changes)
