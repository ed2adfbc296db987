"""Parameter sweeps over the transmission coefficients on the zero-solution test."""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from .core import ConfigurationError, GridSpec, PhysicalParams, State, layout_for
from .mono import run
from .swr import Guess, SwrConfig, swr_run
from .transmission import TransmissionParams, alpha_taylor, beta_taylor


def log_factors(n: int = 15, lo: float = 0.25, hi: float = 4.0) -> tuple:
    return tuple(float(x) for x in np.geomspace(lo, hi, n))


@dataclass(frozen=True)
class SweepSpec:
    alpha_grid: tuple = field(default_factory=log_factors)
    beta_grid: tuple | None = None  # None keeps beta at its Taylor value
    fixed_iterations: int = 4
    trials: int = 3
    base_seed: int = 0
    refine: bool = False
    threads: int = 1

    def __post_init__(self):
        if len(self.alpha_grid) == 0:
            raise ConfigurationError("alpha grid is empty")
        for name, grid in (("alpha", self.alpha_grid), ("beta", self.beta_grid or (1.0,))):
            if any(not f > 0 for f in grid):
                raise ConfigurationError(f"{name} factors must be > 0")
        if self.fixed_iterations < 1 or self.trials < 1:
            raise ConfigurationError("fixed_iterations and trials must be >= 1")

    @property
    def seeds(self) -> tuple:
        return tuple(self.base_seed + t for t in range(self.trials))


@dataclass
class SweepTable:
    epsilon: float
    factors: np.ndarray
    mean_error: np.ndarray
    per_seed: np.ndarray  # (len(factors), trials)

    @property
    def spread(self) -> float:
        """Decades between the worst and the best mean error."""
        return float(math.log10(self.mean_error.max() / self.mean_error.min()))


@dataclass
class AlphaResult:
    alpha_opt: float
    alpha_tay: float
    table: SweepTable

    @property
    def ratio(self) -> float:
        return self.alpha_opt / self.alpha_tay


def zero_state(grid: GridSpec) -> State:
    lay = layout_for("mono", grid)
    return State.zeros(grid.nz + 1, lay.ncols, lay.ncells)


def trial_error(tp: TransmissionParams, seed: int, iterations: int, params: PhysicalParams, grid: GridSpec,
                reference=None) -> float:
    initial = zero_state(grid)
    if reference is None:
        reference = run(initial, params, grid)
    cfg = SwrConfig(tp, max_iterations=iterations, tolerance=1e-300, guess=Guess("random", seed=seed))
    return float(swr_run(cfg, initial, params, grid, reference=reference).report.per_iteration_error[-1])


def _sweep(pairs, spec: SweepSpec, params, grid) -> np.ndarray:
    reference = run(zero_state(grid), params, grid)
    jobs = [(tp, seed) for tp in pairs for seed in spec.seeds]

    def one(job):
        return trial_error(job[0], job[1], spec.fixed_iterations, params, grid, reference)

    if spec.threads > 1:
        with ThreadPoolExecutor(max_workers=spec.threads) as pool:
            flat = list(pool.map(one, jobs))
    else:
        flat = [one(j) for j in jobs]
    return np.array(flat).reshape(len(pairs), spec.trials)


def _argmin_near_one(factors, errors) -> int:
    best = errors.min()
    ties = np.flatnonzero(errors == best)
    return int(ties[np.argmin(np.abs(np.log(np.asarray(factors)[ties])))])


def optimize_alpha(spec: SweepSpec, params: PhysicalParams, grid: GridSpec) -> AlphaResult:
    """Minimize the mean error after ``fixed_iterations`` over alpha = factor * alpha_Tay."""
    a_tay = alpha_taylor(params)
    b = beta_taylor(params)
    factors = np.asarray(spec.alpha_grid, dtype=float)
    per_seed = _sweep([TransmissionParams(f * a_tay, b) for f in factors], spec, params, grid)
    mean = per_seed.mean(axis=1)
    k = _argmin_near_one(factors, mean)
    best = factors[k]
    if spec.refine and factors.size >= 3:
        lo = factors[max(k - 1, 0)]
        hi = factors[min(k + 1, factors.size - 1)]
        reference = run(zero_state(grid), params, grid)

        def objective(logf):
            tp = TransmissionParams(math.exp(logf) * a_tay, b)
            return float(np.mean([trial_error(tp, s, spec.fixed_iterations, params, grid, reference)
                                  for s in spec.seeds]))

        res = minimize_scalar(objective, bounds=(math.log(lo), math.log(hi)), method="bounded",
                              options={"xatol": 1e-3})
        if res.fun < mean[k]:
            best = math.exp(res.x)
    return AlphaResult(best * a_tay, a_tay, SweepTable(params.epsilon, factors, mean, per_seed))


def beta_sensitivity(spec: SweepSpec, params: PhysicalParams, grid: GridSpec, alpha: float | None = None,
                     beta_factors=None) -> SweepTable:
    """Mean error over beta = factor * beta_Tay at fixed alpha (alpha_Tay when not given)."""
    b_tay = beta_taylor(params)
    if b_tay == 0:
        raise ConfigurationError("beta_Tay vanishes (Fr = inf); nothing to sweep")
    alpha = alpha_taylor(params) if alpha is None else alpha
    factors = np.asarray(beta_factors if beta_factors is not None else (spec.beta_grid or spec.alpha_grid),
                         dtype=float)
    per_seed = _sweep([TransmissionParams(alpha, f * b_tay) for f in factors], spec, params, grid)
    return SweepTable(params.epsilon, factors, per_seed.mean(axis=1), per_seed)


def write_alpha_csv(results, sweep_path, opt_path) -> None:
    with open(sweep_path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["epsilon", "factor", "mean_error"])
        for r in results:
            for f, e in zip(r.table.factors, r.table.mean_error):
                w.writerow([f"{r.table.epsilon:.17g}", f"{f:.17g}", f"{e:.17g}"])
    with open(opt_path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["epsilon", "alpha_opt", "alpha_tay", "ratio"])
        for r in results:
            w.writerow([f"{r.table.epsilon:.17g}", f"{r.alpha_opt:.17g}", f"{r.alpha_tay:.17g}", f"{r.ratio:.17g}"])
