"""
Schwarz waveform relaxation on two non-overlapping subdomains.

Each iteration solves both subdomains over the whole time window from the
records of the previous iteration (Jacobi sweep), then builds the records
for the next one. The reference is the monodomain run on the union grid.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .core import (ConfigurationError, DomainError, GridSpec, PhysicalParams, State, SurfaceField,
                   VelocityField, column_means, layout_for)
from .mono import Trajectory, _second_difference_z, cached_system, run, run_domain
from .transmission import (MATRIX_A, MATRIX_B, TransmissionParams, TransmissionRecord, compute_b_zeta,
                           update_transmission)


@dataclass(frozen=True)
class Guess:
    """Initial interface records: ``zero``, ``random`` (seeded, uniform on
    [-amplitude, amplitude]) or ``sinusoid`` in time."""

    kind: str = "zero"
    seed: int | None = None
    periods: int = 1
    amplitude: float = 1.0

    def __post_init__(self):
        if self.kind not in ("zero", "random", "sinusoid"):
            raise ConfigurationError(f"unknown guess kind {self.kind!r}")
        if self.kind == "random" and self.seed is None:
            raise ConfigurationError("random guess needs an explicit seed")
        if self.kind == "sinusoid" and self.periods < 1:
            raise ConfigurationError("sinusoid guess needs periods >= 1")


@dataclass(frozen=True)
class SwrConfig:
    tp: TransmissionParams
    max_iterations: int = 20
    tolerance: float = 1e-12
    guess: Guess = Guess()
    parallel: bool = False

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ConfigurationError("max_iterations must be >= 1")
        if not self.tolerance > 0:
            raise ConfigurationError("tolerance must be > 0")


@dataclass
class ErrorReport:
    per_iteration_error: np.ndarray
    per_iteration_interface_error: np.ndarray

    @property
    def iterations(self) -> int:
        return len(self.per_iteration_error)


@dataclass
class SwrResult:
    report: ErrorReport
    minus: Trajectory
    plus: Trajectory
    reference: Trajectory
    records: tuple = field(default=())


def split_state(state: State, grid: GridSpec) -> tuple[State, State]:
    """Restrict a union-grid state to the two subdomains (x=0 column shared)."""
    nx = grid.nx
    u, v, z = state.velocity.u, state.velocity.v, state.surface.zeta
    if u.shape[1] != 2 * nx - 1 or z.size != 2 * nx:
        raise DomainError("state does not live on the union grid")
    minus = State(VelocityField(u[:, :nx].copy(), v[:, :nx].copy()), SurfaceField(z[:nx].copy()), state.step_index)
    plus = State(VelocityField(u[:, nx - 1:].copy(), v[:, nx - 1:].copy()), SurfaceField(z[nx:].copy()),
                 state.step_index)
    return minus, plus


def sinusoid_guess(periods: int, amplitude: float, grid: GridSpec, side: str = "plus") -> TransmissionRecord:
    """amplitude * sin(2 pi periods t_k / T), constant over the levels."""
    if periods < 1:
        raise ConfigurationError("periods must be >= 1")
    T = grid.final_time
    tk = grid.dt * np.arange(grid.nt + 1)
    sig = amplitude * np.sin(2.0 * math.pi * periods * tk / T)
    row = np.tile(sig[:-1], (grid.nz + 1, 1))
    return TransmissionRecord(side, row, row.copy(), sig.copy() if side == "plus" else None)


def initial_records(guess: Guess, grid: GridSpec) -> tuple[TransmissionRecord, TransmissionRecord]:
    if guess.kind == "zero":
        return TransmissionRecord.zeros("minus", grid), TransmissionRecord.zeros("plus", grid)
    if guess.kind == "sinusoid":
        return (sinusoid_guess(guess.periods, guess.amplitude, grid, "minus"),
                sinusoid_guess(guess.periods, guess.amplitude, grid, "plus"))
    rng = np.random.default_rng(guess.seed)
    shape = (grid.nz + 1, grid.nt)
    a = guess.amplitude
    rm = TransmissionRecord("minus", rng.uniform(-a, a, shape), rng.uniform(-a, a, shape))
    rp = TransmissionRecord("plus", rng.uniform(-a, a, shape), rng.uniform(-a, a, shape),
                            rng.uniform(-a, a, grid.nt + 1))
    return rm, rp


def solve_subdomain(side: str, incoming: TransmissionRecord, initial: State, params: PhysicalParams,
                    grid: GridSpec, tp: TransmissionParams) -> tuple[Trajectory, TransmissionRecord]:
    """Run one subdomain over the time window and build the record it sends."""
    if incoming.side != side:
        raise DomainError(f"{side} subdomain cannot consume a {incoming.side} record")
    incoming.check_grid(grid)
    system = cached_system(params, grid, side, tp)
    traj = run_domain(initial, system, incoming)
    tr = traj.trace
    if side == "minus":
        means = np.array([column_means(s.velocity.u[:, -1:], grid.dz)[0] for s in traj.states])
        bz = compute_b_zeta(np.array([s.surface.zeta[-1] for s in traj.states]), means, params)
    else:
        bz = None
    outgoing = update_transmission(incoming, tr.u, tr.v, tp, params, b_zeta=bz)
    return traj, outgoing


def _weighted_sq(state: State, grid: GridSpec, interface_col: int | None) -> float:
    w = np.full(state.velocity.u.shape[1], grid.dx * grid.dz)
    if interface_col is not None:
        w[interface_col] *= 0.5
    vel = ((state.velocity.u**2 + state.velocity.v**2) * w[None, :]).sum()
    return float(vel + grid.dx * (state.surface.zeta**2).sum())


def l2_error(states_pair, reference: State, grid: GridSpec) -> float:
    """Relative discrete L2 distance of both subdomain states to the reference.

    Cells are weighted by their measure (the shared interface column counts
    half in each subdomain). Falls back to the absolute norm when the
    reference vanishes.
    """
    minus, plus = states_pair
    ref_m, ref_p = split_state(reference, grid)
    for s, r in ((minus, ref_m), (plus, ref_p)):
        if s.velocity.u.shape != r.velocity.u.shape or s.surface.zeta.shape != r.surface.zeta.shape:
            raise DomainError("subdomain state does not match the reference grid")
    diff_m = State(VelocityField(minus.velocity.u - ref_m.velocity.u, minus.velocity.v - ref_m.velocity.v),
                   SurfaceField(minus.surface.zeta - ref_m.surface.zeta))
    diff_p = State(VelocityField(plus.velocity.u - ref_p.velocity.u, plus.velocity.v - ref_p.velocity.v),
                   SurfaceField(plus.surface.zeta - ref_p.surface.zeta))
    nx = grid.nx
    num = math.sqrt(_weighted_sq(diff_m, grid, nx - 1) + _weighted_sq(diff_p, grid, 0))
    den = math.sqrt(_weighted_sq(ref_m, grid, nx - 1) + _weighted_sq(ref_p, grid, 0))
    return num / den if den > 0 else num


def _record_distance(a: TransmissionRecord, b: TransmissionRecord, grid: GridSpec) -> float:
    d = a.vector() - b.vector()
    return float(np.sqrt(grid.dt * grid.dz * (d**2).sum()))


def swr_run(config: SwrConfig, initial: State, params: PhysicalParams, grid: GridSpec,
            reference: Trajectory | None = None) -> SwrResult:
    """Iterate until the final-time error drops below the tolerance."""
    if reference is None:
        reference = run(initial, params, grid)
    init_m, init_p = split_state(initial, grid)
    rec_m, rec_p = initial_records(config.guess, grid)
    tp = config.tp
    errors, iface = [], []
    pool = ThreadPoolExecutor(max_workers=2) if config.parallel else None
    try:
        for _ in range(config.max_iterations):
            if pool is not None:
                fm = pool.submit(solve_subdomain, "minus", rec_m, init_m, params, grid, tp)
                fp = pool.submit(solve_subdomain, "plus", rec_p, init_p, params, grid, tp)
                (traj_m, out_for_p), (traj_p, out_for_m) = fm.result(), fp.result()
            else:
                traj_m, out_for_p = solve_subdomain("minus", rec_m, init_m, params, grid, tp)
                traj_p, out_for_m = solve_subdomain("plus", rec_p, init_p, params, grid, tp)
            errors.append(l2_error((traj_m.final, traj_p.final), reference.final, grid))
            iface.append(math.hypot(_record_distance(out_for_m, rec_m, grid),
                                    _record_distance(out_for_p, rec_p, grid)))
            rec_m, rec_p = out_for_m, out_for_p
            if errors[-1] <= config.tolerance:
                break
    finally:
        if pool is not None:
            pool.shutdown()
    report = ErrorReport(np.array(errors), np.array(iface))
    return SwrResult(report, traj_m, traj_p, reference, (rec_m, rec_p))


def exact_records(reference: Trajectory, params: PhysicalParams, grid: GridSpec,
                  tp: TransmissionParams) -> tuple[TransmissionRecord, TransmissionRecord]:
    """Records that the converged algorithm exchanges, computed from a monodomain run.

    The x-flux through x = 0 at t_{k+1/2} is recovered from the right half
    cell balance of the monodomain solution and inserted into the
    transmission functionals.
    """
    if reference.kind != "mono":
        raise DomainError("exact records need a monodomain trajectory")
    p = params
    lay = layout_for("mono", grid)
    c = int(np.flatnonzero(lay.x_nodes == 0.0)[0])
    cl, cr = c, c + 1  # surface cells left/right of x = 0
    dx, dt = grid.dx, grid.dt
    Dzz = _second_difference_z(p, grid).toarray()
    a = tp.robin_coefficient(p)
    nt = grid.nt
    gp_u = np.zeros((grid.nz + 1, nt))
    gp_v = np.zeros_like(gp_u)
    gm_u = np.zeros_like(gp_u)
    gm_v = np.zeros_like(gp_u)
    st = reference.states
    for k in range(nt):
        s0, s1 = st[k], st[k + 1]
        U0 = 0.5 * np.stack([s0.velocity.u[:, c] + s1.velocity.u[:, c], s0.velocity.v[:, c] + s1.velocity.v[:, c]])
        U1 = 0.5 * np.stack([s0.velocity.u[:, c + 1] + s1.velocity.u[:, c + 1],
                             s0.velocity.v[:, c + 1] + s1.velocity.v[:, c + 1]])
        dU = np.stack([s1.velocity.u[:, c] - s0.velocity.u[:, c], s1.velocity.v[:, c] - s0.velocity.v[:, c]]) / dt
        zr = 0.5 * (s0.surface.zeta[cr] + s1.surface.zeta[cr])
        zl = 0.5 * (s0.surface.zeta[cl] + s1.surface.zeta[cl])
        react = -(1.0 / p.re_prime) * (Dzz @ U0.T).T + p.inv_eps * np.stack([-U0[1], U0[0]])
        flux_half = p.u0 * 0.5 * (U0 + U1) - (U1 - U0) / (p.re * dx)
        flux_half[0] += p.inv_fr2 * zr
        flux0 = flux_half + 0.5 * dx * (dU + react)
        flux0[0] -= p.inv_fr2 * zl
        ubar = column_means(U0.T, grid.dz)  # (mean u, mean v)
        BU = MATRIX_B @ ubar
        AU = MATRIX_A @ U0
        gp = flux0 - 0.5 * p.u0 * U0 + a * AU - tp.beta * BU[:, None]
        gm = 0.5 * p.u0 * U0 + a * AU + tp.beta * BU[:, None] - flux0
        gp_u[:, k], gp_v[:, k] = gp
        gm_u[:, k], gm_v[:, k] = gm
    means0 = np.array([column_means(s.velocity.u[:, c:c + 1], grid.dz)[0] for s in st])
    bz = compute_b_zeta(np.array([s.surface.zeta[cl] for s in st]), means0, p)
    return TransmissionRecord("minus", gm_u, gm_v), TransmissionRecord("plus", gp_u, gp_v, bz)


def write_errors_csv(report: ErrorReport, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["iteration", "field_error", "interface_error"])
        for n, (e, d) in enumerate(zip(report.per_iteration_error, report.per_iteration_interface_error), 1):
            w.writerow([n, f"{e:.17g}", f"{d:.17g}"])
