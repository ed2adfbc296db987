"""
Finite-volume solver for the linearized primitive equations in an (x, z) slice.

Velocities live on a (nz+1) x ncols grid of cell centres, the surface
height on the staggered 1-D cells between velocity columns. A time step
first transports the surface height explicitly (upwind, time-k mean
velocities), then advances the momentum equations with Crank-Nicolson,
the pressure gradient averaged over levels k and k+1.

The same assembly serves the monodomain and both subdomains of the
Schwarz algorithm; subdomains replace the x-direction rows of their
interface column with the half-cell closures of ``transmission``.
"""

from __future__ import annotations

import csv
import functools
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.integrate import simpson

from .core import (ConfigurationError, DomainError, GridSpec, Layout, PhysicalParams, SolverError,
                   State, SurfaceField, VelocityField, column_means, layout_for)
from .transmission import InterfaceRows, TransmissionParams, TransmissionRecord, interface_momentum_rows

RESIDUAL_TOL = 1e-12


def apply_physical_bc(side: str, interior, params: PhysicalParams, grid: GridSpec):
    """Ghost value for a physical boundary.

    ``surface`` and ``outer-x`` copy the interior value (homogeneous
    Neumann); ``bottom`` applies the Robin friction law
    (g - i)/dz + alpha_b (g + i)/2 = 0.
    """
    if side in ("surface", "outer-x"):
        return interior
    if side == "bottom":
        h = 0.5 * params.alpha_b * grid.dz
        return interior * (1.0 - h) / (1.0 + h)
    raise DomainError(f"unknown boundary {side!r}")


def _second_difference_z(params, grid) -> sp.csr_matrix:
    n = grid.nz + 1
    main = np.full(n, -2.0)
    main[0] += apply_physical_bc("bottom", 1.0, params, grid)
    main[-1] += apply_physical_bc("surface", 1.0, params, grid)
    off = np.ones(n - 1)
    return sp.diags([off, main, off], [-1, 0, 1], format="csr") / grid.dz**2


def _x_operator(params, grid, lay: Layout) -> sp.lil_matrix:
    """u0 Dx - (1/Re) Dxx on velocity columns, ghost copies at outer edges."""
    n, dx = lay.ncols, grid.dx
    X = sp.lil_matrix((n, n))
    c1 = params.u0 / (2 * dx)
    c2 = 1.0 / (params.re * dx * dx)
    for i in range(n):
        left = i - 1 if i > 0 else i
        right = i + 1 if i < n - 1 else i
        X[i, right] += c1 - c2
        X[i, left] += -c1 - c2
        X[i, i] += 2 * c2
    return X


@dataclass
class MomentumSystem:
    """Constant Crank-Nicolson system of one computational domain.

    ``operator`` is the spatial operator K (u, v interleaved per cell), so
    that the scheme reads (I/dt + K/2) x_{k+1} = (I/dt - K/2) x_k + forcing.
    """

    params: PhysicalParams
    grid: GridSpec
    layout: Layout
    operator: sp.csr_matrix
    lhs: sp.csc_matrix
    interface: InterfaceRows | None = None
    _lu: object = field(default=None, repr=False)

    @property
    def shape(self):
        return (self.grid.nz + 1, self.layout.ncols)

    @property
    def interface_column(self) -> int | None:
        if self.layout.kind == "plus":
            return 0
        if self.layout.kind == "minus":
            return self.layout.ncols - 1
        return None

    def rhs(self, x_k, zeta_k, zeta_k1, record: TransmissionRecord | None = None, k: int = 0,
            b_zeta_avg: float = 0.0) -> np.ndarray:
        p, g = self.params, self.grid
        out = x_k / g.dt - 0.5 * (self.operator @ x_k)
        zbar = 0.5 * (zeta_k + zeta_k1)
        n = self.layout.ncols
        cols = np.arange(n)
        left = cols + self.layout.left_cell_offset
        grad = np.zeros(n)
        ok = (left >= 0) & (left + 1 < zbar.size)
        grad[ok] = (zbar[left[ok] + 1] - zbar[left[ok]]) / g.dx
        ic = self.interface_column
        if ic is not None:
            grad[ic] = 0.0
        u_rows = out[0::2].reshape(self.shape)
        u_rows -= p.inv_fr2 * grad[None, :]
        out[0::2] = u_rows.ravel()
        if self.interface is not None:
            out[self.interface.rows] += self.interface.forcing(record, k, zeta_cell_avg=zbar[0],
                                                               b_zeta_avg=b_zeta_avg)
        return out

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        x = self._lu.solve(rhs)
        nb = np.linalg.norm(rhs)
        res = np.linalg.norm(self.lhs @ x - rhs)
        if res > RESIDUAL_TOL * nb:
            x = x + self._lu.solve(rhs - self.lhs @ x)
            res = np.linalg.norm(self.lhs @ x - rhs)
            if not res <= RESIDUAL_TOL * nb:
                raise SolverError(f"linear solve residual {res:.3e} exceeds {RESIDUAL_TOL:g} * {nb:.3e}")
        return x


def assemble_momentum_system(params: PhysicalParams, grid: GridSpec, side: str = "mono",
                             tp: TransmissionParams | None = None) -> MomentumSystem:
    grid.check_cfl(params)
    lay = layout_for(side, grid)
    nlev, n = grid.nz + 1, lay.ncols
    X = _x_operator(params, grid, lay)
    ir = None
    if side != "mono":
        if tp is None:
            raise ConfigurationError("subdomain systems need transmission parameters")
        ic = 0 if side == "plus" else n - 1
        X[ic, :] = 0.0
        ir = interface_momentum_rows(side, tp, params, grid)
    I2 = sp.identity(2, format="csr")
    Ix = sp.identity(n, format="csr")
    Iz = sp.identity(nlev, format="csr")
    cor = sp.csr_matrix(np.array([[0.0, -1.0], [1.0, 0.0]]))
    K = sp.kron(Iz, sp.kron(X.tocsr(), I2))
    K = K - (1.0 / params.re_prime) * sp.kron(_second_difference_z(params, grid), sp.kron(Ix, I2))
    if params.inv_eps != 0.0:
        K = K + params.inv_eps * sp.kron(Iz, sp.kron(Ix, cor))
    K = K.tocsr()
    if ir is not None:
        K = K.tolil()
        for loc, r in enumerate(ir.rows):
            K[r, :] = K[r, :] + ir.matrix[loc, :]
        K = K.tocsr()
    K.sum_duplicates()
    K.eliminate_zeros()
    lhs = (sp.identity(K.shape[0], format="csr") / grid.dt + 0.5 * K).tocsc()
    return MomentumSystem(params, grid, lay, K, lhs, ir, spla.splu(lhs))


@functools.lru_cache(maxsize=64)
def cached_system(params: PhysicalParams, grid: GridSpec, side: str = "mono",
                  tp: TransmissionParams | None = None) -> MomentumSystem:
    return assemble_momentum_system(params, grid, side, tp)


def transport_step(surface: SurfaceField, mean_u, params: PhysicalParams, grid: GridSpec,
                   inflow: float) -> SurfaceField:
    """One explicit upwind step of d_t zeta + u0 d_x zeta + d_x mean_u = 0.

    ``mean_u`` holds the depth-averaged velocity on the cell edges
    (len(zeta) + 1 values); ``inflow`` is the upstream value left of the
    first cell.
    """
    grid.check_cfl(params)
    z = surface.zeta
    mu = np.asarray(mean_u, dtype=float)
    if mu.shape != (z.size + 1,):
        raise DomainError(f"mean_u must have {z.size + 1} edge values, got {mu.shape}")
    c = params.u0 * grid.dt / grid.dx
    upstream = np.empty_like(z)
    upstream[0] = inflow
    upstream[1:] = z[:-1]
    return SurfaceField((1.0 - c) * z + c * upstream - (grid.dt / grid.dx) * np.diff(mu))


def edge_means(mean_cols: np.ndarray, kind: str) -> np.ndarray:
    """Depth-averaged velocity on surface-cell edges, ghost-copied at outer ends."""
    if kind == "mono":
        return np.concatenate(([mean_cols[0]], mean_cols, [mean_cols[-1]]))
    if kind == "minus":
        return np.concatenate(([mean_cols[0]], mean_cols))
    if kind == "plus":
        return np.concatenate((mean_cols, [mean_cols[-1]]))
    raise DomainError(f"unknown layout kind {kind!r}")


def advance(state: State, system: MomentumSystem, record: TransmissionRecord | None = None) -> State:
    """Advance any domain by one step; ``record`` feeds a subdomain interface."""
    p, g, lay = system.params, system.grid, system.layout
    k = state.step_index
    if k >= g.nt:
        raise SolverError(f"step index {k} already at nt={g.nt}")
    vel = state.velocity
    means = column_means(vel.u, g.dz)
    zeta = state.surface
    if lay.kind == "plus":
        if record is None:
            raise ConfigurationError("plus subdomain needs an incoming record")
        inflow = (record.b_zeta[k] - means[0]) / p.u0
        b_zeta_avg = 0.5 * (record.b_zeta[k] + record.b_zeta[k + 1])
    else:
        inflow = zeta.zeta[0]
        b_zeta_avg = 0.0
    new_zeta = transport_step(zeta, edge_means(means, lay.kind), p, g, inflow)
    x_k = vel.interleaved()
    rhs = system.rhs(x_k, zeta.zeta, new_zeta.zeta, record, k, b_zeta_avg)
    x = system.solve(rhs)
    new = State(VelocityField.from_interleaved(x, system.shape), new_zeta, k + 1)
    if not (new.velocity.is_finite() and new.surface.is_finite()):
        raise SolverError(f"non-finite values after step {k + 1}")
    return new


def step(state: State, params: PhysicalParams, grid: GridSpec) -> State:
    """One monodomain time step."""
    return advance(state, cached_system(params, grid, "mono"))


@dataclass
class InterfaceTrace:
    """Values next to x = 0 at every time level 0..nt."""

    u: np.ndarray
    v: np.ndarray
    zeta_left: np.ndarray
    zeta_right: np.ndarray


@dataclass
class Trajectory:
    kind: str
    states: list
    trace: InterfaceTrace | None = None

    @property
    def final(self) -> State:
        return self.states[-1]

    def __len__(self):
        return len(self.states)


def interface_trace(states, kind: str, grid: GridSpec) -> InterfaceTrace:
    lay = layout_for(kind, grid)
    col = int(np.flatnonzero(lay.x_nodes == 0.0)[0])
    cl = int(np.flatnonzero(lay.x_cells < 0)[-1]) if (lay.x_cells < 0).any() else None
    cr = int(np.flatnonzero(lay.x_cells > 0)[0]) if (lay.x_cells > 0).any() else None
    nan = np.full(len(states), np.nan)
    return InterfaceTrace(
        u=np.stack([s.velocity.u[:, col] for s in states], axis=1),
        v=np.stack([s.velocity.v[:, col] for s in states], axis=1),
        zeta_left=np.array([s.surface.zeta[cl] for s in states]) if cl is not None else nan,
        zeta_right=np.array([s.surface.zeta[cr] for s in states]) if cr is not None else nan,
    )


def run_domain(initial: State, system: MomentumSystem, record: TransmissionRecord | None = None) -> Trajectory:
    states = [initial.copy()]
    s = states[0]
    while s.step_index < system.grid.nt:
        s = advance(s, system, record)
        states.append(s)
    kind = system.layout.kind
    return Trajectory(kind, states, interface_trace(states, kind, system.grid))


def run(initial: State, params: PhysicalParams, grid: GridSpec) -> Trajectory:
    """Monodomain trajectory over the nt steps of ``grid``."""
    lay = layout_for("mono", grid)
    if initial.velocity.u.shape != (grid.nz + 1, lay.ncols) or initial.surface.zeta.size != lay.ncells:
        raise DomainError("initial state does not match the monodomain grid")
    return run_domain(initial, cached_system(params, grid, "mono"))


def characteristic_solution(zeta_i, divergence, f, x, t, params: PhysicalParams, n_quad: int = 256):
    """Exact transport solution along characteristics.

    zeta(x, t) = zeta_i(x - u0 t) + int_0^t (f - div)(x - u0 s, t - s) ds,
    the integral by composite Simpson with ``n_quad`` (even) intervals.
    ``divergence`` and ``f`` are callables of (x, t).
    """
    u0 = params.u0
    if not u0 > 0:
        raise DomainError("characteristic formula needs u0 > 0")
    n_quad += n_quad % 2
    x = np.asarray(x, dtype=float)
    s = np.linspace(0.0, t, n_quad + 1)
    xs = x[..., None] - u0 * s
    ts = t - s
    integrand = np.asarray(f(xs, ts), dtype=float) - np.asarray(divergence(xs, ts), dtype=float)
    integrand = np.broadcast_to(integrand, xs.shape)
    integral = simpson(integrand, x=s, axis=-1) if t > 0 else 0.0
    return zeta_i(x - u0 * t) + integral


def write_field_csv(state: State, layout: Layout, grid: GridSpec, path) -> None:
    """One row per velocity cell: i, j, x, z, u, v."""
    z = grid.z
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["i", "j", "x", "z", "u", "v"])
        for j in range(grid.nz + 1):
            for i in range(layout.ncols):
                w.writerow([i, j, f"{layout.x_nodes[i]:.17g}", f"{z[j]:.17g}",
                            f"{state.velocity.u[j, i]:.17g}", f"{state.velocity.v[j, i]:.17g}"])


def write_surface_csv(state: State, layout: Layout, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["i", "x", "zeta"])
        for i in range(layout.ncells):
            w.writerow([i, f"{layout.x_cells[i]:.17g}", f"{state.surface.zeta[i]:.17g}"])


def read_initial_csv(path, grid: GridSpec) -> State:
    """Monodomain state from a field CSV (i, j, x, z, u, v) plus a ``zeta`` file next to it.

    The surface file is ``path`` with ``.csv`` replaced by ``_zeta.csv``.
    """
    lay = layout_for("mono", grid)
    state = State.zeros(grid.nz + 1, lay.ncols, lay.ncells)
    seen = np.zeros((grid.nz + 1, lay.ncols), dtype=bool)
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            i, j = int(row["i"]), int(row["j"])
            if not (0 <= i < lay.ncols and 0 <= j <= grid.nz):
                raise DomainError(f"{path}: cell ({i}, {j}) outside the monodomain grid")
            state.velocity.u[j, i] = float(row["u"])
            state.velocity.v[j, i] = float(row["v"])
            seen[j, i] = True
    if not seen.all():
        raise DomainError(f"{path}: {int((~seen).sum())} velocity cells missing")
    zpath = str(path)[:-4] + "_zeta.csv" if str(path).endswith(".csv") else str(path) + "_zeta"
    with open(zpath, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if len(rows) != lay.ncells:
        raise DomainError(f"{zpath}: expected {lay.ncells} surface cells, got {len(rows)}")
    for row in rows:
        state.surface.zeta[int(row["i"])] = float(row["zeta"])
    return state


@dataclass
class ConvergenceRow:
    h: float
    error: float
    observed_order: float


def transport_convergence(params: PhysicalParams, levels=(20, 40, 80, 160), courant: float = 0.8,
                          final_time: float = 0.5, length: float = 2.0) -> list:
    """L1 error of the upwind transport against the characteristic formula under joint refinement.

    Smooth data on (-length/2, length/2): a Gaussian height and a sinusoidal
    mean velocity; the inflow ghost takes the exact value.
    """
    u0 = params.u0

    def zeta_i(x):
        return np.exp(-((x + 0.3) / 0.2) ** 2)

    def mean_u(x, t):
        return 0.2 * np.sin(np.pi * x) * np.cos(t)

    def div(x, t):
        return 0.2 * np.pi * np.cos(np.pi * x) * np.cos(t)

    def zero(x, t):
        return np.zeros_like(x)

    def exact(x, t, nq):
        return characteristic_solution(zeta_i, div, zero, x, t, params, n_quad=nq)

    rows = []
    prev = None
    for n in levels:
        dx = length / n
        nt = int(math.ceil(final_time * u0 / (courant * dx)))
        dt = final_time / nt
        grid = GridSpec(nx=max(n, 4), nz=2, dx=dx, dz=0.5, dt=dt, nt=nt, half_length=length / 2)
        xc = -length / 2 + (np.arange(n) + 0.5) * dx
        xe = -length / 2 + np.arange(n + 1) * dx
        nq = 4 * nt + 64
        surf = SurfaceField(zeta_i(xc))
        for k in range(nt):
            t = k * dt
            inflow = exact(xc[0] - dx, t, nq)
            surf = transport_step(surf, mean_u(xe, t), params, grid, inflow)
        ref = np.array([exact(x, final_time, nq) for x in xc])
        err = float(dx * np.abs(surf.zeta - ref).sum())
        order = math.nan if prev is None else math.log(prev[1] / err) / math.log(prev[0] / dx)
        rows.append(ConvergenceRow(dx, err, order))
        prev = (dx, err)
    return rows
