"""
Physical parameters, grids and discrete fields of the linearized
primitive equations in an (x, z) vertical slice.

Dimensionless depth is 1: velocity levels sit at z_j = -1 + j*dz for
j = 0..nz. Fields are stored as arrays of shape (nz+1, ncols) so that the
C-order flattening gives the cell index I = i + j*ncols.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np


class DomainError(ValueError):
    """Invalid argument for a mathematical operation."""


class ConfigurationError(ValueError):
    """Inconsistent solver or experiment configuration."""


class SolverError(RuntimeError):
    """A linear solve or a time step failed."""


@dataclass(frozen=True)
class PhysicalParams:
    """Dimensionless numbers of the linearized model.

    ``epsilon`` and ``fr`` may be ``math.inf`` to switch off rotation or
    the surface-pressure coupling.
    """

    epsilon: float
    re: float = 1.0
    re_prime: float = 1.0
    fr: float = 1.0
    u0: float = 1.0
    v0: float = 0.0
    alpha_b: float = 0.0

    def __post_init__(self):
        for name in ("epsilon", "re", "re_prime", "fr"):
            val = getattr(self, name)
            if not val > 0:
                raise DomainError(f"{name} must be > 0, got {val!r}")
        # u0 = 0 is allowed for symbol work; anything that transports checks u0 > 0 itself
        if not (self.u0 >= 0 and math.isfinite(self.u0)):
            raise DomainError(f"u0 must be finite and >= 0, got {self.u0!r}")
        if not self.alpha_b >= 0:
            raise DomainError(f"alpha_b must be >= 0, got {self.alpha_b!r}")
        if not math.isfinite(self.v0):
            raise DomainError("v0 must be finite")

    @property
    def inv_eps(self) -> float:
        return 1.0 / self.epsilon

    @property
    def inv_fr2(self) -> float:
        return 1.0 / self.fr**2


def nondimensionalize(U, L, H, f, nu, g) -> PhysicalParams:
    """Build the dimensionless numbers from dimensional scales.

    Rossby U/(fL), Reynolds UL/nu, vertical Reynolds (H/L)^2 Re and
    Froude U/sqrt(gH).
    """
    for name, val in (("U", U), ("L", L), ("H", H), ("f", f), ("nu", nu), ("g", g)):
        if not val > 0:
            raise DomainError(f"{name} must be > 0, got {val!r}")
    re = U * L / nu
    return PhysicalParams(
        epsilon=U / (f * L),
        re=re,
        re_prime=(H * H) / (L * L) * re,
        fr=U / math.sqrt(g * H),
    )


@dataclass(frozen=True)
class GridSpec:
    """Uniform grid of one subdomain.

    Each subdomain carries ``nx`` velocity columns (the one on the
    interface included) and ``nx`` surface cells; the monodomain union grid
    has ``2*nx - 1`` velocity columns and ``2*nx`` surface cells covering
    (-half_length, half_length).
    """

    nx: int
    nz: int
    dx: float
    dz: float
    dt: float
    nt: int
    half_length: float

    def __post_init__(self):
        if int(self.nx) != self.nx or self.nx < 2:
            raise ConfigurationError(f"nx must be an integer >= 2, got {self.nx!r}")
        if int(self.nz) != self.nz or self.nz < 2:
            raise ConfigurationError(f"nz must be an integer >= 2, got {self.nz!r}")
        if int(self.nt) != self.nt or self.nt < 0:
            raise ConfigurationError(f"nt must be an integer >= 0, got {self.nt!r}")
        if abs(self.nz * self.dz - 1.0) > 1e-12:
            raise ConfigurationError(f"nz*dz must equal 1 (got {self.nz * self.dz!r})")
        for name in ("dx", "dt", "half_length"):
            if not getattr(self, name) > 0:
                raise ConfigurationError(f"{name} must be > 0")

    @classmethod
    def uniform(cls, nx: int, nz: int, nt: int, final_time: float, half_length: float) -> "GridSpec":
        if not (nx > 0 and nz > 0):
            raise ConfigurationError(f"nx and nz must be positive, got nx={nx!r}, nz={nz!r}")
        return cls(
            nx=nx,
            nz=nz,
            dx=half_length / nx,
            dz=1.0 / nz,
            dt=final_time / nt if nt > 0 else final_time,
            nt=nt,
            half_length=half_length,
        )

    @property
    def final_time(self) -> float:
        return self.nt * self.dt

    @property
    def nlev(self) -> int:
        return self.nz + 1

    @property
    def z(self) -> np.ndarray:
        return -1.0 + self.dz * np.arange(self.nz + 1)

    def courant(self, params: PhysicalParams) -> float:
        return params.u0 * self.dt / self.dx

    def check_cfl(self, params: PhysicalParams) -> None:
        if not params.u0 > 0:
            raise ConfigurationError("upwind transport needs u0 > 0")
        c = self.courant(params)
        if c > 1.0 + 1e-12:
            raise ConfigurationError(f"CFL violated: u0*dt/dx = {c:.6g} > 1")

    def with_steps(self, nt: int, dt: float | None = None) -> "GridSpec":
        return replace(self, nt=nt, dt=self.dt if dt is None else dt)


@dataclass
class VelocityField:
    u: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        self.u = np.asarray(self.u, dtype=float)
        self.v = np.asarray(self.v, dtype=float)
        if self.u.shape != self.v.shape or self.u.ndim != 2:
            raise DomainError(f"u and v must be 2-D arrays of equal shape, got {self.u.shape} and {self.v.shape}")

    @classmethod
    def zeros(cls, nlev: int, ncols: int) -> "VelocityField":
        return cls(np.zeros((nlev, ncols)), np.zeros((nlev, ncols)))

    def copy(self) -> "VelocityField":
        return VelocityField(self.u.copy(), self.v.copy())

    def is_finite(self) -> bool:
        return bool(np.isfinite(self.u).all() and np.isfinite(self.v).all())

    def interleaved(self) -> np.ndarray:
        out = np.empty(2 * self.u.size)
        out[0::2] = self.u.ravel()
        out[1::2] = self.v.ravel()
        return out

    @classmethod
    def from_interleaved(cls, x: np.ndarray, shape) -> "VelocityField":
        return cls(x[0::2].reshape(shape).copy(), x[1::2].reshape(shape).copy())


@dataclass
class SurfaceField:
    zeta: np.ndarray

    def __post_init__(self):
        self.zeta = np.asarray(self.zeta, dtype=float)
        if self.zeta.ndim != 1:
            raise DomainError("zeta must be one-dimensional")

    def copy(self) -> "SurfaceField":
        return SurfaceField(self.zeta.copy())

    def is_finite(self) -> bool:
        return bool(np.isfinite(self.zeta).all())


@dataclass
class State:
    velocity: VelocityField
    surface: SurfaceField
    step_index: int = 0

    def copy(self) -> "State":
        return State(self.velocity.copy(), self.surface.copy(), self.step_index)

    @classmethod
    def zeros(cls, nlev: int, ncols: int, ncells: int) -> "State":
        return cls(VelocityField.zeros(nlev, ncols), SurfaceField(np.zeros(ncells)))


def trapezoid_weights(nz: int, dz: float) -> np.ndarray:
    w = np.full(nz + 1, dz)
    w[0] = w[-1] = 0.5 * dz
    return w


def mean_velocity(column, dz: float) -> float:
    """Trapezoidal depth average of one velocity column over unit depth."""
    column = np.asarray(column, dtype=float)
    nz = column.shape[0] - 1
    if column.ndim != 1 or nz < 1 or abs(nz * dz - 1.0) > 1e-12:
        raise DomainError(f"column of length {column.shape[0]} does not match dz={dz!r}")
    return float(trapezoid_weights(nz, dz) @ column)


def column_means(field: np.ndarray, dz: float) -> np.ndarray:
    """Vectorised ``mean_velocity`` for every column of a (nz+1, ncols) array."""
    nz = field.shape[0] - 1
    return trapezoid_weights(nz, dz) @ field


def vertical_modes(nz: int, n: int) -> np.ndarray:
    """Neumann eigenmode e_n(z) = a_n cos(n pi z) sampled on the velocity levels."""
    if not 0 <= n <= nz:
        raise DomainError(f"mode index {n} outside [0, {nz}]")
    z = -1.0 + np.arange(nz + 1) / nz
    amp = 1.0 if n == 0 else math.sqrt(2.0)
    return amp * np.cos(n * math.pi * z)


@dataclass(frozen=True)
class Layout:
    """Column layout of one computational domain.

    ``kind`` is ``"mono"``, ``"minus"`` (interface on the right) or
    ``"plus"`` (interface on the left). ``x_nodes`` are the velocity
    columns, ``x_cells`` the surface cell centres.
    """

    kind: str
    ncols: int
    ncells: int
    x_nodes: np.ndarray = field(compare=False, repr=False)
    x_cells: np.ndarray = field(compare=False, repr=False)

    @property
    def left_cell_offset(self) -> int:
        # surface cell immediately left of velocity column i is i + offset
        return -1 if self.kind == "plus" else 0


def layout_for(kind: str, grid: GridSpec) -> Layout:
    nx, dx = grid.nx, grid.dx
    if kind == "mono":
        m = np.arange(-(nx - 1), nx)
        c = np.arange(-nx, nx)
    elif kind == "minus":
        m = np.arange(-(nx - 1), 1)
        c = np.arange(-nx, 0)
    elif kind == "plus":
        m = np.arange(0, nx)
        c = np.arange(0, nx)
    else:
        raise DomainError(f"unknown layout kind {kind!r}")
    return Layout(kind, m.size, c.size, m * dx, (c + 0.5) * dx)
