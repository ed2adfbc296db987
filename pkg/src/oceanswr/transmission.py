"""
Generalized transmission operators and the interface closures built on them.

Both subdomains share the velocity column at x = 0 and integrate the
momentum equations on half cells there. The outgoing x-flux through the
interface is eliminated with the incoming transmission datum, so the
boundary functionals are the only data exchanged. Records of the velocity
functionals live at half-integer times t_{k+1/2}, k = 0..nt-1 (array
column k holds the value at t_{k+1/2}); the surface functional of the plus
side lives on the integer levels k = 0..nt.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .core import DomainError, GridSpec, PhysicalParams, layout_for, trapezoid_weights

MATRIX_A = np.array([[1.0, -1.0], [1.0, 1.0]])
MATRIX_B = np.array([[1.0, -0.5], [-0.5, 0.0]])

SIDES = ("minus", "plus")


def _sign(side: str) -> float:
    if side == "minus":
        return -1.0
    if side == "plus":
        return 1.0
    raise DomainError(f"side must be 'minus' or 'plus', got {side!r}")


@dataclass(frozen=True)
class TransmissionParams:
    alpha: float
    beta: float

    def __post_init__(self):
        if not self.alpha > 0:
            raise DomainError(f"alpha must be > 0, got {self.alpha!r}")
        if not self.beta >= 0:
            raise DomainError(f"beta must be >= 0, got {self.beta!r}")

    @property
    def matrix_a(self) -> np.ndarray:
        return MATRIX_A.copy()

    @property
    def matrix_b(self) -> np.ndarray:
        return MATRIX_B.copy()

    @classmethod
    def taylor(cls, params: PhysicalParams, alpha_factor: float = 1.0, beta_factor: float = 1.0):
        """Coefficients read off the asymptotic expansion, optionally scaled."""
        return cls(alpha_factor * alpha_taylor(params), beta_factor * beta_taylor(params))

    def robin_coefficient(self, params: PhysicalParams) -> float:
        return self.alpha / math.sqrt(params.epsilon)


def alpha_taylor(params: PhysicalParams) -> float:
    return 1.0 / math.sqrt(2.0 * params.re)


def beta_taylor(params: PhysicalParams) -> float:
    if not params.u0 > 0:
        raise DomainError("the Taylor beta needs u0 > 0")
    return 1.0 / (2.0 * params.fr**2 * params.u0)


@dataclass
class TransmissionRecord:
    """Interface data consumed by one subdomain over the whole time window.

    ``b_u``/``b_v`` have shape (nz+1, nt); ``b_zeta`` has shape (nt+1,) and
    is present only for the plus side.
    """

    side: str
    b_u: np.ndarray
    b_v: np.ndarray
    b_zeta: np.ndarray | None = None

    def __post_init__(self):
        _sign(self.side)
        self.b_u = np.asarray(self.b_u, dtype=float)
        self.b_v = np.asarray(self.b_v, dtype=float)
        if self.b_u.shape != self.b_v.shape or self.b_u.ndim != 2:
            raise DomainError("b_u and b_v must be 2-D arrays of equal shape")
        if self.side == "plus":
            if self.b_zeta is None:
                raise DomainError("plus-side record requires b_zeta")
            self.b_zeta = np.asarray(self.b_zeta, dtype=float)
            if self.b_zeta.shape != (self.b_u.shape[1] + 1,):
                raise DomainError(f"b_zeta must have shape ({self.b_u.shape[1] + 1},), got {self.b_zeta.shape}")
        elif self.b_zeta is not None:
            raise DomainError("minus-side record must not carry b_zeta")
        if not self.is_finite():
            raise DomainError("record contains non-finite values")

    @property
    def nlev(self) -> int:
        return self.b_u.shape[0]

    @property
    def nt(self) -> int:
        return self.b_u.shape[1]

    def is_finite(self) -> bool:
        ok = np.isfinite(self.b_u).all() and np.isfinite(self.b_v).all()
        if self.b_zeta is not None:
            ok = ok and np.isfinite(self.b_zeta).all()
        return bool(ok)

    def check_grid(self, grid: GridSpec) -> None:
        if self.b_u.shape != (grid.nz + 1, grid.nt):
            raise DomainError(f"record shape {self.b_u.shape} does not match grid ({grid.nz + 1}, {grid.nt})")

    @classmethod
    def zeros(cls, side: str, grid: GridSpec) -> "TransmissionRecord":
        shape = (grid.nz + 1, grid.nt)
        bz = np.zeros(grid.nt + 1) if side == "plus" else None
        return cls(side, np.zeros(shape), np.zeros(shape), bz)

    def vector(self) -> np.ndarray:
        parts = [self.b_u.ravel(), self.b_v.ravel()]
        if self.b_zeta is not None:
            parts.append(self.b_zeta)
        return np.concatenate(parts)

    def to_csv(self, path) -> None:
        """Write rows (side, j, k, b_u, b_v, b_zeta); b_zeta is per k, empty for minus."""
        nlev, nt = self.b_u.shape
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["side", "j", "k", "b_u", "b_v", "b_zeta"])
            for k in range(nt + 1):
                bz = "" if self.b_zeta is None else f"{self.b_zeta[k]:.17g}"
                for j in range(nlev):
                    if k < nt:
                        w.writerow([self.side, j, k, f"{self.b_u[j, k]:.17g}", f"{self.b_v[j, k]:.17g}", bz])
                    elif self.b_zeta is not None and j == 0:
                        w.writerow([self.side, "", k, "", "", bz])

    @classmethod
    def from_csv(cls, path) -> "TransmissionRecord":
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        if not rows:
            raise DomainError(f"{path}: empty record file")
        side = rows[0]["side"]
        full = [r for r in rows if r["j"] != ""]
        nlev = max(int(r["j"]) for r in full) + 1
        nt = max(int(r["k"]) for r in full) + 1
        bu = np.zeros((nlev, nt))
        bv = np.zeros((nlev, nt))
        bz = np.zeros(nt + 1) if side == "plus" else None
        for r in rows:
            k = int(r["k"])
            if r["j"] != "":
                bu[int(r["j"]), k] = float(r["b_u"])
                bv[int(r["j"]), k] = float(r["b_v"])
            if bz is not None and r["b_zeta"] != "":
                bz[k] = float(r["b_zeta"])
        return cls(side, bu, bv, bz)


def b_operator_continuous(side, u_trace, du_dx_trace, mean_trace, zeta_trace, params: PhysicalParams,
                          tp: TransmissionParams):
    """Evaluate B_minus or B_plus on pointwise interface traces.

    Returns the 2-vector of the velocity functional; for the plus side a
    tuple ``(vector, u0*zeta + mean_u)``.
    """
    sgn = _sign(side)
    U = np.asarray(u_trace)
    dU = np.asarray(du_dx_trace)
    Ub = np.asarray(mean_trace)
    a = tp.robin_coefficient(params)
    out = (-sgn / params.re) * dU + (sgn * params.u0 / 2) * U + a * (MATRIX_A @ U) - sgn * tp.beta * (MATRIX_B @ Ub)
    if side == "plus":
        return out, params.u0 * zeta_trace + Ub[0]
    return out


def compute_b_zeta(zeta_last_cell, mean_u_interface, params: PhysicalParams):
    return params.u0 * zeta_last_cell + mean_u_interface


def update_transmission(previous_outgoing: TransmissionRecord, interface_u_trace, interface_v_trace,
                        tp: TransmissionParams, params: PhysicalParams, b_zeta=None) -> TransmissionRecord:
    """Record for the opposite subdomain: -previous + 2 (alpha/sqrt(eps)) A U.

    ``previous_outgoing`` is the record this subdomain consumed; the traces
    are its interface column over time levels 0..nt, shape (nz+1, nt+1),
    averaged to the half-integer record times. ``b_zeta`` is attached when
    the new record targets the plus side.
    """
    u = np.asarray(interface_u_trace, dtype=float)
    v = np.asarray(interface_v_trace, dtype=float)
    prev = previous_outgoing
    if u.shape != v.shape or u.shape != (prev.nlev, prev.nt + 1):
        raise DomainError(f"trace shape {u.shape} incompatible with record ({prev.nlev}, {prev.nt})")
    uh = 0.5 * (u[:, :-1] + u[:, 1:])
    vh = 0.5 * (v[:, :-1] + v[:, 1:])
    two_a = 2.0 * tp.robin_coefficient(params)
    new_u = -prev.b_u + two_a * (MATRIX_A[0, 0] * uh + MATRIX_A[0, 1] * vh)
    new_v = -prev.b_v + two_a * (MATRIX_A[1, 0] * uh + MATRIX_A[1, 1] * vh)
    target = "minus" if prev.side == "plus" else "plus"
    if target == "plus" and b_zeta is None:
        raise DomainError("a record for the plus side needs b_zeta")
    return TransmissionRecord(target, new_u, new_v, b_zeta if target == "plus" else None)


@dataclass
class InterfaceRows:
    """x-direction part of the momentum rows on the interface column.

    ``matrix`` has one row per interface unknown (u and v interleaved per
    level, 2*(nz+1) rows) and one column per unknown of the subdomain.
    ``rows`` gives the global row indices. The vertical diffusion and
    Coriolis parts are common with interior rows and added by the assembler.
    """

    side: str
    rows: np.ndarray
    matrix: sp.csr_matrix
    dx: float
    inv_fr2: float
    u0: float

    def forcing(self, record: TransmissionRecord | None, k: int, zeta_cell_avg: float = 0.0,
                b_zeta_avg: float = 0.0) -> np.ndarray:
        """Right-hand side contribution for the step t_k -> t_{k+1}.

        ``zeta_cell_avg`` is the time-averaged height of the first surface
        cell of the plus subdomain and ``b_zeta_avg`` the time-averaged
        incoming surface functional; both are ignored on the minus side.
        """
        out = np.zeros(self.rows.size)
        if record is not None:
            out[0::2] = (2.0 / self.dx) * record.b_u[:, k]
            out[1::2] = (2.0 / self.dx) * record.b_v[:, k]
        if self.side == "plus":
            # pressure at x=0 is (b_zeta - mean_u)/u0; the mean_u part sits in the matrix
            out[0::2] -= (2.0 / self.dx) * self.inv_fr2 * (zeta_cell_avg - b_zeta_avg / self.u0)
        return out


def interface_momentum_rows(side: str, tp: TransmissionParams, params: PhysicalParams,
                            grid: GridSpec) -> InterfaceRows:
    """Half-cell closure of the momentum equations at x = 0.

    Plus side (interface column i = 0), per level j, divided by dx/2:
        (2/dx) [ (u0/2) U_1 - (1/Re)(U_1 - U_0)/dx + a A U_0 - beta B Ubar_0
                 + (mean_u_0 / (Fr^2 u0), 0) - g_plus
                 + ((zeta_{1/2} - b_zeta/u0) / Fr^2, 0) ]
    Minus side (interface column i = nx-1):
        (2/dx) [ -(u0/2) U_{-1} + (1/Re)(U_0 - U_{-1})/dx + a A U_0
                 + beta B Ubar_0 - g_minus ]
    with a = alpha/sqrt(eps). The incoming g and the surface terms go to the
    right-hand side through ``forcing``.
    """
    sgn = _sign(side)
    lay = layout_for(side, grid)
    ncols, nlev = lay.ncols, grid.nz + 1
    N = 2 * ncols * nlev
    dx = grid.dx
    i0 = 0 if side == "plus" else ncols - 1
    nb = i0 + 1 if side == "plus" else i0 - 1
    a = tp.robin_coefficient(params)
    beta = tp.beta
    s2 = 2.0 / dx
    w = trapezoid_weights(grid.nz, grid.dz)
    inv_fr2_u0 = params.inv_fr2 / params.u0

    rows, cols, vals = [], [], []

    def add(r, c, v):
        if v != 0.0:
            rows.append(r)
            cols.append(c)
            vals.append(v)

    out_rows = np.empty(2 * nlev, dtype=int)
    for j in range(nlev):
        I0 = i0 + j * ncols
        Inb = nb + j * ncols
        for comp in range(2):
            r = 2 * I0 + comp
            out_rows[2 * j + comp] = r
            # advective half flux and one-sided diffusion flux
            add(r, 2 * Inb + comp, s2 * sgn * params.u0 / 2)
            add(r, 2 * Inb + comp, -s2 / (params.re * dx))
            add(r, 2 * I0 + comp, s2 / (params.re * dx))
            # a A U_0
            add(r, 2 * I0 + 0, s2 * a * MATRIX_A[comp, 0])
            add(r, 2 * I0 + 1, s2 * a * MATRIX_A[comp, 1])
            # -/+ beta B Ubar on the interface column (plus: -, minus: +)
            for jj in range(nlev):
                Ij = i0 + jj * ncols
                add(r, 2 * Ij + 0, -sgn * s2 * beta * MATRIX_B[comp, 0] * w[jj])
                add(r, 2 * Ij + 1, -sgn * s2 * beta * MATRIX_B[comp, 1] * w[jj])
                if side == "plus" and comp == 0:
                    add(r, 2 * Ij + 0, s2 * inv_fr2_u0 * w[jj])

    local = {g: n for n, g in enumerate(out_rows)}
    mat = sp.coo_matrix((vals, ([local[r] for r in rows], cols)), shape=(2 * nlev, N)).tocsr()
    mat.sum_duplicates()
    return InterfaceRows(side, out_rows, mat, dx, params.inv_fr2, params.u0)
