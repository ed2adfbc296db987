"""
Laplace-Fourier analysis of the interface problem.

Solutions of the transformed equations on a half line are sums of
exponentials e^{lambda x}; the admissible lambdas are roots of det M(lambda).
Baroclinic modes (n >= 1) give a quartic with closed-form roots, the
barotropic mode (n = 0) a quintic solved numerically. Side ``plus`` builds
its operator from the solutions living in the left subdomain (roots with
positive real part) and side ``minus`` from those of the right subdomain.

All square roots use the principal branch.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, replace

import numpy as np

from .core import DomainError, PhysicalParams

EPS_LADDER = (1e-2, 1e-3, 1e-4, 1e-5)
ROOT_BACKWARD_TOL = 1e-10


@dataclass(frozen=True)
class SymbolInput:
    s: complex
    eta: float
    n: int
    params: PhysicalParams

    def __post_init__(self):
        if not complex(self.s).real > 0:
            raise DomainError(f"Re(s) must be > 0, got {self.s!r}")
        if int(self.n) != self.n or self.n < 0:
            raise DomainError(f"mode index must be a non-negative integer, got {self.n!r}")
        if not math.isfinite(self.eta):
            raise DomainError("eta must be finite")

    @property
    def shift(self) -> complex:
        """s + i eta v0 + eta^2/Re + (n pi)^2/Re', the scalar part of the diagonal."""
        p = self.params
        mu2 = (self.n * math.pi) ** 2
        vert = mu2 / p.re_prime if mu2 else 0.0
        return complex(self.s) + 1j * self.eta * p.v0 + self.eta**2 / p.re + vert

    def with_epsilon(self, epsilon: float) -> "SymbolInput":
        return replace(self, params=replace(self.params, epsilon=epsilon))


@dataclass(frozen=True)
class SymbolMatrix:
    entries: np.ndarray
    side: str

    def __post_init__(self):
        if self.side not in ("minus", "plus"):
            raise DomainError(f"side must be 'minus' or 'plus', got {self.side!r}")
        e = np.asarray(self.entries, dtype=complex)
        if not np.isfinite(e).all():
            raise DomainError("symbol has non-finite entries")
        object.__setattr__(self, "entries", e)

    def __sub__(self, other: "SymbolMatrix") -> np.ndarray:
        return self.entries - other.entries

    def norm(self) -> float:
        return float(np.linalg.norm(self.entries, 2))


def _side_sign(side: str) -> float:
    if side == "plus":
        return 1.0
    if side == "minus":
        return -1.0
    raise DomainError(f"side must be 'minus' or 'plus', got {side!r}")


# --- baroclinic modes -------------------------------------------------------

ROTATION_EIGVECS = np.array([[1.0, 1.0], [-1j, 1j]])  # columns (1,-i), (1,i)


def baroclinic_matrix(lam: complex, inp: SymbolInput) -> np.ndarray:
    p = inp.params
    d = -lam * lam / p.re + p.u0 * lam + inp.shift
    return np.array([[d, -p.inv_eps], [p.inv_eps, d]], dtype=complex)


def baroclinic_discriminants(inp: SymbolInput) -> tuple[complex, complex]:
    """(Delta_+, Delta_-) with the +-i/eps rotation term."""
    p = inp.params
    base = p.u0**2 + (4.0 / p.re) * inp.shift
    rot = (4.0 / p.re) * 1j * p.inv_eps
    return base + rot, base - rot


def baroclinic_roots(inp: SymbolInput) -> dict:
    """Roots keyed ``(outer, inner)``: lambda = (Re/2)(u0 + outer*sqrt(Delta_inner)).

    Keys use +1/-1. The inner index selects the rotation sign and hence the
    eigenvector: (1, -i) for +1 and (1, i) for -1.
    """
    if inp.n < 1:
        raise DomainError("baroclinic modes need n >= 1")
    p = inp.params
    dp, dm = baroclinic_discriminants(inp)
    out = {}
    for inner, delta in ((1, dp), (-1, dm)):
        r = cmath.sqrt(delta)
        out[(1, inner)] = 0.5 * p.re * (p.u0 + r)
        out[(-1, inner)] = 0.5 * p.re * (p.u0 - r)
    return out


def _decaying_pair(inp: SymbolInput, side: str) -> np.ndarray:
    """Roots for the eigenvectors (1,-i), (1,i) of the solutions the side's operator must annihilate."""
    roots = baroclinic_roots(inp)
    want_positive = side == "plus"  # side plus is built from left-subdomain solutions
    pair = []
    for inner in (1, -1):
        cands = [roots[(1, inner)], roots[(-1, inner)]]
        picked = [c for c in cands if (c.real > 0) == want_positive]
        if len(picked) != 1:
            raise DomainError(f"root pair {cands} does not split by sign of the real part")
        pair.append(picked[0])
    return np.array(pair)


def baroclinic_symbol_exact(inp: SymbolInput, side: str, order=(0, 1)) -> SymbolMatrix:
    """-+(1/Re) Phi Lambda Phi^-1 +- u0 I from the admissible roots.

    ``order`` permutes the eigenpairs; the result does not depend on it.
    """
    sgn = _side_sign(side)
    lam = _decaying_pair(inp, side)
    idx = list(order)
    phi = ROTATION_EIGVECS[:, idx]
    if abs(np.linalg.det(phi)) < 1e-14:
        raise DomainError("degenerate eigenvector matrix")
    core = phi @ np.diag(lam[idx]) @ np.linalg.inv(phi)
    p = inp.params
    return SymbolMatrix(-sgn / p.re * core + sgn * p.u0 * np.eye(2), side)


def baroclinic_symbol_approx(side: str, params: PhysicalParams) -> SymbolMatrix:
    sgn = _side_sign(side)
    c = math.sqrt(2.0 / params.re) / math.sqrt(params.epsilon)
    d = sgn * params.u0 - c
    return SymbolMatrix(0.5 * np.array([[d, c], [-c, d]]), side)


# --- barotropic mode --------------------------------------------------------

def barotropic_matrix(lam: complex, inp: SymbolInput) -> np.ndarray:
    p = inp.params
    g = p.inv_fr2
    eta = inp.eta
    d = -lam * lam / p.re + p.u0 * lam + inp.shift
    r = complex(inp.s) + p.u0 * lam + 1j * eta * p.v0
    return np.array([
        [d, -p.inv_eps, lam * g],
        [p.inv_eps, d, 1j * eta * g],
        [lam, 1j * eta, r],
    ], dtype=complex)


def barotropic_det_direct(lam: complex, inp: SymbolInput) -> complex:
    """Cofactor expansion of det M_0 along the first row."""
    m = barotropic_matrix(lam, inp)
    return (m[0, 0] * (m[1, 1] * m[2, 2] - m[1, 2] * m[2, 1])
            - m[0, 1] * (m[1, 0] * m[2, 2] - m[1, 2] * m[2, 0])
            + m[0, 2] * (m[1, 0] * m[2, 1] - m[1, 1] * m[2, 0]))


def barotropic_det_coeffs(inp: SymbolInput) -> np.ndarray:
    """Coefficients [c5, ..., c0] of det M_0(lambda) = p^2 r + r/eps^2 + (p/Fr^2)(eta^2 - lambda^2).

    p = a2 lambda^2 + a1 lambda + a0 is the momentum diagonal and
    r = u0 lambda + r0 the transport entry.
    """
    if inp.n != 0:
        raise DomainError("the barotropic determinant is defined for n = 0")
    p = inp.params
    u0, g, f2, eta2 = p.u0, p.inv_fr2, p.inv_eps**2, inp.eta**2
    a2, a1, a0 = -1.0 / p.re, u0, inp.shift
    r0 = complex(inp.s) + 1j * inp.eta * p.v0
    return np.array([
        u0 * a2 * a2,
        r0 * a2 * a2 + 2 * u0 * a2 * a1 - g * a2,
        2 * r0 * a2 * a1 + u0 * (a1 * a1 + 2 * a2 * a0) - g * a1,
        r0 * (a1 * a1 + 2 * a2 * a0) + 2 * u0 * a1 * a0 + g * (eta2 * a2 - a0),
        2 * r0 * a1 * a0 + u0 * a0 * a0 + f2 * u0 + g * eta2 * a1,
        r0 * a0 * a0 + f2 * r0 + g * eta2 * a0,
    ], dtype=complex)


def backward_error(coeffs, roots) -> np.ndarray:
    """|p(r)| / sum_k |c_k| |r|^k for each root (normwise backward error)."""
    c = np.asarray(coeffs, dtype=complex)
    r = np.asarray(roots, dtype=complex)
    num = np.abs(np.polyval(c, r))
    den = np.polyval(np.abs(c), np.abs(r))
    return num / den


def _newton_polish(c: np.ndarray, r: complex, steps: int = 3) -> complex:
    dc = np.polyder(c)
    for _ in range(steps):
        d = np.polyval(dc, r)
        if d == 0:
            break
        nr = r - np.polyval(c, r) / d
        if not np.isfinite(nr) or abs(np.polyval(c, nr)) >= abs(np.polyval(c, r)):
            break
        r = nr
    return r


def polyroots(coeffs, tol: float = ROOT_BACKWARD_TOL) -> np.ndarray:
    """All roots of sum c_k x^(deg-k), highest degree first.

    Companion-matrix eigenvalues, Newton-polished when that lowers the
    residual; raises if any root misses the backward-error bound.
    """
    c = np.atleast_1d(np.asarray(coeffs, dtype=complex))
    if c.size < 2:
        raise DomainError("need a polynomial of degree >= 1")
    scale = np.abs(c).max()
    if scale == 0 or abs(c[0]) <= 1e-14 * scale:
        raise DomainError("leading coefficient is zero or negligible")
    roots = np.roots(c)
    roots = np.array([_newton_polish(c, r) for r in roots])
    be = backward_error(c, roots)
    if not (be <= tol).all():
        raise DomainError(f"root backward error {be.max():.3e} exceeds {tol:g}")
    return roots


def barotropic_roots(inp: SymbolInput) -> np.ndarray:
    return polyroots(barotropic_det_coeffs(inp))


def barotropic_roots_asymptotic(inp: SymbolInput) -> dict:
    """Leading-order roots keyed ``"0"`` and ``(outer, inner)`` with outer, inner in {+1, -1}.

    lambda_0 = -(s + i eta v0)/u0;
    lambda^{outer}_{inner} = outer*sqrt(inner*i*Re)/sqrt(eps) + Re u0/2 - Re/(4 Fr^2 u0).
    """
    p = inp.params
    shift = p.re * p.u0 / 2 - p.re * p.inv_fr2 / (4 * p.u0)
    out = {"0": -(complex(inp.s) + 1j * inp.eta * p.v0) / p.u0}
    for inner in (1, -1):
        root = cmath.sqrt(inner * 1j * p.re) / math.sqrt(p.epsilon)
        for outer in (1, -1):
            out[(outer, inner)] = outer * root + shift
    return out


def match_roots(numeric, targets) -> np.ndarray:
    """For each target the nearest numeric root (greedy, each root used once)."""
    pool = list(np.asarray(numeric, dtype=complex))
    out = []
    for t in targets:
        k = int(np.argmin([abs(r - t) for r in pool]))
        out.append(pool.pop(k))
    return np.array(out)


def null_vector(m: np.ndarray) -> np.ndarray:
    """Unit right singular vector of the smallest singular value."""
    _, _, vh = np.linalg.svd(m)
    return vh[-1].conj()


def barotropic_symbol_exact(inp: SymbolInput) -> SymbolMatrix:
    """Numeric exact symbol of side ``minus`` (2x3), from the three right-subdomain solutions.

    First two rows of (1/Re) Phi Lambda Phi^-1 minus [[u0, 0, -1/Re], [0, u0, 0]];
    the columns of Phi are null vectors of M_0 at the roots with negative real part.
    """
    p = inp.params
    roots = barotropic_roots(inp)
    lam = roots[roots.real < 0]
    if lam.size != 3:
        raise DomainError(f"expected 3 roots with negative real part, got {lam.size}")
    phi = np.column_stack([null_vector(barotropic_matrix(l, inp)) for l in lam])
    core = phi @ np.diag(lam) @ np.linalg.inv(phi)
    corr = np.array([[p.u0, 0, -1.0 / p.re], [0, p.u0, 0]])
    return SymbolMatrix(core[:2, :] / p.re - corr, "minus")


def barotropic_symbol_approx(side: str, params: PhysicalParams) -> SymbolMatrix:
    """Constant approximations: 2x3 on side ``minus``, 3x2 on side ``plus``."""
    c = math.sqrt(2.0) / math.sqrt(params.re * params.epsilon)
    u0, g = params.u0, params.inv_fr2
    if side == "minus":
        e = 0.5 * np.array([
            [-c - u0 - g / u0, c + g / (2 * u0), -2 * g],
            [-c + g / (2 * u0), -c - u0, 0.0],
        ])
    elif side == "plus":
        e = 0.5 * np.array([
            [-c + u0 - g / u0, c - g / (2 * u0)],
            [-c - g / (2 * u0), -c + u0],
            [0.0, 0.0],
        ])
    else:
        raise DomainError(f"side must be 'minus' or 'plus', got {side!r}")
    return SymbolMatrix(e, side)


def barotropic_correction(side: str, params: PhysicalParams) -> np.ndarray:
    """Difference between the velocity block of the barotropic and the baroclinic approximation."""
    sgn = _side_sign(side)
    q = params.inv_fr2 / params.u0
    return np.array([[-q / 2, -sgn * q / 4], [-sgn * q / 4, 0.0]])


# --- slope fits -------------------------------------------------------------

def loglog_slope(x, y) -> float:
    """Least-squares slope of log10(y) against log10(x)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.size < 2:
        raise DomainError("need at least two matched samples")
    if (x <= 0).any() or (y <= 0).any():
        raise DomainError("log-log fit needs positive samples")
    return float(np.polyfit(np.log10(x), np.log10(y), 1)[0])


def symbol_gap_series(inp: SymbolInput, side: str = "plus", eps_values=EPS_LADDER) -> np.ndarray:
    """Spectral-norm gap between exact and approximate baroclinic symbols per epsilon."""
    out = []
    for e in eps_values:
        q = inp.with_epsilon(e)
        out.append(np.linalg.norm(baroclinic_symbol_exact(q, side) - baroclinic_symbol_approx(side, q.params), 2))
    return np.array(out)


def root_gap_series(inp: SymbolInput, eps_values=EPS_LADDER) -> dict:
    """|numeric - asymptotic| per epsilon for every barotropic root, keyed as the asymptotics."""
    keys = ["0", (1, 1), (1, -1), (-1, 1), (-1, -1)]
    out = {k: [] for k in keys}
    for e in eps_values:
        q = inp.with_epsilon(e)
        asym = barotropic_roots_asymptotic(q)
        num = match_roots(barotropic_roots(q), [asym[k] for k in keys])
        for k, r in zip(keys, num):
            out[k].append(abs(r - asym[k]))
    return {k: np.array(v) for k, v in out.items()}
