"""First Dirichlet eigenpair of -Laplace, the weight a = phi1^2 and its bilaplacian.

phi1 is sup-normalized throughout (phi1 = 1 at its maximum), which keeps the
comparison constant c in  c*delta <= phi1 <= delta/c  comparable across grids.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.optimize import brentq
from scipy.special import gamma, jv

from .domains import Domain, Grid2D, UnitBall, build_grid
from .errors import (ConvergenceError, DomainError, HopfViolationError,
                     ResolutionError, SignIndefiniteError)
from .plate import apply_stencil

_TAYLOR_RADIUS = 0.05
_TAYLOR_TERMS = 30


def first_bessel_zero(nu: float) -> float:
    """First positive zero of J_nu, nu >= 0."""
    z = max(nu, 0.5)
    step = 0.05
    f0 = jv(nu, z)
    while True:
        z1 = z + step
        f1 = jv(nu, z1)
        if f0 * f1 < 0:
            return brentq(lambda t: jv(nu, t), z, z1, xtol=1e-15, rtol=1e-15)
        z, f0 = z1, f1


class BallEigenPair:
    """Analytic eigenpair of the unit ball in R^n.

    phi1(r) = Gamma(nu+1) (2/(j r))^nu J_nu(j r), nu = n/2 - 1, j the first zero
    of J_nu, lambda1 = j^2. Near the sphere phi1 is evaluated from its Taylor
    series about r = 1 (generated by the radial ODE) so that phi1/delta keeps
    full precision as delta -> 0.
    """

    def __init__(self, n: int = 2):
        self.n = int(n)
        self.nu = self.n / 2.0 - 1.0
        self.j = first_bessel_zero(self.nu)
        self.lam = self.j ** 2
        self._norm = gamma(self.nu + 1.0) * 2.0 ** self.nu
        self.slope = -self.j * self._norm * self.j ** (-self.nu) * jv(self.nu + 1.0, self.j)
        self._taylor = self._taylor_coefficients()

    def _taylor_coefficients(self):
        # (1+t) phi'' + (n-1) phi' + lam (1+t) phi = 0, t = r - 1.
        c = np.zeros(_TAYLOR_TERMS + 2)
        c[1] = self.slope
        for k in range(_TAYLOR_TERMS):
            prev = c[k - 1] if k >= 1 else 0.0
            c[k + 2] = -((k + 1) * k * c[k + 1] + (self.n - 1) * (k + 1) * c[k + 1]
                         + self.lam * (c[k] + prev)) / ((k + 2) * (k + 1))
        return c

    def phi_over_delta(self, delta):
        delta = np.asarray(delta, dtype=float)
        near = delta < _TAYLOR_RADIUS
        d = np.where(near, delta, 0.0)
        # phi(1 - d) / d = sum_{k>=1} c_k (-1)^k d^(k-1)
        coeffs = self._taylor[1:] * (-1.0) ** np.arange(1, len(self._taylor))
        series = np.zeros_like(d)
        for ck in coeffs[::-1]:
            series = series * d + ck
        with np.errstate(divide="ignore", invalid="ignore"):
            far = self._phi_direct(1.0 - delta) / delta
        return np.where(near, series, far)

    def phi(self, r=None, delta=None):
        if delta is None:
            delta = 1.0 - np.asarray(r, dtype=float)
        delta = np.asarray(delta, dtype=float)
        return delta * self.phi_over_delta(delta)

    def _phi_direct(self, r):
        z = self.j * np.asarray(r, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            val = self._norm * jv(self.nu, z) / z ** self.nu
        return np.where(z < 1e-8, 1.0 - z * z / (4 * (self.nu + 1)), val)

    def dphi(self, r):
        z = self.j * np.asarray(r, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            val = -self.j * self._norm * jv(self.nu + 1.0, z) / z ** self.nu
        return np.where(z < 1e-8, -self.j * z / (2 * (self.nu + 1)), val)

    def d2phi(self, r):
        r = np.asarray(r, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            val = -self.lam * self.phi(r) - (self.n - 1) * self.dphi(r) / r
        return np.where(r < 1e-8, -self.lam / self.n, val)

    def a(self, r=None, delta=None):
        return self.phi(r, delta) ** 2

    def a_over_delta2(self, delta):
        return self.phi_over_delta(delta) ** 2

    def boundary_d2a(self) -> float:
        """Second normal derivative of a = phi1^2 on the sphere, 2 (d_nu phi1)^2."""
        return 2.0 * self.slope ** 2


@dataclass
class GridEigenPair:
    grid: Grid2D
    lam: float
    phi: np.ndarray  # zero off the interior mask
    iterations: int
    residual: float

    @property
    def delta(self):
        return self.grid.delta


EigenPair = Union[BallEigenPair, GridEigenPair]


def dirichlet_laplacian(grid: Grid2D) -> sp.csc_matrix:
    """5-point -Laplace on the interior nodes, zero outside the mask."""
    mask = grid.interior
    idx = -np.ones(mask.shape, dtype=int)
    idx[mask] = np.arange(mask.sum())
    I, J = np.nonzero(mask)
    rows, cols, vals = [idx[I, J]], [idx[I, J]], [np.full(I.size, 4.0)]
    nx, ny = mask.shape
    for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
        ii, jj = I + di, J + dj
        ok = (ii >= 0) & (ii < nx) & (jj >= 0) & (jj < ny)
        k = np.full(I.size, -1)
        k[ok] = idx[ii[ok], jj[ok]]
        m = k >= 0
        rows.append(idx[I[m], J[m]])
        cols.append(k[m])
        vals.append(np.full(m.sum(), -1.0))
    n = int(mask.sum())
    return sp.csc_matrix((np.concatenate(vals) / grid.h ** 2,
                          (np.concatenate(rows), np.concatenate(cols))), shape=(n, n))


def inverse_power(L, tol=1e-10, residual_tol=1e-9, max_iter=2000, seed=0, start=None):
    """Smallest eigenpair of a sparse positive definite matrix by inverse iteration."""
    lu = spla.splu(sp.csc_matrix(L))
    rng = np.random.default_rng(seed)
    x = rng.random(L.shape[0]) + 0.5 if start is None else np.array(start, dtype=float)
    x /= np.linalg.norm(x)
    lam_old = np.inf
    for it in range(1, max_iter + 1):
        y = lu.solve(x)
        x = y / np.linalg.norm(y)
        Lx = L @ x
        lam = float(x @ Lx)
        res = float(np.linalg.norm(Lx - lam * x))
        if abs(lam - lam_old) < tol * abs(lam) and res <= residual_tol:
            return lam, x, it, res
        lam_old = lam
    raise ConvergenceError(f"inverse iteration did not converge in {max_iter} steps",
                           history=[lam])


def eigenpair(domain: Domain, h: float | None = None, seed: int = 0, tol: float = 1e-10):
    """First Dirichlet eigenpair: analytic for balls, 5-point FD on 2-D grids."""
    if isinstance(domain, UnitBall):
        return BallEigenPair(domain.n)
    h = h if h is not None else domain.h
    if h is None:
        raise DomainError("grid spacing h is required for finite-difference eigenpairs")
    grid = build_grid(domain, h)
    L = dirichlet_laplacian(grid)
    lam, x, its, res = inverse_power(L, tol=tol, seed=seed)
    if x.sum() < 0:
        x = -x
    if np.any(x <= 0):
        raise SignIndefiniteError("first eigenvector changes sign on the grid")
    x /= x.max()
    res = float(np.linalg.norm(L @ x - lam * x) / np.linalg.norm(x))
    phi = np.zeros(grid.shape)
    phi[grid.interior] = x
    return GridEigenPair(grid, lam, phi, its, res)


def radial_fd_eigenvalue(n: int, N: int = 400, seed: int = 0) -> float:
    """lambda1 of the ball from a cell-centred flux discretization of the radial operator."""
    h = 1.0 / N
    r = (np.arange(N) + 0.5) * h
    face = np.arange(N + 1) * h
    fp = face[1:] ** (n - 1)
    fm = face[:-1] ** (n - 1)
    w = r ** (n - 1)
    main = (fp + fm) / w
    main[-1] += fp[-1] / w[-1]  # ghost u_N = -u_{N-1}: zero value on the sphere
    upper = -fp[:-1] / w[:-1]
    lower = -fm[1:] / w[1:]
    L = sp.diags([lower, main, upper], [-1, 0, 1], format="csc") / h ** 2
    lam, *_ = inverse_power(L, seed=seed)
    return lam


def fi_constant(phi, delta, margin: float = 0.01, degenerate_tol: float = 1e-3) -> float:
    """Largest c with c*delta <= phi <= delta/c on the samples, shrunk by ``margin``."""
    phi = np.asarray(phi, dtype=float)
    delta = np.asarray(delta, dtype=float)
    ratio = phi / delta
    lo, hi = float(ratio.min()), float(ratio.max())
    if lo <= degenerate_tol * hi:
        raise HopfViolationError(
            f"phi1/delta degenerates (min {lo:.3e}, max {hi:.3e}); normal derivative vanishes")
    c = min(lo, 1.0 / hi) / (1.0 + margin)
    if not 0.0 < c < 1.0:
        raise HopfViolationError(f"comparison constant {c} outside (0, 1)")
    return c


def comparison_constant(e: EigenPair, n_samples: int = 2000, margin: float = 0.01) -> float:
    if isinstance(e, BallEigenPair):
        delta = np.concatenate([np.linspace(1e-6, 1.0, n_samples),
                                np.geomspace(1e-9, 1e-2, n_samples // 4)])
        return fi_constant(e.phi(delta=delta), delta, margin)
    mask = e.grid.interior
    return fi_constant(e.phi[mask], e.grid.delta[mask], margin)


@dataclass
class WeightData:
    """a = phi1^2 and f = Delta^2 a sampled on interior points."""

    points: np.ndarray
    delta: np.ndarray
    a: np.ndarray
    f: np.ndarray
    c_fi: float

    @property
    def sup_f(self) -> float:
        return float(np.max(np.abs(self.f)))


def bilaplacian_of_square(lam, phi, grad2, hess2):
    """Delta^2(phi^2) for an eigenfunction: 4 lam^2 phi^2 - 8 lam |grad phi|^2 + 4 |D^2 phi|^2."""
    return 4.0 * lam ** 2 * phi ** 2 - 8.0 * lam * grad2 + 4.0 * hess2


def load_f(e: EigenPair, n_samples: int = 2001, stencil_tol: float = 0.05) -> WeightData:
    if isinstance(e, BallEigenPair):
        r = np.linspace(0.0, 1.0, n_samples)
        p, dp, d2p = e.phi(r), e.dphi(r), e.d2phi(r)
        with np.errstate(divide="ignore", invalid="ignore"):
            tangential = np.where(r > 0, dp / r, d2p)
        hess2 = d2p ** 2 + (e.n - 1) * tangential ** 2
        f = bilaplacian_of_square(e.lam, p, dp ** 2, hess2)
        return WeightData(r, 1.0 - r, p ** 2, f, comparison_constant(e))
    grid, phi, h = e.grid, e.phi, e.grid.h
    px, py, pxx, pyy, pxy = grid_derivatives(phi, h)
    f_full = bilaplacian_of_square(e.lam, phi, px ** 2 + py ** 2,
                                   pxx ** 2 + pyy ** 2 + 2 * pxy ** 2)
    mask = grid.interior
    # cross-check against the 13-point stencil applied to a = phi^2 away from the edges
    far = _far_interior(mask)
    if far.any():
        direct = apply_stencil(phi ** 2, h)
        gap = np.max(np.abs(direct[far] - f_full[far]))
        if gap > stencil_tol * np.max(np.abs(f_full[mask])):
            raise ResolutionError(
                f"bilaplacian of phi1^2 disagrees with the 13-point stencil by {gap:.3e}; refine h")
    c = comparison_constant(e)
    pts = grid.interior_points()
    return WeightData(pts, grid.delta[mask], phi[mask] ** 2, f_full[mask], c)


def axis_only_load(e: GridEigenPair) -> np.ndarray:
    """2 lam^2 phi^2 + sum_i (8 phi_i phi_iii + 6 phi_ii^2), the expansion without
    mixed derivatives; kept to quantify how far it is from Delta^2(phi^2)."""
    phi, h = e.phi, e.grid.h
    px, py, pxx, pyy, _ = grid_derivatives(phi, h)
    pxxx = np.zeros_like(phi)
    pyyy = np.zeros_like(phi)
    pxxx[2:-2, :] = (phi[4:, :] - 2 * phi[3:-1, :] + 2 * phi[1:-3, :] - phi[:-4, :]) / (2 * h ** 3)
    pyyy[:, 2:-2] = (phi[:, 4:] - 2 * phi[:, 3:-1] + 2 * phi[:, 1:-3] - phi[:, :-4]) / (2 * h ** 3)
    return (2 * e.lam ** 2 * phi ** 2 + 8 * (px * pxxx + py * pyyy)
            + 6 * (pxx ** 2 + pyy ** 2))


def grid_derivatives(phi, h):
    p = np.pad(phi, 1)
    c = p[1:-1, 1:-1]
    px = (p[2:, 1:-1] - p[:-2, 1:-1]) / (2 * h)
    py = (p[1:-1, 2:] - p[1:-1, :-2]) / (2 * h)
    pxx = (p[2:, 1:-1] - 2 * c + p[:-2, 1:-1]) / h ** 2
    pyy = (p[1:-1, 2:] - 2 * c + p[1:-1, :-2]) / h ** 2
    pxy = (p[2:, 2:] - p[2:, :-2] - p[:-2, 2:] + p[:-2, :-2]) / (4 * h ** 2)
    return px, py, pxx, pyy, pxy


def _far_interior(mask):
    far = mask.copy()
    for di in range(-2, 3):
        for dj in range(-2, 3):
            if abs(di) + abs(dj) <= 2:
                far &= np.roll(np.roll(mask, di, 0), dj, 1)
    far[:2, :] = far[-2:, :] = False
    far[:, :2] = far[:, -2:] = False
    return far
