"""Finite-difference clamped plate on 2-D lattices and discrete Green-sign probes.

The operator is the 13-point square of the 5-point Laplacian, scaled by h^-4.
On rectangles the clamped conditions u = 0, d_nu u = 0 are imposed with the
boundary nodes set to zero and ghost values reflected, u(ghost) = u(mirror);
the matrix stays symmetric. Curved domains are rasterized: every node outside
the mask is zero, which imposes the clamped conditions to first order only.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .domains import Domain, Grid2D, Rectangle, UnitBall, build_grid
from .errors import ConvergenceError, DomainError, ResourceError

DENSE_LIMIT = 4096

STENCIL = (
    (0, 0, 20.0),
    (1, 0, -8.0), (-1, 0, -8.0), (0, 1, -8.0), (0, -1, -8.0),
    (1, 1, 2.0), (1, -1, 2.0), (-1, 1, 2.0), (-1, -1, 2.0),
    (2, 0, 1.0), (-2, 0, 1.0), (0, 2, 1.0), (0, -2, 1.0),
)


def apply_stencil(u: np.ndarray, h: float) -> np.ndarray:
    """h^-4 times the 13-point stencil; entries within two nodes of the array edge are 0."""
    out = np.zeros_like(u, dtype=float)
    nx, ny = u.shape
    core = (slice(2, nx - 2), slice(2, ny - 2))
    for di, dj, c in STENCIL:
        out[core] += c * u[2 + di:nx - 2 + di, 2 + dj:ny - 2 + dj]
    return out / h ** 4


@dataclass
class ClampedPlateMatrix:
    grid: Grid2D
    matrix: sp.csc_matrix
    index: np.ndarray  # lattice -> unknown number, -1 off the interior
    _lu: object = None

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    def factor(self):
        if self._lu is None:
            self._lu = spla.splu(self.matrix)
        return self._lu

    def to_field(self, vec) -> np.ndarray:
        out = np.zeros(self.grid.shape)
        out[self.grid.interior] = vec
        return out


def assemble(grid: Grid2D) -> ClampedPlateMatrix:
    mask = grid.interior
    idx = -np.ones(mask.shape, dtype=int)
    idx[mask] = np.arange(mask.sum())
    I, J = np.nonzero(mask)
    nx, ny = mask.shape
    reflect = isinstance(grid.domain, Rectangle)
    rows, cols, vals = [], [], []
    for di, dj, c in STENCIL:
        ii, jj = I + di, J + dj
        if reflect:
            # a ghost one step beyond the boundary line mirrors the node inside it
            ii = np.where(ii < 0, -ii, np.where(ii > nx - 1, 2 * (nx - 1) - ii, ii))
            jj = np.where(jj < 0, -jj, np.where(jj > ny - 1, 2 * (ny - 1) - jj, jj))
        ok = (ii >= 0) & (ii < nx) & (jj >= 0) & (jj < ny)
        k = np.full(I.size, -1)
        k[ok] = idx[ii[ok], jj[ok]]
        m = k >= 0
        rows.append(idx[I[m], J[m]])
        cols.append(k[m])
        vals.append(np.full(m.sum(), c))
    n = int(mask.sum())
    A = sp.csc_matrix((np.concatenate(vals) / grid.h ** 4,
                       (np.concatenate(rows), np.concatenate(cols))), shape=(n, n))
    A.sum_duplicates()
    return ClampedPlateMatrix(grid, A, idx)


def solve(m: ClampedPlateMatrix, rhs, method: str = "direct", maxiter: int | None = None):
    """Solve the clamped plate with load ``rhs`` (lattice array or interior vector)."""
    b = _interior_vector(m, rhs)
    bnorm = np.linalg.norm(b)
    if bnorm == 0.0:
        return m.to_field(np.zeros_like(b))
    if method == "direct":
        x = m.factor().solve(b)
        tol = 1e-10
    elif method == "cg":
        x, info = spla.cg(m.matrix, b, rtol=1e-10, maxiter=maxiter or 20 * m.size)
        tol = 1e-8
    else:
        raise ValueError(f"unknown method {method!r}")
    res = np.linalg.norm(m.matrix @ x - b) / bnorm
    if res > tol:
        raise ConvergenceError(f"{method} solve residual {res:.3e} exceeds {tol:g}",
                               history=[res])
    return m.to_field(x)


def discrete_green_column(m: ClampedPlateMatrix, y) -> np.ndarray:
    """G_h(., y): response to the discrete unit mass h^-2 at interior node ``y`` (lattice index)."""
    k = m.index[tuple(y)]
    if k < 0:
        raise DomainError(f"node {tuple(y)} is not interior")
    e = np.zeros(m.size)
    e[k] = 1.0 / m.grid.h ** 2
    return solve(m, e)


def dense_green(m: ClampedPlateMatrix) -> np.ndarray:
    """All columns of G_h as an (N, N) array over interior unknowns."""
    if m.size > DENSE_LIMIT:
        raise ResourceError(
            f"{m.size} unknowns exceed the dense budget of {DENSE_LIMIT}; use subsample mode")
    return m.factor().solve(np.eye(m.size)) / m.grid.h ** 2


@dataclass
class SignReport:
    min: float
    argmin_x: list
    argmin_y: list
    negative_fraction: float
    h: float
    mode: str
    seed: int | None
    domain: dict
    unknowns: int
    columns: int
    approximate_boundary: bool

    def to_dict(self):
        return asdict(self)


def sign_probe(domain: Domain, h: float, mode: str = "dense", seed: int = 0,
               columns: int = 256) -> SignReport:
    """Minimum and negative fraction of the discrete Green function over node pairs."""
    if isinstance(domain, UnitBall):
        return boggio_sign_probe(domain, seed=seed)
    grid = build_grid(domain, h)
    m = assemble(grid)
    pts = grid.interior_points()
    if mode == "dense":
        G = dense_green(m)
        cols = np.arange(m.size)
    elif mode == "subsample":
        rng = np.random.default_rng(seed)
        cols = np.sort(rng.choice(m.size, size=min(columns, m.size), replace=False))
        E = np.zeros((m.size, cols.size))
        E[cols, np.arange(cols.size)] = 1.0 / grid.h ** 2
        G = m.factor().solve(E)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    flat = int(np.argmin(G))
    i, jc = np.unravel_index(flat, G.shape)
    return SignReport(
        min=float(G[i, jc]),
        argmin_x=pts[i].tolist(),
        argmin_y=pts[cols[jc]].tolist(),
        negative_fraction=float(np.count_nonzero(G < 0) / G.size),
        h=float(h), mode=mode, seed=seed if mode == "subsample" else None,
        domain=domain.to_dict(), unknowns=m.size, columns=int(cols.size),
        approximate_boundary=grid.approximate_boundary,
    )


def boggio_sign_probe(domain: UnitBall, pairs: int = 10_000, seed: int = 0) -> SignReport:
    """Sign report for the ball from seeded Boggio samples (exact kernel, no grid)."""
    from .boggio import BoggioKernel
    from .sampling import uniform_ball

    rng = np.random.default_rng(seed)
    x = uniform_ball(rng, pairs, domain.n)
    y = uniform_ball(rng, pairs, domain.n)
    keep = np.linalg.norm(x - y, axis=1) >= 1e-6
    x, y = x[keep], y[keep]
    g = BoggioKernel(domain.n).green(x, y)
    k = int(np.argmin(g))
    return SignReport(
        min=float(g[k]), argmin_x=x[k].tolist(), argmin_y=y[k].tolist(),
        negative_fraction=float(np.count_nonzero(g <= 0) / g.size),
        h=0.0, mode="boggio", seed=seed, domain=domain.to_dict(),
        unknowns=0, columns=int(g.size), approximate_boundary=False,
    )


def _interior_vector(m, rhs):
    rhs = np.asarray(rhs, dtype=float)
    if rhs.shape == m.grid.shape:
        return rhs[m.grid.interior]
    if rhs.shape == (m.size,):
        return rhs
    raise ValueError(f"rhs shape {rhs.shape} matches neither the lattice nor the unknowns")
