"""Fixed-point solver for Delta^2 u = u^-alpha on the unit ball with clamped conditions.

The unknown is written u = a v with a = phi1^2, which turns the integral
equation u = int G u^-alpha into

    v(x) = int K(x, y) v(y)^-alpha dy,   K(x, y) = G(x, y) / (a(x) a(y)^alpha).

K has positive mass bounded above and below by a constant M. With the
truncation g_eps(t) = max(t, eps)^-alpha and eps^(1 - alpha^2) <= M^(-1-alpha),
the order interval [v1, v2] = [M^(-1-alpha) eps^(alpha^2), M eps^-alpha] is
invariant under T_eps(v) = int K g_eps(v), and v1 >= eps, so the truncation is
inactive at any fixed point. The fixed point is found by damped Picard
iteration, with bracket membership asserted at every step.

For radially symmetric data the y-integral reduces to one dimension with the
closed-form sphere integral H(r, s) of the Green function, discretized by a
Nystrom rule on Gauss panels graded geometrically towards the sphere.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.special import roots_jacobi, roots_legendre

from .boggio import radial_green, radial_green_boundary_d2
from .errors import (AccuracyError, BracketViolationError, ConvergenceError, DomainError,
                     KernelPositivityError)
from .sampling import stratified_depths
from .spectral import BallEigenPair

MASS_SAFETY = 1.05


@dataclass(frozen=True)
class SolverConfig:
    alpha: float
    dimension: int = 2
    n_nodes: int = 512
    panel_order: int = 8
    epsilon: float | None = None
    damping: float | None = None
    max_iter: int = 2000
    tol: float = 1e-12
    mass_samples: int = 200
    residual_samples: int = 50
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise DomainError(f"alpha out of range (0,1): {self.alpha}")
        if self.damping is not None and not 0.0 < self.damping <= 1.0:
            raise DomainError(f"damping must lie in (0, 1], got {self.damping}")
        if self.epsilon is not None and not 0.0 < self.epsilon < 1.0:
            raise DomainError(f"epsilon must lie in (0, 1), got {self.epsilon}")
        if self.n_nodes % self.panel_order or self.n_nodes // self.panel_order < 8:
            raise DomainError("n_nodes must be a multiple of panel_order with >= 8 panels")
        if self.dimension < 2:
            raise DomainError("dimension must be >= 2")

    @property
    def theta(self) -> float:
        # 1/(1+alpha) cancels the linearized reflection -alpha of T at a fixed point
        return self.damping if self.damping is not None else 1.0 / (1.0 + self.alpha)

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, data):
        known = {k: data[k] for k in cls.__dataclass_fields__ if k in data}
        if "alpha" not in known:
            raise DomainError("config is missing alpha")
        return cls(**known)


# ---------------------------------------------------------------------------
# radial quadrature

@dataclass
class RadialMesh:
    """Gauss panels on [0, 1]; ``delta`` = 1 - r is stored exactly.

    Panels are uniform in r on [0, 1/2], geometric in delta on [delta_min, 1/2],
    and the final panel [0, delta_min] carries a Gauss-Jacobi rule for the
    weight delta^(2 - 2 alpha), the boundary behaviour of G(x, y) a(y)^-alpha.
    """

    breaks: np.ndarray  # panel endpoints in delta, decreasing
    delta: np.ndarray
    weights: np.ndarray
    panel: np.ndarray
    order: int
    edge_exponent: float | None

    @property
    def r(self):
        return 1.0 - self.delta

    @property
    def size(self):
        return self.delta.size

    @property
    def delta_min(self):
        return float(self.breaks[-2])


def radial_mesh(n_nodes: int, order: int = 8, alpha: float | None = None) -> RadialMesh:
    n_panels = n_nodes // order
    n_bulk = n_panels // 4
    n_geom = n_panels - n_bulk - 1
    delta_min = 0.05 / n_nodes ** 2
    bulk = 1.0 - np.linspace(0.0, 0.5, n_bulk + 1)
    geom = np.geomspace(0.5, delta_min, n_geom + 1)
    breaks = np.concatenate([bulk, geom[1:], [0.0]])
    t, w = roots_legendre(order)
    deltas, weights, panels = [], [], []
    for k in range(n_panels - 1):
        hi, lo = breaks[k], breaks[k + 1]
        deltas.append(hi - 0.5 * (hi - lo) * (t + 1.0))
        weights.append(0.5 * (hi - lo) * w)
        panels.append(np.full(order, k))
    beta = None if alpha is None else 2.0 - 2.0 * alpha
    if beta is None:
        tj, wj = t, w
        last_d = 0.5 * delta_min * (tj + 1.0)
        last_w = 0.5 * delta_min * wj
    else:
        tj, wj = roots_jacobi(order, 0.0, beta)
        last_d = 0.5 * delta_min * (tj + 1.0)
        last_w = wj * (0.5 * delta_min) ** (beta + 1.0) / last_d ** beta
    order_idx = np.argsort(-last_d)
    deltas.append(last_d[order_idx])
    weights.append(last_w[order_idx])
    panels.append(np.full(order, n_panels - 1))
    return RadialMesh(breaks, np.concatenate(deltas), np.concatenate(weights),
                      np.concatenate(panels), order, beta)


# ---------------------------------------------------------------------------
# kernels

@dataclass
class NystromSystem:
    """Discrete form of T: ``T(v) = kernel_matrix @ g(v)``.

    ``green_matrix @ u^-alpha`` applies the solution operator u -> int G u^-alpha
    at the nodes; ``a`` is the weight at the nodes.
    """

    kernel_matrix: np.ndarray
    green_matrix: np.ndarray
    a: np.ndarray
    mesh: RadialMesh | None = None

    @property
    def size(self):
        return self.a.size

    def masses(self):
        return self.kernel_matrix.sum(axis=1)

    def apply_T(self, v, eps, alpha):
        return self.kernel_matrix @ g_eps(v, eps, alpha)

    def apply_solution_operator(self, u, alpha):
        return self.green_matrix @ np.power(u, -alpha)


@dataclass
class RadialKernel:
    """K(r, s) = H(r, s) / (a(r) a(s)^alpha) on the unit ball in R^n."""

    n: int
    alpha: float
    eig: BallEigenPair = field(default=None)

    def __post_init__(self):
        if self.eig is None:
            self.eig = BallEigenPair(self.n)

    def __call__(self, r=None, s=None, dr=None, ds=None):
        dr = 1.0 - np.asarray(r, dtype=float) if dr is None else np.asarray(dr, dtype=float)
        ds = 1.0 - np.asarray(s, dtype=float) if ds is None else np.asarray(ds, dtype=float)
        if np.any(dr <= 0):
            raise DomainError("interior kernel needs delta(x) > 0; use boundary_value on the sphere")
        H = radial_green(self.n, 1.0 - dr, 1.0 - ds, dr, ds)
        return H / (self.eig.a(delta=dr) * self.eig.a(delta=ds) ** self.alpha)

    def boundary_value(self, s):
        """Limit of K(r, s) as r -> 1: ratio of second normal derivatives."""
        s = np.asarray(s, dtype=float)
        return radial_green_boundary_d2(self.n, s) / (
            self.eig.boundary_d2a() * self.eig.a(r=s) ** self.alpha)

    def mesh(self, quad: int, order: int = 8) -> RadialMesh:
        return radial_mesh(quad, order, self.alpha)

    def rows(self, dr, mesh: RadialMesh):
        """Quadrature-weighted rows K(r, s_j) W_j."""
        dr = np.atleast_1d(np.asarray(dr, dtype=float))
        return self(dr=dr[:, None], ds=mesh.delta[None, :]) * mesh.weights[None, :]

    def mass(self, x, quad: int = 512, rel_tol: float = 1e-6):
        """int K(x, y) dy at points (or radii) x, checked against a doubled rule."""
        dr = self._depth(x)
        coarse = self.rows(dr, self.mesh(quad)).sum(axis=1)
        fine = self.rows(dr, self.mesh(2 * quad)).sum(axis=1)
        err = np.max(np.abs(fine - coarse) / np.abs(fine))
        if err > rel_tol:
            raise AccuracyError(f"kernel mass changed by {err:.2e} under doubling (> {rel_tol:g})")
        return fine if np.ndim(x) and np.size(fine) > 1 else float(fine[0])

    def system(self, quad: int = 512, order: int = 8) -> NystromSystem:
        mesh = self.mesh(quad, order)
        Kmat = self.rows(mesh.delta, mesh)
        H = radial_green(self.n, mesh.r[:, None], mesh.r[None, :],
                         mesh.delta[:, None], mesh.delta[None, :])
        return NystromSystem(Kmat, H * mesh.weights[None, :], self.eig.a(delta=mesh.delta), mesh)

    def _depth(self, x):
        x = np.asarray(x, dtype=float)
        if x.ndim >= 1 and x.shape[-1] == self.n and x.ndim == 2:
            r = np.linalg.norm(x, axis=-1)
        elif x.ndim == 1 and x.size == self.n and self.n > 1 and x.size != 1:
            r = np.array([np.linalg.norm(x)])
        else:
            r = np.atleast_1d(x)
        if np.any(r >= 1.0) or np.any(r < 0):
            raise DomainError("mass points must be interior")
        return 1.0 - r


@dataclass
class ConstantKernel:
    """K = c on a domain of the given measure; fixed point v = (c*measure)^(1/(1+alpha))."""

    c: float
    measure: float = 1.0
    n_nodes: int = 16

    def mass(self, x=None, quad=None):
        return self.c * self.measure

    def system(self, quad=None, order=None) -> NystromSystem:
        n = self.n_nodes
        w = np.full(n, self.measure / n)
        K = np.full((n, n), self.c) * w[None, :]
        return NystromSystem(K, K.copy(), np.ones(n))


def kernel_mass(k, x, quad: int = 512):
    return k.mass(x, quad)


def estimate_M(k, sample, quad: int = 512, safety: float = MASS_SAFETY) -> float:
    masses = np.atleast_1d(np.asarray([k.mass(x, quad) for x in sample]
                                      if not isinstance(k, RadialKernel)
                                      else k.mass(np.asarray(sample), quad), dtype=float))
    lo, hi = float(masses.min()), float(masses.max())
    if lo <= 0.0:
        raise KernelPositivityError(f"kernel mass {lo:.3e} <= 0: Green function not positive")
    M = max(hi, 1.0 / lo) * safety
    if not M > 1.0:
        raise KernelPositivityError(f"mass constant {M} must exceed 1")
    return M


def choose_epsilon(M: float, alpha: float) -> float:
    """Equality case of eps^(1 - alpha^2) <= M^(-1-alpha), i.e. eps = M^(-1/(1-alpha))."""
    if not M > 1.0:
        raise DomainError("M must exceed 1")
    if not 0.0 < alpha < 1.0:
        raise DomainError("alpha out of range (0,1)")
    eps = M ** (-1.0 / (1.0 - alpha))
    return min(eps, math.nextafter(1.0, 0.0))


def g_eps(t, eps, alpha):
    """eps^-alpha below eps, t^-alpha above."""
    t = np.asarray(t, dtype=float)
    out = np.power(np.maximum(t, eps), -alpha)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class Bracket:
    v1: float
    v2: float
    M: float
    eps: float
    alpha: float

    @classmethod
    def from_mass(cls, M, alpha, eps=None):
        eps = choose_epsilon(M, alpha) if eps is None else float(eps)
        b = cls(M ** (-1 - alpha) * eps ** (alpha ** 2), M * eps ** (-alpha), M, eps, alpha)
        b.validate()
        return b

    def validate(self):
        if self.eps ** (1 - self.alpha ** 2) > self.M ** (-1 - self.alpha) * (1 + 1e-12):
            raise BracketViolationError(
                f"eps = {self.eps:.6g} violates eps^(1-alpha^2) <= M^(-1-alpha) for M = {self.M:.6g}")
        if not self.eps * (1 - 1e-12) <= self.v1 <= self.v2:
            raise BracketViolationError("bracket must satisfy eps <= v1 <= v2")

    @property
    def midpoint(self):
        return math.sqrt(self.v1 * self.v2)


@dataclass
class IterationResult:
    v: np.ndarray
    iterations: int
    converged: bool
    step_history: list
    bracket_trace: list  # (min, max) of every iterate, starting point included
    sup_trace: list
    theta: float


def iterate_T(system: NystromSystem, bracket: Bracket, cfg: SolverConfig, v0=None,
              check_bracket: bool = True) -> IterationResult:
    alpha, eps, theta = bracket.alpha, bracket.eps, cfg.theta
    v = np.full(system.size, bracket.midpoint) if v0 is None else \
        np.broadcast_to(np.asarray(v0, dtype=float), (system.size,)).copy()
    slack = 1e-12 * bracket.v2
    steps, trace, sups = [], [(float(v.min()), float(v.max()))], [float(v.max())]
    for k in range(1, cfg.max_iter + 1):
        new = (1.0 - theta) * v + theta * system.apply_T(v, eps, alpha)
        lo, hi = float(new.min()), float(new.max())
        trace.append((lo, hi))
        sups.append(hi)
        if check_bracket and (lo < bracket.v1 - slack or hi > bracket.v2 + slack):
            raise BracketViolationError(
                f"iterate {k} left [v1, v2] = [{bracket.v1:.6g}, {bracket.v2:.6g}]: "
                f"range [{lo:.6g}, {hi:.6g}]")
        step = float(np.max(np.abs(new - v)) / np.max(np.abs(v)))
        steps.append(step)
        v = new
        if step <= cfg.tol:
            if check_bracket and v.min() < eps:
                raise BracketViolationError(
                    f"fixed point min {v.min():.6g} < eps = {eps:.6g}: truncation active")
            return IterationResult(v, k, True, steps, trace, sups, theta)
    raise ConvergenceError(
        f"no convergence in {cfg.max_iter} iterations (last step {steps[-1]:.3e})", history=steps)


def assemble_u(v, a):
    return np.asarray(a) * np.asarray(v)


# ---------------------------------------------------------------------------
# continuous extension of a nodal solution

class RadialSolution:
    """Nodal fixed point plus an accurate evaluator of w(x) = int G(x, y) u(y)^-alpha dy.

    Off the nodes, v is interpolated panel-wise; w is integrated with the panel
    containing the target split in two so the kink of H(r, .) at s = r sits on
    a panel edge.
    """

    def __init__(self, kernel: RadialKernel, system: NystromSystem, v):
        self.kernel = kernel
        self.system = system
        self.mesh = system.mesh
        self.v = np.asarray(v, dtype=float)
        self.u = assemble_u(self.v, system.a)
        self.alpha = kernel.alpha

    @property
    def r(self):
        return self.mesh.r

    @property
    def delta(self):
        return self.mesh.delta

    def v_at(self, delta):
        delta = np.atleast_1d(np.asarray(delta, dtype=float))
        out = np.empty_like(delta)
        pid = self._panel_of(delta)
        for p in np.unique(pid):
            sel = pid == p
            nodes = self.mesh.panel == p
            out[sel] = _lagrange(self.mesh.delta[nodes], self.v[nodes], delta[sel])
        return out

    def u_at(self, delta):
        delta = np.atleast_1d(np.asarray(delta, dtype=float))
        return self.kernel.eig.a(delta=delta) * self.v_at(delta)

    def w_at(self, delta):
        """int H(r, s) u(s)^-alpha ds at r = 1 - delta."""
        delta = np.atleast_1d(np.asarray(delta, dtype=float))
        mesh, n = self.mesh, self.kernel.n
        load = self.u ** (-self.alpha)
        H = radial_green(n, 1.0 - delta[:, None], mesh.r[None, :], delta[:, None], mesh.delta[None, :])
        total = (H * mesh.weights * load).sum(axis=1)
        last = mesh.breaks.size - 2
        pid = self._panel_of(delta)
        t, w = roots_legendre(2 * mesh.order)
        for i, p in enumerate(pid):
            if p == last:
                continue
            nodes = mesh.panel == p
            total[i] -= (H[i, nodes] * mesh.weights[nodes] * load[nodes]).sum()
            hi, lo = mesh.breaks[p], mesh.breaks[p + 1]
            for a_, b_ in ((hi, delta[i]), (delta[i], lo)):
                if a_ == b_:
                    continue
                sd = a_ - 0.5 * (a_ - b_) * (t + 1.0)
                sw = 0.5 * (a_ - b_) * w
                vs = _lagrange(mesh.delta[nodes], self.v[nodes], sd)
                f = (self.kernel.eig.a(delta=sd) * vs) ** (-self.alpha)
                Hs = radial_green(n, 1.0 - delta[i], 1.0 - sd, delta[i], sd)
                total[i] += np.sum(Hs * sw * f)
        return total

    def residual(self, delta):
        """sup |u - int G u^-alpha| / sup |u| over the given depths."""
        u = self.u_at(delta)
        w = self.w_at(delta)
        return float(np.max(np.abs(u - w)) / np.max(np.abs(u)))

    def _panel_of(self, delta):
        b = self.mesh.breaks
        # breaks decrease; panel p covers [b[p+1], b[p]]
        p = np.searchsorted(-b, -np.asarray(delta), side="right") - 1
        return np.clip(p, 0, b.size - 2)


def _lagrange(xn, yn, x):
    """Barycentric interpolation through (xn, yn)."""
    xn = np.asarray(xn)
    diff = xn[:, None] - xn[None, :]
    np.fill_diagonal(diff, 1.0)
    wb = 1.0 / diff.prod(axis=1)
    x = np.atleast_1d(x)
    d = x[:, None] - xn[None, :]
    exact = d == 0
    d[exact] = 1.0
    terms = wb / d
    out = (terms * yn).sum(axis=1) / terms.sum(axis=1)
    hit = exact.any(axis=1)
    if hit.any():
        out[hit] = yn[np.argmax(exact[hit], axis=1)]
    return out


# ---------------------------------------------------------------------------
# uniqueness

@dataclass
class UniquenessCertificate:
    a_star: float
    a_after: float | None
    bound: float | None
    holds: bool | None
    exponent: float | None


def uniqueness_certificate(u1, u2, operator=None, alpha=None, tol=1e-9) -> UniquenessCertificate:
    """A* = smallest A >= 1 with A u1 >= u2 and A u2 >= u1 on the samples.

    With ``operator`` (u -> int G u^-alpha), applies it twice to both fields:
    order reversal and -alpha homogeneity give ratio bound A*^(alpha^2).
    """
    u1 = np.asarray(u1, dtype=float)
    u2 = np.asarray(u2, dtype=float)
    if np.any(u1 <= 0) or np.any(u2 <= 0):
        raise DomainError("uniqueness certificate needs positive fields")
    a_star = max(1.0, float(np.max(u2 / u1)), float(np.max(u1 / u2)))
    if operator is None:
        return UniquenessCertificate(a_star, None, None, None, None)
    w1, w2 = operator(operator(u1)), operator(operator(u2))
    a_after = max(1.0, float(np.max(w2 / w1)), float(np.max(w1 / w2)))
    bound = a_star ** (alpha ** 2)
    exponent = math.log(a_after) / math.log(a_star) if a_star > 1.0 else None
    return UniquenessCertificate(a_star, a_after, bound, a_after <= bound + tol, exponent)


# ---------------------------------------------------------------------------
# full solve

@dataclass
class SolveReport:
    config: dict
    n: int
    M: float
    epsilon: float
    v1: float
    v2: float
    theta: float
    iterations: int
    converged: bool
    step_history: list
    bracket_trace: list
    integral_residual: float | None
    min_v: float
    u_center: float
    c1: float | None = None
    c2: float | None = None
    uniqueness_a_star: float | None = None
    r: np.ndarray = field(default=None, repr=False)
    delta: np.ndarray = field(default=None, repr=False)
    u: np.ndarray = field(default=None, repr=False)
    v: np.ndarray = field(default=None, repr=False)
    solution: RadialSolution = field(default=None, repr=False)

    def to_dict(self):
        skip = {"r", "delta", "u", "v", "solution"}
        return {k: getattr(self, k) for k in self.__dataclass_fields__ if k not in skip}


def prepare(cfg: SolverConfig):
    """Kernel, mass constant, bracket and discrete system for a configuration."""
    kernel = RadialKernel(cfg.dimension, cfg.alpha)
    radii = 1.0 - stratified_depths(cfg.mass_samples, seed=cfg.seed)
    M = estimate_M(kernel, radii, quad=cfg.n_nodes)
    bracket = Bracket.from_mass(M, cfg.alpha, cfg.epsilon)
    system = kernel.system(cfg.n_nodes, cfg.panel_order)
    return kernel, bracket, system


def solve(cfg: SolverConfig, uniqueness: bool = False, band=(0.0, 0.1)) -> SolveReport:
    kernel, bracket, system = prepare(cfg)
    run = iterate_T(system, bracket, cfg)
    sol = RadialSolution(kernel, system, run.v)
    samples = stratified_depths(cfg.residual_samples, seed=cfg.seed + 1, delta_min=1e-4)
    residual = sol.residual(samples)
    in_band = (sol.delta > band[0]) & (sol.delta < band[1])
    ratio = sol.u[in_band] / sol.delta[in_band] ** 2
    a_star = None
    if uniqueness:
        lo = iterate_T(system, bracket, cfg, v0=bracket.v1)
        hi = iterate_T(system, bracket, cfg, v0=bracket.v2)
        a_star = uniqueness_certificate(assemble_u(lo.v, system.a),
                                        assemble_u(hi.v, system.a)).a_star
    order = np.argsort(sol.r)
    return SolveReport(
        config=cfg.to_dict(), n=cfg.dimension, M=bracket.M, epsilon=bracket.eps,
        v1=bracket.v1, v2=bracket.v2, theta=run.theta, iterations=run.iterations,
        converged=run.converged, step_history=run.step_history,
        bracket_trace=[list(t) for t in run.bracket_trace], integral_residual=residual,
        min_v=float(run.v.min()), u_center=float(sol.u_at(1.0)[0]),
        c1=float(ratio.min()), c2=float(ratio.max()), uniqueness_a_star=a_star,
        r=sol.r[order], delta=sol.delta[order], u=sol.u[order], v=sol.v[order], solution=sol,
    )
