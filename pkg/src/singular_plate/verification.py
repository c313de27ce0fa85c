"""Executable checks of the quantitative estimates around Delta^2 u = u^-alpha.

* pointwise bounds on G and its x-derivatives, with empirical constants;
* the boundary rate c1 delta^2 <= u <= c2 delta^2;
* the lower bound u >= m a with the weight a = phi1^2;
* growth of third normal differences (C^3 up to the boundary or not).

Every check returns a report with ``spec``, ``seed``, ``samples``, ``statistic``
and ``verdict`` so results can be serialized uniformly.
"""
from __future__ import annotations

import csv
import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.special import roots_legendre

from .boggio import BoggioKernel, sphere_area
from .errors import DomainError, VerificationError
from .sampling import ball_points_at_depth, uniform_ball

PASS, FAIL, REPORTED = "PASS", "FAIL", "REPORTED"

# case -> (admissibility on (n, k), description of the bound)
_CASES = {
    "i1": lambda n, k: k >= 2 and n > 4 - k,
    "i2": lambda n, k: k >= 2 and n == 4 - k,
    "i3": lambda n, k: k >= 2 and n < 4 - k,
    "ii1": lambda n, k: k < 2 and n > 4 - k,
    "ii2": lambda n, k: k < 2 and n == 4 - k,
    "ii3": lambda n, k: k < 2 and 2 * (2 - k) <= n < 4 - k,
    "ii4": lambda n, k: k < 2 and n < 2 * (2 - k),
    # reductions used to derive the upper boundary rate, all with k = 0
    "reduced_high": lambda n, k: k == 0 and n > 4,
    "reduced_n4": lambda n, k: k == 0 and n == 4,
    "reduced_n3": lambda n, k: k == 0 and n == 3,
    "reduced_n2": lambda n, k: k == 0 and n == 2,
}


@dataclass(frozen=True)
class BoundSpec:
    """Which bound to test: dimension, derivative order |k|, case label and exponents."""

    n: int
    order: int
    case: str
    alpha: float | None = None
    beta: float | None = None

    def __post_init__(self):
        if self.case not in _CASES:
            raise DomainError(f"unknown case {self.case!r}")
        if self.order not in (0, 1, 2):
            raise DomainError("derivative order must be 0, 1 or 2")
        if not _CASES[self.case](self.n, self.order):
            raise DomainError(f"case {self.case} is not admissible for n = {self.n}, |k| = {self.order}")
        if self.case in ("reduced_high", "reduced_n4", "reduced_n3", "reduced_n2"):
            if self.alpha is None or not 0.0 < self.alpha < 1.0:
                raise DomainError(f"case {self.case} needs alpha in (0,1)")
            if self.beta is None:
                object.__setattr__(self, "beta", default_beta(self.n, self.alpha))

    def to_dict(self):
        return asdict(self)

    def bound(self, dx, dy, dist):
        """Bound expression without its constant."""
        n, k = self.n, self.order
        mx = np.minimum(1.0, dx / dist)
        my = np.minimum(1.0, dy / dist)
        c = self.case
        if c == "i1":
            return dist ** (4 - n - k) * my ** 2
        if c == "i2":
            return np.log(2.0 + dy / dist) * my ** 2
        if c == "i3":
            return dy ** (4 - n - k) * my ** (n + k - 2)
        if c == "ii1":
            return dist ** (4 - n - k) * mx ** (2 - k) * my ** 2
        if c == "ii2":
            return np.log(2.0 + dy / dist) * mx ** (2 - k) * my ** 2
        if c == "ii3":
            return dy ** (4 - n - k) * mx ** (2 - k) * my ** (n + k - 2)
        if c == "ii4":
            return dx ** (2 - k - n / 2) * dy ** (2 - n / 2) * mx ** (n / 2) * my ** (n / 2)
        a, b = self.alpha, self.beta
        if c == "reduced_high":
            return dist ** (2 - 2 * a - n) * dx ** 2 * dy ** (2 * a)
        if c == "reduced_n4":
            return dist ** (-2 - 2 * a) * dx ** 2 * dy ** (2 * a) * np.log(2.0 + 2.0 / dist)
        if c == "reduced_n3":
            return dist ** (-1.5 - b) * dx ** 2 * dy ** (2 * a)
        return dist ** (-1 - b) * dx ** 2 * dy ** (2 * a)


def default_beta(n, alpha):
    if n == 3:
        return max(0.0, 2 * alpha - 0.5)
    if n == 2:
        return max(0.0, 2 * alpha - 1.0)
    return None


# ---------------------------------------------------------------------------
# kernel bounds

def sample_pairs(rng, count, n, min_sep=1e-6):
    """Half uniform pairs, half multiscale pairs (log-uniform depth and separation)."""
    half = count // 2
    x1, y1 = uniform_ball(rng, half, n), uniform_ball(rng, half, n)
    m = count - half
    depth = 10.0 ** rng.uniform(-4, 0, m)
    x2 = ball_points_at_depth(rng, depth, n)
    e = rng.standard_normal((m, n))
    e /= np.linalg.norm(e, axis=1, keepdims=True)
    t = 10.0 ** rng.uniform(-4, 0.3, m)
    y2 = x2 + t[:, None] * e
    out = np.linalg.norm(y2, axis=1) >= 1.0
    # fold points that left the ball back inside along the same ray
    y2[out] *= (rng.uniform(0.0, 1.0, out.sum()) / np.linalg.norm(y2[out], axis=1))[:, None]
    x, y = np.vstack([x1, x2]), np.vstack([y1, y2])
    keep = np.linalg.norm(x - y, axis=1) >= min_sep
    return x[keep], y[keep]


def kernel_derivative_norm(kernel, x, y, order, dist_x):
    """|D_x^k G| by central differences: |G|, |grad G| or the Frobenius norm of the Hessian."""
    g0 = kernel(x, y)
    if order == 0:
        return np.abs(g0)
    step = np.minimum(dist_x, np.linalg.norm(x - y, axis=1)) / 8.0
    n = x.shape[1]
    eye = np.eye(n)
    if order == 1:
        comps = [(kernel(x + step[:, None] * eye[i], y) - kernel(x - step[:, None] * eye[i], y))
                 / (2 * step) for i in range(n)]
        return np.sqrt(np.sum(np.square(comps), axis=0))
    total = np.zeros_like(g0)
    for i in range(n):
        for j in range(i, n):
            if i == j:
                d = (kernel(x + step[:, None] * eye[i], y) - 2 * g0
                     + kernel(x - step[:, None] * eye[i], y)) / step ** 2
                total += d * d
            else:
                pp = kernel(x + step[:, None] * (eye[i] + eye[j]), y)
                pm = kernel(x + step[:, None] * (eye[i] - eye[j]), y)
                mp = kernel(x - step[:, None] * (eye[i] - eye[j]), y)
                mm = kernel(x - step[:, None] * (eye[i] + eye[j]), y)
                d = (pp - pm - mp + mm) / (4 * step ** 2)
                total += 2 * d * d
    return np.sqrt(total)


@dataclass
class BoundReport:
    spec: dict
    seed: int
    samples: list
    statistic: dict
    verdict: str
    ratios: np.ndarray = field(default=None, repr=False)

    def to_dict(self):
        return {k: getattr(self, k) for k in ("spec", "seed", "samples", "statistic", "verdict")}

    def export_csv(self, path):
        with open(path, "w", newline="") as fh:
            out = csv.writer(fh)
            out.writerow(["ratio"])
            out.writerows([[f"{r:.17g}"] for r in self.ratios])


def empirical_constant(spec: BoundSpec, kernel, pairs: int, seed: int = 0):
    """sup |D^k G| / bound over seeded pairs, with the per-pair ratios."""
    rng = np.random.default_rng(seed)
    x, y = sample_pairs(rng, pairs, spec.n)
    dx = 1.0 - np.linalg.norm(x, axis=1)
    dy = 1.0 - np.linalg.norm(y, axis=1)
    dist = np.linalg.norm(x - y, axis=1)
    ratios = kernel_derivative_norm(kernel, x, y, spec.order, dx) / spec.bound(dx, dy, dist)
    return float(np.max(ratios)), ratios


def check_green_bound(spec: BoundSpec, kernel=None, pairs: int = 10_000, seed: int = 0,
                      max_growth: float = 0.10) -> BoundReport:
    """Empirical constant over ``pairs`` and ``2 pairs`` samples; PASS when finite and stable."""
    kernel = BoggioKernel(spec.n) if kernel is None else kernel
    c1, _ = empirical_constant(spec, kernel, pairs, seed)
    c2, ratios = empirical_constant(spec, kernel, 2 * pairs, seed)
    growth = c2 / c1 - 1.0
    ok = math.isfinite(c1) and math.isfinite(c2) and growth < max_growth
    return BoundReport(spec.to_dict(), seed, [pairs, 2 * pairs],
                       {"c": c1, "c_doubled": c2, "growth": growth}, PASS if ok else FAIL, ratios)


# ---------------------------------------------------------------------------
# boundary rate

@dataclass
class RateFit:
    band: tuple
    c1: float
    c2: float
    count: int
    median: float

    @property
    def spread(self):
        return self.c2 / self.c1

    def to_dict(self):
        d = asdict(self)
        d["band"] = list(self.band)
        d["spread"] = self.spread
        return d


def fit_boundary_rate(u, delta, band=(0.0, 0.1), delta_max=1.0) -> RateFit:
    u = np.asarray(u, dtype=float)
    delta = np.asarray(delta, dtype=float)
    lo, hi = band
    if not 0.0 <= lo < hi <= delta_max / 4:
        raise DomainError(f"band {band} must lie in (0, {delta_max / 4:g}]")
    sel = (delta > lo) & (delta < hi)
    if not sel.any():
        raise DomainError("no samples in band")
    if np.any(u[sel] <= 0):
        raise VerificationError(f"rate check failed: u <= 0 at {int(np.sum(u[sel] <= 0))} band samples")
    ratio = u[sel] / delta[sel] ** 2
    return RateFit((float(lo), float(hi)), float(ratio.min()), float(ratio.max()),
                   int(sel.sum()), float(np.median(ratio)))


def compare_rate_fits(coarse: RateFit, fine: RateFit, max_growth=0.10):
    """Growth of c2/c1 from the coarse fit to the refined (narrower band) fit."""
    growth = fine.spread / coarse.spread - 1.0
    return {"spread": coarse.spread, "spread_refined": fine.spread, "growth": growth,
            "verdict": PASS if growth < max_growth else FAIL}


# ---------------------------------------------------------------------------
# lower bound with the weight a

@dataclass
class LowerBound:
    m: float
    m_load: float
    m_ratio: float
    holds: bool

    def to_dict(self):
        return asdict(self)


def check_lower_bound(u, a, f, alpha, safety=0.99) -> LowerBound:
    """m = safety * min(inf u^-alpha / sup f, inf u/a); asserts u >= m a."""
    u = np.asarray(u, dtype=float)
    a = np.asarray(a, dtype=float)
    sup_f = float(np.max(f))
    if np.any(u <= 0):
        raise VerificationError("lower bound check failed: u is not positive")
    m_load = float(np.max(u)) ** (-alpha) / sup_f if sup_f > 0 else math.inf
    m_ratio = float(np.min(u / a))
    m = safety * min(m_load, m_ratio)
    holds = bool(m > 0 and np.all(u >= m * a))
    if not holds:
        raise VerificationError(f"lower bound check failed: no positive m (m = {m:.3e})")
    return LowerBound(m, m_load, m_ratio, holds)


# ---------------------------------------------------------------------------
# regularity

@dataclass
class RegularityReport:
    alpha: float
    h: float
    deltas: list
    second: list
    third: list  # one row per resolution h, h/2, h/4
    exponent: float
    loglog_slope: float | None
    bounded: bool
    asserted: bool
    verdict: str

    def to_dict(self):
        return asdict(self)


def regularity_probe(profile, alpha, h, levels=3, multiples=(8, 16, 32), delta_max=1.0):
    """Second and third forward differences of ``profile(delta)`` along the inward normal.

    ``exponent`` is the growth exponent p of the third difference D3(delta) near the
    boundary, estimated from successive increments at doubling distances,
    |D3(2d) - D3(4d)| / |D3(d) - D3(2d)| = 2^p; D3 stays bounded when p > 0 and
    blows up like d^p when p < 0. Negligible increments count as p = 0.
    """
    if levels < 3:
        raise DomainError("need at least three nested resolutions")
    deltas = np.asarray(multiples, dtype=float) * h
    if deltas[-1] + 3 * h >= delta_max:
        raise DomainError("h too large for the probe distances")
    second, third = [], []
    for k in range(levels):
        hk = h / 2 ** k
        pts = np.concatenate([deltas + j * hk for j in range(4)])
        w = np.asarray(profile(pts), dtype=float).reshape(4, -1)
        second.append(((w[2] - 2 * w[1] + w[0]) / hk ** 2).tolist())
        third.append(((w[3] - 3 * w[2] + 3 * w[1] - w[0]) / hk ** 3).tolist())
    d3 = np.asarray(third[-1])
    inc = np.abs(np.diff(d3))
    scale = max(float(np.max(np.abs(d3))), 1.0)
    if np.all(inc <= 1e-6 * scale):
        exponent = 0.0
    else:
        exponent = float(np.mean(np.log2(inc[1:] / inc[:-1]))) if np.all(inc > 0) else 0.0
    slope = None
    if np.all(np.abs(d3) > 1e-6 * scale):
        slope = float(np.polyfit(np.log(deltas), np.log(np.abs(d3)), 1)[0])
    bounded = exponent >= -0.1
    asserted = alpha < 0.5
    verdict = (PASS if bounded else FAIL) if asserted else REPORTED
    return RegularityReport(float(alpha), float(h), deltas.tolist(), second[-1], third,
                            exponent, slope, bounded, asserted, verdict)


# ---------------------------------------------------------------------------
# upper-rate chain in high dimension

def riesz_potential_ball(n, r, p, order=64):
    """int_{|y|<1} |x - y|^p dy for |x| = r, p > -n, by polar coordinates about x."""
    if p <= -n:
        raise DomainError("potential exponent must exceed -n")
    t, w = roots_legendre(order)
    theta = 0.5 * np.pi * (t + 1.0)
    w = 0.5 * np.pi * w
    r = np.atleast_1d(np.asarray(r, dtype=float))
    c = r[:, None] * np.cos(theta)[None, :]
    rho = -c + np.sqrt(c * c + 1.0 - r[:, None] ** 2)
    inner = rho ** (p + n) / (p + n)
    return sphere_area(n - 1) * np.sum(w * np.sin(theta) ** (n - 2) * inner, axis=1)


def chain_constant(u, delta, n, alpha):
    """sup u / (delta^2 int |x - y|^(2 - 2 alpha - n) dy) over the given nodes."""
    u = np.asarray(u, dtype=float)
    delta = np.asarray(delta, dtype=float)
    pot = riesz_potential_ball(n, 1.0 - delta, 2 - 2 * alpha - n)
    return float(np.max(u / (delta ** 2 * pot)))
