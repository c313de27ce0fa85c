"""Boggio's Green function of the clamped biharmonic operator on the unit ball.

For ``x != y`` in the unit ball of R^n,

    G(x, y) = c_n |x - y|^(4-n) * int_1^A (v^2 - 1) v^(1-n) dv,
    A^2 - 1 = (1 - |x|^2)(1 - |y|^2) / |x - y|^2,   c_n = 1 / (4 |S^(n-1)|).

``A^2 - 1`` is formed from the product above rather than from ``A`` so that the
inner integral keeps full relative precision when ``A`` is close to 1, which
is exactly where one of the points approaches the sphere.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gamma, roots_legendre

from .errors import AccuracyError, DomainError, SingularityError

_SERIES_CUTOFF = 1e-2


def sphere_area(n: int) -> float:
    """Surface measure of the unit sphere S^(n-1) in R^n."""
    return 2.0 * np.pi ** (n / 2) / gamma(n / 2)


def log1p_excess(q):
    """q - log(1 + q), accurate for small |q|."""
    q = np.asarray(q, dtype=float)
    small = np.abs(q) < _SERIES_CUTOFF
    qs = np.where(small, q, 0.0)
    series = np.zeros_like(qs)
    for k in range(12, 1, -1):
        series = qs * series + (-1.0) ** k / k
    series *= qs * qs
    with np.errstate(invalid="ignore"):
        direct = q - np.log1p(q)
    return np.where(small, series, direct)


def _log1p_minus_ratio(q):
    """log(1 + q) - q/(1 + q), accurate for small |q|."""
    q = np.asarray(q, dtype=float)
    small = np.abs(q) < _SERIES_CUTOFF
    qs = np.where(small, q, 0.0)
    series = np.zeros_like(qs)
    for k in range(14, 1, -1):
        series = qs * series + (-1.0) ** k * (k - 1) / k
    series *= qs * qs
    direct = np.log1p(q) - q / (1.0 + q)
    return np.where(small, series, direct)


@dataclass(frozen=True)
class BoggioKernel:
    n: int = 2
    quad_order: int = 8
    c_n: float = field(init=False)

    def __post_init__(self):
        if self.n < 2:
            raise DomainError("dimension must be >= 2")
        object.__setattr__(self, "c_n", 1.0 / (4.0 * sphere_area(self.n)))
        object.__setattr__(self, "quad_order",
                           max(int(self.quad_order), int(np.ceil((self.n - 2) / 2))))

    # -- pointwise -------------------------------------------------------
    def green(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if x.shape[-1] != self.n or y.shape[-1] != self.n:
            raise DomainError(f"points must have {self.n} coordinates")
        xx = np.sum(x * x, axis=-1)
        yy = np.sum(y * y, axis=-1)
        d2 = np.sum((x - y) ** 2, axis=-1)
        if np.any(xx >= 1.0) or np.any(yy >= 1.0):
            raise DomainError("Boggio kernel needs strictly interior points")
        if np.any(d2 == 0.0):
            raise SingularityError("G(x, y) is singular at x = y")
        g = self._from_invariants((1.0 - xx) * (1.0 - yy), d2)
        return float(g) if np.ndim(g) == 0 else g

    __call__ = green

    def _from_invariants(self, boundary_product, d2):
        q = boundary_product / d2
        return self.c_n * d2 ** ((4 - self.n) / 2) * self.inner_integral(q)

    def inner_integral(self, q):
        """int_1^A (v^2 - 1) v^(1-n) dv as a function of q = A^2 - 1 >= 0."""
        q = np.asarray(q, dtype=float)
        n = self.n
        if n == 2:
            return 0.5 * log1p_excess(q)
        if n == 4:
            return 0.5 * _log1p_minus_ratio(q)
        A = np.sqrt(1.0 + q)
        if n == 3:
            am1 = q / (A + 1.0)
            return am1 * am1 / A
        # n >= 5: substitute w = 1/v; the integrand (1 - w^2) w^(n-5) is a
        # polynomial on [1/A, 1] and Gauss-Legendre with quad_order nodes is exact.
        t, wts = roots_legendre(self.quad_order)
        length = q / (A * (A + 1.0))  # 1 - 1/A
        one_minus_w = 0.5 * length[..., None] * (1.0 - t)
        w = 1.0 - one_minus_w
        integrand = one_minus_w * (1.0 + w) * w ** (n - 5)
        return 0.5 * length * np.sum(wts * integrand, axis=-1)

    # -- integrals -------------------------------------------------------
    def constant_load_potential(self, x, quad=(48, 64)):
        """int_{disk} G(x, y) dy, by polar quadrature centred at ``x``.

        ``quad = (n_rho, n_theta)``: Gauss-Legendre nodes along each ray and
        trapezoid nodes in angle. The ray parametrization keeps the logarithmic
        kink of G at y = x at the ray origin, where it is integrable and mild.
        """
        if self.n != 2:
            raise DomainError("constant_load_potential is implemented for n = 2")
        x = np.asarray(x, dtype=float)
        if np.dot(x, x) >= 1.0:
            raise DomainError("x must be interior")
        n_rho, n_theta = quad
        t, wt = roots_legendre(n_rho)
        t = 0.5 * (t + 1.0)
        wt = 0.5 * wt
        theta = 2.0 * np.pi * np.arange(n_theta) / n_theta
        e = np.column_stack([np.cos(theta), np.sin(theta)])
        xe = e @ x
        rho_max = -xe + np.sqrt(xe * xe + 1.0 - x @ x)
        rho = t[None, :] * rho_max[:, None]
        y = x + rho[..., None] * e[:, None, :]
        vals = self.green(np.broadcast_to(x, y.shape), y)
        ray = np.sum(wt * vals * t, axis=1) * rho_max ** 2
        return float(2.0 * np.pi / n_theta * np.sum(ray))

    def radial_kernel(self, r, s, angular_order=64, check=True):
        """Sphere integral of G(x, .) over |y| = s, for |x| = r.

        Equals s^(n-1) |S^(n-1)| times the angular average of G, so that the
        radial solution of Delta^2 u = g(|x|) is int_0^1 radial_kernel(r, s) g(s) ds.
        """
        r = float(r)
        s = float(s)
        if not (0.0 <= r < 1.0 and 0.0 <= s < 1.0):
            raise DomainError("radii must lie in [0, 1)")
        if s == 0.0:
            return 0.0
        value = self._angular(r, s, angular_order)
        if check:
            finer = self._angular(r, s, 2 * angular_order)
            if abs(finer - value) > 1e-8 * abs(finer):
                raise AccuracyError(
                    f"angular quadrature not converged at order {angular_order}: "
                    f"{value!r} vs {finer!r}")
            value = finer
        return value

    def _angular(self, r, s, order):
        n = self.n
        # theta = pi u^2 clusters nodes at theta = 0, where y meets x when r = s.
        u, w = roots_legendre(order)
        u = 0.5 * (u + 1.0)
        w = 0.5 * w
        theta = np.pi * u * u
        jac = 2.0 * np.pi * u
        xy = r * s * np.cos(theta)
        d2 = r * r + s * s - 2.0 * xy
        d2 = np.maximum(d2, (r - s) ** 2)
        g = self._from_invariants((1.0 - r * r) * (1.0 - s * s), d2)
        weight = np.sin(theta) ** (n - 2)
        surface = sphere_area(n - 1) if n > 2 else 2.0
        return float(s ** (n - 1) * surface * np.sum(w * jac * weight * g))

    def export_csv(self, path, pairs):
        """Write ``(x, y, G)`` rows; points are serialized as space-separated coordinates."""
        with open(path, "w", newline="") as fh:
            out = csv.writer(fh)
            out.writerow(["x", "y", "G"])
            for x, y in pairs:
                out.writerow([" ".join(f"{c:.17g}" for c in x),
                              " ".join(f"{c:.17g}" for c in y),
                              f"{self.green(x, y):.17g}"])


def green(kernel: BoggioKernel, x, y):
    return kernel.green(x, y)


def radial_green(n, r, s, dr=None, ds=None):
    """Closed-form sphere integral of Boggio's G: the kernel of the radial problem.

    ``H(r, s)`` solves Delta^2 H(., s) = delta(|x| - s) with H = H' = 0 at r = 1.
    ``dr`` and ``ds`` are the distances 1 - r and 1 - s; pass them when known to
    better precision than ``r`` and ``s`` themselves (points very near the sphere).
    """
    r = np.asarray(r, dtype=float)
    s = np.asarray(s, dtype=float)
    dr = 1.0 - r if dr is None else np.asarray(dr, dtype=float)
    ds = 1.0 - s if ds is None else np.asarray(ds, dtype=float)
    r, s, dr, ds = np.broadcast_arrays(r, s, dr, ds)
    below = r <= s
    big = np.where(below, s, r)
    dbig = np.where(below, ds, dr)
    q = -dbig * (2.0 - dbig)  # big^2 - 1
    if n == 2:
        small = np.where(below, r, s)
        bracket = (1.0 + small ** 2) * log1p_excess(q) - q * np.log1p(q)
        return -s / 8.0 * bracket
    if n == 4:
        with np.errstate(divide="ignore", invalid="ignore"):
            inner = -s * (r * r * q * q - 2.0 * s * s * log1p_excess(q)) / 16.0
            outer = -s ** 3 * (s * s * q * q - 2.0 * r * r * log1p_excess(q)) / (16.0 * r * r)
        return np.where(below, inner, outer)
    with np.errstate(divide="ignore", invalid="ignore"):
        if n == 3:
            inner = -s * ds ** 2 * (r * r * s + 2 * r * r - 3 * s) / 12.0
            outer = -s * s * dr ** 2 * (r * s * s - 3 * r + 2 * s * s) / (12.0 * r)
        elif n == 5:
            inner = -s * ds ** 2 * (3 * r * r * s ** 3 + 6 * r * r * s * s + 4 * r * r * s
                                    + 2 * r * r - 5 * s ** 3 - 10 * s * s) / 60.0
            outer = -s ** 4 * dr ** 2 * (3 * r ** 3 * s * s - 5 * r ** 3 + 6 * r * r * s * s
                                         - 10 * r * r + 4 * r * s * s + 2 * s * s) / (60.0 * r ** 3)
        else:
            sn = s ** n
            a0 = (n * s * s * sn - n * sn + 2 * s ** 4 - 4 * s * s * sn + 2 * sn) / (
                4 * s * (n - 4) * (n - 2))
            b0 = -(n * s * s * sn - n * sn - 2 * s * s * sn + 2 * s * s) / (4 * n * s * (n - 2))
            c1 = s ** (n - 1) * (n * s * s - n - 4 * s * s + 2) / (4 * (n - 4) * (n - 2))
            c2 = -s ** (n - 1) * (n * s * s - n - 2 * s * s) / (4 * n * (n - 2))
            c3 = -s ** (n + 1) / (2 * n * (n - 2))
            c4 = s ** (n - 1) / (2 * (n - 4) * (n - 2))
            inner = a0 + b0 * r * r
            outer = c1 + c2 * r * r + c3 * r ** (2 - n) + c4 * r ** (4 - n)
    return np.where(below, inner, outer)


def radial_green_boundary_d2(n, s):
    """Second normal derivative of H(., s) on the sphere: s^(n-1)(1 - s^2)/2."""
    s = np.asarray(s, dtype=float)
    return s ** (n - 1) * (1.0 - s * s) / 2.0
