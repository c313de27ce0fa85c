import math

import numpy as np
import pytest
import sympy

from singular_plate.domains import Ellipse, Rectangle, UnitBall, build_grid
from singular_plate.errors import HopfViolationError
from singular_plate.spectral import (BallEigenPair, axis_only_load, bilaplacian_of_square,
                                     comparison_constant,
                                     dirichlet_laplacian, eigenpair, fi_constant,
                                     first_bessel_zero, inverse_power, load_f,
                                     radial_fd_eigenvalue)


def bessel_series(nu, x, terms=60):
    return sum((-1) ** k * (x / 2) ** (2 * k + nu) / (math.factorial(k) * math.gamma(k + nu + 1))
               for k in range(terms))


def first_zero_by_bisection(nu, lo, hi):
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if bessel_series(nu, lo) * bessel_series(nu, mid) <= 0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


J01 = first_zero_by_bisection(0, 2.0, 3.0)


def test_bessel_zero_oracle():
    assert J01 == pytest.approx(2.404826, abs=1e-6)
    assert first_bessel_zero(0.0) == pytest.approx(J01, abs=1e-13)
    assert first_bessel_zero(0.5) == pytest.approx(math.pi, abs=1e-13)
    assert first_bessel_zero(1.0) == pytest.approx(first_zero_by_bisection(1, 3.0, 4.5), abs=1e-12)


def test_ball_eigenvalues():
    assert BallEigenPair(2).lam == pytest.approx(J01 ** 2, rel=1e-13)
    assert BallEigenPair(2).lam == pytest.approx(5.78319, abs=1e-5)
    assert BallEigenPair(3).lam == pytest.approx(math.pi ** 2, rel=1e-13)
    assert radial_fd_eigenvalue(2, 400) == pytest.approx(J01 ** 2, rel=1e-4)
    assert radial_fd_eigenvalue(5, 400) == pytest.approx(BallEigenPair(5).lam, rel=1e-4)


@pytest.mark.parametrize("n", [2, 3, 5])
def test_ball_eigenfunction_solves_ode(n):
    e = BallEigenPair(n)
    r = np.linspace(0.05, 0.99, 50)
    residual = e.d2phi(r) + (n - 1) / r * e.dphi(r) + e.lam * e.phi(r)
    assert np.max(np.abs(residual)) < 1e-10
    assert e.phi(0.0) == pytest.approx(1.0)
    assert e.phi(1.0) == 0.0


def test_ball_boundary_slope_oracle():
    e = BallEigenPair(2)
    # phi = J0(j r), phi'(1) = -j J1(j)
    assert e.slope == pytest.approx(-J01 * bessel_series(1, J01), rel=1e-12)
    assert e.phi_over_delta(1e-12) == pytest.approx(-e.slope, rel=1e-10)


@pytest.mark.parametrize("n", [2, 3, 5])
def test_phi_over_delta_continuous_at_switch(n):
    e = BallEigenPair(n)
    lo, hi = e.phi_over_delta(0.05 - 1e-12), e.phi_over_delta(0.05 + 1e-12)
    assert lo == pytest.approx(hi, rel=1e-11)


def test_rectangle_eigenvalue_second_order():
    lams = [eigenpair(Rectangle(1, 1), 1 / k).lam for k in (16, 32, 64)]
    exact = 2 * math.pi ** 2
    assert abs(lams[-1] - exact) / exact < 0.005
    order = math.log2((lams[0] - lams[1]) / (lams[1] - lams[2]))
    assert order == pytest.approx(2.0, abs=0.1)


def test_rectangle_eigenfunction_shape():
    e = eigenpair(Rectangle(1, 1), 1 / 32)
    g = e.grid
    exact = np.sin(np.pi * g.X) * np.sin(np.pi * g.Y)
    assert np.max(np.abs(e.phi - exact)) < 2e-3
    assert np.all(e.phi[g.interior] > 0)
    assert e.residual < 1e-8


def test_normalization_invariance():
    g = build_grid(Rectangle(1, 1), 1 / 16)
    L = dirichlet_laplacian(g)
    lam1, x1, *_ = inverse_power(L, seed=0)
    lam2, x2, *_ = inverse_power(L, start=2 * x1)
    assert lam2 == pytest.approx(lam1, rel=1e-12)
    assert abs(x1 @ x2) == pytest.approx(1.0, abs=1e-12)


def test_seed_independence():
    g = build_grid(Ellipse(1, 0.5), 0.05)
    L = dirichlet_laplacian(g)
    ref_lam, ref, *_ = inverse_power(L, seed=0)
    for seed in range(1, 10):
        lam, x, *_ = inverse_power(L, seed=seed)
        assert abs(lam - ref_lam) <= 1e-9 * ref_lam
        assert abs(x @ ref) >= 1 - 1e-9


def test_fi_constant_identity_ratio():
    d = np.linspace(0.01, 1.0, 100)
    assert fi_constant(d, d) == pytest.approx(1 / 1.01)
    d = np.geomspace(1e-5, 1.0, 100)
    with pytest.raises(HopfViolationError):
        fi_constant(d ** 2, d)


def test_rectangle_ratio_near_edge():
    for k in (32, 64):
        e = eigenpair(Rectangle(1, 1), 1 / k)
        h = 1 / k
        assert e.phi[k // 2, 1] / h == pytest.approx(math.pi, rel=2.0 / k)


@pytest.mark.parametrize("domain", [Rectangle(1, 1), Ellipse(1, 0.5), UnitBall(2)])
def test_fi_bounds_hold(domain):
    e = eigenpair(domain, 0.05)
    c = comparison_constant(e)
    assert 0 < c < 1
    if isinstance(e, BallEigenPair):
        d = np.linspace(1e-6, 1, 1000)
        phi = e.phi(delta=d)
    else:
        d, phi = e.grid.delta[e.grid.interior], e.phi[e.grid.interior]
    assert np.all(c * d <= phi) and np.all(phi <= d / c)


def _symbolic_load():
    x, y = sympy.symbols("x y")
    a = (sympy.sin(sympy.pi * x) * sympy.sin(sympy.pi * y)) ** 2
    lap = lambda f: sympy.diff(f, x, 2) + sympy.diff(f, y, 2)  # noqa: E731
    return x, y, lap(lap(a))


def test_load_center_symbolic_oracle():
    x, y, f = _symbolic_load()
    centre = sympy.nsimplify(f.subs({x: sympy.Rational(1, 2), y: sympy.Rational(1, 2)}))
    assert sympy.simplify(centre - 24 * sympy.pi ** 4) == 0
    # edge midpoint: phi = 0 and D^2 phi = 0, but |grad phi|^2 = pi^2, so only -8 lam |grad phi|^2 survives
    edge = sympy.simplify(f.subs({x: sympy.Rational(1, 2), y: 0}))
    assert sympy.simplify(edge + 16 * sympy.pi ** 4) == 0
    lam = 2 * math.pi ** 2
    assert bilaplacian_of_square(lam, 0.0, math.pi ** 2, 0.0) == pytest.approx(float(edge))
    wd = load_f(eigenpair(Rectangle(1, 1), 1 / 32))
    assert wd.sup_f == pytest.approx(float(24 * sympy.pi ** 4), rel=5e-3)


def test_load_matches_fourth_differences():
    wd16 = load_f(eigenpair(Rectangle(1, 1), 1 / 16))
    wd32 = load_f(eigenpair(Rectangle(1, 1), 1 / 32))
    x, y, f = _symbolic_load()
    fn = sympy.lambdify((x, y), f, "numpy")
    e16 = np.max(np.abs(wd16.f - fn(*wd16.points.T)))
    e32 = np.max(np.abs(wd32.f - fn(*wd32.points.T)))
    assert e16 / e32 > 3.0


def test_axis_only_expansion_differs_at_centre():
    e = eigenpair(Rectangle(1, 1), 1 / 32)
    k = 16
    assert axis_only_load(e)[k, k] == pytest.approx(20 * math.pi ** 4, rel=5e-3)


def test_ball_load_bounded():
    wd = load_f(BallEigenPair(2))
    assert np.isfinite(wd.sup_f)
    # centre: f = 4 lam^2 + 4 * 2 (lam/2)^2 = 6 lam^2 for n = 2
    assert wd.f[0] == pytest.approx(6 * BallEigenPair(2).lam ** 2, rel=1e-10)
