import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from singular_plate.boggio import BoggioKernel, radial_green
from singular_plate.errors import AccuracyError, BracketViolationError, ConvergenceError, DomainError
from singular_plate.sampling import stratified_depths, uniform_ball
from singular_plate.solver import (Bracket, ConstantKernel, RadialKernel, SolverConfig,
                                   assemble_u, choose_epsilon, estimate_M, g_eps, iterate_T,
                                   kernel_mass, prepare, radial_mesh, solve,
                                   uniqueness_certificate)
from singular_plate.spectral import BallEigenPair


@pytest.fixture(scope="module")
def ball_half():
    return solve(SolverConfig(alpha=0.5))


@pytest.fixture(scope="module")
def ball_system():
    return prepare(SolverConfig(alpha=0.5))


def test_config_validation():
    for bad in (0.0, 1.0, 1.2, -0.1):
        with pytest.raises(DomainError, match="alpha out of range"):
            SolverConfig(alpha=bad)
    assert SolverConfig(alpha=0.5).theta == pytest.approx(1 / 1.5)
    assert SolverConfig(alpha=0.5, damping=0.3).theta == 0.3
    with pytest.raises(DomainError):
        SolverConfig(alpha=0.5, damping=1.5)
    cfg = SolverConfig(alpha=0.25, n_nodes=256)
    assert SolverConfig.from_dict(cfg.to_dict()) == cfg


def test_constant_kernel_mass_and_M():
    k = ConstantKernel(1.0)
    assert kernel_mass(k, None) == 1.0
    assert estimate_M(k, range(10)) == pytest.approx(1.05)


def test_estimate_M_from_mass_range():
    class Tabulated:
        def mass(self, x, quad=None):
            return x

    assert estimate_M(Tabulated(), [0.5, 1.0, 2.0]) == pytest.approx(2.1)
    assert estimate_M(Tabulated(), [0.8, 1.0, 1.1]) == pytest.approx(1.05 / 0.8)


def test_choose_epsilon_examples():
    assert choose_epsilon(2.0, 0.5) == pytest.approx(0.25, rel=1e-15)
    assert 0.25 ** 0.75 == pytest.approx(2 ** -1.5, rel=1e-15)
    assert choose_epsilon(4.0, 0.5) == pytest.approx(0.0625, rel=1e-15)
    e = choose_epsilon(1 + 1e-9, 0.5)
    assert e < 1.0 and e > 1 - 1e-8


def test_g_eps_examples():
    assert g_eps(0.1, 0.25, 0.5) == pytest.approx(2.0)
    assert g_eps(1.0, 0.25, 0.5) == 1.0
    assert g_eps(0.25, 0.25, 0.5) == pytest.approx(2.0)
    t = np.linspace(0.01, 3, 200)
    assert np.all(np.diff(g_eps(t, 0.25, 0.5)) <= 0)


def test_bracket_invariants():
    b = Bracket.from_mass(3.0, 0.5)
    assert b.eps <= b.v1 <= b.v2
    assert b.eps ** (1 - 0.25) == pytest.approx(3.0 ** -1.5, rel=1e-12)
    with pytest.raises(BracketViolationError):
        Bracket.from_mass(3.0, 0.5, eps=0.5)


def test_mesh_reproduces_constant_load():
    m = radial_mesh(512, 8)
    H = radial_green(2, m.r[:, None], m.r[None, :], m.delta[:, None], m.delta[None, :])
    assert np.max(np.abs(H @ m.weights - (1 - m.r ** 2) ** 2 / 64)) < 1e-8


def test_mass_monte_carlo_oracle():
    k = RadialKernel(2, 0.5)
    mass = k.mass(0.0)
    eig = BallEigenPair(2)
    g = BoggioKernel(2)
    rng = np.random.default_rng(2024)
    total, total2, count = 0.0, 0.0, 0
    for _ in range(10):
        y = uniform_ball(rng, 1_000_000, 2)
        y = y[np.linalg.norm(y, axis=1) > 1e-9]
        vals = np.pi * g(np.zeros_like(y), y) / eig.a(r=np.linalg.norm(y, axis=1)) ** 0.5
        total += vals.sum(); total2 += (vals ** 2).sum(); count += vals.size
    mean = total / count
    stderr = math.sqrt(total2 / count - mean ** 2) / math.sqrt(count)
    assert abs(mass - mean) < 5 * stderr
    assert stderr / mean < 1e-3


def test_mass_refinement_stable():
    k = RadialKernel(2, 0.5)
    assert k.mass(0.3, 512) == pytest.approx(k.mass(0.3, 1024), rel=1e-6)


def test_mass_continuous_towards_boundary():
    k = RadialKernel(2, 0.5)
    mesh = k.mesh(1024)
    limit = float(np.sum(k.boundary_value(mesh.r) * mesh.weights))
    near = [k.mass(1 - d) for d in (1e-3, 1e-4, 1e-5)]
    gaps = [abs(m - limit) for m in near]
    assert gaps[0] > gaps[1] > gaps[2]
    assert gaps[2] < 1e-3 * limit


@pytest.mark.parametrize("n", [2, 3, 5])
def test_kernel_boundary_limit(n):
    k = RadialKernel(n, 0.5)
    s = np.array([0.2, 0.6, 0.9])
    assert np.allclose(k(dr=1e-7, s=s), k.boundary_value(s), rtol=1e-5)


def test_coarse_mass_rule_rejected():
    with pytest.raises(AccuracyError):
        RadialKernel(2, 0.5).mass(1 - stratified_depths(200), quad=128)


def test_M_sampling_stability():
    k = RadialKernel(2, 0.5)
    m200 = estimate_M(k, 1 - stratified_depths(200, seed=0))
    m400 = estimate_M(k, 1 - stratified_depths(400, seed=0))
    assert abs(m400 / m200 - 1) < 0.05


@pytest.mark.parametrize("alpha", [0.25, 0.5, 0.75])
def test_constant_kernel_fixed_point(alpha):
    for c in (1.0, 2 ** (1 + alpha), 0.3):
        k = ConstantKernel(c)
        b = Bracket.from_mass(estimate_M(k, [0]), alpha)
        run = iterate_T(k.system(), b, SolverConfig(alpha=alpha, tol=1e-14))
        assert np.allclose(run.v, c ** (1 / (1 + alpha)), rtol=1e-10, atol=0)
    run = iterate_T(ConstantKernel(2 ** (1 + alpha)).system(),
                    Bracket.from_mass(2 ** (1 + alpha) * 1.05, alpha), SolverConfig(alpha=alpha))
    assert np.allclose(run.v, 2.0, rtol=1e-10)


def test_undamped_subsequences_monotone(ball_system):
    _, bracket, system = ball_system
    cfg = SolverConfig(alpha=0.5, damping=1.0)
    run = iterate_T(system, bracket, cfg)
    sups = np.array(run.sup_trace)
    even, odd = sups[0::2], sups[1::2]
    de, do = np.diff(even), np.diff(odd)
    # one subsequence increases and the other decreases (up to roundoff at convergence)
    tol = 1e-13 * sups.max()
    assert (np.all(de <= tol) and np.all(do >= -tol)) or (np.all(de >= -tol) and np.all(do <= tol))
    assert abs(even[-1] - odd[-1]) <= 1e-10 * sups[-1]
    damped = iterate_T(system, bracket, SolverConfig(alpha=0.5, damping=0.5))
    assert damped.iterations < run.iterations


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000), st.floats(0.0, 2.0))
def test_order_reversal(ball_system, seed, bump):
    _, bracket, system = ball_system
    rng = np.random.default_rng(seed)
    v = bracket.v1 + (bracket.v2 - bracket.v1) * rng.random(system.size)
    w = v + bump * rng.random(system.size)
    Tv = system.apply_T(v, bracket.eps, 0.5)
    Tw = system.apply_T(w, bracket.eps, 0.5)
    assert np.all(Tw <= Tv * (1 + 1e-14))


@pytest.mark.parametrize("c", [0.5, 2.0])
def test_sublinear_scaling(ball_system, c):
    _, bracket, system = ball_system
    v = np.random.default_rng(1).random(system.size) + 1.0
    tiny = 1e-300
    lhs = system.apply_T(c * v, tiny, 0.5)
    rhs = c ** -0.5 * system.apply_T(v, tiny, 0.5)
    assert np.allclose(lhs, rhs, rtol=1e-12, atol=0)


def test_assemble_u_composition():
    d = np.linspace(0.01, 1, 20)
    assert np.array_equal(assemble_u(np.ones_like(d), d ** 2), d ** 2)


def test_solution_residual_and_positivity(ball_half):
    assert ball_half.converged
    assert ball_half.integral_residual <= 1e-5
    assert np.all(ball_half.u > 0)
    assert ball_half.min_v >= ball_half.epsilon
    for lo, hi in ball_half.bracket_trace:
        assert ball_half.v1 * (1 - 1e-12) <= lo and hi <= ball_half.v2 * (1 + 1e-12)


def test_solution_matches_independent_evaluation(ball_half):
    sol = ball_half.solution
    d = np.array([0.9, 0.5, 0.2, 0.05, 0.01, 1e-3])
    # nodal values vs accurate off-node quadrature at the same depths
    assert np.allclose(sol.u_at(d), sol.w_at(d), rtol=1e-5)


def test_uniqueness_certificate_examples(ball_system):
    _, _, system = ball_system
    u = np.linspace(0.1, 1.0, system.size)
    assert uniqueness_certificate(u, u).a_star == 1.0
    op = lambda w: system.apply_solution_operator(w, 0.5)  # noqa: E731
    uu = system.a * 0.3
    cert = uniqueness_certificate(uu, 2 * uu, op, 0.5)
    assert cert.a_star == pytest.approx(2.0)
    assert cert.holds
    assert cert.a_after == pytest.approx(2 ** 0.25, rel=1e-10)
    with pytest.raises(DomainError):
        uniqueness_certificate(-u, u)


def test_multistart_uniqueness():
    rep = solve(SolverConfig(alpha=0.5), uniqueness=True)
    assert rep.uniqueness_a_star - 1 <= 10 * rep.config["tol"]


def test_max_iter_forces_convergence_error(ball_system):
    _, bracket, system = ball_system
    with pytest.raises(ConvergenceError) as info:
        iterate_T(system, bracket, SolverConfig(alpha=0.5, max_iter=1))
    assert len(info.value.history) == 1


def test_bracket_violation_detected(ball_system):
    _, bracket, system = ball_system
    # a start far above v2 leaves the bracket on the first step
    with pytest.raises(BracketViolationError):
        iterate_T(system, bracket, SolverConfig(alpha=0.5), v0=bracket.v2 * 1e6)


def test_deterministic():
    a = solve(SolverConfig(alpha=0.5, n_nodes=256))
    b = solve(SolverConfig(alpha=0.5, n_nodes=256))
    assert a.to_dict() == b.to_dict()
    assert np.array_equal(a.u, b.u)


@pytest.mark.parametrize("n", [3, 5])
def test_higher_dimensions(n):
    rep = solve(SolverConfig(alpha=0.5, dimension=n))
    assert rep.integral_residual <= 1e-5
    assert 0 < rep.c1 <= rep.c2


def test_alpha_continuity_reported():
    lo = solve(SolverConfig(alpha=0.49, n_nodes=256))
    hi = solve(SolverConfig(alpha=0.51, n_nodes=256))
    assert abs(hi.u.max() / lo.u.max() - 1) < 0.05
