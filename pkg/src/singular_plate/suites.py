"""Named verification suites driven by the ``verify`` command."""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .errors import DomainError, SingularPlateError
from .solver import (SolverConfig, assemble_u, iterate_T, prepare, solve,
                     uniqueness_certificate)
from .spectral import BallEigenPair, load_f
from .verification import (FAIL, PASS, REPORTED, BoundSpec, chain_constant,
                           check_green_bound, check_lower_bound, compare_rate_fits,
                           fit_boundary_rate, regularity_probe)

SUITES = ("bounds", "rate", "uniqueness", "regularity", "all")

BOUND_CASES = (
    BoundSpec(5, 0, "ii1"),
    BoundSpec(2, 0, "ii4"),
    BoundSpec(3, 0, "ii4"),
    BoundSpec(2, 1, "ii3"),
    BoundSpec(2, 2, "i2"),
    BoundSpec(5, 0, "reduced_high", alpha=0.5),
    BoundSpec(3, 0, "reduced_n3", alpha=0.5),
    BoundSpec(2, 0, "reduced_n2", alpha=0.5),
)


def _check(name, spec, seed, samples, statistic, verdict, error=None):
    out = {"name": name, "spec": spec, "seed": seed, "samples": samples,
           "statistic": statistic, "verdict": verdict}
    if error:
        out["error"] = error
    return out


def suite_bounds(seed=0, pairs=10_000, **_):
    checks = []
    for spec in BOUND_CASES:
        rep = check_green_bound(spec, pairs=pairs, seed=seed)
        name = f"bound_{spec.case}_n{spec.n}_k{spec.order}"
        checks.append(_check(name, rep.spec, seed, rep.samples, rep.statistic, rep.verdict))
    return checks


def load_fixture(path):
    """Read a solve output directory (report.json + field.csv)."""
    path = Path(path)
    report = json.loads((path / "report.json").read_text())
    with open(path / "field.csv", newline="") as fh:
        rows = list(csv.DictReader(line for line in fh if not line.startswith("#")))
    data = {k: np.array([float(r[k]) for r in rows]) for k in rows[0]}
    return report, data


def suite_rate(seed=0, fixture=None, alpha=0.5, **_):
    checks = []
    try:
        if fixture is not None:
            report, data = load_fixture(fixture)
            alpha = report["config"]["alpha"]
            n = report["config"]["dimension"]
            delta, u = data["delta"], data["u"]
            coarse = fit_boundary_rate(u, delta, (0.0, 0.1))
            fine = fit_boundary_rate(u, delta, (0.0, 0.05))
            a = BallEigenPair(n).a(delta=delta)
            samples = [int(delta.size)]
        else:
            n = 2
            r1 = solve(SolverConfig(alpha=alpha, seed=seed))
            r2 = solve(SolverConfig(alpha=alpha, seed=seed, n_nodes=1024))
            coarse = fit_boundary_rate(r1.u, r1.delta, (0.0, 0.1))
            fine = fit_boundary_rate(r2.u, r2.delta, (0.0, 0.05))
            delta, u = r1.delta, r1.u
            a = BallEigenPair(n).a(delta=delta)
            samples = [int(r1.delta.size), int(r2.delta.size)]
        cmp = compare_rate_fits(coarse, fine)
        checks.append(_check("rate", {"band": [0.0, 0.1], "refined_band": [0.0, 0.05]}, seed,
                             samples, {"coarse": coarse.to_dict(), "fine": fine.to_dict(),
                                       "growth": cmp["growth"]}, cmp["verdict"]))
        f = load_f(BallEigenPair(n)).f
        lb = check_lower_bound(u, a, f, alpha)
        band = delta < 0.1
        floor = lb.m * float(np.min(a[band] / delta[band] ** 2))
        ok = floor <= coarse.c1 <= coarse.c2
        checks.append(_check("lower_bound", {"alpha": alpha, "safety": 0.99}, seed, samples,
                             {**lb.to_dict(), "m_times_inf_a_over_delta2": floor, "c1": coarse.c1},
                             PASS if ok else FAIL))
    except SingularPlateError as exc:
        checks.append(_check("rate", {"fixture": str(fixture) if fixture else None}, seed, [],
                             {}, FAIL, error=str(exc)))
    if fixture is None:
        consts = []
        for nodes in (512, 1024):
            rep = solve(SolverConfig(alpha=alpha, dimension=5, n_nodes=nodes, seed=seed))
            consts.append(chain_constant(rep.u, rep.delta, 5, alpha))
        growth = consts[1] / consts[0] - 1.0
        ok = all(math.isfinite(c) for c in consts) and abs(growth) < 0.10
        checks.append(_check("chain_n5", {"n": 5, "alpha": alpha}, seed, [512, 1024],
                             {"c": consts[0], "c_refined": consts[1], "growth": growth},
                             PASS if ok else FAIL))
    return checks


def suite_uniqueness(seed=0, alpha=0.5, **_):
    cfg = SolverConfig(alpha=alpha, seed=seed)
    _, bracket, system = prepare(cfg)
    lo = iterate_T(system, bracket, cfg, v0=bracket.v1)
    hi = iterate_T(system, bracket, cfg, v0=bracket.v2)
    u1, u2 = assemble_u(lo.v, system.a), assemble_u(hi.v, system.a)
    cert = uniqueness_certificate(u1, u2)
    checks = [_check("multistart", {"alpha": alpha, "starts": ["v1", "v2"]}, seed, [system.size],
                     {"a_star": cert.a_star, "iterations": [lo.iterations, hi.iterations]},
                     PASS if cert.a_star - 1.0 <= 1e-5 else FAIL)]
    op = lambda w: system.apply_solution_operator(w, alpha)  # noqa: E731
    c2 = uniqueness_certificate(u1, 2.0 * u1, op, alpha)
    rel = abs(c2.exponent - alpha ** 2) / alpha ** 2
    checks.append(_check("contraction", {"alpha": alpha, "scale": 2.0}, seed, [system.size],
                         {"a_star": c2.a_star, "a_after": c2.a_after, "bound": c2.bound,
                          "exponent": c2.exponent, "relative_error": rel},
                         PASS if c2.holds and rel <= 0.01 else FAIL))
    return checks


def suite_regularity(seed=0, alphas=(0.25, 0.75), h=1e-3, **_):
    checks, exps = [], {}
    for a in alphas:
        rep = solve(SolverConfig(alpha=a, seed=seed))
        probe = regularity_probe(rep.solution.w_at, a, h)
        exps[a] = probe.exponent
        checks.append(_check(f"regularity_alpha_{a:g}", {"alpha": a, "h": h, "orders": [2, 3]},
                             seed, [len(probe.deltas)], probe.to_dict(), probe.verdict))
    lo, hi = min(alphas), max(alphas)
    checks.append(_check("regularity_ordering", {"alphas": [lo, hi]}, seed, [len(alphas)],
                         {"exponents": [exps[lo], exps[hi]]},
                         PASS if exps[lo] > exps[hi] else FAIL))
    return checks


def run_suite(name, seed=0, fixture=None):
    if name not in SUITES:
        raise DomainError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")
    parts = SUITES[:-1] if name == "all" else (name,)
    runners = {"bounds": suite_bounds, "rate": suite_rate,
               "uniqueness": suite_uniqueness, "regularity": suite_regularity}
    checks = []
    for part in parts:
        checks.extend(runners[part](seed=seed, fixture=fixture))
    failed = [c["name"] for c in checks if c["verdict"] == FAIL]
    return {"suite": name, "seed": seed, "checks": checks, "failed": failed,
            "verdict": FAIL if failed else PASS,
            "reported_only": [c["name"] for c in checks if c["verdict"] == REPORTED]}

