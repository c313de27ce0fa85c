"""Command-line front end: ``solve``, ``probe-green`` and ``verify``.

Exit codes: 0 ok, 1 usage, 2 convergence, 3 bracket, 4 resources, 5 verification.
Report JSON is a pure function of (command, config, seed); wall-clock time and
paths go to manifest.json only.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .domains import UnitBall, domain_from_dict
from .errors import (BracketViolationError, ConvergenceError, DomainError, ResourceError,
                     SingularPlateError)
from .plate import sign_probe
from .solver import SolverConfig, solve
from .suites import SUITES, run_suite

EXIT_OK, EXIT_USAGE, EXIT_VERIFY = 0, 1, 5
FIELD_COLUMNS = ("x", "y", "delta", "u", "v", "u_over_delta2")
CONFIG_FIELDS = set(SolverConfig.__dataclass_fields__) | {"domain", "h"}


class UsageError(SingularPlateError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


@dataclass
class RunManifest:
    command: str
    config: dict
    seed: int
    version: str = __version__
    inputs: list = field(default_factory=list)
    outputs: list = field(default_factory=list)
    wall_clock: float = 0.0

    @property
    def digest(self) -> str:
        key = {"command": self.command, "config": self.config, "seed": self.seed,
               "version": self.version}
        return hashlib.sha256(dumps(key).encode()).hexdigest()[:16]

    def to_dict(self):
        return {**asdict(self), "id": self.digest}


def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    raise TypeError(f"not serializable: {type(obj).__name__}")


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, default=_jsonable, allow_nan=True)


def write_json(path: Path, obj):
    path.write_text(dumps(obj) + "\n")


# ---------------------------------------------------------------------------
# configuration

def load_config(path) -> dict:
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if not isinstance(data, dict):
        raise UsageError(f"{path}: top level must be an object")
    unknown = sorted(set(data) - CONFIG_FIELDS)
    if unknown:
        raise UsageError(f"{path}: unknown field(s) {', '.join(unknown)}")
    return data


def parse_domain(text_or_dict):
    data = json.loads(text_or_dict) if isinstance(text_or_dict, str) else text_or_dict
    try:
        return domain_from_dict(data)
    except (KeyError, TypeError) as exc:
        raise UsageError(f"domain: malformed description {data!r} ({exc})") from None


def solver_config(raw: dict) -> SolverConfig:
    raw = dict(raw)
    dom = raw.pop("domain", None)
    h = raw.pop("h", None)
    if dom is not None:
        domain = parse_domain(dom)
        if not isinstance(domain, UnitBall):
            raise UsageError("solve supports the unit ball only (radial solver)")
        raw["dimension"] = domain.n
    if h is not None:
        order = raw.get("panel_order", 8)
        raw["n_nodes"] = order * max(8, math.ceil(1.0 / (order * float(h))))
    for name, value in raw.items():
        expected = SolverConfig.__dataclass_fields__[name].type
        if value is not None and "float" in expected and not isinstance(value, (int, float)):
            raise UsageError(f"config field {name!r}: expected a number, got {value!r}")
        if value is not None and expected == "int" and not isinstance(value, int):
            raise UsageError(f"config field {name!r}: expected an integer, got {value!r}")
    if "alpha" not in raw:
        raise UsageError("config field 'alpha' is required")
    return SolverConfig(**raw)


# ---------------------------------------------------------------------------
# commands

def cmd_solve(args) -> int:
    raw = load_config(args.config) if args.config else {}
    for key in ("alpha", "seed", "h"):
        if getattr(args, key) is not None:
            raw[key] = getattr(args, key)
    if args.domain is not None:
        raw["domain"] = json.loads(args.domain)
    cfg = solver_config(raw)
    out = _outdir(args.out)
    manifest = RunManifest("solve", cfg.to_dict(), cfg.seed,
                           inputs=[str(args.config)] if args.config else [])
    start = time.perf_counter()
    code = EXIT_OK
    try:
        rep = solve(cfg)
        body = {"status": "converged", **rep.to_dict()}
        _write_field(out / "field.csv", rep, manifest.digest)
        manifest.outputs.append(str(out / "field.csv"))
    except ConvergenceError as exc:
        body = {"status": "convergence_failure", "error": str(exc), "step_history": exc.history,
                "config": cfg.to_dict()}
        code = exc.exit_code
    except BracketViolationError as exc:
        body = {"status": "bracket_violation", "error": str(exc), "config": cfg.to_dict()}
        code = exc.exit_code
    body["manifest"] = manifest.digest
    write_json(out / "report.json", body)
    manifest.outputs.insert(0, str(out / "report.json"))
    _finish(out, manifest, start)
    if code:
        print(body["error"], file=sys.stderr)
    return code


def cmd_probe_green(args) -> int:
    if args.domain is None:
        raise UsageError("probe-green needs --domain")
    domain = parse_domain(args.domain)
    if domain.dimension != 2 and not isinstance(domain, UnitBall):
        raise UsageError("probe-green supports 2-D domains and balls")
    h = args.h if args.h is not None else getattr(domain, "h", None)
    if h is None and not isinstance(domain, UnitBall):
        raise UsageError("probe-green needs --h (or h in the domain JSON)")
    seed = args.seed if args.seed is not None else 0
    out = _outdir(args.out)
    config = {"domain": domain.to_dict(), "h": h, "mode": args.mode}
    manifest = RunManifest("probe-green", config, seed)
    start = time.perf_counter()
    try:
        rep = sign_probe(domain, h, mode=args.mode, seed=seed)
    except ResourceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    write_json(out / "sign_report.json", {**rep.to_dict(), "manifest": manifest.digest})
    manifest.outputs.append(str(out / "sign_report.json"))
    _finish(out, manifest, start)
    return EXIT_OK


def cmd_verify(args) -> int:
    seed = args.seed if args.seed is not None else 0
    out = _outdir(args.out)
    config = {"suite": args.suite, "fixture": _fixture_id(args.fixture)}
    manifest = RunManifest("verify", config, seed,
                           inputs=[str(args.fixture)] if args.fixture else [])
    start = time.perf_counter()
    summary = run_suite(args.suite, seed=seed, fixture=args.fixture)
    summary["manifest"] = manifest.digest
    path = out / f"verify_{args.suite}.json"
    write_json(path, summary)
    manifest.outputs.append(str(path))
    _finish(out, manifest, start)
    for check in summary["checks"]:
        print(f"{check['verdict']:8s} {check['name']}")
    if summary["failed"]:
        print(f"failed: {', '.join(summary['failed'])}", file=sys.stderr)
        return EXIT_VERIFY
    return EXIT_OK


def _fixture_id(path):
    """Content hash of a fixture directory, so reports do not depend on where it lives."""
    if path is None:
        return None
    h = hashlib.sha256()
    for name in ("report.json", "field.csv"):
        h.update((Path(path) / name).read_bytes())
    return h.hexdigest()[:16]


def _outdir(path) -> Path:
    out = Path(path or ".")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _finish(out: Path, manifest: RunManifest, start: float):
    manifest.wall_clock = time.perf_counter() - start
    write_json(out / "manifest.json", manifest.to_dict())


def _write_field(path: Path, rep, digest: str):
    with open(path, "w", newline="") as fh:
        fh.write(f"# manifest {digest}\n")
        out = csv.writer(fh)
        out.writerow(FIELD_COLUMNS)
        for r, d, u, v in zip(rep.r, rep.delta, rep.u, rep.v):
            out.writerow([f"{r:.17g}", "0", f"{d:.17g}", f"{u:.17g}", f"{v:.17g}",
                          f"{u / d ** 2:.17g}"])


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="singular-plate", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("solve", help="fixed-point solve on the unit ball")
    s.add_argument("--config", help="JSON configuration file")
    s.add_argument("--domain", help='domain JSON, e.g. \'{"kind": "ball", "n": 2}\'')
    s.add_argument("--alpha", type=float)
    s.add_argument("--h", type=float, help="target radial node spacing")
    s.add_argument("--seed", type=int)
    s.add_argument("--out", default=".")
    s.set_defaults(func=cmd_solve)

    g = sub.add_parser("probe-green", help="sign of the discrete clamped-plate Green function")
    g.add_argument("--domain", required=True)
    g.add_argument("--h", type=float)
    g.add_argument("--mode", choices=("dense", "subsample"), default="dense")
    g.add_argument("--seed", type=int)
    g.add_argument("--out", default=".")
    g.set_defaults(func=cmd_probe_green)

    v = sub.add_parser("verify", help="run a verification suite")
    v.add_argument("--suite", choices=SUITES, required=True)
    v.add_argument("--fixture", help="solve output directory to check instead of fresh solves")
    v.add_argument("--seed", type=int)
    v.add_argument("--out", default=".")
    v.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except json.JSONDecodeError as exc:
        print(f"error: malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}",
              file=sys.stderr)
        return EXIT_USAGE
    except (UsageError, DomainError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SingularPlateError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
