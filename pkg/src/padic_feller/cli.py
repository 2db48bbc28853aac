"""Command-line driver.

Every command writes its artifacts and a ``manifest.json`` into ``--out``.
Exit status: 0 when all requested checks pass, 1 on a check failure (a
``witness.json`` is written), 2 on a usage or input error (nothing written).
"""
from __future__ import annotations

import argparse
import hashlib
import json
import platform
import sys
from collections import Counter
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .levy import simulate_paths
from .operators import (PseudoDiffOperator, apply_P, dissipativity_check, pmp_check,
                        resolvent_residual, resolvent_solve, function_battery)
from .radial import RadialFunction, dumps_json, fmt
from .semigroup import cauchy_solve, fd_residuals, heat_kernel, verify_feller
from .spaces import SobolevWeight, WeightError, besov_norm
from .symbols import (Symbol, check_shape, classify_type, negative_definite_test,
                      random_points)


EXECUTION_ONLY = ("func", "out", "workers")


class UsageError(Exception):
    pass


# -- input helpers -------------------------------------------------------------------
def _load_json(path: str):
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise UsageError(f"cannot read {path}: {e}") from e
    if not text.strip():
        raise UsageError(f"{path} is empty")
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise UsageError(f"{path} is not valid JSON: {e}") from e


def _load_operator(path: str, strict: bool = True) -> PseudoDiffOperator:
    obj = _load_json(path)
    try:
        return PseudoDiffOperator.from_json(obj, strict=strict)
    except (KeyError, TypeError, ValueError) as e:
        raise UsageError(f"{path}: invalid symbol or operator: {e}") from e


def _load_function(path: str, p: int, n: int) -> RadialFunction:
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise UsageError(f"cannot read {path}: {e}") from e
    try:
        if path.endswith(".json"):
            obj = json.loads(text)
            obj.setdefault("p", p)
            obj.setdefault("n", n)
            return RadialFunction.from_json(obj)
        return RadialFunction.from_csv(text, p, n)
    except (KeyError, TypeError, ValueError) as e:
        raise UsageError(f"{path}: invalid radial function: {e}") from e


def _floats(text: str, name: str) -> list:
    try:
        vals = [float(x) for x in text.split(",") if x.strip()]
    except ValueError as e:
        raise UsageError(f"--{name}: expected comma-separated numbers") from e
    if not vals:
        raise UsageError(f"--{name}: empty list")
    return vals


def _l_range(text: str) -> list:
    try:
        if "-" in text:
            a, b = text.split("-", 1)
            return list(range(int(a), int(b) + 1))
        return [int(x) for x in text.split(",")]
    except ValueError as e:
        raise UsageError("--l: expected an integer, a list or a range like 0-4") from e


def _positive(value, name):
    if not value > 0:
        raise UsageError(f"--{name} must be positive")
    return value


# -- output --------------------------------------------------------------------------
class Run:
    def __init__(self, args):
        self.args = args
        self.out = Path(args.out)
        self.outputs = []
        self.certificates = {}

    def config(self) -> dict:
        # where and how fast a run executes does not change its results
        return {k: v for k, v in sorted(vars(self.args).items()) if k not in EXECUTION_ONLY}

    def write(self, name: str, text: str):
        self.out.mkdir(parents=True, exist_ok=True)
        (self.out / name).write_text(text)
        self.outputs.append(name)

    def write_json(self, name: str, obj):
        self.write(name, dumps_json(obj) + "\n")

    def finish(self, passed: bool, witness=None) -> int:
        if witness is not None and not passed:
            self.write_json("witness.json", witness)
        cfg = self.config()
        blob = json.dumps(cfg, sort_keys=True, default=str)
        manifest = {
            "command": self.args.command,
            "config": cfg,
            "config_hash": hashlib.sha256(blob.encode()).hexdigest(),
            "versions": {"padic_feller": __version__, "numpy": np.__version__,
                         "scipy": scipy.__version__, "python": platform.python_version()},
            "certificates": self.certificates,
            "outputs": sorted(self.outputs) + ["manifest.json"],
            "passed": bool(passed),
        }
        self.out.mkdir(parents=True, exist_ok=True)
        (self.out / "manifest.json").write_text(dumps_json(manifest) + "\n")
        return 0 if passed else 1


# -- commands ------------------------------------------------------------------------
def cmd_kernel(args):
    op = _load_operator(args.symbol)
    _positive(args.t, "t")
    _positive(args.eps, "eps")
    run = Run(args)
    try:
        hk = heat_kernel(op, args.t, args.eps)
    except ValueError as e:
        raise UsageError(str(e)) from e
    run.write("kernel.csv", hk.Z.to_csv())
    c = hk.certificates
    ok_mass = abs(c["mass"] - c["expected_mass"]) <= max(1e-10, 10 * args.eps)
    ok_pos = c["min_value"] >= -1e-10
    cert = dict(c, mass_ok=ok_mass, positivity_ok=ok_pos)
    run.write_json("certificate.json", cert)
    run.certificates["kernel"] = cert
    return run.finish(ok_mass and ok_pos, witness={"certificate": cert})


def cmd_solve(args):
    op = _load_operator(args.symbol)
    u0 = _load_function(args.u0, op.p, op.n)
    _positive(args.T, "T")
    if args.steps < 1:
        raise UsageError("--steps must be >= 1")
    source = None
    if args.source and args.source != "none":
        files = sorted(Path(args.source).glob("*.csv"))
        if len(files) != args.steps + 1:
            raise UsageError(f"--source needs {args.steps + 1} CSV files, found {len(files)}")
        source = [_load_function(str(f), op.p, op.n) for f in files]
    try:
        sol = cauchy_solve(op, u0, source, T=args.T, M=args.steps, scheme=args.scheme)
    except ValueError as e:
        raise UsageError(str(e)) from e
    run = Run(args)
    for i, u in enumerate(sol.u):
        run.write(f"u_{i:04d}.csv", u.to_csv())
    res = fd_residuals(op, sol, source)
    report = {"times": [float(t) for t in sol.times], "scheme": sol.scheme,
              "quadrature_error": sol.quadrature_error, "fd_residuals": res,
              "max_fd_residual": max(res) if res else 0.0}
    run.write_json("report.json", report)
    run.certificates["solve"] = {"max_fd_residual": report["max_fd_residual"]}
    return run.finish(True)


def cmd_simulate(args):
    op = _load_operator(args.symbol)
    grid = _floats(args.t_grid, "t-grid")
    if args.paths < 1:
        raise UsageError("--paths must be >= 1")
    try:
        paths = simulate_paths(op, grid, args.paths, args.seed, L=args.digits, workers=args.workers)
    except ValueError as e:
        raise UsageError(str(e)) from e
    run = Run(args)
    lines = [json.dumps(r, sort_keys=True) for path in paths for r in path.records()]
    run.write("paths.jsonl", "\n".join(lines) + "\n")
    counts = Counter(-r["ord"] if r["ord"] is not None else None
                     for r in (path.records()[-1] for path in paths))
    finite = sorted(k for k in counts if k is not None)
    rows = ["k,count,frequency"]
    for k in ([None] if None in counts else []) + finite:
        rows.append(f"{'-inf' if k is None else k},{counts[k]},{fmt(counts[k] / len(paths))}")
    run.write("histogram.csv", "\n".join(rows) + "\n")
    run.certificates["simulate"] = {"paths": args.paths, "steps": len(grid) - 1}
    return run.finish(True)


def cmd_check_symbol(args):
    op = _load_operator(args.symbol, strict=False)
    run = Run(args)
    rng = np.random.default_rng(args.seed)
    reports = []
    witness = None
    for _, sym in op.terms:
        shape = check_shape(sym)
        defin = []
        for _ in range(args.sets):
            pts = random_points(sym.p, sym.n, args.points, rng, vmin=-args.radius, vmax=args.radius)
            rep = negative_definite_test(sym, pts)
            defin.append(rep.verdict)
            if rep.verdict == "refuted" and witness is None:
                witness = {"symbol": sym.to_json(), "report": rep.to_json()}
        typ = None
        if sym.strict or not shape:
            try:
                typ = classify_type(sym).to_json()
            except (KeyError, ValueError) as e:
                typ = {"ok": False, "detail": str(e)}
        if shape and witness is None:
            witness = {"symbol": sym.to_json(), "shape_violations": shape}
        reports.append({"symbol": sym.to_json(), "shape_violations": shape,
                        "definiteness": {v: defin.count(v) for v in sorted(set(defin))},
                        "type": typ})
    passed = witness is None and all(r["type"] is None or r["type"]["ok"] for r in reports)
    if witness is None and not passed:
        witness = {"type_reports": [r["type"] for r in reports]}
    run.write_json("report.json", {"terms": reports, "passed": passed})
    run.certificates["check_symbol"] = {"passed": passed}
    return run.finish(passed, witness)


def cmd_check_pmp(args):
    op = _load_operator(args.symbol)
    if args.flip:
        op = op.flipped()
    run = Run(args)
    battery = function_battery(op.p, op.n, np.random.default_rng(args.seed))
    pmp = pmp_check(op, battery)
    diss = [dissipativity_check(op, lam, battery) for lam in (0.1, 1.0, 10.0)]
    report = {"pmp": pmp.to_json(), "dissipativity": [d.to_json() for d in diss]}
    passed = pmp.passed and all(d.passed for d in diss)
    run.write_json("report.json", report)
    run.certificates["check_pmp"] = {"pmp": pmp.passed, "dissipativity": [d.passed for d in diss]}
    witness = {"pmp": pmp.witnesses, "dissipativity": [v for d in diss for v in d.violations]}
    return run.finish(passed, witness)


def cmd_norms(args):
    op = _load_operator(args.symbol)
    psi = op.terms[0][1] if len(op.terms) == 1 else op.symbol()
    f = _load_function(args.function, op.p, op.n)
    ls = _l_range(args.l)
    out = {}
    try:
        for l in ls:
            rep = besov_norm(f, SobolevWeight.normalized(psi, l))
            out[str(l)] = {"norm": rep.value, "remainder": rep.remainder, "finite": rep.finite}
    except WeightError as e:
        raise UsageError(str(e)) from e
    run = Run(args)
    run.write_json("norms.json", out)
    run.certificates["norms"] = {"finite": all(v["finite"] for v in out.values())}
    return run.finish(True)


def cmd_resolvent(args):
    op = _load_operator(args.symbol)
    f = _load_function(args.function, op.p, op.n)
    _positive(args.lam, "lam")
    u = resolvent_solve(op, args.lam, f)
    res = resolvent_residual(op, args.lam, u, f)
    run = Run(args)
    run.write("u.csv", u.to_csv())
    ok = res <= args.tol
    run.write_json("report.json", {"lambda": args.lam, "residual": res, "tolerance": args.tol,
                                   "passed": ok})
    run.certificates["resolvent"] = {"residual": res}
    return run.finish(ok, {"residual": res})


def cmd_verify_feller(args):
    op = _load_operator(args.symbol)
    if args.flip:
        op = op.flipped()
    ts = _floats(args.t_set, "t-set")
    run = Run(args)
    rep = verify_feller(op, ts=ts, eps=args.eps)
    run.write_json("report.json", rep)
    run.certificates["verify_feller"] = {"passed": rep["passed"]}
    return run.finish(rep["passed"], {"witnesses": rep["witnesses"]})


def cmd_apply(args):
    op = _load_operator(args.symbol)
    f = _load_function(args.function, op.p, op.n)
    Pf = apply_P(op, f)
    run = Run(args)
    run.write("Pf.csv", Pf.to_csv())
    run.certificates["apply"] = {"sup_error": Pf.sup_bound}
    return run.finish(True)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="padic-feller", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, func, help_):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--symbol", required=True, help="symbol or operator JSON file")
        sp.add_argument("--out", default=".", help="output directory")
        sp.set_defaults(func=func)
        return sp

    sp = add("kernel", cmd_kernel, "heat kernel Z_t as CSV plus certificate")
    sp.add_argument("--t", type=float, required=True)
    sp.add_argument("--eps", type=float, default=1e-12)

    sp = add("solve", cmd_solve, "Cauchy problem on a uniform time grid")
    sp.add_argument("--u0", required=True, help="initial datum CSV")
    sp.add_argument("--source", default="none", help="directory of per-step CSVs, or none")
    sp.add_argument("--T", type=float, required=True)
    sp.add_argument("--steps", type=int, default=64)
    sp.add_argument("--scheme", choices=("trapezoid", "simpson"), default="trapezoid")

    sp = add("simulate", cmd_simulate, "Levy paths as JSON lines plus a norm histogram")
    sp.add_argument("--t-grid", required=True, help="comma-separated times starting at 0")
    sp.add_argument("--paths", type=int, default=100)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--digits", type=int, default=32)
    sp.add_argument("--workers", type=int, default=1)

    sp = add("check-symbol", cmd_check_symbol, "definiteness and type checks")
    sp.add_argument("--points", type=int, default=8)
    sp.add_argument("--sets", type=int, default=20)
    sp.add_argument("--radius", type=int, default=2, help="point valuations in [-radius, radius]")
    sp.add_argument("--seed", type=int, default=0)

    sp = add("check-pmp", cmd_check_pmp, "positive maximum principle and dissipativity")
    sp.add_argument("--flip", action="store_true", help="test the sign-flipped operator")
    sp.add_argument("--seed", type=int, default=0)

    sp = add("norms", cmd_norms, "Sobolev norms of a radial function")
    sp.add_argument("--function", required=True)
    sp.add_argument("--l", default="0-4")

    sp = add("resolvent", cmd_resolvent, "solve (lam - P) u = f")
    sp.add_argument("--function", required=True)
    sp.add_argument("--lam", type=float, required=True)
    sp.add_argument("--tol", type=float, default=1e-9)

    sp = add("verify-feller", cmd_verify_feller, "semigroup law, continuity and positivity")
    sp.add_argument("--t-set", default="0.1,1,10")
    sp.add_argument("--eps", type=float, default=1e-12)
    sp.add_argument("--flip", action="store_true")

    sp = add("apply", cmd_apply, "apply P to a radial function")
    sp.add_argument("--function", required=True)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
