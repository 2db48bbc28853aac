import json
import subprocess
import sys

import pytest

from padic_feller.cli import main
from padic_feller.operators import mixed_operator, taibleson_operator, uniform_ball_density
from padic_feller.radial import RadialFunction, dumps_json
from padic_feller.symbols import PowerNorm, Symbol, taibleson


@pytest.fixture
def files(tmp_path):
    (tmp_path / "op.json").write_text(dumps_json(taibleson_operator(1.0, 2).to_json()))
    (tmp_path / "sym.json").write_text(dumps_json(taibleson(1.0, 2).to_json()))
    (tmp_path / "mixed.json").write_text(dumps_json(
        mixed_operator([0.5, 2.0], 2, 1, [uniform_ball_density(0, 2, 1)]).to_json()))
    bad = Symbol(PowerNorm(-1.0, 1.0), 2, strict=False)
    (tmp_path / "bad.json").write_text(dumps_json(bad.to_json()))
    (tmp_path / "f.csv").write_text(RadialFunction(2, 1, -1, [0.25, 1.0, 0.5], inner=0.75).to_csv())
    (tmp_path / "empty.json").write_text("")
    (tmp_path / "broken.json").write_text("{\"kind\": ")
    return tmp_path


def run(files, *args):
    return main([a.replace("@", str(files) + "/") for a in args])


def read(files, name):
    return (files / name).read_text()


def test_kernel(files):
    assert run(files, "kernel", "--symbol", "@op.json", "--t", "1", "--eps", "1e-10", "--out", "@k") == 0
    cert = json.loads(read(files, "k/certificate.json"))
    assert abs(cert["mass"] - 1) <= 1e-10 and cert["min_value"] >= -1e-10
    lines = read(files, "k/kernel.csv").splitlines()
    assert lines[0] == "k,p^k,re,im" and lines[1].startswith("-inf,0,")
    man = json.loads(read(files, "k/manifest.json"))
    assert man["passed"] and set(man["versions"]) >= {"padic_feller", "numpy", "scipy"}
    assert len(man["config_hash"]) == 64
    assert man["outputs"] == ["certificate.json", "kernel.csv", "manifest.json"]


def test_artifacts_byte_identical(files):
    for out in ("a", "b"):
        assert run(files, "simulate", "--symbol", "@op.json", "--t-grid", "0,0.5,1",
                   "--paths", "40", "--seed", "3", "--out", f"@{out}",
                   "--workers", "1" if out == "a" else "8") == 0
        assert run(files, "kernel", "--symbol", "@mixed.json", "--t", "0.3", "--out", f"@k{out}") == 0
    for name in ("paths.jsonl", "histogram.csv", "manifest.json"):
        assert read(files, f"a/{name}") == read(files, f"b/{name}")
    for name in ("kernel.csv", "certificate.json", "manifest.json"):
        assert read(files, f"ka/{name}") == read(files, f"kb/{name}")
    rec = json.loads(read(files, "a/paths.jsonl").splitlines()[1])
    assert set(rec) == {"t", "ord", "leading_digits", "norm", "path"}


def test_check_symbol(files):
    assert run(files, "check-symbol", "--symbol", "@sym.json", "--out", "@ok") == 0
    assert run(files, "check-symbol", "--symbol", "@bad.json", "--out", "@bad") == 1
    wit = json.loads(read(files, "bad/witness.json"))
    assert "report" in wit or "shape_violations" in wit
    assert not json.loads(read(files, "bad/manifest.json"))["passed"]


@pytest.mark.parametrize("name", ["empty.json", "broken.json", "missing.json"])
def test_usage_errors_write_nothing(files, name):
    assert run(files, "kernel", "--symbol", f"@{name}", "--t", "1", "--out", "@never") == 2
    assert not (files / "never").exists()


def test_bad_flags(files):
    assert run(files, "kernel", "--symbol", "@op.json", "--t", "-1", "--out", "@never") == 2
    assert run(files, "norms", "--symbol", "@sym.json", "--function", "@f.csv", "--l", "x",
               "--out", "@never") == 2
    assert run(files, "simulate", "--symbol", "@op.json", "--t-grid", "0,1,0.5",
               "--out", "@never") == 2
    with pytest.raises(SystemExit) as e:
        run(files, "kernel", "--symbol", "@op.json")
    assert e.value.code == 2
    assert not (files / "never").exists()


def test_check_pmp(files):
    assert run(files, "check-pmp", "--symbol", "@mixed.json", "--out", "@pm") == 0
    assert run(files, "check-pmp", "--symbol", "@mixed.json", "--flip", "--out", "@pf") == 1
    assert json.loads(read(files, "pf/witness.json"))["pmp"]


def test_norms(files):
    assert run(files, "norms", "--symbol", "@sym.json", "--function", "@f.csv", "--l", "0-3",
               "--out", "@n") == 0
    norms = json.loads(read(files, "n/norms.json"))
    vals = [norms[str(l)]["norm"] for l in range(4)]
    assert vals == sorted(vals)


def test_resolvent_apply_solve(files):
    assert run(files, "resolvent", "--symbol", "@op.json", "--function", "@f.csv", "--lam", "1",
               "--out", "@r") == 0
    assert json.loads(read(files, "r/report.json"))["residual"] <= 1e-9
    assert run(files, "apply", "--symbol", "@op.json", "--function", "@f.csv", "--out", "@a") == 0
    assert read(files, "a/Pf.csv").startswith("k,p^k,re,im")
    src = files / "src"
    src.mkdir()
    for i in range(5):
        (src / f"s{i}.csv").write_text(read(files, "f.csv"))
    assert run(files, "solve", "--symbol", "@op.json", "--u0", "@f.csv", "--source", "@src",
               "--T", "1", "--steps", "4", "--out", "@so") == 0
    assert (files / "so/u_0004.csv").exists()
    assert run(files, "solve", "--symbol", "@op.json", "--u0", "@f.csv", "--source", "@src",
               "--T", "1", "--steps", "8", "--out", "@never") == 2


def test_verify_feller(files):
    assert run(files, "verify-feller", "--symbol", "@op.json", "--t-set", "0.1,1", "--out", "@v") == 0
    assert run(files, "verify-feller", "--symbol", "@op.json", "--t-set", "0.1,1", "--flip",
               "--out", "@vf") == 1
    assert json.loads(read(files, "vf/witness.json"))["witnesses"]


def test_module_entry_point(files):
    out = subprocess.run([sys.executable, "-m", "padic_feller.cli", "kernel", "--symbol",
                          str(files / "empty.json"), "--t", "1"], capture_output=True, text=True)
    assert out.returncode == 2 and "empty" in out.stderr
