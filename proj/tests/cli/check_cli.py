"""Checks for collapse_sim outputs, driven from ctest."""

import argparse
import json
import math
import subprocess
import sys
import tempfile
from pathlib import Path


def run(cmd, expect):
    proc = subprocess.run(cmd, capture_output=True, text=True)
    if proc.returncode != expect:
        sys.exit(f"{' '.join(cmd)}: exit {proc.returncode}, expected {expect}\n{proc.stdout}{proc.stderr}")
    return proc


def check_report(exe, cfg):
    with tempfile.TemporaryDirectory() as out:
        run([exe, "run", cfg, "--out", out], 0)
        rep = json.loads((Path(out) / "report.json").read_text())
        fc = rep["frame_consistency"]
        assert isinstance(fc["max_abs"], float) and fc["max_abs"] >= 0.0, fc
        assert rep["pass"] is True
        for name in ("correlators_t.csv", "correlators_eta.csv"):
            assert (Path(out) / name).stat().st_size > 0


def check_deterministic(exe, cfg):
    blobs = []
    for _ in range(2):
        with tempfile.TemporaryDirectory() as out:
            run([exe, "run", cfg, "--out", out, "--seed", "7"], 1)
            blobs.append({p.name: p.read_bytes() for p in Path(out).iterdir()})
    if blobs[0] != blobs[1]:
        sys.exit("two runs with the same config and seed differ")


def chart(t, x, a):
    return t - a * math.sin(t) * math.cos(x), x - a * math.sin(x) * math.cos(t)


def check_grid(exe, a):
    with tempfile.TemporaryDirectory() as out:
        path = Path(out) / "grid.csv"
        run([exe, "emit-grid", "--A", str(a), "--out", str(path), "--resolution", "101"], 0)
        lines = path.read_text().splitlines()
    assert lines[0] == "family,t,x,eta,xi"
    worst = 0.0
    families = {}
    for line in lines[1:]:
        fam, t, x, eta, xi = line.split(",")
        t, x, eta, xi = map(float, (t, x, eta, xi))
        e, s = chart(t, x, a)
        worst = max(worst, abs(e - eta), abs(s - xi))
        families.setdefault(fam, []).append((t, x, eta, xi))
    if worst > 1e-12:
        sys.exit(f"tabulated coordinates off by {worst:.2e}")
    if a == 0.0:
        # straight lines: constant-eta curves have constant t, constant-xi curves constant x
        for t, x, eta, xi in families["eta"]:
            assert abs(t - eta) <= 1e-12
        for t, x, eta, xi in families["xi"]:
            assert abs(x - xi) <= 1e-12
    assert len(families["eta"]) == 9 * 101 and len(families["xi"]) == 13 * 101


def check_verify_json(exe):
    with tempfile.TemporaryDirectory() as out:
        run([exe, "verify", "--out", out], 0)
        rep = json.loads((Path(out) / "verify.json").read_text())
    assert rep["all_pass"] is True
    assert rep["resolved_meter"] != "none"


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("exe")
    ap.add_argument("check", choices=["report", "deterministic", "grid", "verify", "exit"])
    ap.add_argument("--config")
    ap.add_argument("--A", type=float, default=0.5)
    ap.add_argument("--code", type=int, default=0)
    argv = sys.argv[1:]
    rest = argv[argv.index("--") + 1:] if "--" in argv else []
    args = ap.parse_args(argv[:len(argv) - len(rest) - (1 if rest else 0)])
    if args.check == "exit":
        run([args.exe, *rest], args.code)
    elif args.check == "report":
        check_report(args.exe, args.config)
    elif args.check == "deterministic":
        check_deterministic(args.exe, args.config)
    elif args.check == "grid":
        check_grid(args.exe, args.A)
    else:
        check_verify_json(args.exe)


if __name__ == "__main__":
    main()
