"""End-to-end run of the command line tool on simulated data.

simulate -> estimate -> bounds -> validate, all in a temporary directory.
"""
import json
import subprocess
import sys
import tempfile
from pathlib import Path


def run(*args):
    cmd = [sys.executable, "-m", "specbound.cli", *args]
    out = subprocess.run(cmd, capture_output=True, text=True)
    print("$ specbound", " ".join(args), "->", out.returncode)
    return out


with tempfile.TemporaryDirectory() as tmp:
    tmp = Path(tmp)
    (tmp / "sim.json").write_text(json.dumps({"model": {"kind": "ar", "ar": [0.5]}, "length": 20_000}))
    run("simulate", "--config", str(tmp / "sim.json"), "--seed", "4", "--out", str(tmp / "sim"))
    # Sample lags need an order; it comes from a config file.
    (tmp / "est.json").write_text(json.dumps({"order": 2}))
    run("estimate", "--config", str(tmp / "est.json"), "--input", str(tmp / "sim" / "series.csv"),
        "--out", str(tmp / "est"))
    summary = json.loads((tmp / "est" / "summary.json").read_text())
    print("  sample lags:", [round(x, 4) for x in summary["lags"]])

    (tmp / "b.json").write_text(json.dumps({"kind": "noise", "clean_lags": summary["lags"],
                                            "noise_sigma2": 0.1}))
    run("bounds", "--config", str(tmp / "b.json"), "--out", str(tmp / "b"))
    print("  noise bound:", round(json.loads((tmp / "b" / "report.json").read_text())["bound_value"], 4))

    # Invalid input: the error comes back as JSON with exit code 2.
    print(" ", run("estimate", "--lags", "1,2", "--json-errors", "--out", str(tmp / "x")).stdout.strip())

    (tmp / "v.json").write_text(json.dumps({"kind": "noise", "noise_sigma2": 0.25, "N": 100_000,
                                            "trials": 40}))
    # The noise bound ignores sampling error, so N must be large for it to hold.
    run("validate", "--config", str(tmp / "v.json"), "--seed", "9", "--out", str(tmp / "v"))
    v = json.loads((tmp / "v" / "validation.json").read_text())
    print(f"  validation: {v['violations']} violations in {v['evaluated']} trials, passed={v['passed']}")
