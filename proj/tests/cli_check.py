"""CLI contract: example invocations, exit codes, schema validity, determinism."""
import csv
import io
import json
import os
import subprocess
import sys
import tempfile

import jsonschema

exe, schema_dir = sys.argv[1], sys.argv[2]
failures = []


def schema(name):
    with open(os.path.join(schema_dir, name + ".schema.json")) as f:
        return json.load(f)


def run(*args, env=None):
    return subprocess.run([exe, *args], capture_output=True, text=True, env=env, timeout=300)


def check(cond, what):
    print(("ok   " if cond else "FAIL ") + what)
    if not cond:
        failures.append(what)


def valid(doc, name):
    try:
        jsonschema.validate(doc, schema(name))
        return True
    except jsonschema.ValidationError as e:
        print("     ", e.message)
        return False


# distance example, twice for byte identity
args = ["distance", "--metric", "cylinder", "--x", "0,0", "--y", "4,3.141592653589793", "--json"]
a, b = run(*args), run(*args)
check(a.returncode == 0, "distance exits 0")
check(a.stdout == b.stdout, "distance output is byte-identical across runs")
d = json.loads(a.stdout)
check(valid(d, "distance"), "distance output validates")
check(d["relation"] == "chronological" and len(d["maximizers"]) == 2, "distance has two maximizers")
check(abs(d["d"] - (16 - 3.141592653589793 ** 2) ** 0.5) < 1e-12, "distance value")

with tempfile.TemporaryDirectory() as tmp:
    out = os.path.join(tmp, "out.csv")
    r = run("geodesic", "--metric", "minkowski2", "--x", "0,0", "--v", "1,0.5", "--tmax", "4", "--csv", out)
    check(r.returncode == 0, "geodesic exits 0")
    rows = list(csv.reader(open(out)))
    check(rows[0][:3] == ["t", "x0", "x1"], "geodesic CSV header")
    last = [float(v) for v in rows[-1]]
    check(last[0] == 4.0 and abs(last[1] - 4) < 1e-12 and abs(last[2] - 2) < 1e-12, "geodesic last row")

    cfg = os.path.join(tmp, "run.json")
    json.dump({"metric": "warped-cosh", "integrator_tol": 1e-11}, open(cfg, "w"))
    env = dict(os.environ, LORKAM_CONFIG=cfg)
    r = run("distance", "--x", "0,0", "--y", "2,0.5", env=env)
    check(r.returncode == 0 and valid(json.loads(r.stdout), "distance"), "config from LORKAM_CONFIG")
    direct = run("distance", "--metric", "warped-cosh", "--x", "0,0", "--y", "2,0.5")
    check(json.loads(r.stdout)["d"] == json.loads(direct.stdout)["d"] or
          abs(json.loads(r.stdout)["d"] - json.loads(direct.stdout)["d"]) < 1e-10, "config metric honoured")
    json.dump({"metric": "cylinder", "integrator_tol": -1}, open(cfg, "w"))
    check(run("distance", "--config", cfg, "--x", "0,0", "--y", "4,1").returncode == 64, "bad tolerance is a usage error")

r = run("cutlocus", "--metric", "cylinder", "--x", "0,0", "--dirs", "5")
check(r.returncode == 0 and valid(json.loads(r.stdout), "cutlocus"), "cutlocus output validates")

for y, verdict in [("3,0", "InAubryUpToHorizon"), ("3,1", "NotInAubry")]:
    r = run("aubry", "--metric", "cylinder", "--x", "0,0", "--y", y)
    doc = json.loads(r.stdout)
    check(r.returncode == 0 and valid(doc, "aubry") and doc["verdict"] == verdict, f"aubry {y} -> {verdict}")
r = run("aubry", "--metric", "warped-2cos-slab", "--x", "0,0", "--y", "2,0")
check(json.loads(r.stdout)["verdict"] == "DomainIncomplete", "aubry on the slab")

args = ["lo", "--metric", "cylinder", "--s", "0.05", "--t", "1.05", "--x", "0,0", "--y", "5,3.141592653589793"]
a, b = run(*args), run(*args)
check(a.returncode == 0 and valid(json.loads(a.stdout), "lo_evaluation"), "lo output validates")
check(a.stdout == b.stdout, "lo output is byte-identical across runs")
r = run("lo", "--metric", "cylinder", "--s", "0.05", "--t", "1.05", "--x", "0,0", "--grid", "4.9,5.1,3.0,3.3,7")
check(r.returncode == 0 and valid(json.loads(r.stdout), "regularity_report"), "lo --grid validates")

r = run("retract", "--metric", "cylinder", "--mode", "point", "--x", "0,0", "--y", "4,1", "--tau-samples", "3")
rows = list(csv.reader(io.StringIO(r.stdout)))
check(r.returncode == 0 and len(rows) == 4 and abs(float(rows[-1][3]) - 4 * 3.141592653589793) < 1e-8,
      "retract point trace ends at the cut point")
r = run("retract", "--metric", "cylinder", "--mode", "cut2nu", "--x", "0,0", "--y",
        "3.141592653589793,3.141592653589793", "--tau-samples", "3")
rows = list(csv.reader(io.StringIO(r.stdout)))
check(r.returncode == 0 and rows[-1][-1] == "1", "cut2nu ends in NU")

# exit codes
check(run("distance", "--metric", "cylinder", "--x", "0,0", "--y", "1,2").returncode == 2, "unrelated pair exits 2")
check(run("retract", "--metric", "cylinder", "--x", "0,0", "--y", "4,0").returncode == 2, "Aubry input exits 2")
check(run("frobnicate").returncode == 64, "unknown subcommand exits 64")
check(run("distance", "--metric", "cylinder", "--x", "0").returncode == 64, "missing option exits 64")
check(run("distance", "--metric", "nope", "--x", "0,0", "--y", "1,0").returncode == 64, "unknown metric exits 64")
check(run("lo", "--metric", "cylinder", "--s", "0.05", "--t", "1.05", "--x", "0,0", "--y",
          "0.5,3.14159").returncode == 2, "LO outside the chronological future exits 2")

r = run("verify", "--suite", "3,10", "--seed", "7")
check(r.returncode == 0 and r.stdout.count("[PASS]") == 2, "verify subset passes")

print(f"{len(failures)} failure(s)")
sys.exit(1 if failures else 0)
