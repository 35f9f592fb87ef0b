"""Validates scenarios and finslab --json output against the published schemas."""
import json
import pathlib
import subprocess
import sys
import tempfile

import jsonschema

finslab, root = sys.argv[1], pathlib.Path(sys.argv[2])
report_schema = json.loads((root / "docs/report.schema.json").read_text())
scenario_schema = json.loads((root / "docs/scenario.schema.json").read_text())
jsonschema.Draft202012Validator.check_schema(report_schema)
jsonschema.Draft202012Validator.check_schema(scenario_schema)


def run(*args):
    out = subprocess.run([finslab, *args], capture_output=True, text=True)
    if out.returncode not in (0, 1):
        sys.exit(f"finslab {' '.join(args)} exited {out.returncode}: {out.stderr}")
    return json.loads(out.stdout)


count = 0
for path in sorted((root / "scenarios").glob("*.json")):
    jsonschema.validate(json.loads(path.read_text()), scenario_schema)
    for cmd in ("verify", "decompose"):
        report = run(cmd, str(path), "--json")
        jsonschema.validate(report, report_schema)
        assert report["tool_version"], path
        count += 1

for args in (["akemann", "--dims", "1,2", "--trials", "20", "--json"],
             ["counterexample", "--algebra", "1,2", "--fiber", "1", "--json"],
             ["counterexample", "--algebra", "1", "--fiber", "inf", "--json"]):
    jsonschema.validate(run(*args), report_schema)
    count += 1

with tempfile.TemporaryDirectory() as d:
    subprocess.run([finslab, "gen", "--seed", "4", "--count", "3", "--out", d], check=True, capture_output=True)
    for inst in sorted(pathlib.Path(d).glob("instance_*.json")):
        jsonschema.validate({"module": json.loads(inst.read_text())["module"]}, scenario_schema)
        count += 1

print(f"{count} documents valid")
