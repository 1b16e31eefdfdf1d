"""Validate reports produced by the CLI against the JSON schemas in docs/.

usage: validate_schemas.py <skpca binary> <schema dir> <scratch dir>
"""

import json
import pathlib
import shutil
import subprocess
import sys

import jsonschema
from referencing import Registry, Resource


def load(path):
    with open(path, encoding="utf-8") as f:
        return json.load(f)


def main():
    cli, schema_dir, work = sys.argv[1], pathlib.Path(sys.argv[2]), pathlib.Path(sys.argv[3])
    shutil.rmtree(work, ignore_errors=True)
    schemas = {name: load(schema_dir / name) for name in ("run_report.schema.json", "check_report.schema.json")}
    registry = Registry().with_resources(
        (name, Resource.from_contents(schema)) for name, schema in schemas.items()
    )
    for schema in schemas.values():
        jsonschema.Draft202012Validator.check_schema(schema)

    runs = [
        ["--phi", "identity", "--dim", "4", "--n", "120", "--trials", "3", "--check", "--trajectories"],
        ["--phi", "poly2", "--dim", "3", "--n", "80", "--init", "vstar", "--check", "--trajectories"],
        ["--phi", "rff", "--dim", "3", "--feature-dim", "10", "--n", "60", "--trials", "2"],
        ["--phi", "identity", "--dim", "3", "--n", "30", "--ratio", "1", "--bound", "guard"],
    ]
    checked = 0
    for i, args in enumerate(runs):
        out = work / f"run{i}"
        code = subprocess.run([cli, "run", *args, "--out", str(out)], capture_output=True).returncode
        if code not in (0, 1):
            sys.exit(f"run {i} exited {code}")
        run_validator = jsonschema.Draft202012Validator(schemas["run_report.schema.json"], registry=registry)
        run_validator.validate(load(out / "report.json"))
        checked += 1
        for csv in sorted(out.glob("trial_*.csv")):
            subprocess.run([cli, "check", str(csv)], capture_output=True)
            report = csv.with_suffix(".check.json")
            jsonschema.Draft202012Validator(schemas["check_report.schema.json"]).validate(load(report))
            checked += 1
    print(f"{checked} reports valid")


if __name__ == "__main__":
    main()
