"""Runs the rw tool on a fixed set of inputs and validates every JSON
document against the schemas in schemas/.

Usage: validate_reports.py RW_BINARY SCHEMA_DIR
"""
import json
import pathlib
import subprocess
import sys
import tempfile

import jsonschema
from referencing import Registry, Resource


def load_registry(schema_dir):
    resources = []
    for path in sorted(schema_dir.glob("*.schema.json")):
        doc = json.loads(path.read_text())
        resources.append((doc["$id"], Resource.from_contents(doc)))
    return Registry().with_resources(resources)


def run(binary, args, expect_code):
    proc = subprocess.run([binary, *args], capture_output=True, text=True, check=False)
    if proc.returncode != expect_code:
        raise SystemExit(f"{args}: exit {proc.returncode}, expected {expect_code}\n{proc.stderr}")
    return json.loads(proc.stdout)


def main():
    binary, schema_dir = sys.argv[1], pathlib.Path(sys.argv[2])
    registry = load_registry(schema_dir)

    def validator(name):
        schema = registry.get_or_retrieve(f"rw/{name}.schema.json").value.contents
        cls = jsonschema.validators.validator_for(schema)
        return cls(schema, registry=registry)

    construction = run(binary, ["construct", "--group", "2^2:2,3^1:3,5^1:1", "--k", "2"], 0)
    with tempfile.NamedTemporaryFile("w", suffix=".json", delete=False) as fh:
        json.dump(construction, fh)
        construction_path = fh.name

    cases = [
        ("classification", ["classify", "--group", "2^1:2,3^1:2,5^1:1", "--k", "3"], 0),
        ("classification", ["classify", "--group", "2^1:1", "--k", "2"], 0),
        ("construction", ["construct", "--group", "2^1:3", "--k", "8", "--case", "3"], 0),
        ("construction", ["construct", "--group", "3^2:1,5^1:1", "--k", "4", "--case", "2"], 0),
        ("verification", ["verify", "--construction", construction_path], 0),
        ("oracle", ["oracle", "--group", "2^1:1", "--k", "1", "--n", "3", "--psi", "identity"], 0),
        ("oracle", ["oracle", "--group", "5^1:1", "--k", "1", "--n", "3", "--case", "1"], 0),
        ("report", ["report", "--group", "5^1:1", "--k", "1", "--case", "1", "--n", "3"], 0),
        ("report", ["report", "--group", "7^1:1", "--k", "2", "--case", "2", "--n", "2"], 0),
        ("report", ["report", "--group", "2^1:2,3^1:1", "--k", "4", "--case", "3"], 0),
        ("error", ["classify", "--group", "", "--k", "1"], 2),
        ("error", ["oracle", "--group", "5^1:1", "--k", "2", "--n", "4"], 3),
    ]
    failures = 0
    for schema_name, args, code in cases:
        doc = run(binary, args, code)
        errors = sorted(validator(schema_name).iter_errors(doc), key=lambda e: list(e.path))
        status = "ok" if not errors else "INVALID"
        print(f"{status:8s} {schema_name:15s} {' '.join(args)}")
        for err in errors:
            print(f"    {list(err.path)}: {err.message}")
        failures += bool(errors)
    validator("construction").validate(construction)
    # the schemas must reject malformed documents too
    broken = dict(construction, M="1,,2")
    broken_case = dict(construction, case=4)
    for doc in (broken, broken_case, {"schema": "rw.construction/1"}):
        if validator("construction").is_valid(doc):
            print("INVALID  construction schema accepted a malformed document")
            failures += 1
    pathlib.Path(construction_path).unlink()
    if failures:
        raise SystemExit(f"{failures} document(s) failed schema validation")


if __name__ == "__main__":
    main()
