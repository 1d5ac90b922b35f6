"""Validates every shipped config against the JSON schema and checks that malformed
configs are rejected."""

import copy
import pathlib
import sys
import json

import jsonschema
import yaml


def main() -> int:
    schema_path, config_dir = pathlib.Path(sys.argv[1]), pathlib.Path(sys.argv[2])
    schema = json.loads(schema_path.read_text())
    jsonschema.Draft202012Validator.check_schema(schema)
    validator = jsonschema.Draft202012Validator(schema)

    failures = 0
    configs = sorted(config_dir.glob("*.yaml"))
    if not configs:
        print(f"no configs under {config_dir}")
        return 1
    for path in configs:
        doc = yaml.safe_load(path.read_text())
        errors = list(validator.iter_errors(doc))
        print(f"{'ok  ' if not errors else 'FAIL'} {path.name}")
        for e in errors:
            print(f"     {e.json_path}: {e.message}")
        failures += bool(errors)

    base = yaml.safe_load((config_dir / "rate_regression.yaml").read_text())
    broken = []
    for mutate in (
        lambda d: d.update(unknown_key=1),
        lambda d: d.update(kind="nonsense"),
        lambda d: d["model"].update(type="garch"),
        lambda d: d["bandwidth"].update(exponent=1.5),
        lambda d: d.update(n_list=[1]),
        lambda d: d["rate"].update(estimator="loess"),
    ):
        d = copy.deepcopy(base)
        mutate(d)
        broken.append(d)
    for i, d in enumerate(broken):
        ok = validator.is_valid(d)
        print(f"{'FAIL' if ok else 'ok  '} malformed variant {i} rejected")
        failures += ok
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
