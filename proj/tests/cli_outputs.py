"""Runs every subcommand twice, validates JSON sidecars against the shipped
schemas, checks the CSV layout and requires byte-identical reruns."""

import json
import subprocess
import sys
import tempfile
from pathlib import Path

import jsonschema

SCHEMA_FOR = {
    "mode.json": "mode",
    "two-photon.json": "spectrum",
    "single-photon.json": "spectrum",
    "mc.json": "mc",
    "fit.json": "fit",
    "budget.json": "budget",
}
CSV_HEADERS = {
    "mode_sweep.csv": "diameter_nm,wavelength_nm,n_eff,n_g,eta,xi_nm",
    "two-photon.csv": "detuning_mhz,transmission",
    "single-photon.csv": "detuning_mhz,transmission",
    "mc.csv": "detuning_mhz,transmission",
}


def run_all(tool: str, project: Path, out: Path) -> None:
    configs = project / "data" / "configs"
    default = str(configs / "paper_default.yaml")
    commands = [
        ["mode", "-c", default, "--sweep"],
        ["simulate", "two-photon", "-c", default],
        ["simulate", "single-photon", "-c", default],
        ["mc", "-c", str(configs / "mc_default.yaml"), "-n", "4000"],
        ["fit", "-c", default, "-i", str(out / "two-photon.csv")],
        ["budget", "-c", default],
    ]
    for args in commands:
        proc = subprocess.run([tool, *args, "-o", str(out)], capture_output=True, text=True)
        if proc.returncode != 0:
            raise SystemExit(f"{' '.join(args)} exited {proc.returncode}: {proc.stderr}")


def check_outputs(project: Path, out: Path) -> list[str]:
    errors = []
    for name, schema_name in SCHEMA_FOR.items():
        schema = json.loads((project / "schemas" / f"{schema_name}.schema.json").read_text())
        try:
            jsonschema.validate(json.loads((out / name).read_text()), schema)
        except jsonschema.ValidationError as e:
            errors.append(f"{name}: {e.message}")
    for name, header in CSV_HEADERS.items():
        lines = (out / name).read_text().splitlines()
        if lines[0] != header:
            errors.append(f"{name}: header {lines[0]!r}")
        width = header.count(",") + 1
        for i, line in enumerate(lines[1:], start=2):
            fields = line.split(",")
            if len(fields) != width:
                errors.append(f"{name} line {i}: {len(fields)} fields")
                break
            try:
                [float(f) for f in fields]
            except ValueError:
                errors.append(f"{name} line {i}: non-numeric field")
                break
    return errors


def main() -> int:
    tool, project = sys.argv[1], Path(sys.argv[2])
    with tempfile.TemporaryDirectory() as tmp:
        out = Path(tmp)
        run_all(tool, project, out)
        first = {p.name: p.read_bytes() for p in out.iterdir()}
        errors = check_outputs(project, out)
        run_all(tool, project, out)
        for p in sorted(out.iterdir()):
            if p.read_bytes() != first.get(p.name):
                errors.append(f"{p.name}: rerun is not byte-identical")
        if set(first) != {p.name for p in out.iterdir()}:
            errors.append("rerun produced a different file set")
    for e in errors:
        print("FAIL", e)
    print(f"{len(first)} files checked, {len(errors)} problems")
    return 1 if errors else 0


if __name__ == "__main__":
    sys.exit(main())
