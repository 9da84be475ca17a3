"""Helpers shared by the experiment scripts: run a CLI command and save its record."""

import argparse
import json
from pathlib import Path

from qinstr.cli import run


def parser(description):
    p = argparse.ArgumentParser(description=description)
    p.add_argument("--out-dir", default="results", help="directory for JSON records")
    p.add_argument("--seed", type=int, default=0)
    return p


def run_and_save(argv, out_dir, name):
    record, _ = run(argv)
    path = Path(out_dir)
    path.mkdir(parents=True, exist_ok=True)
    (path / f"{name}.json").write_text(json.dumps(record, sort_keys=True, indent=2) + "\n")
    return record["payload"]["outputs"]
