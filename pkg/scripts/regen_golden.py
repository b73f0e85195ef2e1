#!/usr/bin/env python3
"""Regenerate the shipped golden reports for the bundled scenarios.

Run from the repository root after intentional behavior changes:

    python3 scripts/regen_golden.py
"""

import json
import pathlib
import sys

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))

from ntforge.scenario import run_scenario  # noqa: E402

ROOT = pathlib.Path(__file__).resolve().parents[1]


def main():
    for scenario in sorted((ROOT / "scenarios").glob("*.json")):
        if scenario.name.endswith(".report.json"):
            continue
        report = run_scenario(str(scenario))
        report["generated_at"] = "REGENERATED"  # the one non-deterministic field
        out = scenario.with_suffix("").with_suffix(".report.json")
        out.write_text(json.dumps(report, indent=2) + "\n")
        statuses = [item["status"] for item in report["items"]]
        print(f"{out.name}: {len(statuses)} items, {statuses.count('fail')} failed")


if __name__ == "__main__":
    main()
