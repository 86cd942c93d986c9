#!/usr/bin/env python3
"""Regenerate the reference table and both figures into out/.

Equivalent to running the CLI three times; kept as a script so the full
output set is one command:

    python scripts/reproduce_outputs.py [--exact-overlay]
"""

import argparse
import pathlib
import sys

from optoweak.cli import main as cli_main


def run(out_dir: pathlib.Path, exact_overlay: bool) -> int:
    out_dir.mkdir(parents=True, exist_ok=True)
    jobs = [
        ["table1", "--out", str(out_dir / "table1.csv")],
        ["figure3", "--out", str(out_dir / "figure3.csv"),
         "--svg", str(out_dir / "figure3.svg")],
    ]
    fig2 = ["figure2", "--out", str(out_dir / "figure2.csv"),
            "--svg", str(out_dir / "figure2.svg")]
    if exact_overlay:
        fig2 += ["--engine", "both"]
    jobs.insert(1, fig2)
    for job in jobs:
        code = cli_main(job)
        if code != 0:
            return code
        print(f"wrote {job[2]}")
    return 0


if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--out-dir", default="out")
    ap.add_argument("--exact-overlay", action="store_true",
                    help="append exact-simulator columns to figure2 (slower)")
    args = ap.parse_args()
    sys.exit(run(pathlib.Path(args.out_dir), args.exact_overlay))
