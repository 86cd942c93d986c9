"""Command-line front end.

    optoweak figure2|figure3|table1|verify|sweep
             [--config path] [--out path] [--svg path]
             [--engine analytic|exact|both] [--workers N]

Configuration comes from a single JSON file (documented in the README);
command-line flags override config keys.  Exit codes: 0 success,
1 verification failure, 2 config error, 3 numerical/truncation error.
"""

from __future__ import annotations

import argparse
import json
import sys

from .errors import (ConfigError, ConvergenceError, DegenerateBranchError,
                     OptoweakError, TruncationError)
from .sweep import (SweepConfig, load_config, render_rows, run_figure2,
                    run_figure3, run_sweep, run_table1, write_csv)
from . import verify as verify_mod

EXIT_OK = 0
EXIT_VERIFY = 1
EXIT_CONFIG = 2
EXIT_NUMERIC = 3


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="optoweak",
                                description="postselected optomechanical weak "
                                            "measurement: sweeps, figures, checks")
    sub = p.add_subparsers(dest="command", required=True)
    for name, blurb in (
            ("figure2", "displacement-vs-delta curves (CSV, optional SVG)"),
            ("figure3", "required mean photon number vs delta (CSV, optional SVG)"),
            ("table1", "reference weak-value/probability table (CSV)"),
            ("verify", "run the full verification suite"),
            ("sweep", "Cartesian parameter sweep (CSV)")):
        q = sub.add_parser(name, help=blurb)
        q.add_argument("--config", help="JSON config file")
        q.add_argument("--out", help="output CSV path (default: stdout)")
        q.add_argument("--svg", help="optional SVG plot path")
        q.add_argument("--engine", choices=("analytic", "exact", "both"))
        q.add_argument("--workers", type=int)
    return p


def _emit(cfg_out: str | None, header: list[str], rows: list[list]) -> None:
    if cfg_out:
        write_csv(cfg_out, header, rows)
    else:
        sys.stdout.write(render_rows(header, rows))


def _figure_svg(cfg: SweepConfig, header: list[str], rows: list[list],
                title: str, ylabel: str) -> None:
    if not cfg.svg:
        return
    from .svg import render_svg
    x = [row[0] for row in rows]
    series = {name: [row[i] for row in rows]
              for i, name in enumerate(header) if i > 0
              if not name.startswith("exact_") and name != "p_click"}
    render_svg(cfg.svg, x, series, title, header[0], ylabel)


def _run(args: argparse.Namespace) -> int:
    overrides = {"engine": args.engine, "out": args.out, "svg": args.svg,
                 "workers": args.workers}
    cfg = load_config(args.config, overrides, default_mode=args.command)
    if cfg.mode != args.command:
        raise ConfigError(f"config mode {cfg.mode!r} conflicts with "
                          f"subcommand {args.command!r}")

    if args.command == "table1":
        header, rows = run_table1()
        _emit(cfg.out, header, rows)
        return EXIT_OK
    if args.command == "figure2":
        header, rows = run_figure2(cfg)
        _emit(cfg.out, header, rows)
        _figure_svg(cfg, header, rows, "mirror displacement vs postselection parameter",
                    "mean q / sigma")
        return EXIT_OK
    if args.command == "figure3":
        header, rows = run_figure3(cfg)
        _emit(cfg.out, header, rows)
        _figure_svg(cfg, header, rows, "required mean photon number", "|alpha|^2")
        return EXIT_OK
    if args.command == "sweep":
        from .sweep import SWEEP_HEADER, iter_sweep_rows
        if cfg.out:
            write_csv(cfg.out, list(SWEEP_HEADER), iter_sweep_rows(cfg))
        else:
            header, rows = run_sweep(cfg)
            sys.stdout.write(render_rows(header, rows))
        return EXIT_OK

    # verify
    results = verify_mod.run_all(optical_cutoff=cfg.optical_cutoff
                                 if cfg.optical_cutoff is not None else None,
                                 mirror_cutoff=cfg.mirror_cutoff
                                 if cfg.mirror_cutoff != 10 else None)
    for res in results:
        print(res.report())
    n_fail = sum(not r.passed for r in results)
    print(f"\n{len(results) - n_fail}/{len(results)} checks passed")
    if cfg.out:
        payload = [{
            "name": r.name, "passed": r.passed, "seconds": r.seconds,
            "error": r.error,
            "clauses": [{"name": c.name, "measured": c.measured,
                         "tolerance": c.tolerance, "ok": c.ok} for c in r.clauses],
        } for r in results]
        with open(cfg.out, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2)
            fh.write("\n")
    return EXIT_OK if n_fail == 0 else EXIT_VERIFY


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    try:
        return _run(args)
    except ConfigError as err:
        print(f"optoweak: config-error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except (TruncationError, ConvergenceError, DegenerateBranchError) as err:
        print(f"optoweak: numeric-error: {err}", file=sys.stderr)
        return EXIT_NUMERIC
    except OptoweakError as err:
        print(f"optoweak: error: {err}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
