"""Command line: ``sim run``, ``sim analytic`` and ``sim list``.

Exit codes: 0 all assertions pass, 1 an assertion failed, 2 bad input.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import analytic
from .config import ConfigError, load_config, validate
from .metrics import export_csv, verdict_text

EXIT_PASS, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2

_num_list = (list, lambda v: all(isinstance(x, (int, float)) and x >= 0 for x in v), "a list of numbers >= 0")
ANALYTIC_SCHEMA = {
    "memory": {"capacities_bps": _num_list},
    "states": {
        "alphas": _num_list,
        "rtt_mean_s": ((int, float), lambda x: x > 0, "a number > 0"),
        "rtt_std_s": ((int, float), lambda x: x >= 0, "a number >= 0"),
        "kappa": ((int, float), lambda x: x >= 0, "a number >= 0"),
        "timeout_s": ((int, float), lambda x: x > 0, "a number > 0"),
    },
}


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sim", description="PIT state simulator and sizing model")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a catalog scenario")
    run.add_argument("scenario", help="scenario id (see 'sim list')")
    run.add_argument("--config", type=Path, help="override file with 'key = value' lines")
    run.add_argument("--seed", type=int, help="random seed (default: the scenario's)")
    run.add_argument("--out", type=Path, help="output directory (default: runs/<id>-seed<seed>)")
    run.add_argument("--desk-scale", action="store_true", help="use the 1/10-scale variant")

    an = sub.add_parser("analytic", help="print a sizing table")
    an.add_argument("--table", choices=("memory", "states"), required=True)
    an.add_argument("--params", type=Path, help="override file for the table inputs")

    ls = sub.add_parser("list", help="list scenario ids")
    ls.add_argument("--desk-scale", action="store_true", help="describe the 1/10-scale variants")
    return p


def cmd_run(args) -> int:
    from .scenarios.catalog import get_scenario, knob_schema, run_scenario, SCENARIOS

    if args.scenario not in SCENARIOS:
        print(f"error: unknown scenario {args.scenario!r}; see 'sim list'", file=sys.stderr)
        return EXIT_CONFIG
    try:
        overrides = {}
        if args.config is not None:
            overrides = load_config(args.config, knob_schema(args.scenario, args.desk_scale))
        if args.seed is not None:
            overrides["seed"] = validate({"seed": args.seed}, knob_schema(args.scenario))["seed"]
        scn = get_scenario(args.scenario, args.desk_scale, **overrides)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = args.out or Path("runs") / f"{scn.id}-seed{scn.seed}"
    out.mkdir(parents=True, exist_ok=True)
    result = run_scenario(scn)
    export_csv(result.series, out)
    (out / "scenario.json").write_text(scn.to_json() + "\n")
    lines = [f"scenario: {scn.id}", f"seed: {scn.seed}", f"desk scale: {scn.desk}",
             f"duration: {scn.duration_s:g} s", *result.summary.lines()]
    (out / "summary.txt").write_text("\n".join(lines) + "\n")
    (out / "verdict.txt").write_text(verdict_text(result.summary))
    print("\n".join(lines))
    print(f"outputs in {out}")
    return EXIT_PASS if all(result.summary.assertions.values()) else EXIT_FAIL


def _fmt(x: float) -> str:
    return f"{x:,.0f}" if x >= 100 else f"{x:.3g}"


def cmd_analytic(args) -> int:
    try:
        params = load_config(args.params, ANALYTIC_SCHEMA[args.table]) if args.params else {}
        if args.table == "memory":
            caps = params.get("capacities_bps") or [1e8, 1e9, 1e10, 1e11]
            print(f"{'line rate (bit/s)':>20}  {'PIT entries':>14}")
            for c, n in analytic.sizing_table(caps):
                print(f"{c:>20.3g}  {_fmt(n):>14}")
        else:
            mean = params.get("rtt_mean_s", 0.25)
            std = params.get("rtt_std_s", 0.25)
            rtt = analytic.RttModel.gamma(mean, std) if std > 0 else analytic.RttModel.deterministic(mean)
            kappa = params.get("kappa", analytic.DEFAULT_KAPPA)
            timeout = params.get("timeout_s", math.inf)
            alphas = params.get("alphas") or [100, 1000, 10_000, 100_000]
            print(f"RTT mean {mean:g} s, std {std:g} s, kappa {kappa:g}, timeout {timeout:g} s")
            print(f"{'requests/s':>12}  {'mean states':>14}")
            for a, n in analytic.states_table(alphas, rtt, kappa, timeout):
                print(f"{a:>12g}  {_fmt(n):>14}")
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_PASS


def cmd_list(args) -> int:
    from .scenarios.catalog import SCENARIOS, get_scenario

    for sid, factory in SCENARIOS.items():
        scn = get_scenario(sid, args.desk_scale)
        doc = (factory.__doc__ or "").strip().splitlines()[0]
        print(f"{sid:24s} {scn.hops} hops, {scn.duration_s:g} s  {doc}")
    return EXIT_PASS


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = _parser().parse_args(argv)
    handler = {"run": cmd_run, "analytic": cmd_analytic, "list": cmd_list}[args.command]
    return handler(args)


if __name__ == "__main__":
    sys.exit(main())
