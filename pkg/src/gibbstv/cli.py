"""Command-line interface: gibbstv {bound,simulate,couple,discretize,verify} --scenario FILE."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from importlib import resources

from .bounds import _jsonable, write_sweep_csv
from .errors import GibbsError
from .harness import Scenario, run_bound, run_couple, run_discretize, run_simulate, verify_bounds_report

log = logging.getLogger("gibbstv")

EXIT_OK, EXIT_ERROR, EXIT_VACUOUS = 0, 1, 2


def shipped_scenarios():
    root = resources.files("gibbstv") / "scenarios"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def load_scenario(ref, task):
    """Scenario from a path or a shipped scenario name; the subcommand sets the task."""
    if os.path.exists(ref):
        with open(ref) as f:
            d = json.load(f)
    else:
        name = ref[:-5] if ref.endswith(".json") else ref
        if name not in shipped_scenarios():
            raise FileNotFoundError(f"no scenario file or shipped scenario named {ref!r}")
        d = json.loads((resources.files("gibbstv") / "scenarios" / f"{name}.json").read_text())
    d["task"] = task
    return Scenario.from_dict(d)


def _write_json(path, obj):
    with open(path, "w") as f:
        json.dump(_jsonable(obj), f, sort_keys=True, indent=2)
        f.write("\n")


def _cmd_bound(s, out):
    rows = run_bound(s)
    reports = [r for _, r in rows]
    payload = {
        "scenario": s.name,
        "task": "bound",
        "results": [{"params": p, "report": r.to_dict()} for p, r in rows],
    }
    _write_json(os.path.join(out, "report.json"), payload)
    write_sweep_csv(rows, os.path.join(out, "sweep.csv"))
    for p, r in rows:
        print(f"{s.name} {p or ''} {r.theorem_id}: bound={r.bound:.6g} c1={r.stein.c1:.6g}"
              + (" (vacuous)" if r.vacuous else ""))
    return payload, all(r.vacuous for r in reports), True


def _cmd_verify(s, out):
    rep = verify_bounds_report(s)
    payload = rep.to_dict()
    payload["scenario"] = s.name
    payload["task"] = "verify"
    _write_json(os.path.join(out, "report.json"), payload)
    write_sweep_csv([({"scenario": s.name}, rep.theoretical)], os.path.join(out, "sweep.csv"))
    th = rep.theoretical
    print(f"{s.name} {th.theorem_id}: bound={th.bound:.6g} empirical_lower={rep.empirical_lower:.4g}"
          f" se={rep.empirical_se:.3g} ordering_ok={rep.ordering_ok}")
    ok = rep.ordering_ok and rep.details.get("coupling", {}).get("ok", True)
    return payload, th.vacuous, ok


def _cmd_discretize(s, out):
    rows, slope = run_discretize(s)
    payload = {
        "scenario": s.name,
        "task": "discretize",
        "slope_log_excess_vs_log_rV": slope,
        "rows": [{**{k: v for k, v in r.items() if k != "report"}, "report": r["report"].to_dict()} for r in rows],
    }
    _write_json(os.path.join(out, "report.json"), payload)
    write_sweep_csv([({"n_per_dim": r["n_per_dim"], "r_V": r["r_V"]}, r["report"]) for r in rows],
                    os.path.join(out, "sweep.csv"))
    for r in rows:
        emp = r.get("empirical", {})
        print(f"{s.name} n={r['n_per_dim']} r_V={r['r_V']:.5g} d2_bound={r['report'].bound:.6g}"
              + (f" empirical_lower={emp['lower']:.4g}" if emp else ""))
    print(f"{s.name} slope={slope:.4f}")
    ok = all(r.get("ordering_ok", True) for r in rows)
    return payload, all(r["report"].vacuous for r in rows), ok


def _cmd_simulate(s, out):
    payload = run_simulate(s)
    payload["scenario"] = s.name
    payload["task"] = "simulate"
    _write_json(os.path.join(out, "report.json"), payload)
    if "mean_count" in payload:
        print(f"{s.name}: n={payload['n']} mean_count={payload['mean_count']:.4g} var_count={payload['var_count']:.4g}")
    else:
        print(f"{s.name}: count={payload['count']} at t={payload['horizon']}")
    return payload, False, True


def _cmd_couple(s, out):
    payload = run_couple(s)
    payload["scenario"] = s.name
    payload["task"] = "couple"
    _write_json(os.path.join(out, "report.json"), payload)
    print(f"{s.name}: mean_tau={payload['mean_tau']:.4g} se={payload['se']:.3g} c1={payload['c1']:.4g}"
          f" ok={payload['ok']}")
    return payload, False, payload["ok"]


COMMANDS = {
    "bound": _cmd_bound,
    "simulate": _cmd_simulate,
    "couple": _cmd_couple,
    "discretize": _cmd_discretize,
    "verify": _cmd_verify,
}


def build_parser():
    ap = argparse.ArgumentParser(prog="gibbstv", description=__doc__)
    ap.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--scenario", required=True, help="scenario JSON file, or the name of a shipped scenario")
        p.add_argument("--seed", type=int, help="override mc.seed")
        p.add_argument("--reps", type=int, help="override mc.reps (and coupling.reps)")
        p.add_argument("--tol", type=float, help="override mc.tol (series tolerance)")
        p.add_argument("--out", default=".", help="output directory for report.json / sweep.csv")
        p.add_argument("--figures", action="store_true", help="also render PNG figures (needs matplotlib)")
    sub.add_parser("scenarios", help="list the shipped scenarios")
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    if args.command == "scenarios":
        for name in shipped_scenarios():
            print(name)
        return EXIT_OK
    try:
        s = load_scenario(args.scenario, args.command).with_overrides(args.seed, args.reps, args.tol)
        os.makedirs(args.out, exist_ok=True)
        log.info("running %s on scenario %s", args.command, s.name)
        payload, vacuous, ok = COMMANDS[args.command](s, args.out)
        if args.figures:
            from .report import render_figures

            for path in render_figures(args.command, payload, args.out):
                log.info("wrote %s", path)
    except (GibbsError, OSError, KeyError, ValueError, ImportError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR
    if not ok:
        print("error: an empirical check contradicts a bound (see report.json)", file=sys.stderr)
        return EXIT_ERROR
    return EXIT_VACUOUS if vacuous else EXIT_OK


__all__ = ["build_parser", "load_scenario", "main", "shipped_scenarios"]


if __name__ == "__main__":
    sys.exit(main())
