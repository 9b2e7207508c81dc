"""Command line entry point.

Exit codes: 0 when every enabled check passes, 1 on a verification
failure, 2 on bad input (unreadable or invalid scenario, bad flags).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .errors import OrbifoldError
from .pipeline import ALL_CHECKS, VerificationReport, fmt, run_verify, summary_table
from .scenario import DEFAULT_TOLERANCES, catalog_names, load_scenario

EXIT_PASS, EXIT_FAIL, EXIT_INPUT = 0, 1, 2

# checks run by each focused command, besides the main pipeline
COMMAND_CHECKS = {
    "verify": ALL_CHECKS,
    "chi": ("chi", "additivity"),
    "index": ("morse", "winding"),
    "chain": (),
    "double": ("double",),
    "inertia": ("inertia", "corollary"),
}


def _parse_checks(text: str | None) -> tuple[str, ...] | None:
    if not text:
        return None
    names = tuple(c.strip() for c in text.split(",") if c.strip())
    bad = [c for c in names if c not in ALL_CHECKS]
    if bad:
        raise argparse.ArgumentTypeError(f"unknown checks {bad}; choose from {', '.join(ALL_CHECKS)}")
    return names


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="orbifold-index",
        description="Verify orbifold Poincare-Hopf identities on global-quotient scenarios.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in (*COMMAND_CHECKS, "catalog"):
        p = sub.add_parser(name)
        if name != "catalog":
            p.add_argument("--scenario", required=True, help="scenario JSON path or bundled catalog name")
        p.add_argument("--checks", type=_parse_checks, default=None, help="comma-separated subset of checks")
        p.add_argument("--json", dest="json_out", default=None, help="write the JSON report here ('-' for stdout)")
        p.add_argument("--grid-density", type=int, default=8)
        for tol in DEFAULT_TOLERANCES:
            p.add_argument(f"--tol-{tol}", dest=f"tol_{tol}", type=float, default=None)
    return parser


def _tolerances(args) -> dict[str, float]:
    return {k: getattr(args, f"tol_{k}") for k in DEFAULT_TOLERANCES if getattr(args, f"tol_{k}") is not None}


def _write_json(payload, target: str | None) -> None:
    if target is None:
        return
    text = json.dumps(payload, indent=2) + "\n"
    if target == "-":
        sys.stdout.write(text)
    else:
        Path(target).write_text(text)


def _section_text(command: str, rep: VerificationReport) -> str:
    sec = rep.sections
    lines = []
    if command == "index" and "index" in sec:
        lines.append("  zeros (location, isotropy, index, orbifold index):")
        for z in sec["index"]["zeros"]:
            o = z["orb_index"]
            lines.append(f"    {z['location']}  {z['isotropy']}  {z['index']:+d}  {o['num']}/{o['den']}")
    elif command == "chain" and "chain" in sec:
        for lvl in sec["chain"]["levels"]:
            t = lvl["chi_term"]
            lines.append(f"  level {lvl['level']}: chi(R-)={lvl['region_chi']} chi(Gamma)={lvl['gamma_chi']}"
                         f" term={t['num']}/{t['den']}")
    elif command == "chi" and "chi" in sec:
        for k, v in sec["chi"].items():
            lines.append(f"  {k:<28}{v}")
    elif command == "double" and "double" in sec:
        d = sec["double"]
        for z in d["boundary_zeros"]:
            lines.append(f"  boundary zero {z['position']}  Z_h {z['zh_index']:+d}  R{z['region']}  X {z['x_index']:+d}")
        lines.append(f"  total {d['total']}  chi_orb(double) {d['chi_orb_double']}")
    elif command == "inertia" and "inertia" in sec:
        for x in sec["inertia"]["sectors"]:
            lines.append(f"  sector g={x['class_rep']}  |(g)|={x['class_size']}  |C(g)|={x['centralizer_order']}"
                         f"  chi(M^g)={x['chi_fixed']}")
    return "\n".join(lines)


def _run_one(command: str, target: str, args) -> VerificationReport:
    s = load_scenario(target, _tolerances(args))
    checks = args.checks if args.checks is not None else COMMAND_CHECKS[command]
    return run_verify(s, checks, args.grid_density)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "catalog":
        reports = []
        try:
            for name in catalog_names():
                reports.append(_run_one("verify", name, args))
        except OrbifoldError as exc:
            print(f"input error: [{exc.code}] {exc}", file=sys.stderr)
            return EXIT_INPUT
        width = max(len(r.scenario) for r in reports)
        for r in reports:
            lhs = "-" if r.lhs is None else fmt(r.lhs)
            print(f"{r.scenario:<{width}}  lhs={lhs:<6} {'pass' if r.passed else 'FAIL'}  ({r.timing:.2f}s)")
        _write_json({"scenarios": [r.to_json() for r in reports]}, args.json_out)
        return EXIT_PASS if all(r.passed for r in reports) else EXIT_FAIL
    try:
        rep = _run_one(args.command, args.scenario, args)
    except OrbifoldError as exc:
        print(f"input error: [{exc.code}] {exc}", file=sys.stderr)
        return EXIT_INPUT
    if args.json_out != "-":
        print(summary_table(rep))
        extra = _section_text(args.command, rep)
        if extra:
            print(extra)
    _write_json(rep.to_json(), args.json_out)
    return EXIT_PASS if rep.passed else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
