"""Command-line interface.

Subcommands: gen, check, canonical, path, basis, campaign.  All output is
JSON, to stdout or to --out.  Exit codes: 0 clean, 1 violations or failed
construction, 2 configuration error, 3 oracle ceiling exceeded.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Sequence

from . import harness
from .bipartite import basis_extract, canonical_system, connect_path, validate_system, verify_rl1, verify_rl2
from .errors import CeilingExceeded, ParityMismatch, SelmerLabError
from .oracle import DEFAULT_CEILING
from .selmer import as_product

EXIT_OK = 0
EXIT_VIOLATIONS = 1
EXIT_CONFIG = 2
EXIT_CEILING = 3


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--out", type=Path, help="write the JSON result here instead of stdout")
    parser.add_argument("--format", default="json", choices=["json"], help="output format")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="selmer-lab",
        description="Finite Selmer-group model: instances, bipartite systems, campaigns",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate an instance file")
    gen.add_argument("--p", type=int, required=True)
    gen.add_argument("--m", type=int, required=True)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--epsilon-mode", default="match", choices=["match", "mismatch"])
    _add_common(gen)

    check = sub.add_parser("check", help="verify a system file against an instance file")
    check.add_argument("--instance", type=Path, required=True)
    check.add_argument("--system", type=Path, required=True)
    _add_common(check)

    canonical = sub.add_parser("canonical", help="construct the canonical system")
    canonical.add_argument("--instance", type=Path, required=True)
    canonical.add_argument("--bound", type=int, help="support bound (default: m)")
    canonical.add_argument("--seed", type=int, default=0)
    _add_common(canonical)

    path_cmd = sub.add_parser("path", help="connect two heart products")
    path_cmd.add_argument("--instance", type=Path, required=True)
    path_cmd.add_argument("--start", required=True, help="comma-separated labels, or 1 for the empty product")
    path_cmd.add_argument("--end", required=True)
    path_cmd.add_argument("--bound", type=int, help="support bound (default: m)")
    _add_common(path_cmd)

    basis = sub.add_parser("basis", help="extract a Selmer basis from a system")
    basis.add_argument("--instance", type=Path, required=True)
    basis.add_argument("--system", type=Path, required=True)
    _add_common(basis)

    campaign = sub.add_parser("campaign", help="run a verification campaign")
    campaign.add_argument("--p", required=True, help="comma-separated primes, e.g. 3,5,7")
    campaign.add_argument("--m", required=True, help="range like 2..6 or list like 2,3,4")
    campaign.add_argument("--instances-per-cell", type=int, default=20)
    campaign.add_argument("--seed", type=int, default=42)
    campaign.add_argument("--bound", default="m", help="integer, or m for the per-cell prime count")
    campaign.add_argument("--epsilon-mode", default="both", choices=["match", "mismatch", "both"])
    campaign.add_argument("--oracle-ceiling", type=int, default=DEFAULT_CEILING)
    campaign.add_argument("--paths-per-instance", type=int, default=20)
    _add_common(campaign)

    return parser


def _parse_primes(text: str) -> tuple[int, ...]:
    return tuple(int(part) for part in text.split(",") if part.strip())


def _parse_m_values(text: str) -> tuple[int, ...]:
    text = text.strip()
    for sep in ("..", "-"):
        if sep in text:
            lo, hi = text.split(sep, 1)
            return tuple(range(int(lo), int(hi) + 1))
    return tuple(int(part) for part in text.split(",") if part.strip())


def _parse_product(inst, text: str):
    text = text.strip()
    if text in ("", "1"):
        return ()
    return as_product(inst, [part.strip() for part in text.split(",")])


def _emit(args, payload: dict) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if args.out is not None:
        args.out.write_text(text)
    else:
        sys.stdout.write(text)


def _load_instance(path: Path):
    return harness.instance_from_json(path.read_text())


def _cmd_gen(args) -> int:
    inst = harness.generate_instance(args.p, args.m, args.epsilon_mode, args.seed)
    text = harness.instance_to_json(inst)
    if args.out is not None:
        args.out.write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _cmd_check(args) -> int:
    inst = _load_instance(args.instance)
    system = harness.system_from_json(args.system.read_text())
    try:
        validate_system(inst, system)
    except ValueError as exc:
        _emit(args, {"valid": False, "structural_error": str(exc)})
        return EXIT_VIOLATIONS
    rl1 = verify_rl1(inst, system)
    rl2 = verify_rl2(inst, system)
    payload = {
        "valid": not rl1 and not rl2,
        "rl1_violations": [
            {"product": list(c.product), "ell": c.ell,
             "loc_vanishes": c.loc_vanishes, "partner_vanishes": c.partner_vanishes}
            for c in rl1
        ],
        "rl2_violations": [
            {"product": list(c.product), "ell": c.ell,
             "loc_vanishes": c.loc_vanishes, "partner_vanishes": c.partner_vanishes}
            for c in rl2
        ],
    }
    _emit(args, payload)
    return EXIT_OK if payload["valid"] else EXIT_VIOLATIONS


def _cmd_canonical(args) -> int:
    inst = _load_instance(args.instance)
    bound = inst.m if args.bound is None else args.bound
    try:
        system = canonical_system(inst, bound, value_picker_seed=args.seed)
    except ParityMismatch as exc:
        print(f"selmer-lab: {exc}", file=sys.stderr)
        return EXIT_VIOLATIONS
    text = harness.system_to_json(system)
    if args.out is not None:
        args.out.write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _cmd_path(args) -> int:
    inst = _load_instance(args.instance)
    bound = inst.m if args.bound is None else args.bound
    start = _parse_product(inst, args.start)
    end = _parse_product(inst, args.end)
    path = connect_path(inst, start, end, bound)
    _emit(args, {"nodes": [list(node) for node in path.nodes]})
    return EXIT_OK


def _cmd_basis(args) -> int:
    inst = _load_instance(args.instance)
    system = harness.system_from_json(args.system.read_text())
    validate_system(inst, system)
    extraction = basis_extract(inst, system)
    _emit(
        args,
        {
            "primes": list(extraction.primes),
            "product": list(extraction.product),
            "classes": [list(v) for v in extraction.classes],
            "matrix": [list(row) for row in extraction.matrix],
        },
    )
    return EXIT_OK


def _cmd_campaign(args) -> int:
    bound = None if args.bound == "m" else int(args.bound)
    config = harness.CampaignConfig(
        primes=_parse_primes(args.p),
        m_values=_parse_m_values(args.m),
        instances_per_cell=args.instances_per_cell,
        seed=args.seed,
        bound=bound,
        oracle_ceiling=args.oracle_ceiling,
        parity_mode=args.epsilon_mode,
        paths_per_instance=args.paths_per_instance,
    )
    report = harness.run_campaign(config)
    text = harness.report_to_json(report)
    if args.out is not None:
        args.out.write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK if report.violations == 0 else EXIT_VIOLATIONS


_COMMANDS = {
    "gen": _cmd_gen,
    "check": _cmd_check,
    "canonical": _cmd_canonical,
    "path": _cmd_path,
    "basis": _cmd_basis,
    "campaign": _cmd_campaign,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except CeilingExceeded as exc:
        print(f"selmer-lab: {exc}", file=sys.stderr)
        return EXIT_CEILING
    except (ValueError, OSError, KeyError, json.JSONDecodeError) as exc:
        print(f"selmer-lab: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SelmerLabError as exc:
        print(f"selmer-lab: {exc}", file=sys.stderr)
        return EXIT_VIOLATIONS


if __name__ == "__main__":
    sys.exit(main())
