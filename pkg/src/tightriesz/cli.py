"""Command line front end.

Subcommands: ``paper-examples``, ``check FILE`` and ``campaign``. Exit codes:
0 all expectations met, 1 verdict mismatch or surviving violation, 2 input
error, 3 solver UNKNOWN on a required decision.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

from . import __version__, sdp
from .campaign import FAMILIES, CampaignConfig, CampaignError, run_campaign
from .cpmaps import solve_extension
from .instances import Outcome, load
from .linalg import DEFAULT_TOL
from .opsys import make_linf
from .riesz import InterpolationInstance, interpolation_problem
from .serialize import FormatError, encode_matrix
from .standard import NP_LOWER, NP_UPPER, coordinate_extension_problem, v_system

EXIT_OK, EXIT_MISMATCH, EXIT_INPUT, EXIT_UNKNOWN = 0, 1, 2, 3
TOL_ENV = "TIGHTRIESZ_TOL"


class InputError(ValueError):
    pass


def default_tol() -> float:
    raw = os.environ.get(TOL_ENV)
    if raw is None:
        return DEFAULT_TOL
    try:
        tol = float(raw)
    except ValueError:
        raise InputError(f"{TOL_ENV}={raw!r} is not a number") from None
    if not tol > 0:
        raise InputError(f"{TOL_ENV} must be positive")
    return tol


def exit_code(outcomes: list[Outcome]) -> int:
    if any(not o.replay for o in outcomes) or any(o.met is False and not o.unknown for o in outcomes):
        return EXIT_MISMATCH
    if any(o.expect is not None and o.unknown for o in outcomes):
        return EXIT_UNKNOWN
    return EXIT_OK


def _report(command: str, tol: float, outcomes: list[Outcome], seed=None) -> dict:
    out = {"tool": "tightriesz", "version": __version__, "command": command, "tolerance": tol,
           "problems": [o.to_dict() for o in outcomes]}
    if seed is not None:
        out["seed"] = seed
    return out


def _text(report: dict, runtime: float, code: int) -> str:
    lines = [f"{report['command']}: {len(report['problems'])} problem(s), tol {report['tolerance']:g}"]
    for p in report["problems"]:
        keys = [k for k in ("status", "big", "small", "interpolation") if k in p]
        st = ", ".join(f"{k}={p[k]}" for k in keys)
        tail = "" if "met" not in p else ("  ok" if p["met"] else f"  MISMATCH (expected {p['expect']})")
        if not p["replay"]:
            tail += "  REPLAY FAILED"
        lines.append(f"  {p['name']}: {st}{tail}")
    lines.append(f"exit {code}   runtime {runtime:.2f}s")
    return "\n".join(lines) + "\n"


def _emit(report: dict, text: str, out: str | None) -> None:
    """Machine-readable JSON (no wall-clock time) beside the text report, or text on stdout."""
    if out:
        Path(out + ".json").write_text(json.dumps(report, indent=1, sort_keys=True) + "\n")
        Path(out + ".txt").write_text(text)
    sys.stdout.write(text)


# --- commands ------------------------------------------------------------------------------------


def paper_examples(tol: float, loosen: bool = False) -> list[Outcome]:
    """Interpolation and extension examples on the Namioka-Phelps system ``V``.

    ``loosen`` replaces ``V`` by all of ``l^inf_4``; the interpolation verdict
    in ``V`` then flips and the run reports a mismatch.
    """
    big = make_linf(4)
    v = big if loosen else v_system()
    outs = []
    for name, s, expect in (("interpolation in linf4", big, "feasible"), ("interpolation in V", v, "infeasible")):
        inst = InterpolationInstance(s, NP_LOWER, NP_UPPER)
        p = interpolation_problem(inst)
        verdict = sdp.solve(p, tol)
        details = {"verdict": verdict.to_dict()}
        if verdict.witness is not None:
            details["interpolant"] = encode_matrix(s.element(verdict.witness.x))
        replay = verdict.status is sdp.Status.UNKNOWN or sdp.replay_check(p, verdict, tol)
        outs.append(Outcome(name, "interpolation", {"status": verdict.status.value}, expect, replay, details))
    r = solve_extension(coordinate_extension_problem(v), tol)
    outs.append(Outcome("coordinate extensions on V", "extension", {"status": r.status.value}, "infeasible",
                        r.status is sdp.Status.UNKNOWN or r.replay(tol), {"verdict": r.verdict.to_dict()}))
    return outs


def cmd_paper_examples(args, tol: float) -> int:
    t0 = time.perf_counter()
    outs = paper_examples(tol, args.loosen)
    code = exit_code(outs)
    rep = _report("paper-examples" + (" --loosen" if args.loosen else ""), tol, outs)
    _emit(rep, _text(rep, time.perf_counter() - t0, code), args.out)
    return code


def cmd_check(args, tol: float | None) -> int:
    t0 = time.perf_counter()
    try:
        parsed = load(args.file, tol)
    except OSError as exc:
        raise InputError(f"cannot read {args.file}: {exc.strerror}") from None
    outs = parsed.run()
    code = exit_code(outs)
    rep = _report(f"check {Path(args.file).name}", parsed.tol, outs)
    _emit(rep, _text(rep, time.perf_counter() - t0, code), args.out)
    return code


def _nk(raw: str) -> tuple[int, int]:
    try:
        n, k = (int(x) for x in raw.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError("expected N,K such as 2,3") from None
    return n, k


def cmd_campaign(args, tol: float) -> int:
    try:
        cfg = CampaignConfig(args.family, args.count, args.seed, args.nk, args.level, args.dimension_cap, tol,
                             workers=args.workers)
    except CampaignError as exc:
        raise InputError(str(exc)) from None
    rep = run_campaign(cfg)
    if args.out:
        Path(args.out + ".json").write_text(rep.to_json())
        Path(args.out + ".txt").write_text(rep.to_text())
    sys.stdout.write(rep.to_text())
    if not rep.ok:
        return EXIT_MISMATCH
    if cfg.c_star and rep.counts["unknown"]:
        return EXIT_UNKNOWN
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="tightriesz", description="Riesz interpolation and CP extension checks.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    ap.add_argument("--tol", type=float, default=None, help=f"numerical tolerance (default ${TOL_ENV} or 1e-9)")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("paper-examples", help="run the built-in V / linf4 examples")
    p.add_argument("--loosen", action="store_true", help="replace V by linf4 (expected to flip a verdict)")
    p.add_argument("--out", metavar="PREFIX", help="write PREFIX.json and PREFIX.txt")
    p.set_defaults(func=cmd_paper_examples)

    p = sub.add_parser("check", help="evaluate an instance file")
    p.add_argument("file")
    p.add_argument("--out", metavar="PREFIX", help="write PREFIX.json and PREFIX.txt")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("campaign", help="randomized TR / Riesz-Arveson campaign")
    p.add_argument("--family", required=True, choices=FAMILIES)
    p.add_argument("--count", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--level", type=int, default=1)
    p.add_argument("--nk", type=_nk, default=(2, 2), metavar="N,K")
    p.add_argument("--dimension-cap", type=int, default=4)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", metavar="PREFIX", help="write PREFIX.json and PREFIX.txt")
    p.set_defaults(func=cmd_campaign)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        if args.tol is not None and not args.tol > 0:
            raise InputError("--tol must be positive")
        tol = args.tol if args.tol is not None else default_tol()
        if args.func is cmd_check:
            # an explicit flag or env var overrides the file's own tolerance
            explicit = args.tol is not None or TOL_ENV in os.environ
            return cmd_check(args, tol if explicit else None)
        return args.func(args, tol)
    except (InputError, FormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
