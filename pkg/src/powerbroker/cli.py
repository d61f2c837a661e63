"""Command-line front end.

Exit codes: 0 success, 1 bad input, 2 a constraint is violated,
3 the parameters fall in a region with no characterised contract.
"""
from __future__ import annotations

import argparse
import csv
import datetime as _dt
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .commitment import build_commitment, region_row, thresholds
from .engine import ContractAutomaton, ModelError, Params, UnsupportedRegime, dec_check, principal_ex_ante
from .nocommitment import build_nocommitment, nc_thresholds
from .oracle import GridSpec, deviation_probe, oracle_report
from .sim import Deviation, SimConfig, simulate, write_jsonl

EXIT_OK, EXIT_INPUT, EXIT_VIOLATED, EXIT_REGION = 0, 1, 2, 3
SIG = 12
CSV_HEADER = ["beta", "theta", "regime", "s_L", "s_R", "y_L", "y_R", "w_P0", "polarization"]


class BadInput(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise BadInput(f"{self.prog}: {message}")


def fmt(x):
    """Round floats to 12 significant digits, recursively."""
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if not math.isfinite(x) else float(f"{x:.{SIG}g}")
    if isinstance(x, dict):
        return {k: fmt(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [fmt(v) for v in x]
    return x


def emit(obj, args, out=None):
    obj = fmt(obj)
    if not args.no_timestamp:
        obj["generated_at"] = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
    text = json.dumps(obj, indent=2, sort_keys=False) + "\n"
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _params(args, theta=None) -> Params:
    return Params(args.beta, args.m, args.b, args.theta if theta is None else theta)


def _build(par: Params, mode: str) -> ContractAutomaton:
    return build_commitment(par) if mode == "commitment" else build_nocommitment(par)


def cmd_thresholds(args) -> int:
    par = _params(args)
    th = thresholds(par)
    nc = nc_thresholds(par)
    emit({"params": par.to_dict(), "commitment": th.to_dict(),
          "first_best_cutoff": th.first_best_cutoff, "nocommitment": nc.report(),
          "diagnostics": nc.diagnostics}, args)
    return EXIT_OK


def cmd_solve(args) -> int:
    par = _params(args)
    try:
        auto = _build(par, args.mode)
    except UnsupportedRegime as err:
        emit({"params": par.to_dict(), "mode": args.mode, "region": err.label,
              "message": str(err),
              "caveat": "no optimal contract is characterised here; nothing is guessed"}, args)
        return EXIT_REGION
    rep = dec_check(auto)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(json.dumps(fmt(auto.to_dict()), indent=2) + "\n")
    emit({"automaton": auto.to_dict(), "notes": auto.notes, "value": principal_ex_ante(auto),
          "dec_report": rep.to_dict()}, args)
    return EXIT_OK if rep.certified else EXIT_VIOLATED


def _row(job):
    mode, beta, m, b, theta = job
    build = build_commitment if mode == "commitment" else build_nocommitment
    return region_row(Params(beta, m, b, theta), build)


def cmd_regions(args) -> int:
    if args.theta_steps < 1 or args.beta_steps < 1:
        raise BadInput("grid sizes must be positive")
    betas = np.linspace(args.beta_min, args.beta_max, args.beta_steps)
    thetas = np.linspace(0.0, 0.5, args.theta_steps, endpoint=False)
    jobs = [(args.mode, float(be), args.m, args.b, float(t)) for be in betas for t in thetas]
    for _, be, m, b, t in jobs[:1] + jobs[-1:]:
        Params(be, m, b, t)
    if args.jobs > 1:
        with ProcessPoolExecutor(args.jobs) as ex:
            rows = list(ex.map(_row, jobs, chunksize=64))
    else:
        rows = [_row(j) for j in jobs]
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_HEADER)
        for r in rows:
            w.writerow([r.regime if k == "regime" else f"{getattr(r, k):.{SIG}g}"
                        for k in CSV_HEADER])
    return EXIT_OK


def _load(path) -> ContractAutomaton:
    try:
        with open(path) as fh:
            return ContractAutomaton.from_json(fh.read())
    except (OSError, KeyError, TypeError, json.JSONDecodeError) as err:
        raise BadInput(f"cannot read contract {path}: {err}") from err


def cmd_verify(args) -> int:
    auto = _load(args.contract)
    rep = dec_check(auto)
    probe = deviation_probe(auto, horizon=args.horizon)
    ok = rep.certified and probe.max_gain <= 1e-9
    violated = [f"{r.state}/{r.player}: {r.value:.{SIG}g}" for r in rep.violations]
    emit({"regime": auto.regime, "certified": ok, "violated": violated,
          "dec_report": rep.to_dict(), "probe": probe.to_dict()}, args)
    if not ok:
        names = violated or [f"{probe.worst['state']}/{probe.worst['player']} (probe)"]
        sys.stderr.write("constraint violated: " + ", ".join(names) + "\n")
    return EXIT_OK if ok else EXIT_VIOLATED


def _deviation(text) -> Deviation:
    try:
        path, period, player, action = text.split(",")
        return Deviation(int(path), int(period), player.strip(), float(action))
    except ValueError as err:
        raise BadInput(f"--deviate expects path,period,player,action; got {text!r}") from err


def cmd_simulate(args) -> int:
    auto = _load(args.contract)
    cfg = SimConfig(args.periods, args.paths, args.seed,
                    tuple(_deviation(d) for d in args.deviate or ()))
    trace = simulate(auto, config=cfg)
    if args.out:
        with open(args.out, "w") as fh:
            write_jsonl(trace, auto, fh)
    else:
        write_jsonl(trace, auto, sys.stdout)
    return EXIT_OK


def cmd_oracle(args) -> int:
    par = _params(args)
    grid = GridSpec(args.s_step, args.y_step, args.mode)
    emit(oracle_report(par, grid), args)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="powerbroker", description=__doc__,
                formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, theta=True, theta_required=True):
        sp.add_argument("--beta", type=float, required=True)
        sp.add_argument("--m", type=float, required=True)
        sp.add_argument("--b", type=float, required=True)
        if theta:
            sp.add_argument("--theta", type=float, required=theta_required, default=0.0)

    def stamp(sp):
        sp.add_argument("--no-timestamp", action="store_true",
                        help="omit the generated_at field so output is byte-reproducible")

    def mode(sp):
        sp.add_argument("--mode", choices=("commitment", "nocommitment"), default="commitment")

    sp = sub.add_parser("thresholds", help="closed-form cutoffs")
    common(sp, theta_required=False)
    stamp(sp)
    sp.set_defaults(func=cmd_thresholds)

    sp = sub.add_parser("solve", help="optimal contract and its constraint report")
    common(sp)
    mode(sp)
    sp.add_argument("--out")
    stamp(sp)
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("regions", help="regime map over a (beta, theta) grid as CSV")
    sp.add_argument("--m", type=float, required=True)
    sp.add_argument("--b", type=float, required=True)
    sp.add_argument("--beta-min", type=float, required=True)
    sp.add_argument("--beta-max", type=float, required=True)
    sp.add_argument("--theta-steps", type=int, required=True)
    sp.add_argument("--beta-steps", type=int, required=True)
    sp.add_argument("--jobs", type=int, default=1)
    mode(sp)
    sp.add_argument("--out", required=True)
    stamp(sp)
    sp.set_defaults(func=cmd_regions)

    sp = sub.add_parser("verify", help="check a contract file against every constraint")
    sp.add_argument("--contract", required=True)
    sp.add_argument("--horizon", type=int, default=6)
    stamp(sp)
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("simulate", help="seeded play paths as JSON Lines")
    sp.add_argument("--contract", required=True)
    sp.add_argument("--periods", type=int, required=True)
    sp.add_argument("--paths", type=int, required=True)
    sp.add_argument("--seed", type=int, required=True)
    sp.add_argument("--deviate", action="append", metavar="PATH,PERIOD,PLAYER,ACTION")
    sp.add_argument("--out")
    stamp(sp)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("oracle", help="brute-force grid search against the closed form")
    common(sp)
    sp.add_argument("--s-step", type=float, required=True)
    sp.add_argument("--y-step", type=float, required=True)
    mode(sp)
    stamp(sp)
    sp.set_defaults(func=cmd_oracle)
    return p


def run(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except BadInput as err:
        sys.stderr.write(f"{err}\n")
        return EXIT_INPUT
    except UnsupportedRegime as err:
        sys.stderr.write(f"{err}\n")
        return EXIT_REGION
    except ModelError as err:
        sys.stderr.write(f"error: {err}\n")
        return EXIT_INPUT


def main() -> None:
    sys.exit(run())
