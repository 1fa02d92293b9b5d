"""
main.py
-------
Entry point for contribnet, the network contribution game toolkit.

Parses the command line, layers the global flags over the loaded
settings and hands off to the command functions in
controller/run_controller.py. The JSON payload goes to stdout, messages
and logs to stderr, and the process exits with the command's code.
"""

import argparse
import sys
from typing import Any, Dict, List, Optional

from controller import run_controller as rc
from controller.instances import RANDOM_CLASSES
from controller.solvers import OPTIMUM_METHODS, SOLVERS
from model.da.codec import dumps_payload
from model.da.config import DEFAULT_DB_URL, load_settings
from model.tools.errors import ParseError
from model.tools.logger import Logger


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="contribnet", description="Equilibria and dynamics of network contribution games."
    )
    parser.add_argument("--tol", type=float, help="improvement tolerance (default 1e-9)")
    parser.add_argument("--grid", type=int, help="lattice resolution g (default 16)")
    parser.add_argument("--config", help="YAML settings file")
    parser.add_argument(
        "--db", nargs="?", const=DEFAULT_DB_URL, help=f"record runs in a ledger (default {DEFAULT_DB_URL})"
    )
    parser.add_argument("--jobs", type=int, default=1, help="worker processes for the oracle")
    parser.add_argument("--log-level", help="DEBUG, INFO, WARNING or ERROR")
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="construct or refute an equilibrium")
    solve.add_argument("game")
    solve.add_argument("--method", default="auto", choices=["auto", *SOLVERS])

    verify = sub.add_parser("verify", help="check a profile for improving deviations")
    verify.add_argument("game")
    verify.add_argument("profile")
    verify.add_argument("--mode", default="pairwise", choices=["nash", "pairwise"])
    verify.add_argument("--approx", action="store_true", help="also report the approximation factor")

    dyn = sub.add_parser("dynamics", help="simulate best-response dynamics")
    dyn.add_argument("game")
    dyn.add_argument("--mode", default="random", choices=["random", "concurrent"])
    dyn.add_argument("--seed", type=int)
    dyn.add_argument("--max-rounds", type=int)
    dyn.add_argument("--start", help="start profile (default: all zero)")
    dyn.add_argument("--out", help="write the trajectory as JSONL")

    optimum = sub.add_parser("optimum", help="social optimum")
    optimum.add_argument("game")
    optimum.add_argument("--method", default="auto", choices=OPTIMUM_METHODS)

    poa = sub.add_parser("poa", help="solve, optimize and report the welfare ratio")
    poa.add_argument("game")
    poa.add_argument("--method", default="auto", choices=["auto", *SOLVERS])
    poa.add_argument("--optimum", default="auto", choices=OPTIMUM_METHODS)

    dual = sub.add_parser("dual", help="LP-dual certificate of a min-linear equilibrium")
    dual.add_argument("game")
    dual.add_argument("--profile")

    slack = sub.add_parser("slack", help="tightness labels and slack elimination")
    slack.add_argument("game")
    slack.add_argument("--profile")
    slack.add_argument("--out", help="write the tight profile")

    orc = sub.add_parser("oracle", help="exhaustive lattice search")
    orc.add_argument("game")
    orc.add_argument("--what", default="equilibria", choices=["equilibria", "optimum"])
    orc.add_argument("--screen", action="store_true", help="re-check with the exact verifier")

    gen = sub.add_parser("gen", help="generate games")
    gen.add_argument("kind", choices=["canonical", "random", "sat-xy", "sat-min"])
    gen.add_argument("name", help=f"instance name, random class ({', '.join(RANDOM_CLASSES)}) or DIMACS file")
    gen.add_argument("--out", help="write the game JSON")
    gen.add_argument("--profile-out", help="write the start or recipe profile")
    gen.add_argument("--epsilon", type=float)
    gen.add_argument("--n", type=int, default=6)
    gen.add_argument("--density", type=float, default=0.5)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--uniform", action="store_true")
    gen.add_argument("--recipe", action="store_true")
    gen.add_argument("--start", action="store_true", help="random games: also draw a random start profile")

    runs = sub.add_parser("runs", help="list recorded runs (needs --db)")
    runs.add_argument("--command", dest="filter_command")
    runs.add_argument("--input", dest="input_hash", help="hash of the primary input file")
    return parser


def _gen_params(args: argparse.Namespace) -> Dict[str, Any]:
    if args.kind == "canonical":
        return {} if args.epsilon is None else {"epsilon": args.epsilon}
    if args.kind == "random":
        return {"n": args.n, "density": args.density, "seed": args.seed, "start": args.start}
    return {"uniform": args.uniform, "recipe": args.recipe}


def dispatch(args: argparse.Namespace, settings) -> rc.Outcome:
    command = args.command
    if command == "solve":
        return rc.cmd_solve(args.game, args.method, settings)
    if command == "verify":
        return rc.cmd_verify(args.game, args.profile, args.mode, args.approx, settings)
    if command == "dynamics":
        return rc.cmd_dynamics(
            args.game, args.mode, args.seed, args.max_rounds, args.start, args.out, settings
        )
    if command == "optimum":
        return rc.cmd_optimum(args.game, args.method, settings)
    if command == "poa":
        return rc.cmd_poa(args.game, args.method, args.optimum, settings)
    if command == "dual":
        return rc.cmd_dual(args.game, args.profile, settings)
    if command == "slack":
        return rc.cmd_slack(args.game, args.profile, args.out, settings)
    if command == "oracle":
        return rc.cmd_oracle(args.game, args.what, args.screen, args.jobs, settings)
    if command == "gen":
        return rc.cmd_gen(args.kind, args.name, args.out, args.profile_out, _gen_params(args), settings)
    return rc.cmd_runs(args.filter_command, args.input_hash, settings)


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        settings = load_settings(args.config).replace(
            tol=args.tol, grid=args.grid, db_url=args.db, log_level=args.log_level
        )
    except (ParseError, ValueError, OSError) as e:
        print(f"configuration error: {e}", file=sys.stderr)
        return rc.ERROR
    Logger.configure(settings.log_dir, settings.log_level)
    code, result = dispatch(args, settings)
    if isinstance(result, str):
        print(result, file=sys.stderr)
    else:
        print(dumps_payload(result.payload()))
    return code


if __name__ == "__main__":
    sys.exit(main())
