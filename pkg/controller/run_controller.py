"""
controller/run_controller.py
----------------------------
The command functions behind the CLI.

Each command reads its inputs, runs one workflow and returns a tuple of
exit code and RunReport (or an error message). Failures are logged and
turned into exit codes here, never raised to the caller. With a ledger
URL in the settings every report is persisted as a RunRecord.

Exit codes:
    0  success, stable, converged
    1  error (bad input, infeasible profile, ambiguous method)
    2  no equilibrium, deviation found, cycle or uncertified stall
    3  unsupported class or refused (stability, lattice cap)
    4  stable only at the grid resolution, round budget exhausted
"""

import time
from typing import Any, Callable, Dict, List, Optional, Tuple, Union

from controller import dynamics, equilibria, instances, oracle, solvers
from model.da.base_access import DataAccess
from model.da.codec import (
    bytes_hash,
    game_hash,
    game_to_dict,
    load_game,
    load_profile,
    save_game,
    save_profile,
    to_jsonable,
    write_trajectory,
)
from model.da.config import Settings, initialize_database
from model.da.dimacs import read_dimacs
from model.da.run_queries import count_runs_by_exit_code, find_runs_by_command, find_runs_by_input
from model.da.session import get_session
from model.entity.game import Game
from model.entity.profile import Profile
from model.entity.results import (
    GridSpec,
    RunReport,
    SolveStatus,
    TerminalKind,
    Verdict,
)
from model.entity.run_record import RunRecord
from model.entity.welfare import social_welfare
from model.tools.errors import (
    ContribNetError,
    GridCapExceeded,
    StabilityRefused,
    UnsupportedClassError,
)
from model.tools.logger import Logger

OK, ERROR, UNSTABLE, REFUSED, RESOLUTION = 0, 1, 2, 3, 4

Outcome = Tuple[int, Union[RunReport, str]]

SOLVE_CODES = {
    SolveStatus.EQUILIBRIUM: OK,
    SolveStatus.NO_EQUILIBRIUM: UNSTABLE,
    SolveStatus.UNSUPPORTED: REFUSED,
}


def _read(path: str) -> bytes:
    with open(path, "rb") as handle:
        return handle.read()


class _Inputs:
    """Files read by one command, hashed as they are read."""

    def __init__(self) -> None:
        self.hashes: Dict[str, str] = {}

    def raw(self, label: str, path: str) -> bytes:
        data = _read(path)
        self.hashes[label] = bytes_hash(data)
        return data

    def game(self, path: str) -> Game:
        return load_game(self.raw("game", path))

    def profile(self, path: str, game: Game, label: str = "profile") -> Profile:
        return load_profile(self.raw(label, path), game)


def _persist(report: RunReport, settings: Settings) -> None:
    if not settings.db_url:
        return
    initialize_database(settings.db_url)
    primary = next(iter(sorted(report.input_hashes.items())), ("", None))[1]
    record = RunRecord(
        command=report.command,
        input_hash=primary or bytes_hash(report.command.encode("utf-8")),
        config=to_jsonable(report.config),
        payload=to_jsonable(report.payload()),
        exit_code=report.exit_code,
        wall_time=report.wall_time,
    )
    DataAccess(RunRecord).save(record)
    Logger.info(f"Run {record.id} of {report.command} saved to the ledger.")


def _error_code(error: Exception) -> int:
    if isinstance(error, (UnsupportedClassError, StabilityRefused, GridCapExceeded)):
        return REFUSED
    return ERROR


def _run(
    command: str,
    settings: Optional[Settings],
    body: Callable[[Settings, _Inputs], Tuple[int, Dict[str, Any]]],
    config: Optional[Dict[str, Any]] = None,
    persist: bool = True,
) -> Outcome:
    settings = settings or Settings()
    inputs = _Inputs()
    started = time.perf_counter()
    try:
        code, result = body(settings, inputs)
    except (ContribNetError, ValueError, LookupError, OSError) as e:
        Logger.error(f"{e} - {command} failed.")
        return _error_code(e), str(e)
    report = RunReport(
        command=command,
        input_hashes=inputs.hashes,
        config={**settings.public(), **(config or {})},
        result=result,
        exit_code=code,
        wall_time=time.perf_counter() - started,
    )
    if persist:
        try:
            _persist(report, settings)
        except Exception as e:
            Logger.error(f"{e} - run of {command} not saved.")
    Logger.info(f"{command} finished with exit code {code}.")
    return code, report


def cmd_solve(game_path: str, method: str = "auto", settings: Optional[Settings] = None) -> Outcome:
    """Run an equilibrium algorithm; exit 0 equilibrium, 2 none exists, 3 unsupported."""

    def body(settings: Settings, inputs: _Inputs):
        outcome = solvers.solve(inputs.game(game_path), method, settings)
        return SOLVE_CODES[outcome.status], outcome.to_dict()

    return _run("solve", settings, body, {"method": method})


def _verdict_code(verdict: Verdict) -> int:
    if verdict == Verdict.STABLE:
        return OK
    if verdict == Verdict.STABLE_AT_RESOLUTION:
        return RESOLUTION
    return UNSTABLE


def cmd_verify(
    game_path: str,
    profile_path: str,
    mode: str = "pairwise",
    approx: bool = False,
    settings: Optional[Settings] = None,
) -> Outcome:
    """
    Check a profile for unilateral (``nash``) or unilateral and bilateral
    (``pairwise``) deviations; ``approx`` adds the approximation factor.
    """

    def body(settings: Settings, inputs: _Inputs):
        if mode not in ("nash", "pairwise"):
            raise ValueError(f"unknown verification mode {mode!r}")
        game = inputs.game(game_path)
        profile = inputs.profile(profile_path, game)
        verify = equilibria.verify_nash if mode == "nash" else equilibria.verify_pairwise
        report = verify(game, profile, settings)
        result = report.to_dict()
        if approx:
            result["approximation_factor"] = equilibria.approximation_factor(game, profile, settings)
        return _verdict_code(report.verdict), result

    return _run("verify", settings, body, {"mode": mode})


def cmd_dynamics(
    game_path: str,
    mode: str = "random",
    seed: Optional[int] = None,
    max_rounds: Optional[int] = None,
    start_path: Optional[str] = None,
    out: Optional[str] = None,
    settings: Optional[Settings] = None,
) -> Outcome:
    """Simulate best-response dynamics; exit 0 converged, 2 cycle or stall, 4 out of rounds."""
    runners = {"random": dynamics.run_random, "concurrent": dynamics.run_concurrent}

    def body(settings: Settings, inputs: _Inputs):
        if mode not in runners:
            raise ValueError(f"unknown dynamics mode {mode!r}")
        game = inputs.game(game_path)
        start = inputs.profile(start_path, game, "start") if start_path else Profile.zero()
        run_seed = settings.seed if seed is None else seed
        trajectory = runners[mode](game, start, run_seed, max_rounds, settings)
        if out:
            write_trajectory(trajectory, out)
            Logger.info(f"Trajectory written to {out}.")
        kind = trajectory.verdict.kind
        if kind == TerminalKind.CONVERGED:
            code = OK if trajectory.certified else UNSTABLE
        else:
            code = UNSTABLE if kind == TerminalKind.CYCLE else RESOLUTION
        return code, trajectory.summary()

    return _run("dynamics", settings, body, {"mode": mode, "seed": seed, "max_rounds": max_rounds})


def cmd_optimum(game_path: str, method: str = "auto", settings: Optional[Settings] = None) -> Outcome:
    """Social optimum by the given method."""

    def body(settings: Settings, inputs: _Inputs):
        game = inputs.game(game_path)
        resolved = solvers.optimum_method(game, method)
        profile, welfare = solvers.social_optimum(game, resolved, settings)
        return OK, {"method": resolved, "profile": profile.to_dict(), "welfare": welfare}

    return _run("optimum", settings, body, {"method": method})


def cmd_poa(
    game_path: str,
    method: str = "auto",
    optimum: str = "auto",
    settings: Optional[Settings] = None,
) -> Outcome:
    """Solve, compute the optimum and report their welfare ratio in one step."""

    def body(settings: Settings, inputs: _Inputs):
        game = inputs.game(game_path)
        outcome = solvers.solve(game, method, settings)
        result: Dict[str, Any] = {"solve": outcome.to_dict()}
        if outcome.status != SolveStatus.EQUILIBRIUM:
            return SOLVE_CODES[outcome.status], result
        resolved = solvers.optimum_method(game, optimum)
        opt_profile, opt_welfare = solvers.social_optimum(game, resolved, settings)
        ratio = solvers.price_of_anarchy(game, outcome.profile, opt_profile, settings)
        result.update(
            {
                "equilibrium_welfare": outcome.facts["welfare"],
                "optimum_method": resolved,
                "optimum_welfare": opt_welfare,
                "optimum_profile": opt_profile.to_dict(),
                "price_of_anarchy": ratio,
            }
        )
        return OK, result

    return _run("poa", settings, body, {"method": method, "optimum": optimum})


def _stable_profile(
    game: Game, profile_path: Optional[str], inputs: _Inputs, settings: Settings
) -> Profile:
    if profile_path:
        return inputs.profile(profile_path, game)
    outcome = solvers.solve(game, "auto", settings)
    if outcome.status != SolveStatus.EQUILIBRIUM:
        raise StabilityRefused(f"no profile given and the solver found none ({outcome.status.value})")
    return outcome.profile


def cmd_dual(
    game_path: str, profile_path: Optional[str] = None, settings: Optional[Settings] = None
) -> Outcome:
    """LP-dual certificate of a stable min-linear profile (solved when none is given)."""

    def body(settings: Settings, inputs: _Inputs):
        game = inputs.game(game_path)
        profile = _stable_profile(game, profile_path, inputs, settings)
        certificate = solvers.dual_certificate(game, profile, settings)
        return OK, {"profile": profile.to_dict(), **certificate.to_dict()}

    return _run("dual", settings, body)


def cmd_slack(
    game_path: str,
    profile_path: Optional[str] = None,
    out: Optional[str] = None,
    settings: Optional[Settings] = None,
) -> Outcome:
    """Edge tightness labels, then slack elimination of a stable profile."""

    def body(settings: Settings, inputs: _Inputs):
        game = inputs.game(game_path)
        profile = _stable_profile(game, profile_path, inputs, settings)
        before = equilibria.classify_tightness(game, profile, settings.tol)
        tight = equilibria.eliminate_slack(game, profile, settings)
        if out:
            with open(out, "wb") as handle:
                handle.write(save_profile(tight))
        return OK, {
            "tightness": before.to_dict(),
            "profile": tight.to_dict(),
            "tightness_after": equilibria.classify_tightness(game, tight, settings.tol).to_dict(),
        }

    return _run("slack", settings, body)


def cmd_oracle(
    game_path: str,
    what: str = "equilibria",
    screen: bool = False,
    jobs: int = 1,
    settings: Optional[Settings] = None,
) -> Outcome:
    """Lattice equilibria (optionally re-screened) or the lattice optimum."""

    def body(settings: Settings, inputs: _Inputs):
        game = inputs.game(game_path)
        gridspec = GridSpec(settings.grid, settings.grid_cap)
        if what == "optimum":
            profile, welfare = oracle.grid_optimum(game, gridspec)
            return OK, {"profile": profile.to_dict(), "welfare": welfare}
        if what != "equilibria":
            raise ValueError(f"unknown oracle query {what!r}")
        found = oracle.grid_equilibria(game, gridspec, settings, jobs)
        if screen:
            found = oracle.screen_equilibria(game, found, settings)
        listed: List[Dict[str, Any]] = [
            {"profile": p.to_dict(), "welfare": social_welfare(game, p, settings.tol)}
            for p in found
        ]
        return OK, {"count": len(listed), "equilibria": listed, "screened": screen}

    return _run("oracle", settings, body, {"what": what, "screen": screen})


def cmd_gen(
    kind: str,
    name: Optional[str] = None,
    out: Optional[str] = None,
    profile_out: Optional[str] = None,
    params: Optional[Dict[str, Any]] = None,
    settings: Optional[Settings] = None,
) -> Outcome:
    """
    Generate a game: ``canonical`` (name), ``random`` (class in ``name``,
    n, density, seed in ``params``), ``sat-xy`` / ``sat-min`` (DIMACS path
    in ``name``; ``uniform`` and ``recipe`` in ``params``).
    """
    params = dict(params or {})

    def body(settings: Settings, inputs: _Inputs):
        profile: Optional[Profile] = None
        if kind == "canonical":
            game, profile = instances.canonical(name, **params)
        elif kind == "random":
            game = instances.random_family(
                name, params.get("n", 6), params.get("density", 0.5), params.get("seed", settings.seed)
            )
            if params.get("start"):
                profile = instances.random_profile(game, params.get("seed", settings.seed))
        elif kind in ("sat-xy", "sat-min"):
            inputs.raw("cnf", name)
            cnf = read_dimacs(name)
            uniform = bool(params.get("uniform", False))
            if kind == "sat-xy":
                game = instances.sat_gadget_xy_sum(cnf)
            else:
                game = instances.sat_gadget_min(cnf, uniform)
            if params.get("recipe"):
                assignment = instances.brute_force_assignment(cnf)
                if assignment is None:
                    raise ValueError("formula is unsatisfiable, no recipe profile exists")
                if kind == "sat-xy":
                    profile = instances.xy_sum_recipe(cnf, assignment)
                else:
                    profile = instances.min_recipe(cnf, assignment, uniform)
        else:
            raise ValueError(f"unknown generator {kind!r}")
        if out:
            with open(out, "wb") as handle:
                handle.write(save_game(game))
        if profile_out and profile is not None:
            with open(profile_out, "wb") as handle:
                handle.write(save_profile(profile))
        return OK, {
            "game": game_to_dict(game),
            "game_hash": game_hash(game),
            "profile": profile.to_dict() if profile is not None else None,
        }

    return _run("gen", settings, body, {"kind": kind, "name": name, **params})


def cmd_runs(
    command: Optional[str] = None,
    input_hash: Optional[str] = None,
    settings: Optional[Settings] = None,
) -> Outcome:
    """List ledger records, optionally of one command or one input, with exit code counts."""

    def body(settings: Settings, inputs: _Inputs):
        if not settings.db_url:
            raise ValueError("listing runs needs a ledger (--db)")
        initialize_database(settings.db_url)
        if not (command or input_hash):
            records = DataAccess(RunRecord).find_all()
            with get_session() as session:
                exit_codes = count_runs_by_exit_code(session)
            return OK, {"runs": [_row(r) for r in records], "exit_codes": exit_codes}
        with get_session() as session:
            if command:
                records = find_runs_by_command(session, command)
            else:
                records = find_runs_by_input(session, input_hash)
            rows = [
                _row(r) for r in records if input_hash is None or r.input_hash == input_hash
            ]
            exit_codes = count_runs_by_exit_code(session)
        return OK, {"runs": rows, "exit_codes": exit_codes}

    # listing is not itself recorded
    return _run("runs", settings, body, persist=False)


def _row(record: RunRecord) -> Dict[str, Any]:
    return {
        "id": record.id,
        "command": record.command,
        "input_hash": record.input_hash,
        "exit_code": record.exit_code,
        "wall_time": record.wall_time,
        "created_at": record.created_at.isoformat(),
    }

