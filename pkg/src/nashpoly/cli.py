"""Command-line entry point: ``nashpoly <subcommand> [options]``.

Exit status is 0 on success, 2 when a solver stage fails and 1 on bad usage.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

from .exact import DenseTooLarge, RankConditionError, solve_exact
from .game import GameError, TsallisParams, gumbel_br_check, uniform_profile
from .harness import (
    GAME_PARAMS,
    LstsqExperimentConfig,
    macaulay_growth_table,
    resolve_game,
    run_lstsq_experiment,
    run_recovery_experiment,
)
from .lstsq import solve_least_squares_2p
from .polynomial import BasisTooLarge
from .stochastic import SolverConfig, load_config, preset, solve_stochastic

EXIT_OK, EXIT_USAGE, EXIT_SOLVER = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--game", default="chicken", help="builtin name or path to a game JSON file")
    p.add_argument("--tau-inv", type=int, default=None)
    p.add_argument("--gamma-tilde", type=float, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--config", default=None, help="solver config (json, yaml or key=value)")
    p.add_argument("--preset", default=None, help="batch schedule, e.g. bs_1000 or bs_100")
    p.add_argument("--out", default=None, help="directory for result files")
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = _Parser(prog="nashpoly", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("solve-exact", parents=[common], help="all equilibria via dense null space")
    sub.add_parser("solve-stochastic", parents=[common], help="equilibria via stochastic SVD")
    sub.add_parser("solve-lstsq", parents=[common], help="2-player tau=1 least-squares solve")
    rec = sub.add_parser("recover", parents=[common], help="repeated stochastic recovery vs exact")
    rec.add_argument("name", metavar="game")
    ls = sub.add_parser("lstsq-experiment", parents=[common], help="least squares on random games")
    ls.add_argument("--num-games", type=int, default=10_000)
    ls.add_argument("--sizes", type=int, nargs="+", default=[2, 3, 5, 10])
    ls.add_argument("--gammas", type=float, nargs="+", default=[1.0, 0.5, 0.25])
    gt = sub.add_parser("growth-table", parents=[common], help="Macaulay size vs tau_inv")
    gt.add_argument("--pairs", nargs="+", default=["2x2", "3x3", "5x5"])
    gt.add_argument("--tau-invs", type=int, nargs="+", default=[1, 3, 5, 7, 9])
    gc = sub.add_parser("gumbel-check", parents=[common], help="Gumbel argmax vs BR^tau")
    gc.add_argument("--tau", type=float, default=1.0)
    gc.add_argument("--samples", type=int, default=10**6)
    gc.add_argument("--player", type=int, default=0)
    return parser


def _params(args, raw: dict | None = None) -> TsallisParams:
    base = GAME_PARAMS.get(args.game, TsallisParams())
    raw = raw or {}
    tau_inv = args.tau_inv if args.tau_inv is not None else int(raw.get("tau_inv", base.tau_inv))
    gt = args.gamma_tilde if args.gamma_tilde is not None else float(
        raw.get("gamma_tilde", base.gamma_tilde))
    return TsallisParams(tau_inv, gt)


def _solver_config(args) -> tuple[SolverConfig, dict]:
    cfg = preset(args.preset) if args.preset else SolverConfig()
    raw: dict = {}
    if args.config:
        cfg, raw = load_config(args.config, cfg)
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    return cfg, raw


def _emit(args, name: str, payload: dict) -> None:
    text = json.dumps(payload, indent=2, default=str)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / f"{name}.json").write_text(text)
    print(text)


def _has_stage_error(diagnostics) -> bool:
    return any("error" in d for d in diagnostics)


def cmd_solve_exact(args) -> int:
    game = resolve_game(args.game)
    params = _params(args)
    result = solve_exact(game, params)
    _emit(args, "solve_exact", {"game": args.game, "tau_inv": params.tau_inv,
                                "gamma_tilde": params.gamma_tilde,
                                **json.loads(result.to_json())})
    return EXIT_OK


def cmd_solve_stochastic(args) -> int:
    cfg, raw = _solver_config(args)
    game = resolve_game(args.game)
    params = _params(args, raw)
    result = solve_stochastic(game, params, cfg)
    payload = {"game": args.game, "tau_inv": params.tau_inv, "gamma_tilde": params.gamma_tilde,
               **json.loads(result.to_json()), "diagnostics": result.diagnostics}
    _emit(args, "solve_stochastic", payload)
    return EXIT_SOLVER if _has_stage_error(result.diagnostics) else EXIT_OK


def cmd_solve_lstsq(args) -> int:
    game = resolve_game(args.game)
    gt = args.gamma_tilde if args.gamma_tilde is not None else 1.0
    if args.tau_inv not in (None, 1):
        raise UsageError("solve-lstsq only handles tau_inv = 1")
    res = solve_least_squares_2p(game, gt)
    _emit(args, "solve_lstsq", {
        "game": args.game, "gamma_tilde": gt, "valid": res.valid,
        "profile": None if res.profile is None else [x.tolist() for x in res.profile],
        "residual": res.residual_norm,
        "exploitability": res.exploitability_vs_uniform[0],
        "exploitability_uniform": res.exploitability_vs_uniform[1],
    })
    return EXIT_OK


def cmd_recover(args) -> int:
    args.game = args.name
    cfg, raw = _solver_config(args)
    if args.trials < 0:
        raise UsageError("--trials must be non-negative")
    base = args.seed if args.seed is not None else 0
    report = run_recovery_experiment(args.name, cfg, args.trials,
                                     seeds=range(base, base + args.trials),
                                     params=_params(args, raw))
    if args.out:
        report.write(args.out)
    print(json.dumps({"config": {k: v for k, v in report.config.items() if k != "solver"},
                      "aggregates": report.aggregates}, indent=2))
    return EXIT_OK


def cmd_lstsq_experiment(args) -> int:
    gammas = [args.gamma_tilde] if args.gamma_tilde is not None else args.gammas
    cfg = LstsqExperimentConfig(tuple(args.sizes), tuple(gammas), args.num_games,
                                args.seed if args.seed is not None else 0)
    report = run_lstsq_experiment(cfg)
    if args.out:
        report.write(args.out)
    print(json.dumps(report.aggregates, indent=2))
    return EXIT_OK


def _parse_pair(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(a) for a in text.lower().split("x"))
    except ValueError:
        raise UsageError(f"bad action counts {text!r}; use e.g. 2x2") from None


def cmd_growth_table(args) -> int:
    tau_invs = [args.tau_inv] if args.tau_inv is not None else args.tau_invs
    rows = macaulay_growth_table([_parse_pair(p) for p in args.pairs], tau_invs)
    writer = csv.DictWriter(sys.stdout, fieldnames=list(rows[0]))
    writer.writeheader()
    writer.writerows(rows)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "growth_table.csv", "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=list(rows[0]))
            w.writeheader()
            w.writerows(rows)
    return EXIT_OK


def cmd_gumbel_check(args) -> int:
    game = resolve_game(args.game)
    tau = 1.0 / args.tau_inv if args.tau_inv is not None else args.tau
    tv = gumbel_br_check(game, uniform_profile(game), args.player, tau, args.samples,
                         seed=args.seed)
    _emit(args, "gumbel_check", {"game": args.game, "tau": tau, "player": args.player,
                                 "samples": args.samples, "tv_distance": tv})
    return EXIT_OK


COMMANDS = {
    "solve-exact": cmd_solve_exact,
    "solve-stochastic": cmd_solve_stochastic,
    "solve-lstsq": cmd_solve_lstsq,
    "recover": cmd_recover,
    "lstsq-experiment": cmd_lstsq_experiment,
    "growth-table": cmd_growth_table,
    "gumbel-check": cmd_gumbel_check,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (UsageError, GameError, KeyError, FileNotFoundError) as exc:
        print(f"nashpoly: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DenseTooLarge, BasisTooLarge, RankConditionError, RuntimeError) as exc:
        print(f"nashpoly: solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
