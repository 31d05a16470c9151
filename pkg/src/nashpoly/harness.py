"""Experiment drivers, metrics and report files."""

from __future__ import annotations

import csv
import json
import math
import time
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from scipy.special import rel_entr

from .exact import solve_exact
from .game import BUILTIN_GAMES, Game, TsallisParams, random_game
from .lstsq import ls_batch_experiment
from .macaulay import count_rows_cols
from .mvp import build_ne_mvp
from .stochastic import SolverConfig, preset, solve_stochastic

FORMAT_VERSION = 1
MATCH_RADIUS = 0.1

# default regularization per builtin game, used for its reference solution set
GAME_PARAMS = {
    "chicken": TsallisParams(3, 0.25),
    "bach_stravinsky": TsallisParams(3, 1.0),
    "stag_hunt": TsallisParams(3, 1.0),
}


def jensen_shannon(p, q) -> float:
    """Jensen-Shannon distance (square root of the divergence), natural log."""
    p, q = np.asarray(p, dtype=float), np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise ValueError(f"length mismatch: {p.shape} vs {q.shape}")
    m = 0.5 * (p + q)
    div = 0.5 * (rel_entr(p, m).sum() + rel_entr(q, m).sum())
    # rounding can leave a tiny negative divergence for identical inputs
    return float(np.sqrt(max(div, 0.0)))


def profile_js(p, q) -> float:
    """Mean Jensen-Shannon distance over players."""
    return float(np.mean([jensen_shannon(a, b) for a, b in zip(p, q)]))


def match_profiles(found: Sequence, truth: Sequence, radius: float = MATCH_RADIUS
                   ) -> list[tuple[int, int, float]]:
    """Greedy nearest pairs (found index, truth index, JS) within ``radius``."""
    pairs = sorted(((profile_js(f, t), i, j) for i, f in enumerate(found)
                    for j, t in enumerate(truth)))
    used_f, used_t, out = set(), set(), []
    for d, i, j in pairs:
        if d > radius:
            break
        if i in used_f or j in used_t:
            continue
        used_f.add(i)
        used_t.add(j)
        out.append((i, j, d))
    return out


@dataclass
class ExperimentReport:
    name: str
    config: dict
    records: list[dict]
    aggregates: dict = field(default_factory=dict)
    format_version: int = FORMAT_VERSION

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, default=_jsonable)

    @classmethod
    def from_json(cls, text: str) -> "ExperimentReport":
        data = json.loads(text)
        report = cls(**data)
        recomputed = AGGREGATORS[report.name.split(":")[0]](report.records)
        if not _same(recomputed, report.aggregates):
            raise ValueError("stored aggregates do not match the per-trial records")
        return report

    def write(self, out_dir: str | Path) -> Path:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        stem = self.name.replace(":", "_")
        (out / f"{stem}.json").write_text(self.to_json())
        if self.records:
            with open(out / f"{stem}.csv", "w", newline="") as fh:
                writer = csv.DictWriter(fh, fieldnames=list(self.records[0]))
                writer.writeheader()
                writer.writerows(self.records)
        return out / f"{stem}.json"


def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    raise TypeError(f"cannot serialize {type(obj)}")


def _same(a, b) -> bool:
    if isinstance(a, dict) and isinstance(b, dict):
        return a.keys() == b.keys() and all(_same(a[k], b[k]) for k in a)
    if isinstance(a, (list, tuple)) and isinstance(b, (list, tuple)):
        return len(a) == len(b) and all(_same(x, y) for x, y in zip(a, b))
    if isinstance(a, float) or isinstance(b, float):
        if a is None or b is None:
            return a is b
        if math.isnan(a) and math.isnan(b):
            return True
        return math.isclose(a, b, rel_tol=1e-12, abs_tol=1e-15)
    return a == b


def _recovery_aggregates(records: list[dict]) -> dict:
    if not records:
        return {"success_rate": None, "mean_js": None, "runtime": 0.0, "undefined": True}
    js = [d for r in records for d in r["matched_js"]]
    return {
        "success_rate": float(np.mean([r["success"] for r in records])),
        "mean_js": float(np.mean(js)) if js else None,
        "runtime": float(sum(r["seconds"] for r in records)),
        "undefined": False,
    }


def _lstsq_aggregates(records: list[dict]) -> dict:
    groups: dict = {}
    for r in records:
        groups.setdefault((r["actions"], r["gamma_tilde"]), []).append(r)
    out = {}
    for (a, g), rs in sorted(groups.items()):
        ls = [r["eps_ls"] for r in rs if r["valid"]]
        uni = [r["eps_uniform"] for r in rs]
        med_ls = float(np.median(ls)) if ls else None
        med_uni = float(np.median(uni))
        out[f"{a}x{a}@{g}"] = {
            "success_rate": float(np.mean([r["valid"] for r in rs])),
            "median_eps_ls": med_ls,
            "median_eps_uniform": med_uni,
            "improvement_ratio": None if med_ls is None else 1.0 - med_ls / med_uni,
        }
    return out


AGGREGATORS = {"recovery": _recovery_aggregates, "lstsq": _lstsq_aggregates}


def resolve_game(name_or_path: str) -> Game:
    if name_or_path in BUILTIN_GAMES:
        return BUILTIN_GAMES[name_or_path]()
    return Game.load(name_or_path)


def run_recovery_experiment(game_name: str, cfg: SolverConfig | None = None,
                            num_trials: int = 20, seeds: Iterable[int] | None = None,
                            params: TsallisParams | None = None,
                            radius: float = MATCH_RADIUS) -> ExperimentReport:
    """Repeat the stochastic solve over seeds and score it against the exact solution set."""
    cfg = cfg or preset("bs_1000")
    game = resolve_game(game_name)
    params = params or GAME_PARAMS.get(game_name, TsallisParams())
    seeds = list(seeds) if seeds is not None else list(range(num_trials))
    config = {"game": game_name, "tau_inv": params.tau_inv, "gamma_tilde": params.gamma_tilde,
              "seeds": seeds, "solver": cfg.to_dict(), "match_radius": radius,
              "js": "distance, natural log, mean over players"}
    if not seeds:
        return ExperimentReport(f"recovery:{game_name}", config, [], _recovery_aggregates([]))
    truth = solve_exact(game, params)
    if len(truth) == 0:
        raise RuntimeError(f"exact solver found no equilibria for {game_name}: {truth.diagnostics[-1]}")
    truth_profiles = truth.profiles
    records = []
    for seed in seeds:
        started = time.perf_counter()
        found = solve_stochastic(game, params, replace(cfg, seed=int(seed)))
        matches = match_profiles(found.profiles, truth_profiles, radius)
        success = len(found) == len(truth_profiles) and len(matches) == len(truth_profiles)
        records.append({
            "seed": int(seed),
            "success": bool(success),
            "num_found": len(found),
            "num_truth": len(truth_profiles),
            "matched_js": [float(d) for _, _, d in matches],
            "seconds": time.perf_counter() - started,
        })
    return ExperimentReport(f"recovery:{game_name}", config, records, _recovery_aggregates(records))


@dataclass
class LstsqExperimentConfig:
    sizes: tuple[int, ...] = (2, 3, 5, 10)
    gamma_tildes: tuple[float, ...] = (1.0, 0.5, 0.25)
    num_games: int = 10_000
    seed: int = 0


def run_lstsq_experiment(cfg: LstsqExperimentConfig = LstsqExperimentConfig()) -> ExperimentReport:
    records = []
    for a in cfg.sizes:
        for g in cfg.gamma_tildes:
            summary = ls_batch_experiment(cfg.num_games, a, g, seed=cfg.seed)
            for r in summary["records"]:
                records.append({"actions": a, "gamma_tilde": g, **r})
    return ExperimentReport("lstsq", asdict(cfg), records, _lstsq_aggregates(records))


def system_shape(action_counts: Sequence[int], tau_inv: int):
    """The polynomial system of a random game with the given shape (only degrees matter)."""
    return build_ne_mvp(random_game(action_counts, 0), TsallisParams(tau_inv, 1.0))


def macaulay_growth_table(action_count_pairs: Sequence[Sequence[int]],
                          tau_inv_values: Sequence[int]) -> list[dict]:
    """Macaulay rows/columns per (game shape, tau_inv), with log-log slopes per shape."""
    rows = []
    for pair in action_count_pairs:
        block = []
        for k in tau_inv_values:
            n_rows, n_cols = count_rows_cols(system_shape(pair, k), cap=float("inf"))
            block.append({"actions": "x".join(map(str, pair)), "tau_inv": k,
                          "n_rows": n_rows, "n_cols": n_cols})
        if len(block) >= 2:
            logk = np.log([b["tau_inv"] for b in block])
            row_slope = np.polyfit(logk, np.log([b["n_rows"] for b in block]), 1)[0]
            col_slope = np.polyfit(logk, np.log([b["n_cols"] for b in block]), 1)[0]
        else:
            row_slope = col_slope = float("nan")
        for b in block:
            b["row_slope"] = float(row_slope)
            b["col_slope"] = float(col_slope)
        rows.extend(block)
    return rows
