"""Least-squares fast path for 2-player games at tau = 1.

With ``tau = 1`` and two players every equation is linear in the strategies,
so a minimum-norm least-squares solve returns the regularized equilibrium
directly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .game import Game, exploitability, random_game, uniform_profile

VALID_TOL = 1e-6


@dataclass
class LsResult:
    profile: list[np.ndarray] | None
    residual_norm: float
    valid: bool
    exploitability_vs_uniform: tuple[float, float]
    raw: np.ndarray


def assemble_linear_system(game: Game, gamma_tilde: float) -> tuple[np.ndarray, np.ndarray]:
    """Rows ``A [x_1; x_2] = b``: projected gradient rows (last dropped) and the two sum rows."""
    if game.num_players != 2:
        raise ValueError(f"least squares needs a 2-player game, got {game.num_players}")
    U1, U2 = game.payoffs
    m, n = U1.shape
    rows, rhs = [], []
    # player 1: gradient U1 x_2, regularizer gamma_tilde * m * x_1
    P = np.eye(m) - 1.0 / m
    block = np.hstack([-gamma_tilde * m * P, P @ U1])
    rows.append(block[: m - 1])
    rhs.append(np.zeros(m - 1))
    # player 2: gradient U2^T x_1
    P = np.eye(n) - 1.0 / n
    block = np.hstack([P @ U2.T, -gamma_tilde * n * P])
    rows.append(block[: n - 1])
    rhs.append(np.zeros(n - 1))
    rows.append(np.concatenate([np.ones(m), np.zeros(n)])[None])
    rows.append(np.concatenate([np.zeros(m), np.ones(n)])[None])
    rhs.append(np.ones(2))
    return np.vstack(rows), np.concatenate(rhs)


def solve_least_squares_2p(game: Game, gamma_tilde: float = 1.0, rcond: float = 1e-10) -> LsResult:
    A, b = assemble_linear_system(game, gamma_tilde)
    sol, *_ = np.linalg.lstsq(A, b, rcond=rcond)
    residual = float(np.linalg.norm(A @ sol - b))
    m = game.action_counts[0]
    x1, x2 = sol[:m], sol[m:]
    valid = bool(sol.min() >= -VALID_TOL
                 and abs(x1.sum() - 1) <= VALID_TOL and abs(x2.sum() - 1) <= VALID_TOL)
    _, eps_uni = exploitability(game, uniform_profile(game))
    if not valid:
        return LsResult(None, residual, False, (float("nan"), eps_uni), sol)
    profile = [np.clip(x, 0.0, None) for x in (x1, x2)]
    profile = [x / x.sum() for x in profile]
    _, eps = exploitability(game, profile)
    return LsResult(profile, residual, True, (eps, eps_uni), sol)


def ls_batch_experiment(num_games: int, actions_per_player: int, gamma_tilde: float = 1.0,
                        seed: int = 0) -> dict:
    """Solve ``num_games`` random normalized games and compare against the uniform profile."""
    if num_games < 1:
        raise ValueError("num_games must be at least 1")
    game_seeds = np.random.SeedSequence(seed).generate_state(num_games)
    records = []
    for idx, gs in enumerate(game_seeds):
        game = random_game((actions_per_player, actions_per_player), int(gs))
        res = solve_least_squares_2p(game, gamma_tilde)
        records.append({
            "game_index": idx,
            "seed": int(gs),
            "valid": res.valid,
            "residual": res.residual_norm,
            "eps_ls": res.exploitability_vs_uniform[0],
            "eps_uniform": res.exploitability_vs_uniform[1],
        })
    valid = np.array([r["valid"] for r in records])
    eps_ls = np.array([r["eps_ls"] for r in records if r["valid"]])
    eps_uni = np.array([r["eps_uniform"] for r in records])
    return {
        "actions": actions_per_player,
        "gamma_tilde": gamma_tilde,
        "success_rate": float(valid.mean()),
        "exploitability_samples_ls": eps_ls,
        "exploitability_samples_uniform": eps_uni,
        "records": records,
    }


def median_improvement_ratio(summary: dict) -> float:
    """Relative drop of the median exploitability, ``1 - median(ls) / median(uniform)``."""
    ls = summary["exploitability_samples_ls"]
    if ls.size == 0:
        return float("nan")
    return 1.0 - float(np.median(ls)) / float(np.median(summary["exploitability_samples_uniform"]))
