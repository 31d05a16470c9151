"""Dense pipeline: Macaulay null space, shift eigenproblem, root extraction.

This path returns every isolated regularized equilibrium and is the ground
truth the stochastic solver is compared against.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .game import Game, TsallisParams, exploitability, regularized_exploitability
from .macaulay import MacaulayMatrix, build_macaulay, build_shift_selectors, count_rows_cols
from .mvp import NegativeRootError, PolynomialSystem, build_ne_mvp, recover_strategy, system_residual

log = logging.getLogger(__name__)

DENSE_CAP = 5 * 10**7


class DenseTooLarge(MemoryError):
    pass


class RankConditionError(np.linalg.LinAlgError):
    pass


@dataclass(frozen=True)
class Tolerances:
    rank_tol: float = 1e-8
    residual_tol: float = 1e-6
    first_entry_tol: float = 1e-8
    imag_tol: float = 1e-6
    neg_tol: float = 1e-6
    sum_to_1_tol: float = 1e-6
    dedup_tol: float = 1e-3
    extra_rows: int = 16
    shift_variable: int = 0


@dataclass
class Solution:
    profile: list[np.ndarray]
    v: np.ndarray
    residual_norm: float
    exploitability: float
    exploitability_regularized: float
    source: str | float
    sum_deviation: float = 0.0

    def to_dict(self) -> dict:
        return {
            "profile": [x.tolist() for x in self.profile],
            "residual": self.residual_norm,
            "exploitability_original_game": self.exploitability,
            "exploitability_regularized_game": self.exploitability_regularized,
            "source": self.source,
        }


@dataclass
class SolutionSet:
    solutions: list[Solution] = field(default_factory=list)
    tolerances: dict = field(default_factory=dict)
    diagnostics: list[dict] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.solutions)

    def __iter__(self):
        return iter(self.solutions)

    @property
    def profiles(self) -> list[list[np.ndarray]]:
        return [s.profile for s in self.solutions]

    def is_new(self, profile, tol: float) -> bool:
        return all(profile_distance(profile, s.profile) > tol for s in self.solutions)

    def to_json(self) -> str:
        return json.dumps({"solutions": [s.to_dict() for s in self.solutions],
                           "tolerances": self.tolerances}, indent=2)


def profile_distance(p, q) -> float:
    """Largest total-variation distance between corresponding players' strategies."""
    return max(0.5 * float(np.abs(np.asarray(a) - np.asarray(b)).sum()) for a, b in zip(p, q))


def null_space_dense(M: MacaulayMatrix | np.ndarray, rank_tol: float = 1e-8,
                     dense_cap: int = DENSE_CAP) -> np.ndarray:
    """Orthonormal basis of the numerical null space (singular values <= rank_tol * s_max)."""
    shape = M.shape
    if shape[0] * shape[1] > dense_cap:
        raise DenseTooLarge(f"{shape[0]} x {shape[1]} matrix exceeds the dense cap; "
                            "use the stochastic solver")
    A = M.dense() if isinstance(M, MacaulayMatrix) else np.asarray(M, dtype=float)
    _, s, vt = np.linalg.svd(A, full_matrices=True)
    s_full = np.zeros(A.shape[1])
    s_full[: s.size] = s
    cutoff = rank_tol * (s[0] if s.size else 0.0)
    return vt[s_full <= cutoff].T.copy()


def solve_gevp(A_rows: np.ndarray, B_rows: np.ndarray, rank_tol: float = 1e-8
               ) -> tuple[np.ndarray, np.ndarray]:
    """Eigenpairs of ``pinv(B_rows) @ A_rows``, i.e. ``A w = lambda B w`` in the least-squares sense."""
    d = B_rows.shape[1]
    if d == 0:
        return np.zeros((0, 0), dtype=complex), np.zeros(0, dtype=complex)
    u, s, vt = np.linalg.svd(B_rows, full_matrices=False)
    rank = int(np.sum(s > rank_tol * s[0])) if s.size else 0
    if rank < d:
        raise RankConditionError(f"selected rows have rank {rank} < null space dimension {d}")
    pinv = (vt.T / s) @ u.T
    eigvals, W = scipy.linalg.eig(pinv @ A_rows)
    return W, eigvals


def candidate_from_vector(psi: np.ndarray, system: PolynomialSystem, tol: Tolerances
                          ) -> tuple[np.ndarray | None, str]:
    """Normalize a null-space vector by its constant entry and read off the degree-1 block."""
    if abs(psi[0]) < tol.first_entry_tol * max(np.abs(psi).max(), 1e-300):
        return None, "first_entry"
    psi = psi / psi[0]
    v = psi[1: 1 + system.n_v]
    if np.iscomplexobj(v):
        if np.abs(v.imag).max() > tol.imag_tol * max(1.0, np.abs(v).max()):
            return None, "complex"
        v = v.real
    return np.asarray(v, dtype=float), "ok"


def make_solution(game: Game, system: PolynomialSystem, v: np.ndarray, tol: Tolerances,
                  source) -> tuple[Solution | None, str]:
    try:
        profile = recover_strategy(v, system, neg_tol=tol.neg_tol)
    except NegativeRootError:
        return None, "negative"
    sums = np.array([x.sum() for x in profile])
    deviation = float(np.abs(sums - 1.0).max())
    if deviation > tol.sum_to_1_tol:
        return None, "off_simplex"
    residual = float(np.linalg.norm(system_residual(system, v)))
    if residual > tol.residual_tol:
        return None, "residual"
    profile = [x / x.sum() for x in profile]
    _, eps = exploitability(game, profile)
    _, eps_reg = regularized_exploitability(game, profile, system.params)
    return Solution(profile, v, residual, eps, eps_reg, source, deviation), "ok"


def extract_solutions(Z: np.ndarray, W: np.ndarray, game: Game, system: PolynomialSystem,
                      tol: Tolerances = Tolerances()) -> SolutionSet:
    out = SolutionSet(tolerances=tol.__dict__.copy())
    Psi = Z @ W
    for j in range(Psi.shape[1]):
        v, why = candidate_from_vector(Psi[:, j], system, tol)
        sol = None
        if v is not None:
            sol, why = make_solution(game, system, v, tol, "exact")
        if sol is not None and not out.is_new(sol.profile, tol.dedup_tol):
            why = "duplicate"
            sol = None
        out.diagnostics.append({"eigvec": j, "outcome": why})
        if sol is not None:
            out.solutions.append(sol)
    # deterministic order: lexicographic in the flattened profile
    out.solutions.sort(key=lambda s: tuple(np.concatenate(s.profile).round(9)))
    return out


def solve_exact(game: Game, params: TsallisParams, tol: Tolerances = Tolerances(),
                dense_cap: int = DENSE_CAP) -> SolutionSet:
    system = build_ne_mvp(game, params)
    n_rows, n_cols = count_rows_cols(system)
    if n_rows * n_cols > dense_cap:
        raise DenseTooLarge(f"Macaulay matrix {n_rows} x {n_cols} exceeds the dense cap; "
                            "use the stochastic solver")
    M = build_macaulay(system)
    Z = null_space_dense(M, tol.rank_tol, dense_cap)
    log.info("Macaulay %s, null space dimension %d", M.shape, Z.shape[1])
    sel = build_shift_selectors(M.ordering, Z.shape[1], tol.shift_variable, tol.extra_rows)
    W, eigvals = solve_gevp(Z[sel.svl_indices], Z[sel.s1_indices], tol.rank_tol)
    result = extract_solutions(Z, W, game, system, tol)
    result.diagnostics.append({"null_dim": Z.shape[1], "macaulay_shape": M.shape,
                               "selector_rows": len(sel)})
    return result
