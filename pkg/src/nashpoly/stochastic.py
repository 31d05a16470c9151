"""Mini-batch pipeline: stochastic null space, pseudoinverses and inverse iteration.

Every dense eigendecomposition of the exact pipeline is replaced by an
iterative routine that only touches sampled rows of the Macaulay matrix. The
candidate eigenvalues of the shift problem are scanned over ``[0, 1]``, since
each substituted coordinate ``v = x**tau`` lies there.
"""

from __future__ import annotations

import copy
import json
import logging
import time
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Callable

import numpy as np
import scipy.sparse as sp

from .exact import (RankConditionError, SolutionSet, Tolerances, candidate_from_vector,
                    make_solution)
from .game import Game, TsallisParams
from .macaulay import MacaulayMatrix, build_macaulay, build_shift_selectors
from .mvp import build_ne_mvp

log = logging.getLogger(__name__)

DENSE_PINV_MAX = 512


@dataclass
class StageConfig:
    k: int | None = None
    iters: int = 1000
    eta: float = 1.0
    batch_size: int = 1000
    norm_tol: float = 1e-8
    skip: int = 100
    eigenvalue_tolerance: float | None = None

    def __post_init__(self):
        if self.iters < 1 or self.batch_size < 1 or self.skip < 1:
            raise ValueError("iters, batch_size and skip must be positive")
        if not self.eta > 0:
            raise ValueError("eta must be positive")


def _default_null_space():
    return StageConfig(iters=20_000, eta=1.0, batch_size=1000, norm_tol=1e-8, skip=500,
                       eigenvalue_tolerance=1e-6)


def _default_pinv():
    return StageConfig(iters=2000, eta=1.0, batch_size=1000, norm_tol=1e-10, skip=100)


def _default_maxv():
    return StageConfig(k=1, iters=1000, eta=0.1, batch_size=1000, norm_tol=1e-6, skip=10)


@dataclass
class SolverConfig:
    null_space: StageConfig = field(default_factory=_default_null_space)
    pinv_shift_1_z: StageConfig = field(default_factory=_default_pinv)
    pinv_mat_lam: StageConfig = field(default_factory=_default_pinv)
    maxv: StageConfig = field(default_factory=_default_maxv)
    num_lams: int = 100
    sum_to_1_tol: float = 5e-2
    residual_tol: float = 1e-2
    neg_tol: float = 1e-3
    dedup_tol: float = 1e-2
    pinv_cutoff: float = 1e-12
    dense_pinv_max: int = DENSE_PINV_MAX
    shift_variable: int = 0
    extra_rows: int = 16
    seed: int = 12345

    def __post_init__(self):
        if self.num_lams < 2:
            raise ValueError("num_lams must be at least 2")
        if not self.sum_to_1_tol > 0:
            raise ValueError("sum_to_1_tol must be positive")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "SolverConfig":
        cfg = cls()
        return apply_overrides(cfg, data)


STAGES = ("null_space", "pinv_shift_1_z", "pinv_mat_lam", "maxv")
# accepted so that external config files load; they have no effect here
IGNORED_KEYS = {"full_eval", "num_par"}


def apply_overrides(cfg: SolverConfig, data: dict) -> SolverConfig:
    """Return a copy of ``cfg`` with nested or dotted-key overrides applied.

    ``{"null_space": {"iters": 10}}`` and ``{"null_space.iters": 10}`` are
    equivalent. A leading ``hyps.`` or ``solver_config.`` is stripped.
    """
    cfg = copy.deepcopy(cfg)
    flat: dict[str, object] = {}

    def walk(prefix, obj):
        if isinstance(obj, dict):
            for key, val in obj.items():
                walk(f"{prefix}.{key}" if prefix else str(key), val)
        else:
            flat[prefix] = obj

    walk("", data)
    stage_names = {f.name for f in fields(StageConfig)}
    top_names = {f.name for f in fields(SolverConfig)}
    for key, val in flat.items():
        parts = [p for p in key.split(".") if p not in ("config", "solver_config", "hyps")]
        if len(parts) == 2 and parts[0] in STAGES:
            stage, name = parts
            if name in IGNORED_KEYS:
                continue
            if name not in stage_names:
                raise KeyError(f"unknown stage setting {key!r}")
            target = getattr(cfg, stage)
            setattr(target, name, _coerce(getattr(target, name), val))
            target.__post_init__()
        elif len(parts) == 1 and parts[0] in top_names and parts[0] not in STAGES:
            setattr(cfg, parts[0], _coerce(getattr(cfg, parts[0]), val))
        elif len(parts) == 1 and parts[0] in ("tau_inv", "gamma", "gamma_tilde", "game"):
            continue  # game-level keys are read by the caller
        else:
            raise KeyError(f"unknown config key {key!r}")
    cfg.__post_init__()
    return cfg


def _coerce(current, val):
    if val is None or (isinstance(val, str) and val.lower() in ("none", "null")):
        return None
    if isinstance(current, bool):
        return val if isinstance(val, bool) else str(val).lower() in ("1", "true", "yes")
    if isinstance(current, int) or (current is None and str(val).lstrip("-").isdigit()):
        return int(float(val))
    if isinstance(current, float) or current is None:
        return float(val)
    return val


def load_config(path: str | Path, base: SolverConfig | None = None) -> tuple[SolverConfig, dict]:
    """Read a JSON/YAML (nested) or ``key = value`` (dotted) config file.

    Returns the solver config and the raw mapping, so callers can pick up
    ``tau_inv`` / ``gamma_tilde``.
    """
    text = Path(path).read_text()
    suffix = Path(path).suffix.lower()
    if suffix == ".json":
        data = json.loads(text)
    elif suffix in (".yaml", ".yml"):
        import yaml
        data = yaml.safe_load(text) or {}
    else:
        data = {}
        for line in text.splitlines():
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            key, _, val = line.partition("=")
            data[key.strip()] = val.strip()
    return apply_overrides(base or SolverConfig(), data), data


def preset(name: str, seed: int | None = None) -> SolverConfig:
    """Named batch-size schedules.

    Smaller batches get more iterations, a smaller step and a sparser
    evaluation cadence, since the gradient estimate gets noisier.
    """
    schedules = {
        "bs_1000": dict(batch_size=1000, iters=20_000, eta=1.0, skip=500),
        "bs_500": dict(batch_size=500, iters=20_000, eta=0.2, skip=500),
        "bs_400": dict(batch_size=400, iters=30_000, eta=0.1, skip=1000),
        "bs_200": dict(batch_size=200, iters=50_000, eta=0.05, skip=2000),
        "bs_100": dict(batch_size=100, iters=80_000, eta=0.02, skip=4000),
    }
    if name == "base":
        name = "bs_1000"
    if name not in schedules:
        raise KeyError(f"unknown preset {name!r}; choose from {sorted(schedules)}")
    s = schedules[name]
    cfg = SolverConfig()
    cfg.null_space = replace(cfg.null_space, **s)
    cfg.pinv_shift_1_z = replace(cfg.pinv_shift_1_z, batch_size=s["batch_size"])
    cfg.maxv = replace(cfg.maxv, batch_size=s["batch_size"])
    if seed is not None:
        cfg.seed = seed
    return cfg


class RowSource:
    """Access to the rows of an implicit matrix, full or sampled."""

    def __init__(self, matrix):
        if isinstance(matrix, MacaulayMatrix):
            matrix = matrix.matrix
        self.matrix = sp.csr_matrix(matrix) if sp.issparse(matrix) else np.asarray(matrix, dtype=float)
        self.n_rows, self.n_cols = self.matrix.shape
        self._gram = None

    def gram_apply(self, V: np.ndarray) -> np.ndarray:
        """``A^T A V`` using a cached Gram matrix."""
        if self._gram is None:
            g = self.matrix.T @ self.matrix
            self._gram = sp.csr_matrix(g) if sp.issparse(g) else g
        return np.asarray(self._gram @ V)

    def sample(self, rng: np.random.Generator, batch_size: int):
        """Rows drawn uniformly with replacement and the unbiasing scale ``n_rows / batch``.

        A batch at least as large as the matrix is the matrix itself.
        """
        if batch_size >= self.n_rows:
            return self.matrix, 1.0
        idx = rng.integers(0, self.n_rows, size=batch_size)
        return self.matrix[idx], self.n_rows / batch_size

    def apply(self, V: np.ndarray) -> np.ndarray:
        return np.asarray(self.matrix @ V)


def _orthonormalize(V: np.ndarray) -> np.ndarray:
    q, r = np.linalg.qr(V)
    # fix signs so the result is a deterministic function of V
    signs = np.sign(np.diag(r))
    signs[signs == 0] = 1.0
    return q * signs


def _sign_fix(V: np.ndarray) -> np.ndarray:
    idx = np.argmax(np.abs(V), axis=0)
    signs = np.sign(V[idx, np.arange(V.shape[1])])
    signs[signs == 0] = 1.0
    return V * signs


def _ritz(source: RowSource, V: np.ndarray, shift: float | None):
    """Rayleigh-Ritz of ``A^T A`` (or ``shift - A^T A``) on span(V), using all rows."""
    AV = source.apply(V)
    gram = AV.T @ AV
    evals, evecs = np.linalg.eigh(0.5 * (gram + gram.T))
    evals = np.clip(evals, 0.0, None)
    if shift is None:
        order = np.argsort(evals)[::-1]
        values = np.sqrt(evals[order])
    else:
        order = np.argsort(evals)
        values = shift - evals[order]
    return _sign_fix(V @ evecs[:, order]), values


@dataclass
class TopKInfo:
    iterations: int
    converged: bool
    history: list[float]


def stochastic_topk_svd(source: RowSource, k: int, cfg: StageConfig, rng: np.random.Generator,
                        shift: float | None = None, init: np.ndarray | None = None,
                        monitor: Callable[[np.ndarray], bool] | None = None
                        ) -> tuple[np.ndarray, np.ndarray, TopKInfo]:
    """Top-``k`` eigenvectors of ``A^T A`` (or of ``shift * I - A^T A``) from sampled rows.

    Block Oja iteration ``V <- V + eta * C_batch V`` with the unbiased batch
    estimate of the operator, QR retraction every ``skip`` steps and a
    Rayleigh-Ritz rotation at the end. Returns vectors, values (singular values
    of ``A`` without a shift, operator eigenvalues with one) and run info.
    Convergence means the projector onto span(V) moved less than ``norm_tol``
    between two checks, or ``monitor`` (called with the Ritz values at each
    check) returned True.
    """
    n = source.n_cols
    if not 1 <= k <= n:
        raise ValueError(f"k must lie in [1, {n}], got {k}")
    V = rng.standard_normal((n, k))
    if init is not None and init.size:
        m = min(init.shape[1], k)
        V[:, :m] = init[:, :m]
    V = _orthonormalize(V)
    history = []
    converged = False
    t = 0
    for t in range(1, cfg.iters + 1):
        if cfg.batch_size >= source.n_rows:
            CV = source.gram_apply(V)
        else:
            B, scale = source.sample(rng, cfg.batch_size)
            CV = scale * np.asarray(B.T @ (B @ V))
        if shift is None:
            V = V + cfg.eta * CV
        else:
            V = V + cfg.eta * (shift * V - CV)
        V /= np.abs(V).max()
        if t % cfg.skip == 0 or t == cfg.iters:
            V_new = _orthonormalize(V)
            if t >= cfg.skip:
                # projector distance between successive checkpoints
                overlap = V_prev.T @ V_new
                change = float(np.sqrt(max(2.0 * k - 2.0 * np.sum(overlap ** 2), 0.0)))
                history.append(change)
                if change < cfg.norm_tol or (monitor is not None and monitor(_ritz(source, V_new, shift)[1])):
                    converged = True
                    V = V_new
                    break
            V = V_prev = V_new
        elif t == 1:
            V_prev = _orthonormalize(V)
    V = _orthonormalize(V)
    vectors, values = _ritz(source, V, shift)
    return vectors, values, TopKInfo(t, converged, history)


def null_space_stochastic(M, cfg: SolverConfig, rng: np.random.Generator
                          ) -> tuple[np.ndarray, dict]:
    """Null space of ``M`` as the top eigenvectors of ``lambda* I - M^T M``.

    ``lambda*`` is 1.1 times the squared top singular value (estimated
    stochastically). The subspace size doubles until some returned vector
    falls below ``lambda* - eigenvalue_tolerance``; only the vectors within
    that tolerance are kept.
    """
    source = M if isinstance(M, RowSource) else RowSource(M)
    stage = cfg.null_space
    tol = stage.eigenvalue_tolerance if stage.eigenvalue_tolerance is not None else 1e-6
    _, sig, _ = stochastic_topk_svd(source, 1, cfg.maxv, rng)
    lam_star = 1.1 * float(sig[0]) ** 2
    diag = {"sigma_max": float(sig[0]), "lambda_star": lam_star, "rounds": []}
    if lam_star == 0.0:  # zero matrix
        return np.eye(source.n_cols), diag
    k = stage.k or 1
    prev = None
    last: dict = {"gaps": None}

    def monitor(vals):
        # gaps to lambda*: ~0 for null vectors, a plateau for genuine non-null ones,
        # and a fast geometric decay for columns still converging into the null space
        gaps = np.sort(lam_star - vals)
        null = gaps <= tol
        if null.all():
            return True
        prev, last["gaps"] = last["gaps"], gaps
        if prev is None or int((prev <= tol).sum()) != int(null.sum()):
            return False
        stable = np.all(np.abs(gaps[~null] - prev[~null]) <= 0.1 * prev[~null])
        tight = not null.any() or gaps[null].max() <= 1e-3 * tol
        return bool(stable and tight)

    while True:
        k = min(k, source.n_cols)
        last["gaps"] = None
        vecs, vals, info = stochastic_topk_svd(source, k, stage, rng, shift=lam_star, init=prev,
                                               monitor=monitor)
        is_null = vals >= lam_star - tol
        diag["rounds"].append({"k": k, "null": int(is_null.sum()), "iters": info.iterations,
                               "converged": info.converged})
        if stage.k is not None or not is_null.all() or k == source.n_cols:
            Z = vecs[:, is_null]
            diag["null_dim"] = Z.shape[1]
            return Z, diag
        prev = vecs
        k *= 2


class PseudoInverse:
    """Applies ``A^+`` given the retained singular triplets of ``A``."""

    def __init__(self, u: np.ndarray, s: np.ndarray, vt: np.ndarray):
        self.u, self.s, self.vt = u, s, vt

    def __call__(self, y: np.ndarray) -> np.ndarray:
        return self.vt.T @ ((self.u.T @ y) / self.s[:, None] if y.ndim == 2 else (self.u.T @ y) / self.s)

    def matrix(self) -> np.ndarray:
        return (self.vt.T / self.s) @ self.u.T

    @property
    def rank(self) -> int:
        return self.s.size


def pseudoinverse_svd(A: np.ndarray, cfg: StageConfig, rng: np.random.Generator,
                      cutoff: float = 1e-12, dense_max: int = DENSE_PINV_MAX) -> PseudoInverse:
    """Pseudoinverse via an SVD of ``A``; singular values below ``cutoff * s_max`` are dropped.

    Matrices with both sides at most ``dense_max`` use a dense SVD; larger
    ones use the stochastic top-k routine on ``A^T A`` with ``k = n_cols``.
    """
    A = np.asarray(A, dtype=float)
    if max(A.shape) <= dense_max:
        u, s, vt = np.linalg.svd(A, full_matrices=False)
    else:
        vecs, s, _ = stochastic_topk_svd(RowSource(A), min(A.shape[1], cfg.k or A.shape[1]), cfg, rng)
        keep = s > 0
        vecs, s = vecs[:, keep], s[keep]
        u = (A @ vecs) / s
        vt = vecs.T
    if s.size == 0 or s[0] == 0:
        raise np.linalg.LinAlgError("all singular values are zero")
    keep = s > cutoff * s[0]
    return PseudoInverse(u[:, keep], s[keep], vt[keep])


def inverse_power_iterate(R_dagger, cfg: StageConfig, rng: np.random.Generator,
                          dim: int | None = None) -> tuple[np.ndarray, bool]:
    """Power iteration on ``R_dagger`` from a random real start.

    Converged when the iterate moved less than ``norm_tol`` (up to sign)
    over ``skip`` steps.
    """
    if callable(R_dagger) and not isinstance(R_dagger, np.ndarray):
        op = R_dagger
    else:
        R_dagger = np.asarray(R_dagger)
        dim = R_dagger.shape[1]
        op = lambda w: R_dagger @ w  # noqa: E731
    w = rng.standard_normal(dim)
    w /= np.linalg.norm(w)
    checkpoint = w
    for t in range(1, cfg.iters + 1):
        w = op(w)
        nrm = np.linalg.norm(w)
        if not np.isfinite(nrm) or nrm == 0:
            return w, False
        w = w / nrm
        if t % cfg.skip == 0:
            gap = min(np.linalg.norm(w - checkpoint), np.linalg.norm(w + checkpoint))
            if gap < cfg.norm_tol:
                return w, True
            checkpoint = w
    return w, False


def lambda_grid(num_lams: int, tau_inv: int) -> np.ndarray:
    return np.linspace(0.0, 1.0, num_lams) ** (1.0 / tau_inv)


def solve_stochastic(game: Game, params: TsallisParams, cfg: SolverConfig | None = None
                     ) -> SolutionSet:
    """Recover regularized equilibria by scanning candidate shift eigenvalues.

    Stage failures never raise; they are recorded in ``diagnostics``.
    """
    cfg = cfg or SolverConfig()
    started = time.perf_counter()
    seeds = np.random.SeedSequence(cfg.seed)
    null_seed, pinv_seed, lam_seed = seeds.spawn(3)
    tol = Tolerances(residual_tol=cfg.residual_tol, neg_tol=cfg.neg_tol,
                     sum_to_1_tol=cfg.sum_to_1_tol, dedup_tol=cfg.dedup_tol,
                     shift_variable=cfg.shift_variable, extra_rows=cfg.extra_rows)
    result = SolutionSet(tolerances={**tol.__dict__, "config": cfg.to_dict()})
    system = build_ne_mvp(game, params)
    M = build_macaulay(system)
    Z, null_diag = null_space_stochastic(M, cfg, np.random.default_rng(null_seed))
    null_diag["macaulay_shape"] = M.shape
    result.diagnostics.append({"stage": "null_space", **null_diag})
    d = Z.shape[1]
    if d == 0:
        result.diagnostics.append({"stage": "null_space", "error": "empty null space"})
        return result
    sel = build_shift_selectors(M.ordering, d, cfg.shift_variable, cfg.extra_rows)
    S1Z, SvZ = Z[sel.s1_indices], Z[sel.svl_indices]
    try:
        Q = pseudoinverse_svd(S1Z, cfg.pinv_shift_1_z, np.random.default_rng(pinv_seed),
                              cutoff=1e-8, dense_max=cfg.dense_pinv_max)
        if Q.rank < d:
            raise RankConditionError(f"rank(S_1 Z) = {Q.rank} < {d}")
    except np.linalg.LinAlgError as exc:
        result.diagnostics.append({"stage": "pinv_shift_1_z", "error": str(exc)})
        return result
    QS = Q(SvZ)
    lam_seeds = lam_seed.spawn(cfg.num_lams)
    for lam, ss in zip(lambda_grid(cfg.num_lams, params.tau_inv), lam_seeds):
        rng = np.random.default_rng(ss)
        entry = {"stage": "lambda", "lambda": float(lam)}
        try:
            R_dag = pseudoinverse_svd(QS - lam * np.eye(d), cfg.pinv_mat_lam, rng,
                                      cutoff=cfg.pinv_cutoff, dense_max=cfg.dense_pinv_max)
        except np.linalg.LinAlgError as exc:
            entry["outcome"] = f"pinv_failed: {exc}"
            result.diagnostics.append(entry)
            continue
        w, converged = inverse_power_iterate(R_dag.matrix(), cfg.maxv, rng)
        entry["converged"] = converged
        outcome = "not_converged"
        if converged:
            v, outcome = candidate_from_vector(Z @ w, system, tol)
            if v is not None:
                sol, outcome = make_solution(game, system, v, tol, float(lam))
                if sol is not None:
                    if result.is_new(sol.profile, tol.dedup_tol):
                        result.solutions.append(sol)
                    else:
                        outcome = "duplicate"
        entry["outcome"] = outcome
        result.diagnostics.append(entry)
    result.diagnostics.append({"stage": "done", "seconds": time.perf_counter() - started})
    return result
