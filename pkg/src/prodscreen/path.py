"""Regularization paths over the implicit interaction space.

The largest useful penalty level is the best ratio statistic(u) / rho(|u|)
over the whole lattice, found by branch and bound with the same closure
bound that drives screening.  The path then walks a geometric grid downward,
warm-starting each solve from the previous dual point; the screen run at the
warm start predicts the next active set, and the ratio of predicted to
converged support sizes measures how well the prediction anticipated the
solution.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .data import AtomicMatrix, FeatureSet, interaction_column
from .duality import PrimalModel
from .screening import PenaltySchedule, ScreenConfig, _Cand, _combine, _stat_bound
from .solver import SolverConfig, solve

__all__ = [
    "PathConfig",
    "PathPoint",
    "PathResult",
    "lambda_max",
    "run_path",
    "predict",
    "metrics_auc",
    "metrics_r2",
]


@dataclass(frozen=True)
class PathConfig:
    n_lambdas: int = 50
    lambda_min_ratio: float = 1e-3

    def __post_init__(self):
        if self.n_lambdas < 1:
            raise ValueError("n_lambdas must be >= 1")
        if not 0.0 < self.lambda_min_ratio <= 1.0:
            raise ValueError("lambda_min_ratio must lie in (0, 1]")


def lambda_max(obj, A: AtomicMatrix, schedule: PenaltySchedule,
               scfg: ScreenConfig | None = None) -> float:
    """Smallest base penalty at which no interaction enters the model.

    Maximizes statistic(u) / rho(|u|) over the lattice at the objective's
    empty-model dual point.  A subtree is skipped once its closure bound
    over the next order's rho cannot beat the best ratio found so far; the
    returned value is independent of traversal order.
    """
    cfg = obj.screen_config(scfg)
    w = obj.screen_weights(obj.alpha0())
    best = 0.0
    seeds = []
    for j in range(A.n_cols):
        col = A.column(j)
        stat, bound = _stat_bound(col, w, cfg)
        best = max(best, stat)  # rho(1) = 1
        seeds.append(_Cand((j,), j, col, bound))
    seeds.sort(key=lambda c: (-c.bound, c.ext))
    stack = [seeds] if A.n_cols > 1 and cfg.max_order > 1 else []
    while stack:
        cls = stack.pop()
        order_child = len(cls[0].atoms) + 1
        rho_child = schedule.rho(order_child)
        rho_next = schedule.rho(order_child + 1) if order_child < cfg.max_order else None
        for k in range(len(cls)):
            parent = cls[k]
            children = []
            for idx in range(k + 1, len(cls)):
                sib = cls[idx]
                fs = FeatureSet(tuple(sorted(parent.atoms + (sib.ext,))))
                col = _combine(A, parent, sib, fs)
                stat, bound = _stat_bound(col, w, cfg)
                best = max(best, stat / rho_child)
                if rho_next is not None and bound / rho_next > best:
                    children.append(_Cand(fs.atoms, sib.ext, col, bound))
            if len(children) > 1:
                stack.append(children)
    return best


@dataclass
class PathPoint:
    lam: float
    model: PrimalModel
    alpha_nonzeros: tuple
    gap: float
    active_count: int
    predicted_count: int
    predicted_sets: tuple
    explored_count: int
    expansions: int
    converged: bool
    wall_time: float
    ratio: float


@dataclass
class PathResult:
    points: list[PathPoint] = field(default_factory=list)
    final: object = None  # SolveResult at the smallest lambda

    def tsv_rows(self):
        yield ("lambda", "active", "predicted", "explored", "expansions",
               "gap", "converged", "seconds", "predicted_to_active")
        for p in self.points:
            yield (f"{p.lam:.10g}", str(p.active_count), str(p.predicted_count),
                   str(p.explored_count), str(p.expansions), f"{p.gap:.6e}",
                   str(int(p.converged)), f"{p.wall_time:.4f}", f"{p.ratio:.6g}")

    def best_model(self, score_fn):
        """Model maximizing score_fn(model) over the path."""
        return max((p.model for p in self.points), key=score_fn)


def _compress(alpha: np.ndarray):
    """Keep (index, value) pairs when under half the entries are nonzero."""
    flat = alpha.ravel()
    nz = np.flatnonzero(flat)
    if len(nz) * 2 < flat.size:
        return ("sparse", alpha.shape, tuple(int(i) for i in nz),
                tuple(float(flat[i]) for i in nz))
    return ("dense", alpha.shape, None, tuple(float(v) for v in flat))


def run_path(obj, A: AtomicMatrix, pcfg: PathConfig | None = None,
             scfg: ScreenConfig | None = None, cfg: SolverConfig | None = None,
             schedule: PenaltySchedule | None = None) -> PathResult:
    """Solve along a geometric grid from lambda_max down, warm-starting each
    step at the previous dual point."""
    pcfg = pcfg or PathConfig()
    cfg = cfg or SolverConfig()
    schedule = schedule if schedule is not None else obj.spec.penalty
    lam_hi = lambda_max(obj, A, schedule, scfg)
    if not lam_hi > 0.0:
        raise ValueError("lambda_max is zero; the data carries no signal to trace")
    if pcfg.n_lambdas == 1:
        grid = np.array([lam_hi])
    else:
        grid = lam_hi * np.power(pcfg.lambda_min_ratio,
                                 np.arange(pcfg.n_lambdas) / (pcfg.n_lambdas - 1))
    result = PathResult()
    alpha = obj.project(np.asarray(obj.alpha0(), dtype=float))
    for lam in grid:
        tick = time.perf_counter()
        res = solve(obj, A, schedule.with_base(float(lam)), alpha, scfg, cfg)
        wall = time.perf_counter() - tick
        alpha = res.state.alpha
        result.final = res
        active_count = res.model.n_active
        ratio = res.predicted_count / max(1, active_count)
        result.points.append(PathPoint(
            lam=float(lam), model=res.model, alpha_nonzeros=_compress(alpha),
            gap=res.state.gap, active_count=active_count,
            predicted_count=res.predicted_count,
            predicted_sets=tuple(fs.atoms for fs in res.predicted),
            explored_count=res.screen_result.explored_count,
            expansions=res.expansions, converged=res.state.converged,
            wall_time=wall, ratio=ratio))
    return result


def predict(model: PrimalModel, A: AtomicMatrix) -> np.ndarray:
    """Scores for new rows: raw scores (basket), probabilities (logistic),
    or the predicted response matrix including intercept (matrix)."""
    n = A.n_rows
    if model.kind == "matrix":
        T = model.intercept.shape[0] if model.intercept.size else (
            model.coefficients.shape[1] if model.n_active else 1)
        out = np.tile(model.intercept if model.intercept.size else np.zeros(T), (n, 1))
        for fs, row in zip(model.active, model.coefficients):
            out += np.outer(interaction_column(A, fs).dense(), row)
        return out
    scores = np.zeros(n)
    for fs, coef in zip(model.active, model.coefficients):
        scores += coef * interaction_column(A, fs).dense()
    if model.kind == "logistic":
        return 1.0 / (1.0 + np.exp(-scores))
    return scores


def metrics_auc(scores: np.ndarray, labels: np.ndarray) -> float:
    """Probability a positive outranks a negative, ties counted half."""
    from scipy.stats import rankdata

    labels = np.asarray(labels)
    pos = labels == 1
    n_pos = int(pos.sum())
    n_neg = len(labels) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("AUC needs both classes present")
    ranks = rankdata(scores)
    return float((ranks[pos].sum() - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


def metrics_r2(pred: np.ndarray, truth: np.ndarray):
    """Per-column coefficient of determination and its mean."""
    pred = np.atleast_2d(np.asarray(pred, dtype=float).T).T
    truth = np.atleast_2d(np.asarray(truth, dtype=float).T).T
    if pred.shape != truth.shape:
        raise ValueError("pred and truth must have the same shape")
    sse = np.sum((pred - truth) ** 2, axis=0)
    sst = np.sum((truth - truth.mean(axis=0)) ** 2, axis=0)
    if np.any(sst == 0.0):
        raise ValueError("R^2 undefined for a constant truth column")
    per = 1.0 - sse / sst
    return per, float(per.mean())
