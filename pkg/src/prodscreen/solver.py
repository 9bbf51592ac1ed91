"""Projected quasi-Newton ascent on the reduced dual.

The inner loop maximizes the concave reduced dual: a matrix-free conjugate
gradient solve of (H + h I) dir = grad on the free coordinates gives the
step direction, a backtracking line search enforces strict increase, and the
damping h grows when the quadratic model misleads and shrinks when a full
step is accepted first try.  The outer loop alternates inner convergence
with a full re-screen of the lattice: any interaction the screen emits that
is missing from the active set joins it, and the solve finishes when the
screen certifies the active set complete and the duality gap is below
tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .data import AtomicMatrix
from .duality import PrimalModel, duality_gap
from .screening import PenaltySchedule, ScreenConfig, ScreenResult, screen

__all__ = [
    "SolverConfig",
    "DualState",
    "SolveResult",
    "cg_solve",
    "qn_step",
    "line_search",
    "LineSearchResult",
    "solve",
]


@dataclass(frozen=True)
class SolverConfig:
    kkt_tol: float = 1e-6
    max_outer: int = 100
    max_inner: int = 500
    cg_rel_tol: float = 1e-8
    cg_max_iter: int = 200
    h_init: float = 1e-4
    h_grow: float = 10.0
    h_shrink: float = 0.5
    ls_shrink: float = 0.5
    ls_max: int = 30

    def __post_init__(self):
        if self.kkt_tol <= 0 or self.cg_rel_tol <= 0 or self.h_init <= 0:
            raise ValueError("tolerances and h_init must be positive")
        if not 0 < self.h_shrink < 1 or not 0 < self.ls_shrink < 1:
            raise ValueError("shrink factors must lie in (0, 1)")
        if self.h_grow <= 1:
            raise ValueError("h_grow must exceed 1")
        if min(self.max_outer, self.max_inner, self.cg_max_iter, self.ls_max) < 1:
            raise ValueError("iteration caps must be >= 1")


@dataclass
class DualState:
    """Where the dual ascent ended up, with the certificates attached."""

    alpha: np.ndarray
    dots: np.ndarray
    dual_value: float
    primal_value: float
    gap: float
    h: float
    inner_iterations: int
    outer_iterations: int
    converged: bool
    stalled: bool


@dataclass
class SolveResult:
    state: DualState
    model: PrimalModel
    screen_result: ScreenResult
    predicted: tuple
    expansions: int
    log: list = field(default_factory=list)

    @property
    def predicted_count(self) -> int:
        return len(self.predicted)


LOG_HEADER = ("outer_iter", "inner_iter", "dual_value", "gap", "active_count",
              "explored_count")


def _vdot(a, b) -> float:
    return float(np.vdot(a, b))


def cg_solve(matvec, rhs, rel_tol: float = 1e-8, max_iter: int = 200):
    """Conjugate gradients for (symmetric PD operator) x = rhs.

    Stops when the residual norm falls to rel_tol * ||rhs||.  Works on any
    array shape.  Raises on non-finite values; a direction of non-positive
    curvature ends the iteration at the current point.
    """
    x = np.zeros_like(rhs)
    r = rhs.copy()
    rs = _vdot(r, r)
    if rs == 0.0:
        return x
    target = (rel_tol ** 2) * rs
    p = r.copy()
    for _ in range(max_iter):
        Ap = matvec(p)
        pAp = _vdot(p, Ap)
        if not math.isfinite(pAp):
            raise ValueError("non-finite curvature in cg_solve")
        if pAp <= 0.0:
            break
        a = rs / pAp
        x = x + a * p
        r = r - a * Ap
        rs_new = _vdot(r, r)
        if rs_new <= target:
            break
        p = r + (rs_new / rs) * p
        rs = rs_new
    if not np.all(np.isfinite(x)):
        raise ValueError("non-finite iterate in cg_solve")
    return x


def qn_step(grad, hess_matvec, free_mask, h: float, cfg: SolverConfig):
    """Ascent direction (H + h I)^-1 grad restricted to the free coordinates.

    Falls back to the masked gradient if CG misbehaves or the returned
    direction is not an ascent direction.
    """
    g = np.where(free_mask, grad, 0.0)

    def op(v):
        return np.where(free_mask, hess_matvec(np.where(free_mask, v, 0.0)), 0.0) + h * v

    try:
        direction = cg_solve(op, g, cfg.cg_rel_tol, cfg.cg_max_iter)
    except ValueError:
        return g.copy()
    if _vdot(direction, g) <= 0.0:
        return g.copy()
    return direction


@dataclass
class LineSearchResult:
    alpha: np.ndarray
    value: float
    h: float
    stalled: bool
    used_gradient: bool


def line_search(red, alpha, value: float, direction, gradient_dir, h: float,
                cfg: SolverConfig) -> LineSearchResult:
    """Backtrack along the quasi-Newton direction, then along the gradient.

    Accepting the full quasi-Newton step on the first try shrinks h (floored
    at h_init); exhausting the backtracks grows h and retries along the
    projected gradient; failing both reports a stall and leaves the iterate
    unchanged.
    """
    t = 1.0
    for trial in range(cfg.ls_max):
        cand = red.project(alpha + t * direction)
        v = red.value(cand)
        if v > value:
            h_next = max(cfg.h_init, h * cfg.h_shrink) if trial == 0 else h
            return LineSearchResult(cand, v, h_next, False, False)
        t *= cfg.ls_shrink
    h = h * cfg.h_grow
    t = 1.0
    for _ in range(cfg.ls_max):
        cand = red.project(alpha + t * gradient_dir)
        v = red.value(cand)
        if v > value:
            return LineSearchResult(cand, v, h, False, True)
        t *= cfg.ls_shrink
    return LineSearchResult(alpha, value, h, True, True)


_POLISH_MAX = 20
_POLISH_BACKTRACKS = 8
_POLISH_SIZE_CAP = 600


def _fd_newton_direction(red, alpha, grad, mask, h: float):
    """Newton step for grad = 0 using a finite-difference curvature model
    restricted to the free coordinates.  The model is symmetrized and
    damped; None signals that the factorization is unusable."""
    idx = np.flatnonzero(mask.ravel())
    if idx.size == 0 or idx.size > _POLISH_SIZE_CAP:
        return None
    base = alpha.ravel()
    eps = 1e-7 * (1.0 + float(np.max(np.abs(base))))
    H = np.empty((idx.size, idx.size))
    for col, j in enumerate(idx):
        e = np.zeros(base.size)
        e[j] = eps
        gp = red.gradient((base + e).reshape(alpha.shape)).ravel()
        gm = red.gradient((base - e).reshape(alpha.shape)).ravel()
        H[:, col] = (gm[idx] - gp[idx]) / (2.0 * eps)
    H = 0.5 * (H + H.T) + h * np.eye(idx.size)
    try:
        step = np.linalg.solve(H, grad.ravel()[idx])
    except np.linalg.LinAlgError:
        return None
    if not np.all(np.isfinite(step)):
        return None
    direction = np.zeros(base.size)
    direction[idx] = step
    return direction.reshape(alpha.shape)


def _polish(red, alpha, value: float, h: float, cfg: SolverConfig, tol: float):
    """Endgame refinement once value comparisons drown in rounding noise.

    Near the maximum the dual value is flat to double precision while the
    gradient still carries signal, so steps are accepted on gradient-norm
    decrease instead, guarded against value regressions above noise scale.
    Directions come from a finite-difference Newton model of the gradient
    (exact where the prescribed curvature operator is only an upper bound),
    falling back to the operator step when the model is unavailable.
    """
    iters = 0
    guard = 1e-12 * (1.0 + abs(value))
    misses = 0
    for _ in range(_POLISH_MAX):
        grad = red.gradient(alpha)
        mask = red.free_mask(alpha, grad)
        g = np.where(mask, grad, 0.0)
        gn = math.sqrt(_vdot(g, g))
        if gn <= 0.1 * tol:
            break
        direction = _fd_newton_direction(red, alpha, g, mask, h)
        if direction is None:
            direction = qn_step(grad, red.hessian_matvec(alpha), mask, h, cfg)
        accepted = False
        t = 1.0
        for _ in range(_POLISH_BACKTRACKS):
            cand = red.project(alpha + t * direction)
            cgrad = red.gradient(cand)
            cg = np.where(red.free_mask(cand, cgrad), cgrad, 0.0)
            cv = red.value(cand)
            if math.sqrt(_vdot(cg, cg)) < gn * (1.0 - 1e-3) and cv >= value - guard:
                alpha, value = cand, cv
                accepted = True
                break
            t *= 0.5
        iters += 1
        if accepted:
            h = max(cfg.h_init, h * cfg.h_shrink)
            misses = 0
        else:
            h *= cfg.h_grow
            misses += 1
            if misses > 2:
                break
    return alpha, value, h, iters


def _inner_ascent(red, alpha, h: float, cfg: SolverConfig, tol: float):
    """Run quasi-Newton ascent until the projected gradient is below tol."""
    value = red.value(alpha)
    iters = 0
    stalled = False
    for _ in range(cfg.max_inner):
        grad = red.gradient(alpha)
        mask = red.free_mask(alpha, grad)
        g = np.where(mask, grad, 0.0)
        if math.sqrt(_vdot(g, g)) <= tol:
            break
        direction = qn_step(grad, red.hessian_matvec(alpha), mask, h, cfg)
        res = line_search(red, alpha, value, direction, g, h, cfg)
        iters += 1
        h = res.h
        if res.stalled:
            stalled = True
            alpha, value, h, extra = _polish(red, alpha, value, h, cfg, tol)
            iters += extra
            break
        alpha, value = res.alpha, res.value
    return alpha, value, h, iters, stalled


def solve(obj, A: AtomicMatrix, schedule: PenaltySchedule, alpha0=None,
          scfg: ScreenConfig | None = None, cfg: SolverConfig | None = None) -> SolveResult:
    """Working-set dual ascent over the implicit interaction space.

    Screens at the starting dual point to predict the active set, maximizes
    the reduced dual, then re-screens: emissions outside the active set are
    pulled in and the cycle repeats.  Converged means the final screen found
    nothing new and primal - dual <= kkt_tol * (1 + |primal|).
    """
    cfg = cfg or SolverConfig()
    scfg = obj.screen_config(scfg)
    alpha = obj.project(np.array(obj.alpha0() if alpha0 is None else alpha0, dtype=float))

    first = screen(A, obj.screen_weights(alpha), schedule, scfg)
    predicted = first.feature_sets()
    active = {e.feature_set.atoms: e for e in first.emitted}

    h = cfg.h_init
    inner_tol = cfg.kkt_tol
    expansions = 0
    total_inner = 0
    converged = False
    stalled = False
    log: list[tuple] = []
    check = first
    red = obj.reduced(list(active.values()))
    beta = red.primal_map(alpha)
    pval = dval = gap = math.nan
    outer = 0

    for outer in range(1, cfg.max_outer + 1):
        red = obj.reduced(list(active.values()))
        alpha, dval, h, inners, stalled = _inner_ascent(red, alpha, h, cfg, inner_tol)
        total_inner += inners

        check = screen(A, obj.screen_weights(alpha), schedule, scfg)
        missing = [e for e in check.emitted if e.feature_set.atoms not in active]
        beta = red.primal_map(alpha)
        pval = red.primal_value(beta)
        gap = duality_gap(pval, dval)
        log.append((outer, total_inner, dval, gap, len(check.emitted), check.explored_count))

        # a gap certifies optimality only when it is (numerically) nonnegative;
        # a substantially negative gap means the dual value is not a valid
        # bound (seen when the signed basket relaxation peaks off the orthant)
        if not missing and abs(gap) <= cfg.kkt_tol * (1.0 + abs(pval)):
            converged = True
            break
        if missing:
            for e in missing:
                active[e.feature_set.atoms] = e
            expansions += 1
        elif stalled:
            break
        else:
            # inner loop hit its gradient tolerance but the gap is not yet
            # certified; tighten and continue
            inner_tol = max(inner_tol * 0.1, 1e-14)

    intercept = getattr(obj, "intercept", None)
    model = PrimalModel.from_coefficients(obj.kind, red.feature_sets(), beta, intercept)
    state = DualState(alpha=alpha, dots=red.dots(alpha), dual_value=dval,
                      primal_value=pval, gap=gap, h=h,
                      inner_iterations=total_inner, outer_iterations=outer,
                      converged=converged, stalled=stalled)
    return SolveResult(state=state, model=model, screen_result=check,
                       predicted=predicted, expansions=expansions, log=log)
