"""Dual formulations of the three training objectives.

Each objective maximizes a concave dual D(alpha) whose gradient vanishes
exactly at the KKT pairing between dual variable and primal scores.  The
penalty contribution only ever involves the currently active interaction
columns: inactive columns are those the screen certifies to have inner
products inside the penalty dead zone, and they contribute nothing to value,
gradient, or curvature.  All three expose the same surface to the solver:

    value / gradient / hessian_matvec   on the reduced problem,
    project / free_mask                 for the feasible set,
    primal_map / primal_value           to recover and score coefficients.

Dual values keep their additive constants, so value equals the primal
optimum at the optimum and duality gaps are exact.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from scipy.special import xlogy

from .data import AtomicMatrix, DualWeights, FeatureSet, interaction_column
from .duality import primal_basket, primal_logistic, primal_matrix
from .screening import Emitted, PenaltySchedule, ScreenConfig

__all__ = [
    "BasketSpec",
    "LogisticSpec",
    "MatrixSpec",
    "DualObjective",
    "ReducedDual",
    "basket_dual",
    "logistic_dual",
    "matrix_dual",
    "rank_report",
]

_EPS = 1e-12


@dataclass(frozen=True)
class BasketSpec:
    """Covering objective: 0.5 * ||(tau - scores)_+||^2 plus weighted l1 and
    a small ridge, with coefficients boxed to [0, 1]."""

    tau_target: float = 10.0
    penalty: PenaltySchedule = field(default_factory=lambda: PenaltySchedule.flat(1.0))
    gamma: float = 1e-3

    def __post_init__(self):
        if self.tau_target <= 0:
            raise ValueError("tau_target must be positive")
        if self.gamma <= 0:
            raise ValueError("gamma must be positive")


@dataclass(frozen=True)
class LogisticSpec:
    """Logistic loss with weighted l1 and l2 penalties; labels in {0, 1}."""

    labels: np.ndarray
    penalty: PenaltySchedule = field(default_factory=lambda: PenaltySchedule.flat(1.0))
    tau_l2: float = 1.0

    def __post_init__(self):
        y = np.asarray(self.labels, dtype=float)
        if y.ndim != 1 or not np.all((y == 0.0) | (y == 1.0)):
            raise ValueError("labels must be a flat 0/1 vector")
        object.__setattr__(self, "labels", y)
        if self.tau_l2 <= 0:
            raise ValueError("tau_l2 must be positive")


@dataclass(frozen=True)
class MatrixSpec:
    """Multi-response least squares with a nuclear-norm penalty on the
    prediction matrix, row-wise group l2 on coefficients, and ridge."""

    responses: np.ndarray
    rho_nuclear: float = 0.0
    penalty: PenaltySchedule = field(
        default_factory=lambda: PenaltySchedule.supergeometric(1.0, 1.5, 1.5))
    eta_l2: float = 1e-3
    fit_intercept: bool = True

    def __post_init__(self):
        Y = np.asarray(self.responses, dtype=float)
        if Y.ndim != 2:
            raise ValueError("responses must be an (n, T) matrix")
        object.__setattr__(self, "responses", Y)
        if self.rho_nuclear < 0:
            raise ValueError("rho_nuclear must be non-negative")
        if self.eta_l2 <= 0:
            raise ValueError("eta_l2 must be positive")


def _gram_singulars(R: np.ndarray):
    """Singular values and right singular vectors of R via the T x T Gram."""
    G = R.T @ R
    evals, Q = np.linalg.eigh(G)
    sig = np.sqrt(np.clip(evals, 0.0, None))
    return sig, Q


def _sv_excess(R: np.ndarray, rho: float) -> np.ndarray:
    """Sum over singular triples of (sigma - rho)_+ u q^T, computed without
    forming the left factors: R Q diag((sigma - rho)_+/sigma) Q^T.  At
    rho = 0 this reproduces R itself."""
    sig, Q = _gram_singulars(R)
    f = np.zeros_like(sig)
    live = sig > rho
    f[live] = (sig[live] - rho) / sig[live]
    return ((R @ Q) * f) @ Q.T


class ReducedDual:
    """Dual problem restricted to a list of active interaction columns."""

    def __init__(self, obj, active):
        self.obj = obj
        self.active = list(active)
        n = obj.A.n_rows
        if self.active:
            self.F = np.column_stack([e.column.dense() for e in self.active])
            self.thr = np.array([e.threshold for e in self.active])
        else:
            self.F = np.zeros((n, 0))
            self.thr = np.zeros(0)

    def dots(self, alpha):
        return self.F.T @ alpha

    def project(self, alpha):
        return self.obj.project(alpha)

    def feature_sets(self):
        return tuple(e.feature_set for e in self.active)


class DualObjective:
    """Problem-level surface: feasible set, screening mode, reduction."""

    kind = ""
    nonneg_dual = False
    group_mode = False

    def __init__(self, A: AtomicMatrix):
        self.A = A

    def screen_config(self, base: ScreenConfig | None = None) -> ScreenConfig:
        base = base or ScreenConfig()
        return replace(base, nonneg_dual=self.nonneg_dual, group_mode=self.group_mode)

    def screen_weights(self, alpha) -> DualWeights:
        return DualWeights.from_alpha(alpha)

    def project(self, alpha):
        return alpha

    def alpha0(self):
        raise NotImplementedError

    def reduced(self, active) -> ReducedDual:
        raise NotImplementedError


# ---------------------------------------------------------------- basket ---

class _BasketReduced(ReducedDual):
    def __init__(self, obj, active):
        super().__init__(obj, active)
        self.tau = obj.spec.tau_target
        self.gamma = obj.spec.gamma

    def _excess(self, z):
        """Penalty contribution per active column: the conjugate of the
        clamp map, piecewise quadratic then linear in z = c^T a - lam."""
        g = self.gamma
        return np.where(z <= 0.0, 0.0,
                        np.where(z >= g, z - 0.5 * g, 0.5 * z * z / g))

    def value(self, alpha) -> float:
        z = self.dots(alpha) - self.thr
        return float(self.tau * alpha.sum() - 0.5 * alpha @ alpha - self._excess(z).sum())

    def primal_map(self, alpha):
        return primal_basket(self.dots(alpha), self.thr, self.gamma)

    def gradient(self, alpha):
        return self.tau - alpha - self.F @ self.primal_map(alpha)

    def hessian_matvec(self, alpha):
        z = self.dots(alpha) - self.thr
        live = (z > 0.0) & (z < self.gamma)
        FB = self.F[:, live]
        g = self.gamma

        def hv(v):
            return v + FB @ (FB.T @ v) / g

        return hv

    def free_mask(self, alpha, grad):
        if not self.obj.enforce_nonneg:
            return np.ones_like(alpha, dtype=bool)
        return (alpha > 0.0) | (grad > 0.0)

    def primal_value(self, beta) -> float:
        r = self.tau - self.F @ beta
        loss = 0.5 * float(np.sum(np.maximum(r, 0.0) ** 2))
        return loss + float(self.thr @ beta) + 0.5 * self.gamma * float(beta @ beta)


class BasketDual(DualObjective):
    """Dual of the covering objective.  The loss conjugate confines the dual
    to alpha >= 0 unless ``enforce_nonneg`` is switched off, in which case
    the solver roams freely and non-negativity emerges at the optimum."""

    kind = "basket"

    def __init__(self, spec: BasketSpec, A: AtomicMatrix, enforce_nonneg: bool = True):
        super().__init__(A)
        self.spec = spec
        self.enforce_nonneg = enforce_nonneg

    @property
    def nonneg_dual(self):
        return self.enforce_nonneg

    def alpha0(self):
        return np.full(self.A.n_rows, self.spec.tau_target)

    def project(self, alpha):
        return np.maximum(alpha, 0.0) if self.enforce_nonneg else alpha

    def reduced(self, active):
        return _BasketReduced(self, active)


def basket_dual(spec: BasketSpec, A: AtomicMatrix, enforce_nonneg: bool = True) -> BasketDual:
    return BasketDual(spec, A, enforce_nonneg=enforce_nonneg)


# -------------------------------------------------------------- logistic ---

class _LogisticReduced(ReducedDual):
    def __init__(self, obj, active):
        super().__init__(obj, active)
        self.y = obj.spec.labels
        self.tau = obj.spec.tau_l2

    def value(self, alpha) -> float:
        s = np.clip(self.y - alpha, 0.0, 1.0)
        ent = -(xlogy(s, s) + xlogy(1.0 - s, 1.0 - s))
        shr = np.maximum(np.abs(self.dots(alpha)) - self.thr, 0.0)
        return float(ent.sum() - 0.5 * (shr @ shr) / self.tau)

    def primal_map(self, alpha):
        return primal_logistic(self.dots(alpha), self.thr, self.tau)

    def gradient(self, alpha):
        s = np.clip(self.y - alpha, _EPS, 1.0 - _EPS)
        return np.log(s / (1.0 - s)) - self.F @ self.primal_map(alpha)

    def hessian_matvec(self, alpha):
        s = np.clip(self.y - alpha, _EPS, 1.0 - _EPS)
        diag = 1.0 / s + 1.0 / (1.0 - s)
        live = np.abs(self.dots(alpha)) > self.thr
        FB = self.F[:, live]
        tau = self.tau

        def hv(v):
            return diag * v + FB @ (FB.T @ v) / tau

        return hv

    def free_mask(self, alpha, grad):
        lo = self.y - 1.0
        hi = self.y
        pinned_lo = (alpha <= lo) & (grad <= 0.0)
        pinned_hi = (alpha >= hi) & (grad >= 0.0)
        return ~(pinned_lo | pinned_hi)

    def primal_value(self, beta) -> float:
        scores = self.F @ beta
        loss = float(np.sum(np.logaddexp(0.0, scores) - self.y * scores))
        return loss + float(self.thr @ np.abs(beta)) + 0.5 * self.tau * float(beta @ beta)


class LogisticDual(DualObjective):
    """Dual of the logistic objective.  The dual variable is the residual
    y - sigmoid(scores), feasible on the box [y - 1, y]."""

    kind = "logistic"

    def __init__(self, spec: LogisticSpec, A: AtomicMatrix):
        super().__init__(A)
        if spec.labels.shape[0] != A.n_rows:
            raise ValueError("labels and matrix disagree on row count")
        self.spec = spec

    def alpha0(self):
        return self.spec.labels - 0.5

    def project(self, alpha):
        return np.clip(alpha, self.spec.labels - 1.0, self.spec.labels)

    def reduced(self, active):
        return _LogisticReduced(self, active)


def logistic_dual(spec: LogisticSpec, A: AtomicMatrix) -> LogisticDual:
    return LogisticDual(spec, A)


# ---------------------------------------------------------------- matrix ---

class _MatrixReduced(ReducedDual):
    def __init__(self, obj, active):
        super().__init__(obj, active)
        self.Yc = obj.Yc
        self.rho = obj.spec.rho_nuclear
        self.eta = obj.spec.eta_l2
        self._half_y2 = 0.5 * float(np.sum(self.Yc * self.Yc))

    def value(self, alpha) -> float:
        sig, _ = _gram_singulars(self.Yc - alpha)
        clipped = np.maximum(sig - self.rho, 0.0)
        Z = self.dots(alpha)
        shr = np.maximum(np.linalg.norm(Z, axis=1) - self.thr, 0.0)
        return float(self._half_y2 - 0.5 * clipped @ clipped - 0.5 * (shr @ shr) / self.eta)

    def primal_map(self, alpha):
        Z = self.dots(alpha)
        if Z.shape[0] == 0:
            return np.zeros((0, alpha.shape[1]))
        return primal_matrix(Z, self.thr, self.eta)

    def gradient(self, alpha):
        return _sv_excess(self.Yc - alpha, self.rho) - self.F @ self.primal_map(alpha)

    def hessian_matvec(self, alpha):
        Z = self.dots(alpha)
        norms = np.linalg.norm(Z, axis=1) if Z.shape[0] else np.zeros(0)
        live = np.zeros_like(norms)
        on = norms > self.thr
        live[on] = (norms[on] - self.thr[on]) / norms[on]
        F = self.F
        eta = self.eta

        def hv(v):
            return v + F @ (live[:, None] * (F.T @ v)) / eta

        return hv

    def free_mask(self, alpha, grad):
        return np.ones_like(alpha, dtype=bool)

    def primal_value(self, W) -> float:
        P = self.F @ W if W.shape[0] else np.zeros_like(self.Yc)
        sig, _ = _gram_singulars(P)
        r = self.Yc - P
        loss = 0.5 * float(np.sum(r * r)) + self.rho * float(sig.sum())
        group = float(self.thr @ np.linalg.norm(W, axis=1)) if W.shape[0] else 0.0
        return loss + group + 0.5 * self.eta * float(np.sum(W * W))


class MatrixDual(DualObjective):
    """Dual of the multi-response objective.  The dual variable is an (n, T)
    matrix; singular values of the residual above rho_nuclear drive the
    gradient through their singular vectors, so low-rank structure in the
    fitted prediction matrix falls out of the clipping."""

    kind = "matrix"
    group_mode = True

    def __init__(self, spec: MatrixSpec, A: AtomicMatrix):
        super().__init__(A)
        Y = spec.responses
        if Y.shape[0] != A.n_rows:
            raise ValueError("responses and matrix disagree on row count")
        self.spec = spec
        if spec.fit_intercept:
            self.intercept = Y.mean(axis=0)
            self.Yc = Y - self.intercept
        else:
            self.intercept = np.zeros(Y.shape[1])
            self.Yc = Y

    def alpha0(self):
        """Singular-value soft threshold of the centered responses: the dual
        optimum of the empty-model problem."""
        return _sv_excess(self.Yc, self.spec.rho_nuclear)

    def reduced(self, active):
        return _MatrixReduced(self, active)


def matrix_dual(spec: MatrixSpec, A: AtomicMatrix) -> MatrixDual:
    return MatrixDual(spec, A)


def rank_report(spec: MatrixSpec, A: AtomicMatrix, alpha: np.ndarray, model):
    """(numerical rank of the fitted prediction matrix, count of residual
    singular values above rho_nuclear).  The two coincide at an exact
    optimum, so the pair is a convergence diagnostic as well as a readout
    of how much rank the nuclear penalty retained."""
    Y = spec.responses
    Yc = Y - Y.mean(axis=0) if spec.fit_intercept else Y
    if model.n_active:
        F = np.column_stack([interaction_column(A, fs).dense() for fs in model.active])
        P = F @ model.coefficients
    else:
        P = np.zeros_like(Yc)
    sig_p, _ = _gram_singulars(P)
    top = sig_p.max(initial=0.0)
    pred_rank = int(np.sum(sig_p > 1e-8 * top)) if top > 0 else 0
    sig_r, _ = _gram_singulars(Yc - alpha)
    retained = int(np.sum(sig_r > spec.rho_nuclear))
    return pred_rank, retained
