"""Scalar conjugate toolkit and the primal model container.

The training problems all share one shape: a convex loss of the prediction
scores plus a per-interaction penalty.  At a dual point alpha, the inner
product of an interaction column with alpha determines that interaction's
primal coefficient through a closed-form map (soft-threshold, clamp, or
row-wise group shrink), and any coefficient whose inner product sits inside
the penalty's dead zone is exactly zero.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.special import xlogy

from .data import FeatureSet

__all__ = [
    "soft_threshold",
    "clamp",
    "logistic_conjugate",
    "primal_basket",
    "primal_logistic",
    "primal_matrix",
    "duality_gap",
    "PrimalModel",
]


def soft_threshold(x, lam):
    """sign(x) * max(|x| - lam, 0); lam may be a scalar or match x's shape."""
    x = np.asarray(x, dtype=float)
    out = np.sign(x) * np.maximum(np.abs(x) - lam, 0.0)
    return float(out) if out.ndim == 0 else out


def clamp(x, lo, hi):
    if np.any(np.asarray(lo) > np.asarray(hi)):
        raise ValueError("clamp requires lo <= hi")
    out = np.clip(np.asarray(x, dtype=float), lo, hi)
    return float(out) if out.ndim == 0 else out


def logistic_conjugate(a, y):
    """Conjugate of the logistic loss at dual value a for label y.

    With s = a + y this is s*log(s) + (1-s)*log(1-s), which is finite on
    [0, 1] (0*log(0) = 0) and undefined outside.  Accepts arrays.
    """
    s = np.asarray(a, dtype=float) + np.asarray(y, dtype=float)
    if np.any(s < 0.0) or np.any(s > 1.0):
        raise ValueError("logistic conjugate requires a + y in [0, 1]")
    out = xlogy(s, s) + xlogy(1.0 - s, 1.0 - s)
    return float(out) if out.ndim == 0 else out


def primal_basket(dots, lam, gamma):
    """Coefficient map for the covering objective: clamp((c^T a - lam)/gamma, 0, 1)."""
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    return clamp((np.asarray(dots, dtype=float) - lam) / gamma, 0.0, 1.0)


def primal_logistic(dots, lam, tau):
    """Coefficient map for the l1 + l2 objective: soft_threshold(c^T a, lam)/tau."""
    if tau <= 0:
        raise ValueError("tau must be positive")
    out = soft_threshold(dots, lam) / tau
    return out


def primal_matrix(row_dots, lam, eta):
    """Row-wise group shrink: rows with norm <= lam vanish, the rest shrink.

    ``row_dots`` is (m, T); ``lam`` a scalar or length-m vector.  Returns the
    (m, T) coefficient matrix (1 - lam/||z||)_+ z / eta.
    """
    if eta <= 0:
        raise ValueError("eta must be positive")
    z = np.atleast_2d(np.asarray(row_dots, dtype=float))
    norms = np.linalg.norm(z, axis=1)
    lam = np.broadcast_to(np.asarray(lam, dtype=float), norms.shape)
    scale = np.zeros_like(norms)
    live = norms > lam
    scale[live] = (norms[live] - lam[live]) / norms[live]
    return (scale[:, None] * z) / eta


def duality_gap(primal_value: float, dual_value: float) -> float:
    """primal - dual; non-negative once the active set is verified complete."""
    return primal_value - dual_value


@dataclass(frozen=True)
class PrimalModel:
    """A fitted sparse model: interaction sets with nonzero coefficients.

    ``coefficients`` is (m,) for scalar objectives and (m, T) for the matrix
    objective; ``intercept`` is length T (empty when the objective has no
    intercept).  Rows that are exactly zero are never stored.
    """

    kind: str
    active: tuple[FeatureSet, ...]
    coefficients: np.ndarray
    intercept: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self):
        if self.kind not in ("basket", "logistic", "matrix"):
            raise ValueError(f"unknown model kind {self.kind!r}")
        if len(self.active) != self.coefficients.shape[0]:
            raise ValueError("active sets and coefficient rows disagree")

    @classmethod
    def from_coefficients(cls, kind, active, coefficients, intercept=None) -> "PrimalModel":
        """Build a model, dropping rows whose coefficients are exactly zero."""
        coefficients = np.asarray(coefficients, dtype=float)
        active = tuple(active)
        if coefficients.ndim == 1:
            keep = np.flatnonzero(coefficients != 0.0)
        else:
            keep = np.flatnonzero(np.any(coefficients != 0.0, axis=1))
        inter = np.zeros(0) if intercept is None else np.asarray(intercept, dtype=float)
        return cls(kind, tuple(active[i] for i in keep), coefficients[keep], inter)

    @property
    def n_active(self) -> int:
        return len(self.active)

    def to_json_dict(self) -> dict:
        entries = []
        for fs, coef in zip(self.active, self.coefficients):
            e = {"atoms": list(fs.atoms)}
            if self.coefficients.ndim == 1:
                e["coef"] = float(coef)
            else:
                e["coef_row"] = [float(v) for v in coef]
            entries.append(e)
        return {
            "kind": self.kind,
            "intercept": [float(v) for v in self.intercept],
            "entries": entries,
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "PrimalModel":
        entries = d["entries"]
        active = tuple(FeatureSet(tuple(e["atoms"])) for e in entries)
        if entries and "coef_row" in entries[0]:
            coef = np.array([e["coef_row"] for e in entries], dtype=float)
        elif entries:
            coef = np.array([e["coef"] for e in entries], dtype=float)
        else:
            coef = np.zeros(0)
        return cls(d["kind"], active, coef, np.asarray(d.get("intercept", []), dtype=float))

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_json_dict(), indent=1) + "\n")

    @classmethod
    def load(cls, path) -> "PrimalModel":
        return cls.from_json_dict(json.loads(Path(path).read_text()))
