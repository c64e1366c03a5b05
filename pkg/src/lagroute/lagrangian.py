"""Multiplier state, sub-gradients, step-size schedules and update rules.

All per-edge quantities are float64/int64 vectors indexed by the graph's edge
numbering.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum
from typing import Iterable

import numpy as np


class Method(str, Enum):
    PRIMAL_DUAL = "primal-dual"
    PROJECTED = "projected"
    DEFLECTED = "deflected"


class StepRule(str, Enum):
    KKT = "kkt"
    PARALAR = "paralar"


class KKTOperator(str, Enum):
    """Vector whose 2-norm scales the ``kkt`` step."""

    VIOLATION = "violation"  # max(0, u - W)
    SUBGRADIENT = "subgradient"  # u - W


@dataclass(frozen=True)
class MultiplierState:
    lam: np.ndarray
    k: int = 1
    last_alpha: float = 0.0

    def __post_init__(self):
        lam = np.asarray(self.lam, dtype=np.float64)
        if np.any(lam < 0):
            raise ValueError("multipliers must be nonnegative")
        if self.k < 1:
            raise ValueError(f"iteration counter must be >= 1, got {self.k}")
        object.__setattr__(self, "lam", lam)

    @classmethod
    def zeros(cls, n_edges: int) -> MultiplierState:
        return cls(np.zeros(n_edges))


@dataclass(frozen=True)
class Subgradient:
    g: np.ndarray  # u_e - W
    v: np.ndarray  # max(0, u_e - W)

    @property
    def total_violation(self) -> int:
        return int(self.v.sum())


def compute_usage(trees: Iterable, n_edges: int) -> np.ndarray:
    """Number of trees using each edge.

    ``trees`` holds RouteTree objects or raw edge-index arrays.
    """
    parts = [np.asarray(getattr(t, "edge_ids", t), dtype=np.int64) for t in trees]
    if not parts:
        return np.zeros(n_edges, dtype=np.int64)
    return np.bincount(np.concatenate(parts), minlength=n_edges).astype(np.int64)


def subgradient(usage: np.ndarray, width: int) -> Subgradient:
    if width < 1:
        raise ValueError(f"channel width must be >= 1, got {width}")
    g = np.asarray(usage, dtype=np.int64) - int(width)
    return Subgradient(g, np.maximum(g, 0))


def step_size_paralar(k: int) -> float:
    """Diminishing schedule ``0.01 / (k + 1)``."""
    if k < 1:
        raise ValueError(f"iteration must be >= 1, got {k}")
    return 0.01 / (k + 1)


def step_size_kkt(k: int, sg: Subgradient, operator: KKTOperator | str = KKTOperator.VIOLATION) -> float:
    """``(1/k) / ||T||_2``; zero when the operator vanishes (nothing to correct)."""
    if k < 1:
        raise ValueError(f"iteration must be >= 1, got {k}")
    vec = sg.v if KKTOperator(operator) is KKTOperator.VIOLATION else sg.g
    norm = float(np.linalg.norm(vec.astype(np.float64)))
    if norm == 0.0:
        return 0.0
    return (1.0 / k) / norm


def update_primal_dual(state: MultiplierState, sg: Subgradient, alpha: float) -> MultiplierState:
    """``lam + alpha * max(0, u - W)``: multipliers never decrease."""
    if alpha < 0:
        raise ValueError("step size must be nonnegative")
    return MultiplierState(state.lam + alpha * sg.v, state.k + 1, alpha)


def update_projected(state: MultiplierState, sg: Subgradient, alpha: float) -> MultiplierState:
    """``max(0, lam + alpha * (u - W))``."""
    if alpha < 0:
        raise ValueError("step size must be nonnegative")
    return MultiplierState(np.maximum(0.0, state.lam + alpha * sg.g), state.k + 1, alpha)


def update_deflected(state: MultiplierState, sg: Subgradient, prev_direction, alpha: float,
                     beta: float) -> tuple[MultiplierState, np.ndarray]:
    """Projected step along ``d = g + beta * d_prev``; returns the new state and ``d``."""
    if alpha < 0:
        raise ValueError("step size must be nonnegative")
    if not 0.0 <= beta < 1.0:
        raise ValueError(f"beta must lie in [0, 1), got {beta}")
    prev = np.zeros(len(sg.g)) if prev_direction is None else np.asarray(prev_direction, dtype=np.float64)
    d = sg.g + beta * prev
    lam = np.maximum(0.0, state.lam + alpha * d)
    return MultiplierState(lam, state.k + 1, alpha), d


def with_alpha(state: MultiplierState, alpha: float) -> MultiplierState:
    return replace(state, last_alpha=alpha)
