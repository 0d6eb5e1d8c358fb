"""Classical memoryless models: stochastic matrices driving a probability vector.

Stochastic matrices are column-indexed by the source outcome,
``S[x_next, x_prev]``, so each column sums to one. Sub-pattern statistics of a
classical process are marginals of the full table.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .stats import (
    DEFAULT_TOL,
    EPS_ZERO,
    CheckResult,
    JointDistribution,
    StatisticsFamily,
    markov_scan,
)

STOCH_ATOL = 1e-12


def check_stochastic(s: np.ndarray, atol: float = STOCH_ATOL) -> np.ndarray:
    s = np.asarray(s, dtype=float)
    if s.ndim != 2 or s.shape[0] != s.shape[1]:
        raise ValueError(f"stochastic matrix must be square, got shape {s.shape}")
    if s.min() < 0:
        raise ValueError("stochastic matrix has negative entries")
    cols = s.sum(axis=0)
    if np.max(np.abs(cols - 1.0)) > atol:
        raise ValueError(f"stochastic matrix columns sum to {cols}")
    return s


@dataclass(frozen=True)
class ClassicalMemorylessModel:
    """Initial probability vector plus one stochastic matrix per interval.

    ``unreachable`` lists ``(step, column)`` pairs whose column was not
    determined by data and was set to uniform by :func:`fit_classical`.
    """

    p1: np.ndarray
    steps: tuple[np.ndarray, ...]
    unreachable: tuple[tuple[int, int], ...] = field(default=())

    def __post_init__(self) -> None:
        p1 = np.asarray(self.p1, dtype=float)
        if p1.ndim != 1 or p1.min() < 0 or abs(p1.sum() - 1.0) > STOCH_ATOL:
            raise ValueError("p1 must be a probability vector")
        steps = tuple(check_stochastic(s) for s in self.steps)
        if any(s.shape[0] != p1.size for s in steps):
            raise ValueError("stochastic matrices must match the dimension of p1")
        object.__setattr__(self, "p1", p1)
        object.__setattr__(self, "steps", steps)

    @property
    def n_times(self) -> int:
        return len(self.steps) + 1

    @property
    def dim(self) -> int:
        return self.p1.size


@dataclass
class MarkovViolation:
    """Returned by :func:`fit_classical` when the input is not Markovian."""

    check: CheckResult


def classical_predict(model: ClassicalMemorylessModel, outcomes: Sequence[int]) -> float:
    """Probability of the full outcome sequence ``x_1, ..., x_n``."""
    if len(outcomes) != model.n_times:
        raise ValueError(f"expected {model.n_times} outcomes, got {len(outcomes)}")
    if any(not 0 <= x < model.dim for x in outcomes):
        raise IndexError(f"outcome out of range 0..{model.dim - 1}")
    p = model.p1[outcomes[0]]
    for s, prev, nxt in zip(model.steps, outcomes, outcomes[1:]):
        p *= s[nxt, prev]
    return float(p)


def classical_joint(model: ClassicalMemorylessModel) -> np.ndarray:
    """Full joint table with axis ``k`` holding the outcome at time ``k``."""
    joint = model.p1.copy()
    for s in model.steps:
        # new axis for the next outcome: joint[..., prev] * S[next, prev]
        joint = joint[..., None] * s.T
    return joint


def classical_family(model: ClassicalMemorylessModel) -> StatisticsFamily:
    """Every pattern's distribution, by marginalising the full table."""
    n, d = model.n_times, model.dim
    full = JointDistribution(n, (1 << n) - 1, d, classical_joint(model))
    table = {}
    for mask in range(1 << n):
        times = [t for t in range(n) if mask >> t & 1]
        table[mask] = JointDistribution(n, mask, d, full.marginal(times))
    return StatisticsFamily(n, d, table)


def fit_classical(full: JointDistribution, tol: float = DEFAULT_TOL,
                  eps_zero: float = EPS_ZERO) -> ClassicalMemorylessModel | MarkovViolation:
    """Reconstruct the memoryless model behind a Markovian full distribution.

    Each step matrix entry is the observed two-time conditional
    ``P(x_j | x_{j-1})`` obtained by marginalisation. Columns for outcomes
    that never occur are set to uniform and recorded in ``unreachable``.
    """
    n, d = full.n_times, full.outcome_dim
    if full.pattern != (1 << n) - 1:
        raise ValueError(f"fit_classical needs the all-times pattern, got {full.bits}")
    worst, where, skipped = markov_scan(full, eps_zero)
    if worst > tol:
        return MarkovViolation(CheckResult("markov_full", False, worst, where, skipped))
    p1 = full.marginal([0])
    p1 = p1 / p1.sum()
    steps, unreachable = [], []
    for j in range(1, n):
        pair = full.marginal([j - 1, j])
        s = np.empty((d, d))
        for a in range(d):
            tot = pair[a].sum()
            if tot < eps_zero:
                s[:, a] = 1.0 / d
                unreachable.append((j - 1, a))
            else:
                col = np.clip(pair[a], 0.0, None)
                s[:, a] = col / col.sum()
        steps.append(s)
    return ClassicalMemorylessModel(p1, tuple(steps), tuple(unreachable))


def random_stochastic(rng: np.random.Generator, d: int) -> np.ndarray:
    """Column-stochastic matrix with Dirichlet(1) columns (strictly positive a.s.)."""
    return rng.dirichlet(np.ones(d), size=d).T


def random_classical_model(rng: np.random.Generator, n_times: int = 4, d: int = 2) -> ClassicalMemorylessModel:
    return ClassicalMemorylessModel(
        rng.dirichlet(np.ones(d)),
        tuple(random_stochastic(rng, d) for _ in range(n_times - 1)),
    )
