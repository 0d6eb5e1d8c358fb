"""Multi-time statistics families and the tests run on them.

A family maps each probing pattern (a bitmask over times, bit ``j`` for the
``j``-th time, 0-based) to the joint distribution of the outcomes recorded at
the probed times. Distribution arrays carry one axis per probed time in
increasing time order, so the flattened C-order table has the earliest
outcome as its slowest index.

Conditioning on an event of probability below ``eps_zero`` yields conditional
probability 0; comparisons that would need such a conditional are listed as
skipped and do not count as violations.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

EPS_ZERO = 1e-12
DEFAULT_TOL = 1e-9
SUM_TOL = 1e-9


def pattern_from_bits(bits: str) -> int:
    """``"1011"`` -> mask with bits 0, 2, 3 set (leftmost character is the first time)."""
    if not bits or set(bits) - {"0", "1"}:
        raise ValueError(f"pattern must be a non-empty string of 0/1, got {bits!r}")
    return sum(1 << k for k, c in enumerate(bits) if c == "1")


def pattern_to_bits(mask: int, n_times: int) -> str:
    return "".join("1" if mask >> k & 1 else "0" for k in range(n_times))


def _times(mask: int, n_times: int) -> tuple[int, ...]:
    return tuple(t for t in range(n_times) if mask >> t & 1)


def _label(times: Iterable[int], outcomes: Iterable[int]) -> str:
    return ",".join(f"x{t + 1}={x}" for t, x in zip(times, outcomes))


class IncompleteFamilyError(ValueError):
    """A check needs probing patterns that the family does not contain."""

    def __init__(self, missing: list[str]):
        self.missing = missing
        shown = ", ".join(missing[:8]) + (" ..." if len(missing) > 8 else "")
        super().__init__(f"family is missing {len(missing)} pattern(s): {shown}")


@dataclass(frozen=True)
class JointDistribution:
    """Outcome distribution for one probing pattern."""

    n_times: int
    pattern: int
    outcome_dim: int
    probs: np.ndarray

    def __post_init__(self) -> None:
        k = bin(self.pattern).count("1")
        if self.pattern >> self.n_times:
            raise ValueError(f"pattern mask {self.pattern} exceeds n_times={self.n_times}")
        probs = np.asarray(self.probs, dtype=float).reshape((self.outcome_dim,) * k)
        if not np.all(np.isfinite(probs)):
            raise ValueError(f"pattern {self.bits}: non-finite probabilities")
        if probs.min(initial=0.0) < -SUM_TOL:
            raise ValueError(f"pattern {self.bits}: negative probability {probs.min():.3g}")
        if abs(probs.sum() - 1.0) > SUM_TOL:
            raise ValueError(f"pattern {self.bits}: probabilities sum to {probs.sum():.12g}")
        probs.setflags(write=False)
        object.__setattr__(self, "probs", probs)

    @property
    def bits(self) -> str:
        return pattern_to_bits(self.pattern, self.n_times)

    @property
    def measured_times(self) -> tuple[int, ...]:
        return _times(self.pattern, self.n_times)

    def marginal(self, times: Iterable[int]) -> np.ndarray:
        """Sum out every probed time not in ``times``; axes stay in time order."""
        keep = sorted(set(times))
        measured = self.measured_times
        missing = [t for t in keep if t not in measured]
        if missing:
            raise KeyError(f"time(s) {[t + 1 for t in missing]} not probed in pattern {self.bits}")
        drop = tuple(a for a, t in enumerate(measured) if t not in keep)
        return self.probs.sum(axis=drop) if drop else self.probs

    def outcomes(self) -> list[tuple[int, ...]]:
        return list(itertools.product(range(self.outcome_dim), repeat=len(self.measured_times)))


@dataclass(frozen=True)
class StatisticsFamily:
    """Joint distributions indexed by probing pattern mask."""

    n_times: int
    outcome_dim: int
    table: Mapping[int, JointDistribution]

    def __post_init__(self) -> None:
        for mask, dist in self.table.items():
            if dist.pattern != mask or dist.n_times != self.n_times or dist.outcome_dim != self.outcome_dim:
                raise ValueError(f"entry {pattern_to_bits(mask, self.n_times)} is inconsistent with the family")
        object.__setattr__(self, "table", dict(sorted(self.table.items())))

    @property
    def full_mask(self) -> int:
        return (1 << self.n_times) - 1

    def __getitem__(self, key: int | str) -> JointDistribution:
        mask = pattern_from_bits(key) if isinstance(key, str) else key
        return self.table[mask]

    def __contains__(self, key: int | str) -> bool:
        mask = pattern_from_bits(key) if isinstance(key, str) else key
        return mask in self.table

    def missing(self) -> list[str]:
        return [pattern_to_bits(m, self.n_times) for m in range(1 << self.n_times) if m not in self.table]

    @property
    def complete(self) -> bool:
        return len(self.table) == 1 << self.n_times

    def require_complete(self) -> None:
        if not self.complete:
            raise IncompleteFamilyError(self.missing())


def conditional(dist: JointDistribution, target: int, x_target: int, history: Mapping[int, int],
                eps_zero: float = EPS_ZERO) -> float:
    """``P(x_target | history)`` within one pattern's distribution.

    Probed times other than ``target`` and the history are summed out. Returns
    0 when the history has probability below ``eps_zero``.
    """
    if any(t >= target for t in history):
        raise ValueError("history times must precede the target time")
    times = sorted([*history, target])
    p = dist.marginal(times)
    idx = tuple(x_target if t == target else history[t] for t in times)
    num = float(p[idx])
    den = float(p[idx[:-1]].sum())
    return num / den if den >= eps_zero else 0.0


def conditional_table(dist: JointDistribution, target: int, eps_zero: float = EPS_ZERO) -> np.ndarray:
    """``P(x_target | all earlier probed outcomes)`` for every outcome tuple.

    The result has one axis per probed time up to and including ``target``.
    """
    times = [t for t in dist.measured_times if t <= target]
    if target not in times:
        raise KeyError(f"time {target + 1} not probed in pattern {dist.bits}")
    p = dist.marginal(times)
    den = p.sum(axis=-1, keepdims=True)
    safe = np.where(den >= eps_zero, den, 1.0)
    return np.where(den >= eps_zero, p / safe, 0.0)


@dataclass
class CheckResult:
    """Outcome of one check: flag, worst deviation and where it occurred."""

    name: str
    passed: bool
    worst: float = 0.0
    where: str = ""
    skipped: list[str] = field(default_factory=list)
    per_pattern: dict[str, float] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "worst": self.worst,
            "where": self.where,
            "per_pattern": self.per_pattern,
            "skipped": self.skipped,
        }


def markov_scan(dist: JointDistribution, eps_zero: float = EPS_ZERO) -> tuple[float, str, list[str]]:
    """Largest Markov violation inside one distribution.

    For every probed time with at least two earlier probed times, the
    conditionals given each full history, together with the conditional given
    only the latest outcome, are compared among themselves for each value of
    that latest outcome. The violation is the largest spread between any two
    of them. Returns ``(worst, location, skipped)``.
    """
    times = dist.measured_times
    d = dist.outcome_dim
    worst, where, skipped = 0.0, "", []
    for m in range(2, len(times)):
        p = dist.marginal(times[: m + 1])
        hist = p.sum(axis=-1)
        latest = p.sum(axis=tuple(range(m - 1)))
        tgt = f"x{times[m] + 1}"
        for a in range(d):
            rows: list[tuple[str, np.ndarray]] = []
            la = latest[a].sum()
            if la >= eps_zero:
                rows.append((_label(times[m - 1:m], (a,)), latest[a] / la))
            for h in itertools.product(range(d), repeat=m - 1):
                full_h = (*h, a)
                label = _label(times[:m], full_h)
                if hist[full_h] < eps_zero:
                    skipped.append(f"{dist.bits}: {tgt} | {label}")
                    continue
                rows.append((label, p[full_h] / hist[full_h]))
            if len(rows) < 2:
                continue
            vals = np.array([r for _, r in rows])
            spread = vals.max(axis=0) - vals.min(axis=0)
            x = int(np.argmax(spread))
            if spread[x] > worst:
                worst = float(spread[x])
                hi, lo = rows[int(np.argmax(vals[:, x]))][0], rows[int(np.argmin(vals[:, x]))][0]
                where = f"{dist.bits}: P({tgt}={x} | {hi}) vs P({tgt}={x} | {lo})"
    return worst, where, skipped


def is_markovian_full(fam: StatisticsFamily, tol: float = DEFAULT_TOL, eps_zero: float = EPS_ZERO) -> CheckResult:
    """Markovianity of the distribution that probes every time."""
    if fam.full_mask not in fam.table:
        raise IncompleteFamilyError([pattern_to_bits(fam.full_mask, fam.n_times)])
    worst, where, skipped = markov_scan(fam.table[fam.full_mask], eps_zero)
    return CheckResult("markov_full", worst <= tol, worst, where, skipped)


def is_markovian_sub(fam: StatisticsFamily, tol: float = DEFAULT_TOL, eps_zero: float = EPS_ZERO) -> CheckResult:
    """Markovianity of every probing pattern's own distribution."""
    fam.require_complete()
    worst, where, skipped, per = 0.0, "", [], {}
    for dist in fam.table.values():
        w, loc, sk = markov_scan(dist, eps_zero)
        per[dist.bits] = w
        skipped.extend(sk)
        if w > worst:
            worst, where = w, loc
    return CheckResult("markov_sub", worst <= tol, worst, where, skipped, per)


def is_compatible(fam: StatisticsFamily, tol: float = DEFAULT_TOL, eps_zero: float = EPS_ZERO) -> CheckResult:
    """Agreement of ``P(x_j | x_i)`` across patterns whose last probe before ``j`` is ``i``.

    In each pattern the conditional is computed from that pattern's own
    distribution with every other probed time summed out.
    """
    fam.require_complete()
    n, d = fam.n_times, fam.outcome_dim
    worst, where, skipped = 0.0, "", []
    for i, j in itertools.combinations(range(n), 2):
        between = sum(1 << t for t in range(i + 1, j))
        rows: list[tuple[str, np.ndarray]] = []
        for mask, dist in fam.table.items():
            if not (mask >> i & 1 and mask >> j & 1) or mask & between:
                continue
            pij = dist.marginal((i, j))
            pi = pij.sum(axis=1)
            cond = np.full((d, d), np.nan)
            for a in range(d):
                if pi[a] >= eps_zero:
                    cond[a] = pij[a] / pi[a]
                else:
                    skipped.append(f"{dist.bits}: x{j + 1} | x{i + 1}={a}")
            rows.append((dist.bits, cond))
        for a in range(d):
            valid = [(b, c[a]) for b, c in rows if not np.isnan(c[a, 0])]
            if len(valid) < 2:
                continue
            vals = np.array([c for _, c in valid])
            spread = vals.max(axis=0) - vals.min(axis=0)
            x = int(np.argmax(spread))
            if spread[x] > worst:
                worst = float(spread[x])
                hi, lo = valid[int(np.argmax(vals[:, x]))][0], valid[int(np.argmin(vals[:, x]))][0]
                where = f"P(x{j + 1}={x} | x{i + 1}={a}): pattern {hi} vs pattern {lo}"
    return CheckResult("compatible", worst <= tol, worst, where, skipped)


def kolmogorov_consistent(fam: StatisticsFamily, tol: float = DEFAULT_TOL) -> CheckResult:
    """Whether every pattern's distribution is a marginal of the full one."""
    fam.require_complete()
    full = fam.table[fam.full_mask]
    worst, where, per = 0.0, "", {}
    for dist in fam.table.values():
        diff = float(np.max(np.abs(dist.probs - full.marginal(dist.measured_times))))
        per[dist.bits] = diff
        if diff > worst:
            worst, where = diff, f"pattern {dist.bits} vs marginal of {full.bits}"
    return CheckResult("kolmogorov", worst <= tol, worst, where, [], per)


class Verdict(str, enum.Enum):
    CONSISTENT_WITH_MEMORYLESS = "CONSISTENT_WITH_MEMORYLESS"
    NON_MARKOVIAN = "NON_MARKOVIAN"
    HIDDEN_MEMORY_NONMARKOVIAN_SUB = "HIDDEN_MEMORY_NONMARKOVIAN_SUB"
    HIDDEN_MEMORY_INCOMPATIBLE = "HIDDEN_MEMORY_INCOMPATIBLE"

    @property
    def hidden_memory(self) -> bool:
        return self.name.startswith("HIDDEN_MEMORY")


@dataclass
class AnalysisReport:
    markov_full: CheckResult
    markov_sub: CheckResult
    compatible: CheckResult
    kolmogorov: CheckResult
    verdict: Verdict
    tol: float

    @property
    def skipped_comparisons(self) -> list[str]:
        return sorted(set(self.markov_full.skipped + self.markov_sub.skipped + self.compatible.skipped))

    def checks(self) -> list[CheckResult]:
        return [self.markov_full, self.markov_sub, self.compatible, self.kolmogorov]

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict.value,
            "tol": self.tol,
            **{c.name: c.to_dict() for c in self.checks()},
            "skipped_comparisons": self.skipped_comparisons,
        }

    def render(self) -> str:
        lines = [f"{'check':<14}{'result':<8}{'worst':>20}  location"]
        for c in self.checks():
            lines.append(f"{c.name:<14}{'pass' if c.passed else 'FAIL':<8}{c.worst:>20.12g}  {c.where}")
        lines.append(f"skipped comparisons (zero-probability conditioning): {len(self.skipped_comparisons)}")
        lines.append(f"verdict: {self.verdict.value}")
        return "\n".join(lines)


def witness_hidden_memory(fam: StatisticsFamily, tol: float = DEFAULT_TOL,
                          eps_zero: float = EPS_ZERO) -> AnalysisReport:
    """Run all checks and classify the family.

    A non-Markovian full table is plain memory. Markovian full statistics with
    non-Markovian sub-statistics, or with incompatible conditionals, cannot
    come from any memoryless quantum model probed sharply. Passing everything
    only means no witness fired.
    """
    fam.require_complete()
    full = is_markovian_full(fam, tol, eps_zero)
    sub = is_markovian_sub(fam, tol, eps_zero)
    compat = is_compatible(fam, tol, eps_zero)
    kolmo = kolmogorov_consistent(fam, tol)
    if not full.passed:
        verdict = Verdict.NON_MARKOVIAN
    elif not sub.passed:
        verdict = Verdict.HIDDEN_MEMORY_NONMARKOVIAN_SUB
    elif not compat.passed:
        verdict = Verdict.HIDDEN_MEMORY_INCOMPATIBLE
    else:
        verdict = Verdict.CONSISTENT_WITH_MEMORYLESS
    return AnalysisReport(full, sub, compat, kolmo, verdict, tol)
