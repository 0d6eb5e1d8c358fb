"""Rebuild both circuits and compare every reference table with the simulator."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .circuits import CIRCUITS, oracle_tables
from .quantum import all_pattern_statistics
from .stats import DEFAULT_TOL, Verdict, conditional_table, witness_hidden_memory

EXPECTED_VERDICTS = {
    "fig2": Verdict.HIDDEN_MEMORY_NONMARKOVIAN_SUB,
    "fig3": Verdict.HIDDEN_MEMORY_INCOMPATIBLE,
}


@dataclass
class TableCheck:
    circuit: str
    label: str
    pattern: str
    kind: str
    rows: list[tuple[str, float, float]]
    max_diff: float
    passed: bool


@dataclass
class VerdictCheck:
    circuit: str
    expected: str
    got: str
    passed: bool
    worst: dict[str, float] = field(default_factory=dict)


@dataclass
class Reproduction:
    tol: float
    tables: list[TableCheck]
    verdicts: list[VerdictCheck]

    @property
    def passed(self) -> bool:
        return all(t.passed for t in self.tables) and all(v.passed for v in self.verdicts)

    def to_dict(self) -> dict:
        return {
            "tol": self.tol,
            "passed": self.passed,
            "tables": [
                {
                    "circuit": t.circuit, "label": t.label, "pattern": t.pattern, "kind": t.kind,
                    "max_diff": t.max_diff, "passed": t.passed,
                    "rows": [{"outcomes": o, "expected": e, "computed": c} for o, e, c in t.rows],
                }
                for t in self.tables
            ],
            "verdicts": [
                {"circuit": v.circuit, "expected": v.expected, "got": v.got, "passed": v.passed, "worst": v.worst}
                for v in self.verdicts
            ],
        }


def _outcome_labels(pattern: str, upto: int | None) -> list[str]:
    times = [k + 1 for k, c in enumerate(pattern) if c == "1" and (upto is None or k <= upto)]
    return [",".join(f"x{t}={x}" for t, x in zip(times, xs))
            for xs in itertools.product((0, 1), repeat=len(times))]


def reproduce(tol: float = DEFAULT_TOL) -> Reproduction:
    families = {name: all_pattern_statistics(build()) for name, build in CIRCUITS.items()}
    tables = []
    for ref in oracle_tables():
        dist = families[ref.circuit][ref.pattern]
        computed = dist.probs if ref.kind == "joint" else conditional_table(dist, ref.target)
        expected = ref.as_array()
        diff = float(np.max(np.abs(computed - expected)))
        rows = [(o, float(e), float(c)) for o, e, c in
                zip(_outcome_labels(ref.pattern, ref.target), expected.ravel(), computed.ravel())]
        tables.append(TableCheck(ref.circuit, ref.label, ref.pattern, ref.kind, rows, diff, diff <= tol))
    verdicts = []
    for name, fam in families.items():
        report = witness_hidden_memory(fam, tol)
        want = EXPECTED_VERDICTS[name]
        worst = {c.name: c.worst for c in report.checks()}
        verdicts.append(VerdictCheck(name, want.value, report.verdict.value, report.verdict is want, worst))
    return Reproduction(tol, tables, verdicts)
