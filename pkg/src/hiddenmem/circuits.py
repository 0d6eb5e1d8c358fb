"""The two four-time hidden-memory circuits and their exact reference tables.

Both circuits act on a qubit system and a qubit environment. The first has
Markovian full statistics whose sub-statistics are non-Markovian once the
second probe is skipped. The second has Markovian statistics for every probing
pattern, yet the conditionals at the last time depend on whether the second
time was probed.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

from .gates import H, I2, KET0, KET1, KET_MINUS, KET_PLUS, cnot, swap
from .quantum import DilatedProcess, KrausChannel
from .stats import pattern_from_bits

F = Fraction


def feed_forward_channel() -> KrausChannel:
    """Measure in the X basis and prepare ``|0>`` on ``+``, ``|1>`` on ``-``."""
    return KrausChannel((KET0 @ KET_PLUS.conj().T, KET1 @ KET_MINUS.conj().T))


def reset_system_channel(d_sys: int = 2, d_env: int = 2) -> KrausChannel:
    """Discard the system and re-prepare it in ``|0>``: Kraus ``{|0><i| (x) I}``."""
    eye = np.eye(d_env, dtype=np.complex128)
    ops = []
    for i in range(d_sys):
        k = np.zeros((d_sys, d_sys), dtype=np.complex128)
        k[0, i] = 1.0
        ops.append(np.kron(k, eye))
    return KrausChannel(tuple(ops))


def hidden_memory_circuit() -> DilatedProcess:
    """Markovian full statistics, non-Markovian sub-statistics.

    System starts maximally mixed, environment in ``|0>``. Intervals:
    Hadamard on the system; SWAP; X-basis feed-forward on the environment
    followed by a CNOT controlled by the environment.
    """
    rho0 = np.kron(I2 / 2, KET0 @ KET0.conj().T)
    steps = (
        KrausChannel.unitary(np.kron(H, I2)),
        KrausChannel.unitary(swap(2)),
        feed_forward_channel().on_environment(2).then(KrausChannel.unitary(cnot("env"))),
    )
    return DilatedProcess(2, 2, rho0, steps)


def incompatible_circuit() -> DilatedProcess:
    """Markovian statistics and sub-statistics with incompatible conditionals.

    Starts in the classically correlated state ``(|00><00| + |11><11|)/2``.
    Intervals: Hadamard on the system; Hadamard, CNOT controlled by the
    system, then reset of the system to ``|0>``; CNOT controlled by the
    environment.
    """
    rho0 = np.zeros((4, 4), dtype=np.complex128)
    rho0[0, 0] = rho0[3, 3] = 0.5
    steps = (
        KrausChannel.unitary(np.kron(H, I2)),
        KrausChannel.unitary(np.kron(H, I2))
        .then(KrausChannel.unitary(cnot("sys")))
        .then(reset_system_channel()),
        KrausChannel.unitary(cnot("env")),
    )
    return DilatedProcess(2, 2, rho0, steps)


CIRCUITS: dict[str, Callable[[], DilatedProcess]] = {
    "fig2": hidden_memory_circuit,
    "fig3": incompatible_circuit,
}


@dataclass(frozen=True)
class OracleTable:
    """An exact reference table for one probing pattern.

    ``kind`` is ``"joint"`` for a joint distribution or ``"conditional"`` for
    ``P(x_target | all earlier probed outcomes)`` (zero when the conditioning
    event is impossible). Entries are indexed like the pattern's joint array.
    """

    circuit: str
    label: str
    pattern: str
    kind: str
    values: tuple[Fraction, ...]
    source: str
    target: int | None = None

    def as_array(self) -> np.ndarray:
        k = self.pattern.count("1") if self.target is None else self.pattern[: self.target + 1].count("1")
        return np.array([float(v) for v in self.values]).reshape((2,) * k)


def _tabulate(pattern: str, rule: Callable[[dict[int, int]], Fraction], upto: int | None = None) -> tuple[Fraction, ...]:
    """Evaluate ``rule`` on every outcome tuple; ``rule`` receives ``{time: outcome}`` (1-based)."""
    times = [k + 1 for k, c in enumerate(pattern) if c == "1" and (upto is None or k <= upto)]
    return tuple(F(rule(dict(zip(times, xs)))) for xs in itertools.product((0, 1), repeat=len(times)))


def _delta(a: int, b: int) -> int:
    return int(a == b)


def oracle_tables() -> list[OracleTable]:
    """Every displayed probability table and conditional of the two circuits."""
    def joint(circ: str, label: str, pattern: str, rule, source: str) -> OracleTable:
        return OracleTable(circ, label, pattern, "joint", _tabulate(pattern, rule), source)

    def cond(circ: str, label: str, pattern: str, target: int, rule, source: str) -> OracleTable:
        return OracleTable(circ, label, pattern, "conditional", _tabulate(pattern, rule, target), source, target)

    c1, c2 = "hidden memory circuit", "incompatibility circuit"
    return [
        joint("fig2", "P(x1)", "1000", lambda x: F(1, 2), c1),
        joint("fig2", "P(x2,x1)", "1100", lambda x: F(1, 4), c1),
        joint("fig2", "P(x3,x2,x1)", "1110", lambda x: F(1, 4) * _delta(x[3], 0), c1),
        cond("fig2", "P(x3|x2,x1)", "1110", 2, lambda x: _delta(x[3], 0), c1),
        joint("fig2", "P(x4,x3,x2,x1)", "1111", lambda x: F(1, 8) * _delta(x[3], 0), c1),
        cond("fig2", "P(x4|x3,x2,x1)", "1111", 3, lambda x: F(1, 2) * _delta(x[3], 0), c1),
        joint("fig2", "P(x3,I2,x1)", "1010", lambda x: F(1, 2) * _delta(x[3], 0), c1),
        cond("fig2", "P(x3|I2,x1)", "1010", 2, lambda x: _delta(x[3], 0), c1),
        joint("fig2", "P(x4,x3,I2,x1)", "1011",
              lambda x: F(1, 2) * _delta(x[4], x[1]) * _delta(x[3], 0), c1),
        cond("fig2", "P(x4|x3,I2,x1)", "1011", 3, lambda x: _delta(x[4], x[1]) * _delta(x[3], 0), c1),
        cond("fig3", "P(x3|x2,x1)", "1110", 2, lambda x: _delta(x[3], 0), c2),
        cond("fig3", "P(x3|I2,x1)", "1010", 2, lambda x: _delta(x[3], 0), c2),
        cond("fig3", "P(x3|x2,I1)", "0110", 2, lambda x: _delta(x[3], 0), c2),
        joint("fig3", "P(x4,x3,x2,x1)", "1111", lambda x: F(1, 8) * _delta(x[3], 0), c2),
        joint("fig3", "P(x4,x3,I2,x1)", "1011",
              lambda x: F(1, 2) * _delta(x[3], 0) * _delta(x[4], x[3]), c2),
        joint("fig3", "P(x3,x2,x1)", "1110", lambda x: F(1, 4) * _delta(x[3], 0), c2),
        joint("fig3", "P(x3,I2,x1)", "1010", lambda x: F(1, 2) * _delta(x[3], 0), c2),
        cond("fig3", "P(x4|x3,x2,x1)", "1111", 3, lambda x: F(1, 2) * _delta(x[3], 0), c2),
        cond("fig3", "P(x4|x3,I2,x1)", "1011", 3, lambda x: _delta(x[3], 0) * _delta(x[4], x[3]), c2),
    ]


def pattern_mask(table: OracleTable) -> int:
    return pattern_from_bits(table.pattern)
