"""States, Kraus channels and dilated multi-time processes.

A :class:`DilatedProcess` is a system+environment circuit probed by sharp
computational-basis measurements on the system only. Probability tables for
any probing pattern are obtained by re-running the circuit with do-nothing
interventions at the unprobed times, never by marginalising the full table.
"""

from __future__ import annotations

import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
import numpy as np

from . import numerics as nx
from .stats import JointDistribution, StatisticsFamily, pattern_from_bits, pattern_to_bits

STATE_ATOL = 1e-10
MAX_TIMES = 12


class InvariantError(ValueError):
    """A state or channel violates its defining invariant."""


def check_state(rho: np.ndarray, *, subnormalized: bool = False, atol: float = STATE_ATOL) -> np.ndarray:
    """Validate a density operator and return it as a complex array.

    With ``subnormalized=True`` the trace may lie anywhere in ``[0, 1]``.
    """
    rho = nx.as_matrix(rho)
    if rho.shape[0] != rho.shape[1]:
        raise InvariantError(f"density operator must be square, got {rho.shape}")
    if not nx.is_hermitian(rho, atol):
        raise InvariantError("density operator is not Hermitian")
    if nx.min_eigenvalue(rho) < -atol:
        raise InvariantError(f"density operator has negative eigenvalue {nx.min_eigenvalue(rho):.3g}")
    tr = np.trace(rho).real
    if subnormalized:
        if tr > 1 + atol:
            raise InvariantError(f"sub-normalised state has trace {tr:.12g} > 1")
    elif abs(tr - 1) > atol:
        raise InvariantError(f"density operator has trace {tr:.12g}, expected 1")
    return rho


@dataclass(frozen=True)
class KrausChannel:
    """Completely positive trace-preserving map in Kraus form."""

    kraus_ops: tuple[np.ndarray, ...]

    def __post_init__(self) -> None:
        ops = tuple(nx.as_matrix(k) for k in self.kraus_ops)
        if not ops:
            raise InvariantError("a channel needs at least one Kraus operator")
        shape = ops[0].shape
        if any(k.shape != shape for k in ops):
            raise InvariantError("Kraus operators have mismatched shapes")
        gram = sum(k.conj().T @ k for k in ops)
        if not np.allclose(gram, np.eye(shape[1]), rtol=0.0, atol=STATE_ATOL):
            err = np.max(np.abs(gram - np.eye(shape[1])))
            raise InvariantError(f"Kraus operators are not trace preserving (deviation {err:.3g})")
        object.__setattr__(self, "kraus_ops", ops)

    @property
    def dim_in(self) -> int:
        return self.kraus_ops[0].shape[1]

    @property
    def dim_out(self) -> int:
        return self.kraus_ops[0].shape[0]

    @classmethod
    def identity(cls, dim: int) -> KrausChannel:
        return cls((np.eye(dim, dtype=np.complex128),))

    @classmethod
    def unitary(cls, u: np.ndarray) -> KrausChannel:
        return cls((nx.as_matrix(u),))

    def then(self, other: KrausChannel) -> KrausChannel:
        """Sequential composition: apply ``self`` first, then ``other``."""
        if other.dim_in != self.dim_out:
            raise nx.ShapeError(f"cannot compose {self.dim_out}-dim output with {other.dim_in}-dim input")
        return KrausChannel(tuple(b @ a for b in other.kraus_ops for a in self.kraus_ops))

    def on_system(self, d_env: int) -> KrausChannel:
        """Embed as ``self (x) id_env``."""
        eye = np.eye(d_env, dtype=np.complex128)
        return KrausChannel(tuple(np.kron(k, eye) for k in self.kraus_ops))

    def on_environment(self, d_sys: int) -> KrausChannel:
        """Embed as ``id_sys (x) self``."""
        eye = np.eye(d_sys, dtype=np.complex128)
        return KrausChannel(tuple(np.kron(eye, k) for k in self.kraus_ops))

    def stacked(self) -> np.ndarray:
        return np.stack(self.kraus_ops)


def apply_channel(ch: KrausChannel, state: np.ndarray) -> np.ndarray:
    """Return ``sum_l K_l state K_l^dagger``; ``state`` may be sub-normalised."""
    state = nx.as_matrix(state)
    if state.shape != (ch.dim_in, ch.dim_in):
        raise nx.ShapeError(f"channel expects {ch.dim_in}x{ch.dim_in} input, got {state.shape[0]}x{state.shape[1]}")
    k = ch.stacked()
    return np.einsum("kij,jl,kml->im", k, state, k.conj())


def _apply_batch(ks: np.ndarray, states: np.ndarray) -> np.ndarray:
    return np.einsum("kij,bjl,kml->bim", ks, states, ks.conj())


def _project_batch(states: np.ndarray, d_sys: int, d_env: int) -> np.ndarray:
    """Split each state into its ``d_sys`` sub-normalised measured branches.

    Output has shape ``(B * d_sys, D, D)`` with the new outcome as the fast
    branch index.
    """
    b = states.shape[0]
    r = states.reshape(b, d_sys, d_env, d_sys, d_env)
    out = np.zeros((b, d_sys, d_sys, d_env, d_sys, d_env), dtype=np.complex128)
    for x in range(d_sys):
        out[:, x, x, :, x, :] = r[:, x, :, x, :]
    dim = d_sys * d_env
    return out.reshape(b * d_sys, dim, dim)


def measure_system(state: np.ndarray, x: int, d_sys: int, d_env: int = 1) -> tuple[np.ndarray, float]:
    """Project the system onto ``|x>`` and return ``(P_x state P_x, probability)``."""
    if not 0 <= x < d_sys:
        raise IndexError(f"outcome {x} out of range for a {d_sys}-level system")
    state = nx.as_matrix(state)
    if state.shape != (d_sys * d_env, d_sys * d_env):
        raise nx.ShapeError(f"state of shape {state.shape} does not match d_sys*d_env = {d_sys * d_env}")
    p = np.kron(nx.projector(x, d_sys), np.eye(d_env))
    out = p @ state @ p
    return out, float(np.trace(out).real)


@dataclass(frozen=True)
class ProbeSchedule:
    """Which of ``n_times`` times are probed; bit ``j`` set means measure at time ``j``.

    Times are 0-based here; the bitstring form lists the earliest time first,
    so ``"1011"`` skips the second time.
    """

    n_times: int
    measured: int

    def __post_init__(self) -> None:
        if self.n_times < 1:
            raise ValueError("n_times must be positive")
        if not 0 <= self.measured < (1 << self.n_times):
            raise ValueError(f"mask {self.measured} has bits beyond n_times={self.n_times}")

    @classmethod
    def from_bits(cls, bits: str) -> ProbeSchedule:
        return cls(len(bits), pattern_from_bits(bits))

    @classmethod
    def full(cls, n_times: int) -> ProbeSchedule:
        return cls(n_times, (1 << n_times) - 1)

    @property
    def bits(self) -> str:
        return pattern_to_bits(self.measured, self.n_times)

    def is_measured(self, t: int) -> bool:
        return bool(self.measured >> t & 1)

    @property
    def times(self) -> tuple[int, ...]:
        return tuple(t for t in range(self.n_times) if self.is_measured(t))


@dataclass(frozen=True)
class DilatedProcess:
    """System+environment circuit: initial joint state and one channel per interval."""

    d_sys: int
    d_env: int
    initial_state: np.ndarray
    steps: tuple[KrausChannel, ...]
    n_times: int = field(default=-1)

    def __post_init__(self) -> None:
        steps = tuple(self.steps)
        object.__setattr__(self, "steps", steps)
        if self.n_times == -1:
            object.__setattr__(self, "n_times", len(steps) + 1)
        if len(steps) != self.n_times - 1:
            raise InvariantError(f"{len(steps)} steps given for {self.n_times} times; need n_times - 1")
        dim = self.d_sys * self.d_env
        rho = check_state(self.initial_state)
        if rho.shape != (dim, dim):
            raise InvariantError(f"initial state is {rho.shape[0]}-dimensional, expected {dim}")
        object.__setattr__(self, "initial_state", rho)
        for j, ch in enumerate(steps):
            if ch.dim_in != dim or ch.dim_out != dim:
                raise InvariantError(f"step {j} acts on {ch.dim_in}->{ch.dim_out}, expected {dim}->{dim}")

    @property
    def dim(self) -> int:
        return self.d_sys * self.d_env


@dataclass
class ProbeRecord:
    """Joint branch states around one probe time (debug hook output).

    ``before`` and ``after`` map the tuple of outcomes recorded so far to the
    sub-normalised joint state; ``after`` equals ``before`` at unprobed times.
    """

    time: int
    measured: bool
    before: dict[tuple[int, ...], np.ndarray]
    after: dict[tuple[int, ...], np.ndarray]


def _run(proc: DilatedProcess, sched: ProbeSchedule, record: list[ProbeRecord] | None = None) -> np.ndarray:
    if sched.n_times != proc.n_times:
        raise ValueError(f"schedule covers {sched.n_times} times but the process has {proc.n_times}")
    states = proc.initial_state[None, :, :]
    d = proc.d_sys
    k = 0
    for t in range(proc.n_times):
        before = states
        if sched.is_measured(t):
            states = _project_batch(states, d, proc.d_env)
        if record is not None:
            labels_before = list(itertools.product(range(d), repeat=k))
            k += sched.is_measured(t)
            labels_after = list(itertools.product(range(d), repeat=k))
            record.append(ProbeRecord(
                time=t,
                measured=sched.is_measured(t),
                before=dict(zip(labels_before, before)),
                after=dict(zip(labels_after, states)),
            ))
        if t < proc.n_times - 1:
            states = _apply_batch(proc.steps[t].stacked(), states)
    return np.einsum("bii->b", states).real


def run_schedule(proc: DilatedProcess, sched: ProbeSchedule | str) -> JointDistribution:
    """Joint outcome distribution when probing ``proc`` according to ``sched``."""
    if isinstance(sched, str):
        sched = ProbeSchedule.from_bits(sched)
    probs = _run(proc, sched)
    shape = (proc.d_sys,) * len(sched.times)
    return JointDistribution(proc.n_times, sched.measured, proc.d_sys, probs.reshape(shape))


def trace_states(proc: DilatedProcess, sched: ProbeSchedule | str) -> list[ProbeRecord]:
    """Joint states immediately before and after each probe, per outcome branch."""
    if isinstance(sched, str):
        sched = ProbeSchedule.from_bits(sched)
    record: list[ProbeRecord] = []
    _run(proc, sched, record)
    return record


def all_pattern_statistics(proc: DilatedProcess, threads: int = 1) -> StatisticsFamily:
    """Run every one of the ``2**n_times`` probing patterns."""
    if proc.n_times > MAX_TIMES:
        raise ValueError(f"n_times={proc.n_times} exceeds the cap of {MAX_TIMES}")
    masks = range(1 << proc.n_times)
    scheds = [ProbeSchedule(proc.n_times, m) for m in masks]
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            dists = list(pool.map(lambda s: run_schedule(proc, s), scheds))
    else:
        dists = [run_schedule(proc, s) for s in scheds]
    return StatisticsFamily(proc.n_times, proc.d_sys, {s.measured: dist for s, dist in zip(scheds, dists)})


def random_isometry(rng: np.random.Generator, dim_big: int, dim_small: int) -> np.ndarray:
    """Haar-random isometry ``dim_small -> dim_big`` via QR of a Ginibre matrix."""
    g = rng.normal(size=(dim_big, dim_small)) + 1j * rng.normal(size=(dim_big, dim_small))
    q, r = np.linalg.qr(g)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_channel(rng: np.random.Generator, dim: int, n_kraus: int | None = None) -> KrausChannel:
    """Channel from a Haar-random Stinespring isometry with ``n_kraus`` outputs."""
    n_kraus = dim * dim if n_kraus is None else n_kraus
    v = random_isometry(rng, n_kraus * dim, dim)
    return KrausChannel(tuple(v.reshape(n_kraus, dim, dim)))


def random_state(rng: np.random.Generator, dim: int, rank: int | None = None) -> np.ndarray:
    rank = dim if rank is None else rank
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_process(rng: np.random.Generator, d_sys: int = 2, d_env: int = 2, n_times: int = 3,
                   n_kraus: int = 2) -> DilatedProcess:
    dim = d_sys * d_env
    steps = [random_channel(rng, dim, n_kraus) for _ in range(n_times - 1)]
    return DilatedProcess(d_sys, d_env, random_state(rng, dim), tuple(steps))

