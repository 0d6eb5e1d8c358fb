"""Pure-state trajectory enumeration: an independent route to the same tables.

The initial joint state is split into its eigenvectors, and every Kraus index
sequence and recorded outcome is followed as an unnormalised state vector.
Summing squared norms over the unrecorded labels gives the outcome
probabilities. No density matrices are propagated, so this shares no code with
:func:`hiddenmem.quantum.run_schedule`.
"""

from __future__ import annotations

import itertools

import numpy as np

from .quantum import DilatedProcess, ProbeSchedule


def trajectory_distribution(proc: DilatedProcess, sched: ProbeSchedule | str) -> np.ndarray:
    """Joint distribution over the probed outcomes, shaped ``(d_sys,) * k``."""
    if isinstance(sched, str):
        sched = ProbeSchedule.from_bits(sched)
    if sched.n_times != proc.n_times:
        raise ValueError("schedule and process cover different numbers of times")
    ds, de = proc.d_sys, proc.d_env
    evals, evecs = np.linalg.eigh(proc.initial_state)
    times = sched.times
    probs = np.zeros((ds,) * len(times))
    kraus_counts = [range(len(ch.kraus_ops)) for ch in proc.steps]
    for w, vec in zip(evals, evecs.T):
        if w <= 0:
            continue
        for outcomes in itertools.product(range(ds), repeat=len(times)):
            record = dict(zip(times, outcomes))
            total = 0.0
            for path in itertools.product(*kraus_counts):
                psi = vec.copy()
                for t in range(proc.n_times):
                    if t in record:
                        # keep only the |x> (x) env block of the amplitude vector
                        blk = psi.reshape(ds, de)
                        kept = np.zeros_like(blk)
                        kept[record[t]] = blk[record[t]]
                        psi = kept.ravel()
                    if t < proc.n_times - 1:
                        psi = proc.steps[t].kraus_ops[path[t]] @ psi
                total += float(np.vdot(psi, psi).real)
            probs[outcomes] += w * total
    return probs
