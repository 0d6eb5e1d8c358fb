"""JSON encodings of circuits, distributions, families and models.

Complex numbers are ``[re, im]`` pairs; matrices are
``{"rows", "cols", "entries"}`` in row-major order. Probability arrays are
flattened with the outcome at the earliest probed time as the slowest index.
Pattern strings list the first time leftmost (``"1011"`` skips the second).
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

import numpy as np

from .classical import ClassicalMemorylessModel
from .numerics import matrix_from_json, matrix_to_json
from .quantum import DilatedProcess, KrausChannel
from .qrf import MemorylessQuantumModel
from .stats import JointDistribution, StatisticsFamily, pattern_from_bits

OUTCOME_ORDER = "lexicographic; outcome at the earliest probed time varies slowest"


class InputError(ValueError):
    """Malformed input document; the message names the offending field."""


def _field(obj: Any, key: str, where: str) -> Any:
    if not isinstance(obj, dict):
        raise InputError(f"{where}: expected an object")
    if key not in obj:
        raise InputError(f"{where}: missing field {key!r}")
    return obj[key]


def _int(obj: Any, key: str, where: str) -> int:
    v = _field(obj, key, where)
    if not isinstance(v, int) or isinstance(v, bool) or v < 0:
        raise InputError(f"{where}.{key}: expected a non-negative integer, got {v!r}")
    return v


def _matrix(obj: Any, where: str) -> np.ndarray:
    try:
        return matrix_from_json(obj, where)
    except ValueError as exc:
        raise InputError(str(exc)) from None


def _channel_from_json(obj: Any, where: str) -> KrausChannel:
    ops = _field(obj, "kraus_ops", where)
    if not isinstance(ops, list) or not ops:
        raise InputError(f"{where}.kraus_ops: expected a non-empty list")
    mats = tuple(_matrix(m, f"{where}.kraus_ops[{i}]") for i, m in enumerate(ops))
    try:
        return KrausChannel(mats)
    except ValueError as exc:
        raise InputError(f"{where}: {exc}") from None


def _channel_to_json(ch: KrausChannel) -> dict:
    return {"kraus_ops": [matrix_to_json(k) for k in ch.kraus_ops]}


def circuit_to_json(proc: DilatedProcess) -> dict:
    return {
        "d_sys": proc.d_sys,
        "d_env": proc.d_env,
        "n_times": proc.n_times,
        "initial_state": matrix_to_json(proc.initial_state),
        "steps": [_channel_to_json(ch) for ch in proc.steps],
    }


def circuit_from_json(obj: Any) -> DilatedProcess:
    d_sys, d_env, n = _int(obj, "d_sys", "circuit"), _int(obj, "d_env", "circuit"), _int(obj, "n_times", "circuit")
    rho = _matrix(_field(obj, "initial_state", "circuit"), "circuit.initial_state")
    steps = _field(obj, "steps", "circuit")
    if not isinstance(steps, list):
        raise InputError("circuit.steps: expected a list")
    channels = tuple(_channel_from_json(s, f"circuit.steps[{j}]") for j, s in enumerate(steps))
    try:
        return DilatedProcess(d_sys, d_env, rho, channels, n)
    except ValueError as exc:
        raise InputError(f"circuit: {exc}") from None


def distribution_to_json(dist: JointDistribution) -> dict:
    return {
        "n_times": dist.n_times,
        "pattern": dist.bits,
        "dims": [dist.outcome_dim] * len(dist.measured_times),
        "order": OUTCOME_ORDER,
        "probs": [float(p) for p in dist.probs.ravel()],
    }


def _dist_from_entry(entry: Any, n_times: int, d: int, where: str) -> JointDistribution:
    bits = _field(entry, "pattern", where)
    if not isinstance(bits, str) or len(bits) != n_times:
        raise InputError(f"{where}.pattern: expected a {n_times}-character 0/1 string, got {bits!r}")
    try:
        mask = pattern_from_bits(bits)
    except ValueError as exc:
        raise InputError(f"{where}.pattern: {exc}") from None
    probs = _field(entry, "probs", where)
    k = bits.count("1")
    if not isinstance(probs, list) or len(probs) != d ** k:
        raise InputError(f"{where}.probs: expected {d ** k} numbers for pattern {bits}")
    try:
        return JointDistribution(n_times, mask, d, np.array(probs, dtype=float))
    except (TypeError, ValueError) as exc:
        raise InputError(f"{where}: {exc}") from None


def distribution_from_json(obj: Any) -> JointDistribution:
    n = _int(obj, "n_times", "distribution")
    dims = _field(obj, "dims", "distribution")
    d = dims[0] if isinstance(dims, list) and dims else 1
    return _dist_from_entry(obj, n, d, "distribution")


def family_to_json(fam: StatisticsFamily) -> dict:
    return {
        "n_times": fam.n_times,
        "outcome_dim": fam.outcome_dim,
        "order": OUTCOME_ORDER,
        "entries": [{"pattern": dist.bits, "probs": [float(p) for p in dist.probs.ravel()]}
                    for dist in fam.table.values()],
    }


def family_from_json(obj: Any) -> StatisticsFamily:
    n, d = _int(obj, "n_times", "family"), _int(obj, "outcome_dim", "family")
    entries = _field(obj, "entries", "family")
    if not isinstance(entries, list):
        raise InputError("family.entries: expected a list")
    table = {}
    for i, e in enumerate(entries):
        dist = _dist_from_entry(e, n, d, f"family.entries[{i}]")
        if dist.pattern in table:
            raise InputError(f"family.entries[{i}]: duplicate pattern {dist.bits}")
        table[dist.pattern] = dist
    return StatisticsFamily(n, d, table)


def classical_model_to_json(model: ClassicalMemorylessModel) -> dict:
    return {
        "n_times": model.n_times,
        "p1": [float(p) for p in model.p1],
        "steps": [{"dim": model.dim, "entries": [float(v) for v in s.ravel()]} for s in model.steps],
        "unreachable_columns": [list(u) for u in model.unreachable],
    }


def classical_model_from_json(obj: Any) -> ClassicalMemorylessModel:
    p1 = np.array(_field(obj, "p1", "model"), dtype=float)
    steps = []
    for j, s in enumerate(_field(obj, "steps", "model")):
        dim = _int(s, "dim", f"model.steps[{j}]")
        steps.append(np.array(_field(s, "entries", f"model.steps[{j}]"), dtype=float).reshape(dim, dim))
    try:
        return ClassicalMemorylessModel(p1, tuple(steps))
    except ValueError as exc:
        raise InputError(f"model: {exc}") from None


def model_to_json(model: MemorylessQuantumModel) -> dict:
    return {
        "d": model.d,
        "n_times": model.n_times,
        "rho1": matrix_to_json(model.rho1),
        "channels": [_channel_to_json(ch) for ch in model.channels],
    }


def model_from_json(obj: Any) -> MemorylessQuantumModel:
    rho = _matrix(_field(obj, "rho1", "model"), "model.rho1")
    chans = _field(obj, "channels", "model")
    channels = tuple(_channel_from_json(c, f"model.channels[{j}]") for j, c in enumerate(chans))
    try:
        return MemorylessQuantumModel(rho, channels)
    except ValueError as exc:
        raise InputError(f"model: {exc}") from None


def load_json(path: str | Path) -> Any:
    """Read a JSON document, turning syntax errors into :class:`InputError` with line/column."""
    text = Path(path).read_text(encoding="utf-8")
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None


def dump_json(obj: Any) -> str:
    return json.dumps(obj, indent=2)
