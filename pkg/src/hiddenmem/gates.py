"""Qubit gates and states in the system-left ordering."""

from __future__ import annotations

import numpy as np

SQRT_HALF = 1.0 / np.sqrt(2.0)

I2 = np.eye(2, dtype=np.complex128)
X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)
H = SQRT_HALF * np.array([[1, 1], [1, -1]], dtype=np.complex128)

KET0 = np.array([[1], [0]], dtype=np.complex128)
KET1 = np.array([[0], [1]], dtype=np.complex128)
KET_PLUS = SQRT_HALF * (KET0 + KET1)
KET_MINUS = SQRT_HALF * (KET0 - KET1)


def swap(d: int = 2) -> np.ndarray:
    """SWAP on two ``d``-level factors."""
    s = np.zeros((d * d, d * d), dtype=np.complex128)
    for a in range(d):
        for b in range(d):
            s[b * d + a, a * d + b] = 1.0
    return s


def cnot(control: str) -> np.ndarray:
    """Two-qubit CNOT on system (left) and environment (right).

    ``control`` is ``"sys"`` or ``"env"``; the other qubit is the target.
    """
    u = np.zeros((4, 4), dtype=np.complex128)
    for s in range(2):
        for e in range(2):
            if control == "sys":
                out = s * 2 + (e ^ s)
            elif control == "env":
                out = (s ^ e) * 2 + e
            else:
                raise ValueError(f"control must be 'sys' or 'env', got {control!r}")
            u[out, s * 2 + e] = 1.0
    return u
