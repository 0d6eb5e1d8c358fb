"""Small dense complex linear algebra used throughout the package.

Matrices are plain ``numpy`` arrays of dtype ``complex128``. Composite
system/environment indices follow ``x_sys * d_env + x_env``: the system is
always the left (slow) Kronecker factor.
"""

from __future__ import annotations

from typing import Any

import numpy as np
import scipy.linalg

ATOL = 1e-12


class ShapeError(ValueError):
    """Raised when operand dimensions are incompatible."""


def as_matrix(m: Any) -> np.ndarray:
    """Coerce ``m`` into a finite 2-D complex array."""
    arr = np.asarray(m, dtype=np.complex128)
    if arr.ndim != 2:
        raise ShapeError(f"expected a 2-D matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("matrix has non-finite entries")
    return arr


def matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    a, b = as_matrix(a), as_matrix(b)
    if a.shape[1] != b.shape[0]:
        raise ShapeError(f"cannot multiply {a.shape[0]}x{a.shape[1]} by {b.shape[0]}x{b.shape[1]}")
    return a @ b


def dagger(a: np.ndarray) -> np.ndarray:
    return as_matrix(a).conj().T


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product with ``a`` as the slow (left) factor."""
    return np.kron(as_matrix(a), as_matrix(b))


def partial_trace(m: np.ndarray, dim_keep: int, dim_traced: int, keep_first: bool = True) -> np.ndarray:
    """Trace out one factor of a bipartite operator.

    Args:
        m: square operator on a space of dimension ``dim_keep * dim_traced``.
        dim_keep: dimension of the factor that survives.
        dim_traced: dimension of the factor that is traced over.
        keep_first: if True the kept factor is the left (slow) one.
    """
    m = as_matrix(m)
    n = dim_keep * dim_traced
    if m.shape != (n, n):
        raise ShapeError(f"{m.shape[0]}x{m.shape[1]} operator does not factor as {dim_keep}*{dim_traced}")
    if keep_first:
        return np.einsum("ajbj->ab", m.reshape(dim_keep, dim_traced, dim_keep, dim_traced))
    return np.einsum("jajb->ab", m.reshape(dim_traced, dim_keep, dim_traced, dim_keep))


def matrix_exp(a: np.ndarray) -> np.ndarray:
    """Matrix exponential (scaling and squaring with a Pade core)."""
    a = as_matrix(a)
    if a.shape[0] != a.shape[1]:
        raise ShapeError(f"matrix_exp needs a square matrix, got {a.shape[0]}x{a.shape[1]}")
    return scipy.linalg.expm(a)


def matrix_exp_batch(a: np.ndarray) -> np.ndarray:
    """:func:`matrix_exp` over the leading axes of a ``(..., n, n)`` stack."""
    a = np.asarray(a, dtype=np.complex128)
    if a.ndim < 2 or a.shape[-1] != a.shape[-2]:
        raise ShapeError(f"matrix_exp_batch needs a stack of square matrices, got {a.shape}")
    return scipy.linalg.expm(a)


def is_hermitian(m: np.ndarray, atol: float = ATOL) -> bool:
    m = as_matrix(m)
    return m.shape[0] == m.shape[1] and bool(np.allclose(m, m.conj().T, rtol=0.0, atol=atol))


def min_eigenvalue(m: np.ndarray) -> float:
    """Smallest eigenvalue of the Hermitian part of ``m``."""
    m = as_matrix(m)
    return float(np.linalg.eigvalsh(0.5 * (m + m.conj().T))[0])


def ket(index: int, dim: int) -> np.ndarray:
    """Computational basis column vector ``|index>``."""
    if not 0 <= index < dim:
        raise IndexError(f"basis index {index} out of range for dimension {dim}")
    v = np.zeros((dim, 1), dtype=np.complex128)
    v[index, 0] = 1.0
    return v


def projector(index: int, dim: int) -> np.ndarray:
    v = ket(index, dim)
    return v @ v.conj().T


def matrix_to_json(m: np.ndarray) -> dict:
    m = as_matrix(m)
    rows, cols = m.shape
    return {
        "rows": rows,
        "cols": cols,
        "entries": [[float(z.real), float(z.imag)] for z in m.ravel()],
    }


def matrix_from_json(obj: Any, where: str = "matrix") -> np.ndarray:
    """Parse ``{rows, cols, entries: [[re, im], ...]}`` (row-major).

    Raises ``ValueError`` naming ``where`` on any malformed field.
    """
    if not isinstance(obj, dict):
        raise ValueError(f"{where}: expected an object with rows/cols/entries")
    try:
        rows, cols, entries = int(obj["rows"]), int(obj["cols"]), obj["entries"]
    except KeyError as exc:
        raise ValueError(f"{where}: missing field {exc.args[0]!r}") from None
    except (TypeError, ValueError):
        raise ValueError(f"{where}: rows/cols must be integers") from None
    if not isinstance(entries, list) or len(entries) != rows * cols:
        n = len(entries) if isinstance(entries, list) else "non-list"
        raise ValueError(f"{where}.entries: length {n} != rows*cols = {rows * cols}")
    values = np.empty(rows * cols, dtype=np.complex128)
    for i, e in enumerate(entries):
        if isinstance(e, (int, float)):
            values[i] = e
        elif isinstance(e, list) and len(e) == 2:
            values[i] = complex(float(e[0]), float(e[1]))
        else:
            raise ValueError(f"{where}.entries[{i}]: expected [re, im]")
    if not np.all(np.isfinite(values)):
        raise ValueError(f"{where}: non-finite entries")
    return values.reshape(rows, cols)
