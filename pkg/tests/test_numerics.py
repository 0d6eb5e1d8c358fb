import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hiddenmem import numerics as nx
from hiddenmem.gates import H, I2, KET0, KET1, KET_MINUS, KET_PLUS, X, Z


def complex_matrices(rows, cols):
    floats = st.floats(-3, 3, allow_nan=False)
    return st.lists(st.tuples(floats, floats), min_size=rows * cols, max_size=rows * cols).map(
        lambda xs: np.array([complex(a, b) for a, b in xs]).reshape(rows, cols))


def test_matmul_identity_and_hadamard():
    assert np.array_equal(nx.matmul(I2, I2), I2)
    assert np.allclose(nx.matmul(H, H), I2, atol=nx.ATOL)
    # H|0> = (|0> + |1>)/sqrt(2), written out by hand
    assert np.allclose(nx.matmul(H, KET0), np.array([[1], [1]]) / np.sqrt(2), atol=nx.ATOL)


def test_matmul_shape_error_names_both_shapes():
    with pytest.raises(nx.ShapeError, match="2x3.*2x2"):
        nx.matmul(np.ones((2, 3)), np.ones((2, 2)))


def test_kron_examples():
    assert np.array_equal(nx.kron(I2, I2), np.eye(4))
    m = nx.kron(nx.projector(0, 2), nx.projector(1, 2))
    expected = np.zeros((4, 4))
    expected[1, 1] = 1  # x_sys * d_env + x_env = 0 * 2 + 1
    assert np.array_equal(m, expected)
    # (Z (x) I)(|+> (x) |0>) = |-> (x) |0>
    out = nx.kron(Z, I2) @ nx.kron(KET_PLUS, KET0)
    assert np.allclose(out, nx.kron(KET_MINUS, KET0), atol=nx.ATOL)


def test_partial_trace_examples():
    bell_mix = 0.5 * (nx.projector(0, 4) + nx.projector(3, 4))
    assert np.allclose(nx.partial_trace(bell_mix, 2, 2), I2 / 2, atol=nx.ATOL)
    for x1 in (0, 1):
        # half |0><0| (x) |x1><x1|, traced over the system
        phi4 = 0.5 * nx.kron(nx.projector(0, 2), nx.projector(x1, 2))
        assert np.allclose(nx.partial_trace(phi4, 2, 2, keep_first=False), 0.5 * nx.projector(x1, 2), atol=nx.ATOL)


def test_partial_trace_dimension_mismatch():
    with pytest.raises(nx.ShapeError):
        nx.partial_trace(np.eye(4), 3, 2)


def test_matrix_exp_examples():
    assert np.allclose(nx.matrix_exp(np.zeros((3, 3))), np.eye(3), atol=nx.ATOL)
    theta = np.pi / 2
    closed_form = np.cos(theta) * I2 + 1j * np.sin(theta) * X
    assert np.allclose(nx.matrix_exp(1j * theta * X), closed_form, atol=nx.ATOL)
    assert np.allclose(nx.matrix_exp(1j * theta * X), 1j * X, atol=nx.ATOL)
    with pytest.raises(nx.ShapeError):
        nx.matrix_exp(np.ones((2, 3)))


def test_matrix_exp_of_anti_hermitian_is_unitary(rng):
    for _ in range(100):
        d = int(rng.integers(2, 9))
        g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        u = nx.matrix_exp(g - g.conj().T)
        assert np.max(np.abs(u @ u.conj().T - np.eye(d))) < 1e-12


def test_matrix_exp_batch_matches_single(rng):
    a = rng.normal(size=(3, 4, 4)) * 1j
    batch = nx.matrix_exp_batch(a)
    for k in range(3):
        assert np.allclose(batch[k], nx.matrix_exp(a[k]), atol=1e-13)


@settings(max_examples=50, deadline=None)
@given(complex_matrices(2, 2), complex_matrices(2, 3), complex_matrices(3, 2))
def test_kron_associative(a, b, c):
    assert np.allclose(nx.kron(nx.kron(a, b), c), nx.kron(a, nx.kron(b, c)), atol=1e-12)


@settings(max_examples=50, deadline=None)
@given(complex_matrices(2, 3), complex_matrices(3, 2))
def test_dagger_reverses_products(a, b):
    assert np.allclose(nx.dagger(a @ b), nx.dagger(b) @ nx.dagger(a), atol=1e-12)


@settings(max_examples=50, deadline=None)
@given(complex_matrices(2, 2), complex_matrices(3, 3))
def test_partial_trace_of_product(a, b):
    ab = nx.kron(a, b)
    assert np.allclose(nx.partial_trace(ab, 2, 3, keep_first=True), a * np.trace(b), atol=1e-12)
    assert np.allclose(nx.partial_trace(ab, 3, 2, keep_first=False), b * np.trace(a), atol=1e-12)


def test_partial_trace_preserves_trace(rng):
    m = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
    assert np.isclose(np.trace(nx.partial_trace(m, 3, 2)), np.trace(m))


def test_matrix_json_round_trip(rng):
    m = rng.normal(size=(2, 3)) + 1j * rng.normal(size=(2, 3))
    doc = nx.matrix_to_json(m)
    assert doc["rows"] == 2 and doc["cols"] == 3 and doc["entries"][1] == [m[0, 1].real, m[0, 1].imag]
    assert np.array_equal(nx.matrix_from_json(doc), m)


@pytest.mark.parametrize("doc, msg", [
    ({"rows": 2, "cols": 2, "entries": [[1, 0]] * 3}, "length 3"),
    ({"rows": 1, "cols": 1}, "missing field 'entries'"),
    ({"rows": 1, "cols": 1, "entries": [[1, 0, 0]]}, r"entries\[0\]"),
])
def test_matrix_json_errors(doc, msg):
    with pytest.raises(ValueError, match=msg):
        nx.matrix_from_json(doc)


def test_non_finite_rejected():
    with pytest.raises(ValueError):
        nx.as_matrix([[np.nan]])


def test_basis_helpers():
    assert np.array_equal(nx.ket(1, 2), KET1)
    with pytest.raises(IndexError):
        nx.ket(2, 2)
