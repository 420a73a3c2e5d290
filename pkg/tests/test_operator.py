import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from paulialg.core import PauliTerm
from paulialg.operator import (
    Operator,
    TrimPolicy,
    allclose,
    format_coefficient,
    norm_lanczos,
    op_commutator,
    op_product,
    trace_product_normalized,
    trim,
)
from paulialg.oracle import dense_trace_normalized, from_dense, to_dense

from .conftest import random_operator


def ops(n, max_terms=6):
    term = st.tuples(st.integers(0, 2 ** n - 1), st.integers(0, 2 ** n - 1),
                     st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False))
    return st.lists(term, min_size=1, max_size=max_terms).map(
        lambda ts: Operator(n, [t[0] for t in ts], [t[1] for t in ts], [t[2] for t in ts]))


class TestConstruction:
    def test_tuple_form(self):
        H = Operator(4)
        H += "X", 1, "X", 2
        H += 0.5, "Z", 3
        assert len(H) == 2
        assert H.coefficient("XX11") == 1
        assert H.coefficient([("Z", 3)]) == 0.5

    def test_y_coefficients(self):
        A = Operator.from_terms(2, [(1.0, [("Y", 1), ("Y", 2)]), (2.0, [("Y", 1)])])
        Y = np.array([[0, -1j], [1j, 0]])
        assert np.allclose(to_dense(A), np.kron(Y, Y) + 2 * np.kron(Y, np.eye(2)))
        assert A.coefficient("Y1") == 2.0
        assert A.coefficient("YY") == 1.0

    def test_duplicates_merge_and_cancel(self):
        A = Operator(3, [1, 1, 2], [0, 0, 0], [1.0, -1.0, 3.0])
        assert len(A) == 1 and A.coefficient("1Z1") == 3

    def test_bits_beyond_n(self):
        with pytest.raises(ValueError):
            Operator(2, [4], [0], [1.0])

    def test_mismatched_n(self):
        with pytest.raises(ValueError):
            Operator(2) + Operator(3)

    def test_from_pauli_dict_dense(self):
        A = Operator.from_pauli_dict({"XY1": 0.5, "1ZZ": -1j, "111": 2})
        M = (0.5 * np.kron(np.kron([[0, 1], [1, 0]], [[0, -1j], [1j, 0]]), np.eye(2))
             - 1j * np.kron(np.eye(2), np.kron(np.diag([1, -1]), np.diag([1, -1])))
             + 2 * np.eye(8))
        assert np.allclose(to_dense(A), M)

    def test_scalar_add_is_identity(self):
        A = Operator(2) + 3.0
        assert A == Operator.identity(2, 3.0)


class TestDenseOracle:
    @settings(max_examples=100, deadline=None)
    @given(ops(3), ops(3))
    def test_product(self, A, B):
        assert np.allclose(to_dense(A * B), to_dense(A) @ to_dense(B), atol=1e-10)

    @settings(max_examples=100, deadline=None)
    @given(ops(3), ops(3))
    def test_commutator(self, A, B):
        dA, dB = to_dense(A), to_dense(B)
        assert np.allclose(to_dense(A.commutator(B)), dA @ dB - dB @ dA, atol=1e-10)

    @settings(max_examples=100, deadline=None)
    @given(ops(3))
    def test_dagger_trace_norm(self, A):
        dA = to_dense(A)
        assert np.allclose(to_dense(A.dagger()), dA.conj().T)
        assert np.isclose(A.trace(), dense_trace_normalized(dA))
        assert np.isclose(A.norm_lanczos() ** 2, dense_trace_normalized(dA.conj().T @ dA).real)

    @settings(max_examples=100, deadline=None)
    @given(ops(3), ops(3))
    def test_trace_product(self, A, B):
        assert np.isclose(trace_product_normalized(A, B),
                          dense_trace_normalized(to_dense(A) @ to_dense(B)))

    def test_from_dense_roundtrip(self, rng):
        for _ in range(20):
            A = random_operator(rng, 3)
            assert allclose(from_dense(to_dense(A)), A, atol=1e-12)


class TestAlgebraProperties:
    @settings(max_examples=100, deadline=None)
    @given(ops(5), ops(5), ops(5))
    def test_associative(self, A, B, C):
        assert allclose((A * B) * C, A * (B * C), atol=1e-9)

    @settings(max_examples=100, deadline=None)
    @given(ops(5), ops(5), ops(5))
    def test_jacobi(self, A, B, C):
        j = (op_commutator(A, op_commutator(B, C)) + op_commutator(B, op_commutator(C, A))
             + op_commutator(C, op_commutator(A, B)))
        assert np.all(np.abs(j.c) < 1e-8)

    @settings(max_examples=100, deadline=None)
    @given(ops(6), ops(6))
    def test_commutator_matches_product_difference(self, A, B):
        assert allclose(op_commutator(A, B), A * B - B * A, atol=1e-10)

    @given(ops(6))
    def test_dagger_involution(self, A):
        assert A.dagger().dagger() == A

    @given(ops(6), ops(6))
    def test_dagger_antihomomorphism(self, A, B):
        assert allclose((A * B).dagger(), B.dagger() * A.dagger(), atol=1e-10)

    @given(ops(6))
    def test_norm_is_trace_of_square(self, A):
        assert np.isclose(A.norm_lanczos() ** 2, trace_product_normalized(A.dagger(), A).real)

    def test_large_n(self, rng):
        # 64 sites exercises the structured-key path
        n = 64
        A = Operator(n, rng.integers(0, 2 ** 63, 30, dtype=np.uint64) * 2 + 1,
                     rng.integers(0, 2 ** 63, 30, dtype=np.uint64), rng.normal(size=30))
        B = Operator(n, rng.integers(0, 2 ** 63, 30, dtype=np.uint64),
                     rng.integers(0, 2 ** 63, 30, dtype=np.uint64) << np.uint64(1), rng.normal(size=30))
        assert allclose((A * B) * A, A * (B * A), atol=1e-10)
        assert allclose(op_commutator(A, B), A * B - B * A, atol=1e-10)

    def test_chunked_product(self, monkeypatch, rng):
        import paulialg.operator as mod

        A = random_operator(rng, 6, 40)
        B = random_operator(rng, 6, 40)
        ref = op_product(A, B)
        monkeypatch.setattr(mod, "_CHUNK", 7)
        assert allclose(op_product(A, B), ref, atol=1e-12)


class TestTruncation:
    def test_trim_keeps_largest(self):
        A = Operator(3, [1, 2, 4, 3], [0, 0, 0, 0], [0.1, 3.0, -2.0, 1.0])
        T = A.trim(2)
        assert len(T) == 2
        assert set(T.labels()) == {"1Z1", "11Z"}

    def test_trim_tie_break_ascending_key(self):
        A = Operator(3, [4, 1, 2], [0, 0, 0], [1.0, 1.0, 1.0])
        assert trim(A, 2).v.tolist() == [1, 2]

    def test_keep_not_counted(self):
        A = Operator(3, [1, 2, 4], [0, 0, 0], [0.001, 3.0, 2.0])
        T = A.trim(1, keep=[PauliTerm(1, 0, 3)])
        assert len(T) == 2 and T.coefficient("Z11") == 0.001

    def test_trim_no_op_and_errors(self):
        A = Operator(2, [1, 2], [0, 0], [1.0, 2.0])
        assert A.trim(5) == A
        with pytest.raises(ValueError):
            A.trim(0)

    def test_cutoff(self):
        A = Operator(2, [1, 2], [0, 0], [1e-11, 2.0])
        assert len(A.cutoff(1e-10)) == 1

    def test_noise(self):
        A = Operator.from_pauli_dict({"11": 1.0, "X1": 1.0, "XY": 1.0})
        B = A.add_noise(0.3)
        assert B.coefficient("11") == 1.0
        assert np.isclose(B.coefficient("X1"), np.exp(-0.3))
        assert np.isclose(B.coefficient("XY"), np.exp(-0.6))
        with pytest.raises(ValueError):
            A.add_noise(-1)

    def test_truncate_weight(self):
        A = Operator.from_pauli_dict({"X11": 1.0, "XX1": 1.0, "XXX": 1.0})
        assert set(A.truncate_weight(2).labels()) == {"X11", "XX1"}

    def test_compress_idempotent(self, rng):
        A = random_operator(rng, 4, 20)
        assert A.compress() == A

    def test_policy(self):
        p = TrimPolicy.from_trim(3, cutoff=1e-3)
        assert p.M == 8
        A = Operator(4, range(16), [0] * 16, np.linspace(1e-4, 1, 16))
        B = p.apply(A)
        assert len(B) == 8 and np.min(np.abs(B.c)) > 0.5


class TestDisplay:
    def test_format_coefficient(self):
        assert format_coefficient(0.5 + 0j) == "(0.5 + 0.0im)"
        assert format_coefficient(-1j) == "(0.0 - 1.0im)"
        assert format_coefficient(0.1 + 0.2 + 0j) == "(0.3 + 0.0im)"

    def test_format_lines_order(self):
        A = Operator.from_pauli_dict({"Z1": 0.5, "X1": -1.0, "1Y": 0.5j})
        assert A.format_lines() == ["(-1.0 + 0.0im) X1", "(0.0 + 0.5im) 1Y", "(0.5 + 0.0im) Z1"]

    def test_iter_and_terms(self):
        A = Operator.from_pauli_dict({"Z1": 0.5})
        assert list(A) == [(PauliTerm(1, 0, 2), 0.5 + 0j)]
        assert A.terms() == {PauliTerm(1, 0, 2): 0.5 + 0j}
        assert norm_lanczos(A) == 0.5
