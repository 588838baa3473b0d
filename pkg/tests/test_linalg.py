import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from advlab import linalg as la

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)


def symmetric(n):
    return arrays(np.float64, (n, n), elements=finite).map(lambda A: (A + A.T) / 2)


def composition_by_loops(B, blocks):
    """C(a, b) = B(a~, b~) prod_i hat(A_i)(a_i, b_i), labels mixed-radix with factor 1 fastest."""
    radices = [sum(A.shape) for A in blocks]
    hats = []
    for A in blocks:
        m, n = A.shape
        s = np.linalg.svd(A, compute_uv=False).max()
        H = np.block([[s * np.eye(m), A], [A.T, s * np.eye(n)]])
        hats.append(H)
    labels = list(itertools.product(*[range(r) for r in reversed(radices)]))
    labels = [tuple(reversed(l)) for l in labels]  # factor 1 fastest
    C = np.zeros((len(labels), len(labels)))
    for ia, a in enumerate(labels):
        ta = sum(int(a[i] >= blocks[i].shape[0]) << i for i in range(len(blocks)))
        for ib, b in enumerate(labels):
            tb = sum(int(b[i] >= blocks[i].shape[0]) << i for i in range(len(blocks)))
            C[ia, ib] = B[ta, tb] * np.prod([hats[i][a[i], b[i]] for i in range(len(blocks))])
    return C


class TestSymEig:
    def test_examples(self):
        np.testing.assert_allclose(la.eigvals(np.eye(3)), [1, 1, 1])
        np.testing.assert_allclose(la.eigvals([[0, 1], [1, 0]]), [1, -1], atol=1e-15)

    def test_rejects_nonsymmetric(self):
        with pytest.raises(la.ShapeError):
            la.sym_eig([[0, 1], [0, 0]])
        with pytest.raises(la.ShapeError):
            la.sym_eig(np.ones((2, 3)))

    def test_rejects_nonfinite(self):
        with pytest.raises(la.NumericError):
            la.sym_eig([[np.nan, 0], [0, 1]])

    @settings(max_examples=60, deadline=None)
    @given(st.integers(1, 8).flatmap(symmetric))
    def test_decomposition_invariants(self, A):
        e = la.sym_eig(A)
        norm = np.abs(e.eigenvalues).max(initial=0.0)
        assert np.all(np.diff(e.eigenvalues) <= 0)
        assert np.abs(e.reconstruct() - A).max() <= 1e-10 * (1 + norm)
        Q = e.eigenvectors
        assert np.abs(Q.T @ Q - np.eye(len(A))).max() <= 1e-10

    @settings(max_examples=60, deadline=None)
    @given(st.integers(1, 8).flatmap(symmetric), st.data())
    def test_rayleigh_sandwich(self, A, data):
        v = data.draw(arrays(np.float64, len(A), elements=st.floats(-1, 1)).filter(lambda v: np.linalg.norm(v) > 1e-3))
        v = v / np.linalg.norm(v)
        q = v @ A @ v
        assert la.lambda_min(A) - 1e-12 * (1 + np.abs(A).max()) <= q <= la.lambda_max(A) + 1e-12 * (1 + np.abs(A).max())


class TestNorms:
    def test_spectral_examples(self):
        assert la.spectral_norm(np.zeros((3, 2))) == 0.0
        assert la.spectral_norm([[0, 1], [1, 0]]) == pytest.approx(1.0)

    def test_trace_norm_examples(self):
        assert la.trace_norm(np.eye(4)) == pytest.approx(4.0)
        u = np.array([0.6, 0.8, 0.0])
        assert la.trace_norm(np.outer(u, u)) == pytest.approx(1.0)

    @settings(max_examples=50, deadline=None)
    @given(arrays(np.float64, st.tuples(st.integers(1, 6), st.integers(1, 6)), elements=finite))
    def test_spectral_norm_via_gram_eigenvalue(self, A):
        oracle = np.sqrt(max(np.linalg.eigvalsh(A.T @ A).max(), 0.0))
        assert la.spectral_norm(A) == pytest.approx(oracle, rel=1e-7, abs=1e-7)

    def test_kron_cap(self):
        with pytest.raises(la.ShapeError):
            la.kron(np.ones((32, 1)), np.ones((32, 1)))

    def test_hadamard_shape(self):
        with pytest.raises(la.ShapeError):
            la.hadamard(np.ones((2, 2)), np.ones((2, 3)))


class TestDefiniteness:
    def test_examples(self):
        assert la.is_psd(np.eye(3))[0]
        ok, lam = la.is_psd([[0, 1], [1, 0]])
        assert not ok and lam == pytest.approx(-1.0)
        assert la.is_nsd(-np.eye(2))[0]

    def test_random_gram_is_psd(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            G = rng.standard_normal((6, 3))
            assert la.is_psd(G @ G.T, 1e-10)[0]


class TestHat:
    def test_examples(self):
        np.testing.assert_array_equal(la.hat([[1.0]]), np.ones((2, 2)))
        np.testing.assert_array_equal(la.hat(np.zeros((2, 2))), np.zeros((4, 4)))

    @settings(max_examples=80, deadline=None)
    @given(arrays(np.float64, st.tuples(st.integers(1, 6), st.integers(1, 6)), elements=finite))
    def test_hat_is_psd(self, A):
        H = la.hat(A)
        assert la.lambda_min(H) >= -1e-10 * (1 + la.spectral_norm(A))
        # the spectrum is ||A|| +- singular values
        assert la.lambda_max(H) == pytest.approx(2 * la.spectral_norm(A), abs=1e-9 * (1 + la.spectral_norm(A)))


class TestLift:
    def test_examples(self):
        A = np.array([[1.0, 2.0], [2.0, 5.0]])
        np.testing.assert_array_equal(la.lift_by_function(A, [0, 1]), A)
        np.testing.assert_array_equal(la.lift_by_function(A, lambda x: 1, 3), 5 * np.ones((3, 3)))

    def test_out_of_range(self):
        with pytest.raises(la.ShapeError):
            la.lift_by_function(np.eye(2), [0, 2])

    @settings(max_examples=50, deadline=None)
    @given(st.integers(1, 5), st.integers(1, 9), st.data())
    def test_preserves_definiteness(self, M, N, data):
        G = data.draw(arrays(np.float64, (M, M), elements=st.floats(-3, 3)))
        A = G @ G.T
        h = data.draw(st.lists(st.integers(0, M - 1), min_size=N, max_size=N))
        assert la.is_psd(la.lift_by_function(A, h))[0]
        assert la.is_nsd(la.lift_by_function(-A, h))[0]


class TestHadamardClosure:
    @settings(max_examples=50, deadline=None)
    @given(st.integers(2, 6), st.data())
    def test_psd_and_nsd(self, n, data):
        G1 = data.draw(arrays(np.float64, (n, n), elements=st.floats(-3, 3)))
        G2 = data.draw(arrays(np.float64, (n, n), elements=st.floats(-3, 3)))
        A, B = G1 @ G1.T, -(G2 @ G2.T)
        scale = 1 + la.spectral_norm(A) * la.spectral_norm(B)
        assert la.lambda_min(A * -B) >= -1e-10 * scale
        assert la.lambda_max(A * B) <= 1e-10 * scale


class TestMatrixComposition:
    def test_single_block_examples(self):
        C = la.matrix_composition([[0, 1], [1, 0]], [[[2.0]]])
        np.testing.assert_array_equal(C, [[0, 2], [2, 0]])
        C = la.matrix_composition(np.eye(2), [[[1.0]]])
        np.testing.assert_array_equal(C, np.eye(2))

    def test_factor_order_is_first_fastest(self):
        A1, A2 = np.array([[1.0, 2.0]]), np.array([[3.0], [4.0]])
        K = la.kron_factor_first_fastest([A1, A2])
        np.testing.assert_array_equal(K, np.kron(A2, A1))

    def test_threshold_bits(self):
        # shapes (1,1) and (2,1): radices 2 and 3, factor 1 fastest
        bits = la.composition_threshold_bits([(1, 1), (2, 1)])
        assert bits.tolist() == [0, 1, 0, 1, 2, 3]

    def test_size_cap(self):
        with pytest.raises(la.ShapeError):
            la.matrix_composition(np.eye(8), [np.ones((4, 4))] * 3, max_dim=256)
        with pytest.raises(la.ShapeError):
            la.matrix_composition(np.eye(4), [np.ones((1, 1))])

    @pytest.mark.parametrize("seed", range(12))
    def test_matches_entrywise_definition(self, seed):
        rng = np.random.default_rng(seed)
        N = int(rng.integers(1, 4))
        blocks = [rng.standard_normal(tuple(rng.integers(1, 4, 2))) for _ in range(N)]
        B = rng.standard_normal((1 << N, 1 << N))
        B = B + B.T
        np.testing.assert_allclose(la.matrix_composition(B, blocks), composition_by_loops(B, blocks), atol=1e-12)

    @settings(max_examples=60, deadline=None)
    @given(st.integers(1, 3), st.data())
    def test_spectral_lemma(self, N, data):
        shapes = [data.draw(st.tuples(st.integers(1, 4), st.integers(1, 4))) for _ in range(N)]
        blocks = [data.draw(arrays(np.float64, s, elements=st.floats(-5, 5))) for s in shapes]
        B = data.draw(symmetric(1 << N))
        C = la.matrix_composition(B, blocks)
        prod = np.prod([np.linalg.norm(A, 2) for A in blocks])
        wb, wc = np.linalg.eigvalsh(B), np.linalg.eigvalsh(C)
        normB, normC = np.abs(wb).max(), np.abs(wc).max()
        assert abs(normC - normB * prod) <= 1e-8 * (1 + normB * prod)
        assert wc.max() >= wb.max() * prod - 1e-8 * (1 + normB * prod)
