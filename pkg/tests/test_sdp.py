import json

import numpy as np
import pytest

from advlab import sdp
from advlab.boolean_core import SizeError


def correlation_problem():
    p = sdp.SdpProblem([2], sense=sdp.Sense.MAXIMIZE)
    p.objective = [(0, 0, 1, 1.0)]
    p.add_constraint([(0, 0, 0, 1.0)], 1.0)
    p.add_constraint([(0, 1, 1, 1.0)], 1.0)
    return p


def random_feasible(seed, n=5, m=6):
    """min <C, X> s.t. <A_k, X> = b_k with a strictly feasible primal and dual."""
    rng = np.random.default_rng(seed)
    As = []
    for _ in range(m):
        A = rng.standard_normal((n, n))
        As.append(A + A.T)
    G = rng.standard_normal((n, n))
    X0 = G @ G.T + np.eye(n)
    b = [float(np.sum(A * X0)) for A in As]
    y0 = rng.standard_normal(m)
    H = rng.standard_normal((n, n))
    C = H @ H.T + np.eye(n) + sum(yk * A for yk, A in zip(y0, As))
    p = sdp.SdpProblem([n])
    p.set_dense_objective([C])
    for A, bk in zip(As, b):
        p.add_dense_constraint([A], bk)
    return p, C, As, b


class TestExamples:
    def test_correlation_bound(self):
        sol = sdp.solve(correlation_problem())
        assert sol.status is sdp.Status.OPTIMAL
        assert sol.primal_value == pytest.approx(1.0, abs=1e-6)
        np.testing.assert_allclose(sol.primal[0], np.ones((2, 2)), atol=1e-5)

    def test_min_trace(self):
        p = sdp.SdpProblem([3])
        p.objective = [(0, k, k, 1.0) for k in range(3)]
        p.add_constraint([(0, 0, 0, 1.0)], 2.0)
        sol = sdp.solve(p)
        assert sol.optimal
        assert sol.primal_value == pytest.approx(2.0, abs=1e-6)

    def test_lambda_max(self):
        F = np.array([[0.0, 1.0], [1.0, 0.0]])
        p = sdp.SdpProblem([2], sense=sdp.Sense.MAXIMIZE)
        p.set_dense_objective([F])
        p.add_dense_constraint([np.eye(2)], 1.0)
        sol = sdp.solve(p)
        assert sol.primal_value == pytest.approx(np.linalg.eigvalsh(F).max(), abs=1e-6)
        assert sol.dual_value == pytest.approx(1.0, abs=1e-6)

    @pytest.mark.parametrize("seed", range(4))
    def test_optimal_status_contract(self, seed):
        p, *_ = random_feasible(seed)
        tol = 1e-7
        sol = sdp.solve(p, tol=tol)
        assert sol.optimal
        assert abs(sol.primal_value - sol.dual_value) <= 10 * tol * (1 + abs(sol.primal_value))
        assert np.linalg.eigvalsh(sol.primal[0]).min() >= -tol
        for c in p.constraints:
            lhs = sum(coef * sol.primal[b][i, j] for b, i, j, coef in c.terms)
            assert abs(lhs - c.rhs) <= 10 * tol * (1 + abs(c.rhs))


class TestValidation:
    def test_requires_constraints(self):
        with pytest.raises(ValueError):
            sdp.solve(sdp.SdpProblem([2]))

    def test_bad_term(self):
        p = sdp.SdpProblem([2])
        p.add_constraint([(0, 2, 0, 1.0)], 1.0)
        with pytest.raises(ValueError):
            sdp.solve(p)
        p = sdp.SdpProblem([2])
        p.add_constraint([(1, 0, 0, 1.0)], 1.0)
        with pytest.raises(ValueError):
            sdp.solve(p)

    def test_nonsymmetric_dense(self):
        with pytest.raises(ValueError):
            sdp.SdpProblem([2]).add_dense_constraint([np.array([[0.0, 1.0], [0.0, 0.0]])], 1.0)

    def test_caps(self):
        p = sdp.SdpProblem([sdp.MAX_TOTAL_DIM + 1])
        p.add_constraint([(0, 0, 0, 1.0)], 1.0)
        with pytest.raises(SizeError):
            sdp.solve(p)
        p = sdp.SdpProblem([2])
        for _ in range(sdp.MAX_CONSTRAINTS + 1):
            p.add_constraint([(0, 0, 0, 1.0)], 1.0)
        with pytest.raises(SizeError):
            sdp.solve(p)

    def test_iteration_cap_returns_best_iterate(self):
        p, *_ = random_feasible(0)
        sol = sdp.solve(p, max_iter=2)
        assert sol.status is sdp.Status.MAX_ITERATIONS
        assert sol.iterations <= 2
        assert np.all(np.isfinite(sol.primal[0]))


class TestDeterminismAndDuality:
    def test_bitwise_identical_reports(self):
        p, *_ = random_feasible(11)
        a, b = sdp.solve(p), sdp.solve(p)
        assert json.dumps(a.report()) == json.dumps(b.report())
        assert np.array_equal(a.primal[0], b.primal[0])
        assert np.array_equal(a.dual, b.dual)

    @pytest.mark.parametrize("seed", range(6))
    def test_weak_duality_on_feasible_iterates(self, seed):
        p, *_ = random_feasible(seed)
        sol = sdp.solve(p)
        checked = 0
        for h in sol.history:
            if h["pinf"] <= 1e-8 and h["dinf"] <= 1e-8:
                scale = 1 + abs(h["primal"]) + abs(h["dual"])
                assert h["primal"] >= h["dual"] - 1e-9 * scale
                checked += 1
        assert checked >= 1

    def test_weak_duality_maximize(self):
        sol = sdp.solve(correlation_problem())
        for h in sol.history:
            if h["pinf"] <= 1e-8 and h["dinf"] <= 1e-8:
                assert h["primal"] <= h["dual"] + 1e-9 * (1 + abs(h["dual"]))


class TestAgainstIndependentSolver:
    @pytest.mark.parametrize("seed", range(5))
    def test_matches_clarabel(self, seed):
        cp = pytest.importorskip("cvxpy")
        p, C, As, b = random_feasible(seed)
        X = cp.Variable(C.shape, symmetric=True)
        prob = cp.Problem(cp.Minimize(cp.trace(C @ X)), [X >> 0] + [cp.trace(A @ X) == bk for A, bk in zip(As, b)])
        prob.solve(solver=cp.CLARABEL)
        sol = sdp.solve(p)
        assert sol.primal_value == pytest.approx(prob.value, rel=1e-5, abs=1e-6)


class TestGramToVectors:
    def test_identity(self):
        V = sdp.gram_to_vectors(np.eye(3))
        assert V.shape == (3, 3)
        np.testing.assert_allclose(V @ V.T, np.eye(3), atol=1e-14)

    def test_rank_one(self):
        V = sdp.gram_to_vectors(np.ones((2, 2)))
        assert V.shape == (2, 1)
        np.testing.assert_allclose(V[0], V[1])
        np.testing.assert_allclose(np.linalg.norm(V, axis=1), [1, 1])

    def test_indefinite_rejected(self):
        with pytest.raises(ValueError):
            sdp.gram_to_vectors(np.array([[1.0, 0.0], [0.0, -0.5]]))

    @pytest.mark.parametrize("seed", range(10))
    def test_clipping_bound(self, seed):
        rng = np.random.default_rng(seed)
        G0 = rng.standard_normal((6, 3))
        G = G0 @ G0.T
        E = rng.standard_normal((6, 6)) * 1e-11
        G = G + (E + E.T)
        V = sdp.gram_to_vectors(G, tol=1e-9)
        w = np.linalg.eigvalsh(G)
        clipped = int(np.sum(w <= 1e-9 * (1 + np.abs(w).max())))
        bound = max(abs(w.min()), w[w <= 1e-9 * (1 + np.abs(w).max())].max(initial=0.0)) * max(clipped, 1)
        assert np.linalg.norm(V @ V.T - G, 2) <= bound + 1e-15
