import numpy as np
import pytest
from scipy.optimize import linprog

from pmeanfair import NumericalError
from pmeanfair.simplex import solve_lp


class TestHandLPs:
    def test_max_with_ub(self):
        # max x + y, x + 2y <= 4, 3x + y <= 6  ->  x = 1.6, y = 1.2
        res = solve_lp([1, 1], A_ub=[[1, 2], [3, 1]], b_ub=[4, 6], maximize=True)
        assert res.value == pytest.approx(2.8)
        assert np.allclose(res.x, [1.6, 1.2])

    def test_min_with_eq(self):
        # min 2x + 3y, x + y = 4  ->  put everything on x
        res = solve_lp([2, 3], A_eq=[[1, 1]], b_eq=[4], maximize=False)
        assert res.value == pytest.approx(8.0)
        assert np.allclose(res.x, [4.0, 0.0])

    def test_mixed_constraints(self):
        # max y, x + y = 1, y <= 0.25
        res = solve_lp([0, 1], A_ub=[[0, 1]], b_ub=[0.25], A_eq=[[1, 1]], b_eq=[1])
        assert res.value == pytest.approx(0.25)
        assert np.allclose(res.x, [0.75, 0.25])

    def test_negative_rhs(self):
        # max x subject to -x <= -2 (i.e. x >= 2) and x <= 5
        res = solve_lp([1], A_ub=[[-1], [1]], b_ub=[-2, 5])
        assert res.value == pytest.approx(5.0)

    def test_degenerate_equalities(self):
        # duplicated equality rows must not break phase 2
        res = solve_lp([1, 2], A_eq=[[1, 1], [1, 1]], b_eq=[3, 3], maximize=True)
        assert res.value == pytest.approx(6.0)

    def test_infeasible(self):
        with pytest.raises(NumericalError, match="infeasible"):
            solve_lp([1], A_eq=[[1], [1]], b_eq=[1, 2])

    def test_unbounded(self):
        with pytest.raises(NumericalError, match="unbounded"):
            solve_lp([1, 1], A_ub=[[1, -1]], b_ub=[1], maximize=True)

    def test_no_constraints(self):
        with pytest.raises(NumericalError):
            solve_lp([1, 2])


class TestAgainstScipy:
    def _compare(self, c, A_ub=None, b_ub=None, A_eq=None, b_eq=None):
        ours = solve_lp(c, A_ub, b_ub, A_eq, b_eq, maximize=False)
        ref = linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq, method="highs")
        assert ref.status == 0
        assert ours.value == pytest.approx(ref.fun, abs=1e-7)

    def test_random_inequality_lps(self):
        rng = np.random.default_rng(7)
        for _ in range(60):
            nv = int(rng.integers(2, 6))
            nc = int(rng.integers(1, 5))
            c = rng.normal(size=nv)
            A = rng.normal(size=(nc, nv))
            # b chosen so x = 0 is feasible: never infeasible, and adding
            # a box keeps it bounded
            b = rng.uniform(0.5, 3.0, size=nc)
            box = np.eye(nv)
            A_ub = np.vstack([A, box])
            b_ub = np.concatenate([b, np.full(nv, 10.0)])
            self._compare(c, A_ub, b_ub)

    def test_random_transportation_lps(self):
        rng = np.random.default_rng(11)
        for _ in range(40):
            n = int(rng.integers(2, 4))
            m = int(rng.integers(2, 5))
            cost = rng.uniform(0.1, 5.0, size=n * m)
            # each item fully assigned across agents
            A_eq = np.zeros((m, n * m))
            for j in range(m):
                A_eq[j, j::m] = 1.0
            self._compare(cost, A_eq=A_eq, b_eq=np.ones(m))
