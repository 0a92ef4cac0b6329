import math

import numpy as np
import pytest

from pmeanfair import (
    CHORES,
    GOODS,
    ChoresEquilibrium,
    DimensionError,
    FractionalAllocation,
    GoodsEquilibrium,
    Instance,
    check_chores_equilibrium,
    check_goods_equilibrium,
    extract_chores_equilibrium,
    extract_goods_equilibrium,
    mbb_set,
    mrc_set,
    normalize,
    solve_chores,
    solve_goods,
)


class TestMembershipSets:
    def test_mbb_basic(self):
        norm = normalize(Instance(GOODS, [[2.0, 1.0], [1.0, 2.0]]))
        members, best = mbb_set(norm, [2.0 / 3.0, 2.0 / 3.0], 0)
        assert members == {0}
        assert best == pytest.approx(1.0)

    def test_mbb_tie(self):
        norm = normalize(Instance(GOODS, [[1.0, 1.0]]))
        members, best = mbb_set(norm, [0.5, 0.5], 0)
        assert members == {0, 1}

    def test_mbb_free_valued_item_dominates(self):
        norm = normalize(Instance(GOODS, [[1.0, 1.0]]))
        members, best = mbb_set(norm, [1.0, 0.0], 0)
        assert members == {1}
        assert best == math.inf

    def test_mrc_basic(self):
        norm = normalize(Instance(CHORES, [[2.0, 1.0], [1.0, 2.0]]))
        members, best = mrc_set(norm, [1.0 / 3.0, 1.0 / 3.0], 0)
        assert members == {1}
        assert best == pytest.approx(1.0)

    def test_mrc_zero_cost_always_member(self):
        norm = normalize(Instance(CHORES, [[0.0, 1.0], [1.0, 1.0]]))
        members, _ = mrc_set(norm, [0.0, 0.5], 0)
        assert 0 in members


def _raw_allocation(arr):
    """Build a FractionalAllocation without the column-sum check.

    The public constructor forbids under-allocation, but the checkers
    must still flag it when handed such data (e.g. deserialized input).
    """
    a = object.__new__(FractionalAllocation)
    object.__setattr__(a, "x", np.asarray(arr, dtype=float))
    return a


class TestConstructors:
    def test_rejects_negative_prices(self):
        x = FractionalAllocation(np.ones((1, 1)))
        with pytest.raises(DimensionError):
            GoodsEquilibrium(x, np.array([-1.0]), np.array([1.0]))

    def test_rejects_non_finite_rewards(self):
        x = FractionalAllocation(np.ones((1, 1)))
        with pytest.raises(DimensionError):
            ChoresEquilibrium(x, np.array([math.nan]), np.array([1.0]))

    def test_shape_mismatch(self):
        norm = normalize(Instance(GOODS, [[1.0, 1.0], [1.0, 1.0]]))
        eq = GoodsEquilibrium(
            FractionalAllocation(np.ones((1, 1))), np.array([1.0]), np.array([1.0])
        )
        with pytest.raises(DimensionError):
            check_goods_equilibrium(norm, eq)


class TestGoodsChecker:
    def _hand_equilibrium(self):
        norm = normalize(Instance(GOODS, [[2.0, 1.0], [1.0, 2.0]]))
        x = FractionalAllocation(np.eye(2))
        prices = np.array([2.0 / 3.0, 2.0 / 3.0])
        budgets = np.array([2.0 / 3.0, 2.0 / 3.0])
        return norm, x, prices, budgets

    def test_hand_equilibrium_passes(self):
        norm, x, prices, budgets = self._hand_equilibrium()
        verdict = check_goods_equilibrium(norm, GoodsEquilibrium(x, prices, budgets))
        assert verdict.ok
        assert all(r <= 1e-12 for r in verdict.residuals.values())

    def test_budget_violation_detected(self):
        norm, x, prices, _ = self._hand_equilibrium()
        verdict = check_goods_equilibrium(
            norm, GoodsEquilibrium(x, prices, np.array([1.0, 2.0 / 3.0]))
        )
        assert not verdict.ok
        assert verdict.failures[0][0] == "budget"

    def test_non_mbb_holding_detected(self):
        norm, _, prices, _ = self._hand_equilibrium()
        swapped = FractionalAllocation(np.array([[0.0, 1.0], [1.0, 0.0]]))
        verdict = check_goods_equilibrium(
            norm, GoodsEquilibrium(swapped, prices, np.array([2.0 / 3.0, 2.0 / 3.0]))
        )
        assert not verdict.ok
        assert any(f[0] == "mbb" for f in verdict.failures)

    def test_unallocated_priced_item_detected(self):
        norm, _, prices, _ = self._hand_equilibrium()
        partial = _raw_allocation([[1.0, 0.0], [0.0, 0.5]])
        verdict = check_goods_equilibrium(
            norm, GoodsEquilibrium(partial, prices, np.array([2.0 / 3.0, 1.0 / 3.0]))
        )
        assert any(f[0] == "clearing" for f in verdict.failures)

    def test_zero_price_item_may_stay_unallocated(self):
        norm = normalize(Instance(GOODS, [[1.0, 0.3], [1.0, 0.3]]))
        x = _raw_allocation([[0.5, 0.0], [0.5, 0.0]])
        eq = GoodsEquilibrium(x, np.array([1.0, 0.0]), np.array([0.5, 0.5]))
        verdict = check_goods_equilibrium(norm, eq)
        assert verdict.residuals["clearing"] == 0.0


class TestChoresChecker:
    def test_hand_equilibrium_passes(self):
        norm = normalize(Instance(CHORES, [[2.0, 1.0], [1.0, 2.0]]))
        x = FractionalAllocation(np.array([[0.0, 1.0], [1.0, 0.0]]))
        eq = ChoresEquilibrium(
            x, np.array([1.0 / 3.0, 1.0 / 3.0]), np.array([1.0 / 3.0, 1.0 / 3.0])
        )
        verdict = check_chores_equilibrium(norm, eq)
        assert verdict.ok

    def test_non_mrc_holding_detected(self):
        norm = normalize(Instance(CHORES, [[2.0, 1.0], [1.0, 2.0]]))
        x = FractionalAllocation(np.eye(2))
        eq = ChoresEquilibrium(
            x, np.array([1.0 / 3.0, 1.0 / 3.0]), np.array([2.0 / 3.0, 2.0 / 3.0])
        )
        verdict = check_chores_equilibrium(norm, eq)
        assert any(f[0] == "mrc" for f in verdict.failures)

    def test_earning_violation_detected(self):
        norm = normalize(Instance(CHORES, [[2.0, 1.0], [1.0, 2.0]]))
        x = FractionalAllocation(np.array([[0.0, 1.0], [1.0, 0.0]]))
        eq = ChoresEquilibrium(
            x, np.array([1.0 / 3.0, 1.0 / 3.0]), np.array([1.0, 1.0 / 3.0])
        )
        verdict = check_chores_equilibrium(norm, eq)
        assert verdict.failures[0][0] == "earning"

    def test_partial_clearing_detected(self):
        norm = normalize(Instance(CHORES, [[1.0, 1.0], [1.0, 1.0]]))
        x = _raw_allocation([[0.5, 0.5], [0.0, 0.5]])
        eq = ChoresEquilibrium(x, np.array([0.5, 0.5]), np.array([0.5, 0.25]))
        verdict = check_chores_equilibrium(norm, eq)
        assert any(f[0] == "clearing" for f in verdict.failures)


class TestSolverOutputsVerify:
    def test_goods_solutions_pass_checker(self):
        rng = np.random.default_rng(21)
        for p in (0.0, -1.0, -3.0):
            inst = Instance(GOODS, rng.uniform(0.1, 5.0, size=(3, 5)))
            alloc, _ = solve_goods(inst, p)
            eq = extract_goods_equilibrium(inst, alloc, p)
            verdict = check_goods_equilibrium(normalize(inst), eq)
            assert verdict.ok, verdict.failures

    def test_chores_solutions_pass_checker(self):
        rng = np.random.default_rng(23)
        for p in (1.0, 2.0, 4.0):
            inst = Instance(CHORES, rng.uniform(0.1, 5.0, size=(3, 5)))
            alloc, _ = solve_chores(inst, p)
            eq = extract_chores_equilibrium(inst, alloc, p)
            verdict = check_chores_equilibrium(normalize(inst), eq)
            assert verdict.ok, verdict.failures
