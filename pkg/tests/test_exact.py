import numpy as np
import pytest

from pmeanfair import (
    CHORES,
    GOODS,
    Instance,
    IntegralAllocation,
    PreconditionError,
    ScaleError,
    normalize,
    normalized_p_mean,
    p_mean,
)
from pmeanfair.exact import (
    ef1_transfer_step,
    enumerate_optima,
    grid_oracle_divisible,
    lemma_chores_algebra_predicate,
    lemma_goods_algebra_predicate,
    lemma_squeeze_predicate,
    sample_instance,
    sample_sparse_goods,
)


class TestEnumerateOptima:
    def test_disjoint_goods_unique_optimum(self):
        inst = Instance(GOODS, [[3.0, 1.0], [1.0, 3.0]])
        result = enumerate_optima(inst, 0.0)
        assert len(result.optima) == 1
        assert np.array_equal(result.optima[0].owner, [0, 1])
        assert result.objective == pytest.approx(0.75)

    def test_symmetric_instance_tie_set(self):
        # two identical agents, one good: both assignments give the same
        # p-mean for p > 0 only when welfare ignores who holds it; at
        # p = 1 the mean is 1/2 either way
        inst = Instance(GOODS, [[1.0], [1.0]])
        result = enumerate_optima(inst, 1.0)
        assert len(result.optima) == 2
        assert result.objective == pytest.approx(0.5)

    def test_chores_minimize(self):
        inst = Instance(CHORES, [[3.0, 1.0], [1.0, 3.0]])
        result = enumerate_optima(inst, 2.0)
        assert len(result.optima) == 1
        assert np.array_equal(result.optima[0].owner, [1, 0])
        assert result.objective == pytest.approx(0.25)

    def test_objective_matches_direct_evaluation(self):
        rng = np.random.default_rng(101)
        inst = sample_instance(rng, 3, 4, GOODS)
        result = enumerate_optima(inst, -1.0)
        for opt in result.optima:
            assert normalized_p_mean(inst, opt, -1.0) == pytest.approx(
                result.objective
            )

    def test_scale_error(self):
        inst = Instance(GOODS, np.ones((10, 8)))
        with pytest.raises(ScaleError):
            enumerate_optima(inst, 1.0)


class TestGridOracle:
    def test_two_by_two_closed_form(self):
        # goods, p = 1/2, rows (1/2+e, 1/2-e) and (1/2+d, 1/2-d) with
        # e=0.1, d=0.2: good 2 goes to agent 1 and good 1 splits at the
        # stationary share beta* of the edge restriction of w_p
        eps, delta, p = 0.1, 0.2, 0.5
        inst = Instance(GOODS, [[0.5 + eps, 0.5 - eps], [0.5 + delta, 0.5 - delta]])
        alloc, obj = grid_oracle_divisible(inst, p, 100000)
        e = p / (p - 1)
        beta_star = (
            (0.5 + delta) ** e - (0.5 - eps) * (0.5 + eps) ** (1 / (p - 1))
        ) / ((0.5 + delta) ** e + (0.5 + eps) ** e)
        assert beta_star == pytest.approx(0.102564, abs=1e-6)
        assert alloc.x[0, 0] == pytest.approx(beta_star, abs=1e-3)
        assert alloc.x[0, 1] == pytest.approx(1.0, abs=1e-4)
        u1 = (0.5 + eps) * beta_star + (0.5 - eps)
        u2 = (0.5 + delta) * (1 - beta_star)
        assert obj == pytest.approx(p_mean([u1, u2], p), abs=1e-6)

    def test_oracle_beats_every_coarse_point(self):
        rng = np.random.default_rng(103)
        inst = sample_instance(rng, 2, 2, GOODS)
        _, fine = grid_oracle_divisible(inst, -1.0, 10000)
        _, coarse = grid_oracle_divisible(inst, -1.0, 50)
        assert fine >= coarse - 1e-12

    def test_resolution_validation(self):
        inst = Instance(GOODS, [[1.0, 1.0]])
        with pytest.raises(ScaleError):
            grid_oracle_divisible(inst, 1.0, 0)


class TestLemmaPredicates:
    def test_squeeze_holds_on_samples(self):
        rng = np.random.default_rng(107)
        checked = 0
        while checked < 500:
            a, b, alpha, beta = rng.uniform(0.05, 2.0, size=4)
            p = float(rng.uniform(2.0, 12.0) + 1e-9)
            try:
                assert lemma_squeeze_predicate(a, b, alpha, beta, p)
            except PreconditionError:
                continue
            checked += 1

    def test_squeeze_preconditions(self):
        with pytest.raises(PreconditionError):
            lemma_squeeze_predicate(1.0, 1.0, 1.0, 1.0, 2.0)  # p <= 2
        with pytest.raises(PreconditionError):
            lemma_squeeze_predicate(0.5, 0.5, 1.0, 1.0, 3.0)  # max premise
        with pytest.raises(PreconditionError):
            lemma_squeeze_predicate(1.0, 0.1, 1.0, 0.5, 3.0)  # sum premise
        with pytest.raises(PreconditionError):
            lemma_squeeze_predicate(-1.0, 1.0, 0.5, 0.5, 3.0)  # positivity

    def test_chores_algebra_holds_on_samples(self):
        rng = np.random.default_rng(109)
        checked = 0
        while checked < 500:
            alpha = rng.uniform(0.01, 0.49)
            a = rng.uniform(0.0, alpha * 0.99)
            beta = rng.uniform(-0.5, 1 - 2 * alpha - 1e-9)
            try:
                ineq1, ineq2 = lemma_chores_algebra_predicate(a, alpha, beta)
            except PreconditionError:
                continue
            assert ineq1 and ineq2
            checked += 1

    def test_chores_algebra_preconditions(self):
        with pytest.raises(PreconditionError):
            lemma_chores_algebra_predicate(0.5, 0.3, 0.1)  # a < alpha fails
        with pytest.raises(PreconditionError):
            lemma_chores_algebra_predicate(0.1, 0.4, 0.5)  # beta bound fails

    def test_goods_algebra_holds_on_samples(self):
        rng = np.random.default_rng(113)
        checked = 0
        while checked < 500:
            a, b, alpha, beta = rng.uniform(0.05, 2.0, size=4)
            p = float(rng.uniform(-8.0, 0.0))
            try:
                assert lemma_goods_algebra_predicate(a, b, alpha, beta, p)
            except PreconditionError:
                continue
            checked += 1

    def test_goods_algebra_preconditions(self):
        with pytest.raises(PreconditionError):
            lemma_goods_algebra_predicate(1.0, 1.0, 0.5, 0.5, -1.0)  # min premise
        with pytest.raises(PreconditionError):
            lemma_goods_algebra_predicate(0.5, 0.5, 1.0, 1.0, 1.0)  # p > 0


class TestTransferStep:
    def _envious_instance(self):
        # agent 2 holds chores 1..3 (uniform cost), agent 1 holds chore 0
        return Instance(CHORES, [[1.0, 4.0, 4.0, 4.0], [1.0, 1.0, 1.0, 1.0]])

    def test_transfer_decreases_squared_costs(self):
        inst = self._envious_instance()
        alloc = IntegralAllocation(np.array([0, 1, 1, 1]))
        V = normalize(inst).values

        def sq(a):
            c = np.array([V[i] @ a.matrix(2)[i] for i in range(2)])
            return float(np.sum(c**2)), float(np.max(c))

        before_sq, before_max = sq(alloc)
        after = ef1_transfer_step(inst, alloc)
        after_sq, after_max = sq(after)
        assert after_sq < before_sq
        assert after_max <= before_max

    def test_transfer_picks_min_ratio_chore(self):
        # chore 0 has the smallest c1/c2 ratio among agent 2's chores
        inst = Instance(CHORES, [[1.0, 9.0, 9.0], [3.0, 3.0, 3.0]])
        alloc = IntegralAllocation(np.array([1, 1, 1]))
        after = ef1_transfer_step(inst, alloc)
        assert after.owner[0] == 0
        assert after.owner[1] == 1 and after.owner[2] == 1

    def test_repeated_transfers_terminate_in_ef1(self):
        from pmeanfair import check_efk

        rng = np.random.default_rng(127)
        for _ in range(30):
            m = int(rng.integers(3, 8))
            inst = sample_instance(rng, 2, m, CHORES)
            alloc = IntegralAllocation(np.ones(m, dtype=int))
            for _ in range(m + 1):
                try:
                    alloc = ef1_transfer_step(inst, alloc)
                except PreconditionError:
                    break
            # once the step refuses, either agent 2 is EF1-satisfied or
            # the swap rule applies (which the theorem handles separately)
            V = normalize(inst).values
            a1 = np.flatnonzero(alloc.owner == 0)
            c1a1, c2a1 = float(V[0, a1].sum()), float(V[1, a1].sum())
            if c1a1 <= c2a1 + 1e-12:
                report = check_efk(inst, alloc)
                if not report.holds:
                    assert report.witness.agent_i == 0

    def test_preconditions(self):
        inst = self._envious_instance()
        with pytest.raises(PreconditionError):  # already EF1
            ef1_transfer_step(inst, IntegralAllocation(np.array([1, 0, 0, 1])))
        with pytest.raises(PreconditionError):  # not chores
            ef1_transfer_step(
                Instance(GOODS, [[1.0, 1.0]]), IntegralAllocation(np.array([0, 1]))
            )
        with pytest.raises(PreconditionError):  # three agents
            ef1_transfer_step(
                Instance(CHORES, np.ones((3, 2))), IntegralAllocation(np.array([0, 1]))
            )


class TestSamplers:
    def test_sample_instance_rows_normalized(self):
        rng = np.random.default_rng(131)
        inst = sample_instance(rng, 3, 5, GOODS)
        assert inst.kind == GOODS
        assert np.allclose(inst.row_sums, 1.0)
        assert np.all(inst.values > 0)

    def test_sparse_goods_has_zeros_but_valid(self):
        rng = np.random.default_rng(137)
        found_zero = False
        for _ in range(10):
            inst = sample_sparse_goods(rng, 3, 5)
            assert np.all(inst.row_sums > 0)
            found_zero = found_zero or bool(np.any(inst.values == 0))
        assert found_zero
