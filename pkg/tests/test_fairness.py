import numpy as np
import pytest

from pmeanfair import (
    CHORES,
    GOODS,
    FractionalAllocation,
    Instance,
    IntegralAllocation,
    ParamError,
    ScaleError,
    check_ef,
    check_efk,
    check_fpo,
    check_po_integral,
    check_prop,
    check_propk,
)
from pmeanfair.paperlab import make_chores_neg_p_eq1, make_chores_tightness, make_i1


def equal_split(inst):
    return FractionalAllocation(np.full((inst.n, inst.m), 1.0 / inst.n))


def random_integral(rng, inst):
    return IntegralAllocation(rng.integers(0, inst.n, size=inst.m))


class TestEF:
    def test_equal_split_holds(self):
        for kind in (GOODS, CHORES):
            inst = Instance(kind, [[1.0, 2.0], [3.0, 1.0]])
            assert check_ef(inst, equal_split(inst)).holds

    def test_two_agent_chores_envy(self):
        # rows (1,1,1,1) and (1,4,4,4); giving agent 1 everything but the
        # first chore leaves them with cost 3 against the other's 1
        inst = make_i1(1)
        alloc = IntegralAllocation(np.array([1, 0, 0, 0]))
        report = check_ef(inst, alloc)
        assert not report.holds
        assert report.witness.agent_i == 0
        assert report.witness.agent_j == 1
        assert report.witness.slack == pytest.approx(2.0)

    def test_beta_relaxation(self):
        inst = make_i1(1)
        alloc = IntegralAllocation(np.array([1, 0, 0, 0]))
        assert check_ef(inst, alloc, beta=3.0).holds

    def test_beta_below_one(self):
        inst = Instance(GOODS, [[1.0]])
        with pytest.raises(ParamError):
            check_ef(inst, IntegralAllocation(np.array([0])), beta=0.5)


class TestProp:
    def test_equal_split_holds(self):
        inst = Instance(CHORES, [[1.0, 2.0], [3.0, 1.0]])
        assert check_prop(inst, equal_split(inst)).holds

    def test_chores_tightness_optimum(self):
        # n=4, p=2: the zero-cost first chore goes elsewhere and agent 1
        # takes exactly half of the second; their cost is t/2 against a
        # share of 1/4, so the tight factor is 2t
        inst = make_chores_tightness(4, 2.0)
        t = (1.0 / 3.0) ** 0.5
        x = np.array(
            [
                [0.0, 0.5],
                [1.0, 1.0 / 6.0],
                [0.0, 1.0 / 6.0],
                [0.0, 1.0 / 6.0],
            ]
        )
        alloc = FractionalAllocation(x)
        assert not check_prop(inst, alloc).holds
        assert check_prop(inst, alloc, beta=2.0 * t + 1e-6).holds
        assert not check_prop(inst, alloc, beta=2.0 * t - 1e-6).holds

    def test_all_chores_to_one_agent_is_2_prop(self):
        inst = Instance(CHORES, [[1.0, 2.0], [2.0, 1.0]])
        alloc = IntegralAllocation(np.array([0, 0]))
        assert not check_prop(inst, alloc).holds
        assert check_prop(inst, alloc, beta=2.0).holds


class TestEFk:
    def test_single_good_two_agents(self):
        inst = Instance(GOODS, [[1.0], [1.0]])
        assert check_efk(inst, IntegralAllocation(np.array([0]))).holds

    def test_identical_agents_round_robin(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            m = int(rng.integers(2, 8))
            row = rng.uniform(0.1, 5.0, size=m)
            inst = Instance(GOODS, np.vstack([row, row, row]))
            order = np.argsort(-row)
            owner = np.empty(m, dtype=int)
            owner[order] = np.arange(m) % 3
            assert check_efk(inst, IntegralAllocation(owner)).holds

    def test_chores_small_m_holds(self):
        # dropping their worst chore leaves agent 1 with cost 1/3, which
        # matches their view of the other bundle exactly
        inst = make_chores_neg_p_eq1(3, 0.01)
        alloc = IntegralAllocation(np.array([0, 0, 1]))
        assert check_efk(inst, alloc).holds

    def test_chores_larger_m_fails(self):
        # with five chores the reduced cost 3/5 still exceeds 1/5
        inst = make_chores_neg_p_eq1(5, 0.01)
        alloc = IntegralAllocation(np.array([0, 0, 0, 0, 1]))
        report = check_efk(inst, alloc)
        assert not report.holds
        assert report.witness.agent_i == 0
        assert report.witness.slack == pytest.approx(3.0 / 5.0 - 1.0 / 5.0)

    def test_param_errors(self):
        inst = Instance(GOODS, [[1.0]])
        a = IntegralAllocation(np.array([0]))
        with pytest.raises(ParamError):
            check_efk(inst, a, beta=0.9)
        with pytest.raises(ParamError):
            check_efk(inst, a, k=0)


class TestPropK:
    def test_goods_3x7_single_item_fails(self):
        # the uniform agent holds one good; adding their best missing good
        # gives 2/7, short of the 1/3 share
        inst = Instance(GOODS, [[1.0] * 7, [1.0] * 7, [1.0] * 7])
        owner = np.array([0, 1, 1, 1, 2, 2, 2])
        report = check_propk(inst, IntegralAllocation(owner))
        assert not report.holds
        assert report.witness.agent_i == 0
        assert report.witness.slack == pytest.approx(7.0 / 3.0 - 2.0)

    def test_prop_implies_propk(self):
        rng = np.random.default_rng(5)
        for _ in range(40):
            n = int(rng.integers(2, 4))
            m = int(rng.integers(2, 7))
            kind = GOODS if rng.random() < 0.5 else CHORES
            inst = Instance(kind, rng.uniform(0.1, 5.0, size=(n, m)))
            alloc = random_integral(rng, inst)
            if check_prop(inst, alloc).holds:
                assert check_propk(inst, alloc, k=1).holds
                assert check_propk(inst, alloc, k=2).holds

    def test_empty_bundle_goods(self):
        inst = Instance(GOODS, [[3.0, 1.0], [1.0, 1.0]])
        alloc = IntegralAllocation(np.array([1, 1]))
        # agent 0 holds nothing; their best single good (value 3) covers
        # the share of 2
        assert check_propk(inst, alloc).holds


class TestPO:
    def test_po_holds_and_fails(self):
        inst = Instance(GOODS, [[0.6, 0.4], [0.3, 0.7]])
        assert check_po_integral(inst, IntegralAllocation(np.array([0, 1]))).holds
        report = check_po_integral(inst, IntegralAllocation(np.array([1, 0])))
        assert not report.holds
        assert report.witness.items == (0, 1)

    def test_scale_error(self):
        inst = Instance(GOODS, np.ones((10, 8)))
        with pytest.raises(ScaleError):
            check_po_integral(inst, IntegralAllocation(np.zeros(8, dtype=int)))


class TestFPO:
    def test_identical_agents_any_allocation(self):
        inst = Instance(GOODS, [[1.0, 2.0], [1.0, 2.0]])
        assert check_fpo(inst, IntegralAllocation(np.array([0, 1]))).holds

    def test_swapped_allocation_fails(self):
        inst = Instance(GOODS, [[0.9, 0.1], [0.1, 0.9]])
        report = check_fpo(inst, IntegralAllocation(np.array([1, 0])))
        assert not report.holds
        assert report.witness.slack > 0

    def test_fpo_implies_po(self):
        rng = np.random.default_rng(9)
        for _ in range(30):
            n = int(rng.integers(2, 4))
            m = int(rng.integers(2, 6))
            kind = GOODS if rng.random() < 0.5 else CHORES
            inst = Instance(kind, rng.uniform(0.1, 5.0, size=(n, m)))
            alloc = random_integral(rng, inst)
            if check_fpo(inst, alloc).holds:
                assert check_po_integral(inst, alloc).holds


class TestImplications:
    def test_goods_ef_implies_prop(self):
        rng = np.random.default_rng(13)
        for _ in range(60):
            n = int(rng.integers(2, 5))
            m = int(rng.integers(2, 7))
            inst = Instance(GOODS, rng.uniform(0.1, 5.0, size=(n, m)))
            alloc = random_integral(rng, inst)
            if check_ef(inst, alloc).holds:
                assert check_prop(inst, alloc).holds

    def test_two_agent_chores_prop_bounds_envy(self):
        # with two agents, beta-PROP forces beta/(2-beta)-EF
        rng = np.random.default_rng(17)
        for _ in range(60):
            m = int(rng.integers(2, 7))
            inst = Instance(CHORES, rng.uniform(0.1, 5.0, size=(2, m)))
            x = rng.uniform(size=(2, m))
            x[1] = 1.0 - x[0]
            alloc = FractionalAllocation(x)
            beta = float(rng.uniform(1.0, 1.9))
            if check_prop(inst, alloc, beta=beta).holds:
                assert check_ef(inst, alloc, beta=beta / (2.0 - beta) + 1e-9).holds
