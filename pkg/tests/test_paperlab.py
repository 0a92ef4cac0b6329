import numpy as np
import pytest

from pmeanfair import (
    CHORES,
    GOODS,
    FractionalAllocation,
    Instance,
    ParamError,
    bundle_values,
    normalize,
)
from pmeanfair.paperlab import (
    EXPERIMENTS,
    GENERATORS,
    discretize,
    generate,
    load_manifest,
    make_chores_neg_p_eq1,
    make_chores_neg_p_in_1_2,
    make_chores_tightness,
    make_goods_3x7,
    make_goods_neg_p_frac,
    make_i1,
    make_i2,
    maximin_allocation,
    replicating_allocation,
    run_experiment,
)


class TestGenerators:
    def test_i1_matrix(self):
        inst = make_i1(2)
        assert inst.kind == CHORES
        assert inst.m == 6
        assert np.array_equal(inst.values[0], np.ones(6))
        assert np.array_equal(inst.values[1], [1, 6, 6, 6, 6, 6])

    def test_i2_swaps_rows(self):
        i1, i2 = make_i1(1), make_i2(1)
        assert np.array_equal(i2.values, i1.values[::-1])

    def test_tightness_matrix(self):
        inst = make_chores_tightness(4, 2.0)
        t = (1.0 / 3.0) ** 0.5
        assert inst.values[0, 0] == pytest.approx(1.0 - t)
        assert inst.values[0, 1] == pytest.approx(t)
        assert np.array_equal(inst.values[1:], [[0.0, 1.0]] * 3)

    def test_goods_3x7(self):
        inst = make_goods_3x7(0.05)
        assert inst.kind == GOODS
        assert inst.n == 3 and inst.m == 7
        assert np.allclose(inst.values[0], 1.0 / 7.0)
        assert inst.values[2, 6] == 1.0 and np.all(inst.values[2, :6] == 0.0)

    def test_param_errors_name_the_inequality(self):
        with pytest.raises(ParamError, match="beta integer >= 1"):
            make_i1(0)
        with pytest.raises(ParamError, match="delta > eps"):
            make_goods_neg_p_frac(0.2, 0.1)
        with pytest.raises(ParamError, match=r"1/m - \(m-1\)\*eps > 0"):
            make_chores_neg_p_eq1(4, 0.2)
        with pytest.raises(ParamError, match=r"delta < eps \+"):
            make_chores_neg_p_in_1_2(0.05, 0.9, 1.5)

    def test_generate_dispatch(self):
        inst = generate("I1", beta=2)
        assert np.array_equal(inst.values, make_i1(2).values)
        with pytest.raises(ParamError, match="unknown instance"):
            generate("nope")

    def test_registry_covers_manifest_ids(self):
        for name in (
            "I1",
            "I2",
            "ChoresTightness",
            "GoodsNegPfrac",
            "Goods3x7",
            "DivGoodsCE",
            "DivChoresCE",
            "NotEF3Agents",
        ):
            assert name in GENERATORS


class TestDiscretizer:
    def test_replicates_fractional_utilities(self):
        rng = np.random.default_rng(141)
        inst = normalize(Instance(CHORES, rng.uniform(0.1, 2.0, (2, 3))))
        x = rng.uniform(size=(2, 3))
        x[1] = 1.0 - x[0]
        frac = FractionalAllocation(x)
        z = 10
        pieces = discretize(inst, frac, z)
        assert pieces.m == inst.m * inst.n * z
        repl = replicating_allocation(inst.n, inst.m, z)
        got = bundle_values(pieces, repl)
        want = bundle_values(inst, frac)
        assert np.allclose(got, want, atol=1e-12)

    def test_piece_costs_scale_with_share(self):
        inst = make_i1(1)
        x = FractionalAllocation(np.full((2, 4), 0.5))
        pieces = discretize(inst, x, 2)
        # piece (t=0, k=0, s=0) costs x_00 * c_l0 / z for each agent l
        assert pieces.values[0, 0] == pytest.approx(0.5 * 1.0 / 2.0)
        assert pieces.values[1, 0] == pytest.approx(0.5 * 1.0 / 2.0)

    def test_rejects_bad_z(self):
        inst = make_i1(1)
        x = FractionalAllocation(np.full((2, 4), 0.5))
        with pytest.raises(ParamError):
            discretize(inst, x, 0)


class TestMaximin:
    def test_known_lp_optimum(self):
        # agent 1 values only good 2; the egalitarian optimum equalizes
        # all three utilities at 8/17, with agent 2 taking 7/17 of good 1
        from pmeanfair.paperlab import make_not_ef_3agents

        inst = make_not_ef_3agents()
        alloc, value = maximin_allocation(inst)
        u = bundle_values(normalize(inst), alloc)
        assert value == pytest.approx(8.0 / 17.0, abs=1e-7)
        assert np.allclose(u, 8.0 / 17.0, atol=1e-7)
        assert alloc.x[0, 1] == pytest.approx(8.0 / 17.0, abs=1e-7)
        assert alloc.x[1, 0] == pytest.approx(7.0 / 17.0, abs=1e-7)

    def test_identical_agents_equal_split_value(self):
        inst = Instance(GOODS, [[1.0, 2.0], [1.0, 2.0]])
        alloc, value = maximin_allocation(inst)
        u = bundle_values(normalize(inst), alloc)
        assert value == pytest.approx(0.5, abs=1e-7)
        assert u.min() == pytest.approx(0.5, abs=1e-7)


class TestExperimentHarness:
    def test_manifest_loads_and_covers_registry(self):
        manifest = load_manifest()
        for name in EXPERIMENTS:
            assert name in manifest, name

    def test_unknown_experiment(self):
        with pytest.raises(ParamError):
            run_experiment("nonsense")

    def test_report_structure(self):
        report = run_experiment("chores-tightness")
        assert report.experiment == "chores-tightness"
        assert len(report.rows) > 0
        for row in report.rows:
            assert row.verdict in ("pass", "fail")
        assert report.passed

    def test_deterministic_given_seed(self):
        a = run_experiment("maximin-not-ef", seed=7)
        b = run_experiment("maximin-not-ef", seed=7)
        assert [r.measured for r in a.rows] == [r.measured for r in b.rows]
