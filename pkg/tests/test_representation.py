import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from eufactor import (
    EURepresentation,
    JointBelief,
    Plan,
    ProductBelief,
    UtilityFunction,
    Verdict,
    default_space,
    evaluate_plan,
    evaluate_prospect,
    evaluate_prospect_nested,
    evaluate_representation,
    factorize,
    gen_agent,
    identity_utility,
    induced_preference,
    make_plan,
    make_prospect,
    normalize_representation,
    product_to_joint,
    uniform_belief,
)
from oracles import brute_value_2d, brute_value_3d, brute_value_3d_product, brute_max_minor


class TestEvaluateProspect:
    def test_symmetric_half(self):
        space = default_space(2, 2)
        x = make_prospect(space, [[1, 0], [0, 1]])
        b = ProductBelief([0.5, 0.5], [0.5, 0.5])
        assert evaluate_prospect(x, identity_utility(0, 1), b) == pytest.approx(0.5)

    def test_constant_prospect(self):
        space = default_space(3, 2)
        c = 2.5
        x = make_prospect(space, np.full((3, 2), c))
        u = UtilityFunction(((0.0, 1.0), (2.0, 2.0), (5.0, 7.0)))
        b = ProductBelief([0.2, 0.3, 0.5], [0.6, 0.4])
        assert evaluate_prospect(x, u, b) == pytest.approx(u(c))

    def test_hand_derived_sum(self):
        # Independent brute-force summation over the four cells gives 2.8.
        space = default_space(2, 2)
        x = make_prospect(space, [[1, 2], [3, 4]])
        b = ProductBelief([0.3, 0.7], [0.6, 0.4])
        expected = brute_value_2d([[1, 2], [3, 4]], lambda v: v, [0.3, 0.7], [0.6, 0.4])
        assert expected == pytest.approx(2.8)
        assert evaluate_prospect(x, identity_utility(0, 4), b) == pytest.approx(expected)

    def test_shape_mismatch(self):
        x = make_prospect(default_space(2, 2), [[1, 2], [3, 4]])
        with pytest.raises(ValueError):
            evaluate_prospect(x, identity_utility(), ProductBelief([0.5, 0.5], [0.3, 0.3, 0.4]))


@st.composite
def prospect_setup(draw):
    n_s = draw(st.integers(2, 4))
    n_t = draw(st.integers(2, 4))
    values = draw(
        st.lists(
            st.lists(st.floats(-10, 10), min_size=n_t, max_size=n_t),
            min_size=n_s,
            max_size=n_s,
        )
    )
    n_k = draw(st.integers(2, 5))
    ys = np.cumsum(draw(st.lists(st.floats(0.05, 2.0), min_size=n_k, max_size=n_k)))
    xs = np.linspace(-10, 10, n_k)
    u = UtilityFunction(tuple(zip(xs.tolist(), ys.tolist())))
    p_raw = np.asarray(draw(st.lists(st.floats(0.05, 1.0), min_size=n_s, max_size=n_s)))
    q_raw = np.asarray(draw(st.lists(st.floats(0.05, 1.0), min_size=n_t, max_size=n_t)))
    b = ProductBelief(p_raw / p_raw.sum(), q_raw / q_raw.sum())
    return make_prospect(default_space(n_s, n_t), values), u, b


class TestRegroupingIdentity:
    @settings(max_examples=300, deadline=None)
    @given(prospect_setup())
    def test_nested_equals_flat(self, setup):
        x, u, b = setup
        flat = evaluate_prospect(x, u, b)
        assert abs(flat - evaluate_prospect_nested(x, u, b, "s")) <= 1e-12
        assert abs(flat - evaluate_prospect_nested(x, u, b, "t")) <= 1e-12

    def test_hand_derived_through_both_nestings(self):
        x = make_prospect(default_space(2, 2), [[1, 2], [3, 4]])
        b = ProductBelief([0.3, 0.7], [0.6, 0.4])
        u = identity_utility(0, 4)
        assert evaluate_prospect_nested(x, u, b, "s") == pytest.approx(2.8)
        assert evaluate_prospect_nested(x, u, b, "t") == pytest.approx(2.8)

    def test_unknown_axis(self):
        x = make_prospect(default_space(2, 2), [[1, 2], [3, 4]])
        with pytest.raises(ValueError):
            evaluate_prospect_nested(x, identity_utility(), ProductBelief([0.5, 0.5], [0.5, 0.5]), "i")


class TestEvaluatePlan:
    def test_constant_plan_doubles(self):
        space = default_space(2, 2, 2)
        c = 1.75
        plan = make_plan(space, np.full((2, 2, 2), c))
        us = (identity_utility(0, 2), identity_utility(0, 2))
        value = evaluate_plan(plan, us, uniform_belief(space))
        assert value == pytest.approx(2 * c)

    def test_row_index_plan(self):
        # Plan paying the row number in every cell; brute-force oracle sums
        # the eight belief-weighted terms to 3.
        space = default_space(2, 2, 2)
        cube = np.empty((2, 2, 2))
        for s in range(2):
            cube[s, :, :] = s + 1
        pi = [[0.4, 0.1], [0.1, 0.4]]
        us = (identity_utility(0, 2), identity_utility(0, 2))
        expected = brute_value_3d(cube.tolist(), [lambda v: v, lambda v: v], pi)
        assert expected == pytest.approx(3.0)
        value = evaluate_plan(make_plan(space, cube), us, JointBelief(space, pi))
        assert value == pytest.approx(expected)

    def test_product_and_joint_agree(self):
        rng = np.random.default_rng(0)
        space = default_space(2, 3, 2)
        us = (identity_utility(0, 1), UtilityFunction(((0.0, 0.0), (1.0, 3.0))))
        p = rng.dirichlet(np.ones(2))
        q = rng.dirichlet(np.ones(3))
        pb = ProductBelief(p, q)
        jb = product_to_joint(pb, space)
        for _ in range(25):
            plan = make_plan(space, rng.normal(size=(2, 3, 2)))
            assert abs(evaluate_plan(plan, us, pb) - evaluate_plan(plan, us, jb)) <= 1e-12

    def test_utility_count_mismatch(self):
        space = default_space(2, 2, 2)
        plan = make_plan(space, np.zeros((2, 2, 2)))
        with pytest.raises(ValueError):
            evaluate_plan(plan, (identity_utility(),), uniform_belief(space))

    def test_brute_force_cross_check(self):
        rng = np.random.default_rng(3)
        space = default_space(3, 2, 3)
        us = tuple(
            UtilityFunction(((0.0, 0.0), (1.0, float(g)), (2.0, float(g) + 1.0)))
            for g in rng.uniform(0.5, 2.0, 3)
        )
        pi = rng.dirichlet(np.ones(6)).reshape(3, 2)
        jb = JointBelief(space, pi)
        p, q = rng.dirichlet(np.ones(3)), rng.dirichlet(np.ones(2))
        pb = ProductBelief(p, q)
        for _ in range(10):
            cube = rng.uniform(-1, 3, size=(3, 2, 3))
            plan = make_plan(space, cube)
            assert evaluate_plan(plan, us, jb) == pytest.approx(
                brute_value_3d(cube.tolist(), us, pi.tolist())
            )
            assert evaluate_plan(plan, us, pb) == pytest.approx(
                brute_value_3d_product(cube.tolist(), us, p.tolist(), q.tolist())
            )


class TestFactorize:
    def test_exact_product_recovered(self):
        space = default_space(2, 2)
        jb = product_to_joint(ProductBelief([0.3, 0.7], [0.6, 0.4]), space)
        result = factorize(jb)
        assert result.independent
        assert np.max(np.abs(result.p - [0.3, 0.7])) <= 1e-12
        assert np.max(np.abs(result.q - [0.6, 0.4])) <= 1e-12

    def test_correlated_minor(self):
        jb = JointBelief(default_space(2, 2), [[0.4, 0.1], [0.1, 0.4]])
        result = factorize(jb)
        assert not result.independent
        assert result.max_minor == pytest.approx(0.15)
        assert result.witness == (0, 1, 0, 1)

    def test_uniform_three_by_three(self):
        result = factorize(uniform_belief(default_space(3, 3)))
        assert result.independent
        assert np.allclose(result.p, 1 / 3)
        assert np.allclose(result.q, 1 / 3)

    def test_zero_row_mass_rejected(self):
        jb = JointBelief(default_space(2, 2), [[0.5, 0.5], [0.0, 0.0]])
        with pytest.raises(ValueError, match="zero mass"):
            factorize(jb)

    def test_reference_row_never_changes_outcome(self):
        rng = np.random.default_rng(5)
        for _ in range(30):
            n_s, n_t = rng.integers(2, 5, size=2)
            pi = rng.dirichlet(np.ones(n_s * n_t)).reshape(n_s, n_t)
            jb = JointBelief(default_space(int(n_s), int(n_t)), pi)
            outcomes = {factorize(jb, s0=k).independent for k in range(int(n_s))}
            assert len(outcomes) == 1

    def test_marginal_consistency(self):
        # p equals the row-sum marginal exactly, for either outcome.
        for pi in ([[0.4, 0.1], [0.1, 0.4]], [[0.18, 0.12], [0.42, 0.28]]):
            jb = JointBelief(default_space(2, 2), pi)
            result = factorize(jb)
            assert np.array_equal(result.p, jb.pi.sum(axis=1))

    def test_row_normalization_criterion(self):
        # Factoring succeeds exactly when all row-normalized rows coincide.
        rng = np.random.default_rng(9)
        for _ in range(20):
            p = rng.dirichlet(np.ones(3))
            q = rng.dirichlet(np.ones(3))
            jb = product_to_joint(ProductBelief(p, q), default_space(3, 3))
            rows = jb.pi / jb.pi.sum(axis=1, keepdims=True)
            assert np.all(np.abs(rows - rows[0]) <= 1e-9) == factorize(jb).independent
        jb = JointBelief(default_space(2, 2), [[0.4, 0.1], [0.1, 0.4]])
        rows = jb.pi / jb.pi.sum(axis=1, keepdims=True)
        assert not np.all(np.abs(rows - rows[0]) <= 1e-9)

    def test_max_minor_matches_brute_force(self):
        rng = np.random.default_rng(11)
        for _ in range(20):
            pi = rng.dirichlet(np.ones(12)).reshape(3, 4)
            jb = JointBelief(default_space(3, 4), pi)
            assert factorize(jb).max_minor == pytest.approx(brute_max_minor(pi.tolist()))


class TestInducedPreference:
    def test_strict_verdict_from_values(self):
        space = default_space(2, 2)
        rep = EURepresentation(
            "product2d", space, (identity_utility(0, 4),), ProductBelief([0.5, 0.5], [0.5, 0.5])
        )
        hi = make_prospect(space, [[4, 4], [4, 4]])
        lo = make_prospect(space, [[0, 0], [0, 0]])
        data = induced_preference(rep, [hi, lo])
        assert data.comparisons == ((0, 1, Verdict.A_BETTER),)

    def test_identical_prospects_indifferent(self):
        space = default_space(2, 2)
        rep = EURepresentation(
            "product2d", space, (identity_utility(0, 4),), ProductBelief([0.5, 0.5], [0.5, 0.5])
        )
        x = make_prospect(space, [[1, 2], [3, 4]])
        y = make_prospect(space, [[1, 2], [3, 4]])
        data = induced_preference(rep, [x, y])
        assert data.comparisons == ((0, 1, Verdict.INDIFFERENT),)

    def test_space_mismatch(self):
        rep = EURepresentation(
            "product2d",
            default_space(2, 2),
            (identity_utility(0, 4),),
            ProductBelief([0.5, 0.5], [0.5, 0.5]),
        )
        with pytest.raises(ValueError):
            induced_preference(rep, [make_prospect(default_space(2, 3), np.zeros((2, 3)))])


class TestNormalization:
    def test_anchors_to_unit_interval(self):
        space = default_space(2, 2)
        rep = EURepresentation(
            "product2d",
            space,
            (UtilityFunction(((0.0, 5.0), (1.0, 9.0))),),
            ProductBelief([0.5, 0.5], [0.5, 0.5]),
        )
        normalized = normalize_representation(rep)
        assert normalized.utility.knots == ((0.0, 0.0), (1.0, 1.0))

    def test_idempotent(self):
        for model, seed in (("product2d", 1), ("joint2d", 2), ("joint3d", 3), ("product3d", 4)):
            rep, _ = gen_agent(model, seed=seed, universe_size=5)
            once = normalize_representation(rep)
            twice = normalize_representation(once)
            assert once == twice

    def test_three_axis_common_multiplier(self):
        rep, _ = gen_agent("joint3d", seed=5, universe_size=5)
        normalized = normalize_representation(rep)
        mins = [u.knots[0][1] for u in normalized.utilities]
        ranges = [u.knots[-1][1] - u.knots[0][1] for u in normalized.utilities]
        assert all(m == 0.0 for m in mins)
        assert sum(ranges) == pytest.approx(1.0, abs=1e-12)
        # the same multiplier must relate every pair of old and new ranges
        old = [u.knots[-1][1] - u.knots[0][1] for u in rep.utilities]
        scales = [n / o for n, o in zip(ranges, old)]
        assert max(scales) - min(scales) <= 1e-12

    def test_verdicts_preserved(self):
        rng = np.random.default_rng(13)
        rep, _ = gen_agent("product2d", seed=6, universe_size=5)
        space = rep.space
        universe = [
            make_prospect(space, rng.choice([0.0, 1.0, 2.0, 3.0], size=(3, 3)))
            for _ in range(40)
        ]
        before = induced_preference(rep, universe).comparisons
        after = induced_preference(normalize_representation(rep), universe).comparisons
        assert before == after

    def test_affine_transforms_preserve_verdicts(self):
        rng = np.random.default_rng(17)
        rep, _ = gen_agent("product2d", seed=7, universe_size=5)
        universe = [
            make_prospect(rep.space, rng.choice([0.0, 1.0, 2.0, 3.0], size=(3, 3)))
            for _ in range(30)
        ]
        base = induced_preference(rep, universe).comparisons
        for a in (0.5, 2.0, 10.0):
            for b in (-3.0, 0.0, 7.0):
                scaled = EURepresentation(
                    rep.kind, rep.space, (rep.utility.affine(a, b),), rep.belief
                )
                assert induced_preference(scaled, universe).comparisons == base


class TestEvaluateRepresentation:
    def test_kind_dispatch(self):
        space = default_space(2, 2)
        jb = JointBelief(space, [[0.4, 0.1], [0.1, 0.4]])
        rep = EURepresentation("joint2d", space, (identity_utility(0, 1),), jb)
        x = make_prospect(space, [[1, 0], [0, 1]])
        from oracles import brute_value_joint_2d

        assert evaluate_representation(rep, x) == pytest.approx(
            brute_value_joint_2d([[1, 0], [0, 1]], lambda v: v, [[0.4, 0.1], [0.1, 0.4]])
        )

    def test_plan_for_2d_rep_rejected(self):
        space = default_space(2, 2)
        rep = EURepresentation(
            "product2d", space, (identity_utility(),), ProductBelief([0.5, 0.5], [0.5, 0.5])
        )
        plan = make_plan(default_space(2, 2, 2), np.zeros((2, 2, 2)))
        with pytest.raises(ValueError):
            evaluate_representation(rep, plan)
