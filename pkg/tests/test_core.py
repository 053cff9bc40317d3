import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from eufactor import (
    JointBelief,
    Plan,
    ProductBelief,
    Prospect,
    StateSpace,
    UtilityFunction,
    default_space,
    identity_utility,
    make_plan,
    make_prospect,
    marginal_beliefs,
    product_to_joint,
    uniform_belief,
)


class TestStateSpace:
    def test_minimum_cardinalities(self):
        with pytest.raises(ValueError):
            StateSpace(("s1",), ("t1", "t2"))
        with pytest.raises(ValueError):
            StateSpace(("s1", "s2"), ("t1",))
        with pytest.raises(ValueError):
            StateSpace(("s1", "s2"), ("t1", "t2"), ("i1",))

    def test_unique_labels(self):
        with pytest.raises(ValueError):
            StateSpace(("s1", "s1"), ("t1", "t2"))

    def test_third_axis_optional(self):
        assert not default_space(2, 2).is_3d
        assert default_space(2, 2, 2).is_3d

    def test_roundtrip(self):
        space = default_space(3, 2, 4)
        assert StateSpace.from_dict(space.to_dict()) == space


class TestMakeProspect:
    def test_crossed_matrix(self):
        space = default_space(2, 2)
        x = make_prospect(space, [[1.0, 0.0], [0.0, 1.0]])
        assert x.values.tolist() == [[1.0, 0.0], [0.0, 1.0]]

    def test_constant_zero(self):
        x = make_prospect(default_space(2, 2), [[0, 0], [0, 0]])
        assert np.all(x.values == 0.0)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            make_prospect(default_space(2, 3), [[1, 2], [3, 4]])

    def test_non_finite_entry(self):
        with pytest.raises(ValueError):
            make_prospect(default_space(2, 2), [[1, float("nan")], [0, 0]])
        with pytest.raises(ValueError):
            make_prospect(default_space(2, 2), [[1, float("inf")], [0, 0]])

    def test_values_read_only(self):
        x = make_prospect(default_space(2, 2), [[1, 2], [3, 4]])
        with pytest.raises(ValueError):
            x.values[0, 0] = 9.0


class TestPlan:
    def test_requires_third_axis(self):
        with pytest.raises(ValueError):
            make_plan(default_space(2, 2), [[[0, 0], [0, 0]], [[0, 0], [0, 0]]])

    def test_shape_checked(self):
        space = default_space(2, 2, 2)
        with pytest.raises(ValueError):
            make_plan(space, [[[0, 0], [0, 0]]])
        plan = make_plan(space, np.zeros((2, 2, 2)))
        assert plan.values.shape == (2, 2, 2)


class TestUniformBelief:
    @pytest.mark.parametrize("n_s,n_t", [(2, 2), (2, 3), (3, 3)])
    def test_uniform(self, n_s, n_t):
        b = uniform_belief(default_space(n_s, n_t))
        assert np.allclose(b.pi, 1.0 / (n_s * n_t))
        assert abs(b.pi.sum() - 1.0) <= 1e-12


class TestBeliefValidation:
    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            JointBelief(default_space(2, 2), [[0.6, -0.1], [0.3, 0.2]])
        with pytest.raises(ValueError):
            ProductBelief([1.2, -0.2], [0.5, 0.5])

    def test_mass_off_rejected(self):
        with pytest.raises(ValueError):
            JointBelief(default_space(2, 2), [[0.3, 0.3], [0.3, 0.3]])
        with pytest.raises(ValueError):
            ProductBelief([0.5, 0.4], [0.5, 0.5])

    def test_strict_positivity_flag(self):
        assert JointBelief(default_space(2, 2), [[0.25, 0.25], [0.25, 0.25]]).strictly_positive
        assert not JointBelief(default_space(2, 2), [[0.5, 0.5], [0.0, 0.0]]).strictly_positive
        assert ProductBelief([0.5, 0.5], [0.9, 0.1]).strictly_positive
        assert not ProductBelief([1.0, 0.0], [0.5, 0.5]).strictly_positive

    def test_serialization_bit_exact(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            w = rng.dirichlet(np.ones(6)).reshape(2, 3)
            b = JointBelief(default_space(2, 3), w)
            again = JointBelief.from_dict(json.loads(json.dumps(b.to_dict())))
            assert np.array_equal(again.pi, b.pi)
            p, q = rng.dirichlet(np.ones(3)), rng.dirichlet(np.ones(4))
            pb = ProductBelief(p, q)
            pb2 = ProductBelief.from_dict(json.loads(json.dumps(pb.to_dict())))
            assert np.array_equal(pb2.p, pb.p) and np.array_equal(pb2.q, pb.q)


class TestProductJointConversion:
    def test_outer_product(self):
        space = default_space(2, 2)
        jb = product_to_joint(ProductBelief([0.3, 0.7], [0.6, 0.4]), space)
        assert np.allclose(jb.pi, [[0.18, 0.12], [0.42, 0.28]])

    def test_dimension_check(self):
        with pytest.raises(ValueError):
            product_to_joint(ProductBelief([0.3, 0.7], [0.6, 0.4]), default_space(3, 2))

    def test_marginals(self):
        jb = JointBelief(default_space(2, 2), [[0.4, 0.1], [0.1, 0.4]])
        pb = marginal_beliefs(jb)
        assert np.allclose(pb.p, [0.5, 0.5])
        assert np.allclose(pb.q, [0.5, 0.5])


@st.composite
def increasing_knots(draw):
    n = draw(st.integers(min_value=2, max_value=6))
    xs = draw(
        st.lists(
            st.floats(min_value=-50, max_value=50, allow_nan=False),
            min_size=n,
            max_size=n,
            unique=True,
        )
    )
    xs = sorted(xs)
    gaps = draw(
        st.lists(
            st.floats(min_value=1e-3, max_value=10.0),
            min_size=n - 1,
            max_size=n - 1,
        )
    )
    ys = [0.0]
    for g in gaps:
        ys.append(ys[-1] + g)
    # reject degenerate x spacing that would make slopes blow up
    if min(b - a for a, b in zip(xs, xs[1:])) < 1e-6:
        xs = [k * 1.0 for k in range(n)]
    return UtilityFunction(tuple(zip(xs, ys)))


class TestUtilityFunction:
    def test_needs_two_knots(self):
        with pytest.raises(ValueError):
            UtilityFunction(((0.0, 0.0),))

    def test_strictly_increasing_required(self):
        with pytest.raises(ValueError):
            UtilityFunction(((0, 0), (0, 1)))
        with pytest.raises(ValueError):
            UtilityFunction(((0, 1), (1, 1)))
        with pytest.raises(ValueError):
            UtilityFunction(((0, 2), (1, 1)))

    def test_interpolation_and_extrapolation(self):
        u = UtilityFunction(((0.0, 0.0), (1.0, 2.0), (3.0, 3.0)))
        assert u(0.5) == pytest.approx(1.0)
        assert u(2.0) == pytest.approx(2.5)
        assert u(-1.0) == pytest.approx(-2.0)  # first segment slope 2
        assert u(5.0) == pytest.approx(4.0)  # last segment slope 0.5

    def test_identity(self):
        u = identity_utility(0.0, 4.0)
        for x in (-3.0, 0.0, 1.7, 4.0, 9.0):
            assert u(x) == pytest.approx(x)

    @settings(max_examples=200, deadline=None)
    @given(increasing_knots(), st.data())
    def test_strict_monotonicity(self, u, data):
        xs = [k[0] for k in u.knots]
        probes = sorted(
            xs
            + [(a + b) / 2 for a, b in zip(xs, xs[1:])]
            + [xs[0] - 1.0, xs[-1] + 1.0]
        )
        values = [u(x) for x in probes]
        for (x1, v1), (x2, v2) in zip(zip(probes, values), zip(probes[1:], values[1:])):
            if x1 < x2:
                assert v1 < v2

    def test_affine_requires_positive_multiplier(self):
        u = identity_utility()
        with pytest.raises(ValueError):
            u.affine(-1.0, 0.0)
        v = u.affine(2.0, 1.0)
        assert v(0.5) == pytest.approx(2.0)

    def test_roundtrip(self):
        u = UtilityFunction(((0.0, 0.1), (1.5, 0.7), (2.0, 1.3)))
        assert UtilityFunction.from_dict(json.loads(json.dumps(u.to_dict()))) == u


class TestProspectSerialization:
    def test_roundtrip(self):
        space = default_space(2, 3)
        x = make_prospect(space, [[1, 2, 3], [4, 5, 6]])
        again = Prospect.from_dict(json.loads(json.dumps(x.to_dict())))
        assert again == x

    def test_plan_roundtrip(self):
        space = default_space(2, 2, 3)
        x = make_plan(space, np.arange(12, dtype=float).reshape(2, 2, 3))
        again = Plan.from_dict(json.loads(json.dumps(x.to_dict())))
        assert again == x
