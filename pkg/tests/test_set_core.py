"""Set-representation tests: exactness, soundness and id discipline."""

import numpy as np
import pytest
from scipy.optimize import linprog

from certipose.sets import (
    FactorAssignment,
    Interval,
    MatPolyZonotope,
    PolyZonotope,
    index,
    interval_hull,
    linear_map,
    make_box,
    mat_combine,
    mat_mul,
    mink_sum,
    sample,
    split_linear_error,
    stack,
    support_upper,
)


def random_pz(rng, n, max_h=6, max_q=3, max_p=4, id_pool=(1, 2, 3, 4, 5, 6, 7, 8)):
    p = rng.integers(1, max_p + 1)
    ids = np.sort(rng.choice(id_pool, size=p, replace=False))
    h = rng.integers(0, max_h + 1)
    q = rng.integers(0, max_q + 1)
    return PolyZonotope(
        rng.normal(size=n),
        rng.normal(size=(n, h)),
        rng.normal(size=(n, q)),
        rng.integers(0, 3, size=(p, h)),
        ids,
    )


def random_mat_pz(rng, n, m, max_h=3, max_q=2, ids=(1, 2, 3)):
    ids = np.asarray(ids, dtype=np.int64)
    h = rng.integers(0, max_h + 1)
    q = rng.integers(0, max_q + 1)
    return MatPolyZonotope(
        rng.normal(size=(n, m)),
        rng.normal(size=(n, m, h)),
        rng.normal(size=(n, m, q)),
        rng.integers(0, 3, size=(ids.size, h)),
        ids,
    )


def assignment_for(rng, *sets):
    ids = sorted({int(i) for s in sets for i in s.ids})
    alpha = dict(zip(ids, rng.uniform(-1, 1, size=len(ids))))
    return alpha


def in_indep_zonotope(residual, gens, tol=1e-9):
    """LP feasibility: residual = gens @ beta for some beta in [-1,1]^q."""
    r = residual.reshape(-1)
    q = gens.shape[-1]
    if q == 0:
        return bool(np.max(np.abs(r), initial=0.0) <= tol)
    g = gens.reshape(-1, q)
    res = linprog(
        np.zeros(g.shape[1]),
        A_eq=g,
        b_eq=r,
        bounds=[(-1 - tol, 1 + tol)] * g.shape[1],
        method="highs",
    )
    return bool(res.success)


class TestMakeBox:
    def test_uncertain_angle_box(self):
        b = make_box(Interval(np.pi / 6, np.pi / 2), [1])
        np.testing.assert_allclose(b.offset, [np.pi / 3])
        np.testing.assert_allclose(b.dep, [[np.pi / 6]])
        assert b.indep.shape == (1, 0)
        np.testing.assert_array_equal(b.expmat, [[1]])
        np.testing.assert_array_equal(b.ids, [1])

    def test_degenerate_interval_keeps_zero_generator(self):
        b = make_box(Interval(2.5, 2.5), [4])
        np.testing.assert_allclose(b.offset, [2.5])
        np.testing.assert_allclose(b.dep, [[0.0]])

    def test_unit_cube(self):
        b = make_box(Interval(-np.ones(3), np.ones(3)), [1, 2, 3])
        np.testing.assert_allclose(b.offset, np.zeros(3))
        np.testing.assert_allclose(b.dep, np.eye(3))
        np.testing.assert_array_equal(b.expmat, np.eye(3, dtype=int))

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            make_box(Interval(np.zeros(2), np.ones(2)), [1, 2, 3])


class TestMinkSum:
    def test_point_summand_shifts_offset(self):
        rng = np.random.default_rng(0)
        p = random_pz(rng, 3)
        c = PolyZonotope.point([1.0, -2.0, 0.5])
        s = mink_sum(p, c)
        np.testing.assert_allclose(s.offset, p.offset + c.offset)
        np.testing.assert_allclose(s.dep, p.dep)
        np.testing.assert_allclose(s.indep, p.indep)

    def test_disjoint_ids_make_wider_box(self):
        b1 = make_box(Interval(-np.ones(2), np.ones(2)), [1, 2])
        b2 = make_box(Interval(-np.ones(2), np.ones(2)), [3, 4])
        s = mink_sum(b1, b2)
        hull = interval_hull(s)
        np.testing.assert_allclose(hull.lo, [-2, -2])
        np.testing.assert_allclose(hull.hi, [2, 2])

    def test_sampled_membership(self):
        rng = np.random.default_rng(1)
        for _ in range(100):
            n = int(rng.integers(1, 5))
            p1, p2 = random_pz(rng, n), random_pz(rng, n)
            s = mink_sum(p1, p2)
            for _ in range(10):
                alpha = assignment_for(rng, p1, p2)
                fa1 = FactorAssignment(alpha, rng.uniform(-1, 1, p1.n_indep))
                fa2 = FactorAssignment(alpha, rng.uniform(-1, 1, p2.n_indep))
                fs = FactorAssignment(alpha, np.concatenate([fa1.beta, fa2.beta]))
                np.testing.assert_allclose(
                    sample(p1, fa1) + sample(p2, fa2), sample(s, fs), atol=1e-9
                )

    def test_dimension_mismatch(self):
        rng = np.random.default_rng(2)
        with pytest.raises(ValueError):
            mink_sum(random_pz(rng, 2), random_pz(rng, 3))


class TestMatMul:
    def test_identity_map(self):
        rng = np.random.default_rng(3)
        m = random_mat_pz(rng, 3, 2)
        r = mat_mul(MatPolyZonotope.constant(np.eye(3)), m)
        np.testing.assert_allclose(r.offset, m.offset)
        fa = FactorAssignment(assignment_for(rng, m), rng.uniform(-1, 1, m.n_indep))
        fr = FactorAssignment(fa.alpha, np.resize(fa.beta, r.n_indep))
        if m.n_indep == r.n_indep:
            np.testing.assert_allclose(sample(r, fr), sample(m, fa), atol=1e-12)

    def test_affine_special_case_on_box(self):
        b = make_box(Interval(-np.ones(2), np.ones(2)), [1, 2])
        a = np.array([[2.0, 1.0], [0.0, -1.0], [3.0, 0.0]])
        r = mat_mul(MatPolyZonotope.constant(a), b.as_matrix()).as_vector()
        np.testing.assert_allclose(r.dep, a @ b.dep)
        np.testing.assert_allclose(r.offset, a @ b.offset)

    def test_shared_factor_product_membership(self):
        rng = np.random.default_rng(4)
        for _ in range(200):
            m1 = random_mat_pz(rng, 2, 2)
            m2 = random_mat_pz(rng, 2, 2)
            prod = mat_mul(m1, m2)
            for _ in range(5):
                alpha = assignment_for(rng, m1, m2)
                fa1 = FactorAssignment(alpha, rng.uniform(-1, 1, m1.n_indep))
                fa2 = FactorAssignment(alpha, rng.uniform(-1, 1, m2.n_indep))
                truth = sample(m1, fa1) @ sample(m2, fa2)
                fa0 = FactorAssignment(alpha, np.zeros(prod.n_indep))
                residual = truth - sample(prod, fa0)
                assert in_indep_zonotope(residual, prod.indep), "product sample escaped set"

    def test_pure_dependent_product_is_exact(self):
        rng = np.random.default_rng(5)
        for _ in range(50):
            m1 = random_mat_pz(rng, 2, 2, max_q=0)
            m2 = random_mat_pz(rng, 2, 2, max_q=0)
            prod = mat_mul(m1, m2)
            assert prod.n_indep == 0
            alpha = assignment_for(rng, m1, m2)
            fa = FactorAssignment(alpha, np.zeros(0))
            np.testing.assert_allclose(
                sample(m1, fa) @ sample(m2, fa), sample(prod, fa), atol=1e-9
            )

    def test_inner_dimension_mismatch(self):
        rng = np.random.default_rng(6)
        with pytest.raises(ValueError):
            mat_mul(random_mat_pz(rng, 2, 3), random_mat_pz(rng, 2, 3))


class TestSample:
    def test_zero_factors_give_offset(self):
        rng = np.random.default_rng(7)
        p = random_pz(rng, 3)
        fa = FactorAssignment({int(i): 0.0 for i in p.ids}, np.zeros(p.n_indep))
        np.testing.assert_allclose(sample(p, fa), p.offset)

    def test_box_at_plus_one_hits_upper_corner(self):
        iv = Interval([-1.0, 2.0], [3.0, 5.0])
        b = make_box(iv, [1, 2])
        fa = FactorAssignment({1: 1.0, 2: 1.0}, np.zeros(0))
        np.testing.assert_allclose(sample(b, fa), iv.hi)

    def test_missing_id_raises(self):
        b = make_box(Interval([0.0], [1.0]), [3])
        with pytest.raises(KeyError):
            sample(b, FactorAssignment({1: 0.0}, np.zeros(0)))


class TestIntervalHull:
    def test_box_is_exact(self):
        iv = Interval([-2.0, 0.0], [1.0, 4.0])
        hull = interval_hull(make_box(iv, [1, 2]))
        np.testing.assert_allclose(hull.lo, iv.lo)
        np.testing.assert_allclose(hull.hi, iv.hi)

    def test_no_generators(self):
        p = PolyZonotope.point([1.0, 2.0])
        hull = interval_hull(p)
        np.testing.assert_allclose(hull.lo, p.offset)
        np.testing.assert_allclose(hull.hi, p.offset)

    def test_sampled_soundness(self):
        rng = np.random.default_rng(8)
        for _ in range(50):
            p = random_pz(rng, 3)
            hull = interval_hull(p)
            for _ in range(20):
                fa = FactorAssignment.random(rng, p.ids, p.n_indep)
                assert hull.contains(sample(p, fa))


class TestSupportUpper:
    def test_unit_box(self):
        b = make_box(Interval(-np.ones(2), np.ones(2)), [1, 2])
        assert support_upper(b, [1.0, 0.0]) == pytest.approx(1.0)

    def test_singleton(self):
        p = PolyZonotope.point([2.0, -1.0])
        assert support_upper(p, [3.0, 4.0]) == pytest.approx(2.0)

    def test_sampled_soundness(self):
        rng = np.random.default_rng(9)
        p = random_pz(rng, 3)
        for _ in range(20):
            d = rng.normal(size=3)
            bound = support_upper(p, d)
            vals = [
                d @ sample(p, FactorAssignment.random(rng, p.ids, p.n_indep))
                for _ in range(500)
            ]
            assert max(vals) <= bound + 1e-9


class TestSplitLinearError:
    def test_pure_box_splits_into_itself(self):
        b = make_box(Interval(-np.ones(2), np.ones(2)), [1, 2])
        lin, err = split_linear_error(b, [1, 2])
        np.testing.assert_allclose(lin.offset, b.offset)
        np.testing.assert_allclose(lin.dep, b.dep)
        assert err.n_dep == 0 and err.n_indep == 0
        np.testing.assert_allclose(err.offset, np.zeros(2))

    def test_quadratic_column_moves_to_error(self):
        p = PolyZonotope(
            np.zeros(1),
            np.array([[1.0, 2.0]]),
            np.zeros((1, 0)),
            np.array([[1, 2]]),
            np.array([1]),
        )
        lin, err = split_linear_error(p, [1])
        assert lin.n_dep == 1 and err.n_dep == 1
        np.testing.assert_allclose(err.dep, [[2.0]])

    def test_recombination_matches_original(self):
        rng = np.random.default_rng(10)
        for _ in range(100):
            p = random_pz(rng, 3)
            input_ids = p.ids[: max(1, p.ids.size // 2)]
            lin, err = split_linear_error(p, input_ids)
            assert lin.n_dep + err.n_dep == p.n_dep
            back = mink_sum(lin, err)
            for _ in range(10):
                fa = FactorAssignment.random(rng, p.ids, p.n_indep)
                fl = FactorAssignment(fa.alpha, np.zeros(0))
                fe = FactorAssignment(fa.alpha, fa.beta)
                fb = FactorAssignment(fa.alpha, fa.beta)
                np.testing.assert_allclose(
                    sample(lin, fl) + sample(err, fe), sample(p, fa), atol=1e-9
                )
                np.testing.assert_allclose(sample(back, fb), sample(p, fa), atol=1e-9)


class TestIndex:
    def test_full_range_is_identity(self):
        rng = np.random.default_rng(11)
        p = random_pz(rng, 4)
        s = index(p, slice(None))
        np.testing.assert_allclose(s.offset, p.offset)
        np.testing.assert_allclose(s.dep, p.dep)

    def test_matrix_column_gives_vertex_uncertainty(self):
        rng = np.random.default_rng(12)
        m = random_mat_pz(rng, 3, 5)
        v = index(m, 2)
        assert v.dim == 3
        np.testing.assert_allclose(v.offset, m.offset[:, 2])
        np.testing.assert_allclose(v.dep, m.dep[:, 2, :])

    def test_indexed_samples_match(self):
        rng = np.random.default_rng(13)
        m = random_mat_pz(rng, 3, 4)
        v = index(m, 1)
        for _ in range(20):
            fa = FactorAssignment.random(rng, m.ids, m.n_indep)
            np.testing.assert_allclose(sample(v, fa), sample(m, fa)[:, 1], atol=1e-12)

    def test_out_of_range(self):
        rng = np.random.default_rng(14)
        with pytest.raises(IndexError):
            random_mat_pz(rng, 2, 2).col(5)


class TestIdDiscipline:
    def test_outputs_have_strictly_increasing_ids(self):
        rng = np.random.default_rng(15)
        for _ in range(50):
            p1, p2 = random_pz(rng, 2), random_pz(rng, 2)
            for out in (
                mink_sum(p1, p2),
                stack([p1, p2]),
                linear_map(rng.normal(size=(3, 2)), p1),
            ):
                assert np.all(np.diff(out.ids) > 0)
            m1, m2 = random_mat_pz(rng, 2, 2), random_mat_pz(rng, 2, 2, ids=(2, 5, 9))
            prod = mat_mul(m1, m2)
            assert np.all(np.diff(prod.ids) > 0)

    def test_compact_folds_constant_columns(self):
        p = PolyZonotope(
            np.zeros(2),
            np.array([[1.0, 3.0], [2.0, -1.0]]),
            np.zeros((2, 0)),
            np.array([[0, 1], [0, 0]]),
            np.array([1, 2]),
        )
        c = p.compact()
        np.testing.assert_allclose(c.offset, [1.0, 2.0])
        assert c.n_dep == 1


class TestStackAndCombine:
    def test_stack_merges_shared_factor_columns(self):
        b = make_box(Interval(0.0, 1.0), [1])
        s = stack([b, linear_map(np.array([[2.0]]), b)])
        assert s.n_dep == 1
        np.testing.assert_allclose(s.dep, [[0.5], [1.0]])

    def test_mat_combine_places_shared_scalars(self):
        b = make_box(Interval(-1.0, 1.0), [1])
        placement = np.array([[1.0, 0.0], [0.0, 1.0]])
        m = mat_combine((2, 2), np.zeros((2, 2)), [(placement, b)])
        assert m.n_dep == 1
        np.testing.assert_allclose(m.dep[:, :, 0], placement)
        fa = FactorAssignment({1: 0.5}, np.zeros(0))
        np.testing.assert_allclose(sample(m, fa), 0.5 * placement)

    def test_json_round_trip(self):
        rng = np.random.default_rng(16)
        p = random_pz(rng, 3)
        q = PolyZonotope.from_json_dict(p.to_json_dict())
        np.testing.assert_array_equal(p.offset, q.offset)
        np.testing.assert_array_equal(p.dep, q.dep)
        np.testing.assert_array_equal(p.indep, q.indep)
        np.testing.assert_array_equal(p.expmat, q.expmat)
        np.testing.assert_array_equal(p.ids, q.ids)
