"""Linear enclosure tests: reference coefficients and soundness."""

import numpy as np
import pytest

from certipose.enclosure import FUNCTIONS, enclose_elementwise, fit_linear
from certipose.errors import DomainCrossesPole
from certipose.sets import (
    FactorAssignment,
    Interval,
    interval_hull,
    make_box,
    sample,
    stack,
)

DOMAIN = Interval(np.pi / 6, np.pi / 2)


class TestFitLinear:
    def test_sin_reference_coefficients(self):
        enc = fit_linear("sin", DOMAIN)
        assert enc.a == pytest.approx(0.4851, abs=0.02)
        assert enc.b == pytest.approx(0.2981, abs=0.02)
        assert enc.d == pytest.approx(0.0602, abs=0.02)

    def test_cos_reference_coefficients(self):
        enc = fit_linear("cos", DOMAIN)
        assert enc.a == pytest.approx(-0.8402, abs=0.02)
        assert enc.b == pytest.approx(1.3432, abs=0.02)
        assert enc.d == pytest.approx(0.0374, abs=0.02)

    @pytest.mark.parametrize("fname", ["sin", "cos", "recip"])
    def test_soundness_on_dense_grid(self, fname):
        lo, hi = (0.5, 3.0) if fname == "recip" else (float(DOMAIN.lo[0]), float(DOMAIN.hi[0]))
        enc = fit_linear(fname, Interval(lo, hi))
        f = FUNCTIONS[fname][0]
        xs = np.linspace(lo, hi, 100_000)
        assert np.max(np.abs(f(xs) - (enc.a * xs + enc.b))) <= enc.d

    @pytest.mark.parametrize("fname,c", [("sin", 0.7), ("cos", -1.2), ("recip", 2.0)])
    def test_degenerate_domain(self, fname, c):
        enc = fit_linear(fname, Interval(c, c))
        assert np.isfinite(enc.a)
        assert enc.b + enc.a * c == pytest.approx(FUNCTIONS[fname][0](c), abs=1e-12)
        assert enc.d == 0.0

    def test_recip_pole_raises(self):
        with pytest.raises(DomainCrossesPole):
            fit_linear("recip", Interval(-1.0, 2.0))

    def test_wide_domain_spanning_extrema_is_sound(self):
        # more than one monotone piece: stationary-point enumeration must cover
        enc = fit_linear("sin", Interval(-1.0, 7.0))
        xs = np.linspace(-1.0, 7.0, 200_000)
        assert np.max(np.abs(np.sin(xs) - (enc.a * xs + enc.b))) <= enc.d


class TestEncloseElementwise:
    def test_joint_sin_cos_structure(self):
        angle = make_box(DOMAIN, [1])
        joint = stack([enclose_elementwise("sin", angle), enclose_elementwise("cos", angle)])
        np.testing.assert_allclose(joint.offset, [0.8061, 0.4634], atol=0.02)
        assert joint.n_dep == 1
        np.testing.assert_allclose(joint.dep[:, 0], [0.2540, -0.4399], atol=0.02)
        diag = np.sort(np.abs(joint.indep).max(axis=0))
        np.testing.assert_allclose(diag, [0.0374, 0.0602], atol=0.02)
        # off-diagonal independent entries are zero: errors are per-function
        assert np.count_nonzero(joint.indep) == 2

    def test_recip_on_singleton(self):
        p = make_box(Interval(2.0, 2.0), [1])
        out = enclose_elementwise("recip", p)
        np.testing.assert_allclose(out.offset, [0.5], atol=1e-12)
        hull = interval_hull(out)
        np.testing.assert_allclose(hull.lo, [0.5], atol=1e-12)
        np.testing.assert_allclose(hull.hi, [0.5], atol=1e-12)

    def test_dependency_preserved_structurally(self):
        angle = make_box(Interval(np.array([0.1, -0.4]), np.array([0.9, 0.2])), [3, 7])
        out = enclose_elementwise("sin", angle)
        ratio = out.dep[out.dep != 0] / angle.dep[angle.dep != 0]
        np.testing.assert_allclose(out.dep, np.diag(ratio) @ angle.dep)
        np.testing.assert_array_equal(out.expmat, angle.expmat)
        np.testing.assert_array_equal(out.ids, angle.ids)

    @pytest.mark.parametrize("fname,lo,hi", [("sin", -0.8, 0.9), ("cos", 0.2, 2.4), ("recip", 0.3, 4.0)])
    def test_pointwise_soundness(self, fname, lo, hi):
        rng = np.random.default_rng(42)
        p = make_box(Interval(lo, hi), [1])
        out = enclose_elementwise(fname, p)
        f = FUNCTIONS[fname][0]
        hull_lo, hull_hi = None, None
        for x in rng.uniform(lo, hi, size=10_000):
            alpha = (x - p.offset[0]) / p.dep[0, 0]
            lin = out.offset[0] + out.dep[0, 0] * alpha
            d = np.abs(out.indep).sum()
            assert lin - d <= f(x) <= lin + d

    def test_sample_error_bounded_by_fit_radius(self):
        rng = np.random.default_rng(7)
        angle = make_box(DOMAIN, [1])
        enc = fit_linear("sin", DOMAIN)
        out = enclose_elementwise("sin", angle)
        assert enc.d == pytest.approx(0.0602, abs=0.02)
        for _ in range(100):
            a = rng.uniform(-1, 1)
            fa = FactorAssignment({1: a}, np.zeros(out.n_indep))
            x = sample(angle, FactorAssignment({1: a}, np.zeros(0)))[0]
            assert abs(sample(out, fa)[0] - np.sin(x)) <= enc.d
