import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.interpolate import make_interp_spline

from hypma import bspline


def sorted_abscissae(min_size=2, max_size=30):
    return st.lists(
        st.floats(-50, 50, allow_nan=False, allow_infinity=False), min_size=min_size, max_size=max_size, unique=True
    ).map(sorted).filter(lambda t: np.min(np.diff(t)) > 1e-3)


class TestBuildKnots:
    def test_worked_example(self):
        knots = bspline.build_knots([1, 2, 4, 5, 7, 10], 3)
        assert knots.tolist() == [1, 1, 1, 3, 4.5, 6, 10, 10, 10]

    def test_two_points_linear(self):
        assert bspline.build_knots([0, 1], 2).tolist() == [0, 0, 1, 1]

    def test_linear_knots_are_the_points(self):
        assert bspline.build_knots([0, 1, 2, 3, 4], 2).tolist() == [0, 0, 1, 2, 3, 4, 4]

    def test_insufficient_data(self):
        with pytest.raises(ValueError, match="insufficient data for degree"):
            bspline.build_knots([0, 1, 2], 4)

    def test_unsorted(self):
        with pytest.raises(ValueError, match="unsorted abscissae"):
            bspline.build_knots([0, 2, 1, 3], 2)

    @given(sorted_abscissae(min_size=6), st.integers(2, 6))
    def test_schoenberg_whitney(self, t, order):
        t = np.array(t)
        knots = bspline.build_knots(t, order)
        assert knots.size == t.size + order
        assert np.all(np.diff(knots) >= 0)
        # Each basis function's support contains its data point.
        for k in range(t.size):
            assert knots[k] <= t[k] <= knots[k + order]
            if 0 < k < t.size - 1:
                assert knots[k] < t[k] < knots[k + order]


class TestBasis:
    def test_piecewise_constant_indicator(self):
        assert bspline.basis(1, 0, 1.5, [0, 1, 2, 3]) == 1.0
        assert bspline.basis(1, 0, 2.0, [0, 1, 2, 3]) == 0.0

    def test_hat(self):
        knots = [0, 1, 2]
        assert bspline.basis(0, 1, 1.0, knots) == pytest.approx(1.0)
        assert bspline.basis(0, 1, 0.5, knots) == pytest.approx(0.5)

    def test_index_out_of_range(self):
        with pytest.raises(IndexError, match="basis index out of range"):
            bspline.basis(3, 2, 0.5, [0, 0, 0, 1, 1, 1])

    def test_zero_width_spans(self):
        # Clamped quadratic on [0, 1]: Bernstein polynomials.
        knots = [0, 0, 0, 1, 1, 1]
        x = 0.3
        vals = [bspline.basis(k, 2, x, knots) for k in range(3)]
        assert vals == pytest.approx([(1 - x) ** 2, 2 * x * (1 - x), x**2])

    def test_partition_of_unity(self):
        rng = np.random.default_rng(7)
        t = np.sort(rng.uniform(0, 10, 20))
        for order in (2, 3, 4, 5, 6):
            knots = bspline.build_knots(t, order)
            xs = rng.uniform(knots[0], knots[-1], 1000)
            n = order - 1
            sums = np.array([sum(bspline.basis(k, n, x, knots) for k in range(t.size)) for x in xs[:200]])
            assert np.max(np.abs(sums - 1)) < 1e-12
            # The vectorised evaluator agrees on all 1000 points.
            spl = bspline.Spline(order, knots, np.ones(t.size))
            assert np.max(np.abs(spl(xs) - 1)) < 1e-12

    def test_local_support(self):
        t = np.linspace(0, 1, 9)
        knots = bspline.build_knots(t, 4)
        xs = np.linspace(-0.5, 1.5, 401)
        for k in range(t.size):
            outside = (xs < knots[k]) | (xs >= knots[k + 4])
            assert all(bspline.basis(k, 3, x, knots) == 0.0 for x in xs[outside])

    def test_vectorised_matches_recursion(self):
        rng = np.random.default_rng(3)
        t = np.sort(rng.uniform(0, 1, 12))
        knots = bspline.build_knots(t, 5)
        c = rng.normal(size=t.size)
        spl = bspline.Spline(5, knots, c)
        xs = rng.uniform(t[0], t[-1], 50)
        direct = [sum(c[k] * bspline.basis(k, 4, x, knots) for k in range(t.size)) for x in xs]
        np.testing.assert_allclose(spl(xs), direct, rtol=0, atol=1e-13)


class TestFit:
    def test_constant(self):
        t = np.array([0.0, 0.3, 0.5, 1.2, 2.0, 2.1])
        spl = bspline.fit(t, np.full(t.size, 5.0), 4)
        np.testing.assert_allclose(spl.coefficients, 5.0, rtol=1e-13)

    @pytest.mark.parametrize("order", [2, 3, 4, 5, 6])
    def test_polynomial_reproduction(self, order):
        rng = np.random.default_rng(order)
        t = np.sort(rng.uniform(-1, 2, 15))
        poly = rng.normal(size=order)  # degree order - 1
        spl = bspline.fit(t, np.polyval(poly, t), order)
        xs = rng.uniform(t[0], t[-1], 20)
        assert np.max(np.abs(spl(xs) - np.polyval(poly, xs))) < 1e-10

    def test_matches_scipy_with_same_knots(self):
        # Independent implementation given the identical knot vector.
        rng = np.random.default_rng(11)
        t = np.sort(rng.uniform(0, 4, 25))
        g = np.sin(t) + t**2
        xs = np.linspace(t[0], t[-1], 301)
        for order in (2, 3, 4, 5, 6):
            ours = bspline.fit(t, g, order)
            ref = make_interp_spline(t, g, k=order - 1, t=ours.knots)
            np.testing.assert_allclose(ours(xs), ref(xs), rtol=0, atol=1e-11)
            np.testing.assert_allclose(ours.coefficients, ref.c, rtol=0, atol=1e-10)

    def test_vector_valued(self):
        t = np.linspace(0, 1, 11)
        g = np.column_stack([np.sin(t), np.cos(t), t**3])
        spl = bspline.fit(t, g, 4)
        x = np.array([0.05, 0.55])
        out = spl(x)
        assert out.shape == (2, 3)
        for col in range(3):
            np.testing.assert_allclose(out[:, col], bspline.fit(t, g[:, col], 4)(x), atol=1e-14)

    def test_order_lowered_for_few_points(self):
        spl = bspline.fit([0.0, 1.0, 3.0], [1.0, 3.0, 7.0], 5)
        assert spl.order == 3
        assert spl(2.0) == pytest.approx(5.0)

    def test_duplicates_collapsed(self):
        t = np.array([0.0, 1.0, 1.0 + 1e-15, 2.0, 3.0])
        g = np.array([0.0, 1.0, 99.0, 2.0, 3.0])
        spl = bspline.fit(t, g, 2)
        assert spl(1.0) == pytest.approx(1.0)
        assert spl.coefficients.shape[0] == 4

    def test_unsorted_input_is_sorted(self):
        t = np.array([2.0, 0.0, 1.0, 3.0])
        spl = bspline.fit(t, 2 * t, 2)
        assert spl(1.5) == pytest.approx(3.0)

    def test_non_finite_rejected(self):
        with pytest.raises(ValueError):
            bspline.fit([0.0, 1.0, 2.0], [0.0, np.nan, 1.0], 2)

    def test_single_point_rejected(self):
        with pytest.raises(ValueError, match="insufficient data"):
            bspline.fit([1.0], [1.0], 2)

    @given(
        st.integers(7, 60), st.integers(2, 6), st.floats(1e-3, 1e3), st.floats(-100, 100), st.integers(0, 2**32 - 1)
    )
    @settings(max_examples=100, deadline=None)
    def test_interpolates_data(self, m, order, scale, shift, seed):
        # Jittered grids (neighbouring gaps within a factor of ~5): the
        # collocation solve reproduces the data to 1e-12 relative.
        rng = np.random.default_rng(seed)
        t = (np.arange(m) + rng.uniform(-0.4, 0.4, m)) * scale + shift
        g = rng.normal(size=m)
        spl = bspline.fit(t, g, order)
        assert np.max(np.abs(spl(t) - g)) < 1e-12 * np.max(np.abs(g))

    @given(sorted_abscissae(min_size=7), st.integers(2, 6), st.integers(0, 2**32 - 1))
    @settings(max_examples=60, deadline=None)
    def test_interpolates_data_on_irregular_abscissae(self, t, order, seed):
        t = np.array(t)
        g = np.random.default_rng(seed).normal(size=t.size)
        spl = bspline.fit(t, g, order)
        scale = max(1.0, float(np.max(np.abs(g))))
        # Gap ratios up to 1e5 make the collocation matrix ill-conditioned;
        # the observed worst case is ~1e-11.
        assert np.max(np.abs(spl(t) - g)) < 1e-10 * scale

    def test_interpolates_smooth_data_tightly(self):
        t = np.sort(np.random.default_rng(5).uniform(0, 3, 40))
        g = np.exp(np.sin(2 * t))
        for order in (2, 3, 4, 5, 6):
            spl = bspline.fit(t, g, order)
            assert np.max(np.abs(spl(t) - g) / np.abs(g)) < 1e-12


class TestConvergence:
    @pytest.mark.parametrize("degree", [1, 3, 5])
    def test_odd_degree_order(self, degree):
        # A generic smooth function: sin itself has vanishing even
        # derivatives at 0 and pi, which lifts the quintic rate to 7.
        def g(t):
            return np.exp(np.sin(t) + t / 3)

        x = np.linspace(0, np.pi, 4001)
        errs = []
        hs = []
        for m in (51, 101, 201, 401):
            t = np.linspace(0, np.pi, m)
            spl = bspline.fit(t, g(t), degree + 1)
            errs.append(np.max(np.abs(spl(x) - g(x))))
            hs.append(t[1] - t[0])
        slope = np.polyfit(np.log(hs), np.log(errs), 1)[0]
        assert abs(slope - (degree + 1)) <= 0.3

    def test_sin_cubic_halving(self):
        def err(m):
            t = np.linspace(0, np.pi, m)
            mid = 0.5 * (t[1:] + t[:-1])
            return np.max(np.abs(bspline.fit(t, np.sin(t), 4)(mid) - np.sin(mid)))

        observed = np.log2(err(101) / err(201))
        assert abs(observed - 4) <= 0.3


class TestEvaluation:
    def test_at_data_points(self):
        t = np.array([0.0, 0.4, 1.1, 1.5, 2.6])
        g = np.array([1.0, -2.0, 0.5, 3.0, 1.0])
        np.testing.assert_allclose(bspline.fit(t, g, 3)(t), g, atol=1e-13)

    def test_linear_extrapolation(self):
        assert bspline.fit([0.0, 1.0, 2.0], [0.0, 2.0, 4.0], 2)(3.0) == pytest.approx(6.0)

    def test_cubic_extrapolation(self):
        t = np.linspace(0, 1, 11)
        spl = bspline.fit(t, t**3, 4)
        assert abs(spl(-0.1) - (-0.001)) < 1e-8
        assert abs(spl(1.1) - 1.331) < 1e-8

    def test_scalar_in_scalar_out(self):
        out = bspline.fit([0.0, 1.0, 2.0], [0.0, 1.0, 4.0], 3)(0.5)
        assert np.ndim(out) == 0

    def test_derivative(self):
        t = np.linspace(0, 2, 41)
        spl = bspline.fit(t, np.sin(t), 6)
        d1 = spl.derivative()
        d2 = d1.derivative()
        xs = np.linspace(0.1, 1.9, 13)
        np.testing.assert_allclose(d1(xs), np.cos(xs), atol=1e-7)
        np.testing.assert_allclose(d2(xs), -np.sin(xs), atol=1e-5)

    def test_derivative_of_polynomial_is_exact(self):
        t = np.linspace(-1, 1, 9)
        spl = bspline.fit(t, t**4 - t, 5)
        xs = np.linspace(-1, 1, 7)
        np.testing.assert_allclose(spl.derivative()(xs), 4 * xs**3 - 1, atol=1e-11)
