import numpy as np
import pytest

from hypma import builtin
from hypma.problem import (
    BUILTINS,
    GENERATORS,
    Domain,
    EdgeSegment,
    generate_from_analytic,
    verify_pde_identity,
    with_domain,
)

CASES_WITH_EXACT = ["default", "aggregated", "two-edge", "varying-bc"]


def sample_points(problem, n=100, seed=0, margin=1e-3):
    d = problem.domain
    rng = np.random.default_rng(seed)
    return (
        rng.uniform(d.x_min + margin, d.x_max - margin, n),
        rng.uniform(d.y_min + margin, d.y_max - margin, n),
    )


def second_derivatives(u, x, y, h=1e-4):
    u0 = u(x, y)
    r = (u(x + h, y) - 2 * u0 + u(x - h, y)) / h**2
    t = (u(x, y + h) - 2 * u0 + u(x, y - h)) / h**2
    s = (u(x + h, y + h) - u(x + h, y - h) - u(x - h, y + h) + u(x - h, y - h)) / (4 * h**2)
    return r, s, t


class TestDomain:
    def test_rejects_inverted(self):
        with pytest.raises(ValueError):
            Domain(1, 0, 0, 1)
        with pytest.raises(ValueError):
            Domain(0, 1, 1, 1)

    def test_degenerate_x_allowed(self):
        assert Domain(0, 0, 0, 1).contains(0, 0.5)


class TestGenerator:
    def test_cos_iz(self):
        u, f = generate_from_analytic(*GENERATORS["cos(iz)"])
        x, y = np.meshgrid(np.linspace(0, 1, 7), np.linspace(-0.5, 0.5, 5))
        np.testing.assert_allclose(u(x, y), np.cos(y) * np.cosh(x), atol=1e-14)
        np.testing.assert_allclose(f(x, y), np.sqrt((np.cos(2 * y) + np.cosh(2 * x)) / 2), atol=1e-14)

    def test_exp(self):
        u, f = generate_from_analytic(*GENERATORS["exp(z)"])
        x, y = np.meshgrid(np.linspace(0, 2, 5), np.linspace(-1 / 3, 2 / 3, 5))
        np.testing.assert_allclose(u(x, y), np.exp(x) * np.cos(y), atol=1e-13)
        np.testing.assert_allclose(f(x, y), np.exp(x), atol=1e-13)

    def test_square(self):
        u, f = generate_from_analytic(*GENERATORS["z^2"])
        x, y = np.array([0.3, -1.2]), np.array([2.0, 0.5])
        np.testing.assert_allclose(u(x, y), x**2 - y**2)
        np.testing.assert_allclose(f(x, y), 2.0)

    @pytest.mark.parametrize("name", sorted(GENERATORS))
    def test_identity(self, name):
        u, f = generate_from_analytic(*GENERATORS[name])
        rng = np.random.default_rng(1)
        x, y = rng.uniform(-1, 1, 100), rng.uniform(-1, 1, 100)
        assert verify_pde_identity(u, f, x, y) < 1e-6

    def test_degenerate(self):
        # w = z^3 / 6 has w'' = z, vanishing at the origin.
        def w(x, y):
            return (x**3 - 3 * x * y**2) / 6, (3 * x**2 * y - y**3) / 6

        _, f = generate_from_analytic(w, lambda x, y: (x, y))
        with pytest.raises(ValueError, match="degenerate f from generator"):
            f(np.array([0.0, 1.0]), np.array([0.0, 0.0]))


class TestVerifyIdentity:
    def test_default(self):
        p = builtin("default")
        assert verify_pde_identity(p.exact.u, p.f, *sample_points(p)) < 1e-6

    def test_two_edge_defect_is_pure_truncation(self):
        # For u = x^3 y^2 + 1 the second differences in x and y are exact and
        # the mixed one is 6 x^2 y + 2 h^2 y, so the defect is known in closed
        # form: 24 x^2 y^2 h^2 + 4 h^4 y^2 (up to 3.8e-6 at the corner (2, 2)).
        p = builtin("two-edge")
        x, y = sample_points(p)
        h = 1e-4
        expected = np.max(24 * x**2 * y**2 * h**2 + 4 * h**4 * y**2)
        defect = verify_pde_identity(p.exact.u, p.f, x, y, h=h)
        assert abs(defect - expected) < 1e-9
        # Away from the top-right corner the defect is below 1e-6.
        inner = (x * y) < 2.0
        assert verify_pde_identity(p.exact.u, p.f, x[inner], y[inner], h=h) < 1e-6

    def test_broken_pair_detected(self):
        p = builtin("default")
        x, y = sample_points(p)
        defect = verify_pde_identity(p.exact.u, lambda x, y: 2 * p.f(x, y), x, y)
        assert defect >= 3 * np.min(p.f(x, y) ** 2) * 0.99

    def test_analytic_second_derivatives(self):
        p = builtin("two-edge")
        x, y = sample_points(p)

        def second(x, y):
            return 6 * x * y**2, 6 * x**2 * y, 2 * x**3

        assert verify_pde_identity(p.exact.u, p.f, x, y, second=second) < 1e-12


class TestBuiltins:
    def test_names(self):
        assert sorted(BUILTINS) == ["aggregated", "default", "nonsmooth", "two-edge", "varying-bc"]

    def test_unknown(self):
        with pytest.raises(ValueError, match="unknown builtin case"):
            builtin("nope")

    def test_default_layout(self):
        p = builtin("default")
        d = p.domain
        assert (d.x_min, d.x_max, d.y_min, d.y_max) == (0, 1, -0.5, 0.5)
        y = np.linspace(-0.5, 0.5, 11)
        np.testing.assert_allclose(p.west.u(y), np.cos(y))
        np.testing.assert_allclose(p.west.p(y), 0.0)
        assert [s.kind for s in p.south] == ["a"]
        assert [s.kind for s in p.north] == ["b"]
        x = np.linspace(0, 1, 5)
        np.testing.assert_allclose(p.south[0].value(x), p.exact.a(x, -0.5))
        np.testing.assert_allclose(p.north[0].value(x), p.exact.b(x, 0.5))

    def test_default_initial_strip_values(self):
        p = builtin("default")
        y = np.linspace(-0.5, 0.5, 21)
        x = np.zeros_like(y)
        np.testing.assert_allclose(p.exact.q(x, y), -np.sin(y), atol=1e-15)
        np.testing.assert_allclose(p.exact.a(x, y), -1.0, atol=1e-14)
        np.testing.assert_allclose(p.exact.b(x, y), 1.0, atol=1e-14)
        r, s, t = second_derivatives(p.exact.u, x, y)
        np.testing.assert_allclose(r, np.cos(y), atol=1e-6)
        np.testing.assert_allclose(s, 0.0, atol=1e-6)
        np.testing.assert_allclose(t, -np.cos(y), atol=1e-6)

    def test_two_edge_layout(self):
        p = builtin("two-edge")
        d = p.domain
        assert (d.x_min, d.x_max, d.y_min, d.y_max) == (1, 2, 1, 2)
        x, y = sample_points(p, 10)
        np.testing.assert_allclose(p.exact.u(x, y), x**3 * y**2 + 1)
        np.testing.assert_allclose(p.f(x, y), 2 * np.sqrt(6) * x**2 * y)
        assert [s.kind for s in p.south] == ["none"]
        assert [s.kind for s in p.north] == ["strip"]

    def test_nonsmooth(self):
        p = builtin("nonsmooth")
        assert p.exact is None
        with pytest.raises(ValueError, match="exact solution unavailable"):
            p.require_exact()
        x = np.linspace(0, 1, 5)
        np.testing.assert_allclose(p.south[0].value(x), -np.exp(-1.5 * x) * (x**2 + 1))
        assert p.f is not None and p.west is not None

    def test_varying_bc_segments(self):
        p = builtin("varying-bc")
        assert p.edge_segment("S", 1.5).kind == "none"
        assert p.edge_segment("S", 2.2).kind == "b"
        assert p.edge_segment("N", 1.2).kind == "strip"
        assert p.edge_segment("N", 2.0).kind == "a"
        # Switch points belong to the segment listed first.
        assert p.edge_segment("S", 2.0).kind == "none"
        assert p.edge_segment("N", 1.5).kind == "a"

    @pytest.mark.parametrize("case", CASES_WITH_EXACT)
    def test_exact_slopes_consistent(self, case):
        p = builtin(case)
        x, y = sample_points(p, 60, seed=2, margin=0.01)
        r, s, t = second_derivatives(p.exact.u, x, y)
        f = p.f(x, y)
        np.testing.assert_allclose(p.exact.a(x, y), (-s + f) / t, rtol=1e-5, atol=1e-5)
        np.testing.assert_allclose(p.exact.b(x, y), (-s - f) / t, rtol=1e-5, atol=1e-5)

    @pytest.mark.parametrize("case", CASES_WITH_EXACT)
    def test_gradient_consistent(self, case):
        p = builtin(case)
        x, y = sample_points(p, 40, seed=3, margin=0.01)
        h = 1e-6
        u = p.exact.u
        np.testing.assert_allclose(p.exact.p(x, y), (u(x + h, y) - u(x - h, y)) / (2 * h), rtol=1e-7, atol=1e-7)
        np.testing.assert_allclose(p.exact.q(x, y), (u(x, y + h) - u(x, y - h)) / (2 * h), rtol=1e-7, atol=1e-7)

    @pytest.mark.parametrize("case", CASES_WITH_EXACT)
    def test_f_derivatives(self, case):
        p = builtin(case)
        x, y = sample_points(p, 40, seed=4, margin=0.01)
        h = 1e-6
        np.testing.assert_allclose(p.f_x(x, y), (p.f(x + h, y) - p.f(x - h, y)) / (2 * h), rtol=1e-6, atol=1e-7)
        np.testing.assert_allclose(p.f_y(x, y), (p.f(x, y + h) - p.f(x, y - h)) / (2 * h), rtol=1e-6, atol=1e-7)

    @pytest.mark.parametrize("case", CASES_WITH_EXACT)
    def test_strict_hyperbolicity(self, case):
        p = builtin(case)
        d = p.domain
        X, Y = np.meshgrid(np.linspace(d.x_min, d.x_max, 50), np.linspace(d.y_min, d.y_max, 50))
        diff = p.exact.a(X, Y) - p.exact.b(X, Y)
        assert np.all(diff > 0) or np.all(diff < 0)
        assert np.all(p.f(X, Y) != 0)

    @pytest.mark.parametrize("case", sorted(BUILTINS))
    def test_west_strip_free(self, case):
        p = builtin(case)
        y = np.linspace(p.domain.y_min, p.domain.y_max, 101)
        assert np.all(np.abs(p.west.d2u(y)) > 1e-12)

    @pytest.mark.parametrize("case", CASES_WITH_EXACT)
    def test_west_strip_matches_exact(self, case):
        p = builtin(case)
        y = np.linspace(p.domain.y_min, p.domain.y_max, 31)
        x = np.full_like(y, p.domain.x_min)
        np.testing.assert_allclose(p.west.u(y), p.exact.u(x, y), atol=1e-13)
        np.testing.assert_allclose(p.west.p(y), p.exact.p(x, y), atol=1e-13)
        np.testing.assert_allclose(p.west.du(y), p.exact.q(x, y), atol=1e-13)

    @pytest.mark.parametrize("case", CASES_WITH_EXACT)
    def test_edge_prescriptions_match_exact(self, case):
        p = builtin(case)
        d = p.domain
        for edge, y0, segments in (("S", d.y_min, p.south), ("N", d.y_max, p.north)):
            for seg in segments:
                x = np.linspace(seg.start, seg.stop, 9)
                y = np.full_like(x, y0)
                if seg.kind in ("a", "b"):
                    np.testing.assert_allclose(seg.value(x), getattr(p.exact, seg.kind)(x, y), atol=1e-13)
                elif seg.kind == "strip":
                    np.testing.assert_allclose(seg.strip.u(x), p.exact.u(x, y), atol=1e-13)
                    np.testing.assert_allclose(seg.strip.q(x), p.exact.q(x, y), atol=1e-13)
                    np.testing.assert_allclose(seg.strip.du(x), p.exact.p(x, y), atol=1e-12)
                    h = 1e-5
                    fd = (p.exact.p(x + h, y) - p.exact.p(x - h, y)) / (2 * h)
                    np.testing.assert_allclose(seg.strip.d2u(x), fd, rtol=1e-7, atol=1e-7)
                    fdq = (p.exact.q(x + h, y) - p.exact.q(x - h, y)) / (2 * h)
                    np.testing.assert_allclose(seg.strip.dq(x), fdq, rtol=1e-7, atol=1e-7)

    def test_with_domain(self):
        p = with_domain(builtin("default"), x_max=0.5)
        assert p.domain.x_max == 0.5 and p.domain.x_min == 0


class TestEdgeSegment:
    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            EdgeSegment(0, 1, "q", lambda x: x)

    def test_value_required(self):
        with pytest.raises(ValueError):
            EdgeSegment(0, 1, "a")

    def test_strip_required(self):
        with pytest.raises(ValueError):
            EdgeSegment(0, 1, "strip")
