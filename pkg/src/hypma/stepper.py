"""One marching step x_i -> x_i + h along both characteristic families.

From every grid point an alpha characteristic (slope a) and a beta
characteristic (slope b) are integrated to the next abscissa. Each family
transports (y, u, p, q) plus the slope of the *other* family, so the slope a
family needs for itself is only available on the other family's front and is
obtained by spline interpolation across fronts. After the step both fronts
are interpolated back onto the uniform y grid and averaged.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import bspline
from .boundary import extend_horizontal_strip, slope_from_prescription
from .problem import ProblemSpec

ALPHA = "alpha"
BETA = "beta"
METHODS = ("euler", "modified-euler", "rk4")

#: Default spline order per method, matched to the local truncation error.
DEFAULT_ORDER = {"euler": 2, "modified-euler": 3, "rk4": 5}

# Grid points farther than this many h_y outside a front, with nothing
# prescribed, are an error rather than an extrapolation.
MAX_EXTRAPOLATION = 1.0


class MissingBoundaryCondition(ValueError):
    pass


@dataclass(frozen=True)
class GridLine:
    """Solution values at x on the uniform y grid."""

    x: float
    y: np.ndarray
    u: np.ndarray
    p: np.ndarray
    q: np.ndarray
    a: np.ndarray
    b: np.ndarray
    crossed: bool = False

    @property
    def h_y(self) -> float:
        return float(self.y[1] - self.y[0])


@dataclass(frozen=True)
class CharFront:
    """Arrival points of one family at a common abscissa.

    ``slope`` is b on an alpha front and a on a beta front.
    """

    family: str
    x: float
    y: np.ndarray
    u: np.ndarray
    p: np.ndarray
    q: np.ndarray
    slope: np.ndarray

    @classmethod
    def from_line(cls, family: str, line: GridLine) -> CharFront:
        slope = line.b if family == ALPHA else line.a
        return cls(family, line.x, line.y, line.u, line.p, line.q, slope)

    def state(self) -> np.ndarray:
        return np.stack([self.y, self.u, self.p, self.q, self.slope])

    def advanced(self, h: float, increment: np.ndarray) -> CharFront:
        """This front's start state moved by ``h`` times ``increment``."""
        y, u, p, q, s = self.state() + h * increment
        return CharFront(self.family, self.x + h, y, u, p, q, s)

    def span(self) -> tuple[float, float]:
        return float(np.min(self.y)), float(np.max(self.y))


def rhs_alpha(p, q, b, a, f, f_x, f_y) -> np.ndarray:
    """d/dx of (x, y, u, p, q, b) along an alpha characteristic."""
    p, q, b, a, f = np.broadcast_arrays(*(np.asarray(v, float) for v in (p, q, b, a, f)))
    return np.stack([np.ones_like(a), a, p + a * q, -a * f, f, (b - a) / (2 * f) * (f_x + b * f_y)])


def rhs_beta(p, q, a, b, f, f_x, f_y) -> np.ndarray:
    """d/dx of (x, y, u, p, q, a) along a beta characteristic."""
    p, q, a, b, f = np.broadcast_arrays(*(np.asarray(v, float) for v in (p, q, a, b, f)))
    return np.stack([np.ones_like(b), b, p + b * q, b * f, -f, (a - b) / (2 * f) * (f_x + a * f_y)])


def _increment(problem: ProblemSpec, front: CharFront, own_slope) -> np.ndarray:
    # Rows (y, u, p, q, carried slope); the constant x row is dropped.
    x = np.full_like(front.y, front.x)
    f = problem.f(x, front.y)
    fx = problem.f_x(x, front.y)
    fy = problem.f_y(x, front.y)
    rhs = rhs_alpha if front.family == ALPHA else rhs_beta
    return rhs(front.p, front.q, front.slope, own_slope, f, fx, fy)[1:]


def cross_interpolate(source: CharFront, target_y, order: int) -> np.ndarray:
    """Carried slope of ``source`` interpolated (or extrapolated) to ``target_y``."""
    return bspline.fit(source.y, source.slope, order)(np.asarray(target_y, float))


class _Slopes:
    """Supplies each family's own slope at an intermediate stage."""

    def __init__(self, order: int, exact=None):
        self.order = order
        self.exact = exact

    def __call__(self, alpha: CharFront, beta: CharFront):
        if self.exact is not None:
            a = self.exact.a(np.full_like(alpha.y, alpha.x), alpha.y)
            b = self.exact.b(np.full_like(beta.y, beta.x), beta.y)
            return a, b
        return cross_interpolate(beta, alpha.y, self.order), cross_interpolate(alpha, beta.y, self.order)


def euler_step(problem: ProblemSpec, line: GridLine, h: float):
    alpha0 = CharFront.from_line(ALPHA, line)
    beta0 = CharFront.from_line(BETA, line)
    ga = _increment(problem, alpha0, line.a)
    gb = _increment(problem, beta0, line.b)
    return alpha0.advanced(h, ga), beta0.advanced(h, gb)


def modified_euler_step(problem: ProblemSpec, line: GridLine, h: float, order: int = 3, exact=None):
    slopes = _Slopes(order, exact)
    alpha0 = CharFront.from_line(ALPHA, line)
    beta0 = CharFront.from_line(BETA, line)
    ga1 = _increment(problem, alpha0, line.a)
    gb1 = _increment(problem, beta0, line.b)
    alpha_half = alpha0.advanced(h / 2, ga1)
    beta_half = beta0.advanced(h / 2, gb1)
    a_half, b_half = slopes(alpha_half, beta_half)
    ga2 = _increment(problem, alpha_half, a_half)
    gb2 = _increment(problem, beta_half, b_half)
    return alpha0.advanced(h, ga2), beta0.advanced(h, gb2)


def rk4_step(problem: ProblemSpec, line: GridLine, h: float, order: int = 5, exact=None):
    slopes = _Slopes(order, exact)
    alpha0 = CharFront.from_line(ALPHA, line)
    beta0 = CharFront.from_line(BETA, line)

    ga1 = _increment(problem, alpha0, line.a)
    gb1 = _increment(problem, beta0, line.b)
    alpha_t = alpha0.advanced(h / 2, ga1)
    beta_t = beta0.advanced(h / 2, gb1)

    a_t, b_t = slopes(alpha_t, beta_t)
    ga2 = _increment(problem, alpha_t, a_t)
    gb2 = _increment(problem, beta_t, b_t)
    alpha_h = alpha0.advanced(h / 2, ga2)
    beta_h = beta0.advanced(h / 2, gb2)

    a_h, b_h = slopes(alpha_h, beta_h)
    ga3 = _increment(problem, alpha_h, a_h)
    gb3 = _increment(problem, beta_h, b_h)
    alpha_f = alpha0.advanced(h, ga3)
    beta_f = beta0.advanced(h, gb3)

    a_f, b_f = slopes(alpha_f, beta_f)
    ga4 = _increment(problem, alpha_f, a_f)
    gb4 = _increment(problem, beta_f, b_f)

    alpha = alpha0.advanced(h, (ga1 + 2 * ga2 + 2 * ga3 + ga4) / 6)
    beta = beta0.advanced(h, (gb1 + 2 * gb2 + 2 * gb3 + gb4) / 6)
    return alpha, beta


def step(method: str, problem: ProblemSpec, line: GridLine, h: float, order: int, exact=None):
    """Dispatch to the stepper for ``method``; returns (alpha, beta) fronts."""
    if h == 0:
        return CharFront.from_line(ALPHA, line), CharFront.from_line(BETA, line)
    if method == "euler":
        return euler_step(problem, line, h)
    if method == "modified-euler":
        return modified_euler_step(problem, line, h, order, exact)
    if method == "rk4":
        return rk4_step(problem, line, h, order, exact)
    raise ValueError(f"unknown method {method!r}; choose from {METHODS}")


# -- regridding -------------------------------------------------------------------


def _front_spline(front: CharFront, order: int):
    values = np.column_stack([front.u, front.p, front.q, front.slope])
    t, g, crossed = bspline.dedup(front.y, values)
    return bspline.fit(t, g, order, deduplicate=False), crossed


def _coverage(front: CharFront, y: np.ndarray, tol: float) -> tuple[np.ndarray, np.ndarray]:
    lo, hi = front.span()
    covered = (y >= lo - tol) & (y <= hi + tol)
    distance = np.maximum(lo - y, 0.0) + np.maximum(y - hi, 0.0)
    return covered, distance


def regrid(problem: ProblemSpec, alpha: CharFront, beta: CharFront, y, order: int) -> GridLine:
    """Interpolate both fronts back onto the grid ``y`` and average them.

    u, p, q are averaged where both fronts span a grid point and taken from
    the single spanning front otherwise. a comes from the beta front and b
    from the alpha front. Grid points a front does not span take their value
    from the edge prescription at that abscissa.
    """
    y = np.asarray(y, float)
    x = alpha.x
    h_y = float(y[1] - y[0])
    tol = 1e-9 * h_y

    spl_a, crossed_a = _front_spline(alpha, order)
    spl_b, crossed_b = _front_spline(beta, order)
    va = spl_a(y)
    vb = spl_b(y)
    cov_a, dist_a = _coverage(alpha, y, tol)
    cov_b, dist_b = _coverage(beta, y, tol)

    both = cov_a & cov_b
    upq = np.where(both[:, None], 0.5 * (va[:, :3] + vb[:, :3]), np.where(cov_a[:, None], va[:, :3], vb[:, :3]))
    a = vb[:, 3].copy()
    b = va[:, 3].copy()

    # Grid points not spanned by the relevant front(s).
    need_upq = ~(cov_a | cov_b)
    for j in np.flatnonzero(need_upq | ~cov_b | ~cov_a):
        edge = "S" if j == 0 else "N" if j == y.size - 1 else None
        seg = problem.edge_segment(edge, x) if edge else None
        strip = None
        if seg is not None and seg.kind == "strip":
            strip = extend_horizontal_strip(seg.strip, lambda s: problem.f(s, y[j]), np.array([x]))

        if need_upq[j]:
            if strip is not None:
                upq[j] = strip.u[0], strip.p[0], strip.q[0]
            elif min(dist_a[j], dist_b[j]) <= MAX_EXTRAPOLATION * h_y:
                upq[j] = 0.5 * (va[j, :3] + vb[j, :3])
            else:
                raise MissingBoundaryCondition(
                    f"missing boundary condition at edge {edge or 'interior'} (x={x:.17g}, y={y[j]:.17g}): u, p, q"
                )
        if not cov_b[j]:
            a[j] = _edge_slope("a", seg, strip, x, y[j], b[j], problem, dist_b[j], h_y, vb[j, 3], edge)
        if not cov_a[j]:
            b[j] = _edge_slope("b", seg, strip, x, y[j], a[j], problem, dist_a[j], h_y, va[j, 3], edge)

    return GridLine(x, y, upq[:, 0], upq[:, 1], upq[:, 2], a, b, crossed=crossed_a or crossed_b)


def _edge_slope(missing, seg, strip, x, yj, known, problem, dist, h_y, extrapolated, edge):
    if strip is not None:
        return strip.a[0] if missing == "a" else strip.b[0]
    if seg is not None and seg.kind in ("a", "b", "r", "s", "t") and (seg.kind in ("r", "s", "t") or seg.kind == missing):
        value = float(seg.value(x))
        return slope_from_prescription(known, seg.kind, value, float(problem.f(x, yj)), missing=missing)
    if dist <= MAX_EXTRAPOLATION * h_y:
        return extrapolated
    raise MissingBoundaryCondition(
        f"missing boundary condition at edge {edge or 'interior'} (x={x:.17g}, y={yj:.17g}): {missing}"
    )


def initial_line(problem: ProblemSpec, y) -> GridLine:
    """Grid line on the western edge from the initial strip."""
    from .boundary import extend_vertical_strip

    d = problem.domain
    ext = extend_vertical_strip(problem.west, lambda s: problem.f(np.full_like(s, d.x_min), s), y)
    return GridLine(d.x_min, np.asarray(y, float), ext.u, ext.p, ext.q, ext.a, ext.b)

