"""Outer march from the initial strip to x_max and post-hoc tracing."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import bspline
from .problem import ProblemSpec
from .stepper import DEFAULT_ORDER, METHODS, GridLine, initial_line, regrid, step

DEFAULT_GAMMA = 0.95


class SolverDiverged(RuntimeError):
    pass


@dataclass(frozen=True)
class SolutionField:
    """All grid lines of a march; value arrays have shape (N_x, N_y)."""

    x: np.ndarray
    y: np.ndarray
    u: np.ndarray
    p: np.ndarray
    q: np.ndarray
    a: np.ndarray
    b: np.ndarray
    method: str = "exact"
    spline_order: int = 0
    gamma: float = DEFAULT_GAMMA
    crossings: int = 0
    meta: dict = field(default_factory=dict)

    @property
    def n_x(self) -> int:
        return self.x.size

    @property
    def n_y(self) -> int:
        return self.y.size

    @property
    def h_y(self) -> float:
        return float(self.y[1] - self.y[0])

    def final_line(self) -> dict[str, np.ndarray]:
        return {k: getattr(self, k)[-1] for k in ("u", "p", "q", "a", "b")}

    @classmethod
    def from_exact(cls, problem: ProblemSpec, x, y) -> SolutionField:
        """Field filled with the exact solution on the tensor grid x by y."""
        ex = problem.require_exact()
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        X, Y = np.meshgrid(x, y, indexing="ij")
        return cls(x, y, ex.u(X, Y), ex.p(X, Y), ex.q(X, Y), ex.a(X, Y), ex.b(X, Y))


def adaptive_hx(a_row, b_row, h_y: float, gamma: float = DEFAULT_GAMMA) -> float:
    """Step that keeps every characteristic's y-displacement below gamma * h_y."""
    if not 0 < gamma <= 1:
        raise ValueError(f"gamma must lie in (0, 1], got {gamma}")
    steepest = max(1.0, float(np.max(np.abs(a_row))), float(np.max(np.abs(b_row))))
    return gamma * h_y / steepest


def uniform_y(problem: ProblemSpec, n_y: int) -> np.ndarray:
    d = problem.domain
    return np.linspace(d.y_min, d.y_max, n_y)


def solve(
    problem: ProblemSpec,
    n_y: int,
    method: str = "rk4",
    spline_order: int | None = None,
    gamma: float = DEFAULT_GAMMA,
    *,
    exact_slopes: bool = False,
    landing: str = "balanced",
    max_steps: int | None = None,
) -> SolutionField:
    """March from x_min to x_max and return every grid line.

    ``exact_slopes`` replaces cross-family slope interpolation inside the
    steppers by the exact a, b (a verification aid; needs an exact solution).
    ``max_steps`` caps the number of steps (default: 100 times the count
    needed with unit slopes); running out means the slopes blew up and the
    adaptive step collapsed, which is reported as divergence.
    """
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}; choose from {METHODS}")
    order = DEFAULT_ORDER[method] if spline_order is None else int(spline_order)
    if order < 2:
        raise ValueError("spline order must be at least 2")
    if n_y < 2 * order + 3:
        raise ValueError(f"n_y={n_y} too small for spline order {order} (need >= {2 * order + 3})")
    if not 0 < gamma <= 1:
        raise ValueError(f"gamma must lie in (0, 1], got {gamma}")
    exact = problem.require_exact() if exact_slopes else None
    if max_steps is None:
        max_steps = 100 * n_steps_estimate(problem, n_y, gamma) + 100

    d = problem.domain
    y = uniform_y(problem, n_y)
    h_y = float(y[1] - y[0])
    line = initial_line(problem, y)
    _check_finite(line)
    lines = [line]
    crossings = 0
    x = d.x_min
    while x < d.x_max:
        if len(lines) > max_steps:
            steep = max(np.max(np.abs(line.a)), np.max(np.abs(line.b)))
            raise SolverDiverged(f"solver diverged at x = {x:.17g} (step budget exhausted, |slope| up to {steep:.3g})")
        h = _landing_step(adaptive_hx(line.a, line.b, h_y, gamma), d.x_max - x, landing)
        alpha, beta = step(method, problem, line, h, order, exact)
        line = regrid(problem, alpha, beta, y, order)
        # Land exactly on x_max despite rounding in the running sum.
        if h >= d.x_max - x:
            line = GridLine(d.x_max, *(getattr(line, k) for k in ("y", "u", "p", "q", "a", "b")), line.crossed)
        _check_finite(line)
        crossings += int(line.crossed)
        lines.append(line)
        x = line.x

    stack = {k: np.vstack([getattr(ln, k) for ln in lines]) for k in ("u", "p", "q", "a", "b")}
    return SolutionField(
        np.array([ln.x for ln in lines]),
        y,
        method=method,
        spline_order=order,
        gamma=gamma,
        crossings=crossings,
        **stack,
    )


def _landing_step(h: float, remaining: float, landing: str) -> float:
    if landing == "clamp":
        return min(h, remaining)
    if landing == "balanced":
        return remaining / math.ceil(remaining / h * (1 - 1e-12))
    raise ValueError(f"unknown landing rule {landing!r}")


def _check_finite(line: GridLine):
    for name in ("u", "p", "q", "a", "b"):
        if not np.all(np.isfinite(getattr(line, name))):
            raise SolverDiverged(f"solver diverged at x = {line.x:.17g} (non-finite {name})")
    if np.any(line.a == line.b):
        raise SolverDiverged(f"solver diverged at x = {line.x:.17g} (a = b, hyperbolicity lost)")


# -- characteristic tracing ---------------------------------------------------------


class _SlopeLookup:
    """Slope of one family anywhere in the field.

    Cubic splines in y on the two grid lines bracketing x, blended linearly.
    """

    ORDER = 4

    def __init__(self, sol: SolutionField, family: str):
        self.sol = sol
        self.values = sol.a if family == "alpha" else sol.b
        self._cache: dict[int, bspline.Spline] = {}

    def _line(self, i: int) -> bspline.Spline:
        spl = self._cache.get(i)
        if spl is None:
            spl = bspline.fit(self.sol.y, self.values[i], min(self.ORDER, self.sol.n_y))
            self._cache[i] = spl
        return spl

    def __call__(self, x: float, y: float) -> float:
        xs = self.sol.x
        if xs.size == 1:
            return float(self._line(0)(y))
        i = int(np.clip(np.searchsorted(xs, x, side="right") - 1, 0, xs.size - 2))
        w = (x - xs[i]) / (xs[i + 1] - xs[i])
        return float((1 - w) * self._line(i)(y) + w * self._line(i + 1)(y))


def _trace_direction(lookup, sol, x0, y0, direction, h):
    d_lo, d_hi = sol.x[0], sol.x[-1]
    y_lo, y_hi = sol.y[0], sol.y[-1]
    pts = [(x0, y0)]
    x, y = x0, y0
    for _ in range(1_000_000):
        if direction > 0 and x >= d_hi or direction < 0 and x <= d_lo:
            break
        hs = direction * min(h, (d_hi - x) if direction > 0 else (x - d_lo))
        k1 = lookup(x, y)
        k2 = lookup(x + hs / 2, y + hs / 2 * k1)
        k3 = lookup(x + hs / 2, y + hs / 2 * k2)
        k4 = lookup(x + hs, y + hs * k3)
        xn = x + hs
        yn = y + hs / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        if yn < y_lo or yn > y_hi:
            edge = y_lo if yn < y_lo else y_hi
            w = (edge - y) / (yn - y)
            pts.append((x + w * hs, edge))
            break
        x, y = xn, yn
        pts.append((x, y))
    return pts


def trace_characteristic(sol: SolutionField, start, family: str, step_fraction: float = 0.5) -> np.ndarray:
    """Full characteristic of ``family`` through ``start`` as an (n, 2) polyline.

    Integrates dy/dx = slope backward to the entry edge and forward to the
    exit edge; points are ordered by increasing x.
    """
    if family not in ("alpha", "beta"):
        raise ValueError(f"family must be 'alpha' or 'beta', got {family!r}")
    x0, y0 = float(start[0]), float(start[1])
    eps = 1e-12 * max(1.0, abs(sol.x[-1] - sol.x[0]), abs(sol.y[-1] - sol.y[0]))
    if not (sol.x[0] - eps <= x0 <= sol.x[-1] + eps and sol.y[0] - eps <= y0 <= sol.y[-1] + eps):
        raise ValueError(f"trace start outside domain: {start}")
    lookup = _SlopeLookup(sol, family)
    if sol.n_x > 1:
        h = step_fraction * float(np.min(np.diff(sol.x)[np.diff(sol.x) > 0], initial=sol.h_y))
    else:
        h = sol.h_y
    h = max(h, step_fraction * sol.h_y * 0.1)
    back = _trace_direction(lookup, sol, x0, y0, -1, h)
    fwd = _trace_direction(lookup, sol, x0, y0, +1, h)
    return np.array(back[::-1] + fwd[1:])


def western_starts(sol: SolutionField, count: int = 7) -> list[tuple[float, float]]:
    """``count`` equidistant points on the initial strip, ends included."""
    ys = np.linspace(sol.y[0], sol.y[-1], count)
    return [(float(sol.x[0]), float(v)) for v in ys]


def n_steps_estimate(problem: ProblemSpec, n_y: int, gamma: float = DEFAULT_GAMMA, slope: float = 1.0) -> int:
    d = problem.domain
    h_y = (d.y_max - d.y_min) / (n_y - 1)
    return math.ceil((d.x_max - d.x_min) / (gamma * h_y / max(1.0, slope)))
