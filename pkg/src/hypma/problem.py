"""Problem definitions for u_xx u_yy - u_xy^2 + f^2 = 0 on a rectangle.

A :class:`ProblemSpec` bundles the right-hand side ``f`` with its first
derivatives, Cauchy data on the western edge (the initial strip), per-segment
prescriptions on the southern and northern edges, and optionally the exact
solution. The eastern edge never needs data because both characteristic
families march in +x.

All callables take numpy arrays and broadcast.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

Func2 = Callable[[np.ndarray, np.ndarray], np.ndarray]
Func1 = Callable[[np.ndarray], np.ndarray]

#: Kinds of edge prescription. ``"strip"`` is a Cauchy pair (u, normal
#: derivative); the rest prescribe one quantity for a single entering family.
EDGE_KINDS = ("none", "a", "b", "r", "s", "t", "strip")


@dataclass(frozen=True)
class Domain:
    x_min: float
    x_max: float
    y_min: float
    y_max: float

    def __post_init__(self):
        if not self.x_min <= self.x_max:
            raise ValueError("x_min must not exceed x_max")
        if not self.y_min < self.y_max:
            raise ValueError("y_min must be below y_max")

    def contains(self, x: float, y: float, tol: float = 0.0) -> bool:
        return (
            self.x_min - tol <= x <= self.x_max + tol
            and self.y_min - tol <= y <= self.y_max + tol
        )


@dataclass(frozen=True)
class VerticalStrip:
    """Cauchy data u(x0, y), p(x0, y) with the derivatives the strip needs."""

    u: Func1
    du: Func1
    d2u: Func1
    p: Func1
    dp: Func1


@dataclass(frozen=True)
class HorizontalStrip:
    """Cauchy data u(x, y0), q(x, y0) with derivatives along x."""

    u: Func1
    du: Func1
    d2u: Func1
    q: Func1
    dq: Func1


@dataclass(frozen=True)
class EdgeSegment:
    """Prescription on ``[start, stop]`` of a horizontal edge.

    ``value`` is a function of x for the single-quantity kinds; ``strip``
    carries the Cauchy data for kind ``"strip"``.
    """

    start: float
    stop: float
    kind: str = "none"
    value: Func1 | None = None
    strip: HorizontalStrip | None = None

    def __post_init__(self):
        if self.kind not in EDGE_KINDS:
            raise ValueError(f"unknown edge prescription {self.kind!r}")
        if self.kind == "strip" and self.strip is None:
            raise ValueError("strip prescription needs HorizontalStrip data")
        if self.kind not in ("none", "strip") and self.value is None:
            raise ValueError(f"prescription {self.kind!r} needs a value function")


@dataclass(frozen=True)
class ExactSolution:
    u: Func2
    p: Func2
    q: Func2
    a: Func2
    b: Func2


@dataclass(frozen=True)
class ProblemSpec:
    name: str
    domain: Domain
    f: Func2
    f_x: Func2
    f_y: Func2
    west: VerticalStrip
    south: tuple[EdgeSegment, ...] = ()
    north: tuple[EdgeSegment, ...] = ()
    exact: ExactSolution | None = None
    #: Where a characteristic through the edge switches between entering and
    #: leaving; informational, used when sampling classification tables.
    switch_points: dict = field(default_factory=dict)

    def edge_segment(self, edge: str, x: float) -> EdgeSegment | None:
        """First segment of ``edge`` ("S" or "N") whose closed range holds x."""
        segments = self.south if edge == "S" else self.north
        for seg in segments:
            if seg.start <= x <= seg.stop:
                return seg
        return None

    def require_exact(self) -> ExactSolution:
        if self.exact is None:
            raise ValueError(f"exact solution unavailable for case {self.name!r}")
        return self.exact


# -- solution pairs from complex analytic functions ---------------------------
#
# Complex values travel as (real, imaginary) pairs of real arrays.


def generate_from_analytic(w, w2):
    """Build ``(u, f)`` with u = Re w(x + iy) and f = |w''(x + iy)|.

    ``w`` and ``w2`` map a pair ``(re, im)`` of real arrays to the pair for
    w(z) and w''(z). Any such pair solves the hyperbolic equation because
    u_xx = Re w'', u_xy = -Im w'', u_yy = -Re w''.
    """

    def u(x, y):
        return w(np.asarray(x, float), np.asarray(y, float))[0]

    def f(x, y):
        re, im = w2(np.asarray(x, float), np.asarray(y, float))
        mod = np.hypot(re, im)
        if np.any(mod == 0.0):
            raise ValueError("degenerate f from generator")
        return mod

    return u, f


def cexp(re, im):
    e = np.exp(re)
    return e * np.cos(im), e * np.sin(im)


def ccos(re, im):
    return np.cos(re) * np.cosh(im), -np.sin(re) * np.sinh(im)


def cmul(a, b):
    return a[0] * b[0] - a[1] * b[1], a[0] * b[1] + a[1] * b[0]


def _cos_iz(x, y):
    # i z = -y + i x
    return ccos(-y, x)


def _cos_iz_second(x, y):
    # d^2/dz^2 cos(iz) = -i^2 cos(iz) = cos(iz)
    return ccos(-y, x)


def _square(x, y):
    return cmul((x, y), (x, y))


def _square_second(x, y):
    return 2.0 + 0.0 * x, 0.0 * y


#: Generators used by the builtins and the tests: name -> (w, w'').
GENERATORS = {
    "cos(iz)": (_cos_iz, _cos_iz_second),
    "exp(z)": (lambda x, y: cexp(x, y), lambda x, y: cexp(x, y)),
    "z^2": (_square, _square_second),
}


# -- identity check -------------------------------------------------------------


def verify_pde_identity(u, f, xs, ys, *, second=None, h: float = 1e-4) -> float:
    """Max of |u_xx u_yy - u_xy^2 + f^2| over the sample points.

    ``second`` may return analytic ``(r, s, t)``; otherwise central
    differences with step ``h`` are used.
    """
    x = np.asarray(xs, float)
    y = np.asarray(ys, float)
    if second is not None:
        r, s, t = second(x, y)
    else:
        # Differences are taken in extended precision where the platform has
        # it: with |u| ~ 30 and h = 1e-4, double rounding alone would leave
        # a defect of order 1e-5.
        xl = x.astype(np.longdouble)
        yl = y.astype(np.longdouble)
        hl = np.longdouble(h)
        u0 = u(xl, yl)
        r = (u(xl + hl, yl) - 2 * u0 + u(xl - hl, yl)) / hl**2
        t = (u(xl, yl + hl) - 2 * u0 + u(xl, yl - hl)) / hl**2
        s = (u(xl + hl, yl + hl) - u(xl + hl, yl - hl) - u(xl - hl, yl + hl) + u(xl - hl, yl - hl)) / (4 * hl**2)
    defect = r * t - s * s + np.asarray(f(x, y), np.longdouble) ** 2
    return float(np.max(np.abs(defect)))


# -- builtin cases --------------------------------------------------------------


def _default_f(x, y):
    return np.sqrt((np.cos(2 * y) + np.cosh(2 * x)) / 2)


def _default_exact() -> ExactSolution:
    def a(x, y):
        return -(np.sin(y) * np.sinh(x) + _default_f(x, y)) / (np.cos(y) * np.cosh(x))

    def b(x, y):
        return (-np.sin(y) * np.sinh(x) + _default_f(x, y)) / (np.cos(y) * np.cosh(x))

    return ExactSolution(
        u=lambda x, y: np.cos(y) * np.cosh(x),
        p=lambda x, y: np.cos(y) * np.sinh(x),
        q=lambda x, y: -np.sin(y) * np.cosh(x),
        a=a,
        b=b,
    )


def _default_base(name: str, south: tuple, exact) -> ProblemSpec:
    ex = _default_exact()
    return ProblemSpec(
        name=name,
        domain=Domain(0.0, 1.0, -0.5, 0.5),
        f=_default_f,
        f_x=lambda x, y: np.sinh(2 * x) / (2 * _default_f(x, y)),
        f_y=lambda x, y: -np.sin(2 * y) / (2 * _default_f(x, y)),
        west=VerticalStrip(
            u=np.cos,
            du=lambda y: -np.sin(y),
            d2u=lambda y: -np.cos(y),
            p=lambda y: 0.0 * np.asarray(y, float),
            dp=lambda y: 0.0 * np.asarray(y, float),
        ),
        south=south,
        north=(EdgeSegment(0.0, 1.0, "b", lambda x: ex.b(x, 0.5)),),
        exact=exact,
    )


def _default() -> ProblemSpec:
    ex = _default_exact()
    south = (EdgeSegment(0.0, 1.0, "a", lambda x: ex.a(x, -0.5)),)
    return _default_base("default", south, ex)


def _nonsmooth() -> ProblemSpec:
    south = (EdgeSegment(0.0, 1.0, "a", lambda x: -np.exp(-1.5 * x) * (x**2 + 1)),)
    return _default_base("nonsmooth", south, None)


def _aggregated() -> ProblemSpec:
    def a(x, y):
        return -(np.sin(y) + 1) / np.cos(y) + 0.0 * x

    def b(x, y):
        return (1 - np.sin(y)) / np.cos(y) + 0.0 * x

    exact = ExactSolution(
        u=lambda x, y: np.exp(x) * np.cos(y),
        p=lambda x, y: np.exp(x) * np.cos(y),
        q=lambda x, y: -np.exp(x) * np.sin(y),
        a=a,
        b=b,
    )
    y_lo, y_hi = -1.0 / 3.0, 2.0 / 3.0
    return ProblemSpec(
        name="aggregated",
        domain=Domain(0.0, 2.0, y_lo, y_hi),
        f=lambda x, y: np.exp(x) + 0.0 * y,
        f_x=lambda x, y: np.exp(x) + 0.0 * y,
        f_y=lambda x, y: 0.0 * x + 0.0 * y,
        west=VerticalStrip(
            u=np.cos,
            du=lambda y: -np.sin(y),
            d2u=lambda y: -np.cos(y),
            p=np.cos,
            dp=lambda y: -np.sin(y),
        ),
        south=(EdgeSegment(0.0, 2.0, "a", lambda x: a(x, y_lo)),),
        north=(EdgeSegment(0.0, 2.0, "b", lambda x: b(x, y_hi)),),
        exact=exact,
    )


_SQRT6 = math.sqrt(6.0)


def _two_edge() -> ProblemSpec:
    exact = ExactSolution(
        u=lambda x, y: x**3 * y**2 + 1,
        p=lambda x, y: 3 * x**2 * y**2,
        q=lambda x, y: 2 * x**3 * y,
        a=lambda x, y: (-3 + _SQRT6) * y / x,
        b=lambda x, y: -(3 + _SQRT6) * y / x,
    )
    north = HorizontalStrip(
        u=lambda x: 4 * x**3 + 1,
        du=lambda x: 12 * x**2,
        d2u=lambda x: 24 * x,
        q=lambda x: 4 * x**3,
        dq=lambda x: 12 * x**2,
    )
    return ProblemSpec(
        name="two-edge",
        domain=Domain(1.0, 2.0, 1.0, 2.0),
        f=lambda x, y: 2 * _SQRT6 * x**2 * y,
        f_x=lambda x, y: 4 * _SQRT6 * x * y,
        f_y=lambda x, y: 2 * _SQRT6 * x**2 + 0.0 * y,
        west=VerticalStrip(
            u=lambda y: y**2 + 1,
            du=lambda y: 2 * y,
            d2u=lambda y: 2.0 + 0.0 * np.asarray(y, float),
            p=lambda y: 3 * y**2,
            dp=lambda y: 6 * y,
        ),
        south=(EdgeSegment(1.0, 2.0, "none"),),
        north=(EdgeSegment(1.0, 2.0, "strip", strip=north),),
        exact=exact,
    )


def _varying_bc() -> ProblemSpec:
    def e(x, y):
        return np.exp(2 * y / x)

    exact = ExactSolution(
        u=lambda x, y: 1 + e(x, y),
        p=lambda x, y: -2 * y / x**2 * e(x, y),
        q=lambda x, y: 2 / x * e(x, y),
        a=lambda x, y: 1 + y / x,
        b=lambda x, y: y / x,
    )
    y_lo, y_hi = -2.0, -1.5
    north_strip = HorizontalStrip(
        u=lambda x: 1 + np.exp(y_hi * 2 / x),
        du=lambda x: 3 / x**2 * np.exp(-3 / x),
        d2u=lambda x: np.exp(-3 / x) * (9 - 6 * x) / x**4,
        q=lambda x: 2 / x * np.exp(-3 / x),
        dq=lambda x: np.exp(-3 / x) * (6 - 2 * x) / x**3,
    )
    return ProblemSpec(
        name="varying-bc",
        domain=Domain(1.0, 2.5, y_lo, y_hi),
        f=lambda x, y: 2 / x**2 * e(x, y),
        f_x=lambda x, y: -4 * e(x, y) / x**3 - 4 * y * e(x, y) / x**4,
        f_y=lambda x, y: 4 * e(x, y) / x**3,
        west=VerticalStrip(
            u=lambda y: 1 + np.exp(2 * y),
            du=lambda y: 2 * np.exp(2 * y),
            d2u=lambda y: 4 * np.exp(2 * y),
            p=lambda y: -2 * y * np.exp(2 * y),
            dp=lambda y: -2 * np.exp(2 * y) - 4 * y * np.exp(2 * y),
        ),
        # Switch points belong to the segment listed first: at x = 2 on the
        # south edge a = 0 (boundary characteristic, nothing to prescribe);
        # at x = 1.5 on the north edge a = 0 and only a is needed.
        south=(
            EdgeSegment(1.0, 2.0, "none"),
            EdgeSegment(2.0, 2.5, "b", lambda x: y_lo / x),
        ),
        north=(
            EdgeSegment(1.5, 2.5, "a", lambda x: 1 + y_hi / x),
            EdgeSegment(1.0, 1.5, "strip", strip=north_strip),
        ),
        exact=exact,
        switch_points={"S": 2.0, "N": 1.5},
    )


BUILTINS: dict[str, Callable[[], ProblemSpec]] = {
    "default": _default,
    "aggregated": _aggregated,
    "two-edge": _two_edge,
    "varying-bc": _varying_bc,
    "nonsmooth": _nonsmooth,
}


def builtin(name: str) -> ProblemSpec:
    """One of the five worked cases by name."""
    try:
        return BUILTINS[name]()
    except KeyError:
        raise ValueError(f"unknown builtin case {name!r}; choose from {sorted(BUILTINS)}") from None


def with_domain(spec: ProblemSpec, **bounds) -> ProblemSpec:
    """Copy of ``spec`` with some domain bounds replaced."""
    from dataclasses import replace

    d = spec.domain
    return replace(spec, domain=Domain(**{**d.__dict__, **bounds}))
