"""Boundary classification and extension of Cauchy data to second order.

A characteristic family *enters* at a boundary point when its tangent points
into the domain, *leaves* when it points out, and is a *boundary*
characteristic when tangent to the edge; boundary characteristics are handled
like leaving ones. Each entering family needs one prescribed quantity.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from . import bspline
from .problem import ProblemSpec, VerticalStrip

STRIP_TOL = 1e-12

NORMALS = {"W": (-1.0, 0.0), "E": (1.0, 0.0), "S": (0.0, -1.0), "N": (0.0, 1.0)}


class Crossing(enum.Enum):
    ENTERING = "entering"
    LEAVING = "leaving"
    BOUNDARY = "boundary"

    @property
    def enters(self) -> bool:
        return self is Crossing.ENTERING


@dataclass(frozen=True)
class EdgeClassification:
    edge: str | None
    alpha: Crossing
    beta: Crossing

    @property
    def required_conditions(self) -> int:
        return int(self.alpha.enters) + int(self.beta.enters)

    @property
    def prescribe(self) -> tuple[str, ...]:
        """Slopes that must come from boundary data.

        An entering alpha characteristic leaves beta arriving from the
        interior with ``a`` known, so ``b`` is missing, and vice versa.
        """
        missing = []
        if self.beta.enters:
            missing.append("a")
        if self.alpha.enters:
            missing.append("b")
        return tuple(missing)


def _crossing(tangent, normal) -> Crossing:
    dot = float(np.dot(tangent, normal))
    if dot > 0:
        return Crossing.LEAVING
    if dot < 0:
        return Crossing.ENTERING
    return Crossing.BOUNDARY


def classify(tangent_alpha, tangent_beta, normal) -> EdgeClassification:
    """Classify both families against an outward unit ``normal``."""
    normal = tuple(float(c) for c in normal)
    edge = next((k for k, v in NORMALS.items() if v == normal), None)
    if edge is None:
        raise ValueError(f"normal must be axis aligned, got {normal}")
    return EdgeClassification(edge, _crossing(tangent_alpha, normal), _crossing(tangent_beta, normal))


def classify_point(a: float, b: float, edge: str) -> EdgeClassification:
    """Classification at an edge point given the local slopes a and b."""
    return classify((1.0, a), (1.0, b), NORMALS[edge])


def classification_table(spec: ProblemSpec) -> list[tuple[str, float, float, EdgeClassification]]:
    """Classify the exact slopes at the midpoint of every edge sub-segment.

    Sub-segments of S and N are delimited by ``spec.switch_points``.
    """
    ex = spec.require_exact()
    d = spec.domain
    rows = []

    def add(label, edge, x, y):
        rows.append((label, x, y, classify_point(float(ex.a(x, y)), float(ex.b(x, y)), edge)))

    y_mid = 0.5 * (d.y_min + d.y_max)
    add("W", "W", d.x_min, y_mid)
    for edge, y in (("S", d.y_min), ("N", d.y_max)):
        cut = spec.switch_points.get(edge)
        if cut is None:
            add(edge, edge, 0.5 * (d.x_min + d.x_max), y)
        else:
            add(f"{edge}-left", edge, 0.5 * (d.x_min + cut), y)
            add(f"{edge}-right", edge, 0.5 * (cut + d.x_max), y)
    add("E", "E", d.x_max, y_mid)
    return rows


@dataclass(frozen=True)
class StripExtension:
    """Second-order data along a boundary line (nodes in y or in x)."""

    nodes: np.ndarray
    u: np.ndarray
    p: np.ndarray
    q: np.ndarray
    r: np.ndarray
    s: np.ndarray
    t: np.ndarray
    a: np.ndarray
    b: np.ndarray
    f: np.ndarray

    def defect(self) -> np.ndarray:
        return self.r * self.t - self.s**2 + self.f**2


def extend_vertical_strip(strip: VerticalStrip, f_line, nodes) -> StripExtension:
    """Complete u, p on a line x = const to q, r, s, t, a, b.

    ``f_line`` is f restricted to the line, as a function of y.
    """
    y = np.asarray(nodes, float)
    t = np.asarray(strip.d2u(y), float) * np.ones_like(y)
    if np.any(np.abs(t) < STRIP_TOL):
        raise ValueError("initial strip not free (t = 0)")
    fw = np.asarray(f_line(y), float) * np.ones_like(y)
    s = np.asarray(strip.dp(y), float) * np.ones_like(y)
    a = (-s + fw) / t
    b = (-s - fw) / t
    r = 2 * a * b / (a - b) * fw
    return StripExtension(
        nodes=y,
        u=np.asarray(strip.u(y), float) * np.ones_like(y),
        p=np.asarray(strip.p(y), float) * np.ones_like(y),
        q=np.asarray(strip.du(y), float) * np.ones_like(y),
        r=r,
        s=s,
        t=t,
        a=a,
        b=b,
        f=fw,
    )


def extend_horizontal_strip(strip, f_line, nodes) -> StripExtension:
    """Complete u, q on a line y = const to p, r, s, t, a, b."""
    x = np.asarray(nodes, float)
    r = np.asarray(strip.d2u(x), float) * np.ones_like(x)
    if np.any(np.abs(r) < STRIP_TOL):
        raise ValueError("horizontal strip not free (r = 0)")
    fe = np.asarray(f_line(x), float) * np.ones_like(x)
    s = np.asarray(strip.dq(x), float) * np.ones_like(x)
    a = -r / (s + fe)
    b = -r / (s - fe)
    t = 2 * fe / (a - b)
    return StripExtension(
        nodes=x,
        u=np.asarray(strip.u(x), float) * np.ones_like(x),
        p=np.asarray(strip.du(x), float) * np.ones_like(x),
        q=np.asarray(strip.q(x), float) * np.ones_like(x),
        r=r,
        s=s,
        t=t,
        a=a,
        b=b,
        f=fe,
    )


def slope_from_prescription(known_slope, kind: str, value, f, missing: str = "a"):
    """Missing characteristic slope from one prescribed second-order quantity.

    ``kind`` is one of ``"a"``, ``"b"``, ``"r"``, ``"s"``, ``"t"``. When the
    missing slope itself is prescribed it is returned unchanged. Otherwise
    ``known_slope`` is the slope of the other family and the relations
    r = 2ab f/(a-b), s = -(a+b) f/(a-b), t = 2f/(a-b) are inverted.
    """
    if missing not in ("a", "b"):
        raise ValueError(f"missing slope must be 'a' or 'b', got {missing!r}")
    if kind == missing:
        return value
    k, v, f = known_slope, value, f
    with np.errstate(divide="ignore", invalid="ignore"):
        if missing == "a":
            forms = {
                "r": (k * v, v - 2 * k * f),
                "s": ((v - f) * k, v + f),
                "t": (k * v + 2 * f, v),
            }
        else:
            forms = {
                "r": (k * v, v + 2 * k * f),
                "s": ((v + f) * k, v - f),
                "t": (k * v - 2 * f, v),
            }
        if kind not in forms:
            raise ValueError(f"cannot recover {missing} from prescribed {kind!r}")
        num, den = forms[kind]
        if np.any(np.asarray(den) == 0):
            raise ValueError("degenerate prescription")
        return num / den


def strip_from_samples(y, u_samples, p_samples, order: int = 6) -> VerticalStrip:
    """Vertical Cauchy data from samples, derivatives by spline differentiation.

    Order 6 (quintic) keeps the strip at least as accurate as the best
    marching scheme.
    """
    su = bspline.fit(y, u_samples, order)
    sp = bspline.fit(y, p_samples, order)
    du = su.derivative()
    d2u = du.derivative()
    dp = sp.derivative()
    return VerticalStrip(u=su, du=du, d2u=d2u, p=sp, dp=dp)
