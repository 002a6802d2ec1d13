"""Integral-form residual of a computed field.

The Monge-Ampere equation can be written as a line integral around any
control cell A:

    contour of H_k . dl  =  double integral of f**2 over A,    k = 1, 2

with H_1 = -p (s, t) and H_2 = q (r, s). Expressed through the
characteristic slopes, H_k needs only (p, q, a, b, f), so the residual is
computed without second derivatives. H_2 - H_1 = grad(p q) is a gradient,
which gives a PDE-independent consistency check.

Cells are centred on the interior grid points; cell edges sit at the
midpoints between neighbouring grid lines. Cell indices in this module are
1-based, matching the i = 2..N_x-1, j = 2..N_y-1 range of interior cells.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from . import bspline

HYPERBOLIC_TOL = 1e-12
DEFAULT_POINTS = 3
DEFAULT_ORDER = 5

# Gauss-Legendre nodes and weights on [-1, 1], closed forms.
_S35 = np.sqrt(3 / 5)
_GL = {
    1: ([0.0], [2.0]),
    2: ([-1 / np.sqrt(3), 1 / np.sqrt(3)], [1.0, 1.0]),
    3: ([-_S35, 0.0, _S35], [5 / 9, 8 / 9, 5 / 9]),
    4: (
        [
            -np.sqrt(3 / 7 + 2 / 7 * np.sqrt(6 / 5)),
            -np.sqrt(3 / 7 - 2 / 7 * np.sqrt(6 / 5)),
            np.sqrt(3 / 7 - 2 / 7 * np.sqrt(6 / 5)),
            np.sqrt(3 / 7 + 2 / 7 * np.sqrt(6 / 5)),
        ],
        [
            (18 - np.sqrt(30)) / 36,
            (18 + np.sqrt(30)) / 36,
            (18 + np.sqrt(30)) / 36,
            (18 - np.sqrt(30)) / 36,
        ],
    ),
    5: (
        [
            -np.sqrt(5 + 2 * np.sqrt(10 / 7)) / 3,
            -np.sqrt(5 - 2 * np.sqrt(10 / 7)) / 3,
            0.0,
            np.sqrt(5 - 2 * np.sqrt(10 / 7)) / 3,
            np.sqrt(5 + 2 * np.sqrt(10 / 7)) / 3,
        ],
        [
            (322 - 13 * np.sqrt(70)) / 900,
            (322 + 13 * np.sqrt(70)) / 900,
            128 / 225,
            (322 + 13 * np.sqrt(70)) / 900,
            (322 - 13 * np.sqrt(70)) / 900,
        ],
    ),
}


def gauss_nodes(n: int = DEFAULT_POINTS) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of the ``n``-point rule on [-1, 1], n in 1..5."""
    if n not in _GL:
        raise ValueError(f"Gauss-Legendre rule with n={n} not available (use 1..5)")
    nodes, weights = _GL[n]
    return np.array(nodes), np.array(weights)


def gauss_legendre(g, z1: float, z2: float, n: int = DEFAULT_POINTS) -> float:
    """Integral of the vectorised callable ``g`` over [z1, z2]."""
    nodes, weights = gauss_nodes(n)
    half = 0.5 * (z2 - z1)
    mid = 0.5 * (z1 + z2)
    return float(half * np.sum(weights * np.asarray(g(mid + half * nodes), float)))


def _mapped_nodes(lo, hi, n):
    # Gauss nodes for each interval [lo_c, hi_c]: shape (cells, n), plus weights.
    nodes, weights = gauss_nodes(n)
    lo = np.asarray(lo, float)[:, None]
    hi = np.asarray(hi, float)[:, None]
    half = 0.5 * (hi - lo)
    return 0.5 * (lo + hi) + half * nodes, half * weights


def h_fields(p, q, a, b, f) -> tuple[np.ndarray, np.ndarray]:
    """H_1 and H_2, each stacked as an array of shape (2, ...)."""
    p, q, a, b, f = np.broadcast_arrays(*(np.asarray(v, float) for v in (p, q, a, b, f)))
    d = a - b
    if np.any(np.abs(d) < HYPERBOLIC_TOL):
        raise ValueError("hyperbolicity lost in residual evaluation")
    c1 = p * f / d
    c2 = q * f / d
    return np.stack([c1 * (a + b), -2 * c1]), np.stack([c2 * 2 * a * b, -c2 * (a + b)])


def half_points(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, float)
    return 0.5 * (z[1:] + z[:-1])


@dataclass(frozen=True)
class CellGeometry:
    """Edges, areas and Gauss nodes of all interior cells of an x-y grid."""

    x: np.ndarray
    y: np.ndarray
    n: int

    def __post_init__(self):
        if self.x.size < 3 or self.y.size < 3:
            raise ValueError("need at least three grid lines in each direction for interior cells")

    @property
    def x_half(self) -> np.ndarray:
        return half_points(self.x)

    @property
    def y_half(self) -> np.ndarray:
        return half_points(self.y)

    @property
    def widths(self) -> tuple[np.ndarray, np.ndarray]:
        return np.diff(self.x_half), np.diff(self.y_half)

    def area(self) -> np.ndarray:
        wx, wy = self.widths
        return np.outer(wx, wy)

    def x_nodes(self):
        xh = self.x_half
        return _mapped_nodes(xh[:-1], xh[1:], self.n)

    def y_nodes(self):
        yh = self.y_half
        return _mapped_nodes(yh[:-1], yh[1:], self.n)


def _fit_eval(t, values, at, order):
    return bspline.fit(t, values, order)(at)


def contour_integrals(x, y, gx, gy, n: int = DEFAULT_POINTS, order: int = DEFAULT_ORDER) -> np.ndarray:
    """Counter-clockwise line integral of (gx, gy) around every interior cell.

    ``gx`` and ``gy`` hold the vector field at the grid points, shape
    (N_x, N_y). Edge integrands come from separable splines of ``order``:
    for the west/east edges first along x to the half abscissae, then along
    y; for the south/north edges the other way round. Returns
    (N_x - 2, N_y - 2) values, i.e. the sum I_N + I_S + I_W + I_E.
    """
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    geo = CellGeometry(x, y, n)
    gx = np.asarray(gx, float)
    gy = np.asarray(gy, float)

    # West/east: gy on the vertical lines x_{i +- 1/2}.
    gy_half = _fit_eval(x, gy, geo.x_half, order)  # (N_x-1, N_y)
    yn, yw = geo.y_nodes()  # (N_y-2, n)
    gy_nodes = _fit_eval(y, gy_half.T, yn.ravel(), order).reshape(yn.shape + (x.size - 1,))
    vertical = np.einsum("jn,jni->ij", yw, gy_nodes)  # (N_x-1, N_y-2)
    i_west = -vertical[:-1]
    i_east = vertical[1:]

    # South/north: gx on the horizontal lines y_{j +- 1/2}.
    gx_half = _fit_eval(y, gx.T, geo.y_half, order)  # (N_y-1, N_x)
    xn, xw = geo.x_nodes()  # (N_x-2, n)
    gx_nodes = _fit_eval(x, gx_half.T, xn.ravel(), order).reshape(xn.shape + (y.size - 1,))
    horizontal = np.einsum("in,inj->ij", xw, gx_nodes)  # (N_x-2, N_y-1)
    i_south = horizontal[:, :-1]
    i_north = -horizontal[:, 1:]

    return i_north + i_south + i_west + i_east


def area_integrals(x, y, g, n: int = DEFAULT_POINTS) -> np.ndarray:
    """Iterated Gauss-Legendre integral of g(x, y) over every interior cell."""
    geo = CellGeometry(np.asarray(x, float), np.asarray(y, float), n)
    xn, xw = geo.x_nodes()
    yn, yw = geo.y_nodes()
    X, Y = np.meshgrid(xn.ravel(), yn.ravel(), indexing="ij")
    vals = np.asarray(g(X, Y), float).reshape(xn.shape + yn.shape)
    return np.einsum("in,jm,injm->ij", xw, yw, vals)


@dataclass(frozen=True)
class ResidualMap:
    """Area-normalised residuals of all interior cells.

    ``eps1[i - 2, j - 2]`` belongs to the 1-based cell (i, j).
    """

    x: np.ndarray
    y: np.ndarray
    eps1: np.ndarray
    eps2: np.ndarray

    @property
    def max_eps1(self) -> float:
        return float(np.max(self.eps1))

    @property
    def max_eps2(self) -> float:
        return float(np.max(self.eps2))

    def cell(self, i: int, j: int, k: int = 1) -> float:
        n_x, n_y = self.x.size, self.y.size
        if not (2 <= i <= n_x - 1 and 2 <= j <= n_y - 1):
            raise IndexError(f"cell ({i}, {j}) is not interior (2..{n_x - 1}, 2..{n_y - 1})")
        if k not in (1, 2):
            raise ValueError(f"k must be 1 or 2, got {k}")
        return float((self.eps1 if k == 1 else self.eps2)[i - 2, j - 2])

    def argmax(self, k: int = 1) -> tuple[int, int]:
        """1-based indices of the cell with the largest residual."""
        eps = self.eps1 if k == 1 else self.eps2
        i, j = np.unravel_index(int(np.argmax(eps)), eps.shape)
        return int(i) + 2, int(j) + 2

    def center(self, i: int, j: int) -> tuple[float, float]:
        return float(self.x[i - 1]), float(self.y[j - 1])

    def rows(self):
        """(i, j, x_center, y_center, eps1, eps2) for every interior cell."""
        for ii in range(self.eps1.shape[0]):
            for jj in range(self.eps1.shape[1]):
                yield ii + 2, jj + 2, self.x[ii + 1], self.y[jj + 1], self.eps1[ii, jj], self.eps2[ii, jj]

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["i", "j", "x_center", "y_center", "eps1", "eps2"])
            for i, j, xc, yc, e1, e2 in self.rows():
                w.writerow([i, j, f"{xc:.17g}", f"{yc:.17g}", f"{e1:.17g}", f"{e2:.17g}"])


def _grid_h(field, f):
    X, Y = np.meshgrid(field.x, field.y, indexing="ij")
    return h_fields(field.p, field.q, field.a, field.b, f(X, Y))


def residual_map(field, f, n: int = DEFAULT_POINTS, order: int = DEFAULT_ORDER) -> ResidualMap:
    """epsilon_1 and epsilon_2 on every interior cell of ``field``.

    ``f`` is the right-hand side function f(x, y) (usually ``problem.f``).
    """
    geo = CellGeometry(np.asarray(field.x, float), np.asarray(field.y, float), n)
    h1, h2 = _grid_h(field, f)
    source = area_integrals(geo.x, geo.y, lambda X, Y: np.asarray(f(X, Y)) ** 2, n)
    area = geo.area()
    eps = [np.abs(contour_integrals(geo.x, geo.y, h[0], h[1], n, order) - source) / area for h in (h1, h2)]
    return ResidualMap(geo.x, geo.y, eps[0], eps[1])


def cell_residual(field, f, i: int, j: int, k: int = 1, n: int = DEFAULT_POINTS, order: int = DEFAULT_ORDER) -> float:
    """epsilon_k of the single 1-based interior cell (i, j)."""
    n_x, n_y = len(field.x), len(field.y)
    if not (2 <= i <= n_x - 1 and 2 <= j <= n_y - 1):
        raise IndexError(f"cell ({i}, {j}) is not interior (2..{n_x - 1}, 2..{n_y - 1})")
    return residual_map(field, f, n, order).cell(i, j, k)


def conservative_map(field, f, n: int = DEFAULT_POINTS, order: int = DEFAULT_ORDER) -> np.ndarray:
    """|contour of (p grad q + q grad p)| / |A| on all interior cells."""
    geo = CellGeometry(np.asarray(field.x, float), np.asarray(field.y, float), n)
    h1, h2 = _grid_h(field, f)
    g = h2 - h1
    return np.abs(contour_integrals(geo.x, geo.y, g[0], g[1], n, order)) / geo.area()


def conservative_identity(field, f, i: int, j: int, n: int = DEFAULT_POINTS, order: int = DEFAULT_ORDER) -> float:
    n_x, n_y = len(field.x), len(field.y)
    if not (2 <= i <= n_x - 1 and 2 <= j <= n_y - 1):
        raise IndexError(f"cell ({i}, {j}) is not interior (2..{n_x - 1}, 2..{n_y - 1})")
    return float(conservative_map(field, f, n, order)[i - 2, j - 2])
