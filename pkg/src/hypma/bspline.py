"""One-dimensional B-spline interpolation with averaged knot placement.

Splines are parameterised by their *order* k (degree k - 1): order 2 is
piecewise linear, order 4 cubic. Knots are placed with the running-average
rule, which satisfies the Schoenberg-Whitney conditions for any strictly
increasing abscissae, so the collocation system always has a unique solution.

Evaluation outside the data range continues the first/last polynomial piece,
which is how the marching schemes extrapolate slopes past the domain edge.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgError, solve_banded

#: Abscissae closer than this (relative to the data range) are merged.
DEDUP_RTOL = 1e-12


def build_knots(t, order: int) -> np.ndarray:
    """Knot sequence for interpolation at ``t`` with splines of ``order``.

    The first and last ``order`` knots repeat the end abscissae; the
    ``m - order`` interior knots are running averages of ``order - 1``
    consecutive data points, skipping the first.

    >>> build_knots([1, 2, 4, 5, 7, 10], 3).tolist()
    [1.0, 1.0, 1.0, 3.0, 4.5, 6.0, 10.0, 10.0, 10.0]
    """
    t = np.asarray(t, dtype=float)
    if order < 2:
        raise ValueError(f"spline order must be at least 2, got {order}")
    m = t.size
    if m < order:
        raise ValueError(f"insufficient data for degree: {m} points, order {order}")
    if np.any(np.diff(t) < 0):
        raise ValueError("unsorted abscissae")
    window = np.ones(order - 1) / (order - 1)
    interior = np.convolve(t, window, mode="valid")[1 : m - order + 1]
    return np.concatenate([np.full(order, t[0]), interior, np.full(order, t[-1])])


def basis(k: int, n: int, x: float, knots) -> float:
    """Value of the degree-``n`` B-spline ``b_k^n`` at ``x`` (Cox-de Boor).

    Zero-width knot spans contribute nothing (the 0/0 terms are taken as 0).
    """
    knots = np.asarray(knots, dtype=float)
    if k < 0 or n < 0 or k + n + 1 >= knots.size:
        raise IndexError(f"basis index out of range: k={k}, n={n}, {knots.size} knots")
    return _cox_de_boor(k, n, float(x), knots)


def _cox_de_boor(k: int, n: int, x: float, xi: np.ndarray) -> float:
    if n == 0:
        return 1.0 if xi[k] <= x < xi[k + 1] else 0.0
    value = 0.0
    left = xi[k + n] - xi[k]
    if left > 0.0:
        value += (x - xi[k]) / left * _cox_de_boor(k, n - 1, x, xi)
    right = xi[k + n + 1] - xi[k + 1]
    if right > 0.0:
        value += (xi[k + n + 1] - x) / right * _cox_de_boor(k + 1, n - 1, x, xi)
    return value


def _find_span(knots: np.ndarray, degree: int, n_coef: int, x: np.ndarray) -> np.ndarray:
    # Index l with knots[l] <= x < knots[l+1], clamped to the valid polynomial
    # pieces so that points outside the range use the boundary piece.
    span = np.searchsorted(knots, x, side="right") - 1
    return np.clip(span, degree, n_coef - 1)


def _nonzero_basis(knots: np.ndarray, degree: int, span: np.ndarray, x: np.ndarray) -> np.ndarray:
    """The ``degree + 1`` basis values that may be nonzero on each span.

    Column r holds b_{span - degree + r}. Vectorised over ``x``.
    """
    npts = x.size
    values = np.zeros((npts, degree + 1))
    values[:, 0] = 1.0
    left = np.empty((npts, degree + 1))
    right = np.empty((npts, degree + 1))
    for j in range(1, degree + 1):
        left[:, j] = x - knots[span + 1 - j]
        right[:, j] = knots[span + j] - x
        saved = np.zeros(npts)
        for r in range(j):
            denom = right[:, r + 1] + left[:, j - r]
            temp = values[:, r] / denom
            values[:, r] = saved + right[:, r + 1] * temp
            saved = left[:, j - r] * temp
        values[:, j] = saved
    return values


def dedup(t, g, rtol: float = DEDUP_RTOL):
    """Sort by abscissa and drop points closer than ``rtol`` times the range.

    The first ordinate of each cluster is kept. Returns ``(t, g, crossed)``
    where ``crossed`` reports whether the input was not already increasing.
    """
    t = np.asarray(t, dtype=float)
    g = np.asarray(g, dtype=float)
    order = np.argsort(t, kind="stable")
    crossed = bool(np.any(np.diff(t) < 0))
    t = t[order]
    g = g[order]
    span = t[-1] - t[0] if t.size else 0.0
    if t.size > 1:
        keep = np.concatenate([[True], np.diff(t) > rtol * span])
        t = t[keep]
        g = g[keep]
    return t, g, crossed


@dataclass(frozen=True)
class Spline:
    """Interpolating B-spline; ``coefficients`` may carry trailing value axes."""

    order: int
    knots: np.ndarray
    coefficients: np.ndarray

    @property
    def degree(self) -> int:
        return self.order - 1

    @property
    def span(self) -> tuple[float, float]:
        return float(self.knots[0]), float(self.knots[-1])

    def basis_matrix(self, x) -> tuple[np.ndarray, np.ndarray]:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        n_coef = self.coefficients.shape[0]
        span = _find_span(self.knots, self.degree, n_coef, x)
        return span, _nonzero_basis(self.knots, self.degree, span, x)

    def __call__(self, x):
        scalar = np.ndim(x) == 0
        span, values = self.basis_matrix(x)
        idx = span[:, None] - self.degree + np.arange(self.order)
        coef = self.coefficients[idx]
        out = np.einsum("nr,nr...->n...", values, coef)
        return out[0] if scalar else out

    def derivative(self) -> Spline:
        """Spline of one order lower representing the first derivative."""
        if self.order < 2:
            raise ValueError("cannot differentiate a piecewise constant spline")
        k = self.degree
        xi = self.knots
        c = self.coefficients
        denom = xi[k + 1 : -1] - xi[1 : c.shape[0]]
        denom = denom.reshape((-1,) + (1,) * (c.ndim - 1))
        with np.errstate(divide="ignore", invalid="ignore"):
            dc = np.where(denom > 0, k * (c[1:] - c[:-1]) / denom, 0.0)
        return Spline(self.order - 1, xi[1:-1], dc)


def fit(t, g, order: int, *, deduplicate: bool = True) -> Spline:
    """Interpolate ``g`` (shape ``(m,)`` or ``(m, k)``) at abscissae ``t``.

    If fewer distinct points than ``order`` remain, the order is lowered to
    the number of points (but never below 2).
    """
    t = np.asarray(t, dtype=float)
    g = np.asarray(g, dtype=float)
    if t.ndim != 1 or g.shape[0] != t.size:
        raise ValueError("abscissae and ordinates must have matching length")
    if not np.all(np.isfinite(g)):
        raise ValueError("non-finite ordinates")
    if deduplicate:
        t, g, _ = dedup(t, g)
    elif np.any(np.diff(t) < 0):
        raise ValueError("unsorted abscissae")
    if t.size < 2:
        raise ValueError("insufficient data for degree: need at least two distinct points")
    order = min(order, t.size)
    knots = build_knots(t, order)
    degree = order - 1
    m = t.size
    span = _find_span(knots, degree, m, t)
    values = _nonzero_basis(knots, degree, span, t)

    # Banded storage for solve_banded: ab[degree + row - col, col] = A[row, col].
    ab = np.zeros((2 * degree + 1, m))
    rows = np.repeat(np.arange(m), order)
    cols = (span[:, None] - degree + np.arange(order)).ravel()
    ab[degree + rows - cols, cols] = values.ravel()
    try:
        coef = solve_banded((degree, degree), ab, g, check_finite=False)
    except (LinAlgError, ValueError) as exc:
        raise ValueError("collocation singular") from exc
    if not np.all(np.isfinite(coef)):
        raise ValueError("collocation singular")
    return Spline(order, knots, coef)


def interpolate(t, g, x, order: int):
    """Fit and evaluate in one call."""
    return fit(t, g, order)(x)
