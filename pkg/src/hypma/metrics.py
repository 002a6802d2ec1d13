"""Global error on the final grid line and convergence-order fitting."""

from __future__ import annotations

import csv
import multiprocessing as mp
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields
from typing import NamedTuple

import numpy as np

from .residual import residual_map
from .solver import DEFAULT_GAMMA, solve

VARIABLES = ("u", "p", "q", "a", "b")


class GlobalError(NamedTuple):
    """Final-line deviation; ``scaled`` carries the extra 1/N_y factor."""

    scaled: float
    unscaled: float


def global_error(field, exact, variable: str) -> GlobalError:
    """Max deviation from ``exact`` on the last grid line (x = x_max).

    ``scaled`` is max_j (1/N_y) |exact - computed|, ``unscaled`` the plain
    max. Orders quoted for the schemes refer to the unscaled value; the
    scaled one is exactly one order higher.
    """
    if exact is None:
        raise ValueError("exact solution unavailable for this problem")
    if variable not in VARIABLES:
        raise ValueError(f"unknown variable {variable!r}; choose from {VARIABLES}")
    x = float(field.x[-1])
    y = np.asarray(field.y, float)
    ref = getattr(exact, variable)(np.full_like(y, x), y)
    dev = np.max(np.abs(np.asarray(getattr(field, variable))[-1] - ref))
    return GlobalError(float(dev / y.size), float(dev))


@dataclass(frozen=True)
class ConvergenceEntry:
    n_y: int
    h_y: float
    E_u: float
    E_p: float
    E_q: float
    E_a: float
    E_b: float
    E_u_scaled: float
    E_p_scaled: float
    E_q_scaled: float
    E_a_scaled: float
    E_b_scaled: float
    eps1: float
    eps2: float
    n_x: int
    wall_time: float


COLUMNS = tuple(f.name for f in fields(ConvergenceEntry))
ERROR_COLUMNS = tuple(c for c in COLUMNS if c.startswith(("E_", "eps")))


class ConvergenceRecord:
    """Ordered results of a refinement study (h_y strictly decreasing)."""

    def __init__(self, entries=()):
        self.entries: list[ConvergenceEntry] = []
        for e in entries:
            self.append(e)

    def append(self, entry: ConvergenceEntry) -> None:
        if self.entries and not entry.h_y < self.entries[-1].h_y:
            raise ValueError("h_y must be strictly decreasing across entries")
        self.entries.append(entry)

    def __len__(self) -> int:
        return len(self.entries)

    def column(self, name: str) -> np.ndarray:
        if name not in COLUMNS:
            raise KeyError(f"unknown column {name!r}")
        return np.array([getattr(e, name) for e in self.entries], dtype=float)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(COLUMNS)
            for e in self.entries:
                w.writerow([_fmt(v) for v in asdict(e).values()])

    def orders(self, columns=ERROR_COLUMNS) -> dict[str, float | None]:
        """Fitted slope per column; None where a column has non-positive entries."""
        out = {}
        for c in columns:
            try:
                out[c] = fit_order(self, c)
            except ValueError:
                out[c] = None
        return out


def _fmt(v) -> str:
    return str(v) if isinstance(v, (int, np.integer)) else f"{v:.17g}"


def fit_slope(h, err) -> float:
    """Least-squares slope of log(err) against log(h)."""
    h = np.asarray(h, float)
    err = np.asarray(err, float)
    if h.size != err.size:
        raise ValueError("h and error lists differ in length")
    if h.size < 3:
        raise ValueError(f"need at least 3 entries to fit an order, got {h.size}")
    if not (np.all(np.isfinite(err)) and np.all(np.isfinite(h))):
        raise ValueError("non-finite error values")
    if np.any(err <= 0) or np.any(h <= 0):
        raise ValueError("cannot take log of non-positive error")
    slope, _ = np.polyfit(np.log(h), np.log(err), 1)
    return float(slope)


def fit_order(record: ConvergenceRecord, column: str) -> float:
    """Convergence order of ``column`` with respect to h_y."""
    return fit_slope(record.column("h_y"), record.column(column))


def measure(problem, n_y: int, method: str, spline_order=None, gamma: float = DEFAULT_GAMMA, **solve_kw):
    """Solve once and collect every error measure; returns (entry, field).

    Error columns are NaN when the problem has no exact solution.
    """
    start = time.perf_counter()
    field = solve(problem, n_y, method, spline_order, gamma, **solve_kw)
    wall = time.perf_counter() - start
    res = residual_map(field, problem.f) if field.n_x >= 3 else None
    errs = {}
    for v in VARIABLES:
        g = global_error(field, problem.exact, v) if problem.exact is not None else GlobalError(np.nan, np.nan)
        errs[f"E_{v}"] = g.unscaled
        errs[f"E_{v}_scaled"] = g.scaled
    entry = ConvergenceEntry(
        n_y=int(n_y),
        h_y=field.h_y,
        eps1=res.max_eps1 if res else np.nan,
        eps2=res.max_eps2 if res else np.nan,
        n_x=field.n_x,
        wall_time=wall,
        **errs,
    )
    return entry, field


# Problem specs hold closures and cannot be pickled; forked workers inherit
# the problem through this module global instead.
_SHARED_PROBLEM = None


def _measure_entry(args):
    n_y, method, order, gamma = args
    return measure(_SHARED_PROBLEM, n_y, method, order, gamma)[0]


def convergence_study(problem, n_ys, method: str, spline_order=None, gamma: float = DEFAULT_GAMMA, jobs: int = 1):
    """One solve per N_y (ascending); independent solves may run in ``jobs`` processes."""
    n_ys = [int(n) for n in n_ys]
    if len(n_ys) < 1 or any(b <= a for a, b in zip(n_ys, n_ys[1:])):
        raise ValueError("refinement list must be strictly ascending")
    global _SHARED_PROBLEM
    tasks = [(n, method, spline_order, gamma) for n in n_ys]
    _SHARED_PROBLEM = problem
    try:
        if jobs > 1 and "fork" in mp.get_all_start_methods():
            with ProcessPoolExecutor(max_workers=jobs, mp_context=mp.get_context("fork")) as pool:
                entries = list(pool.map(_measure_entry, tasks))
        else:
            entries = [_measure_entry(t) for t in tasks]
    finally:
        _SHARED_PROBLEM = None
    return ConvergenceRecord(entries)
