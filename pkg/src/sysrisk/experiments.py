"""Convergence experiments and phase-transition sweeps."""
from __future__ import annotations

import csv
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .analytic import binary_regime_solve
from .errors import SysRiskError
from .finance import default_metrics, solve_clearing, solve_limit_clearing, with_connectivity
from .graph import derive_seeds, sample_network
from .model import Scenario

JUMP_THRESHOLD = 0.01
REFINE_TOL = 1e-6


def worker_count(requested=None):
    if requested is not None:
        return max(1, int(requested))
    env = os.environ.get("SYSRISK_THREADS")
    return max(1, int(env)) if env else 1


def _pool_map(fn, items, workers):
    if workers <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


# -- convergence ----------------------------------------------------------------


@dataclass
class ConvergenceCell:
    n: int
    seed: int
    sup_error_agg: float = float("nan")
    err_agg_big: float = float("nan")
    err_big: float = float("nan")
    default_frac: float = float("nan")
    default_frac_err: float = float("nan")
    error: str | None = None


@dataclass
class ConvergenceReport:
    n_values: list
    seeds: list
    cells: list
    limit: dict
    summary: dict = field(default_factory=dict)

    def median(self, n, attr):
        vals = [getattr(c, attr) for c in self.cells if c.n == n and c.error is None]
        return float(np.median(vals)) if vals else float("nan")


def _convergence_cell(task):
    vp, scenario, n, seed, limit = task
    cell = ConvergenceCell(n=n, seed=seed)
    try:
        net = sample_network(vp.with_params(n=n), seed)
        cv = solve_clearing(net, vp, scenario)
    except SysRiskError as exc:
        cell.error = str(exc)
        return cell
    cell.sup_error_agg = float(np.max(np.abs(cv.agg_small - limit["xbar_s"])))
    cell.err_agg_big = abs(cv.agg_big - limit["xbar_b"])
    cell.err_big = abs(cv.x_big - limit["x_big"])
    cell.default_frac = cv.default_fraction
    cell.default_frac_err = abs(cv.default_fraction - limit["p_d_small"])
    return cell


def run_convergence(vp, scenario, n_list, seeds, workers=None):
    """Solve sampled finite economies and measure the gap to the limit solution.

    ``seeds`` is either a list of seeds used for every n or an int root seed
    from which 20 child seeds are derived.
    """
    n_list = [int(n) for n in n_list]
    if n_list != sorted(n_list):
        raise ValueError("n_list must be increasing")
    if isinstance(seeds, int):
        seeds = derive_seeds(seeds, 20)
    seeds = [int(s) for s in seeds]
    sol = solve_limit_clearing(vp, scenario)
    metrics = default_metrics(sol, vp, scenario)
    limit = {
        "xbar_s": sol.xbar_s,
        "xbar_b": sol.xbar_b,
        "x_big": sol.x_big,
        "p_d_small": metrics.p_d_small,
    }
    tasks = [(vp, scenario, n, s, limit) for n in n_list for s in seeds]
    cells = _pool_map(_convergence_cell, tasks, worker_count(workers))
    report = ConvergenceReport(n_values=n_list, seeds=seeds, cells=cells, limit=limit)
    for n in n_list:
        report.summary[n] = {
            attr: report.median(n, attr)
            for attr in ("sup_error_agg", "err_agg_big", "err_big", "default_frac", "default_frac_err")
        }
    return report


def write_convergence_csv(report, path):
    cols = ["n", "seed", "sup_error_agg", "err_agg_big", "err_big", "default_frac", "default_frac_err", "error"]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(cols)
        for c in report.cells:
            writer.writerow([getattr(c, k) if getattr(c, k) is not None else "" for k in cols])


# -- connectivity sweep ---------------------------------------------------------


@dataclass
class CurvePoint:
    p_bs: float
    p_d_small: float
    big_defaults: bool
    xbar: float
    regime: int | None = None
    analytic_p_d: float | None = None
    analytic_xbar: float | None = None
    analytic_applicable: bool = False
    error: str | None = None


@dataclass
class Jump:
    location: float
    size: float
    before: float
    after: float


@dataclass
class PhaseCurve:
    axis: str
    grid: list
    points: list
    jumps: list


def _numeric_pd(vp, scenario, p_bs):
    v = with_connectivity(vp, p_bs)
    sol = solve_limit_clearing(v, scenario)
    return sol, default_metrics(sol, v, scenario)


def curve_point(vp, scenario, p_bs):
    try:
        sol, m = _numeric_pd(vp, scenario, p_bs)
    except SysRiskError as exc:
        return CurvePoint(p_bs, float("nan"), False, float("nan"), error=str(exc))
    point = CurvePoint(p_bs, m.p_d_small, bool(m.big_defaults), sol.xbar_s)
    try:
        r = binary_regime_solve(vp, scenario, p_bs)
    except SysRiskError:
        return point
    point.regime = r.regime
    point.analytic_p_d = r.p_d_small
    point.analytic_xbar = r.xbar
    point.analytic_applicable = r.applicable
    return point


def refine_jump(vp, scenario, lo, hi, pd_lo, pd_hi, tol=REFINE_TOL):
    """Bisect a bracket [lo, hi] whose ends have different default levels."""
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        pd_mid = _numeric_pd(vp, scenario, mid)[1].p_d_small
        if abs(pd_mid - pd_lo) <= abs(pd_mid - pd_hi):
            lo, pd_lo = mid, pd_mid
        else:
            hi, pd_hi = mid, pd_mid
    return Jump(location=hi, size=abs(pd_hi - pd_lo), before=pd_lo, after=pd_hi)


def sweep_pbs(vp, scenario, grid, threshold=JUMP_THRESHOLD, refine_tol=REFINE_TOL):
    """Default fraction along the connectivity parameter, with detected jumps.

    Grid steps whose change exceeds ``threshold`` are bisected. The default
    fraction has slope at most 1 in p_bs between jumps, so a bracket that
    shrinks to a change of order ``refine_tol`` was a steep continuous stretch
    and is dropped.
    """
    grid = [float(p) for p in grid]
    points = [curve_point(vp, scenario, p) for p in grid]
    jumps = []
    for a, b in zip(points, points[1:]):
        if a.error or b.error:
            continue
        if abs(b.p_d_small - a.p_d_small) > threshold:
            jump = refine_jump(vp, scenario, a.p_bs, b.p_bs, a.p_d_small, b.p_d_small, refine_tol)
            if jump.size > 100 * refine_tol:
                jumps.append(jump)
    return PhaseCurve(axis="p_bs", grid=grid, points=points, jumps=jumps)


def write_curve_csv(curve, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([curve.axis, "p_d_small", "regime", "xbar", "big_defaults"])
        for pt in curve.points:
            writer.writerow([pt.p_bs, pt.p_d_small, "" if pt.regime is None else pt.regime, pt.xbar, int(pt.big_defaults)])


# -- shock surface -------------------------------------------------------------


@dataclass
class PhaseSurface:
    zb_grid: np.ndarray
    zc_grid: np.ndarray
    p_d_small: np.ndarray
    big_defaults: np.ndarray
    xbar: np.ndarray

    def levels(self, decimals=9):
        return sorted(set(np.round(self.p_d_small[np.isfinite(self.p_d_small)], decimals).tolist()))

    def small_transitions(self, axis, index, tol=1e-9):
        """Default levels crossed along one grid line.

        ``axis="zc"`` walks z_c at fixed ``zb_grid[index]``; ``axis="zb"``
        walks z_b at fixed ``zc_grid[index]``. Returns ``(from, to, at)``.
        """
        if axis == "zc":
            line, coords = self.p_d_small[index, :], self.zc_grid
        else:
            line, coords = self.p_d_small[:, index], self.zb_grid
        out = []
        for k in range(1, len(line)):
            if abs(line[k] - line[k - 1]) > tol:
                out.append((float(line[k - 1]), float(line[k]), float(coords[k])))
        return out

    def contours(self):
        """Grid edges across which the small or big default state changes."""
        edges = {"small": [], "big": []}
        pd, bd = self.p_d_small, self.big_defaults
        for i in range(len(self.zb_grid)):
            for j in range(len(self.zc_grid)):
                for di, dj in ((1, 0), (0, 1)):
                    a, b = i + di, j + dj
                    if a >= len(self.zb_grid) or b >= len(self.zc_grid):
                        continue
                    if abs(pd[i, j] - pd[a, b]) > 1e-9:
                        edges["small"].append(((i, j), (a, b)))
                    if bd[i, j] != bd[a, b]:
                        edges["big"].append(((i, j), (a, b)))
        return edges


def _surface_row(task):
    vp, zb, zc_grid = task
    row = []
    for zc in zc_grid:
        sc = Scenario(z_c=float(zc), z_b=float(zb))
        try:
            sol = solve_limit_clearing(vp, sc)
            m = default_metrics(sol, vp, sc)
            row.append((m.p_d_small, bool(m.big_defaults), sol.xbar_s))
        except SysRiskError:
            row.append((float("nan"), False, float("nan")))
    return row


def sweep_shocks(vp, p_bs, zb_grid, zc_grid, workers=None):
    """Limit default state over a grid of (big-bank shock, common shock)."""
    v = with_connectivity(vp, p_bs) if p_bs is not None else vp
    zb_grid = np.asarray(zb_grid, dtype=float)
    zc_grid = np.asarray(zc_grid, dtype=float)
    rows = _pool_map(_surface_row, [(v, zb, zc_grid) for zb in zb_grid], worker_count(workers))
    arr = np.array(rows, dtype=object)
    return PhaseSurface(
        zb_grid=zb_grid,
        zc_grid=zc_grid,
        p_d_small=arr[:, :, 0].astype(float),
        big_defaults=arr[:, :, 1].astype(bool),
        xbar=arr[:, :, 2].astype(float),
    )


def write_surface_csv(surface, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["z_b", "z_c", "p_d_small", "big_defaults"])
        for i, zb in enumerate(surface.zb_grid):
            for j, zc in enumerate(surface.zc_grid):
                writer.writerow([zb, zc, surface.p_d_small[i, j], int(surface.big_defaults[i, j])])


def write_summary_json(payload, path):
    Path(path).write_text(json.dumps(payload, indent=2, default=_json_default) + "\n")


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if hasattr(obj, "__dataclass_fields__"):
        return asdict(obj)
    raise TypeError(f"cannot serialise {type(obj).__name__}")
