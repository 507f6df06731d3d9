"""Damped least-squares solving of truncated moment systems with multistart.

solve_single runs a Levenberg-Marquardt iteration on one start vector:
each step solves (J^T J + lambda I) delta = -J^T r, accepts the projected
candidate only on strict cost decrease (lambda halves), and quadruples
lambda on rejection.  Variables are projected into the normalized box domain
after every step, so the iteration can never wander off to non-finite
territory.

solve_multistart layers deterministic restarts on top and treats geometric
verification, not the residual, as the definition of success: every
converged candidate is polished, optionally snapped (coincident corner
coordinates merged to a common value), and handed to verify_layout; the
first verified start wins.  Reports are bitwise deterministic for a fixed
(instance, config, max_order, mode).
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, replace

import numpy as np

from . import moments as mo
from .instances import Instance, Layout, Placement, check_area
from .verify import verify_layout

__all__ = [
    "SolveConfig",
    "SolveReport",
    "init_shelf_greedy",
    "snap_layout",
    "solve_single",
    "solve_multistart",
]

LAMBDA_DECREASE = 0.5
LAMBDA_INCREASE = 4.0
LAMBDA_MIN = 1e-14
LAMBDA_MAX = 1e12
POLISH_MAX_ITERS = 40
_SEED_STRIDE = 1_000_003

_STRATEGIES = ("uniform_random", "shelf_greedy", "user_layout")


@dataclass(frozen=True)
class SolveConfig:
    max_iters: int = 500
    restarts: int = 64
    seed: int = 0
    residual_tol: float = 1e-10
    step_tol: float = 1e-12
    lm_lambda0: float = 1e-3
    init_strategy: str = "shelf_greedy"
    initial_layout: Layout | None = None
    verify_tol: float = 1e-7

    def validate(self) -> None:
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if self.residual_tol < 0 or self.step_tol < 0:
            raise ValueError("tolerances must be >= 0")
        if self.lm_lambda0 <= 0:
            raise ValueError("lm_lambda0 must be > 0")
        if self.init_strategy not in _STRATEGIES:
            raise ValueError(
                f"unknown init_strategy {self.init_strategy!r}; expected one of {_STRATEGIES}"
            )
        if self.init_strategy == "user_layout" and self.initial_layout is None:
            raise ValueError("init_strategy 'user_layout' needs initial_layout")


@dataclass(frozen=True)
class SolveReport:
    """status is converged_verified, converged_unverified, or exhausted;
    converged_verified always means the reported layout passed geometric
    verification."""

    status: str
    best_layout: Layout | None
    final_residual_inf: float
    iterations_total: int
    start_index: int
    wall_time_s: float
    reason: str | None = None

    def to_dict(self) -> dict:
        from .instances import _num_to_json

        layout = None
        if self.best_layout is not None:
            layout = {
                "placements": [
                    [_num_to_json(v) for v in p.as_tuple()]
                    for p in self.best_layout.placements
                ]
            }
        residual_inf = self.final_residual_inf
        return {
            "status": self.status,
            "reason": self.reason,
            "best_layout": layout,
            "final_residual_inf": residual_inf if math.isfinite(residual_inf) else None,
            "iterations_total": self.iterations_total,
            "start_index": self.start_index,
            "wall_time_s": self.wall_time_s,
        }


# -- Initialization ----------------------------------------------------------


def init_shelf_greedy(inst: Instance) -> Layout:
    """Shelf heuristic warm start: rectangles in decreasing height order,
    left to right, new shelf on horizontal overflow; placements are clamped
    inside the box and may overlap when the box is over-full."""
    a = float(inst.box.width)
    b = float(inst.box.height)
    n = inst.n_rects
    order = sorted(range(n), key=lambda i: (-float(inst.rects[i].height), i))
    placements: list[Placement | None] = [None] * n
    cur_x = 0.0
    shelf_y = 0.0
    shelf_h = 0.0
    for i in order:
        w = float(inst.rects[i].width)
        h = float(inst.rects[i].height)
        if cur_x > 0.0 and cur_x + w > a + 1e-12:
            shelf_y += shelf_h
            cur_x = 0.0
            shelf_h = 0.0
        x_lo = max(0.0, min(cur_x, a - w))
        y_lo = max(0.0, min(shelf_y, b - h))
        placements[i] = Placement(x_lo, y_lo, x_lo + w, y_lo + h)
        cur_x = x_lo + w
        shelf_h = max(shelf_h, h)
    return Layout(tuple(placements))


def _bounds(sys: mo.MomentSystem) -> tuple[np.ndarray, np.ndarray]:
    if sys.mode == mo.FIXED:
        ub = np.empty(sys.var_count)
        ub[0::2] = np.maximum(0.0, sys.box_w - sys.widths)
        ub[1::2] = np.maximum(0.0, sys.box_h - sys.heights)
    else:
        ub = np.empty(sys.var_count)
        ub[0::4] = sys.box_w
        ub[2::4] = sys.box_w
        ub[1::4] = sys.box_h
        ub[3::4] = sys.box_h
    return np.zeros(sys.var_count), ub


def _project(sys: mo.MomentSystem, x: np.ndarray, lb: np.ndarray, ub: np.ndarray) -> np.ndarray:
    out = np.clip(x, lb, ub)
    if sys.mode == mo.ROTATABLE:
        x_lo = np.minimum(out[0::4], out[2::4])
        x_hi = np.maximum(out[0::4], out[2::4])
        y_lo = np.minimum(out[1::4], out[3::4])
        y_hi = np.maximum(out[1::4], out[3::4])
        out[0::4], out[2::4] = x_lo, x_hi
        out[1::4], out[3::4] = y_lo, y_hi
    return out


def _start_vector(
    sys: mo.MomentSystem,
    inst: Instance,
    cfg: SolveConfig,
    start_index: int,
    lb: np.ndarray,
    ub: np.ndarray,
) -> np.ndarray:
    if start_index == 0 and cfg.init_strategy == "shelf_greedy":
        return _project(sys, mo.layout_to_vars(sys, init_shelf_greedy(inst)), lb, ub)
    if start_index == 0 and cfg.init_strategy == "user_layout":
        return _project(sys, mo.layout_to_vars(sys, cfg.initial_layout), lb, ub)
    rng = np.random.default_rng(cfg.seed * _SEED_STRIDE + start_index)
    if sys.mode == mo.FIXED:
        return lb + rng.uniform(size=sys.var_count) * (ub - lb)
    out = np.empty(sys.var_count)
    for i in range(sys.n_rects):
        w, h = sys.widths[i], sys.heights[i]
        if rng.integers(0, 2):
            w, h = h, w
        cx = rng.uniform(w / 2, sys.box_w - w / 2) if sys.box_w > w else sys.box_w / 2
        cy = rng.uniform(h / 2, sys.box_h - h / 2) if sys.box_h > h else sys.box_h / 2
        out[4 * i : 4 * i + 4] = (cx - w / 2, cy - h / 2, cx + w / 2, cy + h / 2)
    return _project(sys, out, lb, ub)


# -- Core iteration ----------------------------------------------------------


def solve_single(
    sys: mo.MomentSystem, x0: np.ndarray, cfg: SolveConfig | None = None
) -> tuple[np.ndarray, list[float]]:
    """Levenberg-Marquardt from one start; returns the final variable vector
    and the history of accepted residual 2-norms (monotone decreasing,
    starting at the initial cost)."""
    cfg = cfg or SolveConfig()
    cfg.validate()
    arr = np.asarray(x0, dtype=float)
    if arr.shape != (sys.var_count,):
        raise ValueError(
            f"start vector has shape {arr.shape}, expected ({sys.var_count},)"
        )
    lb, ub = _bounds(sys)
    x = _project(sys, arr.copy(), lb, ub)
    r = mo.residual(sys, x).stacked
    if not np.all(np.isfinite(r)):
        return x, [float("inf")]
    cost = float(np.linalg.norm(r))
    history = [cost]
    if float(np.max(np.abs(r))) <= cfg.residual_tol:
        return x, history
    lam = cfg.lm_lambda0
    eye = np.eye(sys.var_count)
    for _ in range(cfg.max_iters):
        jac = mo.jacobian(sys, x)
        grad = jac.T @ r
        hess = jac.T @ jac
        stepped = False
        step_norm = 0.0
        while True:
            try:
                delta = np.linalg.solve(hess + lam * eye, -grad)
            except np.linalg.LinAlgError:
                delta = np.linalg.lstsq(hess + lam * eye, -grad, rcond=None)[0]
            cand = _project(sys, x + delta, lb, ub)
            r_new = mo.residual(sys, cand).stacked
            if np.all(np.isfinite(r_new)):
                cost_new = float(np.linalg.norm(r_new))
            else:
                cost_new = float("inf")
            if cost_new < cost:
                step_norm = float(np.linalg.norm(cand - x))
                x, r, cost = cand, r_new, cost_new
                lam = max(lam * LAMBDA_DECREASE, LAMBDA_MIN)
                history.append(cost)
                stepped = True
                break
            lam *= LAMBDA_INCREASE
            if lam > LAMBDA_MAX:
                break
        if not stepped:
            break
        if float(np.max(np.abs(r))) <= cfg.residual_tol:
            break
        if step_norm <= cfg.step_tol:
            break
    return x, history


# -- Layout cleanup ----------------------------------------------------------


def _snap_values(values: list[float], anchors: tuple[float, ...], eps: float) -> dict[float, float]:
    mapping: dict[float, float] = {}
    ordered = sorted(set(values))
    group: list[float] = []

    def flush() -> None:
        if not group:
            return
        rep = None
        for anchor in anchors:
            if any(abs(v - anchor) <= eps for v in group):
                rep = anchor
                break
        if rep is None:
            rep = sum(group) / len(group)
        for v in group:
            mapping[v] = rep
        group.clear()

    for v in ordered:
        if group and v - group[-1] > eps:
            flush()
        group.append(v)
    flush()
    return mapping


def snap_layout(inst: Instance, layout: Layout, eps: float | None = None) -> Layout:
    """Merge corner coordinates that agree within eps (default
    0.3 * DEFAULT_TOL * scale) to a shared value, anchoring clusters that
    touch 0 or the box sides to those exact values.  Returns the input
    unchanged if snapping would collapse a rectangle."""
    a = float(inst.box.width)
    b = float(inst.box.height)
    scale = max(a, b)
    if eps is None:
        eps = 0.3 * 1e-7 * scale
    xs: list[float] = []
    ys: list[float] = []
    for p in layout.placements:
        xs.extend((float(p.x_lo), float(p.x_hi)))
        ys.extend((float(p.y_lo), float(p.y_hi)))
    x_map = _snap_values(xs, (0.0, a), eps)
    y_map = _snap_values(ys, (0.0, b), eps)
    placements = []
    for p in layout.placements:
        xl = x_map[float(p.x_lo)]
        xh = x_map[float(p.x_hi)]
        yl = y_map[float(p.y_lo)]
        yh = y_map[float(p.y_hi)]
        if xh <= xl or yh <= yl:
            return layout
        placements.append(Placement(xl, yl, xh, yh))
    return Layout(tuple(placements))


# -- Multistart driver -------------------------------------------------------


def solve_multistart(
    inst: Instance,
    cfg: SolveConfig | None = None,
    max_order: int | None = None,
    mode: str = mo.FIXED,
) -> SolveReport:
    """Deterministic multistart: start 0 follows the init strategy, later
    starts draw from per-index seeded generators.  A start counts as a
    success only when its polished layout passes geometric verification;
    ties go to the lowest start index.  Area-infeasible instances are
    rejected before any solving."""
    t0 = time.perf_counter()
    cfg = cfg or SolveConfig()
    cfg.validate()
    verdict = check_area(inst)
    if verdict.kind == "infeasible":
        return SolveReport(
            status="exhausted",
            best_layout=None,
            final_residual_inf=float("inf"),
            iterations_total=0,
            start_index=-1,
            wall_time_s=time.perf_counter() - t0,
            reason="area",
        )
    sys = mo.build_system(inst, max_order, mode)
    lb, ub = _bounds(sys)
    polish_cfg = replace(
        cfg, residual_tol=0.0, step_tol=1e-15, max_iters=POLISH_MAX_ITERS, lm_lambda0=1e-6
    )
    best_r = float("inf")
    best_idx = -1
    best_layout: Layout | None = None
    any_converged = False
    iterations = 0
    for k in range(cfg.restarts):
        x0 = _start_vector(sys, inst, cfg, k, lb, ub)
        x, hist = solve_single(sys, x0, cfg)
        iterations += max(0, len(hist) - 1)
        r_inf = mo.residual(sys, x).max_abs
        if r_inf <= cfg.residual_tol:
            any_converged = True
            x, hist = solve_single(sys, x, polish_cfg)
            iterations += max(0, len(hist) - 1)
            raw = mo.vars_to_layout(sys, x)
            for cand in (raw, snap_layout(inst, raw, eps=0.3 * cfg.verify_tol * sys.scale)):
                if verify_layout(inst, cand, tol=cfg.verify_tol).passed:
                    final_r = mo.residual(sys, mo.layout_to_vars(sys, cand)).max_abs
                    return SolveReport(
                        status="converged_verified",
                        best_layout=cand,
                        final_residual_inf=final_r,
                        iterations_total=iterations,
                        start_index=k,
                        wall_time_s=time.perf_counter() - t0,
                    )
            r_inf = mo.residual(sys, x).max_abs
            if r_inf < best_r:
                best_r, best_idx, best_layout = r_inf, k, raw
        elif r_inf < best_r:
            best_r, best_idx, best_layout = r_inf, k, mo.vars_to_layout(sys, x)
    return SolveReport(
        status="converged_unverified" if any_converged else "exhausted",
        best_layout=best_layout,
        final_residual_inf=best_r,
        iterations_total=iterations,
        start_index=best_idx,
        wall_time_s=time.perf_counter() - t0,
        reason="unverified" if any_converged else None,
    )
