"""Truncated moment systems over layout corner coordinates.

A layout that tiles the box makes every residual

    r(s1, s2) = sum_n ((x_hi_n)^s1 - (x_lo_n)^s1) * ((y_hi_n)^s2 - (y_lo_n)^s2)
                / (A^s1 * B^s2)  -  1

vanish for all exponent pairs 1 <= s1, s2 <= max_order.  This module builds
that polynomial system, evaluates residuals and the analytic Jacobian, and
maps between layouts and flat variable vectors.  All evaluation happens in
normalized coordinates (divided by scale = max(A, B)) so high-order moments
stay well conditioned; each equation is additionally divided by the box's own
moment A^s1 * B^s2, making every row O(1).

Two variable conventions:

* fixed_orientation: two variables per rectangle, (x_lo, y_lo); the upper
  corners are reconstructed from the given sides (x_hi = x_lo + w).
* rotatable: four variables per rectangle, (x_lo, y_lo, x_hi, y_hi), plus two
  constraint rows per rectangle,

      c1 = (dx + dy - w - h) / scale
      c2 = (dx*dy - w*h) / scale^2

  whose joint zero forces {dx, dy} = {w, h}, i.e. the placed sides match the
  given ones up to a 90-degree rotation.

Powers are computed by iterative multiplication (never a transcendental pow)
so results are reproducible bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .instances import Instance, Layout, Placement

FIXED = "fixed_orientation"
ROTATABLE = "rotatable"
_MODES = (FIXED, ROTATABLE)

__all__ = [
    "FIXED",
    "ROTATABLE",
    "MomentSystem",
    "ResidualVector",
    "default_max_order",
    "build_system",
    "residual",
    "jacobian",
    "layout_to_vars",
    "vars_to_layout",
]


def default_max_order(n_rects: int, mode: str) -> int:
    """Truncation default: max(3, ceil(sqrt(var_count)) + 1), which keeps the
    equation count (max_order^2) at or above the unknown count."""
    var_count = (2 if mode == FIXED else 4) * n_rects
    return max(3, math.isqrt(max(var_count - 1, 0)) + 2) if var_count else 3


@dataclass(frozen=True, eq=False)
class MomentSystem:
    """Immutable bundle of one instance's truncated moment equations."""

    instance: Instance
    max_order: int
    mode: str
    scale: float
    exponents: tuple[tuple[int, int], ...]
    var_count: int
    constraint_count: int
    widths: np.ndarray  # normalized given sides
    heights: np.ndarray
    box_w: float  # normalized box sides
    box_h: float
    denom: np.ndarray  # (max_order, max_order) box moments A^s1 * B^s2

    @property
    def n_rects(self) -> int:
        return len(self.instance.rects)

    @property
    def equation_count(self) -> int:
        return len(self.exponents) + self.constraint_count


@dataclass(frozen=True, eq=False)
class ResidualVector:
    moment_part: np.ndarray
    constraint_part: np.ndarray

    @property
    def stacked(self) -> np.ndarray:
        return np.concatenate([self.moment_part, self.constraint_part])

    @property
    def max_abs(self) -> float:
        return float(np.max(np.abs(self.stacked)))


def build_system(
    inst: Instance, max_order: int | None = None, mode: str = FIXED
) -> MomentSystem:
    if mode not in _MODES:
        raise ValueError(f"unknown mode {mode!r}; expected one of {_MODES}")
    if mode == ROTATABLE and not inst.rotation_allowed:
        raise ValueError("rotatable mode requires an instance with rotation allowed")
    n = inst.n_rects
    if max_order is None:
        max_order = default_max_order(n, mode)
    if max_order < 1:
        raise ValueError(f"max_order must be >= 1, got {max_order}")
    scale = float(max(inst.box.width, inst.box.height))
    widths = np.array([float(r.width) for r in inst.rects]) / scale
    heights = np.array([float(r.height) for r in inst.rects]) / scale
    box_w = float(inst.box.width) / scale
    box_h = float(inst.box.height) / scale
    pow_a = _scalar_powers(box_w, max_order)
    pow_b = _scalar_powers(box_h, max_order)
    denom = np.outer(pow_a[1:], pow_b[1:])
    exponents = tuple(
        (s1, s2) for s1 in range(1, max_order + 1) for s2 in range(1, max_order + 1)
    )
    var_count = (2 if mode == FIXED else 4) * n
    constraint_count = 0 if mode == FIXED else 2 * n
    return MomentSystem(
        instance=inst,
        max_order=max_order,
        mode=mode,
        scale=scale,
        exponents=exponents,
        var_count=var_count,
        constraint_count=constraint_count,
        widths=widths,
        heights=heights,
        box_w=box_w,
        box_h=box_h,
        denom=denom,
    )


def _scalar_powers(value: float, max_order: int) -> np.ndarray:
    out = np.empty(max_order + 1)
    out[0] = 1.0
    for s in range(1, max_order + 1):
        out[s] = out[s - 1] * value
    return out


def _power_table(values: np.ndarray, max_order: int) -> np.ndarray:
    """Rows 0..max_order of elementwise powers, built by repeated multiply."""
    table = np.empty((max_order + 1, values.shape[0]))
    table[0] = 1.0
    for s in range(1, max_order + 1):
        table[s] = table[s - 1] * values
    return table


def _check_vars(sys: MomentSystem, vars: np.ndarray) -> np.ndarray:
    arr = np.asarray(vars, dtype=float)
    if arr.shape != (sys.var_count,):
        raise ValueError(
            f"expected {sys.var_count} variables for mode {sys.mode}, got shape {arr.shape}"
        )
    if not np.all(np.isfinite(arr)):
        raise ValueError("variable vector contains non-finite entries")
    return arr


def _corners(
    sys: MomentSystem, arr: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    if sys.mode == FIXED:
        x_lo = arr[0::2]
        y_lo = arr[1::2]
        return x_lo, y_lo, x_lo + sys.widths, y_lo + sys.heights
    return arr[0::4], arr[1::4], arr[2::4], arr[3::4]


def residual(sys: MomentSystem, vars: np.ndarray) -> ResidualVector:
    """Evaluate all moment rows (and constraint rows in rotatable mode)."""
    arr = _check_vars(sys, vars)
    x_lo, y_lo, x_hi, y_hi = _corners(sys, arr)
    m = sys.max_order
    with np.errstate(over="ignore", invalid="ignore"):
        px = _power_table(x_hi, m)[1:] - _power_table(x_lo, m)[1:]
        qy = _power_table(y_hi, m)[1:] - _power_table(y_lo, m)[1:]
        moments = (px @ qy.T) / sys.denom - 1.0
        moment_part = moments.ravel()
        if sys.mode == FIXED:
            constraint_part = np.empty(0)
        else:
            dx = x_hi - x_lo
            dy = y_hi - y_lo
            c1 = dx + dy - (sys.widths + sys.heights)
            c2 = dx * dy - sys.widths * sys.heights
            constraint_part = np.empty(2 * sys.n_rects)
            constraint_part[0::2] = c1
            constraint_part[1::2] = c2
    return ResidualVector(moment_part, constraint_part)


def jacobian(sys: MomentSystem, vars: np.ndarray) -> np.ndarray:
    """Analytic Jacobian of the stacked residual, rows in residual order."""
    arr = _check_vars(sys, vars)
    x_lo, y_lo, x_hi, y_hi = _corners(sys, arr)
    m = sys.max_order
    n = sys.n_rects
    orders = np.arange(1, m + 1, dtype=float)[:, None]
    dflat = sys.denom.ravel()[:, None]
    with np.errstate(over="ignore", invalid="ignore"):
        pow_xlo = _power_table(x_lo, m)
        pow_xhi = _power_table(x_hi, m)
        pow_ylo = _power_table(y_lo, m)
        pow_yhi = _power_table(y_hi, m)
        px = pow_xhi[1:] - pow_xlo[1:]
        qy = pow_yhi[1:] - pow_ylo[1:]
        if sys.mode == FIXED:
            dpx = orders * (pow_xhi[:m] - pow_xlo[:m])
            dqy = orders * (pow_yhi[:m] - pow_ylo[:m])
            jac = np.zeros((m * m, 2 * n))
            jac[:, 0::2] = np.einsum("an,bn->abn", dpx, qy).reshape(m * m, n) / dflat
            jac[:, 1::2] = np.einsum("an,bn->abn", px, dqy).reshape(m * m, n) / dflat
            return jac
        d_xlo = -orders * pow_xlo[:m]
        d_xhi = orders * pow_xhi[:m]
        d_ylo = -orders * pow_ylo[:m]
        d_yhi = orders * pow_yhi[:m]
        jac_m = np.zeros((m * m, 4 * n))
        jac_m[:, 0::4] = np.einsum("an,bn->abn", d_xlo, qy).reshape(m * m, n) / dflat
        jac_m[:, 2::4] = np.einsum("an,bn->abn", d_xhi, qy).reshape(m * m, n) / dflat
        jac_m[:, 1::4] = np.einsum("an,bn->abn", px, d_ylo).reshape(m * m, n) / dflat
        jac_m[:, 3::4] = np.einsum("an,bn->abn", px, d_yhi).reshape(m * m, n) / dflat
        dx = x_hi - x_lo
        dy = y_hi - y_lo
        jac_c = np.zeros((2 * n, 4 * n))
        for i in range(n):
            jac_c[2 * i, 4 * i : 4 * i + 4] = (-1.0, -1.0, 1.0, 1.0)
            jac_c[2 * i + 1, 4 * i : 4 * i + 4] = (-dy[i], -dx[i], dy[i], dx[i])
    return np.vstack([jac_m, jac_c])


def layout_to_vars(sys: MomentSystem, layout: Layout) -> np.ndarray:
    """Flatten a layout into the system's normalized variable vector."""
    if len(layout.placements) != sys.n_rects:
        raise ValueError(
            f"layout has {len(layout.placements)} placements, instance has {sys.n_rects}"
        )
    s = sys.scale
    if sys.mode == FIXED:
        out = np.empty(2 * sys.n_rects)
        out[0::2] = [float(p.x_lo) / s for p in layout.placements]
        out[1::2] = [float(p.y_lo) / s for p in layout.placements]
        return out
    out = np.empty(4 * sys.n_rects)
    out[0::4] = [float(p.x_lo) / s for p in layout.placements]
    out[1::4] = [float(p.y_lo) / s for p in layout.placements]
    out[2::4] = [float(p.x_hi) / s for p in layout.placements]
    out[3::4] = [float(p.y_hi) / s for p in layout.placements]
    return out


def vars_to_layout(sys: MomentSystem, vars: np.ndarray) -> Layout:
    """De-normalize a variable vector back into a layout.  Fixed mode
    reconstructs the upper corners from the given sides."""
    arr = _check_vars(sys, vars)
    x_lo, y_lo, x_hi, y_hi = _corners(sys, arr)
    s = sys.scale
    placements = []
    for i in range(sys.n_rects):
        xa, xb = sorted((float(x_lo[i]) * s, float(x_hi[i]) * s))
        ya, yb = sorted((float(y_lo[i]) * s, float(y_hi[i]) * s))
        placements.append(Placement(xa, ya, xb, yb))
    return Layout(tuple(placements))
