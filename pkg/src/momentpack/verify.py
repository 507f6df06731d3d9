"""Geometric verification of layouts, independent of the moment machinery.

Three views of the same question "does this layout pack the box perfectly":

* verify_layout: floating point with a relative tolerance; reports every
  violation it finds rather than stopping at the first.
* verify_exact: zero-tolerance arithmetic over fractions.Fraction; boundary
  contact is legal, interior overlap is not.
* corner_cancellation: sign bookkeeping on the corner multiset.  Each
  placement contributes +1 at (x_lo, y_lo) and (x_hi, y_hi) and -1 at the
  other two corners; in a perfect packing every coincidence cluster nets 0
  except the four box corners, which net +1/-1/-1/+1 against the box's own
  signed corners.

moment_residual_of_layout bridges back to the equation side: the largest
normalized residual of the truncated moment system evaluated at the layout.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import moments as mo
from .instances import BoxSpec, Instance, Layout, Number

__all__ = [
    "VerificationReport",
    "verify_layout",
    "verify_exact",
    "corner_cancellation",
    "moment_residual_of_layout",
]

DEFAULT_TOL = 1e-7


@dataclass(frozen=True)
class VerificationReport:
    """Outcome of verify_layout; passed is true exactly when every violation
    list is empty and |area_gap| <= tol * box area."""

    passed: bool
    containment_violations: tuple[tuple[int, float], ...]
    overlap_violations: tuple[tuple[tuple[int, int], float], ...]
    size_violations: tuple[tuple[int, float, float], ...]
    area_gap: float
    tol: float

    def to_dict(self) -> dict:
        return {
            "pass": self.passed,
            "containment_violations": [list(v) for v in self.containment_violations],
            "overlap_violations": [
                [list(pair), area] for pair, area in self.overlap_violations
            ],
            "size_violations": [list(v) for v in self.size_violations],
            "area_gap": self.area_gap,
            "tol": self.tol,
        }


def verify_layout(
    inst: Instance, layout: Layout, tol: float = DEFAULT_TOL
) -> VerificationReport:
    """Check containment, pairwise interior-disjointness, side fidelity, and
    total area against the box.

    Side fidelity uses the symmetric functions |dx+dy - (w+h)| and
    |dx*dy - w*h| (admitting the w/h swap) when the instance allows rotation,
    and direct |dx - w|, |dy - h| comparison when it does not; the report rows
    carry the two symmetric residuals either way.
    """
    if tol < 0:
        raise ValueError(f"tol must be >= 0, got {tol}")
    n = len(layout.placements)
    if n != inst.n_rects:
        raise ValueError(f"layout has {n} placements, instance has {inst.n_rects}")
    a = float(inst.box.width)
    b = float(inst.box.height)
    scale = max(a, b)
    x_lo = np.array([float(p.x_lo) for p in layout.placements])
    y_lo = np.array([float(p.y_lo) for p in layout.placements])
    x_hi = np.array([float(p.x_hi) for p in layout.placements])
    y_hi = np.array([float(p.y_hi) for p in layout.placements])
    dx = x_hi - x_lo
    dy = y_hi - y_lo

    containment = []
    for i in range(n):
        overhang = max(-x_lo[i], x_hi[i] - a, -y_lo[i], y_hi[i] - b, 0.0)
        if overhang > tol * scale:
            containment.append((inst.rects[i].id, float(overhang)))

    overlaps = []
    for i in range(n):
        for j in range(i + 1, n):
            ow = min(x_hi[i], x_hi[j]) - max(x_lo[i], x_lo[j])
            oh = min(y_hi[i], y_hi[j]) - max(y_lo[i], y_lo[j])
            area = max(0.0, ow) * max(0.0, oh)
            if area > (tol * scale) ** 2:
                overlaps.append(((inst.rects[i].id, inst.rects[j].id), float(area)))

    sizes = []
    for i, rect in enumerate(inst.rects):
        w = float(rect.width)
        h = float(rect.height)
        e_sum = abs(dx[i] + dy[i] - (w + h))
        e_prod = abs(dx[i] * dy[i] - w * h)
        if inst.rotation_allowed:
            bad = e_sum > tol * scale or e_prod > tol * scale * scale
        else:
            bad = abs(dx[i] - w) > tol * scale or abs(dy[i] - h) > tol * scale
        if bad:
            sizes.append((rect.id, float(e_sum), float(e_prod)))

    area_gap = float(np.sum(dx * dy) - a * b)
    passed = (
        not containment
        and not overlaps
        and not sizes
        and abs(area_gap) <= tol * a * b
    )
    return VerificationReport(
        passed=passed,
        containment_violations=tuple(containment),
        overlap_violations=tuple(overlaps),
        size_violations=tuple(sizes),
        area_gap=area_gap,
        tol=tol,
    )


def _as_fraction(value: Number, what: str) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        if value.is_integer():
            return Fraction(int(value))
        raise ValueError(
            f"{what}: non-rational input {value!r}; use ints or 'p/q' strings"
        )
    raise ValueError(f"{what}: expected a rational number, got {value!r}")


def verify_exact(inst: Instance, layout: Layout) -> bool:
    """Zero-tolerance verification over exact rationals.

    All sides and coordinates must be ints, Fractions, or integer-valued
    floats.  Boundary contact between rectangles is legal; any interior
    overlap, overhang, side mismatch, or area gap fails.
    """
    n = len(layout.placements)
    if n != inst.n_rects:
        raise ValueError(f"layout has {n} placements, instance has {inst.n_rects}")
    a = _as_fraction(inst.box.width, "box width")
    b = _as_fraction(inst.box.height, "box height")
    corners = []
    for i, p in enumerate(layout.placements, start=1):
        corners.append(tuple(_as_fraction(v, f"placement {i}") for v in p.as_tuple()))

    total = Fraction(0)
    for i, (xl, yl, xh, yh) in enumerate(corners):
        rect = inst.rects[i]
        w = _as_fraction(rect.width, f"rect {rect.id} width")
        h = _as_fraction(rect.height, f"rect {rect.id} height")
        if xl < 0 or yl < 0 or xh > a or yh > b:
            return False
        dx = xh - xl
        dy = yh - yl
        if inst.rotation_allowed:
            if dx + dy != w + h or dx * dy != w * h:
                return False
        else:
            if dx != w or dy != h:
                return False
        total += dx * dy
    if total != a * b:
        return False
    for i in range(n):
        xl_i, yl_i, xh_i, yh_i = corners[i]
        for j in range(i + 1, n):
            xl_j, yl_j, xh_j, yh_j = corners[j]
            ow = min(xh_i, xh_j) - max(xl_i, xl_j)
            oh = min(yh_i, yh_j) - max(yl_i, yl_j)
            if ow > 0 and oh > 0:
                return False
    return True


def corner_cancellation(layout: Layout, box: BoxSpec, tol: float = DEFAULT_TOL) -> bool:
    """Signed corner test: cluster all placement corners that coincide within
    tol*scale and check each cluster's net sign.

    Interior and edge clusters must sum to 0; the clusters at the box corners
    must net +1 at (0,0), -1 at (A,0), -1 at (0,B), +1 at (A,B).
    """
    if tol < 0:
        raise ValueError(f"tol must be >= 0, got {tol}")
    a = float(box.width)
    b = float(box.height)
    scale = max(a, b)
    eps = tol * scale
    points: list[tuple[float, float, int]] = []
    for p in layout.placements:
        xl, yl, xh, yh = (float(v) for v in p.as_tuple())
        points.extend(
            [(xl, yl, +1), (xh, yh, +1), (xl, yh, -1), (xh, yl, -1)]
        )

    # Union-find over points bucketed on a grid of cell size eps; points in
    # the same or adjacent cells within L-inf distance eps get merged.
    parent = list(range(len(points)))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    def union(i: int, j: int) -> None:
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[rj] = ri

    if eps > 0:
        cells: dict[tuple[int, int], list[int]] = {}
        for idx, (x, y, _) in enumerate(points):
            cells.setdefault((int(x // eps), int(y // eps)), []).append(idx)
        for (cx, cy), members in cells.items():
            for ox in (-1, 0, 1):
                for oy in (-1, 0, 1):
                    other = cells.get((cx + ox, cy + oy))
                    if other is None:
                        continue
                    for i in members:
                        xi, yi, _ = points[i]
                        for j in other:
                            if j <= i:
                                continue
                            xj, yj, _ = points[j]
                            if abs(xi - xj) <= eps and abs(yi - yj) <= eps:
                                union(i, j)
    else:
        seen: dict[tuple[float, float], int] = {}
        for idx, (x, y, _) in enumerate(points):
            key = (x, y)
            if key in seen:
                union(seen[key], idx)
            else:
                seen[key] = idx

    sums: dict[int, int] = {}
    reps: dict[int, tuple[float, float]] = {}
    for idx, (x, y, sign) in enumerate(points):
        root = find(idx)
        sums[root] = sums.get(root, 0) + sign
        reps.setdefault(root, (x, y))

    expected = {(0.0, 0.0): 1, (a, 0.0): -1, (0.0, b): -1, (a, b): 1}
    matched: set[tuple[float, float]] = set()
    for root, total in sums.items():
        rx, ry = reps[root]
        target = 0
        for (ex, ey), want in expected.items():
            if abs(rx - ex) <= eps and abs(ry - ey) <= eps:
                target = want
                matched.add((ex, ey))
                break
        if total != target:
            return False
    return len(matched) == len(expected)


def moment_residual_of_layout(
    inst: Instance, layout: Layout, max_order: int | None = None
) -> float:
    """Largest absolute normalized residual of the truncated moment system at
    the given layout.

    Rotation-allowed instances evaluate in rotatable form (all four corners
    are inputs, size-constraint rows included) so every coordinate of the
    layout influences the result; otherwise the fixed-orientation system is
    used and upper corners are reconstructed from the given sides.
    """
    mode = mo.ROTATABLE if inst.rotation_allowed else mo.FIXED
    sys = mo.build_system(inst, max_order, mode)
    vars = mo.layout_to_vars(sys, layout)
    return mo.residual(sys, vars).max_abs
