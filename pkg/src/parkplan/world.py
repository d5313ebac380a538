"""Static obstacle boundary points and a spatial hash for range queries.

Static obstacles (parked vehicles and the drivable-area boundary) are
modeled as points sampled along their edges.  ``StaticMap`` holds the point
set plus a uniform-grid hash so collision queries only touch nearby points;
``query_near`` is exact (the hash only prunes, the radius test decides).
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass

import numpy as np

from .geometry import VehicleState


@dataclass(frozen=True)
class ParkedVehicle:
    """Axis of a parked rectangle: pose is the rectangle center + orientation."""

    pose: VehicleState
    length: float = 5.0
    width: float = 2.0

    def __post_init__(self):
        if self.length <= 0.0 or self.width <= 0.0:
            raise ValueError("parked vehicle dimensions must be positive")

    def corners(self) -> np.ndarray:
        c, s = math.cos(self.pose.theta), math.sin(self.pose.theta)
        hl, hw = 0.5 * self.length, 0.5 * self.width
        local = np.array([[hl, hw], [-hl, hw], [-hl, -hw], [hl, -hw]])
        rot = np.array([[c, -s], [s, c]])
        return local @ rot.T + np.array([self.pose.x, self.pose.y])

    def contains(self, point) -> bool:
        px, py = float(point[0]), float(point[1])
        c, s = math.cos(self.pose.theta), math.sin(self.pose.theta)
        dx, dy = px - self.pose.x, py - self.pose.y
        xf = dx * c + dy * s
        yf = -dx * s + dy * c
        return abs(xf) <= 0.5 * self.length and abs(yf) <= 0.5 * self.width


class StaticMap:
    """Immutable point set with an axis-aligned bounds rectangle and a cell hash."""

    def __init__(self, points, bounds, cell_size: float = 4.0):
        self.points = np.asarray(points, dtype=float).reshape(-1, 2)
        self.bounds = tuple(float(b) for b in bounds)  # (xmin, ymin, xmax, ymax)
        self.cell_size = float(cell_size)
        if self.cell_size <= 0.0:
            raise ValueError("cell_size must be positive")
        buckets: dict[tuple[int, int], list[int]] = defaultdict(list)
        for i, (x, y) in enumerate(self.points):
            buckets[self._cell(x, y)].append(i)
        self._buckets = {k: np.array(v, dtype=int) for k, v in buckets.items()}

    def _cell(self, x: float, y: float) -> tuple[int, int]:
        return (int(math.floor(x / self.cell_size)), int(math.floor(y / self.cell_size)))

    def query_near(self, center, radius: float) -> np.ndarray:
        """All stored points within Euclidean ``radius`` of ``center``, shape (M, 2)."""
        if radius < 0.0:
            raise ValueError("radius must be non-negative")
        cx, cy = float(center[0]), float(center[1])
        ix0, iy0 = self._cell(cx - radius, cy - radius)
        ix1, iy1 = self._cell(cx + radius, cy + radius)
        chunks = []
        for ix in range(ix0, ix1 + 1):
            for iy in range(iy0, iy1 + 1):
                idx = self._buckets.get((ix, iy))
                if idx is not None:
                    chunks.append(idx)
        if not chunks:
            return np.zeros((0, 2))
        cand = self.points[np.concatenate(chunks)]
        d2 = (cand[:, 0] - cx) ** 2 + (cand[:, 1] - cy) ** 2
        return cand[d2 <= radius * radius]


def _edge_points(p0: np.ndarray, p1: np.ndarray, spacing: float) -> np.ndarray:
    """Points along the segment [p0, p1) at spacing <= ``spacing``, including p0."""
    dist = float(np.hypot(*(p1 - p0)))
    n = max(1, math.ceil(dist / spacing - 1e-9))
    ts = np.arange(n) / n
    return p0 + ts[:, None] * (p1 - p0)


def _walk_perimeter(corners: np.ndarray, spacing: float) -> np.ndarray:
    parts = [_edge_points(corners[i], corners[(i + 1) % len(corners)], spacing)
             for i in range(len(corners))]
    return np.vstack(parts)


def build_boundary_points(rects: list[ParkedVehicle], bounds, spacing: float,
                          cell_size: float = 4.0) -> StaticMap:
    """Sample boundary points along every parked rectangle and the bounds rectangle.

    Corners are always emitted; per-edge spacing is uniform and never exceeds
    ``spacing``.  The construction is deterministic for identical inputs.
    """
    if spacing <= 0.0:
        raise ValueError("spacing must be positive")
    xmin, ymin, xmax, ymax = (float(b) for b in bounds)
    outer = np.array([[xmin, ymin], [xmax, ymin], [xmax, ymax], [xmin, ymax]])
    parts = [_walk_perimeter(outer, spacing)]
    parts.extend(_walk_perimeter(r.corners(), spacing) for r in rects)
    return StaticMap(np.vstack(parts), (xmin, ymin, xmax, ymax), cell_size)
