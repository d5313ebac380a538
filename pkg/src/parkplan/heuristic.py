"""Cost-to-go heuristics: Euclidean distance and a precomputed grid field.

The grid field stores 8-connected shortest-path distances to the goal cell
over the static map, with cells blocked when a static point lies within a
clearance disc of the cell center.  Lookups interpolate bilinearly between
cell centers.  The field ignores dynamic obstacles on purpose: the search
itself handles those.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np

from .geometry import VehicleState
from .world import StaticMap

SQRT2 = math.sqrt(2.0)


class BlockedGoalError(ValueError):
    """Raised when the goal cell is inside the blocked region of the grid."""


@dataclass(frozen=True)
class CostField:
    """Grid of shortest-path distances [m] to the goal cell; +inf where unreachable."""

    resolution: float
    origin: tuple[float, float]
    costs: np.ndarray  # shape (nx, ny), indexed [ix, iy]
    clearance_radius: float

    @property
    def shape(self) -> tuple[int, int]:
        return self.costs.shape

    def cell_index(self, point) -> tuple[int, int]:
        ix = int(math.floor((float(point[0]) - self.origin[0]) / self.resolution))
        iy = int(math.floor((float(point[1]) - self.origin[1]) / self.resolution))
        nx, ny = self.costs.shape
        return (min(max(ix, 0), nx - 1), min(max(iy, 0), ny - 1))

    def cell_center(self, ix: int, iy: int) -> tuple[float, float]:
        return (self.origin[0] + (ix + 0.5) * self.resolution,
                self.origin[1] + (iy + 0.5) * self.resolution)


def precompute_field(static_map: StaticMap, goal, resolution: float = 0.5,
                     clearance_radius: float = 1.0) -> CostField:
    """Dijkstra from the goal cell over the 8-connected free-cell grid.

    A cell is free iff its center is strictly farther than ``clearance_radius``
    from every static point.  Straight edges cost ``resolution``, diagonal
    edges ``resolution * sqrt(2)``.  Raises ``BlockedGoalError`` when the goal
    cell itself is blocked.
    """
    xmin, ymin, xmax, ymax = static_map.bounds
    nx = max(1, math.ceil((xmax - xmin) / resolution - 1e-9))
    ny = max(1, math.ceil((ymax - ymin) / resolution - 1e-9))
    origin = (xmin, ymin)

    blocked = np.zeros((nx, ny), dtype=bool)
    reach = math.ceil(clearance_radius / resolution) + 1
    for px, py in static_map.points:
        cx = int(math.floor((px - xmin) / resolution))
        cy = int(math.floor((py - ymin) / resolution))
        for ix in range(max(0, cx - reach), min(nx, cx + reach + 1)):
            for iy in range(max(0, cy - reach), min(ny, cy + reach + 1)):
                if blocked[ix, iy]:
                    continue
                ccx = xmin + (ix + 0.5) * resolution
                ccy = ymin + (iy + 0.5) * resolution
                if (ccx - px) ** 2 + (ccy - py) ** 2 <= clearance_radius ** 2:
                    blocked[ix, iy] = True

    field = CostField(resolution, origin, np.full((nx, ny), np.inf), clearance_radius)
    gx, gy = field.cell_index(goal)
    if blocked[gx, gy]:
        raise BlockedGoalError(f"goal cell {(gx, gy)} at {goal} is blocked")

    costs = field.costs
    costs[gx, gy] = 0.0
    pq: list[tuple[float, int, int]] = [(0.0, gx, gy)]
    straight = resolution
    diagonal = resolution * SQRT2
    while pq:
        d, ix, iy = heapq.heappop(pq)
        if d > costs[ix, iy]:
            continue
        for dx in (-1, 0, 1):
            for dy in (-1, 0, 1):
                if dx == 0 and dy == 0:
                    continue
                jx, jy = ix + dx, iy + dy
                if not (0 <= jx < nx and 0 <= jy < ny) or blocked[jx, jy]:
                    continue
                nd = d + (diagonal if dx and dy else straight)
                if nd < costs[jx, jy]:
                    costs[jx, jy] = nd
                    heapq.heappush(pq, (nd, jx, jy))
    costs.setflags(write=False)
    return field


def h_astar(field: CostField, state: VehicleState) -> float:
    """Bilinear interpolation of the field at the state's position.

    If some of the four surrounding cells are unreachable, falls back to the
    nearest finite one; returns +inf when all four are unreachable.
    """
    nx, ny = field.costs.shape
    fx = (state.x - field.origin[0]) / field.resolution - 0.5
    fy = (state.y - field.origin[1]) / field.resolution - 0.5
    ix = min(max(int(math.floor(fx)), 0), max(nx - 2, 0))
    iy = min(max(int(math.floor(fy)), 0), max(ny - 2, 0))
    tx = min(max(fx - ix, 0.0), 1.0)
    ty = min(max(fy - iy, 0.0), 1.0)
    ix1 = min(ix + 1, nx - 1)
    iy1 = min(iy + 1, ny - 1)
    corners = np.array([field.costs[ix, iy], field.costs[ix1, iy],
                        field.costs[ix, iy1], field.costs[ix1, iy1]])
    if np.all(np.isfinite(corners)):
        return float((1 - tx) * (1 - ty) * corners[0] + tx * (1 - ty) * corners[1]
                     + (1 - tx) * ty * corners[2] + tx * ty * corners[3])
    finite = np.isfinite(corners)
    if not np.any(finite):
        return math.inf
    # nearest finite corner by actual distance to the query point
    centers = [field.cell_center(ix, iy), field.cell_center(ix1, iy),
               field.cell_center(ix, iy1), field.cell_center(ix1, iy1)]
    best, best_d = math.inf, math.inf
    for ok, val, (cx, cy) in zip(finite, corners, centers):
        if ok:
            d = (state.x - cx) ** 2 + (state.y - cy) ** 2
            if d < best_d:
                best, best_d = float(val), d
    return best


def h_euclid(state: VehicleState, goal: VehicleState) -> float:
    """Planar Euclidean distance between positions; heading is ignored."""
    return math.hypot(state.x - goal.x, state.y - goal.y)


def dump_field_csv(field: CostField, fileobj) -> None:
    """Debug dump, row-major: one line per iy (ascending), +inf as empty cell."""
    nx, ny = field.costs.shape
    for iy in range(ny):
        row = (("" if not math.isfinite(field.costs[ix, iy]) else f"{field.costs[ix, iy]:.6f}")
               for ix in range(nx))
        fileobj.write(",".join(row) + "\n")


class HeuristicFields:
    """Per-goal-cell cache of precomputed cost fields over one static map."""

    def __init__(self, static_map: StaticMap, resolution: float = 0.5,
                 clearance_radius: float = 1.0):
        self.static_map = static_map
        self.resolution = resolution
        self.clearance_radius = clearance_radius
        self._cache: dict[tuple[int, int], CostField] = {}

    def field_for(self, goal) -> CostField:
        xmin, ymin, _, _ = self.static_map.bounds
        key = (int(math.floor((float(goal[0]) - xmin) / self.resolution)),
               int(math.floor((float(goal[1]) - ymin) / self.resolution)))
        field = self._cache.get(key)
        if field is None:
            field = precompute_field(self.static_map, (float(goal[0]), float(goal[1])),
                                     self.resolution, self.clearance_radius)
            self._cache[key] = field
        return field
