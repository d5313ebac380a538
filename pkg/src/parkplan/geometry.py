"""Vehicle footprint geometry and slab-clearance obstacle tests.

The vehicle is an oriented rectangle anchored at the rear-axle center;
obstacles are 2D points (optionally with a radius).  The clearance of a
point is ``max(o_x, o_y)`` where ``o_x`` and ``o_y`` are the signed
distances from the point to the longitudinal and lateral faces of the
footprint.  A point is acceptable when its clearance is at least the
safety margin (plus the obstacle radius for circular obstacles); points
inside the rectangle get negative clearance and always fail.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * math.pi


def wrap_angle(theta):
    """Normalize an angle (scalar or array) to (-pi, pi]."""
    return -((-np.asarray(theta) + math.pi) % TWO_PI - math.pi) if isinstance(theta, np.ndarray) \
        else -((-theta + math.pi) % TWO_PI - math.pi)


@dataclass(frozen=True)
class VehicleState:
    """Planar pose of the rear-axle center; heading is CCW from +X, in (-pi, pi]."""

    x: float
    y: float
    theta: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "theta", wrap_angle(float(self.theta)))
        object.__setattr__(self, "x", float(self.x))
        object.__setattr__(self, "y", float(self.y))

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.theta])

    @classmethod
    def from_array(cls, arr) -> "VehicleState":
        return cls(float(arr[0]), float(arr[1]), float(arr[2]))

    def position(self) -> np.ndarray:
        return np.array([self.x, self.y])


@dataclass(frozen=True)
class VehicleGeometry:
    """Rectangular footprint relative to the rear axle, plus the safety margin.

    ``rear_overhang`` is the distance from the rear-axle center back to the
    rear edge, so the footprint center sits ``length/2 - rear_overhang``
    ahead of the axle along the heading.
    """

    wheelbase: float = 3.0
    length: float = 5.0
    width: float = 2.0
    rear_overhang: float = 1.0
    safety_margin: float = 0.5

    def __post_init__(self):
        if not (self.length > self.wheelbase > 0.0):
            raise ValueError("need length > wheelbase > 0")
        if self.width <= 0.0:
            raise ValueError("width must be positive")
        if not (0.0 <= self.rear_overhang <= self.length - self.wheelbase):
            raise ValueError("rear_overhang must lie in [0, length - wheelbase]")
        if self.safety_margin < 0.0:
            raise ValueError("safety_margin must be non-negative")

    @property
    def center_offset(self) -> float:
        """Longitudinal offset of the footprint center from the rear axle."""
        return 0.5 * self.length - self.rear_overhang

    def footprint_corners(self, state: VehicleState) -> np.ndarray:
        """World-frame corners of the footprint rectangle, CCW, shape (4, 2)."""
        c, s = math.cos(state.theta), math.sin(state.theta)
        cx = state.x + self.center_offset * c
        cy = state.y + self.center_offset * s
        hl, hw = 0.5 * self.length, 0.5 * self.width
        local = np.array([[hl, hw], [-hl, hw], [-hl, -hw], [hl, -hw]])
        rot = np.array([[c, -s], [s, c]])
        return local @ rot.T + np.array([cx, cy])


def point_clearances(states: np.ndarray, geom: VehicleGeometry, points: np.ndarray) -> np.ndarray:
    """Slab clearance of each point against each state's footprint.

    states: (K, 3) array of (x, y, theta); points: (N, 2).  Returns (K, N).
    """
    states = np.atleast_2d(np.asarray(states, dtype=float))
    points = np.asarray(points, dtype=float).reshape(-1, 2)
    ct = np.cos(states[:, 2])[:, None]
    st = np.sin(states[:, 2])[:, None]
    cx = states[:, 0][:, None] + geom.center_offset * ct
    cy = states[:, 1][:, None] + geom.center_offset * st
    dx = points[None, :, 0] - cx
    dy = points[None, :, 1] - cy
    xf = dx * ct + dy * st
    yf = -dx * st + dy * ct
    return np.maximum(np.abs(xf) - 0.5 * geom.length, np.abs(yf) - 0.5 * geom.width)


def paired_clearances(states: np.ndarray, geom: VehicleGeometry, points: np.ndarray) -> np.ndarray:
    """Clearance of time-paired points: states (K, 3) against points (K, O, 2) -> (K, O)."""
    states = np.asarray(states, dtype=float)
    points = np.asarray(points, dtype=float)
    ct = np.cos(states[:, 2])[:, None]
    st = np.sin(states[:, 2])[:, None]
    cx = states[:, 0][:, None] + geom.center_offset * ct
    cy = states[:, 1][:, None] + geom.center_offset * st
    dx = points[..., 0] - cx
    dy = points[..., 1] - cy
    xf = dx * ct + dy * st
    yf = -dx * st + dy * ct
    return np.maximum(np.abs(xf) - 0.5 * geom.length, np.abs(yf) - 0.5 * geom.width)


def clearance(state: VehicleState, geom: VehicleGeometry, point) -> float:
    """Slab clearance of a single point; negative when the point is inside the footprint."""
    return float(point_clearances(state.as_array()[None, :], geom, np.asarray(point, dtype=float)[None, :])[0, 0])


def state_collision_free(state: VehicleState, geom: VehicleGeometry,
                         static_points, dynamic_points, dynamic_radius=0.0) -> bool:
    """True iff every static point clears the margin and every dynamic point clears
    margin + radius (circular obstacles are handled by inflating the margin).

    ``dynamic_radius`` may be a scalar or a per-point array.
    """
    st = np.asarray(state.as_array())[None, :]
    static_points = np.asarray(static_points, dtype=float).reshape(-1, 2)
    if static_points.size:
        if np.min(point_clearances(st, geom, static_points)) < geom.safety_margin:
            return False
    dynamic_points = np.asarray(dynamic_points, dtype=float).reshape(-1, 2)
    if dynamic_points.size:
        margins = geom.safety_margin + np.asarray(dynamic_radius, dtype=float)
        if np.any(point_clearances(st, geom, dynamic_points)[0] < margins):
            return False
    return True


def path_min_clearance(path, geom: VehicleGeometry, static_map, preds) -> float:
    """Minimum clearance over all path samples and all obstacles.

    Static points use the raw slab clearance; dynamic obstacles are evaluated
    at each sample's time with their radius subtracted, so the returned value
    is comparable to the safety margin for both kinds.  Returns +inf when
    there is nothing to collide with.
    """
    states = np.asarray(path.states(), dtype=float)
    times = np.asarray(path.times(), dtype=float)
    if states.shape[0] == 0:
        raise ValueError("path must be non-empty")
    best = math.inf
    pts = np.asarray(static_map.points, dtype=float) if static_map is not None else np.zeros((0, 2))
    if pts.size:
        for lo in range(0, states.shape[0], 512):
            block = point_clearances(states[lo:lo + 512], geom, pts)
            best = min(best, float(block.min()))
    if preds is not None and len(preds.obstacles):
        radii = preds.radii()
        for lo in range(0, states.shape[0], 512):
            pos = preds.positions_at(times[lo:lo + 512])
            block = paired_clearances(states[lo:lo + 512], geom, pos) - radii[None, :]
            best = min(best, float(block.min()))
    return best
