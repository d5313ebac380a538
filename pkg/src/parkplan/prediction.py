"""Constant-velocity dynamic-obstacle model with a finite prediction horizon.

Each obstacle is a circle moving in a straight line; predictions are exact up
to the horizon and frozen beyond it (a conservative stand-in for "predictions
for all future time", which keeps the planner's time dimension bounded).
Ground-truth motion never freezes: use ``DynamicObstacle.position``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class DynamicObstacle:
    """Circle of radius ``radius`` at ``p0`` moving with constant ``velocity``."""

    p0: tuple[float, float]
    velocity: tuple[float, float]
    radius: float = 0.5

    def __post_init__(self):
        if self.radius < 0.0:
            raise ValueError("radius must be non-negative")
        object.__setattr__(self, "p0", (float(self.p0[0]), float(self.p0[1])))
        object.__setattr__(self, "velocity", (float(self.velocity[0]), float(self.velocity[1])))

    def position(self, t: float) -> np.ndarray:
        """Ground-truth position at time t (no horizon freeze)."""
        return np.array([self.p0[0] + self.velocity[0] * t,
                         self.p0[1] + self.velocity[1] * t])


@dataclass(frozen=True)
class PredictionSet:
    """Predicted obstacle positions; frozen at ``horizon`` seconds."""

    obstacles: tuple[DynamicObstacle, ...] = ()
    horizon: float = 120.0

    def __post_init__(self):
        if self.horizon <= 0.0:
            raise ValueError("horizon must be positive")
        object.__setattr__(self, "obstacles", tuple(self.obstacles))

    @classmethod
    def empty(cls) -> "PredictionSet":
        return cls(())

    def predict(self, obs: DynamicObstacle, t: float) -> np.ndarray:
        """Position at time t >= 0, frozen beyond the horizon."""
        if t < 0.0:
            raise ValueError("prediction time must be non-negative")
        return obs.position(min(t, self.horizon))

    def predict_all(self, t: float) -> list[np.ndarray]:
        """Element-wise predictions, preserving obstacle order."""
        return [self.predict(o, t) for o in self.obstacles]

    def positions_at(self, times) -> np.ndarray:
        """Vectorized predictions: times (K,) -> positions (K, O, 2)."""
        times = np.minimum(np.asarray(times, dtype=float), self.horizon)
        p0 = np.array([o.p0 for o in self.obstacles], dtype=float).reshape(-1, 2)
        vel = np.array([o.velocity for o in self.obstacles], dtype=float).reshape(-1, 2)
        return p0[None, :, :] + vel[None, :, :] * times[:, None, None]

    def radii(self) -> np.ndarray:
        return np.array([o.radius for o in self.obstacles], dtype=float)
