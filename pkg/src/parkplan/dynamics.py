"""Kinematic bicycle model: constant-control rollouts and the motion-primitive set.

State is (x, y, theta) at the rear axle; controls are longitudinal velocity
``v`` and front-wheel steering angle ``delta``:

    dx/dt = v cos(theta),  dy/dt = v sin(theta),  dtheta/dt = v tan(delta) / L

Rollouts use fixed-step RK4; ``arc_closed_form`` is the exact constant-control
solution (straight line or circular arc) used as a test oracle and for
replaying analytic path segments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import VehicleState, wrap_angle


@dataclass(frozen=True)
class ControlInput:
    """Constant control: signed velocity [m/s] and steering angle [rad]."""

    v: float
    delta: float


@dataclass(frozen=True)
class PrimitiveConfig:
    """Discretization of the control space and the per-primitive horizon."""

    v_max: float = 1.0
    delta_max: float = math.radians(40.0)
    n_v: int = 3
    n_delta: int = 5
    horizon: float = 2.0
    dt: float = 0.1

    def __post_init__(self):
        if self.v_max <= 0.0 or self.delta_max <= 0.0:
            raise ValueError("v_max and delta_max must be positive")
        if self.n_v < 2 or self.n_delta < 1:
            raise ValueError("need n_v >= 2 and n_delta >= 1")
        if self.dt <= 0.0:
            raise ValueError("dt must be positive")
        steps = self.horizon / self.dt
        if abs(steps - round(steps)) > 1e-9:
            raise ValueError("dt must divide horizon exactly")

    @property
    def steps(self) -> int:
        return round(self.horizon / self.dt)


def integrate(start: VehicleState, u: ControlInput, horizon: float, dt: float,
              wheelbase: float) -> np.ndarray:
    """RK4 rollout under constant control; returns states at 0, dt, ..., horizon.

    Output has shape (steps + 1, 3); the first row equals ``start``.
    """
    steps = round(horizon / dt)
    if abs(steps * dt - horizon) > 1e-9:
        raise ValueError("dt must divide horizon exactly")
    omega = u.v * math.tan(u.delta) / wheelbase
    out = np.empty((steps + 1, 3))
    out[0] = start.as_array()
    x, y, th = out[0]
    for k in range(steps):
        # theta' is constant, so the heading stage values are exact
        k1x, k1y = u.v * math.cos(th), u.v * math.sin(th)
        th2 = th + 0.5 * dt * omega
        k2x, k2y = u.v * math.cos(th2), u.v * math.sin(th2)
        k3x, k3y = k2x, k2y
        th4 = th + dt * omega
        k4x, k4y = u.v * math.cos(th4), u.v * math.sin(th4)
        x += dt / 6.0 * (k1x + 2 * k2x + 2 * k3x + k4x)
        y += dt / 6.0 * (k1y + 2 * k2y + 2 * k3y + k4y)
        th = th4
        out[k + 1] = (x, y, th)
    out[:, 2] = wrap_angle(out[:, 2])
    return out


def primitive_set(cfg: PrimitiveConfig) -> list[ControlInput]:
    """Cartesian product of the velocity and steering grids.

    Zero velocity collapses to the single wait primitive (0, 0) since steering
    is irrelevant while stationary.
    """
    vels = np.linspace(-cfg.v_max, cfg.v_max, cfg.n_v)
    if cfg.n_delta == 1:
        deltas = np.array([0.0])
    else:
        deltas = np.linspace(-cfg.delta_max, cfg.delta_max, cfg.n_delta)
    prims: list[ControlInput] = []
    for v in vels:
        if abs(v) < 1e-12:
            prims.append(ControlInput(0.0, 0.0))
        else:
            prims.extend(ControlInput(float(v), float(d)) for d in deltas)
    return prims


def arc_closed_form(start: VehicleState, u: ControlInput, t: float,
                    wheelbase: float) -> VehicleState:
    """Exact constant-control solution: straight line when delta ~ 0, else an arc."""
    if abs(u.v) < 1e-15 or t == 0.0:
        return start
    tan_d = math.tan(u.delta)
    if abs(tan_d) < 1e-12:
        return VehicleState(start.x + u.v * t * math.cos(start.theta),
                            start.y + u.v * t * math.sin(start.theta),
                            start.theta)
    radius = wheelbase / tan_d
    theta1 = start.theta + u.v * tan_d / wheelbase * t
    x1 = start.x + radius * (math.sin(theta1) - math.sin(start.theta))
    y1 = start.y - radius * (math.cos(theta1) - math.cos(start.theta))
    return VehicleState(x1, y1, theta1)
