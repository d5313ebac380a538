"""Closed-form shortest paths for a car that drives forward or backward with
bounded turning radius.

Candidate paths are words of at most five segments, each a left arc, right
arc, or straight run driven in one gear.  The solver enumerates the standard
word catalog in a normalized frame (start at the origin, unit turning
radius), applying the time-flip / reflection / reversal symmetries to the
base families, and returns every geometrically valid candidate sorted by
total length.  Every candidate is verified to land on the goal before being
returned, so callers can trust the endpoints to machine precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .geometry import VehicleState, wrap_angle

TWO_PI = 2.0 * math.pi


class Segment(NamedTuple):
    steer: str   # 'L', 'S' or 'R'
    gear: int    # +1 forward, -1 backward
    length: float  # arc length in meters, >= 0


@dataclass(frozen=True)
class RSPath:
    segments: tuple[Segment, ...]
    total_length: float
    min_turn_radius: float


def _polar(x: float, y: float) -> tuple[float, float]:
    return math.hypot(x, y), math.atan2(y, x)


def _mod2pi(a: float) -> float:
    # symmetric wrap into [-pi, pi]: the family sign constraints rely on it
    v = a % TWO_PI
    if v > math.pi:
        v -= TWO_PI
    elif v < -math.pi:
        v += TWO_PI
    return v


# Base family solvers.  Each returns (ok, t, u, v): segment parameters in the
# normalized frame (arcs in radians, straights in turning-radius units).

def _lsl(x, y, phi):
    u, t = _polar(x - math.sin(phi), y - 1.0 + math.cos(phi))
    if t >= 0.0:
        v = _mod2pi(phi - t)
        if v >= 0.0:
            return True, t, u, v
    return False, 0.0, 0.0, 0.0


def _lsr(x, y, phi):
    u1, t1 = _polar(x + math.sin(phi), y - 1.0 - math.cos(phi))
    u1 = u1 * u1
    if u1 >= 4.0:
        u = math.sqrt(u1 - 4.0)
        theta = math.atan2(2.0, u)
        t = _mod2pi(t1 + theta)
        v = _mod2pi(t - phi)
        if t >= 0.0 and v >= 0.0:
            return True, t, u, v
    return False, 0.0, 0.0, 0.0


def _lrl(x, y, phi):
    u1, t1 = _polar(x - math.sin(phi), y - 1.0 + math.cos(phi))
    if u1 <= 4.0:
        u = -2.0 * math.asin(0.25 * u1)
        t = _mod2pi(t1 + 0.5 * u + math.pi)
        v = _mod2pi(phi - t + u)
        if t >= 0.0 and u <= 0.0:
            return True, t, u, v
    return False, 0.0, 0.0, 0.0


def _tau_omega(u, v, xi, eta, phi):
    delta = _mod2pi(u - v)
    a = math.sin(u) - math.sin(delta)
    b = math.cos(u) - math.cos(delta) - 1.0
    t1 = math.atan2(eta * a - xi * b, xi * a + eta * b)
    t2 = 2.0 * (math.cos(delta) - math.cos(v) - math.cos(u)) + 3.0
    tau = _mod2pi(t1 + math.pi) if t2 < 0.0 else _mod2pi(t1)
    omega = _mod2pi(tau - u + v - phi)
    return tau, omega


def _lrlrn(x, y, phi):
    xi = x + math.sin(phi)
    eta = y - 1.0 - math.cos(phi)
    rho = 0.25 * (2.0 + math.hypot(xi, eta))
    if rho <= 1.0:
        u = math.acos(rho)
        t, v = _tau_omega(u, -u, xi, eta, phi)
        if t >= 0.0 and v <= 0.0:
            return True, t, u, v
    return False, 0.0, 0.0, 0.0


def _lrlrp(x, y, phi):
    xi = x + math.sin(phi)
    eta = y - 1.0 - math.cos(phi)
    rho = (20.0 - xi * xi - eta * eta) / 16.0
    if 0.0 <= rho <= 1.0:
        u = -math.acos(rho)
        if u >= -0.5 * math.pi:
            t, v = _tau_omega(u, u, xi, eta, phi)
            if t >= 0.0 and v >= 0.0:
                return True, t, u, v
    return False, 0.0, 0.0, 0.0


def _lrsl(x, y, phi):
    xi = x - math.sin(phi)
    eta = y - 1.0 + math.cos(phi)
    rho, theta = _polar(xi, eta)
    if rho >= 2.0:
        r = math.sqrt(rho * rho - 4.0)
        u = 2.0 - r
        t = _mod2pi(theta + math.atan2(r, -2.0))
        v = _mod2pi(phi - 0.5 * math.pi - t)
        if t >= 0.0 and u <= 0.0 and v <= 0.0:
            return True, t, u, v
    return False, 0.0, 0.0, 0.0


def _lrsr(x, y, phi):
    xi = x + math.sin(phi)
    eta = y - 1.0 - math.cos(phi)
    rho, theta = _polar(-eta, xi)
    if rho >= 2.0:
        t = theta
        u = 2.0 - rho
        v = _mod2pi(t + 0.5 * math.pi - phi)
        if t >= 0.0 and u <= 0.0 and v <= 0.0:
            return True, t, u, v
    return False, 0.0, 0.0, 0.0


def _lrslr(x, y, phi):
    xi = x + math.sin(phi)
    eta = y - 1.0 - math.cos(phi)
    rho, theta = _polar(xi, eta)
    if rho >= 2.0:
        t = _mod2pi(theta - math.acos(-2.0 / rho))
        if t > 0.0:
            u = 4.0 - (xi + 2.0 * math.cos(t)) / math.sin(t)
            v = _mod2pi(t - phi)
            if u <= 0.0 and v >= 0.0:
                return True, t, u, v
    return False, 0.0, 0.0, 0.0


def _word_candidates(x: float, y: float, phi: float) -> list[list[tuple[str, float]]]:
    """All candidate words as (steer, signed normalized length) lists."""
    words: list[list[tuple[str, float]]] = []

    def add(lengths, steers):
        words.append(list(zip(steers, lengths)))

    # Four symmetry images of the target: identity, time-flip, reflection, both.
    # Time-flip negates segment lengths; reflection mirrors L <-> R.
    def images(px, py, pphi):
        return ((px, py, pphi, 1.0, False),
                (-px, py, -pphi, -1.0, False),
                (px, -py, -pphi, 1.0, True),
                (-px, -py, pphi, -1.0, True))

    def mirror(steers, flip):
        table = {"L": "R", "R": "L", "S": "S"}
        return [table[s] for s in steers] if flip else list(steers)

    for px, py, pphi, sgn, flip in images(x, y, phi):
        ok, t, u, v = _lsl(px, py, pphi)
        if ok:
            add([sgn * t, sgn * u, sgn * v], mirror("LSL", flip))
        ok, t, u, v = _lsr(px, py, pphi)
        if ok:
            add([sgn * t, sgn * u, sgn * v], mirror("LSR", flip))
        ok, t, u, v = _lrl(px, py, pphi)
        if ok:
            add([sgn * t, sgn * u, sgn * v], mirror("LRL", flip))
        ok, t, u, v = _lrlrn(px, py, pphi)
        if ok:
            add([sgn * t, sgn * u, -sgn * u, sgn * v], mirror("LRLR", flip))
        ok, t, u, v = _lrlrp(px, py, pphi)
        if ok:
            add([sgn * t, sgn * u, sgn * u, sgn * v], mirror("LRLR", flip))
        ok, t, u, v = _lrsl(px, py, pphi)
        if ok:
            add([sgn * t, -sgn * 0.5 * math.pi, sgn * u, sgn * v], mirror("LRSL", flip))
        ok, t, u, v = _lrsr(px, py, pphi)
        if ok:
            add([sgn * t, -sgn * 0.5 * math.pi, sgn * u, sgn * v], mirror("LRSR", flip))
        ok, t, u, v = _lrslr(px, py, pphi)
        if ok:
            add([sgn * t, -sgn * 0.5 * math.pi, sgn * u, -sgn * 0.5 * math.pi, sgn * v],
                mirror("LRSLR", flip))

    # Driving the word in reverse solves the mirrored problem; used for the
    # families that are not palindromes (arc-arc-straight-arc and arc-arc-arc).
    xb = x * math.cos(phi) + y * math.sin(phi)
    yb = x * math.sin(phi) - y * math.cos(phi)
    for px, py, pphi, sgn, flip in images(xb, yb, phi):
        ok, t, u, v = _lrl(px, py, pphi)
        if ok:
            add([sgn * v, sgn * u, sgn * t], mirror("LRL", flip))
        ok, t, u, v = _lrsl(px, py, pphi)
        if ok:
            add([sgn * v, sgn * u, -sgn * 0.5 * math.pi, sgn * t], mirror("LSRL", flip))
        ok, t, u, v = _lrsr(px, py, pphi)
        if ok:
            add([sgn * v, sgn * u, -sgn * 0.5 * math.pi, sgn * t], mirror("RSRL", flip))

    return words


def _advance(pose: np.ndarray, seg: Segment, radius: float, length: float) -> np.ndarray:
    """Pose after driving ``length`` meters along a segment from ``pose``."""
    x, y, th = pose
    s = seg.gear * length
    if seg.steer == "S":
        return np.array([x + s * math.cos(th), y + s * math.sin(th), th])
    turn = s / radius if seg.steer == "L" else -s / radius
    th1 = th + turn
    if seg.steer == "L":
        return np.array([x + radius * (math.sin(th1) - math.sin(th)),
                         y - radius * (math.cos(th1) - math.cos(th)), th1])
    return np.array([x - radius * (math.sin(th1) - math.sin(th)),
                     y + radius * (math.cos(th1) - math.cos(th)), th1])


def _endpoint(segments, start: VehicleState, radius: float) -> np.ndarray:
    pose = start.as_array()
    for seg in segments:
        pose = _advance(pose, seg, radius, seg.length)
    return pose


def solve_all(start: VehicleState, goal: VehicleState, min_turn_radius: float) -> list[RSPath]:
    """Every valid candidate path from start to goal, sorted by total length.

    When start equals goal the single degenerate zero-length path is returned.
    """
    if min_turn_radius <= 0.0:
        raise ValueError("min_turn_radius must be positive")
    radius = float(min_turn_radius)
    dx = goal.x - start.x
    dy = goal.y - start.y
    c, s = math.cos(start.theta), math.sin(start.theta)
    x = (c * dx + s * dy) / radius
    y = (-s * dx + c * dy) / radius
    phi = wrap_angle(goal.theta - start.theta)

    paths: list[RSPath] = []
    seen: set[tuple] = set()
    gx, gy, gth = goal.x, goal.y, goal.theta
    for word in _word_candidates(x, y, phi):
        segments = tuple(Segment(steer, 1 if slen >= 0.0 else -1, abs(slen) * radius)
                         for steer, slen in word if abs(slen) > 1e-12)
        end = _endpoint(segments, start, radius)
        if (math.hypot(end[0] - gx, end[1] - gy) > 1e-6
                or abs(wrap_angle(end[2] - gth)) > 1e-6):
            continue
        key = tuple((sg.steer, sg.gear, round(sg.length, 9)) for sg in segments)
        if key in seen:
            continue
        seen.add(key)
        total = sum(sg.length for sg in segments)
        paths.append(RSPath(segments, total, radius))
    paths.sort(key=lambda p: p.total_length)
    return paths


def solve(start: VehicleState, goal: VehicleState, min_turn_radius: float) -> RSPath | None:
    """Shortest valid path, or None if the catalog produced nothing."""
    paths = solve_all(start, goal, min_turn_radius)
    return paths[0] if paths else None


def _arclength_grid(path: RSPath, spacing: float) -> tuple[list[tuple[int, float]], np.ndarray]:
    """Per-sample (segment index, local arc length) plus cumulative arc length."""
    samples: list[tuple[int, float]] = [(0, 0.0)]
    cum = [0.0]
    base = 0.0
    for i, seg in enumerate(path.segments):
        n = max(1, math.ceil(seg.length / spacing - 1e-9))
        step = seg.length / n
        for k in range(1, n + 1):
            samples.append((i, k * step))
            cum.append(base + k * step)
        base += seg.length
    return samples, np.array(cum)


def sample(path: RSPath, start: VehicleState, spacing: float) -> np.ndarray:
    """States along the path at arc-length steps <= spacing, both endpoints included.

    Returns shape (K, 3); a zero-length path yields the single start state.
    """
    if spacing <= 0.0:
        raise ValueError("spacing must be positive")
    grid, _ = _arclength_grid(path, spacing)
    out = np.empty((len(grid), 3))
    out[0] = start.as_array()
    seg_start = start.as_array()
    cur_seg = 0
    for j, (i, local) in enumerate(grid):
        if j == 0:
            continue
        while cur_seg < i:
            seg = path.segments[cur_seg]
            seg_start = _advance(seg_start, seg, path.min_turn_radius, seg.length)
            cur_seg += 1
        out[j] = _advance(seg_start, path.segments[i], path.min_turn_radius, local)
    out[:, 2] = wrap_angle(out[:, 2])
    return out


def rs_timing(path: RSPath, v_max: float, spacing: float | None = None) -> np.ndarray:
    """Per-sample times for the constant-speed traversal: cumulative length / v_max.

    Uses the same arc-length grid as ``sample`` (default spacing 0.1 * v_max).
    """
    if v_max <= 0.0:
        raise ValueError("v_max must be positive")
    if spacing is None:
        spacing = 0.1 * v_max
    _, cum = _arclength_grid(path, spacing)
    return cum / v_max
