"""Time-indexed Hybrid A* search over (pose, time).

Nodes carry a continuous vehicle state plus the time at which it is reached;
they are deduplicated on a coarse (cell, heading bin, time bucket) key so the
same cell can be revisited later in time, which is what lets the planner wait
out moving obstacles.  Expansion rolls out a fixed set of constant-control
primitives; termination goes through an analytic forward/backward connection
to the goal that is validated sample-by-sample against static points and
time-indexed obstacle predictions.

When the prediction set is empty the time bucket collapses, which makes the
search exactly the conventional (time-free) variant used for global paths.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import NamedTuple, Optional

import numpy as np

from . import reeds_shepp as rs
from .dynamics import ControlInput, PrimitiveConfig, arc_closed_form, integrate, primitive_set
from .geometry import (VehicleGeometry, VehicleState, paired_clearances,
                       point_clearances, wrap_angle)
from .heuristic import HeuristicFields, h_astar, h_euclid
from .prediction import PredictionSet
from .world import StaticMap

TWO_PI = 2.0 * math.pi


class StartInCollisionError(RuntimeError):
    """The requested start pose already violates the clearance margin."""


class PathOutcome(Enum):
    REACHED_GOAL = "reached_goal"
    STATIONARY = "stationary"


class PathSample(NamedTuple):
    time: float
    state: VehicleState
    control: Optional[ControlInput]  # control applied over the hop leaving this sample


@dataclass
class TimedPath:
    """Planner output: fixed-rate samples with per-hop controls."""

    samples: list[PathSample]
    outcome: PathOutcome

    def times(self) -> np.ndarray:
        return np.array([s.time for s in self.samples])

    def states(self) -> np.ndarray:
        return np.array([[s.state.x, s.state.y, s.state.theta] for s in self.samples])

    def controls(self) -> list[Optional[ControlInput]]:
        return [s.control for s in self.samples]

    @property
    def duration(self) -> float:
        return self.samples[-1].time - self.samples[0].time

    def path_length(self) -> float:
        xy = self.states()[:, :2]
        return float(np.sum(np.hypot(*np.diff(xy, axis=0).T))) if len(xy) > 1 else 0.0


class NodeKey(NamedTuple):
    xi: int
    yi: int
    hi: int
    ti: int


@dataclass(frozen=True)
class CostWeights:
    """Penalty weights for the accumulated cost."""

    w_len: float = 1.0          # per forward meter
    w_rev: float = 2.0          # multiplier on reverse meters
    w_delta: float = 0.3        # per radian of |steering|, per primitive
    w_switch_gear: float = 5.0  # per reversal of driving direction
    w_switch_steer: float = 0.5  # per radian of steering change between primitives

    def __post_init__(self):
        for name in ("w_len", "w_rev", "w_delta", "w_switch_gear", "w_switch_steer"):
            if getattr(self, name) < 0.0:
                raise ValueError(f"{name} must be non-negative")


@dataclass
class Node:
    """Search node: pose + time, its incoming trajectory, and both costs."""

    state: np.ndarray                 # (3,)
    t: float
    parent: Optional["Node"]
    control: Optional[ControlInput]   # primitive that produced this node
    tau: np.ndarray                   # states from parent over [0, H], shape (K+1, 3)
    tau_o: np.ndarray                 # predicted obstacle positions per sample, (K+1, O, 2)
    c_g: float
    c_h: float
    key: NodeKey
    gear: int = 0                     # sign of the last moving primitive on the chain


@dataclass
class PlannerConfig:
    """Everything a single planning call needs besides the world itself.

    ``margin_pad_static``/``margin_pad_dynamic`` inflate the clearance margin
    used during the search so that the coarse 0.1 s sampling provably covers
    the motion between samples (bounded by half the worst-case relative
    displacement per step, including footprint rotation); the finer post-hoc
    safety check then holds with the nominal margin.
    """

    geometry: VehicleGeometry = field(default_factory=VehicleGeometry)
    primitives: PrimitiveConfig = field(default_factory=PrimitiveConfig)
    weights: CostWeights = field(default_factory=CostWeights)
    cell_size: float = 2.0
    heading_bin: float = math.radians(20.0)
    time_bucket: float | None = None      # None -> primitive horizon
    h_thresh: float = 15.0
    goal_pos_tol: float = 0.1
    goal_heading_tol: float = math.radians(1.0)
    heuristic: str = "astar"              # "astar" or "euclid"
    fields: HeuristicFields | None = None
    margin_pad_static: float = 0.125
    margin_pad_dynamic: float = 0.175

    def min_turn_radius(self) -> float:
        return self.geometry.wheelbase / math.tan(self.primitives.delta_max)


class _Context:
    """Per-call search context: world, goal, heuristic, and cached rollouts."""

    def __init__(self, cfg: PlannerConfig, static_map: StaticMap, preds: PredictionSet,
                 goal: VehicleState):
        self.cfg = cfg
        self.static_map = static_map
        self.preds = preds
        self.goal = goal
        self.timed = len(preds.obstacles) > 0
        self.obstacle_margins = (cfg.geometry.safety_margin + cfg.margin_pad_dynamic
                                 + preds.radii()) if self.timed else None
        g = cfg.geometry
        corner = math.hypot(g.center_offset + 0.5 * g.length + g.safety_margin
                            + cfg.margin_pad_static,
                            0.5 * g.width + g.safety_margin + cfg.margin_pad_static)
        self._corner_reach = corner
        self._query_radius = cfg.primitives.v_max * cfg.primitives.horizon + corner
        self.rollouts = self._build_rollouts()
        if cfg.heuristic == "astar":
            fields = cfg.fields or HeuristicFields(static_map)
            self.field = fields.field_for((goal.x, goal.y))
        else:
            self.field = None

    def _build_rollouts(self):
        cfg = self.cfg
        origin = VehicleState(0.0, 0.0, 0.0)
        out = []
        for u in primitive_set(cfg.primitives):
            local = integrate(origin, u, cfg.primitives.horizon, cfg.primitives.dt,
                              cfg.geometry.wheelbase)
            out.append((u, local))
        return out

    def heuristic_value(self, x: float, y: float) -> float:
        he = math.hypot(x - self.goal.x, y - self.goal.y)
        if self.field is None:
            return he
        ha = h_astar(self.field, VehicleState(x, y, 0.0))
        return max(ha, he) if math.isfinite(ha) else ha

    def transform_rollout(self, local: np.ndarray, pose: np.ndarray) -> np.ndarray:
        c, s = math.cos(pose[2]), math.sin(pose[2])
        out = np.empty_like(local)
        out[:, 0] = pose[0] + local[:, 0] * c - local[:, 1] * s
        out[:, 1] = pose[1] + local[:, 0] * s + local[:, 1] * c
        out[:, 2] = wrap_angle(local[:, 2] + pose[2])
        return out

    def static_points_near(self, center: np.ndarray, extra: float = 0.0) -> np.ndarray:
        return self.static_map.query_near(center, self._query_radius + extra)

    def states_clear(self, states: np.ndarray, times: np.ndarray,
                     static_pts: np.ndarray | None = None) -> bool:
        """Margin check of every (state, time) pair against statics and predictions."""
        cfg = self.cfg
        if static_pts is None:
            lo = states[:, :2].min(axis=0)
            hi = states[:, :2].max(axis=0)
            center = 0.5 * (lo + hi)
            static_pts = self.static_map.query_near(
                center, 0.5 * float(np.hypot(*(hi - lo))) + self._corner_reach)
        if static_pts.size:
            cl = point_clearances(states, cfg.geometry, static_pts)
            if cl.min() < cfg.geometry.safety_margin + cfg.margin_pad_static:
                return False
        if self.timed:
            pos = self.preds.positions_at(times)
            cl = paired_clearances(states, cfg.geometry, pos)
            if np.any(cl < self.obstacle_margins[None, :]):
                return False
        return True

    def node_key(self, state: np.ndarray, t: float) -> NodeKey:
        cfg = self.cfg
        xi = int(math.floor(state[0] / cfg.cell_size))
        yi = int(math.floor(state[1] / cfg.cell_size))
        n_bins = max(1, int(round(TWO_PI / cfg.heading_bin)))
        hi = int(round(state[2] / cfg.heading_bin)) % n_bins
        if self.timed:
            bucket = cfg.time_bucket if cfg.time_bucket is not None else cfg.primitives.horizon
            ti = int(round(t / bucket))
        else:
            ti = 0
        return NodeKey(xi, yi, hi, ti)


def _make_context(cfg, static_map, preds, goal) -> _Context:
    return _Context(cfg, static_map, preds, goal)


def root_node(x0: VehicleState, static_map: StaticMap, preds: PredictionSet,
              cfg: PlannerConfig, goal: VehicleState) -> Node:
    """Start node at t = 0; raises if the start pose violates the margin."""
    ctx = _make_context(cfg, static_map, preds, goal)
    return _root(ctx, x0)


def _root(ctx: _Context, x0: VehicleState) -> Node:
    state = x0.as_array()
    t0 = np.array([0.0])
    if not ctx.states_clear(state[None, :], t0):
        raise StartInCollisionError(f"start pose {x0} violates the clearance margin")
    tau_o = ctx.preds.positions_at(t0) if ctx.timed else np.zeros((1, 0, 2))
    return Node(state=state, t=0.0, parent=None, control=None, tau=state[None, :].copy(),
                tau_o=tau_o, c_g=0.0, c_h=ctx.heuristic_value(state[0], state[1]),
                key=ctx.node_key(state, 0.0), gear=0)


def accumulate_cost(parent: Node, control: ControlInput, weights: CostWeights,
                    horizon: float) -> float:
    """Parent cost plus length, steering, reverse and switching penalties."""
    dist = abs(control.v) * horizon
    c = parent.c_g
    c += weights.w_len * (weights.w_rev * dist if control.v < 0.0 else dist)
    c += weights.w_delta * abs(control.delta)
    new_gear = 0 if control.v == 0.0 else (1 if control.v > 0.0 else -1)
    if new_gear and parent.gear and new_gear != parent.gear:
        c += weights.w_switch_gear
    prev_delta = parent.control.delta if parent.control is not None else 0.0
    c += weights.w_switch_steer * abs(control.delta - prev_delta)
    return c


def _expand(node: Node, ctx: _Context) -> list[Node]:
    cfg = ctx.cfg
    prims = cfg.primitives
    times = node.t + np.arange(prims.steps + 1) * prims.dt
    static_pts = ctx.static_points_near(node.state[:2])
    children = []
    for u, local in ctx.rollouts:
        states = ctx.transform_rollout(local, node.state)
        if not ctx.states_clear(states, times, static_pts):
            continue
        tau_o = ctx.preds.positions_at(times) if ctx.timed else np.zeros((len(times), 0, 2))
        end = states[-1]
        c_g = accumulate_cost(node, u, cfg.weights, prims.horizon)
        gear = node.gear if u.v == 0.0 else (1 if u.v > 0.0 else -1)
        t_child = node.t + prims.horizon
        children.append(Node(state=end, t=t_child, parent=node, control=u, tau=states,
                             tau_o=tau_o, c_g=c_g,
                             c_h=ctx.heuristic_value(end[0], end[1]),
                             key=ctx.node_key(end, t_child), gear=gear))
    return children


def expand_neighbors(node: Node, cfg: PlannerConfig, static_map: StaticMap,
                     preds: PredictionSet, goal: VehicleState) -> list[Node]:
    """Valid successor nodes of ``node`` (one per surviving primitive)."""
    return _expand(node, _make_context(cfg, static_map, preds, goal))


def _rs_shot_cost(path: rs.RSPath, weights: CostWeights) -> float:
    """Ranking cost of an analytic connection: length, reverse and gear switches."""
    c = 0.0
    prev_gear = 0
    for seg in path.segments:
        c += weights.w_len * (weights.w_rev * seg.length if seg.gear < 0 else seg.length)
        if prev_gear and seg.gear != prev_gear:
            c += weights.w_switch_gear
        prev_gear = seg.gear
    return c


def _shot_samples(path: rs.RSPath, start: np.ndarray, cfg: PlannerConfig):
    """Fixed-rate executed samples of an analytic path.

    Each segment is traversed at constant speed <= v_max in an integer number
    of dt steps, so every hop is reproducible by one constant control.
    Returns (states (M, 3), hop_controls list of length M - 1).
    """
    prims = cfg.primitives
    dt = prims.dt
    states = [start.copy()]
    hop_controls: list[ControlInput] = []
    pose = VehicleState.from_array(start)
    for seg in path.segments:
        duration = seg.length / prims.v_max
        n_hops = max(1, math.ceil(duration / dt - 1e-9))
        v = seg.gear * seg.length / (n_hops * dt)
        delta = {"L": prims.delta_max, "R": -prims.delta_max, "S": 0.0}[seg.steer]
        u = ControlInput(v, delta)
        for k in range(1, n_hops + 1):
            sk = arc_closed_form(pose, u, k * dt, cfg.geometry.wheelbase)
            states.append(sk.as_array())
            hop_controls.append(u)
        pose = VehicleState.from_array(states[-1])
    return np.array(states), hop_controls


def _try_shot(node: Node, ctx: _Context) -> tuple[np.ndarray, list[ControlInput]] | None:
    cfg = ctx.cfg
    goal = ctx.goal
    candidates = rs.solve_all(VehicleState.from_array(node.state), goal,
                              cfg.min_turn_radius())
    candidates.sort(key=lambda p: _rs_shot_cost(p, cfg.weights))
    dt = cfg.primitives.dt
    for path in candidates:
        states, hop_controls = _shot_samples(path, node.state, cfg)
        times = node.t + np.arange(len(states)) * dt
        if ctx.states_clear(states, times):
            return states, hop_controls
    return None


def try_rs_shot(node: Node, goal: VehicleState, static_map: StaticMap,
                preds: PredictionSet, cfg: PlannerConfig) -> list[PathSample] | None:
    """Validated analytic connection from a node to the goal, or None.

    The returned samples start at the node's own pose and time.
    """
    ctx = _make_context(cfg, static_map, preds, goal)
    shot = _try_shot(node, ctx)
    if shot is None:
        return None
    states, hop_controls = shot
    dt = cfg.primitives.dt
    out = []
    for j, st in enumerate(states):
        u = hop_controls[j] if j < len(hop_controls) else None
        out.append(PathSample(node.t + j * dt, VehicleState.from_array(st), u))
    return out


def backtrack(goal_node: Node,
              shot: tuple[np.ndarray, list[ControlInput]] | None = None,
              dt: float = 0.1) -> TimedPath:
    """Concatenate the parent-chain trajectories plus an optional analytic tail."""
    chain = []
    cur: Optional[Node] = goal_node
    while cur is not None:
        chain.append(cur)
        cur = cur.parent
    chain.reverse()
    states: list[np.ndarray] = [chain[0].tau[0]]
    hop_controls: list[Optional[ControlInput]] = []
    for nd in chain[1:]:
        for row in nd.tau[1:]:
            states.append(row)
            hop_controls.append(nd.control)
    if shot is not None:
        shot_states, shot_controls = shot
        for row, u in zip(shot_states[1:], shot_controls):
            states.append(row)
            hop_controls.append(u)
    samples = []
    for j, st in enumerate(states):
        u = hop_controls[j] if j < len(hop_controls) else None
        samples.append(PathSample(j * dt, VehicleState.from_array(st), u))
    return TimedPath(samples, PathOutcome.REACHED_GOAL)


def _stationary(x0: VehicleState) -> TimedPath:
    return TimedPath([PathSample(0.0, x0, None)], PathOutcome.STATIONARY)


def plan(x0: VehicleState, goal: VehicleState, static_map: StaticMap, preds: PredictionSet,
         iter_max: int, cfg: PlannerConfig, trace: list | None = None) -> TimedPath:
    """Best-first search from ``x0`` toward ``goal``; returns the stationary path
    when the iteration budget runs out.

    ``trace``, when given, collects one record per processed node:
    (key, c_g, c_h, parent key or None).
    """
    ctx = _make_context(cfg, static_map, preds, goal)
    root = _root(ctx, x0)
    prims = cfg.primitives
    t_cap = preds.horizon if ctx.timed else math.inf

    heap: list[tuple[float, float, int, Node]] = []
    best_f: dict[NodeKey, float] = {}
    closed: set[NodeKey] = set()
    seq = 0
    f0 = root.c_g + root.c_h
    heapq.heappush(heap, (f0, root.c_h, seq, root))
    best_f[root.key] = f0

    pops = 0
    while heap and pops < iter_max:
        f, _, _, node = heapq.heappop(heap)
        if node.key in closed or f > best_f.get(node.key, math.inf) + 1e-12:
            continue
        pops += 1
        closed.add(node.key)
        if trace is not None:
            trace.append((node.key, node.c_g, node.c_h,
                          node.parent.key if node.parent is not None else None))

        dx = node.state[0] - goal.x
        dy = node.state[1] - goal.y
        if (math.hypot(dx, dy) <= cfg.goal_pos_tol
                and abs(wrap_angle(node.state[2] - goal.theta)) <= cfg.goal_heading_tol):
            # connect the residual pose error analytically when possible
            shot = _try_shot(node, ctx)
            return backtrack(node, shot, prims.dt)

        if node.c_h < cfg.h_thresh:
            shot = _try_shot(node, ctx)
            if shot is not None:
                return backtrack(node, shot, prims.dt)

        if node.t + prims.horizon > t_cap + 1e-9:
            continue
        for child in _expand(node, ctx):
            if child.key in closed:
                continue
            fc = child.c_g + child.c_h
            if fc < best_f.get(child.key, math.inf) - 1e-12:
                best_f[child.key] = fc
                seq += 1
                heapq.heappush(heap, (fc, child.c_h, seq, child))

    return _stationary(x0)
