"""Transition planning between consecutive skills.

Chaining poses start on the straight interpolant between the previous goal
and the next start pose, then slide down the cost field until they clear the
collision threshold.  An RRT with greedy shortcutting connects the sequence.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .costmap import CostMap
from .errors import NoFreeChain, PlanningFailure
from .geometry import Pose, quat_slerp

MAX_REFINE_ITERS = 200
MAX_INTERPOLANT_DEVIATION = 0.15


@dataclass
class RrtParams:
    step: float = 0.03
    goal_bias: float = 0.1
    max_iters: int = 5000
    seed: int = 0


@dataclass
class ChainingResult:
    poses: list[Pose]
    path: list[np.ndarray]
    cost_profile: list[float] = field(default_factory=list)

    def path_length(self) -> float:
        return float(sum(np.linalg.norm(b - a) for a, b in zip(self.path, self.path[1:])))

    def to_dict(self) -> dict:
        return {"poses": [p.to_dict() for p in self.poses],
                "path": [[round(float(v), 12) for v in w] for w in self.path],
                "cost_profile": [round(float(c), 12) for c in self.cost_profile]}


def _cost_gradient(cmap: CostMap, point: np.ndarray) -> np.ndarray:
    h = cmap.voxel_size
    grad = np.zeros(3)
    for axis in range(3):
        offset = np.zeros(3)
        offset[axis] = h
        grad[axis] = (cmap.cost_at(point + offset) - cmap.cost_at(point - offset)) / (2 * h)
    return grad


def _refine_position(init: np.ndarray, cmap: CostMap) -> np.ndarray:
    """Projected gradient descent on the cost field, anchored to the interpolant."""
    pos = init.copy()
    step = 0.5 * cmap.voxel_size
    for _ in range(MAX_REFINE_ITERS):
        if cmap.is_free(pos):
            return pos
        grad = _cost_gradient(cmap, pos)
        norm = float(np.linalg.norm(grad))
        if norm < 1e-12:
            # flat plateau inside an obstacle: nudge toward the map center
            direction = cmap.origin + 0.5 * (cmap.upper - cmap.origin) - pos
            dnorm = float(np.linalg.norm(direction))
            if dnorm < 1e-12:
                break
            pos = pos + step * direction / dnorm
        else:
            pos = pos - step * grad / norm
        offset = pos - init
        dev = float(np.linalg.norm(offset))
        if dev > MAX_INTERPOLANT_DEVIATION:
            pos = init + offset * (MAX_INTERPOLANT_DEVIATION / dev)
    if cmap.is_free(pos):
        return pos
    raise NoFreeChain(f"no collision-free chaining pose near {init}")


def chaining_poses(start: Pose, end: Pose, cmap: CostMap, m: int) -> list[Pose]:
    if m < 0:
        raise ValueError("number of chaining poses must be non-negative")
    poses = []
    for k in range(1, m + 1):
        t = k / (m + 1)
        init = (1 - t) * start.position + t * end.position
        position = _refine_position(np.asarray(init), cmap)
        orientation = quat_slerp(start.orientation, end.orientation, t)
        poses.append(Pose(position, orientation))
    return poses


def _steer(from_pt: np.ndarray, to_pt: np.ndarray, step: float) -> np.ndarray:
    delta = to_pt - from_pt
    dist = float(np.linalg.norm(delta))
    if dist <= step:
        return to_pt
    return from_pt + delta * (step / dist)


def _shortcut(path: list[np.ndarray], cmap: CostMap) -> list[np.ndarray]:
    """Greedy pruning: from each node jump to the furthest visible node."""
    out = [path[0]]
    i = 0
    while i < len(path) - 1:
        j = len(path) - 1
        while j > i + 1 and not cmap.segment_free(path[i], path[j]):
            j -= 1
        out.append(path[j])
        i = j
    return out


def rrt_path(a, b, cmap: CostMap, params: RrtParams | None = None) -> list[np.ndarray]:
    """Plan a collision-free polyline from a to b.  Deterministic given the seed."""
    params = params or RrtParams()
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if not cmap.is_free(a) or not cmap.is_free(b):
        raise PlanningFailure(f"endpoint in collision: a={a} (cost {cmap.cost_at(a):.3f}), "
                              f"b={b} (cost {cmap.cost_at(b):.3f})")
    if np.allclose(a, b):
        return [a]
    if cmap.segment_free(a, b):
        return [a, b]

    rng = np.random.default_rng(params.seed)
    map_lo, map_hi = cmap.origin, cmap.upper
    # half the samples come from a window around the endpoints: connection
    # legs are short and pure whole-map sampling starves the region of interest
    margin = max(0.15, 2 * float(np.linalg.norm(b - a)))
    win_lo = np.maximum(np.minimum(a, b) - margin, map_lo)
    win_hi = np.minimum(np.maximum(a, b) + margin, map_hi)
    nodes = [a]
    parents = [-1]
    for _ in range(params.max_iters):
        roll = rng.random()
        if roll < params.goal_bias:
            sample = b
        elif roll < 0.5 + params.goal_bias / 2:
            sample = win_lo + rng.random(3) * (win_hi - win_lo)
        else:
            sample = map_lo + rng.random(3) * (map_hi - map_lo)
        dists = np.linalg.norm(np.asarray(nodes) - sample, axis=1)
        nearest = int(np.argmin(dists))
        new_pt = _steer(nodes[nearest], sample, params.step)
        if not cmap.segment_free(nodes[nearest], new_pt):
            continue
        nodes.append(new_pt)
        parents.append(nearest)
        if np.linalg.norm(new_pt - b) <= params.step and cmap.segment_free(new_pt, b):
            path = [b]
            idx = len(nodes) - 1
            while idx >= 0:
                path.append(nodes[idx])
                idx = parents[idx]
            path.reverse()
            return _shortcut(path, cmap)
    raise PlanningFailure(f"RRT failed to connect after {params.max_iters} iterations")


def chain_skills(goal_prev: Pose, start_next: Pose, cmap: CostMap, m: int,
                 params: RrtParams | None = None) -> ChainingResult:
    """Chaining poses plus RRT legs from the previous goal to the next start."""
    params = params or RrtParams()
    poses = chaining_poses(goal_prev, start_next, cmap, m)
    anchors = [goal_prev.position] + [p.position for p in poses] + [start_next.position]
    path: list[np.ndarray] = []
    for leg, (p, q) in enumerate(zip(anchors, anchors[1:])):
        leg_params = RrtParams(params.step, params.goal_bias, params.max_iters,
                               params.seed + leg)
        sub = rrt_path(p, q, cmap, leg_params)
        if path:
            sub = sub[1:]
        path.extend(sub)
    if not path:
        path = [np.asarray(goal_prev.position, dtype=float)]
    profile = [cmap.cost_at(w) for w in path]
    return ChainingResult(poses=poses, path=path, cost_profile=profile)


def export_path(path, out_path):
    with open(out_path, "w") as fh:
        json.dump([[round(float(v), 12) for v in w] for w in path], fh)
