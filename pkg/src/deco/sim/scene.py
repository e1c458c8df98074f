"""Kinematic desk-scale world: drawer unit, cupboard shelf, dustpan, objects.

The gripper teleports along straight segments.  Collisions with static
geometry are detected and counted but never block motion; the one physical
consequence modeled is that scraping the open drawer's walls slams it mostly
shut, which is exactly the failure mode poor transition planning produces.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from ..costmap import Bounds
from ..errors import OutOfBounds
from ..geometry import IDENTITY_QUAT, Pose
from ..trajectory import GripperState

# workspace (robot base frame, meters)
WORKSPACE = Bounds((0.20, -0.45, 0.0), (0.80, 0.45, 0.50))
HOME = np.array([0.30, 0.0, 0.30])

GRASP_RADIUS = 0.04
SWEEP_RADIUS = 0.05
SEGMENT_SAMPLE_RES = 0.005
SLAM_FRACTION = 0.15

# drawer unit: cabinet fixed, tray slides out toward -x
CABINET_LO = np.array([0.55, -0.35, 0.0])
CABINET_HI = np.array([0.75, -0.15, 0.14])
DRAWER_TRAVEL = 0.15
DRAWER_WALL = 0.015
DRAWER_WALL_TOP = 0.125
HANDLE_Y = -0.25
HANDLE_Z = 0.07

# cupboard: open front at -x, elevated shelf
CUPBOARD_LO = np.array([0.55, 0.15, 0.14])
CUPBOARD_HI = np.array([0.75, 0.35, 0.32])
CUPBOARD_WALL = 0.02

# dustpan tray
DUSTPAN_LO = np.array([0.29, 0.24, 0.0])
DUSTPAN_HI = np.array([0.41, 0.36, 0.05])

OBJECT_HALF = {"block": 0.02, "box": 0.025, "broom": 0.02, "dustpan": 0.0, "rubbish": 0.0}
GRASPABLE_KINDS = {"block", "box", "broom", "rubbish"}

HANDLE_NAME = "drawer_handle"


class GripperCommand(str, Enum):
    OPEN = "open"
    CLOSE = "close"
    HOLD = "hold"


@dataclass(frozen=True)
class Action:
    target: Pose
    gripper_command: GripperCommand = GripperCommand.HOLD


@dataclass(frozen=True)
class Box:
    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        lo = np.asarray(self.lo, dtype=float)
        hi = np.asarray(self.hi, dtype=float)
        if np.any(hi <= lo):
            raise ValueError(f"degenerate box: {lo} .. {hi}")
        lo.flags.writeable = False
        hi.flags.writeable = False
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    def contains(self, point) -> bool:
        p = np.asarray(point, dtype=float)
        return bool(np.all(p >= self.lo) and np.all(p <= self.hi))

    def intersects_samples(self, samples: np.ndarray) -> bool:
        return bool(np.any(np.all((samples >= self.lo) & (samples <= self.hi), axis=1)))


@dataclass
class SimObject:
    kind: str
    position: np.ndarray
    held: bool = False

    def copy(self) -> "SimObject":
        return SimObject(self.kind, np.array(self.position, dtype=float), self.held)


@dataclass
class Scene:
    drawer_present: bool = False
    open_fraction: float = 0.0
    cupboard_present: bool = False
    dustpan_present: bool = False
    objects: dict[str, SimObject] = field(default_factory=dict)
    gripper_position: np.ndarray = field(default_factory=lambda: HOME.copy())
    gripper_state: GripperState = GripperState.OPEN
    held_object: str | None = None
    collision_count: int = 0
    drawer_slams: int = 0
    rng_seed: int = 0

    def copy(self) -> "Scene":
        return replace(self,
                       objects={k: v.copy() for k, v in self.objects.items()},
                       gripper_position=np.array(self.gripper_position, dtype=float))

    # --- derived geometry ---

    def drawer_front_x(self) -> float:
        return CABINET_LO[0] - DRAWER_TRAVEL * self.open_fraction

    def handle_position(self) -> np.ndarray:
        return np.array([self.drawer_front_x() - 0.025, HANDLE_Y, HANDLE_Z])

    def drawer_interior(self) -> Box:
        shift = DRAWER_TRAVEL * self.open_fraction
        return Box((CABINET_LO[0] + 0.01 - shift, CABINET_LO[1] + 0.01, 0.02),
                   (CABINET_HI[0] - 0.02 - shift, CABINET_HI[1] - 0.01, DRAWER_WALL_TOP))

    def drawer_boxes(self) -> list[Box]:
        """Collision boxes of the tray part protruding from the cabinet."""
        if not self.drawer_present or self.open_fraction < 0.03:
            return []
        front = self.drawer_front_x()
        boxes = [Box((front - DRAWER_WALL, CABINET_LO[1], 0.0),
                     (front, CABINET_HI[1], DRAWER_WALL_TOP))]
        for y0, y1 in ((CABINET_LO[1], CABINET_LO[1] + DRAWER_WALL),
                       (CABINET_HI[1] - DRAWER_WALL, CABINET_HI[1])):
            boxes.append(Box((front - DRAWER_WALL, y0, 0.0),
                             (CABINET_LO[0], y1, DRAWER_WALL_TOP)))
        boxes.append(Box((front - DRAWER_WALL, CABINET_LO[1], 0.0),
                         (CABINET_LO[0], CABINET_HI[1], 0.02)))
        return boxes

    def cupboard_interior(self) -> Box:
        return Box((CUPBOARD_LO[0], CUPBOARD_LO[1] + CUPBOARD_WALL, CUPBOARD_LO[2] + CUPBOARD_WALL),
                   (CUPBOARD_HI[0] - CUPBOARD_WALL, CUPBOARD_HI[1] - CUPBOARD_WALL,
                    CUPBOARD_HI[2] - CUPBOARD_WALL))

    def cupboard_boxes(self) -> list[Box]:
        if not self.cupboard_present:
            return []
        lo, hi, w = CUPBOARD_LO, CUPBOARD_HI, CUPBOARD_WALL
        return [Box((lo[0], lo[1], lo[2]), (hi[0], hi[1], lo[2] + w)),          # bottom
                Box((lo[0], lo[1], hi[2] - w), (hi[0], hi[1], hi[2])),          # top
                Box((hi[0] - w, lo[1], lo[2]), (hi[0], hi[1], hi[2])),          # back
                Box((lo[0], lo[1], lo[2]), (hi[0], lo[1] + w, hi[2])),          # side
                Box((lo[0], hi[1] - w, lo[2]), (hi[0], hi[1], hi[2]))]          # side

    def dustpan_volume(self) -> Box:
        return Box(DUSTPAN_LO, DUSTPAN_HI)

    def dustpan_boxes(self) -> list[Box]:
        if not self.dustpan_present:
            return []
        return [Box(DUSTPAN_LO, (DUSTPAN_HI[0], DUSTPAN_HI[1], DUSTPAN_LO[2] + 0.01))]

    def static_boxes(self, include_drawer: bool = True) -> list[Box]:
        boxes = []
        if self.drawer_present:
            boxes.append(Box(CABINET_LO, CABINET_HI))
            if include_drawer:
                boxes.extend(self.drawer_boxes())
        boxes.extend(self.cupboard_boxes())
        boxes.extend(self.dustpan_boxes())
        return boxes

    def object_boxes(self, exclude_held: bool = True) -> list[Box]:
        boxes = []
        for name, obj in sorted(self.objects.items()):
            if exclude_held and obj.held:
                continue
            half = OBJECT_HALF.get(obj.kind, 0.0)
            if half > 0:
                boxes.append(Box(obj.position - half, obj.position + half))
        return boxes

    # --- queries ---

    def gripper_pose(self) -> Pose:
        return Pose(self.gripper_position, IDENTITY_QUAT)

    def rubbish_names(self) -> list[str]:
        return sorted(n for n, o in self.objects.items() if o.kind == "rubbish")

    def rubbish_in_dustpan_fraction(self) -> float:
        names = self.rubbish_names()
        if not names:
            return 0.0
        vol = self.dustpan_volume()
        inside = sum(1 for n in names if vol.contains(self.objects[n].position))
        return inside / len(names)

    def to_dict(self) -> dict:
        return {"drawer_present": self.drawer_present,
                "open_fraction": round(self.open_fraction, 9),
                "cupboard_present": self.cupboard_present,
                "dustpan_present": self.dustpan_present,
                "objects": {n: {"kind": o.kind,
                                "position": [round(float(v), 9) for v in o.position],
                                "held": o.held}
                            for n, o in sorted(self.objects.items())},
                "gripper": {"position": [round(float(v), 9) for v in self.gripper_position],
                            "state": self.gripper_state.value,
                            "held_object": self.held_object},
                "collision_count": self.collision_count,
                "drawer_slams": self.drawer_slams,
                "rng_seed": self.rng_seed}


def _segment_samples(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    length = float(np.linalg.norm(b - a))
    n = max(1, int(np.ceil(length / SEGMENT_SAMPLE_RES)))
    ts = np.linspace(0.0, 1.0, n + 1)
    return a[None, :] + ts[:, None] * (b - a)[None, :]


def _point_segment_distance(p: np.ndarray, a: np.ndarray, b: np.ndarray) -> float:
    ab = b - a
    denom = float(np.dot(ab, ab))
    t = 0.0 if denom == 0 else float(np.clip(np.dot(p - a, ab) / denom, 0.0, 1.0))
    return float(np.linalg.norm(p - (a + t * ab)))


def _shift_drawer_contents(scene: Scene, old_fraction: float, new_fraction: float):
    """Objects sitting in the tray translate with it."""
    interior = scene.drawer_interior()
    dx = -DRAWER_TRAVEL * (new_fraction - old_fraction)
    for obj in scene.objects.values():
        if not obj.held and interior.contains(obj.position):
            obj.position[0] += dx
    scene.open_fraction = new_fraction


def step(scene: Scene, action: Action) -> Scene:
    """Apply one keyframe action and return the successor scene."""
    target = np.asarray(action.target.position, dtype=float)
    if not WORKSPACE.contains(target):
        raise OutOfBounds(f"action target {target} outside workspace")

    out = scene.copy()
    start = np.array(out.gripper_position)
    samples = _segment_samples(start, target)
    displacement = target - start
    holding_handle = out.held_object == HANDLE_NAME

    # collision bookkeeping + drawer slam
    hit_static = any(b.intersects_samples(samples)
                     for b in (out.static_boxes(include_drawer=not holding_handle)))
    if hit_static:
        out.collision_count += 1
    if not holding_handle and any(b.intersects_samples(samples) for b in out.drawer_boxes()):
        direction = displacement / max(float(np.linalg.norm(displacement)), 1e-12)
        if abs(direction[2]) < 0.9 and out.open_fraction > SLAM_FRACTION:
            _shift_drawer_contents(out, out.open_fraction, SLAM_FRACTION)
            out.drawer_slams += 1

    # move the gripper; handle and held objects track it
    out.gripper_position = target
    if holding_handle:
        new_fraction = float(np.clip(
            out.open_fraction - displacement[0] / DRAWER_TRAVEL, 0.0, 1.0))
        _shift_drawer_contents(out, out.open_fraction, new_fraction)
    elif out.held_object is not None:
        out.objects[out.held_object].position = np.array(target)

    # a held broom sweeps nearby rubbish along the horizontal motion
    if out.held_object is not None and out.objects.get(out.held_object) is not None \
            and out.objects[out.held_object].kind == "broom":
        horizontal = np.array([displacement[0], displacement[1], 0.0])
        if float(np.linalg.norm(horizontal)) > 0.01:
            for name in out.rubbish_names():
                obj = out.objects[name]
                if obj.held:
                    continue
                if _point_segment_distance(obj.position, start, target) <= SWEEP_RADIUS:
                    obj.position = obj.position + horizontal

    # gripper command
    if action.gripper_command is GripperCommand.CLOSE:
        if out.gripper_state is GripperState.OPEN:
            out.gripper_state = GripperState.CLOSED
            out.held_object = _nearest_graspable(out)
            if out.held_object is not None and out.held_object != HANDLE_NAME:
                out.objects[out.held_object].held = True
                out.objects[out.held_object].position = np.array(out.gripper_position)
    elif action.gripper_command is GripperCommand.OPEN:
        if out.held_object is not None and out.held_object != HANDLE_NAME:
            out.objects[out.held_object].held = False
        out.held_object = None
        out.gripper_state = GripperState.OPEN
    return out


def _nearest_graspable(scene: Scene) -> str | None:
    best_name, best_dist = None, GRASP_RADIUS
    for name, obj in sorted(scene.objects.items()):
        if obj.kind not in GRASPABLE_KINDS or obj.held:
            continue
        dist = float(np.linalg.norm(obj.position - scene.gripper_position))
        if dist <= best_dist:
            best_name, best_dist = name, dist
    if scene.drawer_present:
        dist = float(np.linalg.norm(scene.handle_position() - scene.gripper_position))
        if dist <= best_dist:
            best_name = HANDLE_NAME
    return best_name


def point_cloud(scene: Scene, density: float = 2500.0) -> np.ndarray:
    """Stratified surface sampling of every geometry box, plus rubbish points."""
    if density <= 0:
        raise ValueError("density must be positive")
    points = []
    for box in scene.static_boxes() + scene.object_boxes():
        points.append(_sample_box_faces(box, density))
    for name in scene.rubbish_names():
        points.append(scene.objects[name].position[None, :])
    if not points:
        return np.zeros((0, 3))
    return np.vstack(points)


def _sample_box_faces(box: Box, density: float) -> np.ndarray:
    pts = []
    size = box.hi - box.lo
    for axis in range(3):
        u, v = (axis + 1) % 3, (axis + 2) % 3
        nu = max(1, int(round(size[u] * np.sqrt(density))))
        nv = max(1, int(round(size[v] * np.sqrt(density))))
        us = box.lo[u] + (np.arange(nu) + 0.5) * size[u] / nu
        vs = box.lo[v] + (np.arange(nv) + 0.5) * size[v] / nv
        uu, vv = np.meshgrid(us, vs, indexing="ij")
        for w in (box.lo[axis], box.hi[axis]):
            face = np.zeros((nu * nv, 3))
            face[:, axis] = w
            face[:, u] = uu.ravel()
            face[:, v] = vv.ravel()
            pts.append(face)
    return np.vstack(pts)
