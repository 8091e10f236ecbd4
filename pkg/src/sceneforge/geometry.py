"""Placement parameterization, transforms, world boxes, collision and
overhang tests shared by corpus extraction, layout, and camera."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import kernels
from .catalog import BoxSide, Catalog, Model, SurfaceFeature, fallback_support_surfaces, side_face_center
from .errors import SceneforgeError, SceneStructureError

TWO_PI = 2.0 * np.pi

# Per-face shrink tolerance for the collision test: touching contact and
# sub-5mm jitter do not count as collision.
EPS_COL = 0.005

# Placements rejected when more than this fraction of the footprint hangs
# off the support surface.
OVERHANG_MAX = 0.05

ROOT_CATEGORY = "room"


def wrap_angle(theta: float) -> float:
    """Map an angle to [0, 2*pi)."""
    t = float(theta) % TWO_PI
    return t if t >= 0.0 else t + TWO_PI


def signed_angle_diff(a: float, b: float) -> float:
    """Smallest signed difference a-b in (-pi, pi]."""
    d = (a - b + np.pi) % TWO_PI - np.pi
    return float(np.pi) if d == -np.pi else float(d)


def rot_z(yaw: float) -> np.ndarray:
    c, s = np.cos(yaw), np.sin(yaw)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


@dataclass(frozen=True)
class Transform:
    """Rigid transform restricted to yaw about world up plus uniform scale."""

    translation: tuple[float, float, float]
    yaw: float
    scale: float

    @property
    def t(self) -> np.ndarray:
        return np.asarray(self.translation, dtype=float)

    def apply(self, p: np.ndarray) -> np.ndarray:
        return self.scale * (rot_z(self.yaw) @ np.asarray(p, dtype=float)) + self.t

    def apply_many(self, pts: np.ndarray) -> np.ndarray:
        return self.scale * (np.asarray(pts, dtype=float) @ rot_z(self.yaw).T) + self.t

    def inverse_apply(self, p: np.ndarray) -> np.ndarray:
        return (rot_z(-self.yaw) @ (np.asarray(p, dtype=float) - self.t)) / self.scale


@dataclass
class Placement:
    """Semantic placement parameters of one instance.

    ``pos_on_surface`` is a metric (u, v) offset from the parent surface
    rect center along its in-plane axes; ``yaw`` is relative to the parent's
    world yaw (world yaw for root instances).
    """

    support_parent: str | None = None
    support_surface: int = 0
    attachment_side: BoxSide = BoxSide.BOTTOM
    pos_on_surface: tuple[float, float] = (0.0, 0.0)
    yaw: float = 0.0
    scale: float = 1.0

    def __post_init__(self):
        if self.scale <= 0:
            raise SceneforgeError("placement scale must be positive")
        self.yaw = wrap_angle(self.yaw)


@dataclass
class ModelInstance:
    """A placed model: semantic placement plus the derived rigid transform."""

    id: str
    model_id: str
    placement: Placement
    transform: Transform
    object_index: int | None = None  # template object this instance realizes


@dataclass
class GeometricScene:
    """Ordered set of model instances with their support forest."""

    instances: list[ModelInstance] = field(default_factory=list)
    support_edges: dict[str, str] = field(default_factory=dict)  # child id -> parent id
    scene_type: str = "room"
    degraded: bool = False

    def instance(self, inst_id: str) -> ModelInstance:
        for inst in self.instances:
            if inst.id == inst_id:
                return inst
        raise KeyError(inst_id)

    def has_instance(self, inst_id: str) -> bool:
        return any(i.id == inst_id for i in self.instances)

    def children_of(self, inst_id: str) -> list[str]:
        return [c for c, p in self.support_edges.items() if p == inst_id]

    def root_id(self) -> str | None:
        roots = [i.id for i in self.instances if i.id not in self.support_edges]
        return roots[0] if roots else None

    def bounds(self, catalog: Catalog) -> tuple[np.ndarray, np.ndarray]:
        """World AABB (min, max) over all instance boxes."""
        lo = np.full(3, np.inf)
        hi = np.full(3, -np.inf)
        for inst in self.instances:
            corners = world_box(inst, catalog.by_id[inst.model_id]).corners()
            lo = np.minimum(lo, corners.min(axis=0))
            hi = np.maximum(hi, corners.max(axis=0))
        return lo, hi


@dataclass(frozen=True)
class WorldBox:
    """World-space oriented box (yaw-only): center, scaled half-extents, yaw."""

    center: tuple[float, float, float]
    half: tuple[float, float, float]
    yaw: float

    @property
    def c(self) -> np.ndarray:
        return np.asarray(self.center, dtype=float)

    @property
    def h(self) -> np.ndarray:
        return np.asarray(self.half, dtype=float)

    @property
    def z_interval(self) -> tuple[float, float]:
        return self.center[2] - self.half[2], self.center[2] + self.half[2]

    def corners(self) -> np.ndarray:
        signs = np.array(
            [[sx, sy, sz] for sx in (-1, 1) for sy in (-1, 1) for sz in (-1, 1)], dtype=float
        )
        local = signs * self.h
        return local @ rot_z(self.yaw).T + self.c

    def as_params(self) -> np.ndarray:
        return np.array([*self.center, *self.half, self.yaw])

    def contains_point(self, p: np.ndarray, eps: float = 0.0) -> bool:
        local = rot_z(-self.yaw) @ (np.asarray(p, dtype=float) - self.c)
        return bool(np.all(np.abs(local) <= self.h + eps))

    def diagonal(self) -> float:
        return float(2.0 * np.linalg.norm(self.h))


@dataclass(frozen=True)
class Rect2:
    """Rect in a surface plane: center, half-extents, in-plane rotation."""

    center: tuple[float, float]
    half: tuple[float, float]
    angle: float = 0.0


def surfaces_of(model: Model) -> list[SurfaceFeature]:
    """Annotated support surfaces, or the geometric fallback."""
    return fallback_support_surfaces(model)


def compose_transform(
    p: Placement,
    child: Model,
    parent: ModelInstance | None,
    parent_model: Model | None,
) -> Transform:
    """Derive the child's world transform from its placement.

    The child's attachment-side face center lands on the parent-surface
    point at ``pos_on_surface``; yaw composes with the parent's world yaw;
    the child is uniformly scaled.  A ``None`` parent means the world
    ground plane at z=0.
    """
    u, v = p.pos_on_surface
    if parent is None:
        world_pt = np.array([u, v, 0.0])
        parent_yaw = 0.0
    else:
        assert parent_model is not None
        surfs = surfaces_of(parent_model)
        if not 0 <= p.support_surface < len(surfs):
            raise SceneforgeError(
                f"invalid surface index {p.support_surface} for model {parent_model.id!r}"
            )
        local_pt = surfs[p.support_surface].local_point(u, v)
        world_pt = parent.transform.apply(local_pt)
        parent_yaw = parent.transform.yaw
    yaw = wrap_angle(parent_yaw + p.yaw)
    attach = side_face_center(p.attachment_side, child.he)
    t = world_pt - p.scale * (rot_z(yaw) @ attach)
    return Transform(translation=tuple(t), yaw=yaw, scale=p.scale)


def decompose_transform(
    tr: Transform,
    p: Placement,
    child: Model,
    parent: ModelInstance | None,
    parent_model: Model | None,
) -> Placement:
    """Recover placement parameters from a world transform (inverse of
    compose_transform for the same parent/surface/side)."""
    attach = side_face_center(p.attachment_side, child.he)
    world_pt = tr.t + tr.scale * (rot_z(tr.yaw) @ attach)
    if parent is None:
        u, v = world_pt[0], world_pt[1]
        rel_yaw = tr.yaw
    else:
        assert parent_model is not None
        surf = surfaces_of(parent_model)[p.support_surface]
        local_pt = parent.transform.inverse_apply(world_pt)
        d = local_pt - np.asarray(surf.center, dtype=float)
        uhat, vhat = surf.unit_axes
        u, v = float(d @ uhat), float(d @ vhat)
        rel_yaw = tr.yaw - parent.transform.yaw
    return replace(p, pos_on_surface=(u, v), yaw=wrap_angle(rel_yaw), scale=tr.scale)


def world_box(i: ModelInstance, m: Model) -> WorldBox:
    """Model box scaled, yawed, and translated into world space."""
    return WorldBox(
        center=i.transform.translation,
        half=tuple(i.transform.scale * m.he),
        yaw=i.transform.yaw,
    )


def collides(a: WorldBox, b: WorldBox) -> bool:
    """True iff box interiors intersect after the EPS_COL per-face shrink."""
    return bool(kernels.boxes_overlap(a.as_params(), b.as_params(), EPS_COL))


def box_inside(inner: WorldBox, outer: WorldBox, eps: float = 0.0) -> bool:
    """All corners of ``inner`` within ``outer`` expanded by ``eps``."""
    return all(outer.contains_point(c, eps) for c in inner.corners())


def overhang_fraction(child_footprint: Rect2, surface: Rect2) -> float:
    """Area fraction of the child footprint outside the surface rect.

    Both rects live in the same plane frame; the surface rect must be
    axis-aligned in that frame (its own frame is used by callers).
    """
    if surface.angle != 0.0:
        raise SceneforgeError("surface rect must be axis-aligned in its own frame")
    center = np.asarray(child_footprint.center) - np.asarray(surface.center)
    return float(
        kernels.rect_outside_fraction(
            center,
            np.asarray(child_footprint.half),
            child_footprint.angle,
            np.asarray(surface.half),
        )
    )


def surface_world_frame(
    surf: SurfaceFeature, parent_tr: Transform
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, tuple[float, float]]:
    """World-space frame of a parent surface.

    Returns (origin, u_hat, v_hat, normal, (half_u, half_v)) with the
    half-lengths scaled by the parent's scale.
    """
    origin = parent_tr.apply(np.asarray(surf.center, dtype=float))
    rot = rot_z(parent_tr.yaw)
    uhat, vhat = surf.unit_axes
    u_w = rot @ uhat
    v_w = rot @ vhat
    n_w = rot @ surf.normal
    hu, hv = surf.half_lengths
    return origin, u_w, v_w, n_w, (parent_tr.scale * hu, parent_tr.scale * hv)


def footprint_on_surface(box: WorldBox, surf: SurfaceFeature, parent_tr: Transform) -> Rect2:
    """Projection of a world box onto a parent surface, in surface coords.

    For up/down surfaces this is the box's yaw-rotated horizontal
    cross-section; for vertical surfaces the projection is an axis-aligned
    rect (support interval along the wall times the z interval).  Both are
    exact for yaw-only boxes.
    """
    origin, u_w, v_w, n_w, _ = surface_world_frame(surf, parent_tr)
    d = box.c - origin
    cu, cv = float(d @ u_w), float(d @ v_w)
    if abs(n_w[2]) > 0.5:  # horizontal surface (up or down facing)
        axis_angle = np.arctan2(u_w[1], u_w[0])
        return Rect2(
            center=(cu, cv),
            half=(box.half[0], box.half[1]),
            angle=wrap_angle(box.yaw - axis_angle),
        )
    # Vertical surface: exactly one of u/v is the world z axis.
    box_x = rot_z(box.yaw) @ np.array([1.0, 0.0, 0.0])
    box_y = rot_z(box.yaw) @ np.array([0.0, 1.0, 0.0])

    def support_radius(axis: np.ndarray) -> float:
        if abs(axis[2]) > 0.5:
            return box.half[2]
        return box.half[0] * abs(float(axis @ box_x)) + box.half[1] * abs(float(axis @ box_y))

    return Rect2(center=(cu, cv), half=(support_radius(u_w), support_radius(v_w)), angle=0.0)


# ---------------------------------------------------------------------------
# Scene wire format


def scene_to_wire(scene: GeometricScene, catalog: Catalog) -> dict:
    """Scene as the JSON wire structure (translation emitted for viewers)."""
    instances = []
    for inst in scene.instances:
        entry: dict = {
            "id": inst.id,
            "modelId": inst.model_id,
        }
        parent = scene.support_edges.get(inst.id)
        if parent is not None:
            entry["parentId"] = parent
            entry["surfaceIndex"] = int(inst.placement.support_surface)
        entry["posOnSurface"] = [float(x) for x in inst.placement.pos_on_surface]
        entry["yaw"] = float(inst.transform.yaw)
        entry["scale"] = float(inst.transform.scale)
        entry["translation"] = [float(x) for x in inst.transform.translation]
        instances.append(entry)
    wire: dict = {"sceneType": scene.scene_type, "instances": instances}
    if scene.degraded:
        wire["degraded"] = True
    return wire


def scene_to_json(scene: GeometricScene, catalog: Catalog) -> str:
    return json.dumps(scene_to_wire(scene, catalog), indent=2, sort_keys=True)


def wire_to_scene(wire: dict, catalog: Catalog) -> GeometricScene:
    """Rebuild a scene from the wire structure.

    Attachment sides are not carried on the wire; they are re-derived from
    the model's annotation or the geometric fallback, which is sufficient
    for corpus extraction and rendering (transforms are stored verbatim).
    """
    from .catalog import fallback_attachment_side

    scene = GeometricScene(
        scene_type=wire.get("sceneType", "room"),
        degraded=bool(wire.get("degraded", False)),
    )
    world_yaw: dict[str, float] = {}
    for entry in wire["instances"]:
        parent_id = entry.get("parentId")
        model = catalog.by_id[entry["modelId"]]
        yaw = float(entry["yaw"])
        rel_yaw = yaw - world_yaw.get(parent_id, 0.0) if parent_id else yaw
        placement = Placement(
            support_parent=parent_id,
            support_surface=int(entry.get("surfaceIndex", 0)),
            attachment_side=fallback_attachment_side(model),
            pos_on_surface=tuple(entry.get("posOnSurface", (0.0, 0.0))),
            yaw=rel_yaw,
            scale=float(entry["scale"]),
        )
        inst = ModelInstance(
            id=entry["id"],
            model_id=entry["modelId"],
            placement=placement,
            transform=Transform(
                translation=tuple(float(x) for x in entry["translation"]),
                yaw=wrap_angle(yaw),
                scale=float(entry["scale"]),
            ),
        )
        world_yaw[inst.id] = inst.transform.yaw
        scene.instances.append(inst)
        if parent_id is not None:
            scene.support_edges[inst.id] = parent_id
    _check_forest(scene)
    return scene


def load_scene(path: str | Path, catalog: Catalog) -> GeometricScene:
    return wire_to_scene(json.loads(Path(path).read_text(encoding="utf-8")), catalog)


def _check_forest(scene: GeometricScene) -> None:
    ids = {i.id for i in scene.instances}
    for child, parent in scene.support_edges.items():
        if child not in ids or parent not in ids:
            raise SceneStructureError(f"support edge {child}->{parent} references unknown instance")
    for start in scene.support_edges:
        seen = set()
        cur: str | None = start
        while cur is not None:
            if cur in seen:
                raise SceneStructureError(f"support cycle at {cur!r}")
            seen.add(cur)
            cur = scene.support_edges.get(cur)
