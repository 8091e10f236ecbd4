"""Viewpoint selection for "look at" commands.

Candidate cameras orbit the selection at twelve equally spaced azimuths
and a fixed height above its bounding box; each is scored by how many
selected objects it shows, how large the selection appears on screen,
and how much of the whole scene stays visible.  Visibility is decided by
probe points and ray casts against instance boxes, so no renderer is
involved.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .catalog import Catalog
from .errors import SceneforgeError
from .geometry import ROOT_CATEGORY, GeometricScene, WorldBox, world_box

AZIMUTH_COUNT = 12
RADIUS_FACTOR = 1.2
RADIUS_MIN = 0.3  # keeps tiny selections from pinning the camera onto them
HEIGHT_FACTOR = 0.25
FOV_DEGREES = 60.0

# An object counts as visible when at least PROBES_NEEDED of its
# PROBE_COUNT probe points (box center plus corners) are on screen and
# unoccluded.
PROBE_COUNT = 9
PROBES_NEEDED = 5


@dataclass(frozen=True)
class Camera:
    """Pinhole viewpoint: position, look target, up hint, vertical fov."""

    position: tuple[float, float, float]
    target: tuple[float, float, float]
    up: tuple[float, float, float] = (0.0, 0.0, 1.0)
    fov_degrees: float = FOV_DEGREES

    def __post_init__(self):
        p = np.asarray(self.position, dtype=float)
        t = np.asarray(self.target, dtype=float)
        if not np.any(np.abs(p - t) > 1e-12):
            raise SceneforgeError("camera position must differ from its target")
        u = np.asarray(self.up, dtype=float)
        n = float(np.linalg.norm(u))
        if n <= 0.0:
            raise SceneforgeError("camera up vector must be nonzero")
        object.__setattr__(self, "position", tuple(float(x) for x in p))
        object.__setattr__(self, "target", tuple(float(x) for x in t))
        object.__setattr__(self, "up", tuple(float(x) for x in u / n))

    def basis(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Orthonormal (forward, right, up) in world space."""
        fwd = np.asarray(self.target, dtype=float) - np.asarray(
            self.position, dtype=float
        )
        fwd = fwd / np.linalg.norm(fwd)
        right = np.cross(fwd, np.asarray(self.up, dtype=float))
        rn = float(np.linalg.norm(right))
        if rn < 1e-9:  # looking straight along up: pick any horizontal right
            right = np.cross(fwd, np.array([0.0, 1.0, 0.0]))
            rn = float(np.linalg.norm(right))
        right = right / rn
        return fwd, right, np.cross(right, fwd)


def camera_to_wire(c: Camera) -> dict:
    return {
        "position": [float(x) for x in c.position],
        "target": [float(x) for x in c.target],
        "up": [float(x) for x in c.up],
        "fovDegrees": float(c.fov_degrees),
    }


def camera_from_wire(d: dict) -> Camera:
    return Camera(
        position=tuple(d["position"]),
        target=tuple(d["target"]),
        up=tuple(d.get("up", (0.0, 0.0, 1.0))),
        fov_degrees=float(d.get("fovDegrees", FOV_DEGREES)),
    )


def ramp_b(x: float) -> float:
    """Screen-coverage reward: 0 up to 20% coverage, 1 from 40%."""
    if x <= 0.2:
        return 0.0
    if x >= 0.4:
        return 1.0
    # 5x - 1, not (x - 0.2) / 0.2: same line, but exact at the midpoint.
    return 5.0 * x - 1.0


def _probe_points(box: WorldBox) -> np.ndarray:
    return np.vstack([box.c[None, :], box.corners()])


def _is_room(model_category: str, catalog: Catalog) -> bool:
    return model_category == ROOT_CATEGORY or catalog.taxonomy.is_descendant(
        model_category, ROOT_CATEGORY
    )


class _View:
    """Per-scene visibility context shared by the twelve candidates."""

    def __init__(self, scene: GeometricScene, catalog: Catalog):
        self.boxes: dict[str, WorldBox] = {}
        self.params: dict[str, np.ndarray] = {}
        self.object_ids: list[str] = []  # everything except the room shell
        for inst in scene.instances:
            model = catalog.by_id[inst.model_id]
            b = world_box(inst, model)
            self.boxes[inst.id] = b
            self.params[inst.id] = b.as_params()
            if not _is_room(model.category, catalog):
                self.object_ids.append(inst.id)

    def point_visible(self, cam: Camera, cam_pos: np.ndarray, basis, tan_half: float,
                      p: np.ndarray, probed: str) -> bool:
        fwd, right, up = basis
        v = p - cam_pos
        depth = float(v @ fwd)
        if depth <= 1e-9:
            return False
        if abs(float(v @ right)) > tan_half * depth:
            return False
        if abs(float(v @ up)) > tan_half * depth:
            return False
        for oid in self.object_ids:
            if oid == probed:
                continue
            box = self.boxes[oid]
            # a box enclosing both endpoints occludes nothing between them
            if box.contains_point(p, 0.0) and box.contains_point(cam_pos, 0.0):
                continue
            if kernels.segment_box_hits(cam_pos, p, self.params[oid]):
                return False
        return True

    def instance_visible(self, cam: Camera, cam_pos, basis, tan_half, iid: str) -> bool:
        seen = 0
        probes = _probe_points(self.boxes[iid])
        for k, p in enumerate(probes):
            if self.point_visible(cam, cam_pos, basis, tan_half, p, iid):
                seen += 1
                if seen >= PROBES_NEEDED:
                    return True
            if seen + (len(probes) - 1 - k) < PROBES_NEEDED:
                return False
        return False


def _clip_to_square(points: list[tuple[float, float]]) -> list[tuple[float, float]]:
    """Sutherland-Hodgman clip of a convex polygon to [-1,1]^2."""
    poly = points
    for nx, ny, off in ((1, 0, 1.0), (-1, 0, 1.0), (0, 1, 1.0), (0, -1, 1.0)):
        if not poly:
            return []
        out: list[tuple[float, float]] = []
        n = len(poly)
        for i in range(n):
            x0, y0 = poly[i]
            x1, y1 = poly[(i + 1) % n]
            d0 = nx * x0 + ny * y0 - off
            d1 = nx * x1 + ny * y1 - off
            if d0 <= 0.0:
                out.append((x0, y0))
                if d1 > 0.0:
                    t = d0 / (d0 - d1)
                    out.append((x0 + t * (x1 - x0), y0 + t * (y1 - y0)))
            elif d1 <= 0.0:
                t = d0 / (d0 - d1)
                out.append((x0 + t * (x1 - x0), y0 + t * (y1 - y0)))
        poly = out
    return poly


def _hull(points: list[tuple[float, float]]) -> list[tuple[float, float]]:
    """Convex hull, counterclockwise (monotone chain)."""
    pts = sorted(set(points))
    if len(pts) < 3:
        return pts

    def half(seq):
        h: list[tuple[float, float]] = []
        for p in seq:
            while len(h) >= 2 and (
                (h[-1][0] - h[-2][0]) * (p[1] - h[-2][1])
                - (h[-1][1] - h[-2][1]) * (p[0] - h[-2][0])
            ) <= 0:
                h.pop()
            h.append(p)
        return h

    lower, upper = half(pts), half(reversed(pts))
    return lower[:-1] + upper[:-1]


def _poly_area(poly: list[tuple[float, float]]) -> float:
    if len(poly) < 3:
        return 0.0
    a = 0.0
    for i in range(len(poly)):
        x0, y0 = poly[i]
        x1, y1 = poly[(i + 1) % len(poly)]
        a += x0 * y1 - x1 * y0
    return 0.5 * abs(a)


def selection_bounds(
    scene: GeometricScene, catalog: Catalog, sel: set[str]
) -> tuple[np.ndarray, np.ndarray]:
    """World AABB (min, max) over the selected instances' boxes."""
    lo = np.full(3, np.inf)
    hi = np.full(3, -np.inf)
    for iid in sel:
        inst = scene.instance(iid)
        corners = world_box(inst, catalog.by_id[inst.model_id]).corners()
        lo = np.minimum(lo, corners.min(axis=0))
        hi = np.maximum(hi, corners.max(axis=0))
    return lo, hi


def view_score(
    cam: Camera, scene: GeometricScene, catalog: Catalog, sel: set[str]
) -> tuple[float, int, float, float]:
    """Score a viewpoint; returns (f, visible_selected, visible_fraction,
    screen_fraction).

    f adds the number of selected objects visible, the ramped screen
    coverage of the selection box, and the fraction of all non-room
    objects visible.
    """
    missing = [i for i in sel if not scene.has_instance(i)]
    if missing:
        raise SceneforgeError(f"selection references missing instances {missing}")
    view = _View(scene, catalog)
    cam_pos = np.asarray(cam.position, dtype=float)
    basis = cam.basis()
    tan_half = math.tan(math.radians(cam.fov_degrees) / 2.0)

    vis_sel = sum(
        1 for iid in sorted(sel)
        if view.instance_visible(cam, cam_pos, basis, tan_half, iid)
    )
    if view.object_ids:
        shown = sum(
            1 for iid in view.object_ids
            if view.instance_visible(cam, cam_pos, basis, tan_half, iid)
        )
        vis_all = shown / len(view.object_ids)
    else:
        vis_all = 0.0

    scr = 0.0
    if sel:
        lo, hi = selection_bounds(scene, catalog, sel)
        fwd, right, up = basis
        pts = []
        for sx in (lo[0], hi[0]):
            for sy in (lo[1], hi[1]):
                for sz in (lo[2], hi[2]):
                    v = np.array([sx, sy, sz]) - cam_pos
                    depth = float(v @ fwd)
                    if depth <= 1e-9:
                        continue
                    pts.append(
                        (float(v @ right) / (tan_half * depth),
                         float(v @ up) / (tan_half * depth))
                    )
        scr = _poly_area(_clip_to_square(_hull(pts))) / 4.0

    f = vis_sel + ramp_b(scr) + vis_all
    return f, vis_sel, vis_all, scr


def lookat_candidates(
    scene: GeometricScene, catalog: Catalog, sel: set[str]
) -> list[Camera]:
    """The twelve orbit candidates around the selection, azimuth order."""
    if not sel:
        raise SceneforgeError("look-at requires a non-empty selection")
    lo, hi = selection_bounds(scene, catalog, sel)
    target = (lo + hi) / 2.0
    diag = float(np.linalg.norm(hi - lo))
    radius = max(RADIUS_FACTOR * diag, RADIUS_MIN)
    height = float(hi[2]) + HEIGHT_FACTOR * diag
    out = []
    for k in range(AZIMUTH_COUNT):
        az = 2.0 * math.pi * k / AZIMUTH_COUNT
        pos = (
            float(target[0] + radius * math.cos(az)),
            float(target[1] + radius * math.sin(az)),
            height,
        )
        out.append(Camera(position=pos, target=tuple(float(x) for x in target)))
    return out


def lookat(scene: GeometricScene, catalog: Catalog, sel: set[str]) -> Camera:
    """Best of the twelve orbit viewpoints; earliest azimuth wins ties."""
    best: Camera | None = None
    best_f = -math.inf
    for cam in lookat_candidates(scene, catalog, sel):
        f, _, _, _ = view_score(cam, scene, catalog, sel)
        if f > best_f:
            best, best_f = cam, f
    assert best is not None
    return best
