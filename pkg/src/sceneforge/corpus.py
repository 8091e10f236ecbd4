"""Training-scene ingestion: recover support hierarchies from geometry and
tally the observation multisets that the spatial priors are estimated from.

Also ships a seeded synthetic-scene generator.  Its output is the ground
truth for the estimation oracles in the test suite and the input of the
``synth`` CLI subcommand; recipes are hand-tuned so that common object
pairs (nightstand beside bed, chair at desk, plate on table) appear often
enough to give well-conditioned relative-position densities.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path

import numpy as np

from .catalog import (
    BoxSide,
    Catalog,
    Model,
    SurfaceFeature,
    fallback_attachment_side,
    load_catalog,
)
from .errors import CatalogError, SceneforgeError
from .geometry import (
    ROOT_CATEGORY,
    TWO_PI,
    GeometricScene,
    ModelInstance,
    Placement,
    Rect2,
    WorldBox,
    collides,
    compose_transform,
    footprint_on_surface,
    load_scene,
    overhang_fraction,
    rot_z,
    scene_to_json,
    surface_world_frame,
    surfaces_of,
    world_box,
    wrap_angle,
)

# Static-support recovery: a child rests on a surface when its bottom face
# sits within DELTA_SUP of the surface plane and at least MIN_FOOT_OVERLAP
# of its footprint lies on the surface rect.
DELTA_SUP = 0.010
MIN_FOOT_OVERLAP = 0.5


class RelationKind(str, Enum):
    """How an object pair is related in the support hierarchy."""

    SIBLING = "Sibling"
    CHILD_PARENT = "ChildParent"


RelposKey = tuple[str, str, str, RelationKind]  # (objCat, refCat, sceneType, kind)


@dataclass
class SceneCorpus:
    """Training scenes with their scene types."""

    scenes: list[tuple[GeometricScene, str]] = field(default_factory=list)
    catalog_ref: str = ""


@dataclass
class ObservationSet:
    """Raw counts and samples extracted from a corpus.

    Occurrence is binary per scene (a category present twice still counts
    once), so its ratio estimator is a probability of presence.  The
    support, surface, and attachment counters all share ``child_counts``
    as their denominator: one increment per supported instance.
    """

    occ_counts: Counter = field(default_factory=Counter)  # (cat, sceneType)
    scene_counts: Counter = field(default_factory=Counter)  # sceneType
    support_counts: Counter = field(default_factory=Counter)  # (childCat, parentCat)
    child_counts: Counter = field(default_factory=Counter)  # childCat
    surf_sup_counts: Counter = field(default_factory=Counter)  # (childCat, featureClass)
    surf_att_counts: Counter = field(default_factory=Counter)  # (childCat, BoxSide)
    relpos_samples: dict[RelposKey, list[tuple[float, float, float]]] = field(default_factory=dict)

    def merged(self, other: "ObservationSet") -> "ObservationSet":
        """Per-scene extraction commutes with summation; merge two sets."""
        out = ObservationSet(
            occ_counts=self.occ_counts + other.occ_counts,
            scene_counts=self.scene_counts + other.scene_counts,
            support_counts=self.support_counts + other.support_counts,
            child_counts=self.child_counts + other.child_counts,
            surf_sup_counts=self.surf_sup_counts + other.surf_sup_counts,
            surf_att_counts=self.surf_att_counts + other.surf_att_counts,
        )
        for key, samples in self.relpos_samples.items():
            out.relpos_samples.setdefault(key, []).extend(samples)
        for key, samples in other.relpos_samples.items():
            out.relpos_samples.setdefault(key, []).extend(samples)
        return out


def _model(catalog: Catalog, inst: ModelInstance) -> Model:
    try:
        return catalog.by_id[inst.model_id]
    except KeyError:
        raise CatalogError(
            f"instance {inst.id!r}: unknown model id {inst.model_id!r}"
        ) from None


def room_instance_id(scene: GeometricScene, catalog: Catalog) -> str | None:
    """Id of the scene's room instance (first one, if several)."""
    for inst in scene.instances:
        cat = _model(catalog, inst).category
        if cat == ROOT_CATEGORY or catalog.taxonomy.is_descendant(cat, ROOT_CATEGORY):
            return inst.id
    return None


def _rest_candidate(
    child: WorldBox, surf: SurfaceFeature, parent_tr
) -> tuple[float, float] | None:
    """(|gap|, overlap fraction) when the child could rest on this surface."""
    if surf.normal_class != "up":
        return None
    origin, _, _, _, (hu, hv) = surface_world_frame(surf, parent_tr)
    gap = (child.center[2] - child.half[2]) - origin[2]
    if abs(gap) >= DELTA_SUP:
        return None
    fp = footprint_on_surface(child, surf, parent_tr)
    overlap = 1.0 - overhang_fraction(fp, Rect2(center=(0.0, 0.0), half=(hu, hv)))
    if overlap < MIN_FOOT_OVERLAP:
        return None
    return abs(gap), overlap


def extract_support_hierarchy(scene: GeometricScene, catalog: Catalog) -> dict[str, str]:
    """Recover child -> parent support edges from geometry alone.

    An object attaches to the parent owning the up-facing surface nearest
    its bottom face (within DELTA_SUP) that carries at least half its
    footprint; ties prefer the larger overlap, then the smaller parent id.
    Objects with no qualifying surface fall back to the room instance.
    """
    room_id = room_instance_id(scene, catalog)
    boxes = {i.id: world_box(i, _model(catalog, i)) for i in scene.instances}
    parents: dict[str, str] = {}
    for child in scene.instances:
        if child.id == room_id:
            continue
        best: tuple[tuple[float, float, str], str] | None = None
        for parent in scene.instances:
            if parent.id == child.id:
                continue
            for surf in surfaces_of(_model(catalog, parent)):
                cand = _rest_candidate(boxes[child.id], surf, parent.transform)
                if cand is None:
                    continue
                gap, overlap = cand
                rank = (gap, -overlap, parent.id)
                if best is None or rank < best[0]:
                    best = (rank, parent.id)
        if best is not None:
            parents[child.id] = best[1]
        elif room_id is not None:
            parents[child.id] = room_id
    _break_cycles(parents, room_id)
    return parents


def _break_cycles(parents: dict[str, str], room_id: str | None) -> None:
    # Degenerate fixtures (sliver boxes resting on each other) can close a
    # loop; re-root the smallest id in it so the result is always a forest.
    while True:
        cycle = _find_cycle(parents)
        if cycle is None:
            return
        drop = min(cycle)
        if room_id is None:
            del parents[drop]
        else:
            parents[drop] = room_id


def _find_cycle(parents: dict[str, str]) -> list[str] | None:
    color: dict[str, int] = {}
    for start in parents:
        if color.get(start):
            continue
        path: list[str] = []
        cur: str | None = start
        while cur is not None and color.get(cur) != 2:
            if color.get(cur) == 1:
                return path[path.index(cur):]
            color[cur] = 1
            path.append(cur)
            cur = parents.get(cur)
        for node in path:
            color[node] = 2
    return None


def relative_sample(obj: WorldBox, ref: WorldBox) -> tuple[float, float, float]:
    """(x, y, theta) of ``obj`` in ``ref``'s local yaw frame.

    The in-plane offsets are normalized by the reference half-extents so
    the statistic transfers across differently sized instances; theta is
    the yaw difference wrapped to [0, 2*pi).
    """
    local = rot_z(-ref.yaw) @ (obj.c - ref.c)
    return (
        float(local[0] / ref.half[0]),
        float(local[1] / ref.half[1]),
        wrap_angle(obj.yaw - ref.yaw),
    )


def extract_observations(corpus: SceneCorpus, catalog: Catalog) -> ObservationSet:
    """Tally all prior-estimation observations from a corpus.

    Uses each scene's stored support hierarchy and placements; scenes
    loaded without one can be repaired with extract_support_hierarchy
    first.  Sibling pairs (same support parent) are recorded in both
    directions, child-parent pairs in one.
    """
    obs = ObservationSet()
    for scene, scene_type in corpus.scenes:
        _tally_scene(obs, scene, scene_type, catalog)
    return obs


def _tally_scene(
    obs: ObservationSet, scene: GeometricScene, scene_type: str, catalog: Catalog
) -> None:
    room_id = room_instance_id(scene, catalog)
    obs.scene_counts[scene_type] += 1
    present = {_model(catalog, i).category for i in scene.instances if i.id != room_id}
    for cat in present:
        obs.occ_counts[cat, scene_type] += 1

    boxes = {i.id: world_box(i, _model(catalog, i)) for i in scene.instances}
    categories = {i.id: _model(catalog, i).category for i in scene.instances}
    for inst in scene.instances:
        parent_id = scene.support_edges.get(inst.id)
        if parent_id is None:
            continue
        parent = scene.instance(parent_id)
        surfs = surfaces_of(_model(catalog, parent))
        index = inst.placement.support_surface
        if not 0 <= index < len(surfs):
            raise SceneforgeError(
                f"instance {inst.id!r}: surface index {index} out of range for {parent.model_id!r}"
            )
        child_cat = categories[inst.id]
        obs.child_counts[child_cat] += 1
        obs.support_counts[child_cat, categories[parent_id]] += 1
        obs.surf_sup_counts[child_cat, surfs[index].feature_class] += 1
        obs.surf_att_counts[child_cat, inst.placement.attachment_side] += 1
        key = (child_cat, categories[parent_id], scene_type, RelationKind.CHILD_PARENT)
        obs.relpos_samples.setdefault(key, []).append(
            relative_sample(boxes[inst.id], boxes[parent_id])
        )

    by_parent: dict[str, list[str]] = {}
    for child_id, parent_id in scene.support_edges.items():
        by_parent.setdefault(parent_id, []).append(child_id)
    for siblings in by_parent.values():
        for a in siblings:
            for b in siblings:
                if a == b:
                    continue
                key = (categories[a], categories[b], scene_type, RelationKind.SIBLING)
                obs.relpos_samples.setdefault(key, []).append(
                    relative_sample(boxes[a], boxes[b])
                )


# ---------------------------------------------------------------------------
# Corpus directory format: scene JSON files plus a manifest naming each
# file's scene type and the catalog they resolve against.


def save_corpus(corpus: SceneCorpus, dir_path: str | Path, catalog: Catalog) -> None:
    out = Path(dir_path)
    out.mkdir(parents=True, exist_ok=True)
    entries = []
    for index, (scene, scene_type) in enumerate(corpus.scenes):
        name = f"scene_{index:04d}.json"
        (out / name).write_text(scene_to_json(scene, catalog) + "\n", encoding="utf-8")
        entries.append({"file": name, "sceneType": scene_type})
    manifest = {"catalog": corpus.catalog_ref, "scenes": entries}
    (out / "manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def load_corpus(
    dir_path: str | Path, catalog: Catalog | None = None
) -> tuple[SceneCorpus, Catalog]:
    """Load a corpus directory; the catalog defaults to the manifest's."""
    root = Path(dir_path)
    try:
        manifest = json.loads((root / "manifest.json").read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise SceneforgeError(f"{root}: not a corpus directory (no manifest.json)") from None
    except json.JSONDecodeError as exc:
        raise SceneforgeError(f"{root}/manifest.json: {exc.msg} at line {exc.lineno}") from exc
    if catalog is None:
        catalog = load_catalog(root / manifest["catalog"])
    scenes = []
    for entry in manifest["scenes"]:
        try:
            scene = load_scene(root / entry["file"], catalog)
        except KeyError as exc:
            raise CatalogError(
                f"{entry['file']}: unknown model id {exc.args[0]!r}"
            ) from None
        scenes.append((scene, entry["sceneType"]))
    return SceneCorpus(scenes=scenes, catalog_ref=manifest.get("catalog", "")), catalog


# ---------------------------------------------------------------------------
# Synthetic corpus generator.

_SCENE_TYPES = ("office", "bedroom", "kitchen", "living_room")
_TYPE_WEIGHTS = (0.3, 0.3, 0.2, 0.2)

_FLOOR = 0
# Inward wall normals of the room models' surfaces 1..4.
_WALL_NORMALS = {1: (1.0, 0.0), 2: (-1.0, 0.0), 3: (0.0, 1.0), 4: (0.0, -1.0)}


def _clip(value: float, limit: float) -> float:
    limit = max(limit, 0.0)
    return float(np.clip(value, -limit, limit))


def _facing_yaw(direction: np.ndarray) -> float:
    """Yaw that turns the local +Y (front) axis onto ``direction``."""
    return wrap_angle(float(np.arctan2(-direction[0], direction[1])))


class _Builder:
    """Incremental scene assembly with collision-avoiding retries."""

    def __init__(self, catalog: Catalog, rng: np.random.Generator, room_model_id: str, scene_type: str):
        self.catalog = catalog
        self.rng = rng
        self.scene = GeometricScene(scene_type=scene_type)
        self.boxes: dict[str, WorldBox] = {}
        self.room_model = catalog.by_id[room_model_id]
        self.room = self.add(self.room_model, Placement(), avoid=False)

    def add(
        self,
        model: Model,
        placement: Placement,
        avoid: bool = True,
        tries: int = 8,
        nudge: float = 0.12,
        clamp: tuple[tuple[float, float], tuple[float, float]] | None = None,
    ) -> ModelInstance:
        """Append an instance; colliding placements are nudged on the
        surface a few times, then committed regardless (training scenes
        tolerate the occasional overlap).  ``clamp`` bounds (u, v) so a
        nudge never pushes the object off its support."""
        for attempt in range(tries):
            if attempt:
                u, v = placement.pos_on_surface
                u += self.rng.normal(0.0, nudge)
                v += self.rng.normal(0.0, nudge)
                if clamp is not None:
                    u = float(np.clip(u, *clamp[0]))
                    v = float(np.clip(v, *clamp[1]))
                placement = replace(placement, pos_on_surface=(u, v))
            parent = (
                self.scene.instance(placement.support_parent)
                if placement.support_parent
                else None
            )
            parent_model = self.catalog.by_id[parent.model_id] if parent else None
            tr = compose_transform(placement, model, parent, parent_model)
            box = WorldBox(center=tr.translation, half=tuple(tr.scale * model.he), yaw=tr.yaw)
            if not avoid or not any(
                collides(box, other)
                for other_id, other in self.boxes.items()
                if self.room is None or other_id != self.room.id
            ):
                break
        inst = ModelInstance(
            id=f"{model.category}_{len(self.scene.instances)}",
            model_id=model.id,
            placement=placement,
            transform=tr,
        )
        self.scene.instances.append(inst)
        if placement.support_parent:
            self.scene.support_edges[inst.id] = placement.support_parent
        self.boxes[inst.id] = box
        return inst

    # -- placement helpers ------------------------------------------------

    def on_floor(
        self,
        model: Model,
        u: float,
        v: float,
        yaw: float,
        scale: float = 1.0,
        avoid: bool = True,
        clamp: tuple[tuple[float, float], tuple[float, float]] | None = None,
    ) -> ModelInstance:
        placement = Placement(
            support_parent=self.room.id,
            support_surface=_FLOOR,
            attachment_side=fallback_attachment_side(model),
            pos_on_surface=(u, v),
            yaw=yaw,
            scale=scale,
        )
        if clamp is None:
            hx, hy, _ = self.room_model.half_extents
            margin = scale * max(model.half_extents[:2]) + 0.02
            clamp = ((-(hx - margin), hx - margin), (-(hy - margin), hy - margin))
        return self.add(model, placement, avoid=avoid, clamp=clamp)

    def wall_span(self, wall: int) -> float:
        nx, _ = _WALL_NORMALS[wall]
        hx, hy, _ = self.room_model.half_extents
        return hy if nx else hx

    def against_wall(
        self,
        model: Model,
        wall: int,
        lateral: float,
        gap: float = 0.05,
        scale: float = 1.0,
        yaw_noise: float = 0.0,
    ) -> ModelInstance:
        """Stand a model on the floor with its back to the given wall."""
        nx, ny = _WALL_NORMALS[wall]
        hx, hy, _ = self.room_model.half_extents
        depth = hx if nx else hy
        n = np.array([nx, ny])
        t = np.array([-ny, nx])
        uv = -n * (depth - scale * model.he[1] - gap) + t * lateral
        yaw = _facing_yaw(n) + (self.rng.normal(0.0, yaw_noise) if yaw_noise else 0.0)
        # Nudges may slide along the wall freely but step away from it only
        # a little, so wall furniture stays wall furniture.
        lat_lim = self.wall_span(wall) - scale * model.half_extents[0] - 0.05
        along_n = float(uv @ n)
        lo = n * (along_n - 0.02) + t * (-lat_lim)
        hi = n * (along_n + 0.10) + t * lat_lim
        clamp = (
            (min(lo[0], hi[0]), max(lo[0], hi[0])),
            (min(lo[1], hi[1]), max(lo[1], hi[1])),
        )
        return self.on_floor(model, float(uv[0]), float(uv[1]), yaw, scale=scale, clamp=clamp)

    def on_surface(
        self,
        model: Model,
        parent: ModelInstance,
        surface: int,
        u: float,
        v: float,
        yaw: float,
        scale: float = 1.0,
        avoid: bool = True,
    ) -> ModelInstance:
        placement = Placement(
            support_parent=parent.id,
            support_surface=surface,
            attachment_side=fallback_attachment_side(model),
            pos_on_surface=(u, v),
            yaw=yaw,
            scale=scale,
        )
        hu, hv = _surface_extent(self.catalog.by_id[parent.model_id], surface)
        margin = scale * max(model.half_extents[:2])
        clamp = (
            (-(max(hu - margin, 0.0)), max(hu - margin, 0.0)),
            (-(max(hv - margin, 0.0)), max(hv - margin, 0.0)),
        )
        return self.add(model, placement, avoid=avoid, nudge=0.05, clamp=clamp)

    def on_wall(
        self, model: Model, wall: int, h_off: float, v_off: float, scale: float = 1.0
    ) -> ModelInstance:
        """Attach a model to a wall surface by its back side."""
        surf = surfaces_of(self.room_model)[wall]
        # Wall rect axes are authored in whichever order makes the normal
        # point inward; map (horizontal, vertical) offsets onto them.
        u, v = (h_off, v_off) if surf.axes[0][2] == 0 else (v_off, h_off)
        nx, ny = _WALL_NORMALS[wall]
        placement = Placement(
            support_parent=self.room.id,
            support_surface=wall,
            attachment_side=fallback_attachment_side(model),
            pos_on_surface=(u, v),
            yaw=_facing_yaw(np.array([nx, ny])),
            scale=scale,
        )
        h_lim = self.wall_span(wall) - scale * model.half_extents[0] - 0.05
        v_lim = self.room_model.half_extents[2] - scale * model.half_extents[2] - 0.05
        bounds = ((-h_lim, h_lim), (-v_lim, v_lim))
        if surf.axes[0][2] != 0:
            bounds = (bounds[1], bounds[0])
        return self.add(model, placement, clamp=bounds)

    def front_of(self, inst: ModelInstance, distance: float, lateral: float = 0.0) -> np.ndarray:
        """Floor point ``distance`` ahead of an instance (plus side offset)."""
        rot = rot_z(inst.transform.yaw)
        ahead = rot @ np.array([0.0, 1.0, 0.0])
        side = rot @ np.array([1.0, 0.0, 0.0])
        base = np.asarray(inst.transform.translation)
        return (base + distance * ahead + lateral * side)[:2]


def _pick(rng: np.random.Generator, ids: tuple[str, ...]) -> str:
    return str(ids[int(rng.integers(len(ids)))])


def _room_choice(rng: np.random.Generator) -> str:
    return "room_basic" if rng.random() < 0.7 else "room_large"


def _surface_extent(model: Model, index: int = 0) -> tuple[float, float]:
    return surfaces_of(model)[index].half_lengths


def _office(catalog: Catalog, rng: np.random.Generator) -> GeometricScene:
    b = _Builder(catalog, rng, _room_choice(rng), "office")
    walls = list(rng.permutation([1, 2, 3, 4]))

    desk_m = catalog.by_id[_pick(rng, ("desk_01", "desk_02"))]
    span = b.wall_span(walls[0]) - desk_m.half_extents[0] - 0.3
    desk = b.against_wall(desk_m, walls[0], rng.uniform(-span, span), yaw_noise=0.04)
    hu, hv = _surface_extent(desk_m)

    chair_m = catalog.by_id["office_chair_01"]
    cx, cy = b.front_of(
        desk,
        desk_m.half_extents[1] + chair_m.half_extents[1] + abs(rng.normal(0.18, 0.06)),
        rng.normal(0.0, 0.12),
    )
    b.on_floor(chair_m, cx, cy, desk.transform.yaw + np.pi + rng.normal(0.0, 0.25))

    if rng.random() < 0.85:
        comp = catalog.by_id["computer_01"]
        side = 1.0 if rng.random() < 0.5 else -1.0
        b.on_surface(
            comp,
            desk,
            0,
            _clip(side * 0.55 * hu + rng.normal(0.0, 0.08), hu - comp.he[0] - 0.01),
            _clip(rng.normal(0.0, 0.10), hv - comp.he[1] - 0.01),
            rng.normal(0.0, 0.2),
        )
    if rng.random() < 0.6:
        mon = catalog.by_id["monitor_01"]
        b.on_surface(
            mon,
            desk,
            0,
            _clip(rng.normal(0.0, 0.15), hu - mon.he[0] - 0.01),
            _clip(-0.55 * hv + rng.normal(0.0, 0.04), hv - mon.he[1] - 0.01),
            rng.normal(0.0, 0.15),
        )
        if rng.random() < 0.7:
            key = catalog.by_id["keyboard_01"]
            b.on_surface(
                key,
                desk,
                0,
                _clip(rng.normal(0.0, 0.12), hu - key.he[0] - 0.01),
                _clip(0.35 * hv + rng.normal(0.0, 0.06), hv - key.he[1] - 0.01),
                rng.normal(0.0, 0.15),
            )
    if rng.random() < 0.5:
        lamp = catalog.by_id["desk_lamp_01"]
        side = 1.0 if rng.random() < 0.5 else -1.0
        b.on_surface(
            lamp,
            desk,
            0,
            _clip(side * 0.7 * hu + rng.normal(0.0, 0.05), hu - lamp.he[0] - 0.01),
            _clip(-0.5 * hv + rng.normal(0.0, 0.05), hv - lamp.he[1] - 0.01),
            rng.uniform(0.0, TWO_PI),
        )
    if rng.random() < 0.3:
        book = catalog.by_id[_pick(rng, ("book_01", "book_02"))]
        b.on_surface(
            book,
            desk,
            0,
            _clip(rng.normal(0.0, 0.2), hu - book.he[0] - 0.01),
            _clip(rng.normal(0.0, 0.12), hv - book.he[1] - 0.01),
            rng.uniform(0.0, TWO_PI),
        )

    if rng.random() < 0.6:
        case = catalog.by_id["bookcase_01"]
        span = b.wall_span(walls[1]) - case.half_extents[0] - 0.3
        shelf = b.against_wall(case, walls[1], rng.uniform(-span, span), yaw_noise=0.03)
        if rng.random() < 0.4:
            book = catalog.by_id[_pick(rng, ("book_01", "book_02"))]
            su, sv = _surface_extent(case, 1)
            b.on_surface(
                book,
                shelf,
                1,
                _clip(rng.normal(0.0, 0.12), su - book.he[0] - 0.005),
                _clip(rng.normal(0.0, 0.02), sv - book.he[1] - 0.005),
                rng.normal(0.0, 0.1),
            )
    if rng.random() < 0.4:
        poster = catalog.by_id["poster_01"]
        wall = walls[2]
        h_lim = b.wall_span(wall) - poster.he[0] - 0.2
        b.on_wall(poster, wall, rng.uniform(-h_lim, h_lim), rng.normal(0.3, 0.1))
    if rng.random() < 0.25:
        plant = catalog.by_id["plant_01"]
        hx, hy, _ = b.room_model.half_extents
        b.on_floor(
            plant,
            float(rng.uniform(-1.0, 1.0)) * (hx - 0.4),
            float(rng.uniform(-1.0, 1.0)) * (hy - 0.4),
            rng.uniform(0.0, TWO_PI),
        )
    return b.scene


def _bedroom(catalog: Catalog, rng: np.random.Generator) -> GeometricScene:
    b = _Builder(catalog, rng, _room_choice(rng), "bedroom")
    walls = list(rng.permutation([1, 2, 3, 4]))

    bed_m = catalog.by_id[_pick(rng, ("bed_01", "bed_02"))]
    span = b.wall_span(walls[0]) - bed_m.half_extents[0] - 0.5
    bed = b.against_wall(bed_m, walls[0], rng.uniform(-span, span), yaw_noise=0.03)

    stand = None
    if rng.random() < 0.9:
        ns = catalog.by_id["nightstand_01"]
        side = 1.0 if rng.random() < 0.5 else -1.0
        rot = rot_z(bed.transform.yaw)
        right = rot @ np.array([1.0, 0.0, 0.0])
        back = rot @ np.array([0.0, -1.0, 0.0])
        offset = bed_m.half_extents[0] + ns.half_extents[0] + abs(rng.normal(0.06, 0.03))
        head = (bed_m.half_extents[1] - ns.half_extents[1]) * rng.uniform(0.6, 0.95)
        pos = np.asarray(bed.transform.translation)[:2] + (side * offset * right + head * back)[:2]
        stand = b.on_floor(
            ns, float(pos[0]), float(pos[1]), bed.transform.yaw + rng.normal(0.0, 0.12)
        )
    if stand is not None and rng.random() < 0.7:
        lamp = catalog.by_id[_pick(rng, ("lamp_01", "lamp_02"))]
        su, sv = _surface_extent(catalog.by_id[stand.model_id])
        b.on_surface(
            lamp,
            stand,
            0,
            _clip(rng.normal(0.0, 0.05), su - lamp.he[0] - 0.005),
            _clip(rng.normal(0.0, 0.04), sv - lamp.he[1] - 0.005),
            rng.uniform(0.0, TWO_PI),
        )
    if stand is not None and rng.random() < 0.25:
        book = catalog.by_id[_pick(rng, ("book_01", "book_02"))]
        su, sv = _surface_extent(catalog.by_id[stand.model_id])
        b.on_surface(
            book,
            stand,
            0,
            _clip(rng.normal(0.0, 0.06), su - book.he[0] - 0.005),
            _clip(rng.normal(0.0, 0.05), sv - book.he[1] - 0.005),
            rng.uniform(0.0, TWO_PI),
        )
    if rng.random() < 0.5:
        dresser = catalog.by_id["dresser_01"]
        span = b.wall_span(walls[1]) - dresser.half_extents[0] - 0.3
        b.against_wall(dresser, walls[1], rng.uniform(-span, span), yaw_noise=0.04)
    if rng.random() < 0.4:
        rug = catalog.by_id[_pick(rng, ("rug_01", "rug_02"))]
        b.on_floor(
            rug,
            rng.normal(0.0, 0.3),
            rng.normal(0.0, 0.3),
            rng.normal(0.0, 0.25),
            avoid=False,
        )
    if rng.random() < 0.3:
        poster = catalog.by_id["poster_01"]
        wall = walls[2]
        h_lim = b.wall_span(wall) - poster.he[0] - 0.2
        b.on_wall(poster, wall, rng.uniform(-h_lim, h_lim), rng.normal(0.3, 0.1))
    return b.scene


def _kitchen(catalog: Catalog, rng: np.random.Generator) -> GeometricScene:
    b = _Builder(catalog, rng, _room_choice(rng), "kitchen")
    walls = list(rng.permutation([1, 2, 3, 4]))

    table_m = catalog.by_id["dining_table_01"]
    table = b.on_floor(
        table_m,
        _clip(rng.normal(0.0, 0.3), 0.9),
        _clip(rng.normal(0.0, 0.3), 0.7),
        rng.uniform(0.0, TWO_PI),
    )
    hu, hv = _surface_extent(table_m)

    chair_ids = ("chair_01", "chair_02", "chair_03", "chair_06")
    sides = [np.array(s) for s in ((1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0))]
    order = list(rng.permutation(4))
    for k in order[: int(rng.integers(2, 5))]:
        chair = catalog.by_id[_pick(rng, chair_ids)]
        direction = rot_z(table.transform.yaw) @ np.array([*sides[k], 0.0])
        extent = table_m.half_extents[0] if sides[k][0] else table_m.half_extents[1]
        dist = extent + chair.half_extents[1] + abs(rng.normal(0.06, 0.04))
        perp = rot_z(table.transform.yaw) @ np.array([-sides[k][1], sides[k][0], 0.0])
        pos = np.asarray(table.transform.translation) + dist * direction + rng.normal(0.0, 0.08) * perp
        yaw = _facing_yaw(-direction[:2]) + rng.normal(0.0, 0.15)
        b.on_floor(chair, float(pos[0]), float(pos[1]), yaw)

    def table_item(model_id: str, spread: float, yaw=None):
        item = catalog.by_id[model_id]
        b.on_surface(
            item,
            table,
            0,
            _clip(rng.normal(0.0, spread * hu), hu - item.he[0] - 0.01),
            _clip(rng.normal(0.0, spread * hv), hv - item.he[1] - 0.01),
            rng.uniform(0.0, TWO_PI) if yaw is None else yaw,
        )

    if rng.random() < 0.85:
        table_item(_pick(rng, ("plate_01", "plate_02")), 0.45)
    if rng.random() < 0.5:
        table_item(_pick(rng, ("plate_01", "plate_02")), 0.45)
    if rng.random() < 0.7:
        table_item(_pick(rng, ("cup_01", "glass_01")), 0.5)
    if rng.random() < 0.35:
        table_item("bowl_01", 0.4)
    if rng.random() < 0.3:
        table_item("teapot_01", 0.25)

    if rng.random() < 0.9:
        counter_m = catalog.by_id["counter_01"]
        span = b.wall_span(walls[0]) - counter_m.half_extents[0] - 0.9
        lat = rng.uniform(-max(span, 0.1), max(span, 0.1))
        counter = b.against_wall(counter_m, walls[0], lat, yaw_noise=0.02)
        cu, cv = _surface_extent(counter_m)
        for mid, prob in (("microwave_01", 0.5), ("toaster_01", 0.4), ("kettle_01", 0.4), ("sink_01", 0.5)):
            if rng.random() < prob:
                item = catalog.by_id[mid]
                b.on_surface(
                    item,
                    counter,
                    0,
                    _clip(rng.normal(0.0, 0.45 * cu), cu - item.he[0] - 0.01),
                    _clip(rng.normal(0.0, 0.3), cv - item.he[1] - 0.01),
                    counter.transform.yaw * 0.0 + rng.normal(0.0, 0.1),
                )
        if rng.random() < 0.7:
            stove = catalog.by_id["stove_01"]
            b.against_wall(
                stove,
                walls[0],
                lat + (counter_m.half_extents[0] + stove.half_extents[0] + abs(rng.normal(0.1, 0.05))) * (1.0 if rng.random() < 0.5 else -1.0),
                yaw_noise=0.02,
            )
    if rng.random() < 0.8:
        fridge = catalog.by_id["refrigerator_01"]
        span = b.wall_span(walls[1]) - fridge.half_extents[0] - 0.3
        b.against_wall(fridge, walls[1], rng.uniform(-span, span), yaw_noise=0.02)
    return b.scene


def _living_room(catalog: Catalog, rng: np.random.Generator) -> GeometricScene:
    b = _Builder(catalog, rng, _room_choice(rng), "living_room")
    walls = list(rng.permutation([1, 2, 3, 4]))

    couch_m = catalog.by_id[_pick(rng, ("couch_01", "couch_02"))]
    span = b.wall_span(walls[0]) - couch_m.half_extents[0] - 0.4
    couch = b.against_wall(couch_m, walls[0], rng.uniform(-span, span), yaw_noise=0.03)

    table = None
    if rng.random() < 0.9:
        ct = catalog.by_id[_pick(rng, ("coffee_table_01", "coffee_table_02"))]
        cx, cy = b.front_of(
            couch,
            couch_m.half_extents[1] + ct.half_extents[1] + abs(rng.normal(0.35, 0.08)),
            rng.normal(0.0, 0.15),
        )
        table = b.on_floor(ct, cx, cy, couch.transform.yaw + rng.normal(0.0, 0.12))
    if table is not None and rng.random() < 0.3:
        vase = catalog.by_id[_pick(rng, ("vase_01", "vase_02"))]
        tu, tv = _surface_extent(catalog.by_id[table.model_id])
        b.on_surface(
            vase,
            table,
            0,
            _clip(rng.normal(0.0, 0.1), tu - vase.he[0] - 0.01),
            _clip(rng.normal(0.0, 0.08), tv - vase.he[1] - 0.01),
            rng.uniform(0.0, TWO_PI),
        )
    if rng.random() < 0.5:
        rug = catalog.by_id[_pick(rng, ("rug_01", "rug_02"))]
        cx, cy = b.front_of(couch, couch_m.half_extents[1] + 0.6, rng.normal(0.0, 0.1))
        b.on_floor(rug, cx, cy, couch.transform.yaw + rng.normal(0.0, 0.2), avoid=False)
    if rng.random() < 0.5:
        pillow = catalog.by_id["pillow_01"]
        side = 1.0 if rng.random() < 0.5 else -1.0
        b.on_surface(
            pillow,
            couch,
            0,
            _clip(side * 0.6 * couch_m.half_extents[0], couch_m.half_extents[0] - pillow.he[0] - 0.01),
            rng.normal(0.0, 0.05),
            rng.normal(0.0, 0.3),
        )
    if rng.random() < 0.7:
        cab = catalog.by_id["cabinet_01"]
        span = b.wall_span(walls[1]) - cab.half_extents[0] - 0.3
        cabinet = b.against_wall(cab, walls[1], rng.uniform(-span, span), yaw_noise=0.03)
        if rng.random() < 0.8:
            tv = catalog.by_id["television_01"]
            cu, cv = _surface_extent(cab)
            scale = 0.75
            b.on_surface(
                tv,
                cabinet,
                0,
                _clip(rng.normal(0.0, 0.02), cu - scale * tv.he[0] - 0.005),
                _clip(rng.normal(0.0, 0.02), cv - scale * tv.he[1] - 0.005),
                rng.normal(0.0, 0.08),
                scale=scale,
            )
    if rng.random() < 0.5:
        lamp = catalog.by_id["floor_lamp_01"]
        rot = rot_z(couch.transform.yaw)
        side = 1.0 if rng.random() < 0.5 else -1.0
        pos = (
            np.asarray(couch.transform.translation)
            + rot @ np.array([side * (couch_m.half_extents[0] + lamp.he[0] + 0.15), 0.0, 0.0])
        )
        b.on_floor(lamp, float(pos[0]), float(pos[1]), rng.uniform(0.0, TWO_PI))
    if rng.random() < 0.45:
        painting = catalog.by_id["painting_01"]
        wall = walls[2]
        h_lim = b.wall_span(wall) - painting.he[0] - 0.2
        b.on_wall(painting, wall, rng.uniform(-h_lim, h_lim), rng.normal(0.35, 0.1))
    if rng.random() < 0.3:
        clock = catalog.by_id["clock_01"]
        wall = walls[3]
        h_lim = b.wall_span(wall) - clock.he[0] - 0.2
        b.on_wall(clock, wall, rng.uniform(-h_lim, h_lim), rng.normal(0.7, 0.1))
    if rng.random() < 0.4:
        plant = catalog.by_id["plant_01"]
        hx, hy, _ = b.room_model.half_extents
        b.on_floor(
            plant,
            float(rng.uniform(-1.0, 1.0)) * (hx - 0.4),
            float(rng.uniform(-1.0, 1.0)) * (hy - 0.4),
            rng.uniform(0.0, TWO_PI),
        )
    return b.scene


_RECIPES = {
    "office": _office,
    "bedroom": _bedroom,
    "kitchen": _kitchen,
    "living_room": _living_room,
}


def synthesize_corpus(
    catalog: Catalog,
    n_scenes: int,
    seed: int,
    catalog_ref: str = "catalog.json",
) -> SceneCorpus:
    """Generate a deterministic training corpus.

    Same (catalog, n_scenes, seed) always yields identical scenes; scene
    types are drawn office/bedroom/kitchen/living_room at 3:3:2:2.
    """
    rng = np.random.default_rng(seed)
    scenes = []
    for _ in range(n_scenes):
        scene_type = str(rng.choice(_SCENE_TYPES, p=_TYPE_WEIGHTS))
        scenes.append((_RECIPES[scene_type](catalog, rng), scene_type))
    return SceneCorpus(scenes=scenes, catalog_ref=catalog_ref)
