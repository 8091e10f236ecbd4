"""Scene realization: choose concrete models for a completed template and
place them physically, walking the support tree depth first.

Placement is sample-and-score.  Each object draws a batch of candidate
poses on its parent's chosen surface (from the learned position densities
when available, uniform otherwise), rejects those that collide or hang too
far off the surface, and commits the best scoring survivor.  The same
objective is exposed as ``score_layout`` so whole scenes produced under
different ablation conditions can be compared.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .catalog import (
    SIDE_NORMALS,
    BoxSide,
    Catalog,
    Model,
    ObjectQuery,
    SurfaceFeature,
    fallback_attachment_side,
    query_models,
    side_face_center,
)
from .corpus import RelationKind, relative_sample
from .errors import NoDataError, NoModelFoundError, SceneforgeError, SceneStructureError
from .geometry import (
    ROOT_CATEGORY,
    GeometricScene,
    ModelInstance,
    Placement,
    Rect2,
    WorldBox,
    box_inside,
    collides,
    compose_transform,
    footprint_on_surface,
    overhang_fraction,
    rot_z,
    surface_world_frame,
    surfaces_of,
    world_box,
    wrap_angle,
)
from .inference import (
    SUPPORT_PREDICATES,
    build_hierarchy,
    expand_counts,
    infer_scene_objects,
    infer_support_parents,
)
from .lang import Predicate, RelationConstraint, SceneTemplate
from .priors import (
    KnowledgeBase,
    lookup_attachment,
    lookup_surface_support,
    resolve_relpos,
)

# Model selection draws uniformly from this many top-ranked query results.
TOP_K_MODELS = 10

# KDE densities are unbounded; each term is capped so one razor-sharp
# kernel cannot swamp the rest of the objective.
DENSITY_CAP = 10.0

# Tolerances of the binary relation predicates.
IN_EPS = 0.01  # containment slack, meters
STACK_EPS = 0.01  # vertical ordering slack for above/under
MIN_FOOT_OVERLAP = 0.3  # footprint overlap required by above/under
NEAR_FACTOR = 0.5  # near: gap at most this fraction of the reference diagonal

_SECTOR_PREDICATES = (
    Predicate.LEFT_OF,
    Predicate.RIGHT_OF,
    Predicate.IN_FRONT_OF,
    Predicate.BEHIND,
)


@dataclass(frozen=True)
class ConditionFlags:
    """Ablation switches for the placement sampler and the score."""

    use_support_priors: bool = True
    use_spatial_constraints: bool = True
    use_relpos_priors: bool = True
    use_inference: bool = False


#: Named evaluation conditions, weakest to strongest.
CONDITIONS: dict[str, ConditionFlags] = {
    "basic": ConditionFlags(False, False, False, False),
    "+sup": ConditionFlags(True, False, False, False),
    "+sup+spat": ConditionFlags(True, True, False, False),
    "+sup+prior": ConditionFlags(True, False, True, False),
    "full": ConditionFlags(True, True, True, False),
    "full+infer": ConditionFlags(True, True, True, True),
}


@dataclass(frozen=True)
class LayoutConfig:
    samples_per_object: int = 30
    lambda_obj: float = 0.25
    lambda_rel: float = 0.75
    overhang_max: float = 0.05
    sigma_range: tuple[float, float] = (0.85, 1.15)
    rng_seed: int = 0
    flags: ConditionFlags = field(default_factory=ConditionFlags)

    def __post_init__(self):
        if self.samples_per_object < 1:
            raise SceneforgeError("samples_per_object must be at least 1")
        if abs(self.lambda_obj + self.lambda_rel - 1.0) > 1e-9:
            raise SceneforgeError("lambda_obj and lambda_rel must sum to 1")
        lo, hi = self.sigma_range
        if not 0 < lo <= hi:
            raise SceneforgeError("sigma_range must be a positive non-empty interval")
        object.__setattr__(self, "sigma_range", (float(lo), float(hi)))


def _select_one(
    category: str,
    attributes: frozenset[tuple[str, str]],
    catalog: Catalog,
    rng: np.random.Generator,
) -> Model:
    q = ObjectQuery(category=category, attributes=attributes)
    results = query_models(q, catalog, catalog.taxonomy)
    compatible = [
        m
        for m in results
        if m.category == category
        or catalog.taxonomy.is_descendant(m.category, category)
    ]
    pool = compatible or results
    if not pool:
        raise NoModelFoundError(category)
    top = pool[: min(TOP_K_MODELS, len(pool))]
    return top[int(rng.integers(len(top)))]


def select_models(
    t: SceneTemplate, catalog: Catalog, rng: np.random.Generator
) -> dict[int, Model]:
    """Pick one concrete model per template object.

    Models are ranked by the catalog query for the object's category and
    attributes and the pick is a seeded uniform draw from the top ten.
    Results of the object's own category (or a subcategory) are preferred;
    the raw ranking is used only when none exist, so an attribute match
    can never substitute a different kind of object while real candidates
    are available.
    """
    return {
        spec.index: _select_one(spec.category, spec.attributes, catalog, rng)
        for spec in t.objects
    }


# ---------------------------------------------------------------------------
# Relation predicates


def _footprint_overlap(a: WorldBox, b: WorldBox) -> float:
    """Fraction of a's horizontal footprint covered by b's."""
    d = rot_z(-b.yaw) @ (a.c - b.c)
    outside = kernels.rect_outside_fraction(
        np.array([d[0], d[1]]),
        np.array([a.half[0], a.half[1]]),
        wrap_angle(a.yaw - b.yaw),
        np.array([b.half[0], b.half[1]]),
    )
    return 1.0 - float(outside)


def _rect_corners_2d(box: WorldBox) -> np.ndarray:
    signs = np.array([(-1, -1), (1, -1), (1, 1), (-1, 1)], dtype=float)
    local = signs * box.h[:2]
    r = rot_z(box.yaw)[:2, :2]
    return local @ r.T + box.c[:2]


def _point_segment_dist(p: np.ndarray, a: np.ndarray, b: np.ndarray) -> float:
    ab = b - a
    denom = float(ab @ ab)
    t = 0.0 if denom == 0.0 else float(np.clip((p - a) @ ab / denom, 0.0, 1.0))
    return float(np.linalg.norm(p - (a + t * ab)))


def boundary_gap(a: WorldBox, b: WorldBox) -> float:
    """Separation distance between two yaw-only boxes; 0 when touching.

    Split into the horizontal gap between the footprint rects and the gap
    between the z intervals, combined as a Euclidean distance (exact for
    yaw-only boxes because the horizontal and vertical parts decouple).
    """
    (alo, ahi), (blo, bhi) = a.z_interval, b.z_interval
    dz = max(0.0, alo - bhi, blo - ahi)
    flat_a = WorldBox(center=(*a.center[:2], 0.0), half=(*a.half[:2], 1.0), yaw=a.yaw)
    flat_b = WorldBox(center=(*b.center[:2], 0.0), half=(*b.half[:2], 1.0), yaw=b.yaw)
    if kernels.boxes_overlap(flat_a.as_params(), flat_b.as_params(), 0.0):
        d2 = 0.0
    else:
        pa, pb = _rect_corners_2d(a), _rect_corners_2d(b)
        d2 = min(
            min(_point_segment_dist(p, pb[i], pb[(i + 1) % 4]) for p in pa for i in range(4)),
            min(_point_segment_dist(p, pa[i], pa[(i + 1) % 4]) for p in pb for i in range(4)),
        )
    return math.hypot(d2, dz)


def _geometric_predicate(pred: Predicate, a: WorldBox, b: WorldBox) -> bool:
    if pred is Predicate.IN:
        return box_inside(a, b, eps=IN_EPS)
    if pred in (Predicate.ABOVE, Predicate.UNDER):
        lo, hi = (b, a) if pred is Predicate.ABOVE else (a, b)
        stacked = hi.z_interval[0] >= lo.z_interval[1] - STACK_EPS
        # overlap is judged on the higher box's footprint so a small object
        # over a large one (and vice versa) reads the intuitive way
        return stacked and _footprint_overlap(hi, lo) >= MIN_FOOT_OVERLAP - 1e-12
    if pred in _SECTOR_PREDICATES:
        d = rot_z(-b.yaw) @ (a.c - b.c)
        dx, dy = float(d[0]), float(d[1])
        # 90-degree sectors around the reference's own axes, boundary inclusive.
        if pred is Predicate.LEFT_OF:
            return dx <= -abs(dy)
        if pred is Predicate.RIGHT_OF:
            return dx >= abs(dy)
        if pred is Predicate.IN_FRONT_OF:
            return dy >= abs(dx)
        return dy <= -abs(dx)
    if pred in (Predicate.NEAR, Predicate.NEXT_TO):
        return boundary_gap(a, b) <= NEAR_FACTOR * b.diagonal()
    raise SceneforgeError(f"predicate {pred.value!r} has no geometric test")


def relation_score(
    c: RelationConstraint, scene: GeometricScene, catalog: Catalog
) -> int:
    """1 when the scene satisfies the constraint, 0 otherwise.

    on / supported_by hold when every instance of the subject has a
    support edge to some instance of the reference; the remaining
    predicates are geometric tests on world boxes, required over every
    subject/reference instance pair.
    """
    a_insts = [i for i in scene.instances if i.object_index == c.args[0]]
    b_insts = [i for i in scene.instances if i.object_index == c.args[1]]
    if not a_insts or not b_insts:
        raise SceneStructureError(
            f"constraint {c.predicate.value!r} references an object with no instance"
        )
    if c.predicate in SUPPORT_PREDICATES:
        b_ids = {i.id for i in b_insts}
        ok = all(scene.support_edges.get(ia.id) in b_ids for ia in a_insts)
        return int(ok)

    def box(inst: ModelInstance) -> WorldBox:
        return world_box(inst, catalog.by_id[inst.model_id])

    ok = all(
        _geometric_predicate(c.predicate, box(ia), box(ib))
        for ia in a_insts
        for ib in b_insts
    )
    return int(ok)


# ---------------------------------------------------------------------------
# Scoring


def _surface_prob(category: str, parent_model: Model, surface: int, kb: KnowledgeBase) -> float:
    surf = surfaces_of(parent_model)[surface]
    return lookup_surface_support(category, kb).get(surf.feature_class, 0.0)


def _pose_density(
    kb: KnowledgeBase,
    obj_cat: str,
    ref_cat: str,
    scene_type: str,
    kind: RelationKind,
    obj_box: WorldBox,
    ref_box: WorldBox,
) -> float:
    try:
        dens = resolve_relpos(kb, obj_cat, ref_cat, scene_type, kind)
    except NoDataError:
        return 0.0
    rel = np.array(relative_sample(obj_box, ref_box))
    return min(float(dens.density(rel)), DENSITY_CAP)


def score_layout(
    scene: GeometricScene,
    t: SceneTemplate,
    kb: KnowledgeBase,
    catalog: Catalog,
    cfg: LayoutConfig,
) -> tuple[float, float, float]:
    """(L, L_obj, L_rel) of a realized scene against its template.

    L_obj sums, per supported instance, the surface-class prior of its
    resting surface times the mean capped position density against its
    parent and siblings.  L_rel counts satisfied relation constraints.
    Condition flags replace a disabled factor with a neutral one; when
    both L_obj factors are disabled the term is dropped entirely, and
    disabling spatial constraints zeroes L_rel.
    """
    flags = cfg.flags
    by_id = {inst.id: inst for inst in scene.instances}
    models = {inst.id: catalog.by_id[inst.model_id] for inst in scene.instances}
    boxes = {inst.id: world_box(inst, models[inst.id]) for inst in scene.instances}

    def category(inst: ModelInstance) -> str:
        if inst.object_index is None or not 0 <= inst.object_index < len(t.objects):
            raise SceneStructureError(
                f"instance {inst.id!r} does not map to a template object"
            )
        return t.objects[inst.object_index].category

    l_obj = 0.0
    if flags.use_support_priors or flags.use_relpos_priors:
        for inst in scene.instances:
            pid = scene.support_edges.get(inst.id)
            if pid is None:
                continue  # the root room anchors the tree and is not scored
            cat = category(inst)
            psurf = 1.0
            if flags.use_support_priors:
                psurf = _surface_prob(
                    cat, models[pid], inst.placement.support_surface, kb
                )
            relterm = 1.0
            if flags.use_relpos_priors:
                others = [(by_id[pid], RelationKind.CHILD_PARENT)]
                others += [
                    (by_id[cid], RelationKind.SIBLING)
                    for cid in scene.children_of(pid)
                    if cid != inst.id
                ]
                total = sum(
                    _pose_density(
                        kb, cat, category(other), t.scene_type, kind,
                        boxes[inst.id], boxes[other.id],
                    )
                    for other, kind in others
                )
                relterm = total / len(others)
            l_obj += psurf * relterm

    l_rel = 0.0
    if flags.use_spatial_constraints:
        l_rel = float(sum(relation_score(c, scene, catalog) for c in t.constraints))

    return cfg.lambda_obj * l_obj + cfg.lambda_rel * l_rel, l_obj, l_rel


# ---------------------------------------------------------------------------
# Placement


_WALL_SIDES = (BoxSide.FRONT, BoxSide.BACK, BoxSide.LEFT, BoxSide.RIGHT)


def _congruent_side(side: BoxSide, surf: SurfaceFeature) -> BoxSide:
    """Constrain the attachment side to sides the surface can actually hold.

    Any other combination embeds the object in its support (or perches it
    outside): yaw-only transforms cannot pitch a box, so up-facing
    surfaces take the bottom, down-facing ones the top, and walls a side
    face.  Every learned (surface class, side) pair already satisfies
    this; the override binds only under ablation's uniform surface draw.
    """
    if surf.normal_class == "up":
        return BoxSide.BOTTOM
    if surf.normal_class == "down":
        return BoxSide.TOP
    return side if side in _WALL_SIDES else BoxSide.BACK


def _aligned_yaw(side: BoxSide, normal: np.ndarray) -> float:
    """Parent-relative yaw pressing the attachment side against the wall."""
    m = SIDE_NORMALS[side]
    return wrap_angle(
        float(np.arctan2(-normal[1], -normal[0]) - np.arctan2(m[1], m[0]))
    )


def _sample_surface_index(
    category: str,
    parent_model: Model,
    kb: KnowledgeBase,
    use_priors: bool,
    rng: np.random.Generator,
) -> int:
    surfs = surfaces_of(parent_model)
    weights = None
    if use_priors:
        row = lookup_surface_support(category, kb)
        w = np.array([row.get(s.feature_class, 0.0) for s in surfs], dtype=float)
        if w.sum() > 0.0:
            weights = w / w.sum()
    if weights is None:
        weights = np.full(len(surfs), 1.0 / len(surfs))
    return int(rng.choice(len(surfs), p=weights))


def _attachment_side(
    category: str, model: Model, kb: KnowledgeBase, use_priors: bool
) -> BoxSide:
    if use_priors:
        row = lookup_attachment(category, kb)
        if row:
            best = max(sorted(row), key=row.get)
            return BoxSide(best)
    return fallback_attachment_side(model)


def _fresh_instance_id(scene: GeometricScene) -> str:
    """Next unused sequential id; removals must not recycle ids."""
    top = -1
    for inst in scene.instances:
        if inst.id.startswith("o") and inst.id[1:].isdigit():
            top = max(top, int(inst.id[1:]))
    return f"o{top + 1}"


def _ancestor_chains(scene: GeometricScene) -> dict[str, set[str]]:
    chains: dict[str, set[str]] = {}
    for inst in scene.instances:
        chain: set[str] = set()
        cur = scene.support_edges.get(inst.id)
        while cur is not None and cur not in chain:
            chain.add(cur)
            cur = scene.support_edges.get(cur)
        chains[inst.id] = chain
    return chains


def place_single(
    scene: GeometricScene,
    t: SceneTemplate,
    obj_idx: int,
    model: Model,
    parent_id: str,
    kb: KnowledgeBase,
    catalog: Catalog,
    cfg: LayoutConfig,
    rng: np.random.Generator,
    trace: list[dict] | None = None,
    fixed_surface: int | None = None,
    fixed_scale: float | None = None,
    inst_id: str | None = None,
) -> ModelInstance:
    """Sample, score, and commit a placement for one template object onto
    a parent instance already in the scene.

    This is the per-object step of ``place_scene``, exposed so editing
    operations can insert or re-place a single object against a live
    scene.  ``fixed_surface`` pins the parent surface and ``fixed_scale``
    the scale factor instead of drawing them, for operations that by
    contract touch neither.
    """
    flags = cfg.flags
    spec = t.objects[obj_idx]
    parent_inst = scene.instance(parent_id)
    parent_model = catalog.by_id[parent_inst.model_id]
    parent_cat = t.objects[parent_inst.object_index].category
    if inst_id is None:
        inst_id = _fresh_instance_id(scene)

    boxes = {i.id: world_box(i, catalog.by_id[i.model_id]) for i in scene.instances}
    ancestors = _ancestor_chains(scene)
    placed_of_obj = {
        i.object_index: i for i in scene.instances if i.object_index is not None
    }

    def constraint_delta(cand_box: WorldBox, cand_parent: str) -> float:
        """Satisfied constraints touching obj_idx, others already placed."""
        sat = 0
        for c in t.constraints:
            a, b = c.args
            if obj_idx not in (a, b):
                continue
            other = b if a == obj_idx else a
            if other != obj_idx and other not in placed_of_obj:
                continue
            if c.predicate in SUPPORT_PREDICATES:
                if a == obj_idx:
                    sat += int(placed_of_obj[b].id == cand_parent)
                # as a reference the candidate cannot support a placed child
                continue
            box_a = cand_box if a == obj_idx else boxes[placed_of_obj[a].id]
            box_b = cand_box if b == obj_idx else boxes[placed_of_obj[b].id]
            sat += int(_geometric_predicate(c.predicate, box_a, box_b))
        return float(sat)

    if fixed_surface is None:
        surf_idx = _sample_surface_index(
            spec.category, parent_model, kb, flags.use_support_priors, rng
        )
    else:
        surf_idx = fixed_surface
    surf = surfaces_of(parent_model)[surf_idx]
    side = _congruent_side(
        _attachment_side(spec.category, model, kb, flags.use_support_priors), surf
    )
    vertical = abs(surf.normal[2]) <= 0.5
    aligned = _aligned_yaw(side, surf.normal) if vertical else 0.0
    hu_local, hv_local = surf.half_lengths
    _, _, _, _, (hu_world, hv_world) = surface_world_frame(
        surf, parent_inst.transform
    )
    surface_rect = Rect2(center=(0.0, 0.0), half=(hu_world, hv_world))

    sibling_ids = scene.children_of(parent_inst.id)
    n_f = 1 + len(sibling_ids)  # parent plus siblings, candidate included

    # Position/orientation references: parent first, then siblings in
    # placement order, cycled across candidates.
    refs: list[tuple[object, WorldBox]] = []
    if flags.use_relpos_priors:
        for ref_inst, kind in [(parent_inst, RelationKind.CHILD_PARENT)] + [
            (scene.instance(sid), RelationKind.SIBLING) for sid in sibling_ids
        ]:
            ref_cat = t.objects[ref_inst.object_index].category
            try:
                dens = resolve_relpos(
                    kb, spec.category, ref_cat, t.scene_type, kind
                )
            except NoDataError:
                continue
            refs.append((dens, boxes[ref_inst.id]))

    psurf_cand = 1.0
    if flags.use_support_priors:
        psurf_cand = _surface_prob(spec.category, parent_model, surf_idx, kb)

    sib_weights: list[tuple[ModelInstance, float, int]] = []
    for sid in sibling_ids:
        sib = scene.instance(sid)
        w = 1.0
        if flags.use_support_priors:
            w = _surface_prob(
                t.objects[sib.object_index].category,
                parent_model,
                sib.placement.support_surface,
                kb,
            )
        sib_weights.append((sib, w, n_f))

    def local_score(cand_box: WorldBox, cand_parent_id: str) -> float:
        """Candidate-dependent part of the scene score.

        Terms constant across the batch (already placed objects'
        own densities, the surface prior factor) are dropped; the
        argmax is unchanged.
        """
        l_obj = 0.0
        if flags.use_support_priors or flags.use_relpos_priors:
            relterm = 1.0
            if flags.use_relpos_priors:
                total = _pose_density(
                    kb, spec.category, parent_cat, t.scene_type,
                    RelationKind.CHILD_PARENT, cand_box, boxes[parent_inst.id],
                )
                for sid in sibling_ids:
                    sib = scene.instance(sid)
                    total += _pose_density(
                        kb, spec.category,
                        t.objects[sib.object_index].category,
                        t.scene_type, RelationKind.SIBLING,
                        cand_box, boxes[sid],
                    )
                relterm = total / n_f
            l_obj += psurf_cand * relterm
            if flags.use_relpos_priors:
                # placed siblings gain the candidate in their reference sets
                for sib, w, divisor in sib_weights:
                    d = _pose_density(
                        kb, t.objects[sib.object_index].category,
                        spec.category, t.scene_type, RelationKind.SIBLING,
                        boxes[sib.id], cand_box,
                    )
                    l_obj += w * d / divisor
        l_rel = 0.0
        if flags.use_spatial_constraints:
            l_rel = constraint_delta(cand_box, cand_parent_id)
        return cfg.lambda_obj * l_obj + cfg.lambda_rel * l_rel

    def propose(index: int) -> Placement:
        if fixed_scale is None:
            sigma = float(rng.uniform(*cfg.sigma_range))
        else:
            sigma = fixed_scale
        used_kde = False
        yaw_rel = 0.0
        if refs:
            dens, ref_box = refs[index % len(refs)]
            if (index // len(refs)) % 2 == 0:
                # noise-free support point: Scott bandwidths fit on
                # multi-modal samples are wide, and pure draws can miss
                # every mode within the candidate budget
                base = dens.samples[int(rng.integers(len(dens.samples)))]
                x, y, theta = float(base[0]), float(base[1]), float(base[2])
            else:
                x, y, theta = dens.sample(rng)
            world_pt = ref_box.c + rot_z(ref_box.yaw) @ np.array(
                [x * ref_box.half[0], y * ref_box.half[1], 0.0]
            )
            origin, u_hat, v_hat, _, _ = surface_world_frame(
                surf, parent_inst.transform
            )
            d = world_pt - origin
            scale = parent_inst.transform.scale
            u = float(np.clip((d @ u_hat) / scale, -hu_local, hu_local))
            v = float(np.clip((d @ v_hat) / scale, -hv_local, hv_local))
            yaw_rel = wrap_angle(
                ref_box.yaw + theta - parent_inst.transform.yaw
            )
            used_kde = True
        else:
            u = float(rng.uniform(-hu_local, hu_local))
            v = float(rng.uniform(-hv_local, hv_local))
        if vertical:
            yaw_rel = aligned  # wall items face into the room
        elif not used_kde or index % 2 == 0:
            yaw_rel = (math.pi / 2.0) * int(rng.integers(4))
        return Placement(
            support_parent=parent_inst.id,
            support_surface=surf_idx,
            attachment_side=side,
            pos_on_surface=(u, v),
            yaw=yaw_rel,
            scale=sigma,
        )

    def realize(placement: Placement) -> tuple[ModelInstance, WorldBox]:
        tr = compose_transform(placement, model, parent_inst, parent_model)
        inst = ModelInstance(
            id=inst_id,
            model_id=model.id,
            placement=placement,
            transform=tr,
            object_index=obj_idx,
        )
        return inst, world_box(inst, model)

    def acceptable(inst: ModelInstance, box: WorldBox) -> bool:
        excluded = ancestors[parent_inst.id] | {parent_inst.id}
        for other in scene.instances:
            if other.id in excluded:
                continue
            if collides(box, boxes[other.id]):
                return False
        fp = footprint_on_surface(box, surf, parent_inst.transform)
        return overhang_fraction(fp, surface_rect) <= cfg.overhang_max

    best: tuple[ModelInstance, WorldBox] | None = None
    best_score = -math.inf
    scores: list[float] = []
    candidates: list[dict] = []
    chosen = -1
    rejected = 0
    batches = (cfg.samples_per_object, 2 * cfg.samples_per_object)
    for batch in batches:
        for ci in range(batch):
            inst, box = realize(propose(ci))
            ok = acceptable(inst, box)
            s = local_score(box, parent_inst.id) if ok else None
            if trace is not None:
                candidates.append(
                    {
                        "pos": inst.placement.pos_on_surface,
                        "yaw": inst.placement.yaw,
                        "sigma": inst.placement.scale,
                        "ok": ok,
                        "score": s,
                    }
                )
            if not ok:
                rejected += 1
                continue
            scores.append(s)
            if s > best_score:
                best, best_score, chosen = (inst, box), s, len(scores) - 1
        if best is not None:
            break
    if best is None:
        fallback = Placement(
            support_parent=parent_inst.id,
            support_surface=surf_idx,
            attachment_side=side,
            pos_on_surface=(0.0, 0.0),
            yaw=aligned if vertical else 0.0,
            scale=fixed_scale if fixed_scale is not None else 1.0,
        )
        best = realize(fallback)
        scene.degraded = True
    if trace is not None:
        trace.append(
            {
                "object_index": obj_idx,
                "scores": scores,
                "chosen": chosen,
                "rejected": rejected,
                "degraded": chosen == -1,
                "candidates": candidates,
            }
        )
    scene.instances.append(best[0])
    scene.support_edges[best[0].id] = parent_inst.id
    return best[0]


def place_scene(
    t: SceneTemplate,
    models: dict[int, Model],
    kb: KnowledgeBase,
    catalog: Catalog,
    cfg: LayoutConfig,
    trace: list[dict] | None = None,
) -> GeometricScene:
    """Realize a completed template as a physical scene.

    Walks the support tree depth first, larger assigned models first.
    Each object samples its parent surface and attachment side from the
    learned priors (uniform / fallback under ablation), draws a batch of
    candidate poses, rejects collisions and excessive overhang, and
    commits the best survivor under the layout objective.  If a doubled
    batch still yields no survivor the object is parked at the surface
    center and the scene is flagged degraded rather than failing.

    ``trace``, when given a list, receives one record per placed object
    with the surviving candidates' scores and the chosen index, for
    instrumentation.
    """
    bad = [o.index for o in t.objects if o.count != 1]
    if bad:
        raise SceneStructureError(
            f"objects {bad} have counts; run expand_counts before placement"
        )
    missing = [o.index for o in t.objects if o.index not in models]
    if missing:
        raise SceneStructureError(f"no model assigned for objects {missing}")

    tree = build_hierarchy(t, catalog, volume=lambda idx: models[idx].volume)
    root_cat = t.objects[tree.root].category
    if root_cat != ROOT_CATEGORY and not catalog.taxonomy.is_descendant(
        root_cat, ROOT_CATEGORY
    ):
        raise SceneStructureError(
            f"support tree must be rooted at a room, not {root_cat!r}"
        )

    rng = np.random.default_rng(cfg.rng_seed)
    scene = GeometricScene(scene_type=t.scene_type)
    inst_of: dict[int, ModelInstance] = {}
    for obj_idx in tree.dfs():
        if obj_idx == tree.root:
            model = models[obj_idx]
            placement = Placement()
            inst = ModelInstance(
                id=f"o{len(scene.instances)}",
                model_id=model.id,
                placement=placement,
                transform=compose_transform(placement, model, None, None),
                object_index=obj_idx,
            )
            scene.instances.append(inst)
            inst_of[obj_idx] = inst
            continue
        inst_of[obj_idx] = place_single(
            scene, t, obj_idx, models[obj_idx],
            inst_of[tree.parent[obj_idx]].id,
            kb, catalog, cfg, rng, trace=trace,
        )
    return scene


def generate(
    t: SceneTemplate,
    catalog: Catalog,
    kb: KnowledgeBase,
    cfg: LayoutConfig,
) -> tuple[GeometricScene, SceneTemplate]:
    """Template to scene: inference, count expansion, models, placement.

    Returns the scene together with the completed template it realizes
    (support parents filled in, counts expanded); instance object_index
    values refer to that returned template.
    """
    t = infer_support_parents(t, kb)
    if cfg.flags.use_inference:
        t = infer_scene_objects(t, kb)
    t, source = expand_counts(t)
    rng = np.random.default_rng(cfg.rng_seed)
    models: dict[int, Model] = {}
    shared: dict[int, Model] = {}  # copies of one plural mention match
    for spec in t.objects:
        src = source[spec.index]
        if src not in shared:
            shared[src] = _select_one(spec.category, spec.attributes, catalog, rng)
        models[spec.index] = shared[src]
    scene = place_scene(t, models, kb, catalog, cfg)
    return scene, t


def validate_scene(
    scene: GeometricScene, catalog: Catalog, overhang_max: float = 0.05
) -> list[str]:
    """Check the physical invariants placement promises.

    Returns human readable violation strings, empty when the scene is
    sound: no two boxes outside the same support chain intersect, every
    supported instance rests on an existing parent surface with its
    attachment face on the surface plane, and no footprint hangs off its
    surface by more than ``overhang_max``.
    """
    problems: list[str] = []
    boxes: dict[str, WorldBox] = {}
    for inst in scene.instances:
        model = catalog.by_id.get(inst.model_id)
        if model is None:
            problems.append(f"{inst.id}: unknown model {inst.model_id!r}")
            continue
        boxes[inst.id] = world_box(inst, model)

    ancestors: dict[str, set[str]] = {}
    for inst in scene.instances:
        chain: set[str] = set()
        cur = scene.support_edges.get(inst.id)
        while cur is not None and cur not in chain:
            chain.add(cur)
            cur = scene.support_edges.get(cur)
        ancestors[inst.id] = chain

    ids = [i.id for i in scene.instances if i.id in boxes]
    for i, a in enumerate(ids):
        for b in ids[i + 1 :]:
            if b in ancestors[a] or a in ancestors[b]:
                continue
            if collides(boxes[a], boxes[b]):
                problems.append(f"collision: {a} x {b}")

    root = scene.root_id()
    for inst in scene.instances:
        if inst.id == root or inst.id not in boxes:
            continue
        parent_id = scene.support_edges.get(inst.id)
        if parent_id is None or not scene.has_instance(parent_id):
            problems.append(f"{inst.id}: no support parent")
            continue
        if inst.placement.support_parent != parent_id:
            problems.append(f"{inst.id}: placement names a different parent")
            continue
        parent = scene.instance(parent_id)
        parent_model = catalog.by_id[parent.model_id]
        surfs = surfaces_of(parent_model)
        k = inst.placement.support_surface
        if k is None or not 0 <= k < len(surfs):
            problems.append(f"{inst.id}: surface {k} missing on {parent.model_id}")
            continue
        surf = surfs[k]
        model = catalog.by_id[inst.model_id]
        attach = inst.transform.apply(
            side_face_center(inst.placement.attachment_side, model.he)
        )
        origin, _, _, n_hat, (hu, hv) = surface_world_frame(surf, parent.transform)
        if abs(float((attach - origin) @ n_hat)) > 1e-6:
            problems.append(f"{inst.id}: attachment face off the surface plane")
        fp = footprint_on_surface(boxes[inst.id], surf, parent.transform)
        frac = overhang_fraction(fp, Rect2(center=(0.0, 0.0), half=(hu, hv)))
        if frac > overhang_max + 1e-9:
            problems.append(f"{inst.id}: overhang {frac:.3f} > {overhang_max}")
    return problems
