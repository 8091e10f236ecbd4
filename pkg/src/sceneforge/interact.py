"""Scene editing: resolve object references and apply parsed commands.

A live session is a ``SceneState``: the geometric scene, the current
selection, the camera, and the symbolic template kept in step with every
edit.  Operations change as little as possible: untouched instances keep
their transforms bit for bit unless a changed object collides with them,
in which case only the colliding ones are re-sampled.
"""

from __future__ import annotations

import copy
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .camera import Camera, lookat
from .catalog import Catalog
from .errors import NotFoundError, SceneforgeError, SceneStructureError
from .geometry import (
    ROOT_CATEGORY,
    GeometricScene,
    ModelInstance,
    Placement,
    Rect2,
    WorldBox,
    collides,
    compose_transform,
    footprint_on_surface,
    overhang_fraction,
    surface_world_frame,
    surfaces_of,
    world_box,
)
from .inference import SUPPORT_PREDICATES
from .lang import (
    ObjectReference,
    ObjectSpec,
    OpKind,
    Predicate,
    RelationConstraint,
    SceneOperation,
    SceneTemplate,
    operation_to_wire,
    parse_command,
)
from .layout import (
    LayoutConfig,
    _ancestor_chains,
    _attachment_side,
    _congruent_side,
    _fresh_instance_id,
    _geometric_predicate,
    _sample_surface_index,
    _select_one,
    place_single,
)
from .priors import KnowledgeBase, lookup_support

#: Camera-view sector qualifiers ("the chair on the left").
VIEW_PREDICATES = frozenset(
    {Predicate.LEFT_OF, Predicate.RIGHT_OF, Predicate.IN_FRONT_OF, Predicate.BEHIND}
)

# Directional moves step by half the target's horizontal box diagonal.
MOVE_STEP_FACTOR = 0.5
# Halve a blocked directional step at most this many times before giving up.
MOVE_STEP_TRIES = 3
# Cap on re-settling rounds after an edit displaces neighbours.
RESETTLE_ROUNDS = 10

DEFAULT_CAMERA = Camera(position=(4.0, -4.0, 3.0), target=(0.0, 0.0, 1.0))


@dataclass
class SceneState:
    """Live editing state: scene, selection, camera, and template."""

    scene: GeometricScene
    template: SceneTemplate
    selection: set[str] = field(default_factory=set)
    camera: Camera = DEFAULT_CAMERA

    def copy(self) -> "SceneState":
        return SceneState(
            scene=copy.deepcopy(self.scene),
            template=self.template,
            selection=set(self.selection),
            camera=self.camera,
        )


def check_state(z: SceneState) -> None:
    """Raise when the state invariants are broken."""
    ids = {i.id for i in z.scene.instances}
    stray = z.selection - ids
    if stray:
        raise SceneStructureError(f"selection references missing instances {sorted(stray)}")
    seen: set[int] = set()
    for inst in z.scene.instances:
        k = inst.object_index
        if k is None or not 0 <= k < len(z.template.objects):
            raise SceneStructureError(f"{inst.id}: object index {k} not in template")
        if k in seen:
            raise SceneStructureError(f"template object {k} realized twice")
        seen.add(k)
    if len(seen) != len(z.template.objects):
        missing = set(range(len(z.template.objects))) - seen
        raise SceneStructureError(f"template objects {sorted(missing)} have no instance")


@dataclass(frozen=True)
class JournalEntry:
    """One applied operation, as recorded in a session journal."""

    timestamp: float
    raw_text: str
    parsed_op: SceneOperation | None  # None for whole-scene regeneration
    changed_ids: tuple[str, ...]

    def to_wire(self) -> dict:
        op = None if self.parsed_op is None else operation_to_wire(self.parsed_op)
        return {
            "timestamp": self.timestamp,
            "rawText": self.raw_text,
            "parsedOp": op,
            "changedIds": list(self.changed_ids),
        }


# ---------------------------------------------------------------------------
# Reference resolution


def _category_matches(ref_cat: str, inst_cats: set[str], catalog: Catalog) -> bool:
    tax = catalog.taxonomy
    return any(c == ref_cat or tax.is_descendant(c, ref_cat) for c in inst_cats)


def _view_sector(pred: Predicate, d_xy: np.ndarray, cam: Camera) -> bool:
    """Sector test in the camera frame: left/right/front/back as seen."""
    fwd, right, _ = cam.basis()
    u = float(d_xy @ right[:2])
    v = -float(d_xy @ fwd[:2])  # positive toward the camera
    if pred is Predicate.LEFT_OF:
        return u <= -abs(v)
    if pred is Predicate.RIGHT_OF:
        return u >= abs(v)
    if pred is Predicate.IN_FRONT_OF:
        return v >= abs(u)
    return v <= -abs(u)


def _matching_instances(
    ref: ObjectReference, z: SceneState, catalog: Catalog
) -> list[ModelInstance]:
    out = []
    for inst in z.scene.instances:
        spec = z.template.objects[inst.object_index]
        model = catalog.by_id[inst.model_id]
        if not _category_matches(ref.category, {spec.category, model.category}, catalog):
            continue
        have = spec.attributes | model.attributes
        if not ref.attributes <= have:
            continue
        out.append(inst)
    return out


def resolve_objects(
    ref: ObjectReference, z: SceneState, catalog: Catalog
) -> list[str]:
    """Instance ids a reference denotes.

    Definite references pick the single best candidate (nearest the
    camera on ties); indefinite ones name a new object and resolve to
    nothing.  Spatial qualifiers are evaluated in the camera frame for
    the four view directions, geometrically for the rest.
    """
    if not ref.definite:
        return []
    return [_resolve_definite(ref, z, catalog).id]


def _resolve_definite(
    ref: ObjectReference, z: SceneState, catalog: Catalog
) -> ModelInstance:
    cands = _matching_instances(ref, z, catalog)
    if not cands:
        raise NotFoundError(f"no {ref.category!r} in the scene")
    if ref.spatial is not None:
        pred, referent = ref.spatial
        boxes = {
            i.id: world_box(i, catalog.by_id[i.model_id]) for i in z.scene.instances
        }
        if referent is None:
            # bare direction: relative to the candidates' own centroid
            centroid = np.mean([boxes[c.id].c[:2] for c in cands], axis=0)
            anchor = lambda c: boxes[c.id].c[:2] - centroid  # noqa: E731
            use_view = pred in VIEW_PREDICATES
            kept = [
                c for c in cands
                if (use_view and _view_sector(pred, anchor(c), z.camera))
            ]
        else:
            ref_inst = _resolve_definite(replace(referent, definite=True), z, catalog)
            kept = []
            for c in cands:
                if c.id == ref_inst.id:
                    continue
                if pred in SUPPORT_PREDICATES:
                    ok = z.scene.support_edges.get(c.id) == ref_inst.id
                elif pred in VIEW_PREDICATES:
                    d = boxes[c.id].c[:2] - boxes[ref_inst.id].c[:2]
                    ok = _view_sector(pred, d, z.camera)
                else:
                    ok = _geometric_predicate(pred, boxes[c.id], boxes[ref_inst.id])
                if ok:
                    kept.append(c)
        if not kept:
            raise NotFoundError(
                f"no {ref.category!r} {pred.value} the given reference"
            )
        cands = kept
    cam_pos = np.asarray(z.camera.position, dtype=float)

    def rank(inst: ModelInstance) -> tuple[float, str]:
        b = world_box(inst, catalog.by_id[inst.model_id])
        return (float(np.linalg.norm(b.c - cam_pos)), inst.id)

    return min(cands, key=rank)


# ---------------------------------------------------------------------------
# Mutation helpers


def _boxes_of(scene: GeometricScene, catalog: Catalog) -> dict[str, WorldBox]:
    return {i.id: world_box(i, catalog.by_id[i.model_id]) for i in scene.instances}


def _subtree_ids(scene: GeometricScene, root: str) -> list[str]:
    out = [root]
    stack = [root]
    while stack:
        for child in scene.children_of(stack.pop()):
            out.append(child)
            stack.append(child)
    return out


def _refresh_subtree_transforms(
    scene: GeometricScene, root: str, catalog: Catalog
) -> None:
    """Recompute descendants' transforms after their ancestor moved."""
    for iid in _subtree_ids(scene, root):
        if iid == root:
            continue
        inst = scene.instance(iid)
        parent = scene.instance(scene.support_edges[iid])
        inst.transform = compose_transform(
            inst.placement,
            catalog.by_id[inst.model_id],
            parent,
            catalog.by_id[parent.model_id],
        )


def _prior_parent(
    category: str,
    z: SceneState,
    kb: KnowledgeBase,
    catalog: Catalog,
    exclude: set[str],
) -> str:
    """Existing instance most plausible as a support parent, room fallback."""
    row = lookup_support(category, kb)
    best_id: str | None = None
    best_p = 0.0
    root = z.scene.root_id()
    for inst in z.scene.instances:
        if inst.id in exclude:
            continue
        parent_cat = z.template.objects[inst.object_index].category
        p = row.get(parent_cat, 0.0)
        if p > best_p:
            best_id, best_p = inst.id, p
    if best_id is not None:
        return best_id
    if root is None or root in exclude:
        raise SceneStructureError("scene has no support root left")
    return root


def _remove_template_object(
    t: SceneTemplate, idx: int
) -> tuple[SceneTemplate, dict[int, int]]:
    """Drop one object; reindex the rest and their constraints."""
    mapping: dict[int, int] = {}
    specs = []
    for o in t.objects:
        if o.index == idx:
            continue
        mapping[o.index] = len(specs)
        specs.append(replace(o, index=len(specs)))
    cons = tuple(
        replace(c, args=(mapping[c.args[0]], mapping[c.args[1]]))
        for c in t.constraints
        if idx not in c.args
    )
    return SceneTemplate(tuple(specs), cons, t.scene_type), mapping


def _replace_support_constraint(
    t: SceneTemplate, child_idx: int, parent_idx: int, inferred: bool = True
) -> SceneTemplate:
    """Point the child's support constraint at a new parent object."""
    kept = tuple(
        c for c in t.constraints
        if not (c.predicate in SUPPORT_PREDICATES and c.args[0] == child_idx)
    )
    new = RelationConstraint(
        Predicate.SUPPORTED_BY, (child_idx, parent_idx), inferred=inferred
    )
    return SceneTemplate(t.objects, kept + (new,), t.scene_type)


def _colliding_neighbours(
    scene: GeometricScene, catalog: Catalog, changed: set[str]
) -> list[str]:
    boxes = _boxes_of(scene, catalog)
    ancestors = _ancestor_chains(scene)
    hit = []
    for inst in scene.instances:
        if inst.id in changed or inst.id == scene.root_id():
            continue
        for cid in changed:
            if not scene.has_instance(cid):
                continue
            if cid in ancestors[inst.id] or inst.id in ancestors[cid]:
                continue
            if collides(boxes[inst.id], boxes[cid]):
                hit.append(inst.id)
                break
    return hit


def _resettle(
    z: SceneState,
    changed: set[str],
    kb: KnowledgeBase,
    catalog: Catalog,
    cfg: LayoutConfig,
    rng: np.random.Generator,
) -> None:
    """Re-sample neighbours displaced by an edit until nothing collides.

    Only instances that actually collide with a changed one move (the
    minimal-change contract); each keeps its parent, surface, and scale.
    """
    for _ in range(RESETTLE_ROUNDS):
        displaced = _colliding_neighbours(z.scene, catalog, changed)
        if not displaced:
            return
        for iid in displaced:
            inst = z.scene.instance(iid)
            _replant(
                z, iid, z.scene.support_edges[iid], kb, catalog, cfg, rng,
                fixed_surface=inst.placement.support_surface,
                fixed_scale=inst.placement.scale,
            )
            changed.add(iid)
    z.scene.degraded = True


def _delete_instance(scene: GeometricScene, iid: str) -> None:
    scene.instances = [i for i in scene.instances if i.id != iid]
    scene.support_edges.pop(iid, None)


def _replant(
    z: SceneState,
    iid: str,
    parent_id: str,
    kb: KnowledgeBase,
    catalog: Catalog,
    cfg: LayoutConfig,
    rng: np.random.Generator,
    fixed_surface: int | None = None,
    fixed_scale: float | None = None,
) -> None:
    """Re-place an existing instance, keeping its id and its children.

    The whole subtree is pulled out of the scene while the new spot is
    sampled: the children ride along afterwards, so their stale boxes
    must not count as obstacles.
    """
    inst = z.scene.instance(iid)
    model = catalog.by_id[inst.model_id]
    obj_idx = inst.object_index
    sub = set(_subtree_ids(z.scene, iid)) - {iid}
    parked = [i for i in z.scene.instances if i.id in sub]
    z.scene.instances = [i for i in z.scene.instances if i.id not in sub]
    _delete_instance(z.scene, iid)
    place_single(
        z.scene, z.template, obj_idx, model, parent_id,
        kb, catalog, cfg, rng,
        fixed_surface=fixed_surface, fixed_scale=fixed_scale, inst_id=iid,
    )
    z.scene.instances.extend(parked)
    _refresh_subtree_transforms(z.scene, iid, catalog)


# ---------------------------------------------------------------------------
# Operations


def apply_operation(
    op: SceneOperation,
    z: SceneState,
    kb: KnowledgeBase,
    catalog: Catalog,
    cfg: LayoutConfig,
    rng: np.random.Generator | None = None,
) -> SceneState:
    """Execute one operation, returning the new state.

    The input state is never mutated.  ``rng`` defaults to a generator
    seeded from the config, so replaying the same operations against the
    same state reproduces the scene exactly.
    """
    if rng is None:
        rng = np.random.default_rng(cfg.rng_seed)
    out = z.copy()
    handler = {
        OpKind.SELECT: _op_select,
        OpKind.LOOK_AT: _op_lookat,
        OpKind.INSERT: _op_insert,
        OpKind.REMOVE: _op_remove,
        OpKind.REPLACE: _op_replace,
        OpKind.MOVE: _op_move,
        OpKind.SCALE: _op_scale,
    }[op.kind]
    handler(op, out, kb, catalog, cfg, rng)
    check_state(out)
    return out


def _target_ids(op: SceneOperation, z: SceneState, catalog: Catalog) -> list[str]:
    # commands address an object even when phrased indefinitely
    return [_resolve_definite(op.target, z, catalog).id]


def _op_select(op, z: SceneState, kb, catalog, cfg, rng) -> None:
    z.selection = set(_target_ids(op, z, catalog))


def _op_lookat(op, z: SceneState, kb, catalog, cfg, rng) -> None:
    z.selection = set(_target_ids(op, z, catalog))
    z.camera = lookat(z.scene, catalog, z.selection)


def _constraint_targets(
    op: SceneOperation, z: SceneState, catalog: Catalog
) -> list[tuple[Predicate, ModelInstance]]:
    out = []
    for goal in op.constraints:
        if goal.referent is None:
            continue  # bare directions are handled by Move itself
        inst = _resolve_definite(replace(goal.referent, definite=True), z, catalog)
        out.append((goal.predicate, inst))
    return out


def _op_insert(op, z: SceneState, kb, catalog, cfg, rng) -> None:
    spec = ObjectSpec(
        index=len(z.template.objects),
        category=op.target.category,
        attributes=op.target.attributes,
    )
    model = _select_one(spec.category, spec.attributes, catalog, rng)
    goals = _constraint_targets(op, z, catalog)
    new_cons = tuple(
        RelationConstraint(pred, (spec.index, inst.object_index))
        for pred, inst in goals
    )
    z.template = SceneTemplate(
        z.template.objects + (spec,), z.template.constraints + new_cons,
        z.template.scene_type,
    )
    parent_id: str | None = None
    for pred, inst in goals:
        if pred in SUPPORT_PREDICATES:
            parent_id = inst.id
            break
    if parent_id is None:
        parent_id = _prior_parent(spec.category, z, kb, catalog, exclude=set())
    parent_idx = z.scene.instance(parent_id).object_index
    if not any(
        c.predicate in SUPPORT_PREDICATES and c.args[0] == spec.index
        for c in z.template.constraints
    ):
        z.template = _replace_support_constraint(z.template, spec.index, parent_idx)
    new_inst = place_single(
        z.scene, z.template, spec.index, model, parent_id, kb, catalog, cfg, rng
    )
    _resettle(z, {new_inst.id}, kb, catalog, cfg, rng)


def _op_remove(op, z: SceneState, kb, catalog, cfg, rng) -> None:
    iid = _target_ids(op, z, catalog)[0]
    victim = z.scene.instance(iid)
    orphans = z.scene.children_of(iid)
    obj_idx = victim.object_index

    _delete_instance(z.scene, iid)
    z.selection.discard(iid)

    # orphans find new support before the template forgets the victim
    new_parents: dict[str, str] = {}
    for child_id in orphans:
        child_cat = z.template.objects[z.scene.instance(child_id).object_index].category
        new_parents[child_id] = _prior_parent(
            child_cat, z, kb, catalog, exclude=set(_subtree_ids(z.scene, child_id))
        )

    z.template, mapping = _remove_template_object(z.template, obj_idx)
    for inst in z.scene.instances:
        inst.object_index = mapping[inst.object_index]

    changed: set[str] = set()
    for child_id, parent_id in new_parents.items():
        child = z.scene.instance(child_id)
        parent_idx = z.scene.instance(parent_id).object_index
        z.template = _replace_support_constraint(
            z.template, child.object_index, parent_idx
        )
        _replant(
            z, child_id, parent_id, kb, catalog, cfg, rng,
            fixed_scale=child.placement.scale,
        )
        changed.update(_subtree_ids(z.scene, child_id))
    if changed:
        _resettle(z, changed, kb, catalog, cfg, rng)


def _op_replace(op, z: SceneState, kb, catalog, cfg, rng) -> None:
    iid = _target_ids(op, z, catalog)[0]
    old = z.scene.instance(iid)
    obj_idx = old.object_index
    new_ref = op.secondary
    model = _select_one(new_ref.category, new_ref.attributes, catalog, rng)

    specs = list(z.template.objects)
    specs[obj_idx] = replace(
        specs[obj_idx],
        category=new_ref.category,
        attributes=new_ref.attributes,
        inferred=False,
    )
    z.template = SceneTemplate(tuple(specs), z.template.constraints, z.template.scene_type)

    parent_id = z.scene.support_edges.get(iid)
    if parent_id is None:
        raise SceneStructureError("cannot replace the scene root")
    parent = z.scene.instance(parent_id)
    parent_model = catalog.by_id[parent.model_id]
    surf = surfaces_of(parent_model)[old.placement.support_surface]
    placement = Placement(
        support_parent=parent_id,
        support_surface=old.placement.support_surface,
        attachment_side=_congruent_side(
            _attachment_side(new_ref.category, model, kb, cfg.flags.use_support_priors),
            surf,
        ),
        pos_on_surface=old.placement.pos_on_surface,
        yaw=old.placement.yaw,
        scale=old.placement.scale,
    )
    new_id = _fresh_instance_id(z.scene)
    new_inst = ModelInstance(
        id=new_id,
        model_id=model.id,
        placement=placement,
        transform=compose_transform(placement, model, parent, parent_model),
        object_index=obj_idx,
    )
    pos = next(k for k, i in enumerate(z.scene.instances) if i.id == iid)
    orphans = z.scene.children_of(iid)
    _delete_instance(z.scene, iid)
    z.scene.instances.insert(pos, new_inst)
    z.scene.support_edges[new_id] = parent_id
    if iid in z.selection:
        z.selection.discard(iid)
        z.selection.add(new_id)

    changed = {new_id}
    for child_id in orphans:
        child = z.scene.instance(child_id)
        surf_idx = _sample_surface_index(
            z.template.objects[child.object_index].category, model, kb,
            cfg.flags.use_support_priors, rng,
        )
        _replant(
            z, child_id, new_id, kb, catalog, cfg, rng,
            fixed_surface=surf_idx, fixed_scale=child.placement.scale,
        )
        changed.update(_subtree_ids(z.scene, child_id))
    _resettle(z, changed, kb, catalog, cfg, rng)


def _directional_move(
    z: SceneState, iid: str, pred: Predicate, catalog: Catalog, overhang_max: float
) -> bool:
    """Step the instance along a camera direction; True if it moved."""
    inst = z.scene.instance(iid)
    parent_id = z.scene.support_edges.get(iid)
    if parent_id is None:
        return False
    parent = z.scene.instance(parent_id)
    parent_model = catalog.by_id[parent.model_id]
    surf = surfaces_of(parent_model)[inst.placement.support_surface]
    origin, u_hat, v_hat, _, (hu_w, hv_w) = surface_world_frame(surf, parent.transform)
    surface_rect = Rect2(center=(0.0, 0.0), half=(hu_w, hv_w))

    fwd, right, _ = z.camera.basis()
    direction = {
        Predicate.LEFT_OF: -right,
        Predicate.RIGHT_OF: right,
        Predicate.IN_FRONT_OF: -fwd,  # toward the viewer
        Predicate.BEHIND: fwd,
    }[pred]

    box = world_box(inst, catalog.by_id[inst.model_id])
    step = MOVE_STEP_FACTOR * 2.0 * float(np.hypot(box.half[0], box.half[1]))
    boxes = _boxes_of(z.scene, catalog)
    ancestors = _ancestor_chains(z.scene)
    old_placement = inst.placement
    scale = parent.transform.scale
    hu_l, hv_l = surf.half_lengths
    for _ in range(MOVE_STEP_TRIES):
        # project the step into the surface plane, in surface coordinates
        du = float(direction @ u_hat) * step / scale
        dv = float(direction @ v_hat) * step / scale
        u = float(np.clip(old_placement.pos_on_surface[0] + du, -hu_l, hu_l))
        v = float(np.clip(old_placement.pos_on_surface[1] + dv, -hv_l, hv_l))
        cand = replace(old_placement, pos_on_surface=(u, v))
        tr = compose_transform(cand, catalog.by_id[inst.model_id], parent, parent_model)
        cand_box = WorldBox(
            center=tr.translation,
            half=tuple(tr.scale * catalog.by_id[inst.model_id].he),
            yaw=tr.yaw,
        )
        fp = footprint_on_surface(cand_box, surf, parent.transform)
        blocked = overhang_fraction(fp, surface_rect) > overhang_max or any(
            collides(cand_box, boxes[o.id])
            for o in z.scene.instances
            if o.id != iid
            and o.id not in ancestors[iid]
            and iid not in ancestors[o.id]
        )
        if not blocked:
            inst.placement = cand
            inst.transform = tr
            _refresh_subtree_transforms(z.scene, iid, catalog)
            return (u, v) != old_placement.pos_on_surface
        step /= 2.0
    return False


def _op_move(op, z: SceneState, kb, catalog, cfg, rng) -> None:
    iid = _target_ids(op, z, catalog)[0]
    inst = z.scene.instance(iid)
    obj_idx = inst.object_index

    bare = [g.predicate for g in op.constraints if g.referent is None]
    if bare and all(g.referent is None for g in op.constraints):
        moved = _directional_move(z, iid, bare[0], catalog, cfg.overhang_max)
        if moved:
            _resettle(z, set(_subtree_ids(z.scene, iid)), kb, catalog, cfg, rng)
        return

    goals = _constraint_targets(op, z, catalog)
    if not goals:
        raise SceneforgeError("move needs a direction or a goal relation")

    # the new instruction supersedes the target's earlier explicit goals;
    # constraints merely referencing it belong to other objects and stay
    kept = tuple(
        c for c in z.template.constraints
        if c.inferred
        or c.args[0] != obj_idx
        or c.predicate in SUPPORT_PREDICATES
    )
    new_cons = tuple(
        RelationConstraint(pred, (obj_idx, g.object_index))
        for pred, g in goals
        if pred not in SUPPORT_PREDICATES and g.object_index != obj_idx
    )
    z.template = SceneTemplate(
        z.template.objects, kept + new_cons, z.template.scene_type
    )

    parent_id = z.scene.support_edges.get(iid)
    for pred, g in goals:
        if pred in SUPPORT_PREDICATES or (
            pred is Predicate.IN
            and z.template.objects[g.object_index].category == ROOT_CATEGORY
        ):
            parent_id = g.id
            z.template = _replace_support_constraint(
                z.template, obj_idx, g.object_index, inferred=False
            )
            break
    if parent_id is None:
        raise SceneStructureError("cannot move the scene root")
    if parent_id in _subtree_ids(z.scene, iid):
        raise SceneStructureError("cannot place an object on its own supportee")

    _replant(z, iid, parent_id, kb, catalog, cfg, rng,
             fixed_scale=inst.placement.scale)
    _resettle(z, set(_subtree_ids(z.scene, iid)), kb, catalog, cfg, rng)


def _op_scale(op, z: SceneState, kb, catalog, cfg, rng) -> None:
    iid = _target_ids(op, z, catalog)[0]
    inst = z.scene.instance(iid)
    parent_id = z.scene.support_edges.get(iid)
    if parent_id is None:
        raise SceneforgeError("the room cannot be scaled")
    parent = z.scene.instance(parent_id)
    model = catalog.by_id[inst.model_id]
    new_scale = inst.placement.scale * float(op.scalar)
    inst.placement = replace(inst.placement, scale=new_scale)
    inst.transform = compose_transform(
        inst.placement, model, parent, catalog.by_id[parent.model_id]
    )
    _refresh_subtree_transforms(z.scene, iid, catalog)

    if _needs_relocation(z, iid, catalog, cfg):
        _replant(
            z, iid, parent_id, kb, catalog, cfg, rng,
            fixed_surface=inst.placement.support_surface,
            fixed_scale=new_scale,
        )
    _resettle(z, set(_subtree_ids(z.scene, iid)), kb, catalog, cfg, rng)


def _needs_relocation(
    z: SceneState, iid: str, catalog: Catalog, cfg: LayoutConfig
) -> bool:
    boxes = _boxes_of(z.scene, catalog)
    ancestors = _ancestor_chains(z.scene)
    for other in z.scene.instances:
        if other.id == iid or other.id in ancestors[iid] or iid in ancestors[other.id]:
            continue
        if collides(boxes[iid], boxes[other.id]):
            return True
    inst = z.scene.instance(iid)
    parent = z.scene.instance(z.scene.support_edges[iid])
    surf = surfaces_of(catalog.by_id[parent.model_id])[inst.placement.support_surface]
    fp = footprint_on_surface(boxes[iid], surf, parent.transform)
    _, _, _, _, (hu, hv) = surface_world_frame(surf, parent.transform)
    frac = overhang_fraction(fp, Rect2(center=(0.0, 0.0), half=(hu, hv)))
    return frac > cfg.overhang_max


# ---------------------------------------------------------------------------
# Text entry point


def diff_changed(before: GeometricScene, after: GeometricScene) -> tuple[str, ...]:
    """Ids added, removed, or whose transform moved between two scenes."""
    a = {i.id: i for i in before.instances}
    b = {i.id: i for i in after.instances}
    changed = set(a.keys()) ^ set(b.keys())
    for iid in a.keys() & b.keys():
        if a[iid].transform != b[iid].transform or a[iid].model_id != b[iid].model_id:
            changed.add(iid)
    return tuple(sorted(changed))


def apply_text(
    z: SceneState,
    text: str,
    kb: KnowledgeBase,
    catalog: Catalog,
    cfg: LayoutConfig,
    rng: np.random.Generator | None = None,
    clock=time.time,
) -> tuple[SceneState, list[JournalEntry]]:
    """Parse a command string and apply its operations in order."""
    ops = parse_command(text, catalog.taxonomy)
    entries = []
    for op in ops:
        before = z.scene
        z = apply_operation(op, z, kb, catalog, cfg, rng)
        entries.append(
            JournalEntry(
                timestamp=float(clock()),
                raw_text=text,
                parsed_op=op,
                changed_ids=diff_changed(before, z.scene),
            )
        )
    return z, entries
