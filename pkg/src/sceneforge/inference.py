"""Template completion: fill in support parents, carrier objects, and
scene-typical objects before layout.

A parsed template usually names only what the user cares about ("a sandwich
on a plate").  Everything else needed to anchor those objects in a physical
room is inferred here from the learned support statistics: the plate gets a
table, the table gets the room, and so on.  Inferred objects and
constraints carry ``inferred=True`` so later stages and the UI can tell
them apart from explicit ones.
"""

from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass, replace

import numpy as np

from .catalog import Catalog
from .errors import SceneStructureError
from .lang import ObjectSpec, Predicate, RelationConstraint, SceneTemplate
from .priors import KnowledgeBase, lookup_support

#: Constraints that pin a child to a support parent.  "in" is deliberately
#: not included: "a computer in a room" still needs a desk inferred under
#: the computer, with containment enforced geometrically instead.
SUPPORT_PREDICATES = (Predicate.ON, Predicate.SUPPORTED_BY)

#: Upper bound on objects added per template by infer_scene_objects.
MAX_INFERRED_OBJECTS = 5

#: Occurrence probability at or above which a scene-typical object is added.
OCCURRENCE_THRESHOLD = 0.5


def _supported_indices(constraints) -> set[int]:
    return {c.args[0] for c in constraints if c.predicate in SUPPORT_PREDICATES}


def _parent_category(
    category: str, kb: KnowledgeBase, rng: np.random.Generator | None
) -> str:
    """Most likely support parent for ``category``, or a seeded draw."""
    row = lookup_support(category, kb)
    if not row:
        return "room"
    cats = sorted(row)
    if rng is None:
        return max(cats, key=lambda c: row[c])
    probs = np.array([row[c] for c in cats], dtype=float)
    probs /= probs.sum()
    return cats[int(rng.choice(len(cats), p=probs))]


def infer_support_parents(
    t: SceneTemplate,
    kb: KnowledgeBase,
    rng: np.random.Generator | None = None,
) -> SceneTemplate:
    """Give every object a support parent, adding carriers as needed.

    Objects lacking an on/supported_by constraint get one: if the most
    likely parent category is already in the template the object attaches
    to it (lowest index first, exact category before taxonomy descendants);
    otherwise a new inferred object of that category is added and itself
    anchored, recursively, until the chain reaches the room.  With ``rng``
    the parent category is sampled from the support prior instead of taking
    the argmax.  Explicit content is never modified, and the operation is
    idempotent.
    """
    objects = list(t.objects)
    constraints = list(t.constraints)
    supported = _supported_indices(constraints)
    parent_map = {
        c.args[0]: c.args[1] for c in constraints if c.predicate in SUPPORT_PREDICATES
    }

    def would_cycle(candidate: int, cur: int) -> bool:
        walk = candidate
        hops = 0
        while walk in parent_map and hops <= len(objects):
            walk = parent_map[walk]
            hops += 1
            if walk == cur:
                return True
        return False

    def find_attach_target(cat: str, cur: int) -> int | None:
        for spec in objects:
            if spec.index != cur and spec.category == cat and not would_cycle(spec.index, cur):
                return spec.index
        for spec in objects:
            if (
                spec.index != cur
                and kb.taxonomy.is_descendant(spec.category, cat)
                and not would_cycle(spec.index, cur)
            ):
                return spec.index
        return None

    for i in range(len(t.objects)):
        cur = i
        seen_cats = {objects[cur].category}
        while cur not in supported and objects[cur].category != "room":
            pcat = _parent_category(objects[cur].category, kb, rng)
            # Degenerate support tables could loop categories; fall back to
            # the room rather than growing an endless chain.
            if pcat in seen_cats:
                pcat = "room"
            target = find_attach_target(pcat, cur)
            if target is None:
                target = len(objects)
                objects.append(ObjectSpec(index=target, category=pcat, inferred=True))
            constraints.append(
                RelationConstraint(Predicate.SUPPORTED_BY, (cur, target), inferred=True)
            )
            supported.add(cur)
            parent_map[cur] = target
            cur = target
            seen_cats.add(objects[cur].category)

    if len(objects) == len(t.objects) and len(constraints) == len(t.constraints):
        return t
    return SceneTemplate(tuple(objects), tuple(constraints), t.scene_type)


def infer_scene_objects(
    t: SceneTemplate, kb: KnowledgeBase, enable: bool = True
) -> SceneTemplate:
    """Add objects typical for the scene type (beds to bedrooms, ...).

    Categories whose occurrence probability for ``t.scene_type`` is at
    least 0.5 and which are not yet present are added in descending
    probability order, at most five, then anchored via
    :func:`infer_support_parents`.  Disabled, this is the identity.
    """
    if not enable:
        return t

    def present(cat: str) -> bool:
        return any(
            o.category == cat or kb.taxonomy.is_descendant(o.category, cat)
            for o in objects
        )

    objects = list(t.objects)
    candidates = sorted(
        (
            (prob, cat)
            for (cat, stype), prob in kb.occ.items()
            if stype == t.scene_type and prob >= OCCURRENCE_THRESHOLD
        ),
        key=lambda pc: (-pc[0], pc[1]),
    )
    added = 0
    for prob, cat in candidates:
        if added == MAX_INFERRED_OBJECTS:
            break
        if present(cat):
            continue
        objects.append(ObjectSpec(index=len(objects), category=cat, inferred=True))
        added += 1
    if added == 0:
        return t
    grown = SceneTemplate(tuple(objects), t.constraints, t.scene_type)
    return infer_support_parents(grown, kb)


def expand_counts(t: SceneTemplate) -> tuple[SceneTemplate, dict[int, int]]:
    """Rewrite plural objects as one template object per physical copy.

    Returns the expanded template and a map from new index to the source
    object's index, so callers can keep per-copy state (such as a chosen
    model) aligned across the rewrite.  Support constraints distribute
    round-robin over the parent's copies (each copy rests on exactly one
    parent); all other constraints apply to every copy pair.
    """
    if all(o.count == 1 for o in t.objects):
        return t, {o.index: o.index for o in t.objects}
    objects: list[ObjectSpec] = []
    copies: dict[int, list[int]] = {}
    source: dict[int, int] = {}
    for o in t.objects:
        copies[o.index] = []
        for _ in range(o.count):
            idx = len(objects)
            copies[o.index].append(idx)
            source[idx] = o.index
            objects.append(replace(o, index=idx, count=1))
    constraints: list[RelationConstraint] = []
    seen: set[tuple[Predicate, int, int]] = set()
    for c in t.constraints:
        a_copies, b_copies = copies[c.args[0]], copies[c.args[1]]
        if c.predicate in SUPPORT_PREDICATES:
            pairs = [(a, b_copies[i % len(b_copies)]) for i, a in enumerate(a_copies)]
        else:
            pairs = [(a, b) for a in a_copies for b in b_copies]
        for a, b in pairs:
            key = (c.predicate, a, b)
            if key in seen:
                continue
            seen.add(key)
            constraints.append(replace(c, args=(a, b)))
    expanded = SceneTemplate(tuple(objects), tuple(constraints), t.scene_type)
    return expanded, source


@dataclass(frozen=True)
class SupportTree:
    """Support hierarchy over template object indices, rooted at the room."""

    root: int
    parent: dict[int, int]
    children: dict[int, tuple[int, ...]]

    def dfs(self) -> list[int]:
        """Pre-order traversal; children visited largest category first."""
        out = []
        stack = [self.root]
        while stack:
            node = stack.pop()
            out.append(node)
            stack.extend(reversed(self.children.get(node, ())))
        return out


def build_hierarchy(
    t: SceneTemplate,
    catalog: Catalog,
    volume: Callable[[int], float] | None = None,
) -> SupportTree:
    """Assemble the support tree from a completed template.

    Every object except the root must carry exactly one support constraint
    (duplicated identical ones are tolerated); contradictory or cyclic
    support is a SceneStructureError.  Children order under each parent is
    by descending volume, ties by index; ``volume`` defaults to the
    catalog's category mean but callers that already picked concrete
    models can pass their scaled volumes instead.
    """
    parent: dict[int, int] = {}
    for c in t.constraints:
        if c.predicate not in SUPPORT_PREDICATES:
            continue
        child, par = c.args
        if child in parent and parent[child] != par:
            raise SceneStructureError(
                f"object {child} has conflicting support parents {parent[child]} and {par}"
            )
        parent[child] = par

    roots = [o.index for o in t.objects if o.index not in parent]
    if not roots:
        raise SceneStructureError("support constraints form a cycle (no root object)")
    if len(roots) > 1:
        raise SceneStructureError(
            f"support hierarchy has several roots: {roots}; every object but the room needs a parent"
        )
    root = roots[0]

    children: dict[int, list[int]] = {o.index: [] for o in t.objects}
    for child, par in parent.items():
        if par not in children:
            raise SceneStructureError(f"support parent {par} is not a template object")
        children[par].append(child)

    if volume is None:

        def volume(idx: int) -> float:
            return catalog.mean_volume(t.objects[idx].category)

    ordered = {
        idx: tuple(sorted(kids, key=lambda k: (-volume(k), k)))
        for idx, kids in children.items()
    }

    tree = SupportTree(root=root, parent=dict(parent), children=ordered)
    if len(tree.dfs()) != len(t.objects):
        raise SceneStructureError("support constraints form a cycle")
    return tree
