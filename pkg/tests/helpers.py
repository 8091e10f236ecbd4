"""Hand-built scene fixtures shared across test modules."""

from __future__ import annotations

import numpy as np

from sceneforge.catalog import fallback_attachment_side
from sceneforge.geometry import (
    GeometricScene,
    ModelInstance,
    Placement,
    Transform,
    compose_transform,
)


class SceneRig:
    """Assemble small scenes instance by instance.

    ``add`` goes through the placement machinery; ``add_free`` pins a raw
    transform with no support edge, for the recovery fixtures.
    """

    def __init__(self, catalog, scene_type="kitchen", room="room_basic"):
        self.catalog = catalog
        self.scene = GeometricScene(scene_type=scene_type)
        self.room = self.add(room, None, inst_id="room_0") if room else None

    def add(
        self,
        model_id,
        parent_id,
        surface=0,
        u=0.0,
        v=0.0,
        yaw=0.0,
        scale=1.0,
        inst_id=None,
        side=None,
    ):
        model = self.catalog.by_id[model_id]
        placement = Placement(
            support_parent=parent_id,
            support_surface=surface,
            attachment_side=side or fallback_attachment_side(model),
            pos_on_surface=(u, v),
            yaw=yaw,
            scale=scale,
        )
        parent = self.scene.instance(parent_id) if parent_id else None
        parent_model = self.catalog.by_id[parent.model_id] if parent else None
        inst = ModelInstance(
            id=inst_id or f"{model.category}_{len(self.scene.instances)}",
            model_id=model_id,
            placement=placement,
            transform=compose_transform(placement, model, parent, parent_model),
        )
        self.scene.instances.append(inst)
        if parent_id:
            self.scene.support_edges[inst.id] = parent_id
        return inst

    def add_free(self, model_id, translation, yaw=0.0, scale=1.0, inst_id=None):
        model = self.catalog.by_id[model_id]
        inst = ModelInstance(
            id=inst_id or f"{model.category}_{len(self.scene.instances)}",
            model_id=model_id,
            placement=Placement(yaw=yaw, scale=scale),
            transform=Transform(translation=tuple(translation), yaw=yaw, scale=scale),
        )
        self.scene.instances.append(inst)
        return inst


def kde_grid_mass(density, xy_lim: float = 5.0) -> float:
    """Midpoint-rule mass of a position density over the standard test box.

    Grid steps adapt to the bandwidths so narrow kernels are resolved;
    evaluation goes through the density's own kernel, one angle slab at a
    time to bound memory.
    """
    hx, hy, ht = density.bandwidth

    def axis(h):
        step = min(float(h), 0.25) * 0.8
        n = max(int(np.ceil(2.0 * xy_lim / step)), 8)
        centers = -xy_lim + (np.arange(n) + 0.5) * (2.0 * xy_lim / n)
        return centers, 2.0 * xy_lim / n

    xs, dx = axis(hx)
    ys, dy = axis(hy)
    nt = max(int(np.ceil(2.0 * np.pi / (min(float(ht), 0.4) * 0.8))), 12)
    dt = 2.0 * np.pi / nt
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    flat = np.stack([gx.ravel(), gy.ravel()], axis=1)
    total = 0.0
    for k in range(nt):
        theta = (k + 0.5) * dt
        pts = np.column_stack([flat, np.full(len(flat), theta)])
        total += float(density.density(pts).sum()) * dx * dy * dt
    return total


def translated(scene: GeometricScene, delta) -> GeometricScene:
    """Copy of a scene rigidly translated by ``delta``."""
    out = GeometricScene(
        scene_type=scene.scene_type, support_edges=dict(scene.support_edges)
    )
    for inst in scene.instances:
        tr = inst.transform
        moved = Transform(
            translation=tuple(np.asarray(tr.translation) + np.asarray(delta)),
            yaw=tr.yaw,
            scale=tr.scale,
        )
        out.instances.append(
            ModelInstance(inst.id, inst.model_id, inst.placement, moved, inst.object_index)
        )
    return out
