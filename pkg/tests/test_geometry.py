from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sceneforge.catalog import BoxSide, Model, SurfaceFeature
from sceneforge.geometry import (
    Placement,
    ModelInstance,
    Rect2,
    Transform,
    WorldBox,
    collides,
    compose_transform,
    decompose_transform,
    footprint_on_surface,
    overhang_fraction,
    surface_world_frame,
    world_box,
    wrap_angle,
)

CUBE = Model(id="cube", category="box", half_extents=(0.5, 0.5, 0.5))
TABLE = Model(
    id="table",
    category="table",
    half_extents=(0.8, 0.5, 0.35),
    support_surfaces=(
        SurfaceFeature(
            normal_class="up",
            facing="exterior",
            center=(0.0, 0.0, 0.35),
            axes=((0.8, 0.0, 0.0), (0.0, 0.5, 0.0)),
        ),
    ),
)


def table_instance(translation=(0.0, 0.0, 0.35), yaw=0.0, scale=1.0):
    p = Placement(support_parent=None, attachment_side=BoxSide.BOTTOM, yaw=yaw, scale=scale)
    tr = compose_transform(p, TABLE, None, None)
    tr = Transform(translation=translation, yaw=tr.yaw, scale=tr.scale)
    return ModelInstance(id="table_0", model_id="table", placement=p, transform=tr)


class TestComposeTransform:
    def test_identity_placement_on_floor(self):
        p = Placement(attachment_side=BoxSide.BOTTOM)
        tr = compose_transform(p, CUBE, None, None)
        assert np.allclose(tr.t, [0, 0, 0.5])

    def test_scale_doubles_contact_offset(self):
        p = Placement(attachment_side=BoxSide.BOTTOM, scale=2.0)
        tr = compose_transform(p, CUBE, None, None)
        assert np.allclose(tr.t, [0, 0, 1.0])

    def test_position_on_table_top(self):
        table = table_instance()
        sigma = 1.0
        p = Placement(
            support_parent="table_0",
            support_surface=0,
            attachment_side=BoxSide.BOTTOM,
            pos_on_surface=(0.3, -0.1),
            scale=sigma,
        )
        tr = compose_transform(p, CUBE, table, TABLE)
        # table top sits at z = 0.35 + 0.35 = 0.7
        assert np.allclose(tr.t, [0.3, -0.1, 0.7 + 0.5 * sigma])

    def test_invalid_surface_index(self):
        table = table_instance()
        p = Placement(support_parent="table_0", support_surface=3)
        with pytest.raises(Exception, match="surface index"):
            compose_transform(p, CUBE, table, TABLE)

    @settings(max_examples=150)
    @given(
        u=st.floats(-0.7, 0.7),
        v=st.floats(-0.4, 0.4),
        yaw=st.floats(0, 6.28),
        scale=st.floats(0.5, 2.0),
        parent_yaw=st.floats(0, 6.28),
        side=st.sampled_from(list(BoxSide)),
    )
    def test_compose_decompose_roundtrip(self, u, v, yaw, scale, parent_yaw, side):
        table = table_instance(translation=(1.0, -2.0, 0.35), yaw=parent_yaw)
        p = Placement(
            support_parent="table_0",
            support_surface=0,
            attachment_side=side,
            pos_on_surface=(u, v),
            yaw=yaw,
            scale=scale,
        )
        tr = compose_transform(p, CUBE, table, TABLE)
        back = decompose_transform(tr, p, CUBE, table, TABLE)
        assert abs(back.pos_on_surface[0] - u) < 1e-9
        assert abs(back.pos_on_surface[1] - v) < 1e-9
        d = abs(back.yaw - wrap_angle(yaw))
        assert min(d, 2 * np.pi - d) < 1e-9
        assert abs(back.scale - scale) < 1e-9


class TestWorldBox:
    def test_unit_cube_identity(self):
        inst = ModelInstance(
            id="c", model_id="cube", placement=Placement(),
            transform=Transform(translation=(0, 0, 0), yaw=0.0, scale=1.0),
        )
        box = world_box(inst, CUBE)
        assert np.allclose(box.corners().min(axis=0), [-0.5, -0.5, -0.5])
        assert np.allclose(box.corners().max(axis=0), [0.5, 0.5, 0.5])

    def test_quarter_turn_swaps_extents(self):
        m = Model(id="slab", category="box", half_extents=(1.0, 0.5, 0.5))
        inst = ModelInstance(
            id="s", model_id="slab", placement=Placement(),
            transform=Transform(translation=(0, 0, 0), yaw=np.pi / 2, scale=1.0),
        )
        corners = world_box(inst, m).corners()
        ext = corners.max(axis=0) - corners.min(axis=0)
        assert np.allclose(ext, [1.0, 2.0, 1.0], atol=1e-12)

    def test_scale(self):
        inst = ModelInstance(
            id="c", model_id="cube", placement=Placement(scale=1.5),
            transform=Transform(translation=(0, 0, 0), yaw=0.0, scale=1.5),
        )
        box = world_box(inst, CUBE)
        assert np.allclose(box.h, [0.75, 0.75, 0.75])


def box(cx=0.0, cy=0.0, cz=0.0, hx=0.5, hy=0.5, hz=0.5, yaw=0.0):
    return WorldBox(center=(cx, cy, cz), half=(hx, hy, hz), yaw=yaw)


class TestCollides:
    def test_identical_boxes_collide(self):
        assert collides(box(), box())

    def test_shared_face_is_contact_not_collision(self):
        assert not collides(box(), box(cx=1.0))

    def test_separated(self):
        assert not collides(box(), box(cx=1.5, cy=1.0))

    def test_rotated_overlap(self):
        assert collides(box(yaw=0.7), box(cx=0.6, yaw=1.2))

    @settings(max_examples=100)
    @given(
        cx=st.floats(-2, 2), cy=st.floats(-2, 2), cz=st.floats(-1, 1),
        yaw_a=st.floats(0, 6.28), yaw_b=st.floats(0, 6.28),
        dx=st.floats(-5, 5), dy=st.floats(-5, 5), rot=st.floats(0, 6.28),
    )
    def test_symmetric_and_rigid_motion_invariant(self, cx, cy, cz, yaw_a, yaw_b, dx, dy, rot):
        a = box(yaw=yaw_a)
        b = box(cx=cx, cy=cy, cz=cz, yaw=yaw_b)
        got = collides(a, b)
        assert collides(b, a) == got

        c, s = np.cos(rot), np.sin(rot)

        def moved(w: WorldBox) -> WorldBox:
            x, y, z = w.center
            return WorldBox(
                center=(c * x - s * y + dx, s * x + c * y + dy, z),
                half=w.half,
                yaw=w.yaw + rot,
            )

        assert collides(moved(a), moved(b)) == got


class TestOverhang:
    SURF = Rect2(center=(0.0, 0.0), half=(1.0, 1.0))

    def test_fully_inside(self):
        fp = Rect2(center=(0.2, 0.1), half=(0.3, 0.3))
        assert overhang_fraction(fp, self.SURF) == 0.0

    def test_fully_outside(self):
        fp = Rect2(center=(5.0, 0.0), half=(0.3, 0.3))
        assert overhang_fraction(fp, self.SURF) == 1.0

    def test_half_off_edge(self):
        fp = Rect2(center=(1.0, 0.0), half=(0.4, 0.4))
        assert abs(overhang_fraction(fp, self.SURF) - 0.5) < 1e-12

    def test_zero_area_errors(self):
        with pytest.raises(ValueError, match="zero-area"):
            overhang_fraction(Rect2(center=(0, 0), half=(0.0, 0.4)), self.SURF)

    @given(
        start=st.floats(0, 0.4), step=st.floats(0, 1.0),
        dirx=st.floats(-1, 1), diry=st.floats(-1, 1), angle=st.floats(0, 6.28),
    )
    def test_monotone_moving_outward(self, start, step, dirx, diry, angle):
        n = np.hypot(dirx, diry)
        if n < 1e-6:
            return
        d = np.array([dirx, diry]) / n
        f0 = overhang_fraction(Rect2(center=tuple(start * d), half=(0.3, 0.2), angle=angle), self.SURF)
        f1 = overhang_fraction(
            Rect2(center=tuple((start + step) * d), half=(0.3, 0.2), angle=angle), self.SURF
        )
        assert f1 >= f0 - 1e-12


class TestFootprint:
    def test_joint_rigid_motion_invariance(self):
        child = Model(id="c", category="box", half_extents=(0.2, 0.1, 0.05))

        def fraction(parent_translation, parent_yaw, u, v, yaw):
            table = table_instance(translation=parent_translation, yaw=parent_yaw)
            p = Placement(
                support_parent="table_0",
                attachment_side=BoxSide.BOTTOM,
                pos_on_surface=(u, v),
                yaw=yaw,
            )
            tr = compose_transform(p, child, table, TABLE)
            inst = ModelInstance(id="x", model_id="c", placement=p, transform=tr)
            surf = TABLE.support_surfaces[0]
            fp = footprint_on_surface(world_box(inst, child), surf, table.transform)
            _, _, _, _, (hu, hv) = surface_world_frame(surf, table.transform)
            return overhang_fraction(fp, Rect2(center=(0, 0), half=(hu, hv)))

        base = fraction((0, 0, 0.35), 0.0, 0.75, 0.1, 0.3)
        moved = fraction((3.0, -1.0, 0.35), 1.1, 0.75, 0.1, 0.3)
        assert abs(base - moved) < 1e-9
        assert 0.0 < base < 1.0

    def test_wall_projection_is_rect(self):
        wall = SurfaceFeature(
            normal_class="horizontal",
            facing="interior",
            center=(-3.0, 0.0, 0.0),
            axes=((0.0, 2.5, 0.0), (0.0, 0.0, 1.35)),
        )
        parent_tr = Transform(translation=(0, 0, 1.35), yaw=0.0, scale=1.0)
        b = WorldBox(center=(-2.9, 0.5, 1.5), half=(0.3, 0.01, 0.45), yaw=0.4)
        fp = footprint_on_surface(b, wall, parent_tr)
        assert fp.angle == 0.0
        # v axis is vertical: half extent equals the box z half extent
        assert abs(fp.half[1] - 0.45) < 1e-12
