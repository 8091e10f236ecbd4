from __future__ import annotations

import numpy as np
import pytest

import sceneforge.kernels as kernels
from sceneforge.kernels import pyref

BACKENDS = [pyref]
try:
    from sceneforge.kernels import _core

    BACKENDS.append(_core)
except ImportError:
    pass


@pytest.fixture(params=BACKENDS, ids=lambda b: b.__name__.rsplit(".", 1)[-1])
def backend(request):
    return request.param


class TestKdeDensity:
    def test_single_sample_peak(self, backend):
        h = np.array([0.3, 0.4, 0.2])
        samples = np.array([[0.0, 0.0, 0.0]])
        got = backend.kde_density(samples, h, np.array([[0.0, 0.0, 0.0]]))[0]
        wrap = sum(np.exp(-0.5 * (2 * np.pi * k / h[2]) ** 2) for k in range(-3, 4))
        expected = wrap / ((2 * np.pi) ** 1.5 * h[0] * h[1] * h[2])
        assert abs(got - expected) < 1e-12 * expected

    def test_nonnegative_and_symmetric(self, backend):
        rng = np.random.default_rng(0)
        samples = rng.normal(size=(20, 3))
        samples[:, 2] = rng.uniform(0, 2 * np.pi, 20)
        h = np.array([0.5, 0.5, 0.5])
        q = rng.normal(size=(50, 3))
        q[:, 2] = rng.uniform(0, 2 * np.pi, 50)
        d = backend.kde_density(samples, h, q)
        assert np.all(d >= 0)
        mirrored = samples.copy()
        mirrored[:, 0] *= -1
        qm = q.copy()
        qm[:, 0] *= -1
        dm = backend.kde_density(mirrored, h, qm)
        assert np.allclose(d, dm, rtol=1e-12)

    def test_theta_wraps(self, backend):
        # samples near 0 give the same density at theta just below 2*pi
        samples = np.array([[0.0, 0.0, 0.05]])
        h = np.array([1.0, 1.0, 0.3])
        d_lo = backend.kde_density(samples, h, np.array([[0.0, 0.0, 0.1]]))[0]
        d_hi = backend.kde_density(samples, h, np.array([[0.0, 0.0, 0.1 - 2 * np.pi]]))[0]
        assert abs(d_lo - d_hi) < 1e-12 * d_lo


class TestBoxesOverlap:
    A = np.array([0.0, 0.0, 0.0, 0.5, 0.5, 0.5, 0.0])

    def test_identical(self, backend):
        assert backend.boxes_overlap(self.A, self.A, 0.005)

    def test_face_contact(self, backend):
        b = self.A.copy()
        b[0] = 1.0
        assert not backend.boxes_overlap(self.A, b, 0.005)

    def test_rotated_near_miss(self, backend):
        # diagonal box corner approaches but does not enter
        b = np.array([1.2, 1.2, 0.0, 0.5, 0.5, 0.5, np.pi / 4])
        assert not backend.boxes_overlap(self.A, b, 0.005)
        c = np.array([0.9, 0.0, 0.0, 0.5, 0.5, 0.5, np.pi / 4])
        assert backend.boxes_overlap(self.A, c, 0.005)

    def test_z_separation(self, backend):
        b = self.A.copy()
        b[2] = 1.5
        assert not backend.boxes_overlap(self.A, b, 0.005)


class TestRectOutside:
    def test_centered(self, backend):
        f = backend.rect_outside_fraction(np.zeros(2), np.array([0.5, 0.5]), 0.0, np.array([1.0, 1.0]))
        assert f == 0.0

    def test_half_off(self, backend):
        f = backend.rect_outside_fraction(np.array([1.0, 0.0]), np.array([0.4, 0.4]), 0.0, np.array([1.0, 1.0]))
        assert abs(f - 0.5) < 1e-12

    def test_rotated_diamond(self, backend):
        # unit square rotated 45 deg inside a big surface stays inside
        f = backend.rect_outside_fraction(np.zeros(2), np.array([0.5, 0.5]), np.pi / 4, np.array([2.0, 2.0]))
        assert f == 0.0


class TestSegmentBoxHits:
    BOX = np.array([0.0, 0.0, 0.0, 0.5, 0.5, 0.5, 0.0])

    def seg(self, a, b):
        return np.asarray(a, dtype=float), np.asarray(b, dtype=float)

    def test_through_center(self, backend):
        p0, p1 = self.seg([-2, 0, 0], [2, 0, 0])
        assert backend.segment_box_hits(p0, p1, self.BOX)

    def test_clear_miss(self, backend):
        p0, p1 = self.seg([-2, 2, 0], [2, 2, 0])
        assert not backend.segment_box_hits(p0, p1, self.BOX)

    def test_stops_short_of_the_box(self, backend):
        p0, p1 = self.seg([-2, 0, 0], [-1, 0, 0])
        assert not backend.segment_box_hits(p0, p1, self.BOX)

    def test_starts_past_the_box(self, backend):
        p0, p1 = self.seg([1, 0, 0], [2, 0, 0])
        assert not backend.segment_box_hits(p0, p1, self.BOX)

    def test_grazing_a_face_is_not_a_hit(self, backend):
        # sliding along the face plane has no interior span
        p0, p1 = self.seg([-2, 0.5, 0], [2, 0.5, 0])
        assert not backend.segment_box_hits(p0, p1, self.BOX)

    def test_endpoint_inside_hits(self, backend):
        p0, p1 = self.seg([0, 0, 0], [3, 0, 0])
        assert backend.segment_box_hits(p0, p1, self.BOX)

    def test_rotated_thin_wall(self, backend):
        wall = np.array([0.0, 0.0, 0.0, 0.5, 0.05, 0.5, np.pi / 4])
        p0, p1 = self.seg([-1, 1, 0], [1, -1, 0])  # crosses the diagonal
        assert backend.segment_box_hits(p0, p1, wall)
        p0, p1 = self.seg([1.0, 1.0, 0], [2.0, 2.0, 0])  # parallel, outside
        assert not backend.segment_box_hits(p0, p1, wall)

    def test_vertical_drop(self, backend):
        p0, p1 = self.seg([0.2, -0.2, 3], [0.2, -0.2, -3])
        assert backend.segment_box_hits(p0, p1, self.BOX)


@pytest.mark.skipif(len(BACKENDS) < 2, reason="compiled kernels not built")
class TestBackendEquivalence:
    def test_kde_matches(self):
        rng = np.random.default_rng(7)
        samples = rng.normal(size=(40, 3))
        samples[:, 2] = rng.uniform(0, 2 * np.pi, 40)
        h = np.array([0.23, 0.31, 0.17])
        q = rng.normal(size=(500, 3))
        q[:, 2] = rng.uniform(0, 2 * np.pi, 500)
        a = BACKENDS[0].kde_density(samples, h, q)
        b = BACKENDS[1].kde_density(samples, h, q)
        assert np.allclose(a, b, rtol=1e-12, atol=0)

    def test_overlap_matches(self):
        rng = np.random.default_rng(11)
        for _ in range(300):
            a = np.concatenate([rng.uniform(-1, 1, 3), rng.uniform(0.1, 1, 3), [rng.uniform(0, 6.3)]])
            b = np.concatenate([rng.uniform(-1, 1, 3), rng.uniform(0.1, 1, 3), [rng.uniform(0, 6.3)]])
            assert BACKENDS[0].boxes_overlap(a, b, 0.005) == BACKENDS[1].boxes_overlap(a, b, 0.005)

    def test_rect_outside_matches(self):
        rng = np.random.default_rng(13)
        for _ in range(300):
            c = rng.uniform(-2, 2, 2)
            h = rng.uniform(0.05, 1.0, 2)
            ang = rng.uniform(0, 2 * np.pi)
            s = rng.uniform(0.2, 1.5, 2)
            a = BACKENDS[0].rect_outside_fraction(c, h, ang, s)
            b = BACKENDS[1].rect_outside_fraction(c, h, ang, s)
            assert abs(a - b) < 1e-12

    def test_segment_hits_match(self):
        rng = np.random.default_rng(17)
        for _ in range(500):
            p0 = rng.uniform(-2, 2, 3)
            p1 = rng.uniform(-2, 2, 3)
            box = np.concatenate(
                [rng.uniform(-1, 1, 3), rng.uniform(0.1, 1, 3), [rng.uniform(0, 6.3)]]
            )
            assert BACKENDS[0].segment_box_hits(p0, p1, box) == BACKENDS[1].segment_box_hits(p0, p1, box)


def test_selected_backend_exposed():
    assert kernels.BACKEND in ("python", "compiled")
    assert callable(kernels.kde_density)
