"""Pure-NumPy reference implementations of the hot kernels.

Mirrors ``_core.pyx`` exactly; selected at import time when the compiled
extension is unavailable (see ``kernels.__init__``).
"""

from __future__ import annotations

import numpy as np

SQRT_2PI = float(np.sqrt(2.0 * np.pi))
TWO_PI = 2.0 * np.pi
KDE_WRAPS = 3  # wrapped-Gaussian images at +-2*pi*k, k in [-3, 3]

_CHUNK = 1 << 15  # query rows per broadcast block, bounds peak memory


def kde_density(samples: np.ndarray, bandwidth: np.ndarray, queries: np.ndarray) -> np.ndarray:
    """Product-kernel density at each query point.

    Gaussian kernels in x and y, wrapped Gaussian (images at +-2*pi*k,
    |k| <= KDE_WRAPS) in theta.  ``samples`` is (n, 3), ``queries`` (m, 3);
    returns (m,) densities.
    """
    s = np.ascontiguousarray(samples, dtype=np.float64)
    q = np.ascontiguousarray(queries, dtype=np.float64)
    hx, hy, ht = (float(b) for b in bandwidth)
    out = np.empty(len(q), dtype=np.float64)
    for lo in range(0, len(q), _CHUNK):
        hi = min(lo + _CHUNK, len(q))
        dx = (q[lo:hi, None, 0] - s[None, :, 0]) / hx
        dy = (q[lo:hi, None, 1] - s[None, :, 1]) / hy
        g = np.exp(-0.5 * (dx * dx + dy * dy)) / (hx * SQRT_2PI * hy * SQRT_2PI)
        dt = q[lo:hi, None, 2] - s[None, :, 2]
        gt = np.zeros_like(dt)
        for k in range(-KDE_WRAPS, KDE_WRAPS + 1):
            z = (dt + TWO_PI * k) / ht
            gt += np.exp(-0.5 * z * z)
        gt /= ht * SQRT_2PI
        out[lo:hi] = (g * gt).mean(axis=1)
    return out


def _interval_overlaps(min_a: float, max_a: float, min_b: float, max_b: float) -> bool:
    return min_a < max_b and min_b < max_a


def boxes_overlap(a: np.ndarray, b: np.ndarray, eps: float) -> bool:
    """Separating-axis overlap test for two yaw-only oriented boxes.

    Each box is (cx, cy, cz, hx, hy, hz, yaw) with scale already applied.
    Both boxes are shrunk by ``eps`` per face, so touching contact does not
    count as overlap.  Yaw-only orientation reduces the test to 2D SAT in
    the horizontal plane plus a z-interval check.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    ha = np.maximum(a[3:6] - eps, 0.0)
    hb = np.maximum(b[3:6] - eps, 0.0)
    if not _interval_overlaps(a[2] - ha[2], a[2] + ha[2], b[2] - hb[2], b[2] + hb[2]):
        return False
    ca, sa = np.cos(a[6]), np.sin(a[6])
    cb, sb = np.cos(b[6]), np.sin(b[6])
    axes = np.array([[ca, sa], [-sa, ca], [cb, sb], [-sb, cb]])
    d = b[:2] - a[:2]
    ua = np.array([[ca, sa], [-sa, ca]])  # rows: box-a axes
    ub = np.array([[cb, sb], [-sb, cb]])
    for ax in axes:
        ra = ha[0] * abs(ax @ ua[0]) + ha[1] * abs(ax @ ua[1])
        rb = hb[0] * abs(ax @ ub[0]) + hb[1] * abs(ax @ ub[1])
        if abs(ax @ d) >= ra + rb:
            return False
    return True


def segment_box_hits(p0: np.ndarray, p1: np.ndarray, box: np.ndarray) -> bool:
    """True when the segment p0->p1 passes through the box interior.

    ``box`` is (cx, cy, cz, hx, hy, hz, yaw).  Slab test in the box frame;
    grazing a face or corner exactly does not count, so tangent rays are
    not treated as blocked.
    """
    b = np.asarray(box, dtype=np.float64)
    c, s = np.cos(b[6]), np.sin(b[6])
    d0 = np.asarray(p0, dtype=np.float64) - b[:3]
    d1 = np.asarray(p1, dtype=np.float64) - b[:3]
    a0 = np.array([c * d0[0] + s * d0[1], -s * d0[0] + c * d0[1], d0[2]])
    a1 = np.array([c * d1[0] + s * d1[1], -s * d1[0] + c * d1[1], d1[2]])
    tmin, tmax = 0.0, 1.0
    for ax in range(3):
        delta = a1[ax] - a0[ax]
        lo, hi = -b[3 + ax], b[3 + ax]
        if abs(delta) < 1e-12:
            if not lo < a0[ax] < hi:
                return False
            continue
        t0 = (lo - a0[ax]) / delta
        t1 = (hi - a0[ax]) / delta
        if t0 > t1:
            t0, t1 = t1, t0
        tmin = max(tmin, t0)
        tmax = min(tmax, t1)
        if tmin >= tmax:
            return False
    return tmax - tmin > 1e-9


def rect_outside_fraction(center: np.ndarray, half: np.ndarray, angle: float, surf_half: np.ndarray) -> float:
    """Fraction of a rotated rect's area outside an axis-aligned rect.

    The footprint rect has the given center, half-extents and rotation in
    the surface plane; the surface rect is [-su, su] x [-sv, sv] at the
    origin.  Computed by analytic polygon clipping (Sutherland-Hodgman
    against the four surface half-planes).
    """
    cx, cy = float(center[0]), float(center[1])
    a, b = float(half[0]), float(half[1])
    su, sv = float(surf_half[0]), float(surf_half[1])
    area = 4.0 * a * b
    if area <= 0.0:
        raise ValueError("zero-area footprint")
    c, s = np.cos(angle), np.sin(angle)
    corners = [
        (cx + c * a - s * b, cy + s * a + c * b),
        (cx - c * a - s * b, cy - s * a + c * b),
        (cx - c * a + s * b, cy - s * a - c * b),
        (cx + c * a + s * b, cy + s * a - c * b),
    ]
    # Clip against x <= su, x >= -su, y <= sv, y >= -sv in turn.
    for nx, ny, off in ((1.0, 0.0, su), (-1.0, 0.0, su), (0.0, 1.0, sv), (0.0, -1.0, sv)):
        if not corners:
            break
        clipped = []
        n = len(corners)
        for i in range(n):
            x0, y0 = corners[i]
            x1, y1 = corners[(i + 1) % n]
            d0 = nx * x0 + ny * y0 - off
            d1 = nx * x1 + ny * y1 - off
            if d0 <= 0.0:
                clipped.append((x0, y0))
                if d1 > 0.0:
                    t = d0 / (d0 - d1)
                    clipped.append((x0 + t * (x1 - x0), y0 + t * (y1 - y0)))
            elif d1 <= 0.0:
                t = d0 / (d0 - d1)
                clipped.append((x0 + t * (x1 - x0), y0 + t * (y1 - y0)))
        corners = clipped
    inside = 0.0
    n = len(corners)
    for i in range(n):
        x0, y0 = corners[i]
        x1, y1 = corners[(i + 1) % n]
        inside += x0 * y1 - x1 * y0
    inside = 0.5 * abs(inside)
    frac = 1.0 - inside / area
    if frac < 1e-12:
        return 0.0
    if frac > 1.0 - 1e-12:
        return 1.0
    return frac
