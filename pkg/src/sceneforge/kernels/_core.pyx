# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled twins of the hot kernels.

Same formulas and branch structure as ``pyref``; any change here must be
mirrored there (the test suite cross-checks the two backends).
"""

from libc.math cimport cos, exp, fabs, fmax, sin, sqrt

import numpy as np

cdef double PI = 3.141592653589793
cdef double C_SQRT_2PI = sqrt(2.0 * PI)
cdef double C_TWO_PI = 2.0 * PI

SQRT_2PI = C_SQRT_2PI
TWO_PI = C_TWO_PI
KDE_WRAPS = 3


def kde_density(samples, bandwidth, queries):
    """Product-kernel density at each query point.

    Gaussian kernels in x and y, wrapped Gaussian (images at +-2*pi*k,
    |k| <= KDE_WRAPS) in theta.
    """
    s_arr = np.ascontiguousarray(samples, dtype=np.float64)
    q_arr = np.ascontiguousarray(queries, dtype=np.float64)
    cdef double hx = float(bandwidth[0])
    cdef double hy = float(bandwidth[1])
    cdef double ht = float(bandwidth[2])
    out = np.empty(len(q_arr), dtype=np.float64)
    cdef double[:, ::1] s = s_arr
    cdef double[:, ::1] q = q_arr
    cdef double[::1] o = out
    cdef Py_ssize_t n = s.shape[0], m = q.shape[0], i, j
    cdef int k
    cdef double dx, dy, dt, g, gt, z, acc
    with nogil:
        for i in range(m):
            acc = 0.0
            for j in range(n):
                dx = (q[i, 0] - s[j, 0]) / hx
                dy = (q[i, 1] - s[j, 1]) / hy
                g = exp(-0.5 * (dx * dx + dy * dy)) / (hx * C_SQRT_2PI * hy * C_SQRT_2PI)
                dt = q[i, 2] - s[j, 2]
                gt = 0.0
                for k in range(-3, 4):
                    z = (dt + C_TWO_PI * k) / ht
                    gt += exp(-0.5 * z * z)
                gt /= ht * C_SQRT_2PI
                acc += g * gt
            o[i] = acc / n
    return out


def boxes_overlap(a, b, double eps):
    """Separating-axis overlap test for two yaw-only oriented boxes.

    Each box is (cx, cy, cz, hx, hy, hz, yaw); both are shrunk by ``eps``
    per face so touching contact does not count.
    """
    a_arr = np.ascontiguousarray(a, dtype=np.float64)
    b_arr = np.ascontiguousarray(b, dtype=np.float64)
    cdef double[::1] av = a_arr
    cdef double[::1] bv = b_arr
    cdef double ha0 = fmax(av[3] - eps, 0.0)
    cdef double ha1 = fmax(av[4] - eps, 0.0)
    cdef double ha2 = fmax(av[5] - eps, 0.0)
    cdef double hb0 = fmax(bv[3] - eps, 0.0)
    cdef double hb1 = fmax(bv[4] - eps, 0.0)
    cdef double hb2 = fmax(bv[5] - eps, 0.0)
    if not (av[2] - ha2 < bv[2] + hb2 and bv[2] - hb2 < av[2] + ha2):
        return False
    cdef double ca = cos(av[6]), sa = sin(av[6])
    cdef double cb = cos(bv[6]), sb = sin(bv[6])
    cdef double d0 = bv[0] - av[0], d1 = bv[1] - av[1]
    cdef double[4][2] axes
    axes[0][0] = ca; axes[0][1] = sa
    axes[1][0] = -sa; axes[1][1] = ca
    axes[2][0] = cb; axes[2][1] = sb
    axes[3][0] = -sb; axes[3][1] = cb
    cdef int i
    cdef double x0, x1, ra, rb
    for i in range(4):
        x0 = axes[i][0]
        x1 = axes[i][1]
        ra = ha0 * fabs(x0 * ca + x1 * sa) + ha1 * fabs(x0 * (-sa) + x1 * ca)
        rb = hb0 * fabs(x0 * cb + x1 * sb) + hb1 * fabs(x0 * (-sb) + x1 * cb)
        if fabs(x0 * d0 + x1 * d1) >= ra + rb:
            return False
    return True


def segment_box_hits(p0, p1, box):
    """True when the segment p0->p1 passes through the box interior.

    Slab test in the box frame; grazing a face or corner exactly does not
    count, so tangent rays are not treated as blocked.
    """
    p0_arr = np.ascontiguousarray(p0, dtype=np.float64)
    p1_arr = np.ascontiguousarray(p1, dtype=np.float64)
    b_arr = np.ascontiguousarray(box, dtype=np.float64)
    cdef double[::1] u = p0_arr
    cdef double[::1] v = p1_arr
    cdef double[::1] b = b_arr
    cdef double c = cos(b[6]), s = sin(b[6])
    cdef double e0 = u[0] - b[0], e1 = u[1] - b[1], e2 = u[2] - b[2]
    cdef double f0 = v[0] - b[0], f1 = v[1] - b[1], f2 = v[2] - b[2]
    cdef double[3] a0
    cdef double[3] a1
    a0[0] = c * e0 + s * e1; a0[1] = -s * e0 + c * e1; a0[2] = e2
    a1[0] = c * f0 + s * f1; a1[1] = -s * f0 + c * f1; a1[2] = f2
    cdef double tmin = 0.0, tmax = 1.0
    cdef double delta, lo, hi, t0, t1, tmp
    cdef int ax
    for ax in range(3):
        delta = a1[ax] - a0[ax]
        lo = -b[3 + ax]
        hi = b[3 + ax]
        if fabs(delta) < 1e-12:
            if not (lo < a0[ax] and a0[ax] < hi):
                return False
            continue
        t0 = (lo - a0[ax]) / delta
        t1 = (hi - a0[ax]) / delta
        if t0 > t1:
            tmp = t0; t0 = t1; t1 = tmp
        if t0 > tmin:
            tmin = t0
        if t1 < tmax:
            tmax = t1
        if tmin >= tmax:
            return False
    return tmax - tmin > 1e-9


def rect_outside_fraction(center, half, double angle, surf_half):
    """Fraction of a rotated rect's area outside an axis-aligned rect.

    Sutherland-Hodgman clipping of the footprint against the four
    half-planes of [-su, su] x [-sv, sv].
    """
    cdef double cx = float(center[0]), cy = float(center[1])
    cdef double a = float(half[0]), bh = float(half[1])
    cdef double su = float(surf_half[0]), sv = float(surf_half[1])
    cdef double area = 4.0 * a * bh
    if area <= 0.0:
        raise ValueError("zero-area footprint")
    cdef double c = cos(angle), s = sin(angle)
    cdef double[16][2] poly
    cdef double[16][2] clipped
    cdef int n = 4, m, i, j, plane
    poly[0][0] = cx + c * a - s * bh; poly[0][1] = cy + s * a + c * bh
    poly[1][0] = cx - c * a - s * bh; poly[1][1] = cy - s * a + c * bh
    poly[2][0] = cx - c * a + s * bh; poly[2][1] = cy - s * a - c * bh
    poly[3][0] = cx + c * a + s * bh; poly[3][1] = cy + s * a - c * bh
    cdef double[4][3] planes  # nx, ny, offset
    planes[0][0] = 1.0;  planes[0][1] = 0.0;  planes[0][2] = su
    planes[1][0] = -1.0; planes[1][1] = 0.0;  planes[1][2] = su
    planes[2][0] = 0.0;  planes[2][1] = 1.0;  planes[2][2] = sv
    planes[3][0] = 0.0;  planes[3][1] = -1.0; planes[3][2] = sv
    cdef double nx, ny, off, px0, py0, px1, py1, dd0, dd1, t
    for plane in range(4):
        if n == 0:
            break
        nx = planes[plane][0]; ny = planes[plane][1]; off = planes[plane][2]
        m = 0
        for i in range(n):
            j = i + 1 if i + 1 < n else 0
            px0 = poly[i][0]; py0 = poly[i][1]
            px1 = poly[j][0]; py1 = poly[j][1]
            dd0 = nx * px0 + ny * py0 - off
            dd1 = nx * px1 + ny * py1 - off
            if dd0 <= 0.0:
                clipped[m][0] = px0; clipped[m][1] = py0; m += 1
                if dd1 > 0.0:
                    t = dd0 / (dd0 - dd1)
                    clipped[m][0] = px0 + t * (px1 - px0)
                    clipped[m][1] = py0 + t * (py1 - py0)
                    m += 1
            elif dd1 <= 0.0:
                t = dd0 / (dd0 - dd1)
                clipped[m][0] = px0 + t * (px1 - px0)
                clipped[m][1] = py0 + t * (py1 - py0)
                m += 1
        for i in range(m):
            poly[i][0] = clipped[i][0]
            poly[i][1] = clipped[i][1]
        n = m
    cdef double inside = 0.0
    for i in range(n):
        j = i + 1 if i + 1 < n else 0
        inside += poly[i][0] * poly[j][1] - poly[j][0] * poly[i][1]
    inside = 0.5 * fabs(inside)
    cdef double frac = 1.0 - inside / area
    if frac < 1e-12:
        return 0.0
    if frac > 1.0 - 1e-12:
        return 1.0
    return frac
