"""Z-buffer triangle rasterization kernel (compiled with numba).

Camera space is x-right, y-down, z-forward; a pixel (row r, col c) samples the
scene at screen point (c + 0.5, r + 0.5). Coverage uses watertight edge
functions with a top-left tie rule so results are deterministic; depth is
interpolated perspective-correctly (1/z is affine in screen space).
"""

from __future__ import annotations

import numpy as np
from numba import njit

NEAR_CLIP = 1e-6  # camera-space z below this is behind the eye


@njit(cache=True, nogil=True, fastmath=False)
def _orient2d(ax, ay, bx, by, cx, cy):
    return (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)


@njit(cache=True, nogil=True, fastmath=False)
def _top_left(ex, ey):
    # y grows downward; for positively oriented triangles an edge is "top"
    # when horizontal and pointing right, "left" when pointing up.
    return ey < 0.0 or (ey == 0.0 and ex > 0.0)


@njit(cache=True, nogil=True, fastmath=False)
def _raster_tri(zbuf, x0, y0, z0, x1, y1, z1, x2, y2, z2,
                focal, cx, cy, width, height):
    # project to screen; callers guarantee z > NEAR_CLIP
    u0 = cx + focal * x0 / z0
    v0 = cy + focal * y0 / z0
    u1 = cx + focal * x1 / z1
    v1 = cy + focal * y1 / z1
    u2 = cx + focal * x2 / z2
    v2 = cy + focal * y2 / z2

    area = _orient2d(u0, v0, u1, v1, u2, v2)
    if area == 0.0:
        return
    if area < 0.0:  # normalize winding; depth rendering is two-sided
        u1, u2 = u2, u1
        v1, v2 = v2, v1
        z1, z2 = z2, z1
        area = -area

    inv0 = 1.0 / z0
    inv1 = 1.0 / z1
    inv2 = 1.0 / z2

    min_u = min(u0, min(u1, u2))
    max_u = max(u0, max(u1, u2))
    min_v = min(v0, min(v1, v2))
    max_v = max(v0, max(v1, v2))
    px0 = max(0, int(np.ceil(min_u - 0.5)))
    px1 = min(width - 1, int(np.floor(max_u - 0.5)))
    py0 = max(0, int(np.ceil(min_v - 0.5)))
    py1 = min(height - 1, int(np.floor(max_v - 0.5)))
    if px0 > px1 or py0 > py1:
        return

    tl0 = _top_left(u2 - u1, v2 - v1)
    tl1 = _top_left(u0 - u2, v0 - v2)
    tl2 = _top_left(u1 - u0, v1 - v0)

    for py in range(py0, py1 + 1):
        sy = py + 0.5
        for px in range(px0, px1 + 1):
            sx = px + 0.5
            w0 = _orient2d(u1, v1, u2, v2, sx, sy)
            w1 = _orient2d(u2, v2, u0, v0, sx, sy)
            w2 = _orient2d(u0, v0, u1, v1, sx, sy)
            if w0 < 0.0 or w1 < 0.0 or w2 < 0.0:
                continue
            if (w0 == 0.0 and not tl0) or (w1 == 0.0 and not tl1) \
                    or (w2 == 0.0 and not tl2):
                continue
            inv_z = (w0 * inv0 + w1 * inv1 + w2 * inv2) / area
            z = 1.0 / inv_z
            if z < zbuf[py, px]:
                zbuf[py, px] = z


@njit(cache=True, nogil=True, fastmath=False)
def rasterize(verts_cam, tris, focal, cx, cy, width, height):
    """Render camera-space triangles into a z-buffer of nearest depths.

    Returns an (height, width) float64 buffer holding the nearest camera-space
    z per pixel, np.inf where nothing was hit. Triangles crossing the near
    plane are clipped against z = NEAR_CLIP before projection.
    """
    zbuf = np.full((height, width), np.inf)
    poly_x = np.empty(4)
    poly_y = np.empty(4)
    poly_z = np.empty(4)
    for t in range(tris.shape[0]):
        ia, ib, ic = tris[t, 0], tris[t, 1], tris[t, 2]
        n = 0
        # Sutherland-Hodgman against the near plane
        for k in range(3):
            if k == 0:
                i, j = ia, ib
            elif k == 1:
                i, j = ib, ic
            else:
                i, j = ic, ia
            zi = verts_cam[i, 2]
            zj = verts_cam[j, 2]
            in_i = zi > NEAR_CLIP
            in_j = zj > NEAR_CLIP
            if in_i:
                poly_x[n] = verts_cam[i, 0]
                poly_y[n] = verts_cam[i, 1]
                poly_z[n] = zi
                n += 1
            if in_i != in_j:
                s = (NEAR_CLIP - zi) / (zj - zi)
                poly_x[n] = verts_cam[i, 0] + s * (verts_cam[j, 0] - verts_cam[i, 0])
                poly_y[n] = verts_cam[i, 1] + s * (verts_cam[j, 1] - verts_cam[i, 1])
                poly_z[n] = NEAR_CLIP
                n += 1
        if n < 3:
            continue
        for k in range(1, n - 1):
            _raster_tri(zbuf,
                        poly_x[0], poly_y[0], poly_z[0],
                        poly_x[k], poly_y[k], poly_z[k],
                        poly_x[k + 1], poly_y[k + 1], poly_z[k + 1],
                        focal, cx, cy, width, height)
    return zbuf
