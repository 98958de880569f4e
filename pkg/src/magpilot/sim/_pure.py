"""Pure-Python simulator kernels.

Fallback twin of the compiled extension in ``_core.pyx``. Both backends must
perform the same floating-point operations in the same order so trajectories
are bit-identical regardless of which one is loaded (see
tests/test_kernel_parity.py).
"""

import math

BACKEND = "pure"


def nearest_on_polyline(xs, ys, px, py):
    """Closest point on a polyline to (px, py).

    Returns (cx, cy, tx, ty, dist, seg) where (tx, ty) is the unit tangent of
    the winning segment and seg its index. Ties keep the first segment.
    """
    n = len(xs)
    best_d2 = math.inf
    best = (0.0, 0.0, 1.0, 0.0, 0)
    for i in range(n - 1):
        ax = float(xs[i])
        ay = float(ys[i])
        bx = float(xs[i + 1])
        by = float(ys[i + 1])
        ex = bx - ax
        ey = by - ay
        seg_len2 = ex * ex + ey * ey
        t = ((px - ax) * ex + (py - ay) * ey) / seg_len2
        if t < 0.0:
            t = 0.0
        elif t > 1.0:
            t = 1.0
        cx = ax + t * ex
        cy = ay + t * ey
        dx = px - cx
        dy = py - cy
        d2 = dx * dx + dy * dy
        if d2 < best_d2:
            best_d2 = d2
            seg_len = math.sqrt(seg_len2)
            best = (cx, cy, ex / seg_len, ey / seg_len, i)
    cx, cy, tx, ty, seg = best
    return cx, cy, tx, ty, math.sqrt(best_d2), seg


def magnet_force(xl, yl, xr, yr, bx, by, c, q, eps_d):
    """Net attraction on the bead from two point magnets.

    Each magnet contributes magnitude c/d**q pointing from the bead toward
    the magnet. Distances below eps_d are clamped to eps_d (saturation); a
    magnet exactly on the bead contributes nothing.
    """
    fx = 0.0
    fy = 0.0
    saturated = 0
    for mx, my in ((xl, yl), (xr, yr)):
        dx = mx - bx
        dy = my - by
        d = math.sqrt(dx * dx + dy * dy)
        if d < eps_d:
            saturated = 1
            if d == 0.0:
                continue
            mag = c / math.pow(eps_d, q)
        else:
            mag = c / math.pow(d, q)
        fx += mag * (dx / d)
        fy += mag * (dy / d)
    return fx, fy, saturated


def _clamp(v, lo, hi):
    if v < lo:
        return lo
    if v > hi:
        return hi
    return v


def sim_step(xl, yl, xr, yr, bx, by, cgx, cgy, attached,
             axl, ayl, axr, ayr,
             poly_xs, poly_ys, half_width, width, height,
             dt, c, q, mu, max_arm_delta, attach_radius, slip_threshold,
             eps_d):
    """One 10 Hz tick: arms, bead, attachment bookkeeping.

    Returns (xl, yl, xr, yr, bx, by, cgx, cgy, attached, saturated, slipped,
    bead_disp). Order of effects: clip+apply arm deltas, bead advection from
    the new magnet positions with wall sliding, then attach / rigid-follow /
    slip resolution for the cargo.
    """
    xl = _clamp(xl + _clamp(axl, -max_arm_delta, max_arm_delta), 0.0, width)
    yl = _clamp(yl + _clamp(ayl, -max_arm_delta, max_arm_delta), 0.0, height)
    xr = _clamp(xr + _clamp(axr, -max_arm_delta, max_arm_delta), 0.0, width)
    yr = _clamp(yr + _clamp(ayr, -max_arm_delta, max_arm_delta), 0.0, height)

    fx, fy, saturated = magnet_force(xl, yl, xr, yr, bx, by, c, q, eps_d)
    nbx = bx + mu * fx * dt
    nby = by + mu * fy * dt
    cx, cy, _tx, _ty, dist, _seg = nearest_on_polyline(poly_xs, poly_ys, nbx, nby)
    if dist > half_width:
        # slide: pull the violating endpoint radially back onto the wall
        nbx = cx + (nbx - cx) / dist * half_width
        nby = cy + (nby - cy) / dist * half_width
    ddx = nbx - bx
    ddy = nby - by
    bead_disp = math.sqrt(ddx * ddx + ddy * ddy)

    slipped = 0
    if attached == 0:
        dx = cgx - nbx
        dy = cgy - nby
        d = math.sqrt(dx * dx + dy * dy)
        if d <= attach_radius:
            if d == 0.0:
                ux, uy = 1.0, 0.0
            else:
                ux, uy = dx / d, dy / d
            sx = nbx + ux * attach_radius
            sy = nby + uy * attach_radius
            _, _, _, _, sdist, _ = nearest_on_polyline(poly_xs, poly_ys, sx, sy)
            if sdist <= half_width:
                attached = 1
                cgx, cgy = sx, sy
    else:
        if bead_disp > slip_threshold:
            attached = 0
            slipped = 1
        else:
            ncx = cgx + ddx
            ncy = cgy + ddy
            rx = ncx - nbx
            ry = ncy - nby
            rd = math.sqrt(rx * rx + ry * ry)
            if rd > 0.0:
                # renormalize so the grasp offset never drifts
                ncx = nbx + rx / rd * attach_radius
                ncy = nby + ry / rd * attach_radius
            wx, wy, _, _, wdist, _ = nearest_on_polyline(poly_xs, poly_ys, ncx, ncy)
            if wdist <= half_width:
                cgx, cgy = ncx, ncy
            else:
                # cargo scraped off at the wall
                attached = 0
                slipped = 1
                cgx = wx + (ncx - wx) / wdist * half_width
                cgy = wy + (ncy - wy) / wdist * half_width

    return (xl, yl, xr, yr, nbx, nby, cgx, cgy, attached, saturated, slipped,
            bead_disp)


def rasterize_points(grid, width, height, bx, by, cgx, cgy, xl, yl, xr, yr):
    """Scatter bead/cargo/arm markers into channels 1..3 of a (4, n, n) grid.

    Channel 0 (walls) is left untouched; callers fill it from the cached
    workspace raster. Marker intensity is exactly 1.0 in the containing cell.
    """
    n = grid.shape[1]
    sx = n / width
    sy = n / height
    for ch, px, py in ((1, bx, by), (2, cgx, cgy), (3, xl, yl), (3, xr, yr)):
        col = int(px * sx)
        row = int(py * sy)
        if col < 0:
            col = 0
        elif col > n - 1:
            col = n - 1
        if row < 0:
            row = 0
        elif row > n - 1:
            row = n - 1
        grid[ch, row, col] = 1.0
