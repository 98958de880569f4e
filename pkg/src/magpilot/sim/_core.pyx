# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled simulator kernels.

Twin of ``_pure.py``: every arithmetic step happens in the same order on the
same IEEE doubles, so the two backends produce bit-identical trajectories.
Keep the implementations in lockstep when editing either one.
"""

from libc.math cimport sqrt, pow, INFINITY

import numpy as np
cimport numpy as cnp

cnp.import_array()

BACKEND = "compiled"


cdef inline double _clampd(double v, double lo, double hi) nogil:
    if v < lo:
        return lo
    if v > hi:
        return hi
    return v


cdef void _nearest(const double* xs, const double* ys, Py_ssize_t n,
                   double px, double py,
                   double* ocx, double* ocy, double* otx, double* oty,
                   double* odist, Py_ssize_t* oseg) nogil:
    cdef double best_d2 = INFINITY
    cdef double bcx = 0.0, bcy = 0.0, btx = 1.0, bty = 0.0
    cdef Py_ssize_t bseg = 0
    cdef Py_ssize_t i
    cdef double ax, ay, bx, by, ex, ey, seg_len2, t, cx, cy, dx, dy, d2, seg_len
    for i in range(n - 1):
        ax = xs[i]
        ay = ys[i]
        bx = xs[i + 1]
        by = ys[i + 1]
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
            seg_len = sqrt(seg_len2)
            bcx = cx
            bcy = cy
            btx = ex / seg_len
            bty = ey / seg_len
            bseg = i
    ocx[0] = bcx
    ocy[0] = bcy
    otx[0] = btx
    oty[0] = bty
    odist[0] = sqrt(best_d2)
    oseg[0] = bseg


def nearest_on_polyline(cnp.ndarray[cnp.float64_t, ndim=1] xs,
                        cnp.ndarray[cnp.float64_t, ndim=1] ys,
                        double px, double py):
    cdef double cx, cy, tx, ty, dist
    cdef Py_ssize_t seg
    _nearest(<const double*> xs.data, <const double*> ys.data, xs.shape[0],
             px, py, &cx, &cy, &tx, &ty, &dist, &seg)
    return cx, cy, tx, ty, dist, seg


cdef int _force(double xl, double yl, double xr, double yr,
                double bx, double by, double c, double q, double eps_d,
                double* ofx, double* ofy) nogil:
    cdef double fx = 0.0, fy = 0.0
    cdef int saturated = 0
    cdef double mx, my, dx, dy, d, mag
    cdef int k
    for k in range(2):
        if k == 0:
            mx = xl
            my = yl
        else:
            mx = xr
            my = yr
        dx = mx - bx
        dy = my - by
        d = sqrt(dx * dx + dy * dy)
        if d < eps_d:
            saturated = 1
            if d == 0.0:
                continue
            mag = c / pow(eps_d, q)
        else:
            mag = c / pow(d, q)
        fx += mag * (dx / d)
        fy += mag * (dy / d)
    ofx[0] = fx
    ofy[0] = fy
    return saturated


def magnet_force(double xl, double yl, double xr, double yr,
                 double bx, double by, double c, double q, double eps_d):
    cdef double fx, fy
    cdef int saturated = _force(xl, yl, xr, yr, bx, by, c, q, eps_d, &fx, &fy)
    return fx, fy, saturated


def sim_step(double xl, double yl, double xr, double yr,
             double bx, double by, double cgx, double cgy, int attached,
             double axl, double ayl, double axr, double ayr,
             cnp.ndarray[cnp.float64_t, ndim=1] poly_xs,
             cnp.ndarray[cnp.float64_t, ndim=1] poly_ys,
             double half_width, double width, double height,
             double dt, double c, double q, double mu, double max_arm_delta,
             double attach_radius, double slip_threshold, double eps_d):
    cdef const double* pxs = <const double*> poly_xs.data
    cdef const double* pys = <const double*> poly_ys.data
    cdef Py_ssize_t n = poly_xs.shape[0]
    cdef double fx, fy, nbx, nby, cx, cy, tx, ty, dist
    cdef Py_ssize_t seg
    cdef int saturated, slipped = 0
    cdef double ddx, ddy, bead_disp, dx, dy, d, ux, uy, sx, sy, sdist
    cdef double ncx, ncy, rx, ry, rd, wx, wy, wdist

    xl = _clampd(xl + _clampd(axl, -max_arm_delta, max_arm_delta), 0.0, width)
    yl = _clampd(yl + _clampd(ayl, -max_arm_delta, max_arm_delta), 0.0, height)
    xr = _clampd(xr + _clampd(axr, -max_arm_delta, max_arm_delta), 0.0, width)
    yr = _clampd(yr + _clampd(ayr, -max_arm_delta, max_arm_delta), 0.0, height)

    saturated = _force(xl, yl, xr, yr, bx, by, c, q, eps_d, &fx, &fy)
    nbx = bx + mu * fx * dt
    nby = by + mu * fy * dt
    _nearest(pxs, pys, n, nbx, nby, &cx, &cy, &tx, &ty, &dist, &seg)
    if dist > half_width:
        nbx = cx + (nbx - cx) / dist * half_width
        nby = cy + (nby - cy) / dist * half_width
    ddx = nbx - bx
    ddy = nby - by
    bead_disp = sqrt(ddx * ddx + ddy * ddy)

    if attached == 0:
        dx = cgx - nbx
        dy = cgy - nby
        d = sqrt(dx * dx + dy * dy)
        if d <= attach_radius:
            if d == 0.0:
                ux = 1.0
                uy = 0.0
            else:
                ux = dx / d
                uy = dy / d
            sx = nbx + ux * attach_radius
            sy = nby + uy * attach_radius
            _nearest(pxs, pys, n, sx, sy, &cx, &cy, &tx, &ty, &sdist, &seg)
            if sdist <= half_width:
                attached = 1
                cgx = sx
                cgy = sy
    else:
        if bead_disp > slip_threshold:
            attached = 0
            slipped = 1
        else:
            ncx = cgx + ddx
            ncy = cgy + ddy
            rx = ncx - nbx
            ry = ncy - nby
            rd = sqrt(rx * rx + ry * ry)
            if rd > 0.0:
                ncx = nbx + rx / rd * attach_radius
                ncy = nby + ry / rd * attach_radius
            _nearest(pxs, pys, n, ncx, ncy, &wx, &wy, &tx, &ty, &wdist, &seg)
            if wdist <= half_width:
                cgx = ncx
                cgy = ncy
            else:
                attached = 0
                slipped = 1
                cgx = wx + (ncx - wx) / wdist * half_width
                cgy = wy + (ncy - wy) / wdist * half_width

    return (xl, yl, xr, yr, nbx, nby, cgx, cgy, attached, saturated, slipped,
            bead_disp)


def rasterize_points(cnp.ndarray[cnp.float64_t, ndim=3] grid,
                     double width, double height,
                     double bx, double by, double cgx, double cgy,
                     double xl, double yl, double xr, double yr):
    cdef Py_ssize_t n = grid.shape[1]
    cdef double sx = n / width
    cdef double sy = n / height
    cdef Py_ssize_t col, row
    cdef int k
    cdef double px, py
    cdef Py_ssize_t ch
    for k in range(4):
        if k == 0:
            ch = 1
            px = bx
            py = by
        elif k == 1:
            ch = 2
            px = cgx
            py = cgy
        elif k == 2:
            ch = 3
            px = xl
            py = yl
        else:
            ch = 3
            px = xr
            py = yr
        col = <Py_ssize_t> (px * sx)
        row = <Py_ssize_t> (py * sy)
        if col < 0:
            col = 0
        elif col > n - 1:
            col = n - 1
        if row < 0:
            row = 0
        elif row > n - 1:
            row = n - 1
        grid[ch, row, col] = 1.0
