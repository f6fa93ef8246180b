# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled stencil kernels: edge-weighted Laplacian application and the
per-cell squared-gradient form, for 2D and 3D grids.  Mirrors fallback.py."""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def lap_apply_2d(double[:, ::1] u, double[:, ::1] Wx, double[:, ::1] Wy):
    cdef Py_ssize_t nx = u.shape[0], ny = u.shape[1]
    cdef Py_ssize_t i, j
    cdef double f
    out_arr = np.zeros((nx, ny))
    cdef double[:, ::1] out = out_arr
    for i in range(nx - 1):
        for j in range(ny):
            f = Wx[i, j] * (u[i + 1, j] - u[i, j])
            out[i, j] -= f
            out[i + 1, j] += f
    for i in range(nx):
        for j in range(ny - 1):
            f = Wy[i, j] * (u[i, j + 1] - u[i, j])
            out[i, j] -= f
            out[i, j + 1] += f
    return out_arr


def lap_apply_3d(double[:, :, ::1] u, double[:, :, ::1] Wx,
                 double[:, :, ::1] Wy, double[:, :, ::1] Wz):
    cdef Py_ssize_t nx = u.shape[0], ny = u.shape[1], nz = u.shape[2]
    cdef Py_ssize_t i, j, k
    cdef double f
    out_arr = np.zeros((nx, ny, nz))
    cdef double[:, :, ::1] out = out_arr
    for i in range(nx - 1):
        for j in range(ny):
            for k in range(nz):
                f = Wx[i, j, k] * (u[i + 1, j, k] - u[i, j, k])
                out[i, j, k] -= f
                out[i + 1, j, k] += f
    for i in range(nx):
        for j in range(ny - 1):
            for k in range(nz):
                f = Wy[i, j, k] * (u[i, j + 1, k] - u[i, j, k])
                out[i, j, k] -= f
                out[i, j + 1, k] += f
    for i in range(nx):
        for j in range(ny):
            for k in range(nz - 1):
                f = Wz[i, j, k] * (u[i, j, k + 1] - u[i, j, k])
                out[i, j, k] -= f
                out[i, j, k + 1] += f
    return out_arr


def cell_grad_sq_2d(double[:, ::1] u, double h):
    cdef Py_ssize_t nx = u.shape[0], ny = u.shape[1]
    cdef Py_ssize_t i, j
    cdef double inv_h2 = 1.0 / (h * h)
    cdef double dx0, dx1, dy0, dy1
    g_arr = np.empty((nx - 1, ny - 1))
    cdef double[:, ::1] g = g_arr
    for i in range(nx - 1):
        for j in range(ny - 1):
            dx0 = u[i + 1, j] - u[i, j]
            dx1 = u[i + 1, j + 1] - u[i, j + 1]
            dy0 = u[i, j + 1] - u[i, j]
            dy1 = u[i + 1, j + 1] - u[i + 1, j]
            g[i, j] = 0.5 * inv_h2 * (dx0 * dx0 + dx1 * dx1
                                      + dy0 * dy0 + dy1 * dy1)
    return g_arr


def cell_grad_sq_3d(double[:, :, ::1] u, double h):
    cdef Py_ssize_t nx = u.shape[0], ny = u.shape[1], nz = u.shape[2]
    cdef Py_ssize_t i, j, k
    cdef double inv_h2 = 1.0 / (h * h)
    cdef double d0, d1, d2, d3, acc
    g_arr = np.empty((nx - 1, ny - 1, nz - 1))
    cdef double[:, :, ::1] g = g_arr
    for i in range(nx - 1):
        for j in range(ny - 1):
            for k in range(nz - 1):
                d0 = u[i + 1, j, k] - u[i, j, k]
                d1 = u[i + 1, j + 1, k] - u[i, j + 1, k]
                d2 = u[i + 1, j, k + 1] - u[i, j, k + 1]
                d3 = u[i + 1, j + 1, k + 1] - u[i, j + 1, k + 1]
                acc = d0 * d0 + d1 * d1 + d2 * d2 + d3 * d3
                d0 = u[i, j + 1, k] - u[i, j, k]
                d1 = u[i + 1, j + 1, k] - u[i + 1, j, k]
                d2 = u[i, j + 1, k + 1] - u[i, j, k + 1]
                d3 = u[i + 1, j + 1, k + 1] - u[i + 1, j, k + 1]
                acc += d0 * d0 + d1 * d1 + d2 * d2 + d3 * d3
                d0 = u[i, j, k + 1] - u[i, j, k]
                d1 = u[i + 1, j, k + 1] - u[i + 1, j, k]
                d2 = u[i, j + 1, k + 1] - u[i, j + 1, k]
                d3 = u[i + 1, j + 1, k + 1] - u[i + 1, j + 1, k]
                acc += d0 * d0 + d1 * d1 + d2 * d2 + d3 * d3
                g[i, j, k] = 0.25 * inv_h2 * acc
    return g_arr
