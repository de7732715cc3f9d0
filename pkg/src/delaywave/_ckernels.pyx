# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops; see ``_pykernels`` for the reference semantics."""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp, pow, fabs, NAN

cnp.import_array()

BACKEND = "cython"

cdef double NEG_TOL = -1e-12
cdef double BLOWUP = 1e6


cdef inline double gval(int kind, double p, double n, double u) noexcept nogil:
    if kind == 0:
        return p * u * exp(-u)
    return p * u / (1.0 + pow(u, n))


def dde_run(int kind, double p, double n, past_x, past_xp, Py_ssize_t m, double dt,
            Py_ssize_t nsteps, str scheme, gfun=None):
    if kind < 0:
        raise ValueError("compiled kernel needs a built-in birth function")
    cdef cnp.ndarray[cnp.float64_t, ndim=1] Xa = np.empty(m + nsteps + 1)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] XPa = np.empty(m + nsteps + 1)
    cdef double[::1] X = Xa
    cdef double[::1] XP = XPa
    cdef double[::1] px = np.ascontiguousarray(past_x, dtype=np.float64)
    cdef double[::1] pxp = np.ascontiguousarray(past_xp, dtype=np.float64)
    cdef Py_ssize_t j, k, last
    cdef bint rk4 = scheme == "rk4"
    cdef double x, y, k1, k2, k3, k4, xn, dr, xmid, gm, xl
    cdef double half = 0.5 * dt, eighth = 0.125 * dt
    cdef double xp_hist_end
    cdef long nclamp = 0
    cdef Py_ssize_t blow = -1
    for j in range(m + 1):
        X[j] = px[j]
        XP[j] = pxp[j]
    xp_hist_end = XP[m]
    with nogil:
        for k in range(nsteps):
            j = m + k
            x = X[j]
            if m == 0:
                k1 = -x + gval(kind, p, n, x)
                XP[j] = k1
                if rk4:
                    y = x + half * k1
                    k2 = -y + gval(kind, p, n, y)
                    y = x + half * k2
                    k3 = -y + gval(kind, p, n, y)
                    y = x + dt * k3
                    k4 = -y + gval(kind, p, n, y)
            else:
                k1 = -x + gval(kind, p, n, X[k])
                XP[j] = k1
                if rk4:
                    if k + 1 == m:
                        dr = xp_hist_end
                    else:
                        dr = XP[k + 1]
                    xmid = 0.5 * (X[k] + X[k + 1]) + eighth * (XP[k] - dr)
                    gm = gval(kind, p, n, xmid)
                    k2 = -(x + half * k1) + gm
                    k3 = -(x + half * k2) + gm
                    k4 = -(x + dt * k3) + gval(kind, p, n, X[k + 1])
            if rk4:
                xn = x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            else:
                xn = x + dt * k1
            if xn < 0.0:
                if xn < NEG_TOL:
                    nclamp += 1
                xn = 0.0
            X[j + 1] = xn
            if not fabs(xn) <= BLOWUP:
                blow = k + 1
                break
        last = m + nsteps
        if blow < 0:
            xl = X[last]
            if m == 0:
                XP[last] = -xl + gval(kind, p, n, xl)
            else:
                XP[last] = -xl + gval(kind, p, n, X[nsteps])
    return Xa[m:].copy(), XPa[m:].copy(), nclamp, blow


def pde_advance(int kind, double p, double n, cnp.ndarray[cnp.float64_t, ndim=2] ring,
                Py_ssize_t head, double d, double dt, double dx, Py_ssize_t nsteps, int bc,
                double left_val, double right_val, double level, gfun=None):
    if kind < 0:
        raise ValueError("compiled kernel needs a built-in birth function")
    cdef double[:, ::1] R = ring
    cdef Py_ssize_t slots = R.shape[0], nx = R.shape[1]
    cdef double coef = d * dt / (dx * dx)
    cdef long nclamp = 0
    cdef cnp.ndarray[cnp.float64_t, ndim=1] fronts_a = np.empty(nsteps)
    cdef double[::1] fronts = fronts_a
    cdef double[::1] tmp = np.empty(nx)
    cdef Py_ssize_t k, i, old, last
    cdef double ui, lap, v, a, b
    with nogil:
        for k in range(nsteps):
            old = (head + 1) % slots
            for i in range(nx):
                ui = R[head, i]
                if i == 0:
                    if bc == 1:
                        lap = 2.0 * (R[head, 1] - ui)
                    else:
                        lap = 0.0
                elif i == nx - 1:
                    if bc == 1:
                        lap = 2.0 * (R[head, nx - 2] - ui)
                    else:
                        lap = 0.0
                else:
                    lap = R[head, i + 1] - 2.0 * ui + R[head, i - 1]
                v = ui + coef * lap + dt * (gval(kind, p, n, R[old, i]) - ui)
                if v < 0.0:
                    if v < NEG_TOL:
                        nclamp += 1
                    v = 0.0
                tmp[i] = v
            if bc == 0:
                tmp[0] = left_val
                tmp[nx - 1] = right_val
            for i in range(nx):
                R[old, i] = tmp[i]
            head = old
            fronts[k] = NAN
            last = -1
            i = nx - 1
            while i >= 0:
                if R[head, i] >= level:
                    last = i
                    break
                i -= 1
            if last >= 0 and last < nx - 1:
                a = R[head, last]
                b = R[head, last + 1]
                fronts[k] = last + (a - level) / (a - b)
    return head, nclamp, fronts_a


def wave_sweeps(f, double e_left, double wl_old, double wl_new, double l_start,
                double e_right, double wr_near, double wr_far, double r_end):
    cdef double[::1] F = np.ascontiguousarray(f, dtype=np.float64)
    cdef Py_ssize_t N = F.shape[0], i
    cdef cnp.ndarray[cnp.float64_t, ndim=1] La = np.empty(N)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] Ra = np.empty(N)
    cdef double[::1] L = La
    cdef double[::1] R = Ra
    with nogil:
        L[0] = l_start
        for i in range(N - 1):
            L[i + 1] = e_left * L[i] + wl_old * F[i] + wl_new * F[i + 1]
        R[N - 1] = r_end
        i = N - 2
        while i >= 0:
            R[i] = e_right * R[i + 1] + wr_near * F[i] + wr_far * F[i + 1]
            i -= 1
    return La, Ra
