"""Pure-Python/NumPy versions of the inner loops.

These mirror ``_ckernels.pyx`` exactly (same arguments, same results up
to rounding) and are used when the extension is unavailable, when
``DELAYWAVE_PURE_PYTHON`` is set, or for custom birth functions.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.signal import lfilter

BACKEND = "python"

NEG_TOL = -1e-12
BLOWUP = 1e6


def _scalar_g(kind, p, n, gfun):
    if kind == 0:
        return lambda u: p * u * math.exp(-u)
    if kind == 1:
        return lambda u: p * u / (1.0 + u ** n)
    return lambda u: float(gfun(np.array([u]))[0])


def _vector_g(kind, p, n, gfun):
    if kind == 0:
        return lambda u: p * u * np.exp(-u)
    if kind == 1:
        return lambda u: p * u / (1.0 + u ** n)
    return lambda u: np.asarray(gfun(u), dtype=float)


def dde_run(kind, p, n, past_x, past_xp, m, dt, nsteps, scheme, gfun=None):
    """March ``x' = -x + g(x(t - m dt))`` for ``nsteps`` steps.

    ``past_x``/``past_xp`` hold ``m + 1`` samples on ``[t0 - h, t0]``;
    ``past_xp[m]`` is the history's derivative at ``t0`` from the left.
    Returns ``(x, xp, n_clamped, blowup_index)`` with ``x[0] = past_x[m]``
    and ``xp`` the right-hand side at each solution sample. ``blowup_index``
    is -1 unless ``|x|`` exceeded 1e6.
    """
    g = _scalar_g(kind, p, n, gfun)
    X = [0.0] * (m + nsteps + 1)
    XP = [0.0] * (m + nsteps + 1)
    for j in range(m + 1):
        X[j] = float(past_x[j])
        XP[j] = float(past_xp[j])
    xp_hist_end = XP[m]
    half = 0.5 * dt
    eighth = 0.125 * dt
    rk4 = scheme == "rk4"
    nclamp = 0
    blow = -1
    for k in range(nsteps):
        j = m + k
        x = X[j]
        if m == 0:
            k1 = -x + g(x)
            XP[j] = k1
            if rk4:
                y = x + half * k1
                k2 = -y + g(y)
                y = x + half * k2
                k3 = -y + g(y)
                y = x + dt * k3
                k4 = -y + g(y)
        else:
            k1 = -x + g(X[k])
            XP[j] = k1
            if rk4:
                dr = xp_hist_end if k + 1 == m else XP[k + 1]
                xmid = 0.5 * (X[k] + X[k + 1]) + eighth * (XP[k] - dr)
                gm = g(xmid)
                k2 = -(x + half * k1) + gm
                k3 = -(x + half * k2) + gm
                k4 = -(x + dt * k3) + g(X[k + 1])
        if rk4:
            xn = x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        else:
            xn = x + dt * k1
        if xn < 0.0:
            if xn < NEG_TOL:
                nclamp += 1
            xn = 0.0
        if not abs(xn) <= BLOWUP:
            X[j + 1] = xn
            blow = k + 1
            break
        X[j + 1] = xn
    last = m + nsteps
    if blow < 0:
        xl = X[last]
        XP[last] = -xl + (g(xl) if m == 0 else g(X[nsteps]))
    x = np.array(X[m:], dtype=float)
    xp = np.array(XP[m:], dtype=float)
    return x, xp, nclamp, blow


def pde_advance(kind, p, n, ring, head, d, dt, dx, nsteps, bc, left_val, right_val, level, gfun=None):
    """Explicit Euler steps of ``u_t = d u_xx - u + g(u(t - h))``.

    ``ring`` has shape ``(m + 1, nx)``; ``ring[head]`` is the current field
    and ``ring[(head + 1) % (m + 1)]`` the field one delay ago. The ring is
    updated in place. Returns ``(new_head, n_clamped, front_positions)``
    where ``front_positions[k]`` is the grid coordinate (in cells) of the
    rightmost crossing of ``level`` after step ``k`` (NaN if none).
    """
    g = _vector_g(kind, p, n, gfun)
    slots = ring.shape[0]
    nx = ring.shape[1]
    coef = d * dt / (dx * dx)
    nclamp = 0
    fronts = np.full(nsteps, np.nan)
    lap = np.empty(nx)
    for k in range(nsteps):
        u = ring[head]
        old = (head + 1) % slots
        ud = ring[old]
        lap[1:-1] = u[2:] - 2.0 * u[1:-1] + u[:-2]
        if bc == 1:
            lap[0] = 2.0 * (u[1] - u[0])
            lap[-1] = 2.0 * (u[-2] - u[-1])
        else:
            lap[0] = 0.0
            lap[-1] = 0.0
        new = u + coef * lap + dt * (g(ud) - u)
        if bc == 0:
            new[0] = left_val
            new[-1] = right_val
        neg = new < 0.0
        if neg.any():
            nclamp += int(np.count_nonzero(new < NEG_TOL))
            new[neg] = 0.0
        ring[old] = new
        head = old
        above = np.flatnonzero(new >= level)
        if above.size and above[-1] < nx - 1:
            i = above[-1]
            a, b = new[i], new[i + 1]
            fronts[k] = i + (a - level) / (a - b)
    return head, nclamp, fronts


def wave_sweeps(f, e_left, wl_old, wl_new, l_start, e_right, wr_near, wr_far, r_end):
    """Exact exponential-kernel sweeps over a piecewise-linear integrand.

    Left:  ``L[0] = l_start``, ``L[i+1] = e_left L[i] + wl_old f[i] + wl_new f[i+1]``.
    Right: ``R[-1] = r_end``,  ``R[i] = e_right R[i+1] + wr_near f[i] + wr_far f[i+1]``.
    """
    f = np.asarray(f, dtype=float)
    c = wl_old * f[:-1] + wl_new * f[1:]
    L = np.empty_like(f)
    L[0] = l_start
    L[1:] = lfilter([1.0], [1.0, -e_left], c, zi=[e_left * l_start])[0]
    cr = (wr_near * f[:-1] + wr_far * f[1:])[::-1]
    R = np.empty_like(f)
    R[-1] = r_end
    R[:-1] = lfilter([1.0], [1.0, -e_right], cr, zi=[e_right * r_end])[0][::-1]
    return L, R
