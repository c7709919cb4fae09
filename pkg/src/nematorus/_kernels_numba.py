"""Numba-jitted flow kernels (default backend).

Same contract as ``_kernels_numpy``; serial loops only, so reductions
are deterministic for a fixed configuration.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def one_constant_eval(u, cos2a, sin2a, slope_t0, slope_p0,
                      w, w_half, ginv, pot, d_theta, d_phi, r, k, rhs):
    n_t, n_p = u.shape
    inv_dt_r = 1.0 / (d_theta * r)
    inv_dp = 1.0 / d_phi
    st0 = slope_t0 / r
    cell = d_theta * d_phi
    e_dir = np.empty(n_t)
    e_pot = np.empty(n_t)
    diss = np.empty(n_t)
    max_rhs = 0.0
    for i in range(n_t):
        ip1 = i + 1 if i + 1 < n_t else 0
        im1 = i - 1 if i > 0 else n_t - 1
        fac_t = k / (r * d_theta * w[i])
        fac_p = k * ginv[i] / d_phi
        half_pot = 0.5 * k * pot[i]
        row_dir = 0.0
        row_pot = 0.0
        row_diss = 0.0
        for j in range(n_p):
            jp1 = j + 1 if j + 1 < n_p else 0
            jm1 = j - 1 if j > 0 else n_p - 1
            st_here = (u[ip1, j] - u[i, j]) * inv_dt_r + st0
            st_up = (u[i, j] - u[im1, j]) * inv_dt_r + st0
            sp_here = ((u[i, jp1] - u[i, j]) * inv_dp + slope_p0) * ginv[i]
            sp_left = ((u[i, j] - u[i, jm1]) * inv_dp + slope_p0) * ginv[i]
            val = fac_t * (w_half[i] * st_here - w_half[im1] * st_up)
            val += fac_p * (sp_here - sp_left)
            val += half_pot * sin2a[i, j]
            rhs[i, j] = val
            row_dir += w_half[i] * st_here * st_here + w[i] * sp_here * sp_here
            row_pot += cos2a[i, j]
            row_diss += val * val
            a = abs(val)
            if a > max_rhs:
                max_rhs = a
        e_dir[i] = row_dir
        e_pot[i] = w[i] * pot[i] * row_pot
        diss[i] = w[i] * row_diss
    energy = 0.5 * k * cell * np.sum(e_dir) + 0.25 * k * cell * np.sum(e_pot)
    diss_weight = cell * np.sum(diss)
    return energy, max_rhs, diss_weight


@njit(cache=True)
def apply_step(u, cos_a, sin_a, rhs, dt, angle_scale):
    """u += dt rhs, with (cos, sin) of angle_scale * alpha rotated along.

    The per-step rotation angle d = angle_scale * dt * rhs is far below
    the explicit stability limit, so degree-5 Taylor factors keep the
    stored trig pair exact to ~1e-16 (refreshed periodically anyway).
    """
    n_t, n_p = u.shape
    for i in range(n_t):
        for j in range(n_p):
            g = rhs[i, j]
            u[i, j] += dt * g
            d = angle_scale * dt * g
            d2 = d * d
            cd = 1.0 - 0.5 * d2 * (1.0 - d2 / 12.0)
            sd = d * (1.0 - d2 / 6.0 * (1.0 - 0.05 * d2))
            c = cos_a[i, j]
            s = sin_a[i, j]
            cos_a[i, j] = c * cd - s * sd
            sin_a[i, j] = s * cd + c * sd


@njit(cache=True)
def general_eval(u, cos_a, sin_a, slope_t0, slope_p0,
                 w, ginv, sin_theta, c2, d_theta, d_phi, r, k1, k2, k3, rhs):
    n_t, n_p = u.shape
    c1 = 1.0 / r
    cell = d_theta * d_phi
    g_t = np.empty((n_t, n_p))
    g_p = np.empty((n_t, n_p))
    e_row = np.empty(n_t)
    diss = np.empty(n_t)
    # pass 1: pointwise scalars, fluxes, local part of the gradient
    for i in range(n_t):
        ip1 = i + 1 if i + 1 < n_t else 0
        im1 = i - 1 if i > 0 else n_t - 1
        dc = c1 - c2[i]
        row_e = 0.0
        for j in range(n_p):
            jp1 = j + 1 if j + 1 < n_p else 0
            jm1 = j - 1 if j > 0 else n_p - 1
            a = ((u[ip1, j] - u[im1, j]) / (2.0 * d_theta) + slope_t0) / r
            b = ((u[i, jp1] - u[i, jm1]) / (2.0 * d_phi) + slope_p0 - sin_theta[i]) * ginv[i]
            ca = cos_a[i, j]
            sa = sin_a[i, j]
            kt = -a * sa + b * ca
            kn = a * ca + b * sa
            tn = dc * sa * ca
            cn = c1 * ca * ca + c2[i] * sa * sa
            g_t[i, j] = w[i] * (-k1 * kt * sa + k3 * kn * ca)
            g_p[i, j] = w[i] * ginv[i] * (k1 * kt * ca + k3 * kn * sa)
            cos2a = ca * ca - sa * sa
            sin2a = 2.0 * sa * ca
            rhs[i, j] = -((k3 - k1) * kt * kn + k2 * tn * dc * cos2a - k3 * cn * dc * sin2a)
            row_e += w[i] * (k1 * kt * kt + k2 * tn * tn + k3 * (kn * kn + cn * cn))
        e_row[i] = row_e
    # pass 2: flux divergence (wide central stencil)
    max_rhs = 0.0
    for i in range(n_t):
        ip1 = i + 1 if i + 1 < n_t else 0
        im1 = i - 1 if i > 0 else n_t - 1
        inv_wt = 1.0 / (2.0 * d_theta * r * w[i])
        inv_wp = 1.0 / (2.0 * d_phi * w[i])
        row_diss = 0.0
        for j in range(n_p):
            jp1 = j + 1 if j + 1 < n_p else 0
            jm1 = j - 1 if j > 0 else n_p - 1
            val = rhs[i, j]
            val += (g_t[ip1, j] - g_t[im1, j]) * inv_wt
            val += (g_p[i, jp1] - g_p[i, jm1]) * inv_wp
            rhs[i, j] = val
            row_diss += val * val
            a = abs(val)
            if a > max_rhs:
                max_rhs = a
        diss[i] = w[i] * row_diss
    energy = 0.5 * cell * np.sum(e_row)
    diss_weight = cell * np.sum(diss)
    return energy, max_rhs, diss_weight
