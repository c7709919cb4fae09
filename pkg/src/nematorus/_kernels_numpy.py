"""Pure-numpy flow kernels (reference / fallback backend).

Both backends implement the same three entry points with identical
semantics; see ``_kernels`` for the shared contract and the meaning of
the precomputed coefficient arrays.
"""

import numpy as np


def one_constant_eval(u, cos2a, sin2a, slope_t0, slope_p0,
                      w, w_half, ginv, pot, d_theta, d_phi, r, k, rhs):
    """Fill `rhs` with the flow right-hand side; return scalars.

    Returns (energy_wo_offset, max_rhs, diss_weight) for the *current*
    state, where diss_weight = sum w rhs^2 dth dph.
    """
    s_t = ((np.roll(u, -1, axis=0) - u) / d_theta + slope_t0) / r
    s_p = ((np.roll(u, -1, axis=1) - u) / d_phi + slope_p0) * ginv[:, None]
    flux_t = w_half[:, None] * s_t
    np.copyto(rhs, (flux_t - np.roll(flux_t, 1, axis=0)) / (r * d_theta * w[:, None]))
    rhs += (s_p - np.roll(s_p, 1, axis=1)) * (ginv[:, None] / d_phi)
    rhs *= k
    rhs += (0.5 * k) * pot[:, None] * sin2a

    cell = d_theta * d_phi
    dirichlet = 0.5 * k * cell * (np.sum(w_half[:, None] * s_t * s_t)
                                  + np.sum(w[:, None] * s_p * s_p))
    potential = 0.25 * k * cell * np.sum(w[:, None] * pot[:, None] * cos2a)
    energy = dirichlet + potential
    max_rhs = float(np.max(np.abs(rhs)))
    diss_weight = cell * float(np.sum(w[:, None] * rhs * rhs))
    return energy, max_rhs, diss_weight


def apply_step(u, cos_a, sin_a, rhs, dt, angle_scale):
    """u += dt rhs, rotating the stored (cos, sin) of angle_scale*alpha.

    Degree-5 Taylor rotation factors; the per-step angle is tiny, so
    the pair stays exact to roundoff between periodic refreshes.
    """
    u += dt * rhs
    d = (angle_scale * dt) * rhs
    d2 = d * d
    cd = 1.0 - 0.5 * d2 * (1.0 - d2 / 12.0)
    sd = d * (1.0 - d2 / 6.0 * (1.0 - 0.05 * d2))
    c_new = cos_a * cd - sin_a * sd
    sin_a *= cd
    sin_a += cos_a * sd
    np.copyto(cos_a, c_new)


def general_eval(u, cos_a, sin_a, slope_t0, slope_p0,
                 w, ginv, sin_theta, c2, d_theta, d_phi, r, k1, k2, k3, rhs):
    """General-constant descent direction: exact gradient of the
    node-centered discrete Darboux energy (wide central stencils).

    Same return contract as ``one_constant_eval``; the energy is the
    per-node quadrature of the four Darboux densities.
    """
    a = ((np.roll(u, -1, axis=0) - np.roll(u, 1, axis=0)) / (2.0 * d_theta) + slope_t0) / r
    dp = (np.roll(u, -1, axis=1) - np.roll(u, 1, axis=1)) / (2.0 * d_phi) + slope_p0
    b = (dp - sin_theta[:, None]) * ginv[:, None]
    ca, sa = cos_a, sin_a
    kt = -a * sa + b * ca
    kn = a * ca + b * sa
    c1 = 1.0 / r
    dc = c1 - c2[:, None]
    tn = dc * sa * ca
    cn = c1 * ca * ca + c2[:, None] * sa * sa

    f_a = -k1 * kt * sa + k3 * kn * ca
    f_b = k1 * kt * ca + k3 * kn * sa
    g_t = w[:, None] * f_a
    g_p = (w * ginv)[:, None] * f_b
    np.copyto(rhs, (np.roll(g_t, -1, axis=0) - np.roll(g_t, 1, axis=0))
              / (2.0 * d_theta * r * w[:, None]))
    rhs += (np.roll(g_p, -1, axis=1) - np.roll(g_p, 1, axis=1)) / (2.0 * d_phi * w[:, None])
    cos2a = ca * ca - sa * sa
    sin2a = 2.0 * sa * ca
    rhs -= (k3 - k1) * kt * kn + k2 * tn * dc * cos2a - k3 * cn * dc * sin2a

    cell = d_theta * d_phi
    wcell = w[:, None]
    energy = 0.5 * cell * float(np.sum(wcell * (k1 * kt * kt + k2 * tn * tn
                                                + k3 * (kn * kn + cn * cn))))
    max_rhs = float(np.max(np.abs(rhs)))
    diss_weight = cell * float(np.sum(wcell * rhs * rhs))
    return energy, max_rhs, diss_weight
