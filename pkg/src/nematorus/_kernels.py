"""Backend selection for the hot flow kernels.

Two interchangeable implementations exist:

* ``_kernels_numba`` -- @njit loops, the default when numba imports;
* ``_kernels_numpy`` -- vectorized numpy fallback.

Set ``NEMATORUS_DISABLE_NUMBA=1`` in the environment to force the
numpy path (e.g. for debugging or on platforms without numba).  The
active backend name is exported as ``BACKEND`` and stamped into every
CSV the CLI writes, because float summation order differs between
backends: results are bit-reproducible per configuration *and*
backend, not across backends.

Kernel contract (shared by both backends)
-----------------------------------------
The hot loop never calls trig: the driver carries (cos, sin) of a
scaled angle as state arrays, initialized and periodically refreshed
by real trig, and ``apply_step`` rotates them incrementally by the
tiny per-step angle (degree-5 Taylor factors, exact to roundoff).

``one_constant_eval(u, cos2a, sin2a, slope_t0, slope_p0, w, w_half,
ginv, pot, d_theta, d_phi, r, k, rhs)``

    Writes the gradient-flow right-hand side of the equal-moduli
    energy into ``rhs`` and returns ``(energy_wo_offset, max_rhs,
    diss_weight)`` for the current state.  ``u`` is the periodic
    deviation; ``cos2a``/``sin2a`` hold cos/sin of twice the full
    angle; ``slope_t0 = h_theta/2`` and ``slope_p0 = h_phi/2`` are the
    exact coordinate slopes of the winding part; ``w``/``w_half`` the
    area density at nodes / theta half nodes;
    ``ginv = 1/(R + r cos theta)``; ``pot = c1^2 - c2^2``.  The rhs is
    the exact negative gradient of the discrete energy in the
    dA-weighted inner product (conservative flux form), so accepted
    explicit steps decrease that energy.

``apply_step(u, cos_a, sin_a, rhs, dt, angle_scale)``

    u += dt rhs, rotating the stored pair by angle_scale * dt * rhs.

``general_eval(u, cos_a, sin_a, slope_t0, slope_p0, w, ginv,
sin_theta, c2, d_theta, d_phi, r, k1, k2, k3, rhs)``

    Same contract for anisotropic moduli (cos_a/sin_a hold the plain
    angle): exact gradient of the node-centered discrete Darboux
    energy (wide central stencils).  The returned energy matches
    ``energy.energy_general`` up to summation order.
"""

import os

BACKEND = "numpy"

if os.environ.get("NEMATORUS_DISABLE_NUMBA", "").strip() not in ("", "0"):
    from . import _kernels_numpy as _impl
else:
    try:
        from . import _kernels_numba as _impl
        BACKEND = "numba"
    except ImportError:
        from . import _kernels_numpy as _impl

one_constant_eval = _impl.one_constant_eval
general_eval = _impl.general_eval
apply_step = _impl.apply_step
