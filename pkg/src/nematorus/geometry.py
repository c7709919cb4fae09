"""Closed-form differential geometry of the axisymmetric torus.

Chart::

    X(theta, phi) = ((R + r cos theta) cos phi,
                     (R + r cos theta) sin phi,
                      r sin theta)

with theta the meridian angle and phi the parallel angle, both in
[0, 2pi).  The orthonormal tangent frame is (e_theta, e_phi); the unit
normal nu = e_theta x e_phi points *into* the tube.  With this
orientation the meridian principal curvature is the constant c1 = 1/r
and the parallel one is c2 = cos(theta) / (R + r cos theta), positive
on the outer equator and negative around the hole.  Downstream sign
conventions (the double-well potential of the angle energy, the
Darboux scalars) depend on this choice; do not flip it.

Everything here is an exact trigonometric expression evaluated on
demand; nothing is cached.  Functions accept scalars or numpy arrays
for the angles and broadcast.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidRatio

TAU = 2.0 * math.pi

# Ratios this close to 1 are accepted, but the energy scale diverges
# like 1/sqrt(mu^2 - 1); the CLI flags such runs as near-singular.
NEAR_SINGULAR_RATIO = 1.001


@dataclass(frozen=True)
class TorusGeometry:
    """Embedded torus with major radius R and minor radius r (R > r > 0)."""

    R: float
    r: float

    def __post_init__(self):
        if not (math.isfinite(self.R) and math.isfinite(self.r) and self.r > 0.0):
            raise InvalidRatio(f"radii must be finite and positive, got R={self.R}, r={self.r}")
        if self.R / self.r <= 1.0 + 1e-9:
            raise InvalidRatio(
                f"aspect ratio mu = R/r = {self.R / self.r} must exceed 1 "
                "(embedded, non-self-intersecting torus)"
            )

    @classmethod
    def from_ratio(cls, mu: float) -> "TorusGeometry":
        """Normalized torus r = 1, R = mu (the 2D energy is scale invariant)."""
        return cls(R=float(mu), r=1.0)

    @property
    def mu(self) -> float:
        return self.R / self.r

    @property
    def near_singular(self) -> bool:
        return self.mu <= NEAR_SINGULAR_RATIO

    def tube_width(self, theta):
        """R + r cos(theta), the distance from the symmetry axis."""
        return self.R + self.r * np.cos(theta)


def _wrap_angle(x: float) -> float:
    """Reduce an angle to [0, 2pi)."""
    y = math.fmod(float(x), TAU)
    return y + TAU if y < 0.0 else y


@dataclass(frozen=True)
class SurfacePoint:
    """Point on the torus in (theta, phi) coordinates, reduced mod 2pi."""

    theta: float
    phi: float

    def __post_init__(self):
        object.__setattr__(self, "theta", _wrap_angle(self.theta))
        object.__setattr__(self, "phi", _wrap_angle(self.phi))


@dataclass(frozen=True)
class PointGeometry:
    """All pointwise geometric quantities at one surface point.

    spin_theta/spin_phi are the components of the spin connection in
    the (e_theta, e_phi) frame; spin_theta vanishes identically on the
    torus because meridians are geodesics.
    """

    c1: float
    c2: float
    spin_theta: float
    spin_phi: float
    area_density: float
    e_theta: np.ndarray
    e_phi: np.ndarray
    normal: np.ndarray


def frame_vectors(theta, phi):
    """Orthonormal frame (e_theta, e_phi, nu) at (theta, phi).

    Broadcasts; returns arrays with a trailing xyz axis.  nu is the
    inner normal, so (e_theta, e_phi, nu) is right-handed.
    """
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    st, ct = np.sin(theta), np.cos(theta)
    sp, cp = np.sin(phi), np.cos(phi)
    e_theta = np.stack(np.broadcast_arrays(-st * cp, -st * sp, ct + 0.0 * sp), axis=-1)
    e_phi = np.stack(np.broadcast_arrays(-sp + 0.0 * st, cp + 0.0 * st, 0.0 * (st + sp)), axis=-1)
    normal = np.stack(np.broadcast_arrays(-ct * cp, -ct * sp, -st + 0.0 * sp), axis=-1)
    return e_theta, e_phi, normal


def principal_curvatures(geom: TorusGeometry, theta):
    """(c1, c2) with c1 = 1/r constant and c2 = cos(theta)/(R + r cos theta)."""
    theta = np.asarray(theta, dtype=float)
    c2 = np.cos(theta) / geom.tube_width(theta)
    c1 = np.full_like(c2, 1.0 / geom.r)
    return c1, c2


def spin_connection_phi(geom: TorusGeometry, theta):
    """e_phi component of the spin connection, sin(theta)/(R + r cos theta).

    The e_theta component is identically zero (meridians are geodesics).
    """
    theta = np.asarray(theta, dtype=float)
    return np.sin(theta) / geom.tube_width(theta)


def area_density(geom: TorusGeometry, theta):
    """sqrt(det g) = r (R + r cos theta) > 0."""
    return geom.r * geom.tube_width(theta)


def point_geometry(geom: TorusGeometry, p: SurfacePoint) -> PointGeometry:
    """Evaluate curvatures, spin connection, area density and frame at p."""
    e_theta, e_phi, normal = frame_vectors(p.theta, p.phi)
    width = geom.R + geom.r * math.cos(p.theta)
    return PointGeometry(
        c1=1.0 / geom.r,
        c2=math.cos(p.theta) / width,
        spin_theta=0.0,
        spin_phi=math.sin(p.theta) / width,
        area_density=geom.r * width,
        e_theta=e_theta,
        e_phi=e_phi,
        normal=normal,
    )


def surface_gradient_matrix(
    geom: TorusGeometry,
    p: SurfacePoint,
    alpha: float,
    alpha_theta: float,
    alpha_phi: float,
) -> np.ndarray:
    """Surface gradient of the director n = cos(a) e_theta + sin(a) e_phi.

    Returned in the Darboux frame (n, t, nu) with t = nu x n: entry
    (i, j) is frame_i . (grad_s n) frame_j.  The first row vanishes
    because n is unit, the last column because the surface gradient
    only differentiates along tangent directions.  alpha_theta and
    alpha_phi are the coordinate partials of the angle at p.
    """
    width = geom.R + geom.r * math.cos(p.theta)
    ca, sa = math.cos(alpha), math.sin(alpha)
    gt = alpha_theta / geom.r
    gp = (alpha_phi - math.sin(p.theta)) / width
    m = np.zeros((3, 3))
    m[1, 0] = gt * ca + gp * sa
    m[1, 1] = -gt * sa + gp * ca
    m[2, 0] = (ca * ca) / geom.r + math.cos(p.theta) / width * (sa * sa)
    m[2, 1] = (math.cos(p.theta) / width - 1.0 / geom.r) * sa * ca
    return m


def laplace_beltrami_coefficients(geom: TorusGeometry, theta):
    """Coefficients (a_tt, a_t, a_pp) of the analytic surface Laplacian.

    Delta_s f = a_tt f_thetatheta + a_t f_theta + a_pp f_phiphi with
    a_tt = 1/r^2, a_t = -sin(theta)/(r (R + r cos theta)),
    a_pp = 1/(R + r cos theta)^2.
    """
    theta = np.asarray(theta, dtype=float)
    width = geom.tube_width(theta)
    a_tt = np.full_like(width, 1.0 / geom.r**2)
    a_t = -np.sin(theta) / (geom.r * width)
    a_pp = 1.0 / width**2
    return a_tt, a_t, a_pp
