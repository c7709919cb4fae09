"""Energy functionals for the director angle on the torus.

Strain measures (Darboux scalars) of a unit tangent director
n = cos(a) e_theta + sin(a) e_phi:

    kappa_t = (grad_s a - Omega) . t      geodesic curvature of t-lines
    kappa_n = (grad_s a - Omega) . n      geodesic curvature of n-lines
    tau_n   = (c1 - c2) sin(a) cos(a)     geodesic torsion
    c_n     = c1 cos^2(a) + c2 sin^2(a)   normal curvature

The extrinsic surface energy weighs them as

    W = 1/2 int [ k1 kappa_t^2 + k2 tau_n^2 + k3 (kappa_n^2 + c_n^2) ] dA

while the classical (covariant) energy keeps only the first two
curvature terms, 1/2 int [k1 kappa_t^2 + k3 kappa_n^2] dA.

For constant angles everything integrates in closed form through the
three curvature moments

    I1 = int Omega_phi^2 dA = 4 pi^2 (mu - sqrt(mu^2 - 1))
    I2 = int c1^2 dA       = 4 pi^2 mu
    I3 = int c2^2 dA       = 4 pi^2 mu (mu / sqrt(mu^2 - 1) - 1)

giving W(a) = A0 + A1 cos(2a) + A2 cos^2(2a); see
``constant_energy_coefficients``.  All moments are dimensionless in
mu = R/r and every energy here scales like the moduli (length drops
out of the 2D functionals).

Grid quadrature is the per-node (trapezoidal-by-periodicity) rule,
which is spectrally accurate for the smooth periodic integrands.
Reductions go through numpy's pairwise summation, so results are
bit-reproducible for a fixed configuration and backend.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidConstants, InvalidRatio
from .fields import AngleField, discrete_gradient
from .geometry import TorusGeometry, area_density, principal_curvatures, spin_connection_phi

PI2 = math.pi**2

# One-constant constant-angle energy is exactly angle independent at
# this ratio (I2 == I3): mu = 2/sqrt(3).
DEGENERATE_RATIO = 2.0 / math.sqrt(3.0)


def _check_ratio(mu: float) -> float:
    mu = float(mu)
    if not (mu > 1.0):
        raise InvalidRatio(f"aspect ratio must exceed 1, got {mu}")
    return mu


@dataclass(frozen=True)
class ElasticConstants:
    """Surface splay, twist and bend moduli (all strictly positive)."""

    k1: float
    k2: float
    k3: float

    def __post_init__(self):
        if not (self.k1 > 0.0 and self.k2 > 0.0 and self.k3 > 0.0):
            raise InvalidConstants(
                f"moduli must be strictly positive, got ({self.k1}, {self.k2}, {self.k3})"
            )

    @classmethod
    def one_constant(cls, k: float) -> "ElasticConstants":
        return cls(k, k, k)

    @property
    def is_one_constant(self) -> bool:
        return self.k1 == self.k2 == self.k3

    @property
    def k_max(self) -> float:
        return max(self.k1, self.k2, self.k3)


@dataclass(frozen=True)
class Moments:
    """Closed-form curvature moments I1, I2, I3 (all positive for mu > 1)."""

    I1: float
    I2: float
    I3: float


def moments(mu: float) -> Moments:
    """Curvature moments of the torus with aspect ratio mu."""
    mu = _check_ratio(mu)
    s = math.sqrt(mu * mu - 1.0)
    return Moments(
        I1=4.0 * PI2 * (mu - s),
        I2=4.0 * PI2 * mu,
        I3=4.0 * PI2 * mu * (mu / s - 1.0),
    )


def willmore(mu: float) -> float:
    """Willmore functional int ((c1+c2)/2)^2 dA = pi^2 mu^2 / sqrt(mu^2-1).

    Equals (I2 + I3)/4; minimized at mu = sqrt(2).
    """
    mu = _check_ratio(mu)
    return PI2 * mu * mu / math.sqrt(mu * mu - 1.0)


def one_constant_offset(mu: float) -> float:
    """f(mu) = pi^2 (2 mu + (2 - mu^2)/sqrt(mu^2 - 1)), per unit modulus.

    The angle-independent part of the one-constant energy; identical to
    I1/2 + (I2 + I3)/4.
    """
    mu = _check_ratio(mu)
    s = math.sqrt(mu * mu - 1.0)
    return PI2 * (2.0 * mu + (2.0 - mu * mu) / s)


def classical_offset(mu: float) -> float:
    """2 pi^2 (mu - sqrt(mu^2 - 1)) = I1/2, per unit modulus."""
    mu = _check_ratio(mu)
    return 2.0 * PI2 * (mu - math.sqrt(mu * mu - 1.0))


def near_hole_density(mu: float, alpha: float) -> float:
    """(c1^2 - c2^2) cos(2 alpha) sqrt(g) at the inner equator, in
    d(theta) d(phi) units.

    For alpha = pi/2 this is mu (2 - mu)/(mu - 1): the bending cost of
    the parallel alignment in the hole, divergent as mu -> 1.
    """
    mu = _check_ratio(mu)
    w = mu - 1.0
    return (1.0 - 1.0 / w**2) * math.cos(2.0 * alpha) * w


def constant_energy_coefficients(k: ElasticConstants, mu: float):
    """(A0, A1, A2) of W(a) = A0 + A1 cos(2a) + A2 cos^2(2a) for constant a."""
    m = moments(mu)
    a0 = (k.k1 + k.k3) * m.I1 / 4.0 + (k.k2 + k.k3) * (m.I2 + m.I3) / 8.0
    a1 = (k.k1 - k.k3) * m.I1 / 4.0 + k.k3 * (m.I2 - m.I3) / 4.0
    a2 = (k.k3 - k.k2) * (m.I2 + m.I3) / 8.0
    return a0, a1, a2


def constant_energy(alpha, k: ElasticConstants, mu: float):
    """Exact surface energy of the constant-angle director (pi-periodic)."""
    a0, a1, a2 = constant_energy_coefficients(k, mu)
    c = np.cos(2.0 * np.asarray(alpha, dtype=float))
    out = a0 + a1 * c + a2 * c * c
    return float(out) if np.isscalar(alpha) or out.ndim == 0 else out


def constant_energy_d1(alpha, k: ElasticConstants, mu: float):
    """dW/da = -2 A1 sin(2a) - 2 A2 sin(4a)."""
    _, a1, a2 = constant_energy_coefficients(k, mu)
    a = np.asarray(alpha, dtype=float)
    out = -2.0 * a1 * np.sin(2.0 * a) - 2.0 * a2 * np.sin(4.0 * a)
    return float(out) if out.ndim == 0 else out


def constant_energy_d2(alpha, k: ElasticConstants, mu: float):
    """d2W/da2 = -4 A1 cos(2a) - 8 A2 cos(4a)."""
    _, a1, a2 = constant_energy_coefficients(k, mu)
    a = np.asarray(alpha, dtype=float)
    out = -4.0 * a1 * np.cos(2.0 * a) - 8.0 * a2 * np.cos(4.0 * a)
    return float(out) if out.ndim == 0 else out


def darboux_scalars(geom: TorusGeometry, theta, alpha, grad_theta, grad_phi):
    """(kappa_t, kappa_n, tau_n, c_n) from the angle and its surface gradient.

    grad_theta/grad_phi are the tangent components of grad_s alpha
    (e.g. from ``fields.discrete_gradient``).  Broadcasts over arrays;
    phi never enters by axisymmetry.  The sign of tau_n is fixed as
    (c1 - c2) sin cos; only its square is ever weighed.
    """
    theta = np.asarray(theta, dtype=float)
    alpha = np.asarray(alpha, dtype=float)
    c1, c2 = principal_curvatures(geom, theta)
    omega = spin_connection_phi(geom, theta)
    ca, sa = np.cos(alpha), np.sin(alpha)
    vt = np.asarray(grad_theta, dtype=float)
    vp = np.asarray(grad_phi, dtype=float) - omega
    kappa_t = -vt * sa + vp * ca
    kappa_n = vt * ca + vp * sa
    tau_n = (c1 - c2) * sa * ca
    c_n = c1 * ca * ca + c2 * sa * sa
    return kappa_t, kappa_n, tau_n, c_n


@dataclass(frozen=True)
class EnergyBreakdown:
    """Total energy plus whichever decomposition produced it.

    General-constant runs fill the four Darboux components; one-constant
    runs fill the Dirichlet / potential / offset trio.  Unused slots
    stay None.
    """

    total: float
    splay: float = None
    twist: float = None
    bend_intrinsic: float = None
    bend_extrinsic: float = None
    dirichlet: float = None
    potential: float = None
    offset: float = None

    CSV_COLUMNS = ("total", "splay", "twist", "bend_intrinsic", "bend_extrinsic",
                   "dirichlet", "potential", "offset")

    def csv_row(self) -> str:
        vals = [getattr(self, name) for name in self.CSV_COLUMNS]
        return ",".join("" if v is None else repr(float(v)) for v in vals)


def _node_weights(fld: AngleField, geom: TorusGeometry):
    g = fld.grid
    theta = g.theta()
    w = area_density(geom, theta)[:, None] * g.d_theta * g.d_phi
    return theta, w


def energy_general(fld: AngleField, geom: TorusGeometry, k: ElasticConstants) -> EnergyBreakdown:
    """Per-node quadrature of the four Darboux energy densities."""
    theta, w = _node_weights(fld, geom)
    gt, gp = discrete_gradient(fld, geom)
    kt, kn, tn, cn = darboux_scalars(geom, theta[:, None], fld.reconstruct(), gt, gp)
    splay = 0.5 * k.k1 * float(np.sum(w * kt * kt))
    twist = 0.5 * k.k2 * float(np.sum(w * tn * tn))
    bend_i = 0.5 * k.k3 * float(np.sum(w * kn * kn))
    bend_e = 0.5 * k.k3 * float(np.sum(w * cn * cn))
    return EnergyBreakdown(
        total=splay + twist + bend_i + bend_e,
        splay=splay, twist=twist, bend_intrinsic=bend_i, bend_extrinsic=bend_e,
    )


def energy_one_constant(fld: AngleField, geom: TorusGeometry, k: float) -> EnergyBreakdown:
    """Dirichlet + curvature-well + offset form of the equal-moduli energy.

    Algebraically identical to ``energy_general`` at k1 = k2 = k3
    (node-centered gradients, exact discrete orthogonality of
    grad_s alpha and the spin connection); the offset is the closed
    form k f(mu).
    """
    theta, w = _node_weights(fld, geom)
    gt, gp = discrete_gradient(fld, geom)
    c1, c2 = principal_curvatures(geom, theta)
    pot_profile = (c1 * c1 - c2 * c2)[:, None]
    dirichlet = 0.5 * k * float(np.sum(w * (gt * gt + gp * gp)))
    potential = 0.25 * k * float(np.sum(w * pot_profile * np.cos(2.0 * fld.reconstruct())))
    offset = k * one_constant_offset(geom.mu)
    return EnergyBreakdown(
        total=dirichlet + potential + offset,
        dirichlet=dirichlet, potential=potential, offset=offset,
    )


def energy_density(fld: AngleField, geom: TorusGeometry, k: ElasticConstants) -> np.ndarray:
    """Pointwise energy density (per unit area) of the four Darboux terms.

    Node-centered gradients; used for snapshot files and plots.
    """
    g = fld.grid
    gt, gp = discrete_gradient(fld, geom)
    kt, kn, tn, cn = darboux_scalars(geom, g.theta()[:, None], fld.reconstruct(), gt, gp)
    return 0.5 * (k.k1 * kt * kt + k.k2 * tn * tn + k.k3 * (kn * kn + cn * cn))


def energy_classical(fld: AngleField, geom: TorusGeometry, k: float) -> float:
    """Covariant one-constant energy: Dirichlet part plus I1/2 offset.

    Constant angles all carry the same value 2 k pi^2 (mu - sqrt(mu^2-1))
    (a degenerate family of equilibria).
    """
    _, w = _node_weights(fld, geom)
    gt, gp = discrete_gradient(fld, geom)
    dirichlet = 0.5 * k * float(np.sum(w * (gt * gt + gp * gp)))
    return dirichlet + k * classical_offset(geom.mu)
