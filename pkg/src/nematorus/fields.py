"""Periodic grid representation of the director angle.

The angle is stored as an explicit winding decomposition

    alpha(theta, phi) = (h_theta * theta + h_phi * phi) / 2 + u(theta, phi)

where (h_theta, h_phi) are the integer line-field winding numbers and
u is exactly 2pi-periodic in both coordinates.  The linear part is
differentiated analytically everywhere, so winding preservation under
evolution is structural rather than emergent, and no unwrapping ever
happens inside a solver.

Grid convention: theta_i = i * 2pi/n_theta, phi_j = j * 2pi/n_phi,
value arrays of shape (n_theta, n_phi), theta the slow index, no
boundary duplication.

Two discrete derivative flavours coexist on purpose:

* ``discrete_gradient`` uses node-centered second-order central
  differences; it feeds pointwise diagnostics (Darboux scalars, CSV
  energy densities).
* ``discrete_laplace_beltrami`` / ``dirichlet_form`` use the
  conservative flux form with the metric weight evaluated at half
  nodes.  The pair satisfies discrete integration by parts *exactly*
  (up to rounding), which is what makes the relaxation module an exact
  gradient flow of its discrete energy.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import AmbiguousJump
from .geometry import TAU, TorusGeometry, area_density, frame_vectors

# Half-pi jumps cannot be attributed to either side of the mod-pi
# reduction; anything this close to the boundary is rejected.
JUMP_TOLERANCE = 1e-6


@dataclass(frozen=True)
class Grid:
    """Uniform periodic (theta, phi) grid."""

    n_theta: int
    n_phi: int

    def __post_init__(self):
        for name, n in (("n_theta", self.n_theta), ("n_phi", self.n_phi)):
            if n < 8 or n % 2 != 0:
                raise ValueError(f"{name} must be even and >= 8, got {n}")

    @property
    def d_theta(self) -> float:
        return TAU / self.n_theta

    @property
    def d_phi(self) -> float:
        return TAU / self.n_phi

    def theta(self) -> np.ndarray:
        return np.arange(self.n_theta) * self.d_theta

    def phi(self) -> np.ndarray:
        return np.arange(self.n_phi) * self.d_phi

    @property
    def shape(self):
        return (self.n_theta, self.n_phi)


@dataclass(frozen=True)
class WindingNumber:
    """Integer pair counting 180-degree turns along a meridian / parallel."""

    h_theta: int
    h_phi: int

    def __post_init__(self):
        for name, h in (("h_theta", self.h_theta), ("h_phi", self.h_phi)):
            if h != int(h):
                raise ValueError(f"{name} must be an integer, got {h}")
        object.__setattr__(self, "h_theta", int(self.h_theta))
        object.__setattr__(self, "h_phi", int(self.h_phi))


@dataclass(eq=False)
class AngleField:
    """Director angle as winding part plus periodic deviation."""

    winding: WindingNumber
    deviation: np.ndarray = field(repr=False)

    def __post_init__(self):
        dev = np.ascontiguousarray(self.deviation, dtype=np.float64)
        if dev.ndim != 2:
            raise ValueError("deviation must be a 2D (n_theta, n_phi) array")
        self.deviation = dev
        self.grid  # validates shape

    @property
    def grid(self) -> Grid:
        return Grid(*self.deviation.shape)

    def reconstruct(self) -> np.ndarray:
        """Angle samples alpha_ij = (h_theta theta_i + h_phi phi_j)/2 + u_ij."""
        g = self.grid
        lin_t = 0.5 * self.winding.h_theta * g.theta()
        lin_p = 0.5 * self.winding.h_phi * g.phi()
        return lin_t[:, None] + lin_p[None, :] + self.deviation

    def copy(self) -> "AngleField":
        return AngleField(self.winding, self.deviation.copy())

    def measure_winding(self, tol: float = JUMP_TOLERANCE) -> WindingNumber:
        """Re-measure the winding from raw samples (round-trip identity)."""
        return measure_winding(self.reconstruct(), tol=tol)


def seed_field(
    grid: Grid,
    winding: WindingNumber,
    base_angle: float = 0.0,
    perturbation_amplitude: float = 0.0,
    rng_seed: int = 0,
) -> AngleField:
    """Initial datum: requested winding, constant base angle, uniform noise.

    The deviation is base_angle + amplitude * U[-1, 1] per node from a
    seeded generator, so seeds are bit-reproducible.
    """
    if perturbation_amplitude < 0.0:
        raise ValueError("perturbation amplitude must be >= 0")
    dev = np.full(grid.shape, float(base_angle))
    if perturbation_amplitude > 0.0:
        rng = np.random.default_rng(rng_seed)
        dev += perturbation_amplitude * rng.uniform(-1.0, 1.0, size=grid.shape)
    return AngleField(winding, dev)


def _loop_winding(samples: np.ndarray, axis: int, tol: float) -> int:
    """Winding along closed loops in `axis`, one per transverse line.

    Adjacent increments are reduced mod pi into (-pi/2, pi/2]; their sum
    around a loop is an exact multiple of pi.  All loops must agree
    (homotopy invariance) or the sampling is too coarse to trust.
    """
    jump = np.roll(samples, -1, axis=axis) - samples
    reduced = jump - math.pi * np.floor(jump / math.pi + 0.5)
    if np.any(np.abs(reduced) >= math.pi / 2.0 - tol):
        raise AmbiguousJump(
            "an adjacent-node jump reduces to ~pi/2 mod pi; "
            "the grid is too coarse for this field"
        )
    totals = reduced.sum(axis=axis) / math.pi
    h = np.rint(totals)
    if np.any(np.abs(totals - h) > 1e-8):
        raise AmbiguousJump("loop sum is not a multiple of pi; field is not periodic mod pi")
    if np.any(h != h.flat[0]):
        raise AmbiguousJump("winding differs between loops; field is not continuous mod pi")
    return int(h.flat[0])


def measure_winding(samples, tol: float = JUMP_TOLERANCE) -> WindingNumber:
    """Line-field winding numbers of raw angle samples on the periodic grid.

    Increments are taken mod pi (not 2pi): the director and its
    opposite describe the same nematic state, so half-turns count.
    """
    samples = np.asarray(samples, dtype=float)
    if samples.ndim != 2:
        raise ValueError("samples must be a 2D (n_theta, n_phi) array")
    h_theta = _loop_winding(samples, axis=0, tol=tol)
    h_phi = _loop_winding(samples, axis=1, tol=tol)
    return WindingNumber(h_theta, h_phi)


def discrete_gradient(fld: AngleField, geom: TorusGeometry):
    """Tangent components of grad_s alpha at the nodes.

    Central differences on the deviation, exact slope for the winding
    part, scaled by 1/r and 1/(R + r cos theta).  Returns (g_theta,
    g_phi) arrays.
    """
    g = fld.grid
    u = fld.deviation
    du_t = (np.roll(u, -1, axis=0) - np.roll(u, 1, axis=0)) / (2.0 * g.d_theta)
    du_p = (np.roll(u, -1, axis=1) - np.roll(u, 1, axis=1)) / (2.0 * g.d_phi)
    width = geom.tube_width(g.theta())[:, None]
    g_theta = (du_t + 0.5 * fld.winding.h_theta) / geom.r
    g_phi = (du_p + 0.5 * fld.winding.h_phi) / width
    return g_theta, g_phi


def discrete_laplace_beltrami(fld: AngleField, geom: TorusGeometry) -> np.ndarray:
    """Surface Laplacian of the angle, conservative flux form.

    Theta direction: (1/(r^2 sqrt g)) D-[ sqrt g_{i+1/2} D+ alpha ],
    which is a second-order central stencil for
    (1/r^2) d2_tt - sin(theta)/(r(R + r cos theta)) d_t.  Phi direction:
    plain central second difference over (R + r cos theta)^2.  The
    winding part enters through its exact edge slope (h_theta/2 per
    unit theta), so constants and pure-phi windings map to zero
    identically and the operator is exactly self-adjoint against
    ``dirichlet_form``.
    """
    g = fld.grid
    u = fld.deviation
    theta = g.theta()
    w = area_density(geom, theta)[:, None]
    w_half = area_density(geom, theta + 0.5 * g.d_theta)[:, None]
    slope_t = (np.roll(u, -1, axis=0) - u) / g.d_theta + 0.5 * fld.winding.h_theta
    flux_t = w_half * slope_t
    lap_t = (flux_t - np.roll(flux_t, 1, axis=0)) / (geom.r**2 * g.d_theta * w)
    width2 = geom.tube_width(theta)[:, None] ** 2
    lap_p = (np.roll(u, -1, axis=1) - 2.0 * u + np.roll(u, 1, axis=1)) / (g.d_phi**2 * width2)
    return lap_t + lap_p


def dirichlet_form(u_fld: AngleField, v_fld: AngleField, geom: TorusGeometry) -> float:
    """Discrete Dirichlet pairing  sum grad_s u . grad_s v  sqrt(g) dth dph.

    Edge-based: forward differences weighted by the metric at theta
    half nodes, so that  sum (Lap u) v sqrt(g) == -dirichlet_form(u, v)
    exactly.  Winding slopes of both fields are included.
    """
    if u_fld.grid != v_fld.grid:
        raise ValueError("fields must share a grid")
    g = u_fld.grid
    theta = g.theta()
    w = area_density(geom, theta)[:, None]
    w_half = area_density(geom, theta + 0.5 * g.d_theta)[:, None]
    width = geom.tube_width(theta)[:, None]

    def slopes(fld):
        u = fld.deviation
        s_t = ((np.roll(u, -1, axis=0) - u) / g.d_theta + 0.5 * fld.winding.h_theta) / geom.r
        s_p = ((np.roll(u, -1, axis=1) - u) / g.d_phi + 0.5 * fld.winding.h_phi) / width
        return s_t, s_p

    ut, up = slopes(u_fld)
    vt, vp = slopes(v_fld)
    total = np.sum(w_half * ut * vt) + np.sum(w * up * vp)
    return float(total * g.d_theta * g.d_phi)


FIELD_CSV_HEADER = "theta,phi,alpha,u,nx,ny,nz,energy_density"


def write_field_csv(path, fld: AngleField, stamp: str, energy_density=None) -> None:
    """Field snapshot: one row per node, theta-major, LF endings.

    The director is expanded to Cartesian components through the local
    frame.  `stamp` is the reproducibility comment line (without the
    leading '#').  Missing energy densities are written as 0.
    """
    g = fld.grid
    alpha = fld.reconstruct()
    th = np.broadcast_to(g.theta()[:, None], g.shape)
    ph = np.broadcast_to(g.phi()[None, :], g.shape)
    e_t, e_p, _ = frame_vectors(th, ph)
    director = np.cos(alpha)[..., None] * e_t + np.sin(alpha)[..., None] * e_p
    if energy_density is None:
        energy_density = np.zeros(g.shape)
    cols = [th, ph, alpha, fld.deviation,
            director[..., 0], director[..., 1], director[..., 2], energy_density]
    with open(path, "w", newline="") as f:
        f.write(f"# {stamp}\n")
        f.write(FIELD_CSV_HEADER + "\n")
        flat = [np.asarray(c).ravel() for c in cols]
        for row in zip(*flat):
            f.write(",".join(repr(float(x)) for x in row) + "\n")


def read_field_csv(path):
    """Read back a snapshot written by ``write_field_csv``.

    Returns (grid, alpha, u, director, energy_density) arrays.
    """
    rows = []
    with open(path) as f:
        for line in f:
            line = line.strip()
            if not line or line.startswith("#") or line.startswith("theta"):
                continue
            rows.append([float(x) for x in line.split(",")])
    arr = np.asarray(rows)
    n_theta = len(np.unique(arr[:, 0]))
    n_phi = arr.shape[0] // n_theta
    shape = (n_theta, n_phi)
    grid = Grid(n_theta, n_phi)
    alpha = arr[:, 2].reshape(shape)
    u = arr[:, 3].reshape(shape)
    director = arr[:, 4:7].reshape(shape + (3,))
    density = arr[:, 7].reshape(shape)
    return grid, alpha, u, director, density
