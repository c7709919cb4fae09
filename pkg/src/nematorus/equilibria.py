"""Critical points of the constant-angle energy and their stability.

With W(a) = A0 + A1 cos(2a) + A2 cos^2(2a), the critical points in the
representative interval (-pi/2, pi/2] are the meridian alignment a = 0,
the parallel alignment a = pi/2, and, when A2 != 0 and |A1/(2 A2)| <= 1,
the helix pair a = +/- arccos(-A1/(2A2))/2.  In terms of the moduli the
helix angle is

    a_h = +/- arccos( (B k3 + C k1) / (mu^2 (k2 - k3)) ) / 2,
    B = mu sqrt(mu^2 - 1) - 1,   C = B - mu^2 + 2.

Everything is closed form; no generic root finding is used (a dense
scan exists only as a test oracle).
"""

import math
from dataclasses import dataclass

from .energy import (
    ElasticConstants,
    constant_energy,
    constant_energy_coefficients,
    constant_energy_d2,
    moments,
)
from .errors import InvalidRatio

# |W''| below this is reported as degenerate; double-precision closed
# forms are exact to ~1e-12, so the band is safely wide.
DEGENERACY_TOL = 1e-9

KIND_MERIDIAN = "meridian"
KIND_PARALLEL = "parallel"
KIND_HELIX_PLUS = "helix_plus"
KIND_HELIX_MINUS = "helix_minus"

STAB_GLOBAL_MIN = "global_min"
STAB_LOCAL_MIN = "local_min"
STAB_LOCAL_MAX = "local_max"
STAB_GLOBAL_MAX = "global_max"
STAB_DEGENERATE = "degenerate"


@dataclass(frozen=True)
class ConstantEquilibrium:
    alpha: float
    kind: str
    energy: float
    stability: str


def helix_argument(k: ElasticConstants, mu: float) -> float:
    """Argument of the arccos in the helix branch; meaningful in [-1, 1].

    Undefined at k2 == k3 (the cos^2 term vanishes and only the
    meridian/parallel pair survives).
    """
    if k.k2 == k.k3:
        raise ZeroDivisionError("helix branch undefined at k2 == k3")
    s = math.sqrt(mu * mu - 1.0)
    b = mu * s - 1.0
    c = b - mu * mu + 2.0
    return (b * k.k3 + c * k.k1) / (mu * mu * (k.k2 - k.k3))


def constant_equilibria(k: ElasticConstants, mu: float) -> list:
    """All constant-angle critical points with stability labels.

    Always contains the meridian and parallel alignments; the helix
    pair appears iff k2 != k3 and the arccos argument lies in [-1, 1].
    Global labels compare energies across the returned set, which
    carries the extrema of the trig polynomial.
    """
    if not mu > 1.0:
        raise InvalidRatio(f"aspect ratio must exceed 1, got {mu}")
    candidates = [(0.0, KIND_MERIDIAN), (math.pi / 2.0, KIND_PARALLEL)]
    if k.k2 != k.k3:
        arg = helix_argument(k, mu)
        if -1.0 <= arg <= 1.0:
            a_h = 0.5 * math.acos(arg)
            candidates.append((a_h, KIND_HELIX_PLUS))
            candidates.append((-a_h, KIND_HELIX_MINUS))

    entries = []
    for alpha, kind in candidates:
        entries.append((alpha, kind,
                        constant_energy(alpha, k, mu),
                        constant_energy_d2(alpha, k, mu)))
    energies = [e for _, _, e, _ in entries]
    scale = max(abs(e) for e in energies) or 1.0
    e_min, e_max = min(energies), max(energies)

    out = []
    for alpha, kind, energy, w2 in entries:
        if abs(w2) < DEGENERACY_TOL:
            stability = STAB_DEGENERATE
        elif w2 > 0.0:
            stability = STAB_GLOBAL_MIN if energy <= e_min + 1e-12 * scale else STAB_LOCAL_MIN
        else:
            stability = STAB_GLOBAL_MAX if energy >= e_max - 1e-12 * scale else STAB_LOCAL_MAX
        out.append(ConstantEquilibrium(alpha=alpha, kind=kind, energy=energy, stability=stability))
    return out


def stability_root_k2(k1: float, k3: float, mu: float, branch: str) -> float:
    """k2 at which W'' vanishes at the meridian ('meridian') or parallel
    ('parallel') alignment, for general k1, k3.

    W''(0) = -4 A1 - 8 A2 and W''(pi/2) = 4 A1 - 8 A2 are linear in k2
    through A2, so the roots are exact.
    """
    m = moments(mu)
    a1 = (k1 - k3) * m.I1 / 4.0 + k3 * (m.I2 - m.I3) / 4.0
    if branch == "meridian":
        return k3 + 4.0 * a1 / (m.I2 + m.I3)
    if branch == "parallel":
        return k3 - 4.0 * a1 / (m.I2 + m.I3)
    raise ValueError(f"branch must be 'meridian' or 'parallel', got {branch!r}")


def critical_k2(mu: float):
    """Thresholds (xi1, xi2) of the twist modulus at k1 = k3 = 1.

    xi1 = 2 sqrt(mu^2 - 1)/mu flips the stability of the meridian
    alignment, xi2 = 2 - xi1 that of the parallel one; they merge at
    mu = 2/sqrt(3).
    """
    if not mu > 1.0:
        raise InvalidRatio(f"aspect ratio must exceed 1, got {mu}")
    xi1 = 2.0 * math.sqrt(mu * mu - 1.0) / mu
    return xi1, 2.0 - xi1


REGIME_MERIDIAN = "meridian_preferred"
REGIME_DEGENERATE = "degenerate"
REGIME_PARALLEL = "parallel_preferred"


@dataclass(frozen=True)
class RegimeReport:
    """One-constant regime classification for a given aspect ratio."""

    regime: str
    parallel_global_all_fields: bool
    nonconstant_expected: bool
    description: str

    def __str__(self):
        return self.description


def regime_report(k: ElasticConstants, mu: float, mu_star: float = 1.52) -> RegimeReport:
    """Classify the constant-angle landscape at equal moduli.

    mu_star is the numerically determined ratio below which the
    relaxed minimizer is nonconstant (see relaxation.find_critical_mu);
    the default is the measured value for the standard setup.
    """
    if not mu > 1.0:
        raise InvalidRatio(f"aspect ratio must exceed 1, got {mu}")
    m = moments(mu)
    _, a1, _ = constant_energy_coefficients(k, mu)
    degenerate = abs(m.I2 - m.I3) < 1e-12 * (m.I2 + m.I3)
    if degenerate:
        regime = REGIME_DEGENERATE
        head = "constant-angle energy is angle independent (I2 == I3)"
    elif a1 < 0.0:
        regime = REGIME_MERIDIAN
        head = "meridian alignment beats parallel among constants"
    else:
        regime = REGIME_PARALLEL
        head = "parallel alignment beats meridian among constants"
    parallel_global = mu >= 2.0
    nonconstant = mu < mu_star
    notes = []
    if parallel_global:
        notes.append("parallel alignment is the global minimizer over all fields "
                     "(unique up to rotations of m*pi)")
    if nonconstant:
        notes.append(f"nonconstant minimizer expected (mu < mu* ~ {mu_star})")
    description = f"mu={mu:g}: {head}"
    if notes:
        description += "; " + "; ".join(notes)
    return RegimeReport(
        regime=regime,
        parallel_global_all_fields=parallel_global,
        nonconstant_expected=nonconstant,
        description=description,
    )
