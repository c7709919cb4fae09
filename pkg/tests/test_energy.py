import math

import numpy as np
import pytest

from nematorus import (
    AngleField,
    ElasticConstants,
    Grid,
    InvalidConstants,
    InvalidRatio,
    TorusGeometry,
    WindingNumber,
    constant_energy,
    constant_energy_coefficients,
    darboux_scalars,
    energy_classical,
    energy_general,
    energy_one_constant,
    moments,
    near_hole_density,
    one_constant_offset,
    seed_field,
    surface_gradient_matrix,
    willmore,
)
from nematorus.energy import DEGENERATE_RATIO
from nematorus.geometry import SurfacePoint

TAU = 2.0 * math.pi
PI2 = math.pi**2


def moment_quadrature(mu, n=20001):
    """Trapezoid over theta (exact in phi) of the moment integrands.

    Independent oracle for the closed forms; spectrally accurate on the
    smooth periodic integrands.
    """
    theta = np.linspace(0.0, TAU, n)
    w = mu + np.cos(theta)
    i1 = TAU * np.trapezoid(np.sin(theta) ** 2 / w, theta)
    i2 = TAU * np.trapezoid(w, theta)
    i3 = TAU * np.trapezoid(np.cos(theta) ** 2 / w, theta)
    return i1, i2, i3


def constant_energy_quadrature(alpha, k, mu, n=4001):
    """Direct quadrature of the four energy densities at constant angle."""
    theta = np.linspace(0.0, TAU, n)
    w = mu + np.cos(theta)  # sqrt(g)/r^2 in r = 1 units
    omega = np.sin(theta) / w
    c1 = np.ones_like(theta)
    c2 = np.cos(theta) / w
    ca, sa = math.cos(alpha), math.sin(alpha)
    kt2 = (omega * ca) ** 2
    kn2 = (omega * sa) ** 2
    tn2 = ((c1 - c2) * sa * ca) ** 2
    cn2 = (c1 * ca**2 + c2 * sa**2) ** 2
    density = 0.5 * (k.k1 * kt2 + k.k2 * tn2 + k.k3 * (kn2 + cn2))
    return TAU * np.trapezoid(density * w, theta)


class TestMoments:
    @pytest.mark.parametrize("mu", [1.05, 1.1547, 1.25, 1.5, 1.8, 2.0, 3.0, 10.0])
    def test_closed_form_vs_quadrature(self, mu):
        m = moments(mu)
        q1, q2, q3 = moment_quadrature(mu)
        assert m.I1 == pytest.approx(q1, rel=1e-10)
        assert m.I2 == pytest.approx(q2, rel=1e-10)
        assert m.I3 == pytest.approx(q3, rel=1e-10)

    def test_mu2_values(self):
        m = moments(2.0)
        assert m.I1 == pytest.approx(4 * PI2 * (2 - math.sqrt(3.0)), rel=1e-15)
        assert m.I1 == pytest.approx(10.5782, abs=1e-3)
        assert m.I2 == pytest.approx(78.9568, abs=1e-3)
        assert m.I3 == pytest.approx(12.2147, abs=1e-3)

    def test_degenerate_ratio_equalizes_I2_I3(self):
        m = moments(DEGENERATE_RATIO)
        assert m.I2 == pytest.approx(m.I3, rel=1e-14)
        assert m.I2 == pytest.approx(45.586, abs=2e-3)

    def test_large_mu_asymptotics(self):
        m = moments(100.0)
        assert m.I1 * 100.0 == pytest.approx(2 * PI2, rel=0.01)

    def test_positive_and_validated(self):
        with pytest.raises(InvalidRatio):
            moments(1.0)
        with pytest.raises(InvalidRatio):
            moments(0.3)
        for mu in (1.01, 2.0, 50.0):
            m = moments(mu)
            assert m.I1 > 0 and m.I2 > 0 and m.I3 > 0


class TestConstantEnergy:
    def test_random_tuples_match_quadrature(self, rng):
        for _ in range(100):
            k = ElasticConstants(*rng.uniform(0.2, 3.0, 3))
            mu = rng.uniform(1.05, 4.0)
            alpha = rng.uniform(-math.pi, math.pi)
            w = constant_energy(alpha, k, mu)
            assert w == pytest.approx(constant_energy_quadrature(alpha, k, mu), rel=1e-8)

    def test_pi_periodicity(self, rng):
        k = ElasticConstants(1.0, 0.7, 1.3)
        for alpha in rng.uniform(-2, 2, 10):
            assert constant_energy(alpha, k, 1.6) == pytest.approx(
                constant_energy(alpha + math.pi, k, 1.6), rel=1e-14)

    def test_degenerate_ratio_flat(self):
        k = ElasticConstants.one_constant(1.0)
        alphas = np.linspace(-math.pi / 2, math.pi / 2, 721)
        vals = constant_energy(alphas, k, DEGENERATE_RATIO)
        assert vals.max() - vals.min() < 1e-10
        m = moments(DEGENERATE_RATIO)
        assert vals[0] == pytest.approx(m.I1 / 2 + (m.I2 + m.I3) / 4, rel=1e-12)
        assert vals[0] == pytest.approx(34.19, abs=1e-2)

    def test_mu18_meridian_vs_parallel(self):
        k = ElasticConstants.one_constant(1.0)
        m = moments(1.8)
        w_p = constant_energy(math.pi / 2, k, 1.8)
        w_m = constant_energy(0.0, k, 1.8)
        assert w_p == pytest.approx(m.I1 / 2 + m.I3 / 2, rel=1e-12)
        assert w_m == pytest.approx(m.I1 / 2 + m.I2 / 2, rel=1e-12)
        assert w_p == pytest.approx(13.190, abs=2e-3)
        assert w_m == pytest.approx(41.519, abs=2e-3)
        assert w_p < w_m

    def test_invalid_inputs(self):
        with pytest.raises(InvalidRatio):
            constant_energy(0.1, ElasticConstants.one_constant(1.0), 0.9)
        with pytest.raises(InvalidConstants):
            ElasticConstants(1.0, -0.5, 1.0)


class TestDarbouxScalars:
    def test_meridian_alignment(self):
        geom = TorusGeometry(2.0, 1.0)
        for th in (0.0, 1.0, 2.5):
            kt, kn, tn, cn = darboux_scalars(geom, th, 0.0, 0.0, 0.0)
            assert tn == 0.0
            assert cn == pytest.approx(1.0, rel=1e-15)

    def test_parallel_alignment_at_tube_top(self):
        geom = TorusGeometry(2.0, 1.0)
        kt, kn, tn, cn = darboux_scalars(geom, math.pi / 2, math.pi / 2, 0.0, 0.0)
        assert cn == pytest.approx(0.0, abs=1e-15)
        assert kt == pytest.approx(0.0, abs=1e-15)
        assert kn == pytest.approx(-0.5, abs=1e-15)

    def test_frobenius_identity_random(self, rng):
        geom = TorusGeometry(1.35, 1.0)
        for _ in range(200):
            th = rng.uniform(0, TAU)
            alpha = rng.uniform(-4, 4)
            gt, gp = rng.uniform(-3, 3, 2)
            kt, kn, tn, cn = darboux_scalars(geom, th, alpha, gt, gp)
            width = geom.R + geom.r * math.cos(th)
            m = surface_gradient_matrix(geom, SurfacePoint(th, 0.0), alpha,
                                        gt * geom.r, gp * width)
            assert kt**2 + kn**2 + tn**2 + cn**2 == pytest.approx(
                float(np.sum(m * m)), rel=1e-12)


def random_field(grid, rng, h=(0, 0), scale=0.3):
    return AngleField(WindingNumber(*h), rng.uniform(-scale, scale, grid.shape))


class TestEnergyGeneral:
    def test_constant_parallel_matches_closed_form_256(self):
        geom = TorusGeometry.from_ratio(1.8)
        fld = seed_field(Grid(256, 256), WindingNumber(0, 0), math.pi / 2)
        k = ElasticConstants.one_constant(1.0)
        br = energy_general(fld, geom, k)
        assert br.total == pytest.approx(constant_energy(math.pi / 2, k, 1.8), rel=1e-6)
        assert br.total == pytest.approx(13.190, abs=2e-3)

    def test_breakdown_sums(self, rng):
        geom = TorusGeometry.from_ratio(1.5)
        k = ElasticConstants(1.2, 0.6, 0.9)
        fld = random_field(Grid(32, 32), rng, h=(1, 1))
        br = energy_general(fld, geom, k)
        total = br.splay + br.twist + br.bend_intrinsic + br.bend_extrinsic
        assert br.total == pytest.approx(total, abs=1e-10)

    def test_twist_plus_extrinsic_closed_form(self):
        # at k2 == k3 the tau^2 + c_n^2 integral collapses to
        # k (I2 + I3)/4 + k (I2 - I3) cos(2a)/4 for constant angles
        geom = TorusGeometry.from_ratio(1.6)
        m = moments(1.6)
        k = ElasticConstants(0.7, 1.3, 1.3)
        for alpha in (0.0, 0.4, 1.1, math.pi / 2):
            fld = seed_field(Grid(192, 8), WindingNumber(0, 0), alpha)
            br = energy_general(fld, geom, k)
            expected = 1.3 * ((m.I2 + m.I3) / 4 + (m.I2 - m.I3) * math.cos(2 * alpha) / 4)
            assert br.twist + br.bend_extrinsic == pytest.approx(expected, rel=1e-8)

    def test_quadrature_grid_stability(self, rng):
        geom = TorusGeometry.from_ratio(1.4)
        k = ElasticConstants.one_constant(1.0)
        g1 = Grid(64, 64)
        theta = g1.theta()[:, None]
        phi = g1.phi()[None, :]
        u1 = 0.3 * np.sin(theta) * np.cos(phi)
        e1 = energy_general(AngleField(WindingNumber(0, 0), u1), geom, k).total
        g2 = Grid(128, 128)
        theta2 = g2.theta()[:, None]
        phi2 = g2.phi()[None, :]
        u2 = 0.3 * np.sin(theta2) * np.cos(phi2)
        e2 = energy_general(AngleField(WindingNumber(0, 0), u2), geom, k).total
        assert abs(e2 - e1) / abs(e1) < 1e-4  # smooth field, second-order stencils


class TestEnergyOneConstant:
    def test_parallel_at_mu18(self):
        geom = TorusGeometry.from_ratio(1.8)
        m = moments(1.8)
        fld = seed_field(Grid(128, 16), WindingNumber(0, 0), math.pi / 2)
        br = energy_one_constant(fld, geom, 1.0)
        assert br.potential == pytest.approx(-(m.I2 - m.I3) / 4, rel=1e-10)
        assert br.potential == pytest.approx(-14.165, abs=2e-3)
        assert br.offset == pytest.approx(27.354, abs=2e-3)
        assert br.total == pytest.approx(13.190, abs=2e-3)
        assert br.dirichlet == 0.0

    def test_degenerate_ratio_constant_independent(self):
        geom = TorusGeometry.from_ratio(DEGENERATE_RATIO)
        vals = []
        for alpha in (0.0, 0.3, 0.8, math.pi / 2):
            fld = seed_field(Grid(96, 8), WindingNumber(0, 0), alpha)
            vals.append(energy_one_constant(fld, geom, 1.0).total)
        assert max(vals) - min(vals) < 1e-9

    def test_matches_energy_general_on_random_fields(self, rng):
        geom = TorusGeometry.from_ratio(1.45)
        k = ElasticConstants.one_constant(0.8)
        for h in ((0, 0), (1, 2), (-1, 0)):
            fld = random_field(Grid(64, 64), rng, h=h)
            a = energy_general(fld, geom, k).total
            b = energy_one_constant(fld, geom, 0.8).total
            assert a == pytest.approx(b, rel=1e-10)

    def test_offset_triple_identity(self):
        for mu in np.linspace(1.05, 10.0, 25):
            m = moments(mu)
            f = one_constant_offset(mu)
            assert f == pytest.approx(m.I1 / 2 + (m.I2 + m.I3) / 4, rel=1e-12)
            assert f == pytest.approx(
                PI2 * (2 * mu + (2 - mu * mu) / math.sqrt(mu * mu - 1)), rel=1e-12)
            q1, q2, q3 = moment_quadrature(mu)
            assert f == pytest.approx(q1 / 2 + (q2 + q3) / 4, rel=1e-10)


class TestEnergyClassical:
    @pytest.mark.parametrize("mu,value", [(1.25, None), (1.8, 5.988), (2.0, 5.289)])
    def test_constant_degeneracy(self, mu, value):
        geom = TorusGeometry.from_ratio(mu)
        vals = []
        for alpha in np.linspace(-1.5, 1.5, 11):
            fld = seed_field(Grid(64, 8), WindingNumber(0, 0), alpha)
            vals.append(energy_classical(fld, geom, 1.0))
        assert max(vals) - min(vals) < 1e-12
        closed = 2 * PI2 * (mu - math.sqrt(mu * mu - 1.0))
        assert vals[0] == pytest.approx(closed, rel=1e-10)
        if value is not None:
            assert vals[0] == pytest.approx(value, abs=1e-3)

    def test_perturbation_costs_energy(self):
        geom = TorusGeometry.from_ratio(1.5)
        g = Grid(64, 64)
        base = seed_field(g, WindingNumber(0, 0), 0.4)
        bumped = AngleField(WindingNumber(0, 0),
                            base.deviation + 0.01 * np.sin(g.theta())[:, None])
        assert energy_classical(bumped, geom, 1.0) > energy_classical(base, geom, 1.0)

    def test_quadrature_cross_check(self, rng):
        # Dirichlet + closed offset vs direct |grad alpha - Omega|^2 sum
        geom = TorusGeometry.from_ratio(1.6)
        g = Grid(128, 128)
        fld = random_field(g, rng, scale=0.05)
        from nematorus.fields import discrete_gradient
        from nematorus.geometry import area_density, spin_connection_phi
        gt, gp = discrete_gradient(fld, geom)
        omega = spin_connection_phi(geom, g.theta())[:, None]
        w = area_density(geom, g.theta())[:, None]
        direct = 0.5 * float(np.sum(w * (gt**2 + (gp - omega) ** 2))) * g.d_theta * g.d_phi
        assert energy_classical(fld, geom, 1.0) == pytest.approx(direct, rel=1e-10)


class TestWillmore:
    def test_minimum_at_sqrt2(self):
        assert willmore(math.sqrt(2.0)) == pytest.approx(2 * PI2, rel=1e-14)
        eps = 1e-4
        w0 = willmore(math.sqrt(2.0))
        assert willmore(math.sqrt(2.0) + eps) > w0
        assert willmore(math.sqrt(2.0) - eps) > w0

    def test_moment_identity(self):
        for mu in (1.05, 1.3, 2.0, 7.0):
            m = moments(mu)
            assert willmore(mu) == pytest.approx((m.I2 + m.I3) / 4, rel=1e-12)

    def test_divergence_toward_unit_ratio(self):
        assert willmore(1.0001) > 100.0
        assert willmore(1.001) > willmore(1.01) > willmore(1.1) > willmore(math.sqrt(2.0))
        with pytest.raises(InvalidRatio):
            willmore(1.0)


class TestNearHoleDensity:
    def test_exact_values(self):
        assert near_hole_density(1.5, math.pi / 2) == pytest.approx(1.5, rel=1e-14)
        assert near_hole_density(2.0, math.pi / 2) == pytest.approx(0.0, abs=1e-14)
        assert near_hole_density(1.1, math.pi / 2) == pytest.approx(9.9, rel=1e-12)

    def test_formula_reduction(self):
        for mu in (1.2, 1.5, 1.9):
            assert near_hole_density(mu, math.pi / 2) == pytest.approx(
                mu * (2 - mu) / (mu - 1), rel=1e-13)

    def test_monotone_divergence(self):
        mus = np.linspace(1.02, 1.98, 40)
        vals = [near_hole_density(mu, math.pi / 2) for mu in mus]
        assert all(a > b for a, b in zip(vals, vals[1:]))
        assert vals[0] > 40.0


class TestCrossIdentities:
    def test_classical_is_alpha_independent_but_general_is_not(self):
        geom = TorusGeometry.from_ratio(1.5)
        k = ElasticConstants.one_constant(1.0)
        cl, ge = [], []
        for alpha in np.linspace(0, math.pi / 2, 7):
            fld = seed_field(Grid(64, 8), WindingNumber(0, 0), alpha)
            cl.append(energy_classical(fld, geom, 1.0))
            ge.append(energy_general(fld, geom, k).total)
        assert max(cl) - min(cl) < 1e-12
        assert max(ge) - min(ge) > 1.0

    def test_coefficient_formulas(self):
        k = ElasticConstants(1.1, 0.5, 0.8)
        m = moments(1.7)
        a0, a1, a2 = constant_energy_coefficients(k, 1.7)
        assert a0 == pytest.approx((k.k1 + k.k3) * m.I1 / 4 + (k.k2 + k.k3) * (m.I2 + m.I3) / 8)
        assert a1 == pytest.approx((k.k1 - k.k3) * m.I1 / 4 + k.k3 * (m.I2 - m.I3) / 4)
        assert a2 == pytest.approx((k.k3 - k.k2) * (m.I2 + m.I3) / 8)
