import math

import numpy as np
import pytest

import nematorus.relaxation as relaxation
from nematorus import (
    AngleField,
    BracketInvalid,
    ElasticConstants,
    FlowParams,
    Grid,
    StepUnstable,
    TorusGeometry,
    WindingNumber,
    auto_dt,
    constant_energy,
    deviation_amplitude,
    el_residual,
    energy_general,
    find_critical_mu,
    flow_general,
    flow_one_constant,
    seed_field,
    winding_table,
)

TAU = 2.0 * math.pi


def monotone(history, slack=1e-12):
    vals = [e for _, e in history]
    return all(b <= a + slack for a, b in zip(vals, vals[1:]))


class TestFlowParams:
    def test_validation(self):
        with pytest.raises(ValueError):
            FlowParams(dt=-1.0)
        with pytest.raises(ValueError):
            FlowParams(dt="later")
        with pytest.raises(ValueError):
            FlowParams(tol=0.0)
        with pytest.raises(ValueError):
            FlowParams(max_steps=0)

    def test_auto_dt_formula(self):
        geom = TorusGeometry.from_ratio(1.5)
        grid = Grid(64, 32)
        h = min(grid.d_theta, 0.5 * grid.d_phi)
        assert auto_dt(geom, grid, 2.0) == pytest.approx(0.2 * h * h / 2.0)


class TestFlowOneConstant:
    def test_parallel_datum_is_stationary(self):
        geom = TorusGeometry.from_ratio(1.5)
        f0 = seed_field(Grid(32, 32), WindingNumber(0, 0), math.pi / 2)
        final, rep = flow_one_constant(f0, geom, FlowParams(tol=1e-8, snapshot_every=0))
        assert rep.converged
        assert rep.steps <= 1
        assert np.array_equal(final.deviation, f0.deviation)

    def test_meridian_datum_is_stationary(self):
        geom = TorusGeometry.from_ratio(1.2)
        f0 = seed_field(Grid(32, 32), WindingNumber(0, 0), 0.0)
        final, rep = flow_one_constant(f0, geom, FlowParams(tol=1e-8, snapshot_every=0))
        assert rep.converged and rep.steps == 0

    def test_fig5_setup_nonconstant_limit(self):
        # mu = 1.4 from pi/4: meridian-aligned strip at the hole,
        # parallel alignment at the outer equator, smooth transition
        geom = TorusGeometry.from_ratio(1.4)
        f0 = seed_field(Grid(64, 64), WindingNumber(0, 0), math.pi / 4)
        params = FlowParams(tol=1e-8, max_steps=500_000, snapshot_every=5000)
        final, rep = flow_one_constant(f0, geom, params)
        assert rep.converged
        assert monotone(rep.energy_history)
        alpha = final.reconstruct()
        i_hole = final.grid.n_theta // 2
        assert abs(alpha[0, 0] - math.pi / 2) < 0.15      # outer equator ~ parallel
        assert alpha[i_hole, 0] < 0.75                     # hole rotated toward meridian
        assert np.max(np.abs(alpha - alpha[:, :1])) < 1e-7  # phi independent
        assert rep.final_winding == WindingNumber(0, 0)
        assert rep.balance_defect / abs(rep.energy_history[0][1]) < 1e-3
        # beats the best constant
        k1 = ElasticConstants.one_constant(1.0)
        assert rep.final_energy < constant_energy(math.pi / 2, k1, 1.4)

    def test_large_ratio_relaxes_to_parallel(self):
        geom = TorusGeometry.from_ratio(2.5)
        f0 = seed_field(Grid(48, 48), WindingNumber(0, 0), math.pi / 4)
        final, rep = flow_one_constant(f0, geom, FlowParams(tol=1e-8, max_steps=500_000,
                                                            snapshot_every=0))
        assert rep.converged
        assert np.max(np.abs(final.reconstruct() - math.pi / 2)) < 1e-6

    def test_balance_defect_halves_with_dt(self):
        geom = TorusGeometry.from_ratio(1.5)
        grid = Grid(48, 48)
        f0 = seed_field(grid, WindingNumber(0, 0), math.pi / 4)
        dt0 = auto_dt(geom, grid, 1.0)
        defects = []
        for dt in (dt0, dt0 / 2.0):
            _, rep = flow_one_constant(f0, geom, FlowParams(dt=dt, tol=1e-8,
                                                            max_steps=2_000_000,
                                                            snapshot_every=0))
            assert rep.converged
            defects.append(rep.balance_defect)
        ratio = defects[1] / defects[0]
        assert 0.4 <= ratio <= 0.6

    def test_winding_preserved_structurally_and_measured(self):
        geom = TorusGeometry.from_ratio(1.8)
        f0 = seed_field(Grid(48, 48), WindingNumber(1, 2), 0.0, 0.05, rng_seed=9)
        final, rep = flow_one_constant(f0, geom, FlowParams(tol=1e-7, max_steps=500_000,
                                                            snapshot_every=0))
        assert rep.converged
        assert final.winding == WindingNumber(1, 2)
        assert rep.final_winding == WindingNumber(1, 2)

    def test_meridian_columns_agree_after_relaxation(self):
        geom = TorusGeometry.from_ratio(1.8)
        f0 = seed_field(Grid(48, 48), WindingNumber(1, 0), 0.0, 0.05, rng_seed=4)
        final, rep = flow_one_constant(f0, geom, FlowParams(tol=1e-7, max_steps=500_000,
                                                            snapshot_every=0))
        samples = final.reconstruct()
        counts = []
        for j in (0, final.grid.n_phi // 2):
            jumps = np.roll(samples[:, j], -1) - samples[:, j]
            red = jumps - math.pi * np.floor(jumps / math.pi + 0.5)
            counts.append(round(red.sum() / math.pi))
        assert counts[0] == counts[1] == 1

    def test_explicit_unstable_dt_raises(self):
        geom = TorusGeometry.from_ratio(1.5)
        f0 = seed_field(Grid(32, 32), WindingNumber(0, 0), math.pi / 4, 0.3, rng_seed=1)
        with pytest.raises(StepUnstable):
            flow_one_constant(f0, geom, FlowParams(dt=0.5, tol=1e-8, max_steps=1000,
                                                   snapshot_every=0))

    def test_auto_mode_halves_and_recovers(self, monkeypatch):
        geom = TorusGeometry.from_ratio(1.5)
        grid = Grid(32, 32)
        stable = auto_dt(geom, grid, 1.0)
        monkeypatch.setattr(relaxation, "auto_dt", lambda *a: stable * 11.0)
        f0 = seed_field(grid, WindingNumber(0, 0), math.pi / 4, 0.3, rng_seed=1)
        final, rep = flow_one_constant(f0, geom, FlowParams(tol=1e-7, max_steps=500_000,
                                                            snapshot_every=0))
        assert rep.converged
        assert rep.dt_halvings >= 1
        assert rep.dt <= stable * 11.0 / 2.0

    def test_determinism(self):
        geom = TorusGeometry.from_ratio(1.6)
        runs = []
        for _ in range(2):
            f0 = seed_field(Grid(32, 32), WindingNumber(0, 0), math.pi / 4, 0.1, rng_seed=5)
            final, rep = flow_one_constant(f0, geom, FlowParams(tol=1e-7, max_steps=200_000,
                                                                snapshot_every=1000))
            runs.append((final.deviation.copy(), rep.final_energy, tuple(rep.energy_history)))
        assert np.array_equal(runs[0][0], runs[1][0])
        assert runs[0][1] == runs[1][1]
        assert runs[0][2] == runs[1][2]

    def test_fig5_amplitude_grows_as_mu_drops(self):
        amps = {}
        for mu in (1.2, 1.4):
            geom = TorusGeometry.from_ratio(mu)
            f0 = seed_field(Grid(64, 64), WindingNumber(0, 0), math.pi / 4)
            final, rep = flow_one_constant(f0, geom, FlowParams(tol=1e-7, max_steps=2_000_000,
                                                                snapshot_every=0))
            assert rep.converged
            alpha = final.reconstruct()
            amps[mu] = float(np.max(np.abs(alpha - math.pi / 2)))
        assert amps[1.2] > amps[1.4]


class TestElResidual:
    def test_zero_at_symmetric_constants(self):
        geom = TorusGeometry.from_ratio(1.5)
        for base in (0.0, math.pi / 2):
            fld = seed_field(Grid(32, 32), WindingNumber(0, 0), base)
            res, mx = el_residual(fld, geom, 1.0)
            assert mx < 1e-14

    def test_pi_quarter_gives_curvature_gap(self):
        geom = TorusGeometry.from_ratio(1.5)
        fld = seed_field(Grid(32, 32), WindingNumber(0, 0), math.pi / 4)
        res, mx = el_residual(fld, geom, 2.0)
        theta = fld.grid.theta()
        c2 = np.cos(theta) / (geom.R + np.cos(theta))
        expected = 0.5 * 2.0 * (1.0 - c2**2)
        np.testing.assert_allclose(res, expected[:, None] * np.ones((1, 32)), atol=1e-12)

    def test_converged_flow_satisfies_tolerance(self):
        geom = TorusGeometry.from_ratio(1.4)
        f0 = seed_field(Grid(48, 48), WindingNumber(0, 0), math.pi / 4)
        final, rep = flow_one_constant(f0, geom, FlowParams(tol=1e-8, max_steps=500_000,
                                                            snapshot_every=0))
        assert rep.converged
        _, mx = el_residual(final, geom, 1.0)
        assert mx < 1e-8


class TestFlowGeneral:
    def test_parallel_datum_stationary_any_constants(self):
        geom = TorusGeometry.from_ratio(1.5)
        k = ElasticConstants(1.3, 0.4, 0.9)
        f0 = seed_field(Grid(32, 32), WindingNumber(0, 0), math.pi / 2)
        final, rep = flow_general(f0, geom, k, FlowParams(tol=1e-10, snapshot_every=0))
        assert rep.converged and rep.steps <= 1

    def test_helix_regime_mean_angle(self):
        # mu = 1.25, k = (1, 0.5, 1): constant-family minimum at
        # alpha_h ~ 0.9912; the relaxed state hovers around it
        geom = TorusGeometry.from_ratio(1.25)
        k = ElasticConstants(1.0, 0.5, 1.0)
        f0 = seed_field(Grid(48, 48), WindingNumber(0, 0), 0.9)
        final, rep = flow_general(f0, geom, k, FlowParams(tol=1e-8, max_steps=1_000_000,
                                                          snapshot_every=0))
        assert rep.converged
        assert rep.final_residual < 1e-8
        mean = float(final.reconstruct().mean())
        assert abs(mean - 0.9912) < 0.05
        assert monotone(rep.energy_history)

    def test_energy_history_matches_energy_general(self):
        geom = TorusGeometry.from_ratio(1.5)
        k = ElasticConstants(1.1, 0.7, 0.9)
        f0 = seed_field(Grid(32, 32), WindingNumber(1, 0), 0.2, 0.05, rng_seed=3)
        final, rep = flow_general(f0, geom, k, FlowParams(tol=1e-6, max_steps=50_000,
                                                          snapshot_every=0))
        assert rep.final_energy == pytest.approx(energy_general(final, geom, k).total,
                                                 rel=1e-12)

    def test_equal_constants_agree_with_one_constant_flow(self):
        # same seed, both flows, energies compared through the same
        # functional (the discrete minimizers differ at the stencil level)
        geom = TorusGeometry.from_ratio(1.4)
        k = ElasticConstants.one_constant(1.0)
        f0 = seed_field(Grid(64, 64), WindingNumber(0, 0), math.pi / 4)
        fin_g, rep_g = flow_general(f0, geom, k, FlowParams(tol=1e-8, max_steps=1_000_000,
                                                            snapshot_every=0))
        fin_1, rep_1 = flow_one_constant(f0, geom, FlowParams(tol=1e-8, max_steps=1_000_000,
                                                              snapshot_every=0))
        assert rep_g.converged and rep_1.converged
        e_g = energy_general(fin_g, geom, k).total
        e_1 = energy_general(fin_1, geom, k).total
        assert e_g == pytest.approx(e_1, rel=1e-6)


class TestWindingTable:
    def test_family_monotone_in_winding(self):
        geom = TorusGeometry.from_ratio(1.8)
        rows = winding_table(geom, 1.0, [(0, 1), (0, 2), (0, 3)], Grid(48, 48),
                             FlowParams(tol=1e-7, max_steps=1_000_000),
                             noise=0.05, rng_seed=0)
        assert all(r.converged and not r.error for r in rows)
        energies = [r.energy for r in rows]
        assert energies[0] < energies[1] < energies[2]

    def test_failed_row_recorded_not_raised(self):
        geom = TorusGeometry.from_ratio(1.8)
        rows = winding_table(geom, 1.0, [(0, 0), (1, 0)], Grid(32, 32),
                             FlowParams(tol=1e-12, max_steps=3),
                             noise=0.01, rng_seed=0)
        assert len(rows) == 2
        assert all(not r.converged for r in rows)

    def test_deterministic_per_seed(self):
        geom = TorusGeometry.from_ratio(1.8)
        args = (geom, 1.0, [(1, 1)], Grid(32, 32),
                FlowParams(tol=1e-7, max_steps=300_000))
        a = winding_table(*args, noise=0.05, rng_seed=11)[0]
        b = winding_table(*args, noise=0.05, rng_seed=11)[0]
        assert a.energy == b.energy and a.steps == b.steps


class TestFindCriticalMu:
    def test_bracket_with_identical_classes_rejected(self):
        grid = Grid(48, 48)
        with pytest.raises(BracketInvalid) as err:
            find_critical_mu((1.75, 2.5), grid, flow_tol=1e-7, mu_tol=0.2,
                             max_steps=400_000)
        assert err.value.lo_class == "constant"
        assert err.value.hi_class == "constant"

    def test_invalid_bracket_values(self):
        with pytest.raises(ValueError):
            find_critical_mu((0.9, 1.5), Grid(32, 32))
        with pytest.raises(ValueError):
            find_critical_mu((1.8, 1.2), Grid(32, 32))

    def test_coarse_bisection_brackets_transition(self):
        grid = Grid(48, 48)
        result = find_critical_mu((1.3, 1.9), grid, flow_tol=1e-7, mu_tol=0.15,
                                  max_steps=400_000)
        assert 1.3 < result.mu_star < 1.9
        assert result.probes[0].nonconstant
        assert not result.probes[1].nonconstant
        # log2(0.6 / 0.15) = 2 inner probes
        assert len(result.probes) <= 5
