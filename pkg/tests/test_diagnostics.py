"""Identities, asymptotics and coefficient algebra on converged records."""

import math

import numpy as np
import pytest

from kgmlab.diagnostics import (coulomb_tail, decay_fit, default_decay_window,
                                diagnose, dilation_derivative,
                                energy_and_charge, equation_residuals,
                                functional_values, gamma_interval,
                                nehari_residual, pohozaev_coefficients,
                                pohozaev_residual, strauss_bound_check)
from kgmlab.radial import RadialField


class TestNehari:
    def test_small_on_converged_record(self, record_eps1):
        rec = record_eps1
        res = nehari_residual(rec.u, rec.phi, rec.params)
        assert res < 1e-5

    def test_detects_a_scaled_impostor(self, record_eps1):
        rec = record_eps1
        fake = rec.u.with_values(1.1 * rec.u.values)
        assert nehari_residual(fake, rec.phi, rec.params) > 1e-2

    def test_zero_field_rejected(self, coarse_grid, params_eps1):
        z = RadialField(coarse_grid, np.zeros(coarse_grid.nodes.size))
        with pytest.raises(ValueError):
            nehari_residual(z, z, params_eps1)


class TestPohozaev:
    def test_small_on_converged_record(self, record_eps1):
        rec = record_eps1
        assert pohozaev_residual(rec.u, rec.phi, rec.params) < 1e-4

    def test_small_at_the_limit(self, record_eps0):
        rec = record_eps0
        assert pohozaev_residual(rec.u, rec.phi, rec.params) < 1e-4

    def test_detects_a_truncated_profile(self, record_eps1):
        # chopping the profile at half its support breaks the dilation balance
        rec = record_eps1
        r = rec.u.grid.nodes
        fake = rec.u.with_values(np.where(r < 2.0, rec.u.values, 0.0))
        assert pohozaev_residual(fake, rec.phi, rec.params) > 1e-2

    def test_zero_field_rejected(self, coarse_grid, params_eps1):
        z = RadialField(coarse_grid, np.zeros(coarse_grid.nodes.size))
        with pytest.raises(ValueError):
            pohozaev_residual(z, z, params_eps1)

    def test_agrees_with_independent_dilation_derivative(self, record_eps1):
        # dI/d lambda at lambda = 1 re-derives the same combination by cubic
        # resampling and central differencing; both are normalized by the
        # (3/p) |u|_p^p term that dominates the identity.
        rec = record_eps1
        scale = (3.0 / rec.params.p) * rec.diagnostics.lp_norm ** rec.params.p
        deriv = dilation_derivative(rec.u, rec.phi, rec.params)
        res = pohozaev_residual(rec.u, rec.phi, rec.params)
        assert abs(abs(deriv) / scale - res) < 1e-3


class TestEnergyAndCharge:
    def test_zero_field(self, coarse_grid, params_eps1):
        z = RadialField(coarse_grid, np.zeros(coarse_grid.nodes.size))
        assert energy_and_charge(z, z, params_eps1) == (0.0, 0.0)

    def test_charge_sign(self, branch):
        # Q = e integral (e phi - omega) u^2 < 0 when 0 <= e phi < omega
        for rec in branch.records:
            _, charge = energy_and_charge(rec.u, rec.phi, rec.params)
            assert charge < 0

    def test_tail_constant_carries_the_charge(self, record_eps1):
        # phi ~ K/r with 4 pi K = -Q / e for a localized source
        rec = record_eps1
        _, charge = energy_and_charge(rec.u, rec.phi, rec.params)
        K = rec.diagnostics.tail_constant
        assert 4 * math.pi * K == pytest.approx(-charge / rec.params.e,
                                                rel=2e-2)


class TestFunctionalValues:
    def test_gap_vanishes_at_the_slaved_potential(self, record_eps1):
        rec = record_eps1
        I_val, J_paper, J_standard, gap = functional_values(
            rec.u, rec.phi, rec.params)
        assert abs(gap) < 1e-5 * abs(J_paper)
        assert I_val == pytest.approx(J_standard, rel=1e-4)

    def test_reduction_detects_a_foreign_potential(self, record_eps1):
        # I = J_standard expresses the gauge energy identity, so it must
        # fail when phi is not the potential generated by u
        rec = record_eps1
        fake_phi = rec.phi.with_values(0.5 * rec.phi.values)
        I_val, _, J_standard, _ = functional_values(rec.u, fake_phi,
                                                    rec.params)
        assert abs(I_val - J_standard) > 1e-3 * abs(J_standard)


class TestDecayFit:
    def test_recovers_a_pure_exponential(self, grid):
        r = grid.nodes
        vals = np.where(r > 0, np.exp(-0.5 * r) / np.maximum(r, 1e-30), 1.0)
        u = RadialField(grid, vals)
        a, b, pref = decay_fit(u, (50.0, 150.0))
        assert a == pytest.approx(0.5, rel=1e-6)
        assert pref == "exp"

    def test_recovers_a_stretched_exponential(self, grid):
        r = grid.nodes
        vals = np.where(r > 0, np.exp(-2.0 * np.sqrt(r)) / np.maximum(r, 1e-30),
                        1.0)
        u = RadialField(grid, vals)
        a, b, pref = decay_fit(u, (50.0, 150.0))
        assert b == pytest.approx(2.0, rel=1e-6)
        assert pref == "sqrt"

    def test_rejects_an_empty_window(self, grid):
        u = RadialField(grid, np.zeros(grid.nodes.size))
        with pytest.raises(ValueError):
            decay_fit(u, (50.0, 150.0))

    def test_default_window_sits_in_the_tail(self, record_eps1):
        lo, hi = default_decay_window(record_eps1.u)
        peak = float(np.max(record_eps1.u.values))
        r = record_eps1.u.grid.nodes
        sel = (r >= lo) & (r <= hi)
        assert np.all(record_eps1.u.values[sel] < 1e-3 * peak)

    def test_massive_record_prefers_exponential(self, record_eps1):
        assert record_eps1.diagnostics.decay_fit_preference == "exp"
        assert record_eps1.diagnostics.decay_exp_rate == pytest.approx(
            1.0, rel=0.1)


class TestCoulombTail:
    def test_exact_coulomb_potential(self, grid):
        r = grid.nodes
        phi = RadialField(grid, np.where(r > 0, 1.0 / np.maximum(r, 1e-30), 0.0))
        K, k1, k2 = coulomb_tail(phi, (10.0, 100.0))
        assert (K, k1, k2) == pytest.approx((1.0, 1.0, 1.0))

    def test_zero_potential(self, grid):
        phi = RadialField(grid, np.zeros(grid.nodes.size))
        assert coulomb_tail(phi, (10.0, 100.0)) == (0.0, 0.0, 0.0)

    @pytest.mark.parametrize("window", [(0.5, 10.0), (10.0, 500.0)])
    def test_window_bounds_enforced(self, grid, window):
        phi = RadialField(grid, np.zeros(grid.nodes.size))
        with pytest.raises(ValueError):
            coulomb_tail(phi, window)


class TestPohozaevCoefficients:
    @pytest.mark.parametrize("p,gamma,expected", [
        (4.0, 0.0, (0.25, 0.0, 0.25, 0.25)),
        (4.0, -0.25, (0.125, 0.5, 0.625, 0.125)),
    ])
    def test_spot_values(self, p, gamma, expected):
        assert pohozaev_coefficients(p, gamma) == pytest.approx(expected)

    def test_first_coefficient_is_gamma_free_at_p3(self):
        for gamma in (-1.0, 0.0, 0.7):
            A, *_ = pohozaev_coefficients(3.0, gamma)
            assert A == pytest.approx(1.0 / 3.0)


class TestGammaInterval:
    def test_endpoint_values(self):
        assert gamma_interval(4.0) == pytest.approx((-0.5, 0.0))
        assert gamma_interval(3.5) == pytest.approx((-0.3, -1.0 / 22.0))

    def test_interior_points_make_all_coefficients_positive(self):
        for p in (3.2, 3.5, 3.8, 4.0):
            lo, hi = gamma_interval(p)
            for gamma in np.linspace(lo, hi, 102)[1:-1]:
                coeffs = pohozaev_coefficients(p, float(gamma))
                assert all(c > 0 for c in coeffs), (p, gamma, coeffs)

    @pytest.mark.parametrize("p", [3.0, 4.5, 2.0])
    def test_range_enforced(self, p):
        with pytest.raises(ValueError):
            gamma_interval(p)


class TestStraussBound:
    def test_zero_field(self, coarse_grid):
        z = RadialField(coarse_grid, np.zeros(coarse_grid.nodes.size))
        assert strauss_bound_check(z, 2.0) == 0.0

    def test_exponential_family_is_uniformly_bounded(self, coarse_grid):
        # the radial bound constant is scale-free: stretching the profile
        # must not blow the ratio up
        r = coarse_grid.nodes
        ratios = [strauss_bound_check(RadialField(coarse_grid,
                                                  np.exp(-r / k)), q)
                  for k in (0.5, 1.0, 2.0, 4.0) for q in (2.0, 4.0, 5.5)]
        assert all(0 < x < 1.0 for x in ratios)

    @pytest.mark.parametrize("q", [1.9, 6.0, 8.0])
    def test_exponent_range_enforced(self, coarse_grid, q):
        u = RadialField(coarse_grid, np.exp(-coarse_grid.nodes))
        with pytest.raises(ValueError):
            strauss_bound_check(u, q)


class TestEquationResiduals:
    def test_converged_record_solves_both_equations(self, record_eps1):
        rec = record_eps1
        mat, gauge = equation_residuals(rec.u, rec.phi, rec.params)
        assert mat < 1e-5
        assert gauge < 1e-5

    def test_perturbation_is_detected(self, record_eps1):
        rec = record_eps1
        bumped = rec.u.with_values(
            rec.u.values * (1 + 0.01 * np.exp(-rec.u.grid.nodes)))
        mat, _ = equation_residuals(bumped, rec.phi, rec.params)
        assert mat > 1e-3


class TestDiagnose:
    def test_report_is_internally_consistent(self, record_eps1):
        rec = record_eps1
        d = diagnose(rec.u, rec.phi, rec.params)
        assert d == rec.diagnostics
        assert d.functional_gap == pytest.approx(
            d.J_paper_value - d.I_value - 0.5 * d.phi_grad_norm**2, abs=1e-12)
        k1, k2 = d.tail_envelope
        assert k1 <= d.tail_constant <= k2
