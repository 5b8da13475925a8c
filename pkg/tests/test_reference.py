"""Splitting baselines: order, conservation, and cross-scheme validation."""

import numpy as np
import pytest

from lowregnls.initial_data import InitialDataSpec
from lowregnls.integrator import SchemeParams, evolve, initialize
from lowregnls.reference import (
    ResourceCapError,
    reference_solution,
    splitting_evolve,
    splitting_step,
)
from lowregnls.spectral import (
    SpectralField,
    free_propagator,
    l2_error,
    sobolev_norm,
    zero_mode,
)


SMOOTH = InitialDataSpec(alpha=3.0)


def self_halving_errors(u0, order, taus, horizon=0.5, lam=-1):
    out = []
    for tau in taus:
        a = splitting_evolve(u0, SchemeParams.from_horizon(lam, tau, u0.cutoff, horizon), order).final
        b = splitting_evolve(u0, SchemeParams.from_horizon(lam, tau / 2, u0.cutoff, horizon), order).final
        out.append(l2_error(a, b))
    return out


class TestSplittingStep:
    def test_linear_substep_only_for_plane_wave_limit(self):
        # with amplitude -> 0 the nonlinear phase is negligible and one step
        # approaches the free propagator
        a = 1e-8
        u = SpectralField.from_modes(8, {1: a, 3: a})
        params = SchemeParams(lam=-1, tau=0.3, cutoff=8, steps=1)
        out = splitting_step(u, params, 1)
        lin = free_propagator(u, 0.3)
        assert l2_error(out, lin) <= 1e-17

    def test_constant_state_exact(self):
        # both substeps are exact for constants: splitting reproduces the
        # closed-form phase rotation to round-off for any step size
        c, lam, tau = 0.9 - 0.2j, -1, 0.25
        u = SpectralField.from_modes(4, {0: c})
        params = SchemeParams(lam=lam, tau=tau, cutoff=4, steps=1)
        for order in (1, 2):
            out = splitting_step(u, params, order)
            expected = c * np.exp(-1j * lam * abs(c) ** 2 * tau)
            assert abs(zero_mode(out) - expected) <= 1e-14
            assert l2_error(out, SpectralField.from_modes(4, {0: expected})) <= 1e-13

    def test_invalid_order(self):
        u = SpectralField.zeros(4)
        params = SchemeParams(lam=-1, tau=0.1, cutoff=4, steps=1)
        with pytest.raises(ValueError):
            splitting_step(u, params, 3)

    def test_stays_band_limited(self):
        rng = np.random.default_rng(0)
        c = rng.standard_normal(17) + 1j * rng.standard_normal(17)
        u = SpectralField(8, 0.3 * c)
        params = SchemeParams(lam=1, tau=0.05, cutoff=8, steps=1)
        assert splitting_step(u, params, 2).cutoff == 8


class TestSplittingOrders:
    def test_lie_is_first_order(self):
        u0 = initialize(SMOOTH, 64)
        errs = self_halving_errors(u0, 1, (2.0 ** -4, 2.0 ** -5, 2.0 ** -6))
        for a, b in zip(errs, errs[1:]):
            assert 1.85 <= a / b <= 2.15

    def test_strang_is_second_order(self):
        u0 = initialize(SMOOTH, 64)
        errs = self_halving_errors(u0, 2, (2.0 ** -4, 2.0 ** -5, 2.0 ** -6))
        for a, b in zip(errs, errs[1:]):
            assert 3.6 <= a / b <= 4.6


class TestConservation:
    def test_mass_drift_tiny_for_smooth_data(self):
        # phase rotation preserves |u| pointwise; truncation of the rotated
        # state is the only leak and stays at round-off for smooth data
        u0 = initialize(SMOOTH, 64)
        params = SchemeParams.from_horizon(-1, 2.0 ** -5, 64, 1.0)
        traj = splitting_evolve(u0, params, 2, diag_stride=1)
        worst = max(d.mass_drift for d in traj.diagnostics)
        assert worst <= 1e-10 * params.steps


class TestCrossValidation:
    def test_lowreg_and_strang_agree(self):
        # independent discretizations of the same flow: both must sit within
        # O(tau) of the refined reference and of each other
        u0 = initialize(SMOOTH, 64)
        params = SchemeParams.from_horizon(-1, 2.0 ** -6, 64, 0.5)
        low = evolve(u0, params).final
        strang = splitting_evolve(u0, params, 2).final
        assert l2_error(low, strang) <= 5e-5

    def test_plane_wave_cross_scheme_agreement(self):
        # moderate-amplitude single mode over a unit horizon at a fine step:
        # entirely different discretizations of the nonlinearity must land on
        # the same state to well inside the O(tau) budget
        u0 = initialize(InitialDataSpec(kind="plane", amplitude=0.5, mode=1), 256)
        params = SchemeParams.from_horizon(-1, 2.0 ** -10, 256, 1.0)
        low = evolve(u0, params).final
        strang = splitting_evolve(u0, params, 2).final
        assert l2_error(low, strang) <= 1e-4

    def test_both_near_refined_reference(self):
        params = SchemeParams.from_horizon(-1, 2.0 ** -6, 64, 0.5)
        u0 = initialize(SMOOTH, 64)
        ref = reference_solution(SMOOTH, params, refinement=4)
        low = evolve(u0, params).final
        strang = splitting_evolve(u0, params, 2).final
        assert l2_error(low, ref) <= 5e-5
        assert l2_error(strang, ref) <= 5e-5
        # reference is itself band-limited at the coarse cutoff
        assert ref.cutoff == 64


class TestReferenceSolution:
    def test_refinement_one_reproduces_plain_run(self):
        params = SchemeParams.from_horizon(-1, 2.0 ** -5, 16, 0.5)
        u0 = initialize(InitialDataSpec(alpha=1.0), 16)
        a = reference_solution(InitialDataSpec(alpha=1.0), params, refinement=1)
        b = evolve(u0, params).final
        assert np.array_equal(a.coeffs, b.coeffs)

    def test_resource_cap(self):
        params = SchemeParams.from_horizon(-1, 0.5, 2 ** 14, 1.0)
        with pytest.raises(ResourceCapError, match="resource cap exceeded"):
            reference_solution(SMOOTH, params, refinement=4)

    def test_invalid_refinement(self):
        params = SchemeParams.from_horizon(-1, 0.5, 8, 1.0)
        with pytest.raises(ValueError):
            reference_solution(SMOOTH, params, refinement=0)

    def test_field_source(self):
        rng = np.random.default_rng(1)
        c = 0.2 * (rng.standard_normal(9) + 1j * rng.standard_normal(9))
        u0 = SpectralField(4, c)
        params = SchemeParams.from_horizon(-1, 2.0 ** -5, 4, 0.25)
        ref = reference_solution(u0, params, refinement=2)
        assert ref.cutoff == 4
        assert sobolev_norm(ref, 0.0) > 0
