"""
Tests for normal modes and continuous-spectrum approximations
"""

import numpy as np
import pytest
from scipy import stats

from darkshield.core.exceptions import DomainError, EigenbasisWarning, RegimeWarning
from darkshield.core.model import SingleExcitationState
from darkshield.core.units import HBAR
from darkshield.physics.inhomogeneous import (
    BandSystem,
    SpectralDensity,
    beat_period,
    continuous_envelope,
    denominator_residual,
    eigenmode_evolution,
    flatten_band_transitions,
    golden_rule_pole,
    laplace_denominator,
    normal_modes,
    pole_polynomial,
    regime_report,
    weak_broadening_params,
)
from darkshield.physics.single_excitation import evolve_detuned_numeric


def gaussian_ensemble(count, omega_n, half_width):
    """Equal couplings, detunings at the quantiles of exp(-Delta^2 / Delta_m^2)"""
    quantiles = (np.arange(count) + 0.5) / count
    detunings = stats.norm.ppf(quantiles) * half_width / np.sqrt(2.0)
    rabi = np.full(count, omega_n / np.sqrt(count))
    return rabi, detunings


class TestNormalModes:

    def test_roots_zero_the_denominator(self, rng, random_rabi):
        for _ in range(50):
            count = int(rng.integers(1, 9))
            mu = float(rng.uniform(0.0, 80.0))
            rabi = random_rabi(count)
            detunings = rng.uniform(-50.0, 50.0, count)
            modes = normal_modes(mu, rabi, detunings)
            assert modes.roots.size == count + 1
            for p in modes.roots:
                assert denominator_residual(p, mu, rabi, detunings) < 1e-8

    def test_trace_identity(self, rng, random_rabi):
        rabi = random_rabi(12)
        detunings = rng.uniform(-80.0, 80.0, 12)
        mu = 25.0
        roots = normal_modes(mu, rabi, detunings).roots
        expected = -mu / 2.0 - 1j * np.sum(detunings)
        assert abs(np.sum(roots) - expected) < 1e-10 * (mu + np.sum(np.abs(detunings)))

    def test_roots_are_sorted_and_decaying(self, rng, random_rabi):
        modes = normal_modes(30.0, random_rabi(6), rng.uniform(-40.0, 40.0, 6))
        assert np.all(np.diff(modes.roots.real) <= 1e-12)
        assert np.all(modes.roots.real < 0)
        np.testing.assert_allclose(modes.rates, modes.roots / HBAR)

    def test_polynomial_roots_match(self, rng, random_rabi):
        rabi = random_rabi(5)
        detunings = rng.uniform(-30.0, 30.0, 5)
        roots = normal_modes(20.0, rabi, detunings).roots
        poly_roots = np.roots(pole_polynomial(20.0, rabi, detunings))
        for p in roots:
            assert np.min(np.abs(poly_roots - p)) < 1e-6 * 60.0

    def test_polynomial_handles_coincident_detunings(self):
        coefficients = pole_polynomial(0.0, [3.0, 4.0], [0.0, 0.0])
        # p (p^2 + 25): one dark root and the pair +-5i
        np.testing.assert_allclose(coefficients, [1.0, 0.0, 25.0, 0.0], atol=1e-12)

    def test_denominator_pole_rejected(self):
        with pytest.raises(DomainError):
            laplace_denominator(-1j * 7.0, 10.0, [5.0, 5.0], [7.0, -3.0])

    def test_mode_weights_sum_to_photon_amplitude(self, rng, random_rabi, random_state):
        initial = random_state(4)
        detunings = rng.uniform(-20.0, 20.0, 4)
        modes = normal_modes(15.0, random_rabi(4), detunings, initial=initial)
        assert np.sum(modes.weights) == pytest.approx(initial.c10, abs=1e-10)

    def test_mismatched_input(self):
        with pytest.raises(DomainError):
            normal_modes(10.0, [1.0, 2.0], [0.0])


class TestEigenmodeEvolution:

    def test_matches_numeric_integration(self, rng, random_rabi, random_state):
        for _ in range(10):
            count = int(rng.integers(1, 8))
            mu = float(rng.uniform(1.0, 80.0))
            rabi = random_rabi(count)
            detunings = rng.uniform(-60.0, 60.0, count)
            initial = random_state(count)
            times = np.linspace(0.0, 400.0, 81)
            exact = eigenmode_evolution(initial, mu, rabi, detunings, times)
            numeric = evolve_detuned_numeric(initial, mu, rabi, detunings, times, rtol=1e-11, atol=1e-13)
            np.testing.assert_allclose(exact.c10, numeric.c10, atol=1e-8)
            np.testing.assert_allclose(exact.c0, numeric.c0, atol=1e-8)

    def test_degenerate_ensemble_falls_back(self):
        initial = SingleExcitationState.qubit_excited(3, 1)
        times = np.linspace(0.0, 200.0, 21)
        with pytest.warns(EigenbasisWarning):
            trajectory = eigenmode_evolution(initial, 20.0, [10.0, 10.0, 10.0], [5.0, 5.0, 5.0], times)
        numeric = evolve_detuned_numeric(initial, 20.0, [10.0] * 3, [5.0] * 3, times)
        np.testing.assert_allclose(trajectory.c0, numeric.c0, atol=1e-8)

    def test_starts_at_first_grid_time(self):
        initial = SingleExcitationState.qubit_excited(2, 2)
        trajectory = eigenmode_evolution(initial, 10.0, [5.0, 7.0], [10.0, -4.0], [100.0, 150.0])
        np.testing.assert_allclose(trajectory.c0[0], initial.c0, atol=1e-12)

    def test_beat_period(self):
        assert beat_period(41, 50.0) == pytest.approx(np.pi * 41 * HBAR / 50.0)
        with pytest.raises(DomainError):
            beat_period(10, 0.0)


class TestSpectralDensity:

    def test_gaussian_moments(self):
        density = SpectralDensity.gaussian(40.0)
        assert density.moment(0) == pytest.approx(80.0, rel=1e-8)
        assert density.moment(1) == pytest.approx(0.0, abs=1e-8)
        assert density.moment(2) == pytest.approx(40.0 ** 3, rel=1e-8)
        assert float(density.density(0.0)) == pytest.approx(2.0 / np.sqrt(np.pi))

    def test_principal_value_of_symmetric_density_vanishes(self):
        assert SpectralDensity.flat_top(30.0).principal_value() == pytest.approx(0.0, abs=1e-12)
        assert SpectralDensity.gaussian(30.0).principal_value() == pytest.approx(0.0, abs=1e-10)

    def test_principal_value_of_shifted_density(self):
        assert SpectralDensity.gaussian(30.0, center=10.0).principal_value() > 0

    def test_normalisation_is_checked(self):
        with pytest.raises(DomainError):
            SpectralDensity(half_width=1.0, shape=lambda x: 2.0 * np.ones_like(x), support=(-1.0, 1.0))

    def test_from_samples_is_normalised(self, rng):
        density = SpectralDensity.from_samples(rng.normal(0.0, 20.0, 200))
        assert density.moment(0) == pytest.approx(2.0 * density.half_width, rel=1e-6)
        with pytest.raises(DomainError):
            SpectralDensity.from_samples([1.0])


class TestStrongBroadening:

    def test_flat_top_pole(self):
        mu, omega_n, half_width = 10.0, 20.0, 100.0
        result = golden_rule_pole(mu, omega_n, SpectralDensity.flat_top(half_width))
        assert result.valid
        assert result.decay_rate == pytest.approx(mu / 2 + np.pi * omega_n ** 2 / (2 * half_width))
        assert result.shift == pytest.approx(0.0, abs=1e-12)

    def test_outside_regime_warns(self):
        with pytest.warns(RegimeWarning):
            result = golden_rule_pole(10.0, 50.0, SpectralDensity.flat_top(100.0))
        assert not result.valid
        assert result.regime_ratio == pytest.approx(0.125)

    @pytest.mark.slow
    def test_rate_matches_dense_ensemble(self):
        mu, omega_n, half_width = 10.0, 30.0, 100.0
        rabi, detunings = gaussian_ensemble(400, omega_n, half_width)
        predicted = golden_rule_pole(mu, omega_n, SpectralDensity.gaussian(half_width)).decay_rate

        lifetime = HBAR / predicted
        times = np.linspace(lifetime, 4.0 * lifetime, 61)
        trajectory = eigenmode_evolution(SingleExcitationState.photon(400), mu, rabi, detunings,
                                         np.concatenate(([0.0], times)))
        slope = np.polyfit(times, np.log(np.abs(trajectory.c10[1:])), 1)[0]
        assert -slope * HBAR == pytest.approx(predicted, rel=0.1)


class TestWeakBroadening:

    def test_symmetric_gaussian(self):
        mu, omega_n, half_width = 20.0, 540.0, 50.0
        params = weak_broadening_params(mu, omega_n, SpectralDensity.gaussian(half_width))
        assert params.valid
        assert params.delta_s == pytest.approx(half_width ** 2 / (4 * omega_n), rel=1e-8)
        assert params.delta_as == pytest.approx(0.0, abs=1e-8)
        assert params.upper_frequency == pytest.approx(params.lower_frequency)
        assert params.kappa == pytest.approx(mu / 4, rel=1e-6)

    def test_shifted_density_splits_components(self):
        params = weak_broadening_params(20.0, 540.0, SpectralDensity.gaussian(50.0, center=10.0))
        assert params.delta_as == pytest.approx(-10.0, rel=1e-8)
        assert params.upper_frequency - params.lower_frequency == pytest.approx(-10.0, rel=1e-8)

    def test_outside_regime_warns(self):
        with pytest.warns(RegimeWarning):
            params = weak_broadening_params(20.0, 100.0, SpectralDensity.gaussian(50.0))
        assert not params.valid
        with pytest.raises(DomainError):
            weak_broadening_params(20.0, 0.0, SpectralDensity.gaussian(50.0))

    def test_envelope_starts_from_initial_state(self):
        params = weak_broadening_params(20.0, 540.0, SpectralDensity.gaussian(50.0))
        result = continuous_envelope(0.3, 0.4 * 540.0, params, [0.0], rabi=[540.0], detunings=[0.0],
                                     c0_initial=[0.4])
        assert result.c10[0] == pytest.approx(0.3)
        assert result.c0[0, 0] == pytest.approx(0.4)

    def test_envelope_tracks_dense_ensemble(self):
        mu, omega_n, half_width = 20.0, 540.0, 50.0
        rabi, detunings = gaussian_ensemble(400, omega_n, half_width)
        params = weak_broadening_params(mu, omega_n, SpectralDensity.gaussian(half_width))
        times = np.linspace(0.0, 300.0, 301)
        envelope = continuous_envelope(1.0, 0.0, params, times)
        exact = eigenmode_evolution(SingleExcitationState.photon(400), mu, rabi, detunings, times)
        np.testing.assert_allclose(envelope.c10, exact.c10, atol=0.03)

    def test_narrow_density_reduces_to_bare_polariton(self):
        mu, omega = 8.0, 100.0
        params = weak_broadening_params(mu, omega, SpectralDensity.gaussian(1e-3))
        times = np.linspace(0.0, 100.0, 11)
        envelope = continuous_envelope(1.0, 0.0, params, times)
        expected = np.exp(-mu * times / (4 * HBAR)) * np.cos(omega * times / HBAR)
        np.testing.assert_allclose(envelope.c10, expected, atol=1e-8)


class TestRegimes:

    @pytest.mark.parametrize("omega_n,half_width,regime", [
        (10.0, 100.0, "strong-broadening"),
        (540.0, 50.0, "weak-broadening"),
        (60.0, 50.0, "intermediate"),
    ])
    def test_regime_names(self, omega_n, half_width, regime):
        report = regime_report(32.9, omega_n, half_width, 41)
        assert report.regime == regime
        assert report.as_dict()["regime"] == regime

    def test_ratios(self):
        report = regime_report(40.0, 20.0, 10.0, 5)
        assert report.inhomogeneous_dominance == pytest.approx(1.0)
        assert report.broadening_ratio == pytest.approx(2.0)
        assert report.continuum_ratio == pytest.approx(5 * report.transfer_ratio)


class TestBandTransitions:

    def test_flatten_drops_forbidden_pairs(self):
        band = BandSystem(
            conduction=[1000.0, 1100.0],
            valence=[0.0, -50.0],
            dipoles=[[1.0, 0.0], [2.0, 3.0]],
        )
        ensemble = flatten_band_transitions(band, cavity_energy=1050.0)
        np.testing.assert_allclose(ensemble.detunings, [-50.0, 50.0, 100.0])
        np.testing.assert_allclose(ensemble.rabi, [1.0, 2.0, 3.0])

    def test_spin_degeneracy_doubles(self):
        band = BandSystem(conduction=[10.0], valence=[0.0], dipoles=[[4.0]])
        ensemble = flatten_band_transitions(band, cavity_energy=10.0, spin_degenerate=True)
        assert ensemble.count == 2
        assert ensemble.collective_rabi == pytest.approx(4.0 * np.sqrt(2.0))

    def test_shape_mismatch(self):
        with pytest.raises(DomainError):
            BandSystem(conduction=[1.0, 2.0], valence=[0.0], dipoles=[[1.0]])
