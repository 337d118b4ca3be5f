"""
Tests for cavity emission spectra
"""

import numpy as np
import pytest

from darkshield.core.exceptions import DomainError
from darkshield.core.model import SingleExcitationState
from darkshield.core.units import HBAR
from darkshield.physics.single_excitation import resonant_trajectory
from darkshield.physics.spectrum import (
    SpectrumResult,
    correlator_analytic,
    peak_summary,
    spectrum_analytic,
    spectrum_from_correlator,
    spectrum_numeric,
)


class TestAnalytic:

    def test_correlator_closed_form(self):
        rabi, mu, count = 20.0, 30.0, 6
        t = np.linspace(0.0, 100.0, 11)
        tau = 7.5
        sigma = np.sqrt(count * rabi ** 2 - mu ** 2 / 16)
        expected = (rabi ** 2 / sigma ** 2) * np.exp(-mu * tau / (4 * HBAR)) * np.exp(-mu * t / (2 * HBAR)) \
            * np.sin(sigma * t / HBAR) * np.sin(sigma * (t + tau) / HBAR)
        np.testing.assert_allclose(correlator_analytic(t, tau, rabi, mu, count), expected, rtol=1e-10, atol=1e-14)

    @pytest.mark.parametrize("count", [40, 80])
    def test_peak_at_critical_coupling(self, count):
        # mu / 2 = Omega_R puts the maximum at Omega_R sqrt(N - 1/2)
        rabi = 10.0
        nu = np.linspace(1.0, 150.0, 29801)
        spectrum = spectrum_analytic(nu, rabi, 2.0 * rabi, count)
        (peak,) = peak_summary(spectrum)
        assert peak.position == pytest.approx(rabi * np.sqrt(count - 0.5), rel=1e-6)
        assert peak.height == pytest.approx(1.0 / (2 * np.pi * (count - 0.25) * rabi ** 2), rel=1e-6)

        a = count * rabi ** 2 - rabi ** 2 / 2
        b = np.sqrt(rabi ** 4 * (count - 0.25))
        assert peak.fwhm == pytest.approx(np.sqrt(a + b) - np.sqrt(a - b), rel=1e-3)

    def test_peak_height_scales_inversely_with_count(self):
        rabi = 10.0
        nu = np.linspace(1.0, 150.0, 29801)
        scaled = []
        for count in (20, 80):
            (peak,) = peak_summary(spectrum_analytic(nu, rabi, 2.0 * rabi, count))
            scaled.append(peak.height * count)
        assert scaled[0] == pytest.approx(scaled[1], rel=0.03)

    def test_peaks_near_polariton_frequencies(self):
        rabi, count = 10.0, 80
        nu = np.linspace(-150.0, 150.0, 6001)
        peaks = peak_summary(spectrum_analytic(nu, rabi, 2.0 * rabi, count))
        assert len(peaks) == 2
        for peak in peaks:
            assert abs(peak.position) == pytest.approx(rabi * np.sqrt(count), rel=0.01)

    def test_absolute_convention_is_a_shift(self):
        nu = np.linspace(-100.0, 100.0, 201)
        relative = spectrum_analytic(nu, 15.0, 40.0, 5)
        absolute = spectrum_analytic(nu + 1500.0, 15.0, 40.0, 5, omega=1500.0, convention="absolute")
        np.testing.assert_allclose(absolute.s, relative.s)
        np.testing.assert_allclose(absolute.detuning, nu)

    def test_unknown_convention(self):
        with pytest.raises(DomainError):
            spectrum_analytic([0.0, 1.0], 15.0, 40.0, 5, convention="sideways")
        with pytest.raises(DomainError):
            spectrum_analytic([0.0, 1.0], 15.0, 40.0, 0)

    def test_result_validation(self):
        with pytest.raises(DomainError):
            SpectrumResult(nu=[0.0, 1.0], s=[1.0])
        with pytest.raises(DomainError):
            SpectrumResult(nu=[1.0, 0.0], s=[1.0, 2.0])


class TestNumeric:

    def test_exponential_correlator(self):
        gamma, dtau = 20.0, 0.05
        tau = np.arange(0.0, 40.0 * HBAR / gamma, dtau)
        nu = np.linspace(-100.0, 100.0, 201)
        spectrum = spectrum_from_correlator(np.exp(-gamma * tau / HBAR), dtau, nu)
        expected = gamma / (np.pi * HBAR * (gamma ** 2 + nu ** 2))
        np.testing.assert_allclose(spectrum.s, expected, rtol=1e-3)

    def test_numeric_matches_analytic(self):
        rabi, mu, count = 50.0, 100.0, 5
        cutoff = 40.0 * HBAR / mu
        dt = 0.2
        times = np.arange(0.0, 2.0 * cutoff + 2 * dt, dt)
        trajectory = resonant_trajectory(
            SingleExcitationState.qubit_excited(count, 1), mu, np.full(count, rabi), times
        )
        nu = np.linspace(-600.0, 600.0, 1201)
        numeric = spectrum_numeric(trajectory.c10, times, nu, cutoff, cutoff, mu=mu)
        analytic = spectrum_analytic(nu, rabi, mu, count)
        assert np.max(np.abs(numeric.s - analytic.s)) < 1e-2 * np.max(analytic.s)
        assert numeric.tail_bound == pytest.approx(np.exp(-20.0), rel=1e-2)

    def test_grid_must_be_uniform_from_zero(self):
        c10 = np.ones(10, dtype=complex)
        with pytest.raises(DomainError):
            spectrum_numeric(c10, np.linspace(1.0, 10.0, 10), [0.0], 2.0, 2.0)
        with pytest.raises(DomainError):
            spectrum_numeric(c10, np.geomspace(1e-3, 10.0, 10) - 1e-3, [0.0], 2.0, 2.0)

    def test_grid_must_cover_both_integrals(self):
        times = np.linspace(0.0, 9.0, 10)
        with pytest.raises(DomainError):
            spectrum_numeric(np.ones(10), times, [0.0], 6.0, 6.0)

    def test_short_correlator(self):
        with pytest.raises(DomainError):
            spectrum_from_correlator([1.0], 0.1, [0.0])


def test_monotone_spectrum_has_no_peaks():
    assert peak_summary(SpectrumResult(nu=np.arange(5.0), s=np.arange(5.0))) == []
