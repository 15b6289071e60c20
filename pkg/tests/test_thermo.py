import numpy as np
import pytest

from PaulSim.thermo import fit_power_law
from PaulSim.thermo.cooling import (CoolingConfig, HeatingModel, ThermalState, doppler_limit_nbar,
                                    doppler_sweep, heating_rate_scaled, nbar_from_sideband_ratio,
                                    sideband_ratio)
from PaulSim.thermo.qubit import (QubitCoupling, contrast_maxima, lamb_dicke, mean_rabi,
                                  pi_pulse_error, rabi_frame, sideband_spectrum,
                                  thermal_rabi_shift, thermal_rabi_signal)
from PaulSim.utilities.exceptions import DomainError, ValidityError

MHZ = 2 * np.pi * 1e6
RABI = 2 * np.pi * 100e3


def test_lamb_dicke_parameter(ca40):
    assert lamb_dicke(729e-9, ca40, 20 * MHZ) == pytest.approx(0.021673, rel=1e-4)
    assert lamb_dicke(729e-9, ca40, 20 * MHZ, angle=np.pi / 2) == 0.0
    with pytest.raises(DomainError):
        lamb_dicke(729e-9, ca40, 0.0)


def test_doppler_limit_anchor():
    projected = doppler_limit_nbar(CoolingConfig(), 21.29 * MHZ).nbar
    isotropic = doppler_limit_nbar(CoolingConfig(recoil_model='isotropic'), 21.29 * MHZ).nbar
    assert projected == pytest.approx(0.457, abs=1e-3)
    assert isotropic / projected == pytest.approx(1.4 / 0.9, rel=1e-12)


def test_doppler_limit_scales_inversely_with_frequency():
    sweep = doppler_sweep(CoolingConfig(), np.linspace(2, 24, 23) * MHZ)
    exponent, _ = fit_power_law(sweep.omega_MHz, sweep.nbar)
    assert exponent == pytest.approx(-1.0, abs=1e-9)


def test_isotropic_recoil_angle_dependence():
    along = CoolingConfig(angle=0.0, recoil_model='isotropic').geometric_factor()
    tilted = CoolingConfig(angle=np.pi / 4, recoil_model='isotropic').geometric_factor()
    assert tilted == pytest.approx(2 * along)
    with pytest.raises(DomainError):
        CoolingConfig(angle=np.pi / 2).geometric_factor()


@pytest.mark.parametrize('kwargs', [
    {'linewidth': 0.0},
    {'detuning': 2 * np.pi * 5e6},
    {'angle': 2.0},
    {'recoil_model': 'dipole'},
])
def test_cooling_config_rejects(kwargs):
    with pytest.raises(DomainError):
        CoolingConfig(**kwargs)


def test_thermal_state():
    state = ThermalState(0.5)
    p = state.probabilities()
    assert p.sum() == pytest.approx(1.0, abs=1e-7)
    assert np.sum(p * np.arange(p.size)) == pytest.approx(0.5, rel=1e-5)
    np.testing.assert_array_equal(ThermalState(0.0).probabilities(), [1.0])
    with pytest.raises(DomainError):
        ThermalState(-0.1)


@pytest.mark.parametrize('nbar', [0.05, 0.457, 3.0])
def test_sideband_thermometry(nbar):
    ratio = sideband_ratio(ThermalState(nbar))
    assert ratio == pytest.approx(nbar / (1 + nbar), rel=1e-9)
    assert nbar_from_sideband_ratio(ratio) == pytest.approx(nbar, abs=1e-6)


def test_sideband_ratio_bounds():
    with pytest.raises(DomainError):
        nbar_from_sideband_ratio(1.0)


def test_heating_rate_scaling():
    model = HeatingModel(rate=100.0, omega_ref=1 * MHZ, exponent=1.0)
    assert model.rate_at(2 * MHZ) == pytest.approx(25.0)
    assert heating_rate_scaled(model, 1 * MHZ, 4 * MHZ) == pytest.approx(100.0 / 16)
    with pytest.raises(DomainError):
        HeatingModel(rate=1.0, omega_ref=1 * MHZ, exponent=4.0)


def test_ground_state_rabi_flop():
    coupling = QubitCoupling(RABI, eta=(0.05,))
    t = np.linspace(0, 5 * np.pi / RABI, 50)
    signal = thermal_rabi_signal(coupling, [ThermalState(0.0)], t)
    np.testing.assert_allclose(signal, np.sin(RABI * t / 2) ** 2, atol=1e-12)
    assert pi_pulse_error(coupling, [ThermalState(0.0)]) == pytest.approx(0.0, abs=1e-20)
    assert list(rabi_frame(t, signal).columns) == ['t_us', 'P']


def test_thermal_dephasing(ca40):
    omega = 20 * MHZ
    state = doppler_limit_nbar(CoolingConfig(), omega)
    eta = lamb_dicke(729e-9, ca40, omega)
    coupling = QubitCoupling(RABI, eta=(eta,))
    assert thermal_rabi_shift(coupling, [state]) == pytest.approx(state.nbar * eta ** 2)
    assert mean_rabi(coupling, [state]) < RABI
    error = pi_pulse_error(coupling, [state])
    assert 2e-7 / 5 <= error <= 2e-7 * 5
    maxima = contrast_maxima(coupling, [state])
    assert maxima.size == 11
    assert np.all(maxima <= 1.0 + 1e-12) and maxima[0] > maxima[-1] > 0.9


def test_contrast_at_doppler_anchor(ca40):
    omega = 21.29 * MHZ
    state = doppler_limit_nbar(CoolingConfig(), omega)
    coupling = QubitCoupling(2 * np.pi * 185e3, eta=(lamb_dicke(729e-9, ca40, omega),))
    maxima = contrast_maxima(coupling, [state], 11)
    assert maxima[0] >= 0.99
    assert np.all(np.diff(maxima) <= 1e-12)


def test_pi_error_falls_with_mode_frequency(ca40):
    omegas = np.linspace(5, 30, 6) * MHZ
    errors = []
    for w in omegas:
        coupling = QubitCoupling(RABI, eta=(lamb_dicke(729e-9, ca40, w),))
        errors.append(pi_pulse_error(coupling, [doppler_limit_nbar(CoolingConfig(), w)]))
    exponent, _ = fit_power_law(omegas, errors)
    assert -4.0 <= exponent <= -3.0


def test_lamb_dicke_regime_enforced():
    coupling = QubitCoupling(RABI, eta=(0.01, 0.5))
    with pytest.raises(ValidityError) as info:
        thermal_rabi_signal(coupling, [ThermalState(0.1), ThermalState(0.1)], [1e-6])
    assert info.value.mode == 1
    with pytest.raises(DomainError):
        pi_pulse_error(coupling, [ThermalState(0.1)])


def test_sideband_spectrum():
    omega = 2 * MHZ
    coupling = QubitCoupling(RABI, eta=(0.05,))
    state = ThermalState(0.8)
    detunings = np.linspace(-3, 3, 601) * MHZ
    spectrum = sideband_spectrum(coupling, state, detunings, 50e-6, omega)
    assert nbar_from_sideband_ratio(spectrum.ratio) == pytest.approx(0.8, abs=1e-6)
    frame = spectrum.frame()
    assert list(frame.columns) == ['delta_MHz', 'P']
    assert frame.delta_MHz[frame.P.idxmax()] == pytest.approx(2.0, abs=0.011)
    with pytest.raises(DomainError):
        sideband_spectrum(coupling, state, np.linspace(-1, 1, 11) * MHZ, 50e-6, omega)


def test_power_law_fit_rejects_non_positive():
    x = np.array([1.0, 2.0, 4.0])
    exponent, prefactor = fit_power_law(x, 3.0 / x ** 2)
    assert exponent == pytest.approx(-2.0)
    assert prefactor == pytest.approx(3.0)
    with pytest.raises(ValueError):
        fit_power_law(x, [1.0, 0.0, 1.0])
