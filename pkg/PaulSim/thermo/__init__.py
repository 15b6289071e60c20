from .cooling import CoolingConfig, ThermalState, doppler_limit_nbar, sideband_ratio
from .qubit import (QubitCoupling, lamb_dicke, thermal_rabi_signal, thermal_rabi_shift,
                    pi_pulse_error, sideband_spectrum)
from PaulSim.utilities.wrappers import power_law_fit as fit_power_law
