from .integrator import integrate, mathieu_trajectories
from .spectra import spectral_peaks, micromotion_amplitude
