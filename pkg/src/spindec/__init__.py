"""Spin-flip rates and spatial decoherence of trapped atoms above layered surfaces."""
__version__ = "0.1.0"

from .atomics import (CODATA2018, RB87_SURFACE_ELEMENTS, AtomTransition, PhysicalConstants,
                      ThermalState, TrapField, larmor_frequency, spin_matrix_elements,
                      thermal_photon_number, to_surface_frame)
from .errors import (BracketError, ConfigError, DomainError, QuadratureError, SingularityError,
                     SpindecError)
from .green_kernel import (BruteForceGrid, MagneticKernel, brute_force_kernel, magnetic_kernel,
                           magnetic_weyl_integrand, reflection_components)
from .layered_media import (ConstantPermittivity, DrudeSkinDepth, Layer, LayerStack, Vacuum,
                            fresnel_te, fresnel_tm, stack_reflection, three_layer_fresnel)
from .rates_coherence import (AsymptoticFit, CoherenceResult, RateResult, apply_thermal,
                              coherence_S, fit_asymptotic_exponent, gamma12_closed_form,
                              gamma_general, half_coherence_length, line_shift, rho12,
                              short_time_decoherence, small_l_coefficient)
