"""wqclab: a numerical laboratory for weakly chaotic billiards.

Classical collision spectra, truncated-basis quantum spectra, sparsity and
resistor-network measures of the piston coupling matrix, and the resulting
linear vs semi-linear energy-absorption predictions.
"""

from .scales import (AtomParams, BilliardParams, ScaleSet, box_level,
                     classify_regime, derive_scales, experimental_scales)
from .billiard import (CollisionSequence, ParticleState, PistonCollision,
                       propagate_to_next_collision, sample_initial_state,
                       simulate_trajectory, wall_x)
from .classical import (SpectrumEstimate, analytic_moments, comb_spectrum,
                        counting_variance_rate, gc_classical,
                        instability_exponent, low_frequency_spectrum,
                        number_variance_c0, spike_spectrum)
from .quantum import (BoxState, EigenSolution, FMatrix, SpectralWindow,
                      build_and_diagonalize, deformation_fourier,
                      deformation_profile, energy_width_levels, f0_matrix,
                      f_matrix, fopt_estimates, participation_number,
                      participation_numbers, u_magnitude_estimate,
                      u_matrix_element, window_analytics, window_around)
from .measures import (BandProfile, BandWeight, IntensityMatrix, MeasureReport,
                       band_average, band_bounds, band_profiles,
                       chain_conductance, first_minimum_bc, g_report,
                       gc_weak_localization, gs_theory, matrix_pn,
                       measure_matrix, network_average, sparsity_s,
                       uniformize, untexture, vrh_correct)
from .stats import (SpacingSample, brody_cdf, brody_fit, brody_sample,
                    cumulative, element_histogram, intensity, spacings)
from .response import (DrivingSpec, EarReport, diffusion_coefficient,
                       driving_spectrum, ear_report, fgr_check,
                       slrt_amplitude_window, tabulated_spectrum,
                       wall_formula_G0)

__version__ = "0.1.0"
