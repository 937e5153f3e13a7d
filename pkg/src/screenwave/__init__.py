"""Acoustic scattering by flat screens: symbol calculus, weighted Sobolev
norms, a piecewise-constant Galerkin solver, and a verification lab for the
wavenumber-explicit operator estimates.
"""

from .geometry import (GridFunction, ScreenGeometry, SpatialQuadrature,
                       gauss_panels, panel_breakpoints)
from .densities import Density, DensityFamily, base_bump, bump, combine, gaussian, modulate
from .special import bessel_j, bessel_y, hankel1
from .spectral import (QuadratureAccuracyWarning, SobolevParams,
                       SpectralQuadrature, SpectralWorkspace, SpectrumFunction,
                       build_spectral_quadrature, fourier_transform, nudft,
                       sobolev_norm, z_symbol)
from .symbol_ops import (SymbolKind, apply_symbol, double_layer_potential,
                         sesquilinear_a_D, sesquilinear_a_N,
                         single_layer_potential, symbol_values)
from .direct_ops import (SingularPanelRule, direct_single_layer,
                         direct_single_layer_adaptive, log_moments, phi_kernel,
                         truncated_kernel_transform)
from .bem import (BemSystem, IncidentWave, Mollifier, ScreenMesh, assemble,
                  far_field, incident_trace, mollified_indicator, pcw_spectrum,
                  scattered_field, solve_dirichlet)
from .estimates import (EstimateReport, SweepLab, condition_number_study,
                        fit_power_law, kernel_transform_peak_ratio,
                        pointwise_field_bracket, probe_coercivity_dirichlet,
                        probe_coercivity_neumann,
                        probe_continuity_hypersingular,
                        probe_continuity_single_layer, smooth_cutoff,
                        trace_norm_fundamental, trace_norm_planewave)

__version__ = "0.1.0"
