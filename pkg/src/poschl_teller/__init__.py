"""Spectral calculus of the Pöschl–Teller Schrödinger operator.

H = -d²/dx² - λ(λ-1) a² sech²(a(x - h)): closed-form distorted plane waves,
spectral multipliers, dyadic Littlewood–Paley banks, Besov and Triebel–Lizorkin
quasi-norms, maximal functions and the propagator e^{-itH}.
"""

from .errors import (ConfigError, DomainError, DomainTooSmallError, ExtractionError, IntegrationError,
                     InvalidParameterError, PoschlTellerError, PreconditionError, RefinementRequiredError,
                     ResolutionError)
from .evolution import decay_experiment, propagate, wave_packet
from .littlewood_paley import (BandDecomposition, DyadicSystem, analysis, build_dyadic_system, hl_maximal,
                               peetre_maximal, synthesis)
from .numerics import FunctionSample, Grid, KQuadrature, integrate_schrodinger, log_gamma_complex, lp_norm
from .scattering import (Potential, bound_states, continuous_scattering, eigenfunction, point_spectrum,
                         reflection, scattering_polynomial, shooting_eigenvalues, transmission)
from .spaces import NormSpec, besov_norm, equivalence_experiment, identification_experiment, maximal_norm, tl_norm
from .spectral import (MultiplierKernel, TransformCoefficients, apply_multiplier, build_band_kernel,
                       covariance_check, decay_profile, forward_transform, inverse_transform)

__version__ = "0.1.0"
