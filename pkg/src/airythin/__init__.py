"""Thinned Airy process: Fredholm determinants, Janossy densities and cKdV solutions."""

from .ckdv import (
    AsymptoteParams,
    CkdvPoint,
    Regime,
    asymptote,
    bilinear_residual,
    ckdv_residual,
    evaluate,
    soliton_tau,
    tracy_widom,
)
from .darboux import (
    JanossyResult,
    janossy,
    janossy_via_palm,
    modified_potential,
    modified_stark_residual,
    modified_wavefunction,
)
from .errors import (
    AiryThinError,
    ConfigurationError,
    DecayTooSlow,
    DomainError,
    IllConditioned,
    NonPositiveDeterminant,
    NumericalError,
    NumericalWarning,
    RegimeViolation,
    SingularOperator,
)
from .fredholm import (
    QuadratureScheme,
    ResolventState,
    build_resolvent,
    build_scheme,
    gap_probability,
    resolvent_apply,
    resolvent_kernel,
)
from .kernels import KernelSurface, PointConfig, kernel_eval, kernel_matrix, palm_kernel
from .specfun import AiryValue, airy
from .stark import PotentialSample, WaveSample, dlog_gap, idpii_residual, potential, wavefunction
from .thinning import SigmaKind, SigmaModel, custom, fermi, indicator, parse_sigma, rescale, sigma_eval, sigma_prime_measure, zero

__version__ = "0.1.0"
