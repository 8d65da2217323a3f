"""Numerical laboratory for the cone extension operator on cylindrically
symmetric data: Bessel split with explicit error kernels, oscillatory
quadrature, annulus and Lorentz norms, dyadic sweeps and a batch CLI."""
from .bessel import (BesselOrder, BesselValue, ErrorKernelSign, bessel_error_part, bessel_j,
                     bessel_main_term, error_kernel, verify_error_bound)
from .experiments import (ExponentTriple, SlopeFit, band_sharpness, dyadic_sweep,
                          feasibility_classify, fit_slope, global_restriction_check, schur_sum)
from .extension import (ExtensionField, ExtensionValue, SpacetimePoint, error_term,
                        extension_direct, main_term, rescale_profile)
from .norms import (AnnulusRegion, LorentzExponents, NormResult, StepFunction,
                    hausdorff_young_check, holder_lorentz_check, lorentz_norm, lq_annulus_norm,
                    weighted_bessel_norm)
from .profiles import RadialProfile
from .quadrature import (OscillationSpec, QuadratureResult, TruncationError,
                         adaptive_time_truncation, integrate_oscillatory)

__version__ = "0.1.0"
