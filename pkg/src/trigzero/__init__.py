"""Expected and sampled real-zero counts of random trigonometric polynomials
with cosine-correlated Gaussian coefficients."""

from .errors import (Degenerate, FactorizationFailed, IllConditioned, MeasureFileError,
                     NotConverged, NotFound, SingularPoint, TrigZeroError, ValidationError)
from .kacrice import (MomentTriple, QuadratureSpec, expected_zeros, kacrice_integrand,
                      moments_atomic, moments_general, q_n, tilde_variance)
from .kernels import alpha_norm, energy_kernel, fejer, fejer_deriv, kernel_approx_error
from .limitfn import LimitQuery, ell_alpha, ell_alpha_direct, ell_inverse, ell_zero, g, g0
from .sampler import (RngSpec, TrigPolynomial, evaluate, evaluate_grid, sample,
                      sample_general, sample_two_atom)
from .spectral import SpectralMeasure, correlation, density_fourier, load_measure
from .zerocount import (ZeroCountResult, count_zeros_companion, count_zeros_scan,
                        deterministic_zeros, monte_carlo_mean_zeros)

__version__ = "0.1.0"
