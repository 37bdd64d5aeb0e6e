"""Hybrid wavelet-vaguelette / Galerkin estimation for spatially
inhomogeneous deconvolution problems.

The estimator recovers a periodic signal from noisy observations of a
convolution whose effective noise level varies in space and may blow up at
isolated points (a vanishing multiplier, or a sampling density with a
zero).  Coefficients whose vaguelettes stay bounded are estimated directly
and thresholded; the singularity-affected scaling block is solved by a
small Galerkin system, and the resolution split between the two parts is
selected from the data.
"""

from .spectral import (PeriodicSignal, Spectrum, circular_convolve,
                       forward_transform, grid_points, inner, inverse_transform,
                       norm)
from .wavelets import (CoefficientTree, PeriodizedBasis, WaveletFilter, analyze,
                       basis_fourier_table, daubechies_filter, reconstruct,
                       synthesize_basis_function)
from .operators import (ConvolutionKernel, DesignDensity, MultiplierProfile,
                        Singularity, apply_forward, design_quantiles,
                        estimate_decay_order, kernel_q1, kernel_q2,
                        make_mu_profile, make_power_zero_density)
from .vaguelette import (IndexPartition, VagueletteTable, VarianceWeights,
                         build_vaguelettes, estimate_coefficients,
                         partition_indices, variance_weights)
from .thresholding import (BlockLayout, ThresholdRule, apply_threshold,
                           block_size, build_blocks, risk_bound,
                           singularity_free_estimate)
from .galerkin import (SingularBlockSystem, SingularSystemError, assemble_system,
                       forward_scaling_images, singular_estimate,
                       solve_singular_block)
from .adaptive import (EstimatorSettings, HybridEstimate, LepskiTrace,
                       adaptive_estimate, hybrid_at_level, lepski_matrix,
                       omega_neighborhood, select_level, theoretical_levels)
from .theory import (BesovParams, ProblemParams, log_exponent, minimax_rate,
                     theoretical_threshold)
from .harness import (ExperimentConfig, detect_am_phase, generate_heteroscedastic,
                      generate_irregular, make_test_signal, mse, rate_study,
                      run_experiment, snr)

__version__ = "0.1.0"
