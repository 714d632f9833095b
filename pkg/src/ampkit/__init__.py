"""ampkit: sample amplification procedures, adversarial verifiers, and a
Monte Carlo harness for measuring amplifier-vs-verifier acceptance rates."""

from .core import (DiscreteDist, GaussianSpec, SampleSet, SeedStream,
                   CheckResult, VecSampleSet, VerifierReport, as_generator,
                   sample_discrete, sample_gaussian, unwhiten, whiten)
from .discrete_amp import (DEFAULT_EPS, AmplifyDetails, PoissonSplit,
                           amplify_bernoulli, amplify_discrete,
                           amplify_poissonized, choose_r, poisson_split)
from .gaussian_amp import (DecorrelatedOutput, amplify_decorrelate,
                           amplify_discard_resample, amplify_naive_superset,
                           amplify_superset_mixture, decorrelate_given_noise)
from .harness import (GameConfig, GameResult, RegressionDemoResult, TVEstimate,
                      estimate_tv_counts, exact_tv_decorrelate, regression_demo,
                      run_game, wilson_interval)
from .statmath import (analytic_output_cov, birthday_collision_upper,
                       chisq_tail_threshold, chisq_tail_upper,
                       chisq_twosided_upper, gaussian_tv_upper,
                       hellinger_sq_gaussian_mixture, kl_poisson,
                       martingale_tail_upper, poisson_tail_upper,
                       posterior_mean_var, tv_binomial_vs_compound)
from .verifiers import (DiscreteVerifierParams, GaussianVerifierParams,
                        expected_unique, verify_discrete_unique_count,
                        verify_gaussian_mean_distance,
                        verify_gaussian_three_test,
                        verify_superset_inner_product)

__version__ = "0.1.0"
