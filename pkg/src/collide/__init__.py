"""Multicolor urn collision times: simulation engines, closed-form limit laws,
and goodness-of-fit validation."""

from .distributions import (AliasSampler, ColorMix, MfoldScaling,
                            RankedDistribution, ScalingProfile, UrnModelSpec,
                            make_log_atom, make_sqrt_atom, make_uniform,
                            mfold_scaling_of, sampler, scaling_of, spec_scaling)
from .errors import (CollideError, InvalidDistributionError, InvalidParamsError,
                     NumericFailureError, RunawayTrialError)
from .laws import (LimitParams, SurvivalCurve, density_of, h_lower_poisson,
                   moment, survival_general, survival_mfold,
                   survival_prelimit_exact, survival_qcolor, survival_repeat_cp)
from .gof import (EmpiricalSurvival, KsReport, MomentReport, dkw_epsilon,
                  histogram_csv, ks_against, ks_statistic, ks_two_sample,
                  moments_of, stream_split)
from .urn import (BatchCsvWriter, TrialBatch, sim_first_collision,
                  sim_joint_collisions, sim_mfold_collision, sim_repeat_time)
from .embedding import (ArrivalSample, ChannelSpec, LimitProcessSpec,
                        sample_channel_retained, sample_inhomog_quadratic,
                        sample_limit_process, sim_embedded_continuous)
from .graphs import (PaConfig, PathConfig, count_monochromatic_edges,
                     generate_pa_multigraph, path_expectation_formula,
                     path_expectation_oracle, sim_pa_collision, sim_path_run)
from .dlp import (AGS, GS, DlpInstance, HazardCurve, ags_limit_params, ags_spec,
                  averaged_hazard, averaged_mean_constant, gs_limit_params,
                  gs_spec, hazard, hazard_ags, hazard_gs, sim_dlp_runtime)

__version__ = "0.1.0"
