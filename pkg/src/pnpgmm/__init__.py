"""Class-adapted plug-and-play image restoration with GMM patch priors."""

__version__ = "0.1.0"

from .errors import ArgumentError, DataError, DivergenceError, PnpGmmError
from .imageops import (PatchMatrix, aggregate_patches, convolve_periodic,
                       extract_patches, load_kernel, normalize_kernel, quantize_u8,
                       read_image, read_pgm, save_kernel, transfer_function,
                       write_image, write_pgm)
from .gmm import (EPS_FLOOR, DenoisedPatchSet, GmmModel, class_log_likelihood,
                  class_log_likelihood_batch, component_posteriors, denoise_patchset,
                  em_fit_clean, em_fit_noisy, mmse_denoise_patch)
from .modelio import ClassLibrary, export_model_text, load_library, load_model, save_model
from .maxflow import FlowNetwork, max_flow_min_cut
from .classify import (LabelField, UnaryCosts, alpha_expansion, classify_patches,
                       ml_classify, potts_energy, unary_costs, write_label_field)
from .admm import (AdmmState, DegradationModel, RestorationConfig, dual_update,
                   gmm_switch, multiclass_denoise, restore, v_update, x_update)
from .metrics import (EXPERIMENT_NAMES, ExperimentSpec, MetricReport, bsnr, degrade,
                      experiment_spec, gaussian_noise, isnr, psnr, registry_kernel,
                      run_bench, run_experiment)
from .synthetic import blob_texture, grating_texture, make_composite, text_texture
