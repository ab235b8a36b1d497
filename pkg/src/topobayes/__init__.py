"""Bayesian classification of 1-D signals through persistence diagrams.

Signals are summarized as sublevel-set persistence diagrams, diagrams are
modeled as Poisson point processes with Gaussian-mixture intensities on the
birth-persistence wedge, class posteriors are computed in closed form, and
class decisions come from Bayes factors of Poisson densities with pairwise
voting and k-fold cross validation.
"""

from .classifier import (
    ClassifyResult,
    ClassModel,
    LabeledDataset,
    classify,
    cross_validate,
    diagram_log_density,
    fit_class_model,
    log_bayes_factor,
    model_from_json,
    model_to_json,
    stratified_folds,
)
from .errors import DataFileError, ValidationError
from .filtration import (
    PersistenceDiagram,
    RawDiagram,
    bottleneck_distance,
    diagram_from_json,
    diagram_to_json,
    sublevel_pd,
    tilt,
    untilt,
)
from .intensity import (
    GaussianMixtureIntensity,
    eval_intensity,
    grid_axes,
    intensity_grid,
    log_eval_intensity,
    mixture_from_json,
    mixture_to_json,
    restricted_normal_pdf,
    total_mass,
    wedge_mass,
)
from .posterior import (
    PosteriorConfig,
    config_from_json,
    config_to_json,
    default_clutter,
    default_prior,
    posterior_intensity,
    posterior_quadrature,
    quadrature_nodes,
)
from .signals import (
    ALPHA_BAND,
    BETA_BAND,
    BandSpec,
    Signal,
    add_noise,
    generate_band_signal,
    load_signal,
)

__version__ = "0.1.0"

__all__ = [
    "ALPHA_BAND",
    "BETA_BAND",
    "BandSpec",
    "ClassModel",
    "ClassifyResult",
    "DataFileError",
    "GaussianMixtureIntensity",
    "LabeledDataset",
    "PersistenceDiagram",
    "PosteriorConfig",
    "RawDiagram",
    "Signal",
    "ValidationError",
    "add_noise",
    "bottleneck_distance",
    "classify",
    "config_from_json",
    "config_to_json",
    "cross_validate",
    "default_clutter",
    "default_prior",
    "diagram_from_json",
    "diagram_log_density",
    "diagram_to_json",
    "eval_intensity",
    "fit_class_model",
    "generate_band_signal",
    "grid_axes",
    "intensity_grid",
    "load_signal",
    "log_bayes_factor",
    "log_eval_intensity",
    "mixture_from_json",
    "mixture_to_json",
    "model_from_json",
    "model_to_json",
    "posterior_intensity",
    "posterior_quadrature",
    "quadrature_nodes",
    "restricted_normal_pdf",
    "stratified_folds",
    "sublevel_pd",
    "tilt",
    "total_mass",
    "untilt",
    "wedge_mass",
]
