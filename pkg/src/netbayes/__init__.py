"""Bayesian inference for binary social networks.

Exponential random graph models via the approximate exchange algorithm,
latent space and latent position cluster models via MCMC and variational
Bayes, and posterior-predictive goodness of fit.
"""

__version__ = "0.1.0"

from .ergm import BayesianERGM, FitConfig, PosteriorDraws, Prior, fit_ergm, summarize
from .gof import GofConfig, GofSummary, emit_gof, gof_ergm, gof_lsm
from .graph import Graph, GraphFormatError, from_edge_list, from_matrix_text, read_edge_list, read_graph, read_matrix
from .lsm import (
    LatentPositionClusterModel,
    LatentSpaceModel,
    LsmPrior,
    fit_lpcm_mcmc,
    fit_lsm_mcmc,
    fit_lsm_vb,
    procrustes_rotate,
)
from .netstats import ModelSpec, StatTerm, change_stats, stat_vector
from .simulate import SimConfig, sample_stats, simulate_ergm

__all__ = [
    "BayesianERGM", "FitConfig", "GofConfig", "GofSummary", "Graph", "GraphFormatError",
    "LatentPositionClusterModel", "LatentSpaceModel", "LsmPrior", "ModelSpec", "PosteriorDraws", "Prior",
    "SimConfig", "StatTerm", "change_stats", "emit_gof", "fit_ergm", "fit_lpcm_mcmc", "fit_lsm_mcmc",
    "fit_lsm_vb", "from_edge_list", "from_matrix_text", "gof_ergm", "gof_lsm", "procrustes_rotate",
    "read_edge_list", "read_graph", "read_matrix", "sample_stats", "simulate_ergm", "stat_vector", "summarize",
]
