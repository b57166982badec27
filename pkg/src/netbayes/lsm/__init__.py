"""Latent space and latent position cluster models."""

from .estimators import LatentPositionClusterModel, LatentSpaceModel
from .init import INIT_METHODS, initial_positions
from .likelihood import METRICS, LatentConfig, distances, edge_prob, loglik
from .lpcm import LpcmDraws, fit_lpcm_mcmc
from .mcmc import LsmDraws, fit_lsm_mcmc
from .prior import LsmPrior
from .procrustes import ProcrustesAligner, procrustes_fit, procrustes_rotate
from .vb import VariationalState, elbo, fit_lsm_vb

__all__ = [
    "INIT_METHODS", "METRICS", "LatentConfig", "LatentPositionClusterModel", "LatentSpaceModel",
    "LpcmDraws", "LsmDraws", "LsmPrior", "ProcrustesAligner", "VariationalState", "distances",
    "edge_prob", "elbo", "fit_lpcm_mcmc", "fit_lsm_mcmc", "fit_lsm_vb", "initial_positions", "loglik",
    "procrustes_fit", "procrustes_rotate",
]
