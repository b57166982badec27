"""Procrustes matching of latent configurations."""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted


def procrustes_fit(X, Y):
    """Orthogonal map R and translation t with X @ R + t closest to Y.

    Both configurations are centred first; R may include a reflection.
    """
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    if X.shape != Y.shape:
        raise ValueError(f"shape mismatch: {X.shape} vs {Y.shape}")
    mx, my = X.mean(axis=0), Y.mean(axis=0)
    u, _, vt = np.linalg.svd((X - mx).T @ (Y - my))
    R = u @ vt
    return R, my - mx @ R


def procrustes_rotate(X, Y):
    """Transform of X (rotation, reflection, translation) minimising ||X' - Y||_F."""
    R, t = procrustes_fit(X, Y)
    return np.asarray(X, dtype=float) @ R + t


class ProcrustesAligner(TransformerMixin, BaseEstimator):
    """Align configurations onto a reference fitted with ``fit(X, Y)``.

    ``transform`` applies the stored map; ``fit_transform(X, Y)`` is
    :func:`procrustes_rotate`.
    """

    def fit(self, X, Y):
        X = check_array(X)
        Y = check_array(Y)
        self.rotation_, self.translation_ = procrustes_fit(X, Y)
        return self

    def transform(self, X):
        check_is_fitted(self, "rotation_")
        return check_array(X) @ self.rotation_ + self.translation_
