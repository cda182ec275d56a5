"""Centering and PCA whitening.

Whitening maps centered data to components with identity sample
covariance; dimensionality can be reduced at the same time by dropping
principal directions that explain less than a given fraction of the total
variance.  Sample covariances throughout this package are normalized by
the number of samples ``t`` (maximum-likelihood convention), not ``t - 1``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .exceptions import DegenerateDataError, ParameterError, ValidationError
from .validation import as_data_matrix

# Eigenvalues are clamped at this fraction of the largest one before the
# inverse square root, so nearly-null directions cannot blow up the scale.
_EIG_FLOOR = 1e-12


@dataclass(frozen=True)
class WhiteningModel:
    """A fitted centering + whitening transform.

    Parameters
    ----------
    mean : ndarray, shape (n,)
        Per-channel mean removed before projecting.
    whitener : ndarray, shape (m, n)
        Projects centered data onto ``m`` unit-variance components.
    dewhitener : ndarray, shape (n, m)
        Maps whitened components back to (centered) channel space;
        ``whitener @ dewhitener`` is the m-by-m identity.
    retained : int
        Number of principal components kept (``m``).
    eigenvalues : ndarray, shape (n,)
        All covariance eigenvalues, sorted in nonincreasing order.
    variance_threshold : float
        The retention threshold the model was fitted with.
    """

    mean: np.ndarray
    whitener: np.ndarray
    dewhitener: np.ndarray
    retained: int
    eigenvalues: np.ndarray
    variance_threshold: float

    @property
    def n_channels(self) -> int:
        return self.mean.shape[0]


def center(data) -> tuple[np.ndarray, np.ndarray]:
    """Remove the per-row mean.

    Returns ``(centered, mean)`` where ``centered + mean[:, None]``
    restores the input.
    """
    arr = as_data_matrix(data)
    mean = arr.mean(axis=1)
    return arr - mean[:, None], mean


def fit_whitening(data, variance_threshold: float = 0.0) -> WhiteningModel:
    """Fit a PCA whitening transform to ``data``.

    The data is centered internally (the mean is recorded in the model).
    A principal direction is retained when its eigenvalue accounts for at
    least ``variance_threshold`` of the total variance, i.e.
    ``lam_i / sum(lam) >= variance_threshold``; at least one component is
    always kept.  Fractions are measured against the sum of *all*
    eigenvalues, including discarded ones.

    Raises
    ------
    ParameterError
        If ``variance_threshold`` is not in ``[0, 1)``.
    DegenerateDataError
        If the data has no variance at all.
    """
    if not 0.0 <= variance_threshold < 1.0:
        raise ParameterError(
            f"variance_threshold must be in [0, 1), got {variance_threshold}")
    arr = as_data_matrix(data)
    n, t = arr.shape
    if t <= n:
        warnings.warn(
            f"whitening {n} channels from only {t} samples; the sample "
            "covariance is rank deficient or barely determined",
            stacklevel=2)
    centered, mean = center(arr)
    cov = centered @ centered.T / t
    evals, evecs = np.linalg.eigh(cov)
    order = np.argsort(evals)[::-1]
    evals = evals[order]
    evecs = evecs[:, order]
    if evals[0] <= 0.0:
        raise DegenerateDataError(
            "data has no positive-variance direction; cannot whiten")
    # Fix each eigenvector's sign so that its largest-magnitude entry is
    # positive; eigh's sign choice is otherwise arbitrary and this keeps
    # the transform deterministic across platforms.
    for j in range(n):
        pivot = np.argmax(np.abs(evecs[:, j]))
        if evecs[pivot, j] < 0:
            evecs[:, j] = -evecs[:, j]
    fractions = evals / evals.sum()
    retained = int(np.count_nonzero(fractions >= variance_threshold))
    retained = max(retained, 1)
    kept = np.maximum(evals[:retained], _EIG_FLOOR * evals[0])
    scale = 1.0 / np.sqrt(kept)
    whitener = scale[:, None] * evecs[:, :retained].T
    dewhitener = evecs[:, :retained] * np.sqrt(kept)
    return WhiteningModel(
        mean=mean,
        whitener=whitener,
        dewhitener=dewhitener,
        retained=retained,
        eigenvalues=evals,
        variance_threshold=variance_threshold,
    )


def apply_whitening(model: WhiteningModel, data) -> np.ndarray:
    """Project ``data`` through a fitted model: ``whitener @ (data - mean)``."""
    arr = as_data_matrix(data, min_samples=1)
    if arr.shape[0] != model.n_channels:
        raise ValidationError(
            f"data has {arr.shape[0]} rows but the model was fitted on "
            f"{model.n_channels} channels")
    return model.whitener @ (arr - model.mean[:, None])
