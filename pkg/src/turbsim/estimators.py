"""Scikit-learn style facade over the degradation pipeline.

``TurbulenceDegrader`` packages basis preparation (``fit``) and batch
degradation (``transform``) behind the estimator conventions, so the
simulator drops into sklearn pipelines and augmentation stacks without
touching the domain modules directly.  Everything it does is a thin
composition of public library calls; no numerics live here.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from turbsim import psf, rng
from turbsim.operators import realize, simulate_forward
from turbsim.optics import TurbulenceProtocol, ZernikeSpec
from turbsim.validation import as_image_batch, ensure_raster

__all__ = ["TurbulenceDegrader"]

# Stream purpose for per-sample seeds, distinct per estimator use.
_PURPOSE_TRANSFORM = 0


class TurbulenceDegrader(BaseEstimator, TransformerMixin):
    """Degrade image batches under one turbulence protocol.

    ``fit`` prepares the PSF basis and surrogate: from an artifact file
    when ``artifact_path`` is set, otherwise built from scratch at the
    protocol's geometry (slow but self-contained).  ``transform``
    degrades each image under an independent realization whose seed
    derives from (``seed``, sample index), so a fitted estimator is a
    pure function of its parameters.

    Attributes after ``fit``: ``basis_``, ``p2s_``, ``basis_hash_``.
    ``transform`` additionally records ``realizations_``, aligned with
    the last batch, for replay or gradient work.
    """

    def __init__(self, protocol: TurbulenceProtocol | None = None,
                 artifact_path: str | None = None, k: int = 100, s: int = 33,
                 n_basis_samples: int = 4_000, n_surrogate_train: int = 4_000,
                 n_surrogate_heldout: int = 500,
                 dr0_range: tuple[float, float] = (0.05, 4.0),
                 pupil_grid_n: int = 256, with_noise: bool = True,
                 seed: int = 0):
        self.protocol = protocol
        self.artifact_path = artifact_path
        self.k = k
        self.s = s
        self.n_basis_samples = n_basis_samples
        self.n_surrogate_train = n_surrogate_train
        self.n_surrogate_heldout = n_surrogate_heldout
        self.dr0_range = dr0_range
        self.pupil_grid_n = pupil_grid_n
        self.with_noise = with_noise
        self.seed = seed

    def fit(self, X=None, y=None):
        if self.protocol is None:
            raise ValueError("protocol is required")
        if not isinstance(self.protocol, TurbulenceProtocol):
            raise TypeError("protocol must be a TurbulenceProtocol, "
                            f"got {type(self.protocol).__name__}")
        if self.artifact_path is not None:
            basis, p2s = psf.load_artifact(self.artifact_path)
            if p2s is None:
                raise ValueError(f"artifact {self.artifact_path} has no "
                                 "surrogate section")
            self.basis_hash_ = psf.artifact_hash(self.artifact_path)
        else:
            basis = psf.build_psf_basis(
                self.protocol, dr0_range=self.dr0_range,
                n_samples=self.n_basis_samples, k=self.k, s=self.s,
                seed=rng.derive_seed(self.seed, 0, rng.DOMAIN_BASIS),
                spec=ZernikeSpec(pupil_grid_n=self.pupil_grid_n))
            p2s = psf.fit_p2s_surrogate(
                basis, n_train=self.n_surrogate_train,
                n_heldout=self.n_surrogate_heldout,
                seed=rng.derive_seed(self.seed, 0, rng.DOMAIN_SURROGATE))
            self.basis_hash_ = None
        self.basis_ = basis
        self.p2s_ = p2s
        return self

    def transform(self, X) -> np.ndarray:
        check_is_fitted(self, "basis_")
        batch = as_image_batch(X)
        realizations = []
        out = np.empty_like(batch)
        for i in range(batch.shape[0]):
            ensure_raster(batch[i].shape, self.protocol, name=f"X[{i}]")
            rz = realize(self.protocol,
                         rng.derive_seed(self.seed, i, _PURPOSE_TRANSFORM),
                         self.basis_, self.p2s_,
                         basis_hash=self.basis_hash_)
            realizations.append(rz)
            out[i] = simulate_forward(batch[i], rz,
                                      with_noise=self.with_noise)
        self.realizations_ = realizations
        return out
