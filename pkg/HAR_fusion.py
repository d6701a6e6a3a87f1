"""
Canonical Correlation Fusion
CCA between two feature sets, fusion of the canonical variates by summation,
and the two-stage fusion of the base, Prewitt and high-boost modalities
"""

from dataclasses import dataclass
from typing import Optional, Tuple
import logging

import numpy as np
import scipy.linalg as la

from HAR_core import AlignmentError, DimensionError, RangeError, SingularCovariance
from HAR_features import FeatureMatrix, stack_modalities

logger = logging.getLogger(__name__)

DEFAULT_RIDGE = 1e-4
RANK_TOL = 1e-12


@dataclass
class CcaModel:
    """Centering vectors, transformation matrices and canonical correlations"""
    mean_x: np.ndarray
    mean_y: np.ndarray
    a: np.ndarray
    b: np.ndarray
    corrs: np.ndarray
    ridge: float

    @property
    def d(self) -> int:
        return self.a.shape[1]


def _inverse_sqrt(cov: np.ndarray, ridge: float, name: str) -> np.ndarray:
    # symmetric (C + lambda I)^(-1/2), lambda relative to the mean variance
    lam = ridge * float(np.mean(np.diag(cov)))
    evals, evecs = la.eigh(cov + lam * np.eye(cov.shape[0]))
    top = float(evals[-1]) if evals.size else 0.0
    if top <= 0 or evals[0] <= RANK_TOL * top:
        raise SingularCovariance(
            f"covariance of {name} is rank deficient (smallest eigenvalue {evals[0]:.3e}); "
            "set ridge > 0")
    return (evecs / np.sqrt(evals)) @ evecs.T


def _check_pair(x: FeatureMatrix, y: FeatureMatrix):
    if x.n != y.n:
        raise AlignmentError(f"CCA inputs have {x.n} and {y.n} rows")
    if not np.array_equal(x.labels, y.labels):
        raise AlignmentError("CCA inputs have different label vectors")


def cca_fit(x: FeatureMatrix, y: FeatureMatrix, d: Optional[int] = None,
            ridge: float = DEFAULT_RIDGE) -> CcaModel:
    """
    Fit canonical correlation analysis between two aligned feature sets

    Args:
        x: n x p features
        y: n x q features, same rows and labels as x
        d: number of canonical pairs (None or 0 = min(p, q, n - 1))
        ridge: relative ridge added to both auto-covariances

    Returns:
        CcaModel whose variates have unit sample variance on the training data
    """
    _check_pair(x, y)
    n = x.n
    if n < 3:
        raise DimensionError(f"CCA needs at least 3 samples, got {n}")
    if ridge < 0:
        raise RangeError(f"ridge must be non-negative, got {ridge}")
    limit = min(x.p, y.p, n - 1)
    if not d:
        d = limit
    if not 1 <= d <= limit:
        raise DimensionError(f"d must lie in [1, {limit}], got {d}")

    mean_x = x.x.mean(axis=0)
    mean_y = y.x.mean(axis=0)
    xc = x.x - mean_x
    yc = y.x - mean_y
    sxx = xc.T @ xc / (n - 1)
    syy = yc.T @ yc / (n - 1)
    sxy = xc.T @ yc / (n - 1)

    wx = _inverse_sqrt(sxx, ridge, x.modality_tag or "x")
    wy = _inverse_sqrt(syy, ridge, y.modality_tag or "y")

    # singular pairs of the whitened cross-covariance solve the eigenproblem
    # Wx Sxy Wy^2 Syx Wx
    u, s, vt = la.svd(wx @ sxy @ wy, full_matrices=False)
    a = wx @ u[:, :d]
    b = wy @ vt[:d].T

    xv = xc @ a
    yv = yc @ b
    sd_x = xv.std(axis=0, ddof=1)
    sd_y = yv.std(axis=0, ddof=1)
    a = a / np.where(sd_x > 0, sd_x, 1.0)
    b = b / np.where(sd_y > 0, sd_y, 1.0)

    xv = xc @ a
    yv = yc @ b
    cov = np.einsum("ij,ij->j", xv, yv) / (n - 1)
    denom = xv.std(axis=0, ddof=1) * yv.std(axis=0, ddof=1)
    corrs = np.clip(np.divide(cov, denom, out=np.zeros_like(cov), where=denom > 0), 0.0, 1.0)

    order = np.argsort(-corrs, kind="stable")
    logger.debug("CCA %s x %s: top correlations %s", x.modality_tag, y.modality_tag, corrs[order][:3])
    return CcaModel(mean_x=mean_x, mean_y=mean_y, a=a[:, order], b=b[:, order],
                    corrs=corrs[order], ridge=float(ridge))


def cca_transform(model: CcaModel, x: FeatureMatrix,
                  y: FeatureMatrix) -> Tuple[FeatureMatrix, FeatureMatrix]:
    """Canonical variates X' = (x - mean_x) A and Y' = (y - mean_y) B"""
    if x.p != model.a.shape[0] or y.p != model.b.shape[0]:
        raise DimensionError(
            f"model expects {model.a.shape[0]} x {model.b.shape[0]} features, "
            f"got {x.p} x {y.p}")
    _check_pair(x, y)
    xprime = FeatureMatrix((x.x - model.mean_x) @ model.a, x.labels, f"{x.modality_tag}'")
    yprime = FeatureMatrix((y.x - model.mean_y) @ model.b, y.labels, f"{y.modality_tag}'")
    return xprime, yprime


def ccf_fuse(xprime: FeatureMatrix, yprime: FeatureMatrix, tag: str = "") -> FeatureMatrix:
    """Canonical correlation fusion Z = X' + Y'"""
    if xprime.x.shape != yprime.x.shape:
        raise DimensionError(f"cannot fuse shapes {xprime.x.shape} and {yprime.x.shape}")
    if not np.array_equal(xprime.labels, yprime.labels):
        raise AlignmentError("fused variates have different label vectors")
    tag = tag or f"{xprime.modality_tag.rstrip(chr(39))}+{yprime.modality_tag.rstrip(chr(39))}"
    return FeatureMatrix(xprime.x + yprime.x, xprime.labels, tag)


class TwoStageFusion:
    """
    Two-stage CCF: (base + prewitt) first, then the result with highboost

    Both stages are fitted on training data; transform() applies the frozen
    transformation matrices to new rows.
    """

    def __init__(self, d: Optional[int] = None, ridge: float = DEFAULT_RIDGE):
        self.d = d
        self.ridge = ridge
        self.stage1: Optional[CcaModel] = None
        self.stage2: Optional[CcaModel] = None

    def _stage_dim(self, x: FeatureMatrix, y: FeatureMatrix) -> Optional[int]:
        if not self.d:
            return None
        return min(self.d, x.p, y.p, x.n - 1)

    def fit(self, f1: FeatureMatrix, f2: FeatureMatrix, f3: FeatureMatrix) -> "TwoStageFusion":
        self.fit_transform(f1, f2, f3)
        return self

    def fit_transform(self, f1: FeatureMatrix, f2: FeatureMatrix, f3: FeatureMatrix) -> FeatureMatrix:
        f1, f2, f3 = stack_modalities([f1, f2, f3])
        self.stage1 = cca_fit(f1, f2, self._stage_dim(f1, f2), self.ridge)
        z12 = ccf_fuse(*cca_transform(self.stage1, f1, f2))
        self.stage2 = cca_fit(z12, f3, self._stage_dim(z12, f3), self.ridge)
        logger.info("[OK] Two-stage CCF fitted: d1=%d, d2=%d, top corrs %.3f / %.3f",
                    self.stage1.d, self.stage2.d, self.stage1.corrs[0], self.stage2.corrs[0])
        return ccf_fuse(*cca_transform(self.stage2, z12, f3), tag="fused")

    def transform(self, f1: FeatureMatrix, f2: FeatureMatrix, f3: FeatureMatrix) -> FeatureMatrix:
        if self.stage1 is None or self.stage2 is None:
            raise RuntimeError("TwoStageFusion.transform called before fit")
        f1, f2, f3 = stack_modalities([f1, f2, f3])
        z12 = ccf_fuse(*cca_transform(self.stage1, f1, f2))
        return ccf_fuse(*cca_transform(self.stage2, z12, f3), tag="fused")


def ccf_two_stage(f1: FeatureMatrix, f2: FeatureMatrix, f3: FeatureMatrix,
                  d: Optional[int] = None, ridge: float = DEFAULT_RIDGE) -> FeatureMatrix:
    """Fit and apply the two-stage fusion on one set of aligned modalities"""
    return TwoStageFusion(d, ridge).fit_transform(f1, f2, f3)
