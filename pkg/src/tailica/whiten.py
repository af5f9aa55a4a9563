"""PCA whitening: center, rotate and rescale a panel to identity covariance.

The fitted transform maps an n-column panel to d <= n uncorrelated
unit-variance columns, the constraint set the unmixing search moves on.
Covariance uses the 1/m convention.  Eigenvectors are ordered by
descending eigenvalue with a fixed sign convention (largest-magnitude
coordinate positive) so repeated fits are bitwise identical.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DataError, ReductionWarning
from .panel import SamplePanel

__all__ = [
    "WhiteningTransform",
    "fit_whitening",
    "apply_whitening",
    "whitening_to_csv",
    "whitening_from_csv",
]


@dataclass(frozen=True)
class WhiteningTransform:
    """Affine map z = projection @ (x - mean) from n assets to d components."""

    mean: np.ndarray
    projection: np.ndarray
    eigenvalues: np.ndarray
    column_ids: tuple

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=np.float64).ravel()
        projection = np.asarray(self.projection, dtype=np.float64)
        eigenvalues = np.asarray(self.eigenvalues, dtype=np.float64).ravel()
        if projection.ndim != 2:
            raise DataError(f"projection must be 2-d, got shape {projection.shape}")
        d, n = projection.shape
        if mean.size != n:
            raise DataError(f"mean has {mean.size} entries for {n} columns")
        if eigenvalues.size != d:
            raise DataError(f"{eigenvalues.size} eigenvalues for {d} projection rows")
        if np.any(eigenvalues <= 0.0):
            raise DataError("eigenvalues must be strictly positive")
        if np.any(np.diff(eigenvalues) > 0.0):
            raise DataError("eigenvalues must be descending")
        if len(self.column_ids) != n:
            raise DataError(f"{len(self.column_ids)} column ids for {n} columns")
        for arr in (mean, projection, eigenvalues):
            if not np.all(np.isfinite(arr)):
                raise DataError("whitening transform has non-finite entries")
            arr.flags.writeable = False
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "projection", projection)
        object.__setattr__(self, "eigenvalues", eigenvalues)
        object.__setattr__(self, "column_ids", tuple(self.column_ids))

    @property
    def d(self) -> int:
        return self.projection.shape[0]

    @property
    def n(self) -> int:
        return self.projection.shape[1]


def _fix_signs(vectors: np.ndarray) -> np.ndarray:
    # one eigenvector per column; make the largest-magnitude entry positive
    idx = np.abs(vectors).argmax(axis=0)
    flips = np.where(vectors[idx, np.arange(vectors.shape[1])] < 0.0, -1.0, 1.0)
    return vectors * flips[np.newaxis, :]


def fit_whitening(
    panel: SamplePanel,
    d: int,
    eig_floor: float = 1e-10,
    standardize: bool = False,
) -> WhiteningTransform:
    """Fit a whitening transform on a panel, keeping the top d eigenvectors.

    Eigenvalues below ``eig_floor`` times the largest are dropped and d is
    reduced accordingly (reported via :class:`ReductionWarning`).  With
    ``standardize`` each column is scaled to unit variance before PCA
    (correlation-matrix whitening); the scaling is folded into the stored
    projection, so applying the transform needs no extra state.
    """
    d = int(d)
    n = panel.n
    if d < 1:
        raise ValueError(f"d must be >= 1, got {d}")
    if d > n:
        raise ValueError(f"d={d} exceeds the panel's {n} columns")
    if panel.m <= d:
        raise ValueError(f"need more than d={d} rows, got {panel.m}")
    if eig_floor <= 0.0:
        raise ValueError(f"eig_floor must be positive, got {eig_floor}")
    x = panel.data
    mean = x.mean(axis=0)
    xc = x - mean
    scale = None
    if standardize:
        scale = np.sqrt((xc**2).mean(axis=0))
        if np.any(scale == 0.0):
            j = int(np.argmax(scale == 0.0))
            raise DataError(f"column {panel.column_ids[j]!r} is constant; cannot standardize")
        xc = xc / scale
    cov = xc.T @ xc / panel.m
    eigenvalues, vectors = np.linalg.eigh(cov)
    order = np.argsort(eigenvalues)[::-1]
    eigenvalues = eigenvalues[order]
    vectors = _fix_signs(vectors[:, order])
    if eigenvalues[0] <= 0.0:
        raise DataError("covariance has no positive eigenvalues (all-constant panel)")
    keep = int(np.sum(eigenvalues >= eig_floor * eigenvalues[0]))
    if keep < d:
        warnings.warn(
            f"requested d={d} but only {keep} eigenvalues clear the floor "
            f"{eig_floor:g} x largest; reducing to d={keep}",
            ReductionWarning,
            stacklevel=2,
        )
        d = keep
    eigenvalues = eigenvalues[:d]
    projection = vectors[:, :d].T / np.sqrt(eigenvalues)[:, np.newaxis]
    if standardize:
        projection = projection / scale[np.newaxis, :]
    return WhiteningTransform(mean, projection, eigenvalues, panel.column_ids)


def apply_whitening(transform: WhiteningTransform, panel: SamplePanel) -> SamplePanel:
    """Project a panel through a fitted transform; columns must match training."""
    if panel.column_ids != transform.column_ids:
        for got, expected in zip(panel.column_ids, transform.column_ids):
            if got != expected:
                raise DataError(f"column mismatch: expected {expected!r}, got {got!r}")
        raise DataError(
            f"panel has {panel.n} columns, transform was fitted on {transform.n}"
        )
    z = (panel.data - transform.mean) @ transform.projection.T
    ids = tuple(f"pc_{i + 1:04d}" for i in range(transform.d))
    return SamplePanel(z, ids, panel.row_ids)


def whitening_to_csv(transform: WhiteningTransform) -> str:
    """Serialize as versioned CSV blocks; floats use repr for exact round-trip."""
    lines = ["tailica-whiten v1"]
    lines.append("columns," + ",".join(transform.column_ids))
    lines.append("mean," + ",".join(repr(v) for v in transform.mean.tolist()))
    lines.append("eigenvalues," + ",".join(repr(v) for v in transform.eigenvalues.tolist()))
    lines.append(f"projection,{transform.d},{transform.n}")
    for row in transform.projection:
        lines.append(",".join(repr(v) for v in row.tolist()))
    return "\n".join(lines) + "\n"


def whitening_from_csv(text: str) -> WhiteningTransform:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0].strip() != "tailica-whiten v1":
        raise DataError("not a tailica-whiten v1 file")
    fields = {}
    row_idx = None
    for i, line in enumerate(lines[1:], start=1):
        key = line.split(",", 1)[0]
        if key in ("columns", "mean", "eigenvalues"):
            fields[key] = line.split(",")[1:]
        elif key == "projection":
            parts = line.split(",")
            if len(parts) != 3:
                raise DataError("malformed projection header")
            fields["shape"] = (int(parts[1]), int(parts[2]))
            row_idx = i + 1
            break
        else:
            raise DataError(f"unexpected block {key!r} in whitening file")
    missing = {"columns", "mean", "eigenvalues", "shape"} - set(fields)
    if missing:
        raise DataError(f"whitening file missing blocks: {sorted(missing)}")
    d, n = fields["shape"]
    rows = lines[row_idx : row_idx + d]
    if len(rows) != d:
        raise DataError(f"expected {d} projection rows, found {len(rows)}")
    try:
        projection = np.array([[float(v) for v in r.split(",")] for r in rows])
        mean = np.array([float(v) for v in fields["mean"]])
        eigenvalues = np.array([float(v) for v in fields["eigenvalues"]])
    except ValueError:
        raise DataError("bad numeric field in whitening file") from None
    if projection.shape != (d, n):
        raise DataError("projection rows have inconsistent width")
    return WhiteningTransform(mean, projection, eigenvalues, tuple(fields["columns"]))
