"""Tail covariance matrices: mixed moments E(s_i * s_j^(2k-1)).

At k=1 this is the ordinary covariance matrix (1/m convention).  For
k > 1 the matrix is generally asymmetric: entry (i, j) weights column i
by the (2k-1)-th power of column j, so column j's tail events dominate.
As k grows, entry (i, j) is driven entirely by column j's single largest
absolute observation; :func:`max_overlap_covariance` computes that limit
directly.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DataError, TieWarning
from .panel import SamplePanel

__all__ = [
    "TailCovarianceMatrix",
    "tail_covariance",
    "max_overlap_covariance",
    "tail_covariance_to_csv",
    "off_diagonal_stats",
]


@dataclass(frozen=True)
class TailCovarianceMatrix:
    """Order-k tail covariance of a component panel."""

    order_k: int
    values: np.ndarray
    component_ids: tuple

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 2 or values.shape[0] != values.shape[1]:
            raise DataError(f"tail covariance must be square, got {values.shape}")
        if not np.all(np.isfinite(values)):
            raise DataError("tail covariance has non-finite entries")
        values = values.copy()
        values.flags.writeable = False
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "component_ids", tuple(self.component_ids))

    @property
    def d(self) -> int:
        return self.values.shape[0]


def _check_centered(data: np.ndarray, column_ids) -> None:
    means = np.abs(data.mean(axis=0))
    scales = np.sqrt((data**2).mean(axis=0))
    bad = means > 1e-8 * np.maximum(scales, 1e-300)
    if np.any(bad):
        j = int(np.argmax(bad))
        raise DataError(
            f"column {column_ids[j]!r} is not centered "
            f"(|mean|={means[j]:.3e}, scale={scales[j]:.3e}); center the panel first"
        )


def tail_covariance(
    components: SamplePanel, k: int, check_centered: bool = True
) -> TailCovarianceMatrix:
    """Order-k tail covariance: entry (i,j) = mean over rows of s_i * s_j^(2k-1).

    Columns are expected to be centered; ``check_centered=False`` skips the
    check for raw mixed-moment use (diagnostics on uncentered series).
    Each power column is rescaled by an exact power of two bracketing its
    max absolute value before summation, so entries never overflow and
    match direct evaluation bit for bit when the direct form is in range.
    """
    k = int(k)
    if k < 1:
        raise ValueError(f"order k must be a positive integer, got {k}")
    data = components.data
    if check_centered:
        _check_centered(data, components.column_ids)
    m, d = data.shape
    col_inf = np.abs(data).max(axis=0)
    _, exp2 = np.frexp(col_inf)
    exp2 = np.where(col_inf > 0.0, exp2, 0)
    ratios = np.ldexp(data, -exp2[np.newaxis, :])
    powers = ratios ** (2 * k - 1)
    values = data.T @ powers / m
    values = np.ldexp(values, (exp2 * (2 * k - 1))[np.newaxis, :])
    return TailCovarianceMatrix(k, values, components.column_ids)


def max_overlap_covariance(components: SamplePanel, check_centered: bool = True) -> np.ndarray:
    """Large-k limit of the normalized tail covariance.

    Entry (i, j) = s_i(t*_j) * s_j(t*_j) where t*_j is the time of column
    j's largest absolute value: the co-movement of column i at column j's
    single most extreme observation.  Columns with a tied max-abs index
    are reported with a :class:`TieWarning`; the earliest index is used.
    """
    data = components.data
    if check_centered:
        _check_centered(data, components.column_ids)
    abs_data = np.abs(data)
    col_inf = abs_data.max(axis=0)
    if np.any(col_inf == 0.0):
        j = int(np.argmax(col_inf == 0.0))
        raise DataError(f"column {components.column_ids[j]!r} is identically zero")
    t_star = abs_data.argmax(axis=0)
    tied = (abs_data == col_inf[np.newaxis, :]).sum(axis=0) > 1
    if np.any(tied):
        names = [components.column_ids[j] for j in np.flatnonzero(tied)]
        warnings.warn(
            "tied max-abs index in columns "
            + ", ".join(names)
            + "; using the earliest index",
            TieWarning,
            stacklevel=2,
        )
    d = data.shape[1]
    peak = data[t_star, np.arange(d)]
    return data[t_star, :].T * peak[np.newaxis, :]


def off_diagonal_stats(matrix: np.ndarray) -> tuple:
    """(max absolute off-diagonal entry, Frobenius norm of the off-diagonal part).

    Diagnostics for how diagonal a tail covariance is; no normalization
    is applied.
    """
    a = np.asarray(matrix, dtype=np.float64)
    off = a - np.diag(np.diag(a))
    if a.shape[0] < 2:
        return 0.0, 0.0
    return float(np.abs(off).max()), float(np.sqrt((off**2).sum()))


def tail_covariance_to_csv(tc: TailCovarianceMatrix) -> str:
    """Matrix as CSV with an id header row and id-labelled rows."""
    lines = ["id," + ",".join(tc.component_ids)]
    for cid, row in zip(tc.component_ids, tc.values):
        lines.append(cid + "," + ",".join(repr(v) for v in row.tolist()))
    return "\n".join(lines) + "\n"
