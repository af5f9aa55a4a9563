"""Differential-entropy estimators built on order-statistic spacings.

Three estimators over the sorted sample x_(1) <= ... <= x_(m) with a
spacing window n (default floor(sqrt(m))), indices clamped to [1, m]:

* vasicek:  H = 1/(m+1) * sum_j ln[(m+1)/(2n) * (x_(j+n) - x_(j-n))].
  Note the 1/(m+1) outer weight; the classical form divides by m.
* ebrahimi: same spacings with per-rank boundary coefficients c_j, which
  remove the repeated-endpoint bias of the clamped windows.
* correa:   local linear regression of the order statistics on their
  ranks inside each window.

All values are in nats.  Exact ties are perturbed upward by one float
increment (with a warning) before spacings are formed, so only a fully
constant sample is degenerate.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DataError, TieWarning
from .moments import log_moment
from .panel import SamplePanel

__all__ = [
    "EntropyEstimatorConfig",
    "EntropyEstimate",
    "vasicek_entropy",
    "ebrahimi_entropy",
    "correa_entropy",
    "estimate_entropy",
    "entropy_moment_approximation",
    "mutual_information_proxy",
    "default_window",
]

_METHODS = ("vasicek", "ebrahimi", "correa")


@dataclass(frozen=True)
class EntropyEstimatorConfig:
    """Estimator choice plus spacing window; window None means floor(sqrt(m))."""

    method: str = "correa"
    window_n: int = None

    def __post_init__(self):
        if self.method not in _METHODS:
            raise ValueError(f"method must be one of {_METHODS}, got {self.method!r}")
        if self.window_n is not None and int(self.window_n) < 1:
            raise ValueError(f"window_n must be >= 1, got {self.window_n}")


@dataclass(frozen=True)
class EntropyEstimate:
    """Entropy value in nats plus the metadata of the producing call."""

    value: float
    method: str
    window_n: int
    m: int


def default_window(m: int) -> int:
    return int(math.isqrt(int(m)))


def _prepare(sample, n) -> tuple:
    x = np.asarray(sample, dtype=np.float64).ravel()
    if x.size < 3:
        raise DataError(f"entropy estimation needs at least 3 observations, got {x.size}")
    if not np.all(np.isfinite(x)):
        raise DataError("sample contains non-finite entries")
    m = x.size
    n = default_window(m) if n is None else int(n)
    if n < 1:
        raise ValueError(f"window must be >= 1, got {n}")
    if m < 2 * n + 1:
        raise ValueError(f"window {n} needs at least {2 * n + 1} observations, got {m}")
    xs = np.sort(x)
    if xs[0] == xs[-1]:
        raise DataError("constant sample: differential entropy undefined")
    if np.any(np.diff(xs) == 0.0):
        warnings.warn(
            "tied sample values perturbed by one float step before spacing "
            "computation",
            TieWarning,
            stacklevel=3,
        )
        first = int(np.argmin(np.diff(xs) > 0.0))
        for i in range(first + 1, m):
            if xs[i] <= xs[i - 1]:
                xs[i] = np.nextafter(xs[i - 1], np.inf)
    return xs, m, n


def _padded(xs: np.ndarray, n: int) -> np.ndarray:
    return np.concatenate([np.repeat(xs[:1], n), xs, np.repeat(xs[-1:], n)])


def _spacings(xs: np.ndarray, m: int, n: int) -> np.ndarray:
    xp = _padded(xs, n)
    spac = xp[2 * n :] - xp[: m]
    if np.any(spac <= 0.0):
        raise DataError("zero spacing after tie handling; sample too degenerate")
    return spac


def vasicek_entropy(sample, n: int = None) -> EntropyEstimate:
    xs, m, n = _prepare(sample, n)
    spac = _spacings(xs, m, n)
    value = float(np.sum(np.log((m + 1) / (2 * n) * spac)) / (m + 1))
    return EntropyEstimate(value, "vasicek", n, m)


def ebrahimi_entropy(sample, n: int = None) -> EntropyEstimate:
    xs, m, n = _prepare(sample, n)
    spac = _spacings(xs, m, n)
    j = np.arange(1, m + 1)
    c = np.full(m, 2.0)
    c[j <= n] = 1.0 + (j[j <= n] - 1) / n
    c[j > m - n] = 1.0 + (m - j[j > m - n]) / n
    value = float(np.mean(np.log(m * spac / (c * n))))
    return EntropyEstimate(value, "ebrahimi", n, m)


def correa_entropy(sample, n: int = None) -> EntropyEstimate:
    """Local-regression spacing estimator.

    For each rank i, regress the clamped window x_(i-n)..x_(i+n) on the
    rank offsets -n..n; H = -mean(ln(slope_i / m)).  Windowed sums are
    taken from prefix sums so the whole estimate is O(m).
    """
    xs, m, n = _prepare(sample, n)
    xs = xs - xs.mean()  # bounds cancellation in the windowed sums below
    xp = _padded(xs, n)
    w = 2 * n + 1
    t = np.arange(xp.size, dtype=np.float64)
    cum1 = np.concatenate([[0.0], np.cumsum(xp)])
    cum2 = np.concatenate([[0.0], np.cumsum(xp * xp)])
    cumt = np.concatenate([[0.0], np.cumsum(t * xp)])
    idx = np.arange(m)
    s1 = cum1[idx + w] - cum1[idx]  # sum of window values
    s2 = cum2[idx + w] - cum2[idx]  # sum of squared window values
    st = cumt[idx + w] - cumt[idx]  # sum of (padded index * value)
    # numerator sum((x - xbar) * (j - i)) = sum over offsets of offset * x
    num = st - (idx + n) * s1
    ss = s2 - s1 * s1 / w  # sum((x - xbar)^2)
    if np.any(ss <= 0.0):
        raise DataError("zero local variance window; sample too degenerate")
    if np.any(num <= 0.0):
        raise DataError("non-positive local slope; sample too degenerate")
    value = float(-np.mean(np.log(num / (m * ss))))
    return EntropyEstimate(value, "correa", n, m)


_ESTIMATORS = {
    "vasicek": vasicek_entropy,
    "ebrahimi": ebrahimi_entropy,
    "correa": correa_entropy,
}


def estimate_entropy(sample, config: EntropyEstimatorConfig) -> EntropyEstimate:
    """Dispatch to the configured estimator."""
    return _ESTIMATORS[config.method](sample, config.window_n)


def entropy_moment_approximation(sample, k: int, n: int = None) -> float:
    """Entropy approximation from the order-2k log moment.

    Returns (1/2k) ln M_2k + (1/2k) ln m + ln((m+1)/(2n)): the value the
    spacing estimators approach when a single extreme observation carries
    the moment.  Leading-order only; the error term is O(1).
    """
    x = np.asarray(sample, dtype=np.float64).ravel()
    m = x.size
    n = default_window(m) if n is None else int(n)
    if n < 1:
        raise ValueError(f"window must be >= 1, got {n}")
    if m < 2 * n + 1:
        raise ValueError(f"window {n} needs at least {2 * n + 1} observations, got {m}")
    lm = log_moment(x, int(k))
    kk = 2 * int(k)
    return lm / kk + math.log(m) / kk + math.log((m + 1) / (2 * n))


def mutual_information_proxy(components: SamplePanel, config: EntropyEstimatorConfig) -> float:
    """Sum of marginal entropies of a whitened component panel.

    Under a fixed whitening, rotations leave the joint entropy unchanged,
    so the rotation minimizing this sum is the most independent one
    (lower is better).  Requires centered, unit-variance columns; the
    value is only comparable across unmixings of the same data.
    """
    data = components.data
    means = np.abs(data.mean(axis=0))
    if np.any(means > 1e-6):
        j = int(np.argmax(means))
        raise DataError(
            f"column {components.column_ids[j]!r} not centered (|mean|={means[j]:.3e})"
        )
    variances = (data**2).mean(axis=0)
    if np.any(np.abs(variances - 1.0) > 1e-6):
        j = int(np.argmax(np.abs(variances - 1.0)))
        raise DataError(
            f"column {components.column_ids[j]!r} not unit variance "
            f"(var={variances[j]:.6f}); whiten the panel first"
        )
    return float(sum(estimate_entropy(data[:, j], config).value for j in range(data.shape[1])))
