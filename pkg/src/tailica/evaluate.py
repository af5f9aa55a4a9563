"""End-to-end experiment harness: calibrate on one date bucket, test on the next.

The pipeline splits a return panel at a boundary date, fits whitening and
an unmixing per contrast order on the in-sample bucket, pushes both
buckets through, and reports tail statistics of the resulting components:
per-component quantiles and root moments, pooled histograms on symmetric
log-spaced bins, and the moment-vs-entropy scatter per symbol.  A seeded
synthetic market generator stands in for proprietary return data.
"""

from __future__ import annotations

import datetime
import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .entropy import EntropyEstimatorConfig, estimate_entropy
from .errors import DataError, DroppedDataWarning
from .ica import ContrastSpec, KktResidual, UnmixingMatrix, fit_ica, kkt_residual, transform
from .moments import moment, root_moment
from .panel import BucketSplit, SamplePanel, split_buckets
from .whiten import WhiteningTransform, apply_whitening, fit_whitening

__all__ = [
    "QUANTILE_LEVELS",
    "TailReport",
    "ScatterRecord",
    "SyntheticMarketSpec",
    "ExperimentArtifacts",
    "generate_market",
    "equal_weight_portfolio",
    "tail_histogram",
    "build_tail_report",
    "scatter_moment_entropy",
    "run_experiment",
    "run_experiment_artifacts",
    "report_to_dict",
    "histogram_to_csv",
    "scatter_to_csv",
]

QUANTILE_LEVELS = (0.001, 0.01, 0.99, 0.999)


@dataclass(frozen=True)
class TailReport:
    """Tail statistics of a component panel for one (contrast order, bucket)."""

    k: int
    bucket: str
    component_ids: tuple
    m: int
    quantiles: np.ndarray  # len(QUANTILE_LEVELS) x d, per component
    root_moments: np.ndarray  # order-2k root moment per component
    excess_kurtosis: np.ndarray
    bin_edges: np.ndarray  # pooled histogram over all component returns
    counts: np.ndarray
    portfolio_bin_edges: np.ndarray  # histogram of the equal-weight portfolio
    portfolio_counts: np.ndarray
    pooled_abs_q999: float
    central_mass: float  # fraction of pooled |returns| below 1

    def __post_init__(self):
        d = len(self.component_ids)
        if self.quantiles.shape != (len(QUANTILE_LEVELS), d):
            raise DataError(f"quantile block has shape {self.quantiles.shape}")
        if np.any(np.diff(self.quantiles, axis=0) < 0.0):
            raise DataError("per-component quantiles are not monotone")
        if int(self.counts.sum()) != self.m * d:
            raise DataError(
                f"pooled histogram counts sum to {int(self.counts.sum())}, "
                f"expected m*d = {self.m * d}"
            )
        if int(self.portfolio_counts.sum()) != self.m:
            raise DataError("portfolio histogram counts do not sum to m")


@dataclass(frozen=True)
class ScatterRecord:
    """One symbol's (root moment, entropy) point for the association plot."""

    column_id: str
    root_moment_10: float
    entropy: float
    bucket: str

    def __post_init__(self):
        if not (math.isfinite(self.root_moment_10) and math.isfinite(self.entropy)):
            raise DataError(f"non-finite scatter record for {self.column_id!r}")


@dataclass(frozen=True)
class SyntheticMarketSpec:
    """Factor-driven Student-t market with a late crash regime.

    Assets load on one common factor; idiosyncratic shocks are Student-t
    with per-asset tail exponent drawn from ``nu_range`` (use infinities
    for a Gaussian market).  The factor mixes in rare fixed-size "tremor"
    days throughout, and from ``crash_start`` (fraction of the sample
    range) onward, factor draws are amplified by ``crash_scale`` with
    probability ``crash_prob`` per day, so the crash regime can be placed
    entirely in the out-of-sample bucket.  Returns are in percent.
    """

    n_assets: int = 50
    m_samples: int = 4000
    nu_range: tuple = (3.0, 8.0)
    nu_factor: float = 8.0
    loading_range: tuple = (0.3, 0.8)
    vol_range: tuple = (0.7, 1.4)
    tremor_prob: float = 0.015
    tremor_scale: float = 3.5
    crash_prob: float = 0.05
    crash_scale: float = 4.5
    crash_start: float = 0.5
    start_date: str = "2014-01-01"
    seed: int = 0

    def __post_init__(self):
        if int(self.n_assets) < 1:
            raise DataError(f"n_assets must be >= 1, got {self.n_assets}")
        if int(self.m_samples) < 2:
            raise DataError(f"m_samples must be >= 2, got {self.m_samples}")
        lo, hi = self.nu_range
        if not (lo <= hi) or lo <= 2.0:
            raise DataError(f"nu_range must satisfy 2 < lo <= hi, got {self.nu_range}")
        if math.isinf(lo) != math.isinf(hi):
            raise DataError("nu_range endpoints must be both finite or both infinite")
        if not self.nu_factor > 2.0:
            raise DataError(f"nu_factor must exceed 2, got {self.nu_factor}")
        blo, bhi = self.loading_range
        if not (0.0 <= blo <= bhi <= 1.0):
            raise DataError(f"loading_range must lie in [0, 1], got {self.loading_range}")
        vlo, vhi = self.vol_range
        if not (0.0 < vlo <= vhi):
            raise DataError(f"vol_range must be positive, got {self.vol_range}")
        for name in ("tremor_prob", "crash_prob", "crash_start"):
            value = getattr(self, name)
            if not (0.0 <= value <= 1.0):
                raise DataError(f"{name} must lie in [0, 1], got {value}")
        if self.tremor_scale < 0.0 or self.crash_scale < 0.0:
            raise DataError("tremor_scale and crash_scale must be non-negative")
        try:
            datetime.date.fromisoformat(self.start_date)
        except ValueError:
            raise DataError(f"invalid start_date {self.start_date!r}") from None


def _standardized_t(rng, df, size):
    """Unit-variance Student-t draws; infinite df means Gaussian."""
    df = np.asarray(df, dtype=np.float64)
    if np.all(np.isinf(df)):
        return rng.standard_normal(size)
    return rng.standard_t(df, size) / np.sqrt(df / (df - 2.0))


def generate_market(spec: SyntheticMarketSpec) -> SamplePanel:
    """Deterministic synthetic return panel from a market spec."""
    n = int(spec.n_assets)
    m = int(spec.m_samples)
    rng = np.random.default_rng(spec.seed)
    lo, hi = spec.nu_range
    nus = np.full(n, np.inf) if math.isinf(lo) else rng.uniform(lo, hi, n)
    betas = rng.uniform(spec.loading_range[0], spec.loading_range[1], n)
    vols = rng.uniform(spec.vol_range[0], spec.vol_range[1], n)
    factor = _standardized_t(rng, spec.nu_factor, m)
    idio = _standardized_t(rng, nus[np.newaxis, :], (m, n))
    tremor_u = rng.random(m)
    tremor_sign = np.where(rng.random(m) < 0.5, -1.0, 1.0)
    crash_u = rng.random(m)
    tremor_days = tremor_u < spec.tremor_prob
    factor = np.where(tremor_days, spec.tremor_scale * tremor_sign, factor)
    crash_days = (crash_u < spec.crash_prob) & (
        np.arange(m) >= spec.crash_start * m
    )
    factor = np.where(crash_days, factor * spec.crash_scale, factor)
    data = vols * (betas * factor[:, np.newaxis] + np.sqrt(1.0 - betas**2) * idio)
    start = datetime.date.fromisoformat(spec.start_date)
    dates = tuple((start + datetime.timedelta(days=i)).isoformat() for i in range(m))
    ids = tuple(f"S{i + 1:04d}" for i in range(n))
    return SamplePanel(data, ids, dates)


def equal_weight_portfolio(components: SamplePanel) -> np.ndarray:
    """Row means: the return series of an equally weighted portfolio."""
    return components.data.mean(axis=1)


def tail_histogram(values, core_half_width: float = 2.0, core_bins: int = 41, tail_bins: int = 30):
    """Histogram on a linear core plus symmetric log-spaced tails.

    Edges: ``core_bins`` linear bins on [-w, w] and ``tail_bins``
    log-spaced bins per side out to just past the largest absolute value,
    101 bins with the defaults.  Returns (edges, counts); counts always
    sum to ``len(values)``.
    """
    v = np.asarray(values, dtype=np.float64).ravel()
    if v.size == 0:
        raise DataError("cannot histogram an empty sample")
    if not np.all(np.isfinite(v)):
        raise DataError("histogram input has non-finite entries")
    w = float(core_half_width)
    limit = max(float(np.abs(v).max()) * (1.0 + 1e-9), 1.25 * w)
    tail = np.geomspace(w, limit, int(tail_bins) + 1)
    core = np.linspace(-w, w, int(core_bins) + 1)
    edges = np.concatenate([-tail[::-1], core[1:-1], tail])
    counts, _ = np.histogram(v, edges)
    return edges, counts


def build_tail_report(components: SamplePanel, k: int, bucket: str) -> TailReport:
    """Tail statistics of a component panel (see :class:`TailReport`)."""
    data = components.data
    m, d = data.shape
    quantiles = np.quantile(data, QUANTILE_LEVELS, axis=0)
    roots = np.array([root_moment(data[:, j], 2 * int(k)) for j in range(d)])
    m2 = np.array([moment(data[:, j], 2) for j in range(d)])
    m4 = np.array([moment(data[:, j], 4) for j in range(d)])
    if np.any(m2 == 0.0):
        raise DataError("constant component column; kurtosis undefined")
    kurtosis = m4 / m2**2 - 3.0
    pooled = data.ravel()
    edges, counts = tail_histogram(pooled)
    portfolio = equal_weight_portfolio(components)
    p_edges, p_counts = tail_histogram(portfolio)
    abs_pooled = np.abs(pooled)
    return TailReport(
        k=int(k),
        bucket=str(bucket),
        component_ids=components.column_ids,
        m=m,
        quantiles=quantiles,
        root_moments=roots,
        excess_kurtosis=kurtosis,
        bin_edges=edges,
        counts=counts,
        portfolio_bin_edges=p_edges,
        portfolio_counts=p_counts,
        pooled_abs_q999=float(np.quantile(abs_pooled, 0.999)),
        central_mass=float(np.mean(abs_pooled < 1.0)),
    )


def scatter_moment_entropy(
    panel: SamplePanel, bucket_label: str, entropy_config: EntropyEstimatorConfig = None
) -> list:
    """Per-symbol (order-10 root moment, entropy) records.

    Columns are centered before the root moment (moments are defined for
    centered variables); entropy is translation-invariant so the raw
    column is passed through.  Constant columns are skipped with a
    warning.
    """
    config = entropy_config or EntropyEstimatorConfig()
    records = []
    skipped = []
    for j, cid in enumerate(panel.column_ids):
        col = panel.data[:, j]
        centered = col - col.mean()
        if np.abs(centered).max() == 0.0:
            skipped.append(cid)
            continue
        records.append(
            ScatterRecord(
                column_id=cid,
                root_moment_10=root_moment(centered, 10),
                entropy=estimate_entropy(col, config).value,
                bucket=str(bucket_label),
            )
        )
    if skipped:
        warnings.warn(
            f"skipped {len(skipped)} constant columns: " + ", ".join(skipped[:10]),
            DroppedDataWarning,
            stacklevel=2,
        )
    return records


@dataclass(frozen=True)
class ExperimentArtifacts:
    """Everything a calibration run produces, keyed by contrast order."""

    split: BucketSplit
    whitening: WhiteningTransform
    unmixings: dict  # k -> UnmixingMatrix
    reports: list  # TailReport, ordered (k, in) then (k, out) per k
    kkt: dict  # k -> in-sample KktResidual of the fitted unmixing
    identity_kkt: dict  # k -> in-sample KktResidual of the identity unmixing
    scatter_in: list
    scatter_out: list


def _worker_count(n_tasks: int, max_workers=None) -> int:
    if max_workers is None:
        env = os.environ.get("TAILICA_THREADS", "0").strip()
        try:
            max_workers = int(env)
        except ValueError:
            raise ValueError(f"TAILICA_THREADS must be an integer, got {env!r}") from None
    if max_workers < 0:
        raise ValueError(f"worker count must be >= 0, got {max_workers}")
    if max_workers == 0:
        max_workers = os.cpu_count() or 1
    return max(1, min(n_tasks, max_workers))


def run_experiment_artifacts(
    panel: SamplePanel,
    boundary: str,
    d: int,
    k_list,
    entropy_config: EntropyEstimatorConfig = None,
    seed: int = 0,
    tol: float = 1e-8,
    max_iter: int = 1000,
    eig_floor: float = 1e-10,
    standardize: bool = False,
    max_workers=None,
) -> ExperimentArtifacts:
    """Full calibration run; see :func:`run_experiment` for the report-only view.

    Contrast orders are fitted independently (optionally in parallel,
    capped by ``TAILICA_THREADS``) and merged in ``k_list`` order, so the
    artifacts are identical however the work is scheduled.
    """
    k_list = [int(k) for k in k_list]
    if not k_list:
        raise ValueError("k_list must not be empty")
    if len(set(k_list)) != len(k_list):
        raise ValueError(f"duplicate contrast orders in k_list: {k_list}")
    entropy_config = entropy_config or EntropyEstimatorConfig()
    split = split_buckets(panel, boundary)
    whitening = fit_whitening(split.in_sample, d, eig_floor=eig_floor, standardize=standardize)
    z_in = apply_whitening(whitening, split.in_sample)
    z_out = apply_whitening(whitening, split.out_sample)
    identity = UnmixingMatrix(
        w=np.eye(whitening.d), k=1, seed=int(seed), iterations=0, converged=True
    )

    def fit_one(k: int):
        unmixing = fit_ica(z_in, ContrastSpec(k), seed=seed, tol=tol, max_iter=max_iter)
        u_in = transform(unmixing, z_in)
        u_out = transform(unmixing, z_out)
        return (
            unmixing,
            build_tail_report(u_in, k, "in"),
            build_tail_report(u_out, k, "out"),
            kkt_residual(z_in, unmixing, k),
            kkt_residual(z_in, identity, k),
        )

    workers = _worker_count(len(k_list), max_workers)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(fit_one, k_list))
    else:
        results = [fit_one(k) for k in k_list]
    unmixings = {}
    reports = []
    kkt = {}
    identity_kkt = {}
    for k, (unmixing, report_in, report_out, res, res_id) in zip(k_list, results):
        unmixings[k] = unmixing
        reports.extend([report_in, report_out])
        kkt[k] = res
        identity_kkt[k] = res_id
    return ExperimentArtifacts(
        split=split,
        whitening=whitening,
        unmixings=unmixings,
        reports=reports,
        kkt=kkt,
        identity_kkt=identity_kkt,
        scatter_in=scatter_moment_entropy(split.in_sample, "in", entropy_config),
        scatter_out=scatter_moment_entropy(split.out_sample, "out", entropy_config),
    )


def run_experiment(
    panel: SamplePanel,
    boundary: str,
    d: int,
    k_list,
    entropy_config: EntropyEstimatorConfig = None,
    seed: int = 0,
    **kwargs,
) -> list:
    """Calibrate on the in-sample bucket and report tails of both buckets.

    Returns one in-sample and one out-of-sample :class:`TailReport` per
    contrast order in ``k_list``, in that order.
    """
    artifacts = run_experiment_artifacts(
        panel, boundary, d, k_list, entropy_config, seed, **kwargs
    )
    return artifacts.reports


def report_to_dict(report: TailReport) -> dict:
    """JSON-ready dict of a tail report (histograms ship separately as CSV)."""
    return {
        "k": report.k,
        "bucket": report.bucket,
        "m": report.m,
        "d": len(report.component_ids),
        "component_ids": list(report.component_ids),
        "quantile_levels": list(QUANTILE_LEVELS),
        "quantiles": [list(map(float, row)) for row in report.quantiles],
        "root_moments": [float(v) for v in report.root_moments],
        "excess_kurtosis": [float(v) for v in report.excess_kurtosis],
        "pooled_abs_q999": report.pooled_abs_q999,
        "central_mass": report.central_mass,
    }


def histogram_to_csv(edges, counts) -> str:
    lines = ["bin_left,bin_right,count"]
    edge_list = np.asarray(edges).tolist()
    count_list = np.asarray(counts).tolist()
    for i, count in enumerate(count_list):
        lines.append(f"{edge_list[i]!r},{edge_list[i + 1]!r},{int(count)}")
    return "\n".join(lines) + "\n"


def scatter_to_csv(records) -> str:
    lines = ["symbol,root_moment_10,entropy"]
    for rec in records:
        lines.append(f"{rec.column_id},{rec.root_moment_10!r},{rec.entropy!r}")
    return "\n".join(lines) + "\n"
