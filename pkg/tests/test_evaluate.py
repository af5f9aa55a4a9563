"""Tests for the synthetic market, tail reports and the experiment driver."""

import datetime
import math

import numpy as np
import pytest

from tailica.entropy import EntropyEstimatorConfig
from tailica.errors import DataError, DroppedDataWarning
from tailica.evaluate import (
    QUANTILE_LEVELS,
    ExperimentArtifacts,
    ScatterRecord,
    SyntheticMarketSpec,
    TailReport,
    build_tail_report,
    equal_weight_portfolio,
    generate_market,
    histogram_to_csv,
    report_to_dict,
    run_experiment,
    run_experiment_artifacts,
    scatter_moment_entropy,
    scatter_to_csv,
    tail_histogram,
)
from tailica.panel import SamplePanel

# asymptotic offset between Gaussian entropy and the order-10 log root
# moment: ln sqrt(2 pi e) - ln(945)/10, with 945 = E[Z^10]
GAUSS_OFFSET = 0.7338200404552985


def small_t_market(seed=0, n=12, m=600):
    return generate_market(
        SyntheticMarketSpec(n_assets=n, m_samples=m, seed=seed)
    )


def panel_from(data, columns=None):
    data = np.asarray(data, dtype=float)
    if columns is None:
        columns = tuple(f"S{j:04d}" for j in range(data.shape[1]))
    start = datetime.date(2000, 1, 1)
    dates = tuple(
        (start + datetime.timedelta(days=i)).isoformat() for i in range(data.shape[0])
    )
    return SamplePanel(data, columns, dates)


def test_market_is_deterministic():
    a = generate_market(SyntheticMarketSpec(n_assets=10, m_samples=300, seed=4))
    b = generate_market(SyntheticMarketSpec(n_assets=10, m_samples=300, seed=4))
    assert np.array_equal(a.data, b.data)
    c = generate_market(SyntheticMarketSpec(n_assets=10, m_samples=300, seed=5))
    assert not np.array_equal(a.data, c.data)


def test_market_shape_ids_and_dates():
    p = generate_market(
        SyntheticMarketSpec(n_assets=7, m_samples=50, start_date="2021-03-01", seed=1)
    )
    assert (p.m, p.n) == (50, 7)
    assert p.column_ids[0] == "S0001"
    assert p.column_ids[-1] == "S0007"
    assert p.row_ids[0] == "2021-03-01"
    assert p.row_ids[1] == "2021-03-02"


def test_market_zero_loading_gives_fat_independent_columns():
    p = generate_market(
        SyntheticMarketSpec(
            n_assets=8,
            m_samples=6000,
            loading_range=(0.0, 0.0),
            tremor_prob=0.0,
            crash_prob=0.0,
            seed=2,
        )
    )
    x = p.data
    corr = np.corrcoef(x, rowvar=False)
    assert np.abs(corr - np.eye(8)).max() < 0.08
    m2 = (x**2).mean(axis=0)
    m4 = (x**4).mean(axis=0)
    assert np.all(m4 / m2**2 - 3.0 > 0.2)  # Student-t excess kurtosis


def test_market_full_loading_gives_one_factor():
    p = generate_market(
        SyntheticMarketSpec(n_assets=6, m_samples=3000, loading_range=(1.0, 1.0), seed=3)
    )
    corr = np.corrcoef(p.data, rowvar=False)
    assert corr.min() > 0.9


def test_market_gaussian_mode_kills_excess_kurtosis():
    p = generate_market(
        SyntheticMarketSpec(
            n_assets=8,
            m_samples=8000,
            nu_range=(math.inf, math.inf),
            nu_factor=math.inf,
            loading_range=(0.0, 0.0),
            tremor_prob=0.0,
            crash_prob=0.0,
            seed=4,
        )
    )
    x = p.data
    m2 = (x**2).mean(axis=0)
    m4 = (x**4).mean(axis=0)
    assert np.abs(m4 / m2**2 - 3.0).max() < 0.3


def test_market_crash_regime_is_confined_to_late_rows():
    spec = SyntheticMarketSpec(
        n_assets=10,
        m_samples=4000,
        tremor_prob=0.0,
        crash_prob=0.08,
        crash_scale=12.0,
        crash_start=0.5,
        seed=5,
    )
    p = generate_market(spec)
    half = p.m // 2
    early = np.abs(p.data[:half]).max()
    late = np.abs(p.data[half:]).max()
    assert late > 2.0 * early


def test_market_spec_validation():
    with pytest.raises(DataError):
        SyntheticMarketSpec(n_assets=0)
    with pytest.raises(DataError):
        SyntheticMarketSpec(nu_range=(2.0, 5.0))
    with pytest.raises(DataError):
        SyntheticMarketSpec(nu_range=(3.0, math.inf))
    with pytest.raises(DataError):
        SyntheticMarketSpec(loading_range=(-0.1, 0.5))
    with pytest.raises(DataError):
        SyntheticMarketSpec(loading_range=(0.5, 1.1))
    with pytest.raises(DataError):
        SyntheticMarketSpec(vol_range=(0.0, 1.0))
    with pytest.raises(DataError):
        SyntheticMarketSpec(crash_prob=1.5)
    with pytest.raises(DataError):
        SyntheticMarketSpec(start_date="01/01/2020")
    with pytest.raises(DataError):
        SyntheticMarketSpec(nu_factor=2.0)


def test_equal_weight_portfolio_is_row_mean():
    p = panel_from([[1.0, 3.0], [2.0, -2.0], [0.0, 5.0]])
    np.testing.assert_array_equal(equal_weight_portfolio(p), [2.0, 0.0, 2.5])


def test_tail_histogram_conserves_counts():
    rng = np.random.default_rng(71)
    v = rng.standard_t(df=3, size=5000)
    v[0] = 1e6  # a far outlier must still land in a bin
    edges, counts = tail_histogram(v)
    assert counts.sum() == v.size
    assert len(edges) == 102  # 41 core + 2 x 30 tail bins
    assert len(counts) == 101
    # the tail grids mirror exactly; the linear core only to roundoff
    np.testing.assert_allclose(edges, -edges[::-1], rtol=1e-15, atol=1e-15)
    assert np.all(np.diff(edges) > 0.0)


def test_tail_histogram_small_samples_use_default_span():
    edges, counts = tail_histogram([0.1, -0.2, 0.3])
    assert counts.sum() == 3
    assert edges[-1] == pytest.approx(2.5)  # 1.25 x core half-width


def test_tail_histogram_errors():
    with pytest.raises(DataError):
        tail_histogram([])
    with pytest.raises(DataError):
        tail_histogram([1.0, np.inf])


def test_build_tail_report_cross_checks():
    rng = np.random.default_rng(72)
    p = panel_from(rng.standard_t(df=4, size=(800, 5)))
    rep = build_tail_report(p, 2, "in")
    pooled = np.abs(p.data.ravel())
    assert rep.pooled_abs_q999 == np.quantile(pooled, 0.999)
    assert rep.central_mass == np.mean(pooled < 1.0)
    assert rep.counts.sum() == 800 * 5
    assert rep.portfolio_counts.sum() == 800
    assert rep.quantiles.shape == (len(QUANTILE_LEVELS), 5)
    # per-component quantiles bracket zero for centered-ish data
    assert np.all(rep.quantiles[0] < 0.0)
    assert np.all(rep.quantiles[-1] > 0.0)
    assert rep.root_moments.shape == (5,)
    assert np.all(rep.root_moments > 0.0)
    assert (rep.k, rep.bucket, rep.m) == (2, "in", 800)


def test_build_tail_report_degenerate_columns():
    # an all-zero column has no second moment to normalize by
    data = np.zeros((100, 2))
    data[:, 0] = np.linspace(-1, 1, 100)
    with pytest.raises(DataError):
        build_tail_report(panel_from(data), 2, "in")
    # a constant nonzero column is defined under raw moments: m4/m2^2 = 1
    data = np.ones((100, 2)) * 7.0
    data[:, 0] = np.linspace(-1, 1, 100)
    rep = build_tail_report(panel_from(data), 2, "in")
    assert rep.excess_kurtosis[1] == -2.0


def test_tail_report_validation():
    rng = np.random.default_rng(73)
    p = panel_from(rng.standard_normal((200, 3)))
    rep = build_tail_report(p, 2, "in")
    broken = dict(
        k=rep.k,
        bucket=rep.bucket,
        component_ids=rep.component_ids,
        m=rep.m,
        quantiles=rep.quantiles,
        root_moments=rep.root_moments,
        excess_kurtosis=rep.excess_kurtosis,
        bin_edges=rep.bin_edges,
        counts=rep.counts,
        portfolio_bin_edges=rep.portfolio_bin_edges,
        portfolio_counts=rep.portfolio_counts,
        pooled_abs_q999=rep.pooled_abs_q999,
        central_mass=rep.central_mass,
    )
    with pytest.raises(DataError):
        TailReport(**{**broken, "counts": rep.counts[:-1]})
    with pytest.raises(DataError):
        TailReport(**{**broken, "portfolio_counts": rep.portfolio_counts * 2})
    with pytest.raises(DataError):
        TailReport(**{**broken, "quantiles": rep.quantiles[::-1]})


def test_scatter_skips_constant_columns():
    rng = np.random.default_rng(74)
    data = rng.standard_normal((400, 3))
    data[:, 1] = 7.0
    p = panel_from(data, ("a", "const", "b"))
    with pytest.warns(DroppedDataWarning, match="const"):
        records = scatter_moment_entropy(p, "in")
    assert [r.column_id for r in records] == ["a", "b"]
    assert all(r.bucket == "in" for r in records)


def test_scatter_gaussian_offset():
    # For Gaussian columns the entropy exceeds the log root moment by
    # ln sqrt(2 pi e) - ln(945)/10 ~ 0.734 regardless of column scale.
    p = generate_market(
        SyntheticMarketSpec(
            n_assets=40,
            m_samples=4000,
            nu_range=(math.inf, math.inf),
            nu_factor=math.inf,
            tremor_prob=0.0,
            crash_prob=0.0,
            seed=11,
        )
    )
    records = scatter_moment_entropy(p, "in")
    offsets = [r.entropy - math.log(r.root_moment_10) for r in records]
    assert np.mean(offsets) == pytest.approx(GAUSS_OFFSET, abs=0.05)


def test_scatter_association_positive_across_scales():
    # columns with spread-out scales: both summaries absorb ln(scale), so
    # the association is strongly positive (light version of the full
    # 200-column check in the acceptance suite)
    rng = np.random.default_rng(75)
    m = 1500
    cols = []
    for _ in range(60):
        nu = rng.uniform(3.0, 8.0)
        vol = math.exp(rng.uniform(math.log(0.5), math.log(5.0)))
        cols.append(vol * rng.standard_t(nu, m) / math.sqrt(nu / (nu - 2.0)))
    p = panel_from(np.column_stack(cols))
    records = scatter_moment_entropy(p, "in")
    lr = np.array([math.log(r.root_moment_10) for r in records])
    h = np.array([r.entropy for r in records])
    assert np.corrcoef(lr, h)[0, 1] > 0.7


def test_scatter_record_rejects_non_finite():
    with pytest.raises(DataError):
        ScatterRecord("x", math.inf, 1.0, "in")


def test_run_experiment_report_cardinality_and_order():
    panel = small_t_market(seed=6)
    boundary = panel.row_ids[panel.m // 2]
    reports = run_experiment(
        panel, boundary, d=6, k_list=[2, 3], max_iter=150, max_workers=1
    )
    assert [(r.k, r.bucket) for r in reports] == [
        (2, "in"),
        (2, "out"),
        (3, "in"),
        (3, "out"),
    ]
    assert all(len(r.component_ids) == 6 for r in reports)


def test_run_experiment_is_deterministic_across_scheduling():
    panel = small_t_market(seed=7)
    boundary = panel.row_ids[panel.m // 2]
    kwargs = dict(d=5, k_list=[2, 3], max_iter=150)
    a = run_experiment_artifacts(panel, boundary, max_workers=1, **kwargs)
    b = run_experiment_artifacts(panel, boundary, max_workers=1, **kwargs)
    c = run_experiment_artifacts(panel, boundary, max_workers=2, **kwargs)
    for other in (b, c):
        for k in (2, 3):
            assert np.array_equal(a.unmixings[k].w, other.unmixings[k].w)
            assert a.kkt[k] == other.kkt[k]
            assert a.identity_kkt[k] == other.identity_kkt[k]
        for ra, ro in zip(a.reports, other.reports):
            assert ra.pooled_abs_q999 == ro.pooled_abs_q999
            assert np.array_equal(ra.counts, ro.counts)
        assert a.scatter_in == other.scatter_in
        assert a.scatter_out == other.scatter_out


def test_run_experiment_artifacts_structure():
    panel = small_t_market(seed=8)
    boundary = panel.row_ids[panel.m // 2]
    art = run_experiment_artifacts(
        panel, boundary, d=4, k_list=[2], max_iter=100, max_workers=1
    )
    assert isinstance(art, ExperimentArtifacts)
    assert set(art.unmixings) == {2}
    assert set(art.kkt) == {2}
    assert set(art.identity_kkt) == {2}
    assert art.whitening.d == 4
    assert art.split.in_sample.m + art.split.out_sample.m == panel.m
    assert len(art.scatter_in) == panel.n
    assert len(art.scatter_out) == panel.n
    # the identity residual exists even when it was never fitted
    assert art.identity_kkt[2].orthonormality_max == 0.0


def test_gaussian_market_central_mass_stable_across_orders():
    # With no tail structure, the choice of contrast order cannot change
    # the distribution bulk: central mass moves by well under 5%.
    spec = SyntheticMarketSpec(
        n_assets=20,
        m_samples=1600,
        nu_range=(math.inf, math.inf),
        nu_factor=math.inf,
        tremor_prob=0.0,
        crash_prob=0.0,
        seed=3,
    )
    panel = generate_market(spec)
    boundary = panel.row_ids[panel.m // 2]
    reports = run_experiment(
        panel, boundary, d=10, k_list=[2, 10], max_iter=200, max_workers=1
    )
    cm = {(r.k, r.bucket): r.central_mass for r in reports}
    for bucket in ("in", "out"):
        rel = abs(cm[(2, bucket)] - cm[(10, bucket)]) / cm[(2, bucket)]
        assert rel < 0.05


def test_run_experiment_validates_k_list():
    panel = small_t_market(seed=9, n=6, m=200)
    boundary = panel.row_ids[panel.m // 2]
    with pytest.raises(ValueError):
        run_experiment(panel, boundary, d=3, k_list=[])
    with pytest.raises(ValueError):
        run_experiment(panel, boundary, d=3, k_list=[2, 2])


def test_worker_count_env_parsing(monkeypatch):
    panel = small_t_market(seed=10, n=6, m=200)
    boundary = panel.row_ids[panel.m // 2]
    monkeypatch.setenv("TAILICA_THREADS", "not-a-number")
    with pytest.raises(ValueError, match="TAILICA_THREADS"):
        run_experiment(panel, boundary, d=3, k_list=[2], max_iter=20)
    monkeypatch.setenv("TAILICA_THREADS", "1")
    reports = run_experiment(panel, boundary, d=3, k_list=[2], max_iter=20)
    assert len(reports) == 2
    with pytest.raises(ValueError):
        run_experiment(
            panel, boundary, d=3, k_list=[2], max_iter=20, max_workers=-1
        )


def test_report_to_dict_is_json_ready():
    import json

    rng = np.random.default_rng(76)
    p = panel_from(rng.standard_normal((300, 4)))
    rep = build_tail_report(p, 3, "out")
    d = report_to_dict(rep)
    text = json.dumps(d)
    back = json.loads(text)
    assert back["k"] == 3
    assert back["bucket"] == "out"
    assert back["d"] == 4
    assert back["quantile_levels"] == [0.001, 0.01, 0.99, 0.999]
    assert back["pooled_abs_q999"] == rep.pooled_abs_q999


def test_histogram_and_scatter_csv_formats():
    edges, counts = tail_histogram([0.5, -0.5, 1.5, 3.0])
    text = histogram_to_csv(edges, counts)
    lines = text.strip().split("\n")
    assert lines[0] == "bin_left,bin_right,count"
    assert len(lines) == 1 + len(counts)
    assert sum(int(l.split(",")[2]) for l in lines[1:]) == 4

    records = [ScatterRecord("S0001", 1.5, 0.25, "in")]
    stext = scatter_to_csv(records)
    assert stext == "symbol,root_moment_10,entropy\nS0001,1.5,0.25\n"
