"""Full pipeline on a synthetic crash-prone market.

Fifty fat-tailed assets share one factor; the second half of the sample
contains a crash regime where factor shocks are amplified.  Components
are calibrated on the quiet first half, then judged on the crash half.
Raising the contrast order from k=2 to k=10 targets further into the
tail, and the out-of-sample tail quantile shrinks while the centre of
the distribution barely moves.
"""

import numpy as np

from tailica.evaluate import (
    SyntheticMarketSpec,
    generate_market,
    run_experiment_artifacts,
)

spec = SyntheticMarketSpec()  # 50 assets, 4000 days, crash from day 2000
market = generate_market(spec)
boundary = market.row_ids[len(market.row_ids) // 2]
print(f"market: {market.data.shape[1]} assets, {market.data.shape[0]} days")
print(f"calibrate before {boundary}, evaluate after\n")

art = run_experiment_artifacts(market, boundary, d=30, k_list=[2, 10], seed=0)

print(f"{'k':>3s} {'bucket':6s} {'q999':>8s} {'central':>9s} {'converged':>10s}")
for r in art.reports:
    w = art.unmixings[r.k]
    print(
        f"{r.k:3d} {r.bucket:6s} {r.pooled_abs_q999:8.3f} "
        f"{r.central_mass:9.4f} {str(w.converged):>10s}"
    )

out = {r.k: r for r in art.reports if r.bucket == "out"}
ratio = out[10].pooled_abs_q999 / out[2].pooled_abs_q999
shift = out[10].central_mass / out[2].central_mass - 1.0
print(f"\nout-of-sample q999 ratio k=10/k=2 : {ratio:.3f}")
print(f"out-of-sample central mass change : {shift:+.2%}")

# raw high-order moments live on enormous scales, so judge the solver's
# residual against the unrotated whitened panel rather than against zero
print()
for k, res in art.kkt.items():
    base = art.identity_kkt[k].off_diagonal_max
    print(
        f"k={k:2d}: off-diagonal tail covariance {res.off_diagonal_max:.2e} "
        f"(unrotated panel: {base:.2e}), "
        f"orthonormality {res.orthonormality_max:.2e}"
    )

# components are unit variance, so the entropy / tail-moment link here is
# purely shape-driven: faint in the quiet half, stronger through the crash
print()
for bucket, records in (("in", art.scatter_in), ("out", art.scatter_out)):
    x = np.log([r.root_moment_10 for r in records])
    y = np.array([r.entropy for r in records])
    print(
        f"{bucket}-sample scatter: corr(ln root moment, entropy) = "
        f"{np.corrcoef(x, y)[0, 1]:.3f} over {len(records)} components"
    )
