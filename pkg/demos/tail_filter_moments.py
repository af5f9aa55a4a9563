"""High-order root moments as tail filters.

The 2k-th root of the 2k-th raw moment interpolates between the standard
deviation scale (k=1) and the largest |x| in the sample (k -> inf).  A
single outlier is invisible at low orders and dominates at high orders.
"""

import numpy as np

from tailica.moments import extremes, log_moment, moment, root_moment

rng = np.random.default_rng(7)

# quiet gaussian noise with one planted 50-sigma print
x = rng.standard_normal(5000)
x[1234] = 50.0
ext = extremes(x)
print(f"sample max |x|      : {ext.x_inf:.4f}")

for p in (2, 8, 32, 64, 128):
    r = root_moment(x, p)
    print(f"root moment order {p:>3d}: {r:10.4f}   ({r / ext.x_inf:6.1%} of the max)")

# the same ladder without the outlier stays near the gaussian scale
clean = np.delete(x, 1234)
print("\nwithout the planted outlier:")
for p in (2, 64):
    print(f"root moment order {p:>3d}: {root_moment(clean, p):10.4f}")

# odd orders keep the sign of the dominant side
skewed = np.array([1.0, 2.0, -9.0, 3.0])
print(f"\nodd-order root of {skewed.tolist()}: {root_moment(skewed, 3):.4f}")

# raw elementwise powers can overflow even when the mean is representable
big = rng.standard_normal(100_000)
big[0] = 1e78
with np.errstate(over="ignore"):
    naive = np.mean(big**4)
print(f"\nnaive mean of x^4 with a 1e78 outlier: {naive}")
print(f"moment(x, 4) stays finite            : {moment(big, 4):.6e}")

# and when the true value is beyond float64, the log form still works
huge = rng.standard_normal(1000) * 1e150
print(f"moment at 1e150 scale saturates      : {moment(huge, 4)}")
print(f"log_moment(x, k=2)                   : {log_moment(huge, 2):.4f} nats")
