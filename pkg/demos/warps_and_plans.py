"""Where a measurement plan puts its samples.

Warps a midpoint lattice through the Ward and GGX lobes, checks that the
closed-form inverses undo the warps, and prints how the outgoing directions
of a plan crowd around the mirror direction as the lobe narrows.
"""

import numpy as np

from adaptive_brdf.brdf import GgxParams, WardParams, inverse, sample
from adaptive_brdf.geom import dir_to_spherical, spherical_to_dir
from adaptive_brdf.sampler import plan_measurements

rng = np.random.default_rng(0)
u = rng.random((2, 100_000))
for p in (WardParams(0.2, 0.1), GgxParams(0.2, 0.1)):
    h = sample(p, u[0], u[1])
    err = np.max(np.abs(np.stack(inverse(p, h.theta, h.phi)) - u))
    print(f"{type(p).__name__:10s} round-trip max error {err:.1e}, "
          f"median half-angle {np.degrees(np.median(h.theta)):.2f} deg")

print("\nangle to mirror direction for a 16x16 plan at 30 deg incidence")
for alpha in (0.05, 0.1, 0.3, 0.8):
    plan = plan_measurements(WardParams(0.2, alpha), n_out=16, n_theta_in=8)
    k = int(np.argmin(np.abs(plan.incoming_theta - np.radians(30))))
    wi = plan.wi[k]
    mirror = np.array([-wi[0], -wi[1], wi[2]])
    wo = plan.wo[k][plan.valid[k]]
    ang = np.degrees(np.arccos(np.clip(wo @ mirror, -1, 1)))
    print(f"  alpha {alpha:4.2f}: median {np.median(ang):6.2f} deg, "
          f"90th pct {np.percentile(ang, 90):6.2f} deg, valid {plan.valid[k].mean():.0%}")

theta_i = np.degrees(dir_to_spherical(plan.wi).theta)
print("\nincoming polar angles (deg):", np.round(theta_i, 1))
print("normal incidence reflects to", dir_to_spherical(spherical_to_dir(0.0)))
