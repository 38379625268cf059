"""Every estimator in the package against a brute-force oracle.

The rotated d = 4 system has only 2^16 = 65536 error configurations, so
the exact failure rate is a short weighted sum.  That makes it the ideal
calibration target: direct Monte Carlo, the free-energy decomposition,
and rare-event splitting all have to land on the same curve.
"""

import math

import numpy as np

from toriclab import enumeration, geometry, model, montecarlo, splitting

print(__doc__)

geom = geometry.build_geometry("rotated", 4)
print("decoding all 65536 errors once (about 20 seconds)...")
tally = enumeration.exhaustive_weight_tally(geom)


def exact_rate(p):
    total = 0.0
    for (w, cls), count in tally.counts.items():
        if cls != (0, 0):
            total += count * p**w * (1.0 - p) ** (16 - w)
    return total


print()
print(f"{'p':>6} {'exact':>12} {'monte carlo':>12} {'pull':>6}")
for p, seed in ((0.02, 1), (0.05, 2), (0.10, 3)):
    est = montecarlo.estimate_failure_rate(geom, p, 200_000, seed=seed)
    pull = (est.p_hat - exact_rate(p)) / est.sigma
    print(f"{p:>6.2f} {exact_rate(p):>12.6f} {est.p_hat:>12.6f} {pull:>+6.2f}")

print()
print("free-energy decomposition: P = (1-p)^n sum_w exp(-beta F(w)) with")
print("F(w) = w - S(w)/beta reproduces the exact rate to rounding:")
p = 0.05
profile = model.free_energy_profile(geom, p, tally)
print(f"  p = {p}: reconstruction = {profile.reconstruct():.10f}, "
      f"exact = {exact_rate(p):.10f}")
print(f"  minimizing weight at p = {p}: w* = {profile.argmin_weight()}")

print()
print("rare-event splitting: telescoping ratios from an anchor at p = 0.05")
print("down to p = 0.01, each ratio from a pair of Metropolis chains over")
print("failing configurations:")
anchor = exact_rate(0.05)
schedule = splitting.SplitSchedule(
    rates=tuple(splitting.geometric_schedule(0.01, 0.05, ratio=1.8)),
    anchor_p_hat=anchor, anchor_sigma=1e-4 * anchor)
result = splitting.split_failure_rate(geom, schedule, steps=200_000, seed=9)
print(f"{'p':>8} {'split':>12} {'exact':>12} {'pull':>6}")
for p, value, sigma in result.rate_estimates():
    pull = (value - exact_rate(p)) / max(sigma, 1e-15)
    print(f"{p:>8.4f} {value:>12.3e} {exact_rate(p):>12.3e} {pull:>+6.2f}")

print()
print("the same machinery scales to rates around 1e-15 at d = 10, far")
print("beyond what direct sampling could ever see.")
