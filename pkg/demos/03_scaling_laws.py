#!/usr/bin/env python3
"""Closed-form power scaling of the three connectivity families.

Prints the expected best received power over i.i.d. Rayleigh channels, the
power gains of the group and fully connected families over the single
connected baseline, their large-array limits, and the element-count savings
those gains buy.
"""

import numpy as np

import risnet as rn
from risnet.scaling import group_gain_limit

print("== expected best power, unit transmit power, Rayleigh channels ==")
print(f"  {'n':>5} {'single':>10} {'group 2':>10} {'group 4':>10} {'fully':>10}")
for n in (4, 8, 16, 32, 64):
    vals = [rn.expected_power_rayleigh(n, g) for g in (1, 2, 4, n)]
    print(f"  {n:>5} " + " ".join(f"{v:>10.2f}" for v in vals))
print("  (single grows like (pi^2/16) n^2, fully like n^2)")

print("\n== power gain over single connected ==")
print(f"  {'n':>6} {'group 2':>9} {'group 4':>9} {'fully':>9}")
for n in (8, 32, 128, 1024, 4096):
    g2 = rn.power_gain(n, 2).gain_group
    g4 = rn.power_gain(n, 4).gain_group
    gf = rn.power_gain(n, 2).gain_fully
    print(f"  {n:>6} {g2:>9.4f} {g4:>9.4f} {gf:>9.4f}")

print("\n== large-array limits and element savings ==")
for n_g in (2, 3, 4, 6, 8):
    lim = group_gain_limit(n_g)
    delta = rn.element_reduction(lim)
    print(f"  group size {n_g}: gain -> {lim:.4f}, element reduction {delta:.1%}")
print(f"  fully connected: gain -> {rn.FULLY_GAIN_LIMIT:.4f}, "
      f"element reduction {rn.element_reduction(rn.FULLY_GAIN_LIMIT):.1%}")

print("\n== Monte Carlo check of the group expectation ==")
trials = 10**5
for n, n_g in ((8, 2), (16, 4)):
    rng = rn.trial_rng(0, n, n_g)
    h_ri = rn.draw_rayleigh_vector(trials * n, rng).reshape(trials, -1, n_g)
    h_it = rn.draw_rayleigh_vector(trials * n, rng).reshape(trials, -1, n_g)
    bounds = (np.linalg.norm(h_ri, axis=2) * np.linalg.norm(h_it, axis=2)).sum(axis=1) ** 2
    se = bounds.std(ddof=1) / np.sqrt(trials)
    analytic = rn.expected_power_rayleigh(n, n_g)
    print(f"  n={n:>2} n_g={n_g}: monte carlo {bounds.mean():.3f} +- {se:.3f}, "
          f"analytic {analytic:.3f}")
