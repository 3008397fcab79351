"""Two leaf conjugacies for a base-perturbed skew product, checked against a structural-stability oracle."""

import time

import numpy as np

from holderlab.bunching import torus_grid
from holderlab.conjugacy import (
    AmalgamSpec,
    anosov_base_conjugacy,
    base_system,
    leaf_conjugacy_center,
    leaf_conjugacy_stable,
    stable_conjugacy_oracle,
    suspension_holonomy,
)
from holderlab.phasespace import torus_dist
from holderlab.systems import SuspensionLoop, SystemSpec

f = SystemSpec("skew_product", eps=0.01)
g = SystemSpec("skew_product", delta=0.01, eps=0.01)
b = torus_grid(8, 2)
pts = np.column_stack([b, np.full(len(b), 0.25)])

h0 = anosov_base_conjugacy(f.A, base_system(g))
print("base oracle: %d sweeps, residual %.1e, sup|h0 - id| %.4f" % (h0.sweeps, h0.residual, h0.sup_displacement))

t0 = time.perf_counter()
spec = AmalgamSpec(f, g)
s = leaf_conjugacy_stable(spec, pts)
print("stable conjugacy vs oracle: %.2e (%.1f s)" % (torus_dist(s, stable_conjugacy_oracle(spec, pts, h0)).max(), time.perf_counter() - t0))

t0 = time.perf_counter()
h = leaf_conjugacy_center(f, g, pts)
print("center conjugacy vs oracle: %.2e (%.1f s)" % (torus_dist(h[:, :2], h0(pts[:, :2])).max(), time.perf_counter() - t0))

out, halving = suspension_holonomy(SuspensionLoop(f, g), pts[:16])
print("suspension holonomy vs center conjugacy: %.2e, step halving %.1e" % (torus_dist(out, h[:16]).max(), halving))
