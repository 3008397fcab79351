"""Invariant section of F(x, y) = (x/9, y/3 + sin(50 x)) and its Hölder exponent."""

import numpy as np

from holderlab.bunching import BracketingReport, predicted_exponent
from holderlab.estimation import fit_holder, sample_pairs
from holderlab.sections import contraction_ratio, holder_budget, lacunary_oracle, shear_example, solve_invariant_section

fc = shear_example()
s = solve_invariant_section(fc, tol=1e-8)
x, v = s.on_window(-1.0, 1.0)
err = np.max(np.abs(v - lacunary_oracle(fc.base.n, fc.base.window(-1.0, 1.0))))
print("lattice points in [-1, 1]:", len(x))
print("iterations: %d, contraction ratio %.6f" % (len(s.log), contraction_ratio(s)))
print("sup error against the lacunary series: %.2e" % err)
print("s(pi/100) = %.10f (exact 1.5)" % s(np.array([np.pi / 100]))[0])

fit = fit_holder(sample_pairs(s, (-1.0, 1.0), 4000, 2.0**-14, 2.0**-8, seed=0))
pred = predicted_exponent(BracketingReport.from_constants(mu=1 / 9, nu=1 / 3), "ThmA_cu")
print("fitted exponent %.4f, predicted bound %.4f" % (fit.theta_hat, pred.theta_max))

for theta in (0.3, 0.4, 0.45, 0.49):
    b = holder_budget(fc, theta, D=4.0, delta=2.0)
    print("budget at theta %.2f: H = %.4g" % (theta, b.H))
