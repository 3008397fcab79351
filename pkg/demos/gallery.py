"""Counterexample gallery: exponent collapse in slanted fibers, and a good intersection of bad foliations."""

from holderlab.conjugacy import leaf_expansivity_probe
from holderlab.lab.gallery import GALLERY, run_gallery
from holderlab.systems import SystemSpec

for name in GALLERY:
    for label, (smp, fit) in run_gallery(name).items():
        slopes = " ".join("%.2f" % v for _, v in fit.local_slopes)
        print("%-22s %-12s theta_hat %.3f  non-Hölder %-5s  local slopes (fine to coarse): %s"
              % (name, label, fit.theta_hat, fit.non_holder, slopes))

rep = leaf_expansivity_probe(SystemSpec("quotient_cat"), [0.02, 0.01])
print("leaf pair: initial %.4f, max over |k| <= 25 %.4f" % (rep.initial_distance, rep.max_distance))
print("control pair: initial %.4f, max %.4f" % (rep.control_initial, rep.control_max))
