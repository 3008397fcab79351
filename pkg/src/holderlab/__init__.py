"""Numerical laboratory for invariant foliations, leaf conjugacies and Hölder holonomy on tori."""

__version__ = "0.1.0"
