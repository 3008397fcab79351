"""
Counterexample gallery.

slanted-conjugacy      a strip foliation whose leaves interpolate between the
                       identity (x = 0) and the map omega(y) = 1/log(e/y)
                       (x = 1).  A leaf conjugacy that translates leaves by
                       tau is Lipschitz in vertical fibers; read along slanted
                       fibers (x + s t, y + t) it inherits the modulus omega.
good-bad-intersection  leaves z = phi_x(c) of the cube, cut by the planes
                       x = const.  The x-holonomy of the first foliation is
                       omega (non-Hölder), but the intersection curves are
                       parallel to the y-axis and their holonomy is the
                       identity.
"""

import numpy as np

from ..errors import DomainError
from ..estimation import fit_holder, sample_pairs

GALLERY = ("slanted-conjugacy", "good-bad-intersection")


def omega(y):
    """1/(1 - log y) on (0, 1], extended by 0 at 0."""
    y = np.asarray(y, dtype=float)
    out = np.zeros_like(y)
    pos = y > 0
    out[pos] = 1.0 / (1.0 - np.log(y[pos]))
    return out


def weight(x):
    return np.sin(0.5 * np.pi * np.asarray(x, dtype=float)) ** 2


def leaf_height(x, c):
    """Height at abscissa x of the leaf with label c (its height at x = 0).

    phi_x(c) = n + (1 - w) u + w omega(u) for c = n + u, u in [0, 1).
    """
    c = np.asarray(c, dtype=float)
    n = np.floor(c)
    u = c - n
    w = weight(x)
    return n + (1 - w) * u + w * omega(u)


def leaf_label(x, z, max_iters=1200):
    """Inverse of c -> phi_x(c) by bisection (phi_x is increasing, phi_x(c + 1) = phi_x(c) + 1).

    The bracket is halved until it stops shrinking in floating point: near
    c = n the label of a leaf can be far below 1e-24 while its height is not.
    """
    z = np.asarray(z, dtype=float)
    n = np.floor(z)
    lo = n.copy()
    hi = n + 1.0
    for _ in range(max_iters):
        mid = 0.5 * (lo + hi)
        if np.all((mid == lo) | (mid == hi)):
            break
        below = leaf_height(x, mid) < z
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    return 0.5 * (lo + hi)


def slanted_conjugacy(y, s, tau=0.5, iters=80):
    """Fiber parameter t of the image of (0, y) read on the slanted fiber (s t, y + t).

    The image leaf has label y + tau; t solves phi_{s t}(y + tau) = y + t.
    """
    y = np.asarray(y, dtype=float)
    c = y + tau
    lo = np.full_like(y, tau - 1.0)
    hi = np.full_like(y, tau + 1.0)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        g = leaf_height(s * mid, c) - (y + mid)
        # g is decreasing in t (leaf slope in t is far below 1)
        lo = np.where(g > 0, mid, lo)
        hi = np.where(g > 0, hi, mid)
    return 0.5 * (lo + hi)


def _leaf_slope(x, z, h=1e-6):
    # d/dx of the leaf height through (x, z)
    c = leaf_label(x, z)
    return (leaf_height(x + h, c) - leaf_height(x - h, c)) / (2 * h)


def slanted_image(y, s, tau=0.5):
    """Image point (s t, y + t) of (0, y) on its slanted fiber."""
    t = slanted_conjugacy(y, s, tau)
    return np.column_stack([s * t, np.asarray(y, dtype=float) + t])


def intersection_field(x, z):
    """Unit tangent (dx, dy, dz) of the intersection curves: n_F x e_x with n_F = (a, 0, -1)."""
    a = _leaf_slope(x, z)
    nF = np.stack([a, np.zeros_like(a), -np.ones_like(a)], -1)
    t = np.cross(nF, np.array([1.0, 0.0, 0.0]))
    t = -t / np.linalg.norm(t, axis=-1, keepdims=True)
    return t


def intersection_holonomy(x0, z, steps=16):
    """Trace the intersection curve inside the plane x = x0 from y = 0 to y = 1 (RK4)."""
    p = np.stack(np.broadcast_arrays(np.full_like(np.asarray(z, float), x0), np.zeros_like(z, dtype=float), np.asarray(z, float)), -1)
    h = 1.0 / steps

    def rhs(q):
        v = intersection_field(q[..., 0], q[..., 2])
        return v / v[..., 1:2]  # parametrise by y

    for _ in range(steps):
        k1 = rhs(p)
        k2 = rhs(p + 0.5 * h * k1)
        k3 = rhs(p + 0.5 * h * k2)
        k4 = rhs(p + h * k3)
        p = p + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
    return p[..., 2]


def slice_holonomy(z):
    """Holonomy of the leaves z = phi_x(c) from x = 0 to x = 1."""
    return leaf_height(1.0, leaf_label(0.0, z))


def run_gallery(name, n_pairs=2000, scale_min=2.0**-24, scale_max=2.0**-4, seed=0, s=0.5, x0=0.7):
    """Returns {label: (samples, fit)} for the named gallery entry."""
    if name not in GALLERY:
        raise DomainError("unknown gallery entry %r (choose from %s)" % (name, ", ".join(GALLERY)))
    out = {}
    if name == "slanted-conjugacy":
        # the singular leaf of the image is y + tau = 1
        anchor = 1.0 - 0.5
        for label, slope in (("vertical", 0.0), ("slanted", s)):
            fn = lambda y, sl=slope: slanted_image(y, sl)
            smp = sample_pairs(fn, (0.0, 1.0), n_pairs, scale_min, scale_max, seed=seed, anchor=anchor)
            out[label] = (smp, fit_holder(smp))
    else:
        inter = lambda z: intersection_holonomy(x0, z)
        smp = sample_pairs(inter, (0.0, 1.0), n_pairs, scale_min, scale_max, seed=seed, anchor=0.0)
        out["intersection"] = (smp, fit_holder(smp))
        smp = sample_pairs(slice_holonomy, (0.0, 1.0), n_pairs, scale_min, scale_max, seed=seed, anchor=0.0)
        out["slice"] = (smp, fit_holder(smp))
    return out
