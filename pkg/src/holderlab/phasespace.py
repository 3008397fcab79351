"""
Geometry of the flat tori T^2, T^3 and of the quotient manifold
T^2 x [0,1] / (x, 0) ~ (-x, 1).

Every function accepts either a single point (shape ``(d,)``) or a stack of
points (shape ``(n, d)``); the last axis is always the coordinate axis.
"""

from dataclasses import dataclass
import itertools

import numpy as np

from .errors import DomainError, OutOfRangeError


def _reduce(v):
    r = np.mod(v, 1.0)
    # np.mod(-1e-17, 1.0) == 1.0 in floating point
    r[r >= 1.0] = 0.0
    return r


def wrap_array(v):
    """Reduce an array of coordinates mod 1 into [0, 1)."""
    v = np.asarray(v, dtype=float)
    if not np.all(np.isfinite(v)):
        raise DomainError("cannot wrap non-finite coordinates")
    return _reduce(np.array(v, dtype=float, copy=True))


@dataclass(frozen=True, eq=False)
class TorusPoint:
    """A point of the d-torus, coordinates in [0, 1)."""

    coords: np.ndarray

    def __post_init__(self):
        c = wrap_array(self.coords)
        if c.ndim != 1:
            raise DomainError("TorusPoint expects a flat coordinate vector")
        c.setflags(write=False)
        object.__setattr__(self, "coords", c)

    @property
    def dim(self):
        return self.coords.shape[0]

    def __array__(self, dtype=None, copy=None):
        return np.array(self.coords, dtype=dtype)

    def __iter__(self):
        return iter(self.coords.tolist())

    def __eq__(self, other):
        if not isinstance(other, TorusPoint):
            return NotImplemented
        return self.dim == other.dim and bool(np.all(self.coords == other.coords))

    def __hash__(self):
        return hash(self.coords.tobytes())

    def __repr__(self):
        return "TorusPoint(%s)" % ", ".join("%.10g" % c for c in self.coords)


def as_array(p):
    if isinstance(p, TorusPoint):
        return np.array(p.coords)
    if isinstance(p, QuotientPoint):
        return np.concatenate([p.base.coords, [p.height]])
    return np.asarray(p, dtype=float)


def wrap(v):
    """Reduce ``v`` mod 1 and return a TorusPoint."""
    return TorusPoint(np.asarray(v, dtype=float))


def torus_delta(p, q):
    """Shortest lattice representative of ``q - p`` (componentwise in [-1/2, 1/2])."""
    p, q = as_array(p), as_array(q)
    if p.shape[-1] != q.shape[-1]:
        raise DomainError("dimension mismatch: %d vs %d" % (p.shape[-1], q.shape[-1]))
    dv = q - p
    return dv - np.round(dv)


def torus_dist(p, q):
    """Flat distance on the torus, i.e. the minimum over lattice translates."""
    return np.linalg.norm(torus_delta(p, q), axis=-1)


def torus_dist_bruteforce(p, q):
    """Minimum over all 3^d neighbouring translates; reference implementation."""
    p, q = as_array(wrap_array(as_array(p))), wrap_array(as_array(q))
    d = p.shape[-1]
    best = np.inf
    for shift in itertools.product((-1, 0, 1), repeat=d):
        best = np.minimum(best, np.linalg.norm(q + np.array(shift) - p, axis=-1))
    return best


def lift_near(p, ref):
    """Lattice translate of ``p`` closest to the real vector ``ref``."""
    ref = np.asarray(ref, dtype=float)
    return ref + torus_delta(ref, as_array(p))


@dataclass(frozen=True)
class Transversal:
    """Straight segment ``base + s * direction``, |s| <= radius."""

    base: TorusPoint
    direction: np.ndarray
    radius: float

    def __post_init__(self):
        base = self.base if isinstance(self.base, TorusPoint) else TorusPoint(self.base)
        direction = np.asarray(self.direction, dtype=float)
        if abs(np.linalg.norm(direction) - 1.0) > 1e-12:
            raise DomainError("transversal direction must have unit length")
        if direction.shape != (base.dim,):
            raise DomainError("direction dimension does not match base")
        if not self.radius > 0:
            raise DomainError("transversal radius must be positive")
        direction = direction.copy()
        direction.setflags(write=False)
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "direction", direction)
        object.__setattr__(self, "radius", float(self.radius))

    @classmethod
    def through(cls, base, direction, radius):
        direction = np.asarray(direction, dtype=float)
        return cls(base, direction / np.linalg.norm(direction), radius)

    @property
    def normal(self):
        if self.base.dim != 2:
            raise DomainError("normal of a transversal is only defined in dimension 2")
        return np.array([-self.direction[1], self.direction[0]])

    def lift(self, s):
        """Points ``base + s * direction`` without reduction mod 1."""
        s = np.asarray(s, dtype=float)
        return self.base.coords + s[..., None] * self.direction


def transversal_point(tau, s):
    if abs(s) > tau.radius * (1 + 1e-12):
        raise OutOfRangeError("|s| = %g exceeds transversal radius %g" % (abs(s), tau.radius))
    return wrap(tau.base.coords + s * tau.direction)


def transversal_points(tau, s):
    """Vectorised ``transversal_point``; returns an (n, d) array."""
    s = np.asarray(s, dtype=float)
    if np.any(np.abs(s) > tau.radius * (1 + 1e-12)):
        raise OutOfRangeError("parameter outside transversal radius %g" % tau.radius)
    return wrap_array(tau.lift(s))


# --- quotient manifold M = T^2 x [0,1] / (x, 0) ~ (-x, 1) -------------------


@dataclass(frozen=True, eq=False)
class QuotientPoint:
    """Canonical representative (base, height) with height in [0, 1)."""

    base: TorusPoint
    height: float

    def __post_init__(self):
        b = as_array(self.base)
        h = float(self.height)
        if not np.isfinite(h) or not np.all(np.isfinite(b)):
            raise DomainError("non-finite quotient coordinates")
        n = np.floor(h)
        h -= n
        if h >= 1.0:
            h, n = 0.0, n + 1
        if int(n) % 2:
            b = -b
        object.__setattr__(self, "base", TorusPoint(b))
        object.__setattr__(self, "height", h)

    def __eq__(self, other):
        if not isinstance(other, QuotientPoint):
            return NotImplemented
        return self.base == other.base and self.height == other.height

    def __hash__(self):
        return hash((self.base, self.height))

    def __repr__(self):
        return "QuotientPoint(base=%r, height=%.10g)" % (self.base, self.height)


def canonical_quotient(v):
    """Canonical (x1, x2, t) representatives for an (n, 3) array."""
    v = np.array(v, dtype=float, copy=True)
    n = np.floor(v[..., 2])
    v[..., 2] -= n
    over = v[..., 2] >= 1.0
    v[..., 2][over] = 0.0
    n = n + over
    odd = (n.astype(np.int64) % 2) == 1
    v[..., :2][odd] *= -1
    v[..., :2] = _reduce(v[..., :2])
    return v


def leaf_pair_hausdorff(p, q):
    """Hausdorff distance between the quotient leaves through base points p and q.

    The leaf through p is the circle {p, -p} x [0,1]; at every height its
    nearest point in the leaf through q sits at the same height, so the
    distance reduces to the Hausdorff distance of {p, -p} and {q, -q} in T^2.
    """
    p, q = as_array(p), as_array(q)
    d_pq = torus_dist(p, q)
    d_pmq = torus_dist(p, -q)
    # d(-p, -q) = d(p, q) and d(-p, q) = d(p, -q)
    return np.minimum(d_pq, d_pmq)
