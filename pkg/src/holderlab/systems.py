"""
Concrete diffeomorphisms of T^2, T^3 and of the quotient manifold.

All maps are built from an integer hyperbolic matrix ``A`` plus low-order
trigonometric perturbations whose amplitudes are configuration data, so the
derivative is always available in closed form.

kinds
-----
linear_anosov     x -> A x                                          (T^2)
perturbed_anosov  x -> A x + delta * P(x)                           (T^2)
skew_product      (b, z) -> (A b + delta * P(b), z + phi_eps(b, z)) (T^3)
perturbed_skew    as skew_product, base also shifted by delta * sin(2 pi z) (1, 1)
quotient_cat      (b, t) -> (A b + delta * P(b), t) on T^2 x [0,1] / (x,0)~(-x,1)

with P(x) = (sin 2 pi x2, sin 2 pi x1) and the fiber rule phi selected by
``shape``: ``shear`` = eps sin(2 pi b1), ``twist`` = eps sin(2 pi z) cos(2 pi b1).
"""

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DomainError, NonConvergenceError, OutOfRangeError
from .phasespace import (
    TorusPoint,
    QuotientPoint,
    as_array,
    canonical_quotient,
    torus_delta,
    wrap_array,
)

CAT = ((2, 1), (1, 1))
KINDS = ("linear_anosov", "perturbed_anosov", "skew_product", "perturbed_skew", "quotient_cat")
SHAPES = ("shear", "twist")
TWO_PI = 2 * np.pi


@dataclass(frozen=True)
class SystemSpec:
    kind: str = "linear_anosov"
    matrix: tuple = CAT
    delta: float = 0.0
    eps: float = 0.0
    shape: str = "shear"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError("unknown system kind %r" % (self.kind,))
        if self.shape not in SHAPES:
            raise DomainError("unknown perturbation shape %r" % (self.shape,))
        m = np.asarray(self.matrix)
        if m.shape != (2, 2) or not np.all(m == np.round(m)):
            raise DomainError("matrix must be a 2x2 integer matrix")
        m = m.astype(int)
        det = int(round(np.linalg.det(m)))
        if abs(det) != 1:
            raise DomainError("matrix must be unimodular, det = %d" % det)
        if abs(int(np.trace(m))) <= 2:
            raise DomainError("matrix is not hyperbolic: |trace| <= 2")
        if self.delta < 0 or self.eps < 0:
            raise DomainError("amplitudes must be non-negative")
        if self.kind == "linear_anosov" and self.delta != 0:
            raise DomainError("linear_anosov takes no perturbation; use perturbed_anosov")
        object.__setattr__(self, "matrix", tuple(tuple(int(a) for a in row) for row in m))
        object.__setattr__(self, "delta", float(self.delta))
        object.__setattr__(self, "eps", float(self.eps))

    @property
    def dim(self):
        return 2 if self.kind in ("linear_anosov", "perturbed_anosov") else 3

    @property
    def A(self):
        return np.array(self.matrix, dtype=float)

    @property
    def A_inv(self):
        (a, b), (c, d) = self.matrix
        det = a * d - b * c
        return np.array([[d, -b], [-c, a]], dtype=float) / det

    @property
    def is_skew(self):
        return self.kind in ("skew_product", "perturbed_skew")

    @property
    def is_linear(self):
        return self.delta == 0 and (self.dim == 2 or self.kind == "quotient_cat" or self.eps == 0)

    def with_amplitudes(self, delta=None, eps=None):
        return replace(
            self,
            delta=self.delta if delta is None else delta,
            eps=self.eps if eps is None else eps,
        )


@dataclass(frozen=True)
class Jet:
    image: TorusPoint
    derivative: np.ndarray


def _points(sys, p):
    x = as_array(p)
    if x.shape[-1] != sys.dim:
        raise DomainError("point of dimension %d given to a %d-dimensional system" % (x.shape[-1], sys.dim))
    return x


def _fiber(sys, b, z):
    if sys.shape == "shear":
        return sys.eps * np.sin(TWO_PI * b[..., 0])
    return sys.eps * np.sin(TWO_PI * z) * np.cos(TWO_PI * b[..., 0])


def lift_map(sys, x):
    """Image of ``x`` without reduction mod 1 (x may be any lift)."""
    x = np.asarray(x, dtype=float)
    b = x[..., :2]
    out = np.empty_like(x)
    out[..., :2] = b @ sys.A.T
    if sys.delta:
        out[..., 0] += sys.delta * np.sin(TWO_PI * b[..., 1])
        out[..., 1] += sys.delta * np.sin(TWO_PI * b[..., 0])
    if sys.dim == 3:
        z = x[..., 2]
        if sys.kind == "quotient_cat":
            out[..., 2] = z
        else:
            out[..., 2] = z + _fiber(sys, b, z)
            if sys.kind == "perturbed_skew" and sys.delta:
                out[..., :2] += sys.delta * np.sin(TWO_PI * z)[..., None]
    return out


def jacobian(sys, x):
    """Analytic derivative at ``x``; shape (..., d, d)."""
    x = np.asarray(x, dtype=float)
    d = sys.dim
    J = np.zeros(x.shape[:-1] + (d, d))
    J[..., :2, :2] = sys.A
    b = x[..., :2]
    if sys.delta:
        J[..., 0, 1] += sys.delta * TWO_PI * np.cos(TWO_PI * b[..., 1])
        J[..., 1, 0] += sys.delta * TWO_PI * np.cos(TWO_PI * b[..., 0])
    if d == 3:
        z = x[..., 2]
        J[..., 2, 2] = 1.0
        if sys.kind != "quotient_cat" and sys.eps:
            if sys.shape == "shear":
                J[..., 2, 0] = sys.eps * TWO_PI * np.cos(TWO_PI * b[..., 0])
            else:
                J[..., 2, 0] = -sys.eps * TWO_PI * np.sin(TWO_PI * z) * np.sin(TWO_PI * b[..., 0])
                J[..., 2, 2] += sys.eps * TWO_PI * np.cos(TWO_PI * z) * np.cos(TWO_PI * b[..., 0])
        if sys.kind == "perturbed_skew" and sys.delta:
            J[..., 0, 2] = J[..., 1, 2] = sys.delta * TWO_PI * np.cos(TWO_PI * z)
    return J


def amplitude_derivative(sys, x):
    """Partial derivatives of the lifted map in delta and eps, each (..., d)."""
    x = np.asarray(x, dtype=float)
    b = x[..., :2]
    d_delta = np.zeros_like(x)
    d_delta[..., 0] = np.sin(TWO_PI * b[..., 1])
    d_delta[..., 1] = np.sin(TWO_PI * b[..., 0])
    d_eps = np.zeros_like(x)
    if sys.dim == 3:
        z = x[..., 2]
        if sys.kind == "perturbed_skew":
            d_delta[..., :2] += np.sin(TWO_PI * z)[..., None]
        if sys.kind != "quotient_cat":
            d_eps[..., 2] = _fiber(replace(sys, eps=1.0), b, z)
    return d_delta, d_eps


def _finish(sys, y):
    if sys.kind == "quotient_cat":
        return canonical_quotient(y)
    return wrap_array(y)


def apply(sys, p):
    """Apply the system. TorusPoint/QuotientPoint in, same type out; arrays map to arrays."""
    x = _points(sys, p)
    y = _finish(sys, lift_map(sys, x))
    if isinstance(p, TorusPoint):
        return TorusPoint(y)
    if isinstance(p, QuotientPoint):
        return QuotientPoint(y[:2], y[2])
    return y


def derivative(sys, p):
    x = _points(sys, p)
    J = jacobian(sys, x)
    if x.ndim == 1:
        return Jet(TorusPoint(wrap_array(lift_map(sys, x))), J)
    return J


def finite_difference_jacobian(sys, x, h=1e-6):
    """Central differences of the lifted map; used as an oracle in tests."""
    x = np.asarray(x, dtype=float)
    d = sys.dim
    J = np.zeros(x.shape[:-1] + (d, d))
    for j in range(d):
        e = np.zeros(d)
        e[j] = h
        J[..., :, j] = (lift_map(sys, x + e) - lift_map(sys, x - e)) / (2 * h)
    return J


def _inverse_seed(sys, y):
    x0 = np.array(y, dtype=float, copy=True)
    x0[..., :2] = y[..., :2] @ sys.A_inv.T
    return x0


def apply_inverse(sys, p, tol=1e-13, max_steps=50, return_steps=False):
    """Invert the system by Newton iteration on a lattice lift.

    The seed is the inverse of the linear part. Raises NonConvergenceError
    when 50 steps do not suffice (perturbation too large).
    """
    y = _points(sys, p)
    single = y.ndim == 1
    y2 = np.atleast_2d(y)
    x = _inverse_seed(sys, y2)
    steps = 0
    for steps in range(1, max_steps + 1):
        r = torus_delta(y2, lift_map(sys, x))
        if sys.kind == "quotient_cat":
            r[..., 2] = lift_map(sys, x)[..., 2] - y2[..., 2]
        J = jacobian(sys, x)
        dx = np.linalg.solve(J, r[..., None])[..., 0]
        x = x - dx
        # quadratic convergence: once the step is this small the next one is at roundoff
        if np.max(np.abs(dx)) < tol:
            break
    else:
        raise NonConvergenceError("inverse Newton iteration did not converge in %d steps" % max_steps)
    out = _finish(sys, x)
    if single:
        out = out[0]
        if isinstance(p, TorusPoint):
            out = TorusPoint(out)
        elif isinstance(p, QuotientPoint):
            out = QuotientPoint(out[:2], out[2])
    return (out, steps) if return_steps else out


def inverse_lift(sys, y):
    """Preimage of lifted points ``y`` returned as a lift close to ``A^-1 y``."""
    y = np.atleast_2d(np.asarray(y, dtype=float))
    x = _inverse_seed(sys, y)
    for _ in range(50):
        r = lift_map(sys, x) - y
        dx = np.linalg.solve(jacobian(sys, x), r[..., None])[..., 0]
        x = x - dx
        if np.max(np.abs(dx)) < 1e-13:
            return x
    raise NonConvergenceError("inverse Newton iteration did not converge")


def orbit(sys, p, n_forward=0, n_backward=0):
    """Lifted orbit segment p_{-n_backward} ... p_{n_forward} as (M, d) array.

    Consecutive points are joined by lifts, so differences are meaningful
    without reduction mod 1.
    """
    x = np.asarray(as_array(p), dtype=float)
    fwd = [x]
    for _ in range(n_forward):
        fwd.append(lift_map(sys, fwd[-1]))
    bwd = []
    cur = x
    for _ in range(n_backward):
        cur = inverse_lift(sys, cur)[0]
        bwd.append(cur)
    return np.array(bwd[::-1] + fwd)


def c0_distance(sys1, sys2, n=64):
    """Sup over an n^d grid of the max-norm distance between the two maps."""
    if sys1.dim != sys2.dim:
        raise DomainError("systems of different dimension")
    axes = [np.arange(n) / n] * sys1.dim
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), -1).reshape(-1, sys1.dim)
    diff = torus_delta(lift_map(sys1, grid), lift_map(sys2, grid))
    return float(np.max(np.abs(diff)))


# --- suspension loops ----------------------------------------------------------


class SineBump:
    """beta(t) = sin^2(pi t / 2): smooth on the circle of circumference 2."""

    def __call__(self, t):
        return np.sin(np.pi * np.asarray(t) / 2) ** 2

    def derivative(self, t):
        return 0.5 * np.pi * np.sin(np.pi * np.asarray(t))


@dataclass(frozen=True)
class SuspensionLoop:
    f_spec: SystemSpec
    g_spec: SystemSpec
    bump: object = field(default_factory=SineBump)

    def __post_init__(self):
        f, g = self.f_spec, self.g_spec
        if f.dim != g.dim or f.matrix != g.matrix or f.shape != g.shape:
            raise DomainError("loop endpoints must share matrix, dimension and shape")

    def amplitude_rate(self, t):
        """d(delta)/dt and d(eps)/dt along the loop."""
        b = float(self.bump.derivative(t))
        return (b * (self.g_spec.delta - self.f_spec.delta), b * (self.g_spec.eps - self.f_spec.eps))


def suspension_slice(loop, t):
    if not 0 <= t < 2:
        raise OutOfRangeError("loop parameter t = %g outside [0, 2)" % t)
    f, g = loop.f_spec, loop.g_spec
    b = float(loop.bump(t))
    if t == 0:
        return f
    if t == 1:
        return g
    kind = g.kind if g.kind != "linear_anosov" else f.kind
    if kind == "linear_anosov":
        kind = "perturbed_anosov"
    return replace(
        g,
        kind=kind,
        delta=max(f.delta + b * (g.delta - f.delta), 0.0),
        eps=max(f.eps + b * (g.eps - f.eps), 0.0),
    )
