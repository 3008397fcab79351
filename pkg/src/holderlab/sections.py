"""
Fiber contractions, the graph transform and invariant sections.

A FiberContraction over a one-dimensional base is the map
F(x, y) = (h(x), v(x, y)); the graph transform sends a section sigma to
x -> v(h^-1(x), sigma(h^-1(x))).  Sections live on a uniform grid with
piecewise-linear interpolation.

Bases may be intervals or circles.  On a circle whose lattice is mapped into
itself by h^-1 the transform is exact at grid points: preimages that land on
lattice sites (within rounding) are read off directly instead of interpolated.
"""

from dataclasses import dataclass, field
import csv

import numpy as np

from .errors import ConditionViolatedError, DomainError, NonConvergenceError


@dataclass(frozen=True)
class IntervalBase:
    lo: float
    hi: float
    n: int

    @property
    def grid(self):
        return np.linspace(self.lo, self.hi, self.n)

    @property
    def diameter(self):
        return self.hi - self.lo

    def evaluate(self, values, x):
        x = np.asarray(x, dtype=float)
        slack = 1e-12 * max(1.0, abs(self.hi), abs(self.lo))
        if np.any(x < self.lo - slack) or np.any(x > self.hi + slack):
            bad = x[(x < self.lo - slack) | (x > self.hi + slack)][0]
            raise DomainError("preimage %.6g leaves the base interval [%g, %g]" % (bad, self.lo, self.hi))
        return np.interp(x, self.grid, values)


@dataclass(frozen=True)
class CircleBase:
    """Lattice i * period / n, i = 0..n-1, on the circle R / period Z."""

    period: float
    n: int

    @property
    def spacing(self):
        return self.period / self.n

    @property
    def grid(self):
        return np.arange(self.n) * self.spacing

    @property
    def diameter(self):
        return self.period / 2

    def evaluate(self, values, x):
        x = np.asarray(x, dtype=float)
        t = x / self.spacing
        idx = np.rint(t)
        on_site = np.abs(t - idx) < 1e-6
        out = np.interp(np.mod(x, self.period), self.grid, values, period=self.period)
        # lattice sites are read exactly (no interpolation error)
        site = np.mod(idx[on_site].astype(np.int64), self.n)
        out[on_site] = values[site]
        return out

    def window(self, lo, hi):
        """Integer lattice indices covering [lo, hi] on the universal cover."""
        return np.arange(int(np.ceil(lo / self.spacing)), int(np.floor(hi / self.spacing)) + 1)


@dataclass(frozen=True)
class SampledSection:
    base: object
    values: np.ndarray
    interpolation: str = "piecewise-linear"
    log: tuple = ()
    residual: float = float("nan")

    @property
    def grid(self):
        return self.base.grid

    def __call__(self, x):
        return self.base.evaluate(self.values, x)

    def on_window(self, lo, hi):
        """(x, value) over [lo, hi]; circle sections are unrolled periodically."""
        if isinstance(self.base, CircleBase):
            idx = self.base.window(lo, hi)
            return idx * self.base.spacing, self.values[np.mod(idx, self.base.n)]
        g = self.grid
        sel = (g >= lo) & (g <= hi)
        return g[sel], self.values[sel]

    def to_csv(self, path, window=None):
        x, v = self.on_window(*window) if window else (self.grid, self.values)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["x", "value"])
            for a, b in zip(x, v):
                w.writerow(["%.17g" % a, "%.17g" % b])

    def log_to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["iter", "sup_change", "ratio"])
            for it, ch, r in self.log:
                w.writerow(["%d" % it, "%.17g" % ch, "%.17g" % r])


@dataclass(frozen=True)
class FiberContraction:
    """F(x, y) = (h(x), v(x, y)) with reported constants.

    k      fiber Lipschitz constant of v(x, .)
    mu     base contraction (|h'| bound)
    L      vertical shear constant at exponent ``theta`` (optional)
    D      fiber diameter
    delta  covering constant of the (single) chart
    """

    base: object
    h_inv: object
    v: object
    k: float
    mu: float
    fiber_bounds: tuple
    delta: float = None
    L: float = None
    theta: float = None

    @property
    def D(self):
        return self.fiber_bounds[1] - self.fiber_bounds[0]

    @property
    def covering(self):
        return self.base.diameter if self.delta is None else self.delta


def zero_section(fc):
    return SampledSection(fc.base, np.zeros(fc.base.n))


def graph_transform_step(fc, sigma):
    """sigma' (x) = v(h^-1 x, sigma(h^-1 x)) on the base grid."""
    x = fc.base.grid
    u = fc.h_inv(x)
    y = sigma(u) if callable(sigma) else fc.base.evaluate(np.asarray(sigma), u)
    return SampledSection(fc.base, np.asarray(fc.v(u, y), dtype=float))


def solve_invariant_section(fc, sigma0=None, tol=1e-8, max_iters=500):
    """Iterate the graph transform until the sup-norm step is below tol."""
    if not tol > 0:
        raise DomainError("tol must be positive")
    sigma = zero_section(fc) if sigma0 is None else sigma0
    log = []
    prev = None
    for it in range(1, max_iters + 1):
        new = graph_transform_step(fc, sigma)
        change = float(np.max(np.abs(new.values - sigma.values)))
        ratio = change / prev if prev else float("nan")
        log.append((it, change, ratio))
        prev = change
        sigma = new
        if change < tol:
            break
    else:
        raise NonConvergenceError("graph transform did not reach tol %.3g in %d iterations" % (tol, max_iters))
    residual = float(np.max(np.abs(graph_transform_step(fc, sigma).values - sigma.values)))
    lo, hi = fc.fiber_bounds
    if np.any(sigma.values < lo) or np.any(sigma.values > hi):
        raise DomainError("invariant section leaves the fiber bounds")
    return SampledSection(fc.base, sigma.values, log=tuple(log), residual=residual)


def contraction_ratio(section, burn_in=5):
    """Median of the logged step ratios after burn-in."""
    r = np.array([row[2] for row in section.log[burn_in:]], dtype=float)
    r = r[np.isfinite(r) & (r > 0)]
    if r.size == 0:
        raise DomainError("not enough iterations logged after burn-in")
    return float(np.median(r))


@dataclass(frozen=True)
class HolderBudget:
    theta: float
    H0: float
    H: float
    terms: dict = field(default_factory=dict)
    H_shear: float = None


def holder_budget(fc, theta, H0=0.0, D=None, delta=None):
    """H = max{H0, D/delta^theta, sup 1/(mu^theta - k)} for the single-chart atlas.

    When the fiber contraction reports a vertical shear constant L, the budget
    that also absorbs the shear, L/(mu^theta - k), is returned as ``H_shear``.
    """
    D = fc.D if D is None else D
    delta = fc.covering if delta is None else delta
    gap = fc.mu**theta - fc.k
    if not gap > 0:
        raise ConditionViolatedError(
            "k = %.6g >= mu^theta = %.6g: fiber contraction does not theta-dominate at theta = %g"
            % (fc.k, fc.mu**theta, theta)
        )
    terms = {"H0": float(H0), "D/delta^theta": D / delta**theta, "1/(mu^theta-k)": 1.0 / gap}
    H = max(terms.values())
    H_shear = None if fc.L is None else max(H, fc.L / gap)
    return HolderBudget(float(theta), float(H0), float(H), terms, H_shear)


def measured_shear(v, base_points, y_values, theta):
    """sup |v(u, y) - v(u', y)| / |u - u'|^theta over all sample pairs."""
    u = np.asarray(base_points, dtype=float)
    best = 0.0
    for y in np.atleast_1d(y_values):
        vv = v(u, np.full_like(u, y))
        du = np.abs(u[:, None] - u[None, :])
        dv = np.abs(vv[:, None] - vv[None, :])
        mask = du > 0
        best = max(best, float(np.max(dv[mask] / du[mask] ** theta)))
    return best


# --- the large-shear example ----------------------------------------------------

SHEAR_FREQ = 50.0
SHEAR_PERIOD = 2 * np.pi / SHEAR_FREQ


def shear_example(n=4120):
    """F(x, y) = (x/9, y/3 + sin(50 x)) on the circle R / (2 pi / 50) Z.

    The lattice of n points per period is invariant under x -> 9x, so the
    graph transform has no interpolation error.  n = 4120 gives spacing below
    2/2^16 and contains the quarter period pi/100.
    """
    base = CircleBase(SHEAR_PERIOD, n)
    L = 2.0 / (2.0 / SHEAR_FREQ) ** 0.4  # shear bound at theta = 0.4, from |sin a - sin b| <= min(2, |a - b|)
    return FiberContraction(
        base=base,
        h_inv=lambda x: 9.0 * x,
        v=lambda u, y: y / 3.0 + np.sin(SHEAR_FREQ * u),
        k=1.0 / 3.0,
        mu=1.0 / 9.0,
        fiber_bounds=(-2.0, 2.0),
        delta=2.0,
        L=L,
        theta=0.4,
    )


def lacunary_oracle(n, indices, terms=40):
    """sum_{j>=1} 3^(1-j) sin(50 * 9^j * x) at lattice points x = i * period / n.

    50 * 9^j * x = 2 pi * (9^j i mod n) / n, evaluated with exact integer
    arithmetic so every term is correct to rounding.
    """
    idx = np.asarray(indices, dtype=np.int64) % n
    total = np.zeros(idx.shape)
    p = 1
    for j in range(1, terms + 1):
        p = (p * 9) % n
        phase = (idx * p) % n
        total += 3.0 ** (1 - j) * np.sin(2 * np.pi * phase / n)
    return total
