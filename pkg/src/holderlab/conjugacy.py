"""
Leaf conjugacies between f and a C^1-close g.

stable:  the amalgam a(x) = W^s_g(g x) ∩ E(f x), with E the linear
         complement of the stable direction of f, and the invariant section
         s(x) = lim g^N(a^-N(x)) of the fiber contraction a x g.
center:  for skew products, the point of the g center leaf that shadows the
         f-orbit of the vertical circle through p, read on the horizontal
         transversal through p.
oracle:  the structural-stability conjugacy h0 of the base Anosov maps,
         solved as a fixed point on an A-invariant rational grid.
"""

from dataclasses import dataclass, replace
import csv

import numpy as np
from scipy.sparse.linalg import splu

from .bunching import bracketing, torus_grid
from .errors import (
    AmalgamUndefinedError,
    CoherenceError,
    DegenerateInputError,
    DomainError,
    HolonomyUndefinedError,
    NonConvergenceError,
    ShadowingError,
)
from .foliations import (
    _f_reference,
    center_leaf_points,
    center_pins,
    linear_foliation,
    linear_frame,
    shoot,
    shooting_jacobian,
    strong_leaf_points,
)
from .phasespace import TorusPoint, as_array, leaf_pair_hausdorff, torus_delta, torus_dist, wrap_array
from .systems import (
    SystemSpec,
    amplitude_derivative,
    apply,
    apply_inverse,
    c0_distance,
    lift_map,
    suspension_slice,
)


def _batch(x):
    arr = np.asarray(as_array(x), dtype=float)
    return np.atleast_2d(arr), arr.ndim == 1


def _unbatch(out, single, like=None):
    if not single:
        return out
    return TorusPoint(out[0]) if isinstance(like, TorusPoint) or like is None else out[0]


def base_system(sys):
    """The base Anosov map of a skew product with z-independent base."""
    if sys.dim == 2:
        return sys
    if sys.kind not in ("skew_product", "quotient_cat"):
        raise DomainError("base map depends on the fiber for kind %s" % sys.kind)
    kind = "perturbed_anosov" if sys.delta else "linear_anosov"
    return SystemSpec(kind, sys.matrix, sys.delta)


@dataclass(frozen=True)
class PseudoOrbit:
    points: np.ndarray
    jump_sizes: np.ndarray
    plaque_respecting: bool = False

    def is_pseudo_orbit(self, delta):
        return bool(np.all(self.jump_sizes < delta))


@dataclass
class ConjugacyField:
    grid: np.ndarray
    values: np.ndarray
    transversal_family: str
    window: int
    tail_bound: float
    equivariance_residual: np.ndarray = None

    def to_csv(self, path):
        d = self.grid.shape[1]
        head = ["p%d" % (i + 1) for i in range(d)] + ["h%d" % (i + 1) for i in range(d)] + ["tail", "resid"]
        res = self.equivariance_residual
        if res is None:
            res = np.full(len(self.grid), np.nan)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(head)
            for p, h, r in zip(self.grid, self.values, res):
                w.writerow(["%.17g" % v for v in list(p) + list(h) + [self.tail_bound, r]])


# --- amalgam and the stable leaf conjugacy --------------------------------------------


@dataclass(frozen=True)
class AmalgamSpec:
    """f, g and the transverse foliation E (by default the linear complement of E^s)."""

    f_sys: SystemSpec
    g_sys: SystemSpec
    r: float = 0.1
    E_model: object = None

    def __post_init__(self):
        f = self.f_sys
        if f.dim != self.g_sys.dim or f.matrix != self.g_sys.matrix:
            raise DomainError("f and g must share dimension and linear part")
        if f.delta != 0 or f.kind == "perturbed_skew":
            raise DomainError("the transverse foliation E is built from a base-linear f")
        B, _ = linear_frame(f)
        if self.E_model is None:
            object.__setattr__(self, "E_model", linear_foliation(B[:, 0], radius=self.r, system=f, side="u"))
        elif not _is_linear_complement(self.E_model, B):
            raise DomainError("E must be a linear foliation transverse to E^s")
        dist = c0_distance(f, self.g_sys, 24 if f.dim == 3 else 64)
        if not dist < self.r / 2:
            raise AmalgamUndefinedError("d_C0(f, g) = %.3g is not below r/2 = %.3g" % (dist, self.r / 2))


def _is_linear_complement(model, B):
    # E-plaques are read off through the stable frame coordinate, so E must be
    # straight and carry no stable component
    x = np.array([[0.1, 0.2] + [0.3] * (B.shape[0] - 2)])
    pts = model.leaf_point(np.repeat(x, 3, 0), np.array([-0.05, 0.0, 0.05]))
    steps = np.diff(pts, axis=0)
    straight = np.allclose(steps[0], steps[1], atol=1e-14)
    return straight and abs(np.linalg.solve(B, steps[0])[1]) < 1e-12


def _s_row(sys):
    _, Binv = linear_frame(sys)
    return Binv[1]


def amalgam(spec, x):
    """a(x) = W^s_g(g(x), r) ∩ E(f(x), r)."""
    X, single = _batch(x)
    gx = apply(spec.g_sys, X)
    fx = apply(spec.f_sys, X)
    t = torus_delta(gx, fx) @ _s_row(spec.g_sys)
    if np.any(np.abs(t) > spec.r):
        raise AmalgamUndefinedError("E-plaque at f(x) misses W^s_g(g(x), r)")
    out = wrap_array(strong_leaf_points(spec.g_sys, gx, t, "s"))
    return _unbatch(out, single, x)


def amalgam_inverse(spec, y):
    """a^-1(y) = W^s_g(g^-1 y, r) ∩ E(f^-1 y, r)."""
    Y, single = _batch(y)
    gi = apply_inverse(spec.g_sys, Y)
    fi = apply_inverse(spec.f_sys, Y)
    t = torus_delta(gi, fi) @ _s_row(spec.g_sys)
    if np.any(np.abs(t) > spec.r):
        raise AmalgamUndefinedError("E-plaque at f^-1(y) misses W^s_g(g^-1(y), r)")
    out = wrap_array(strong_leaf_points(spec.g_sys, gi, t, "s"))
    return _unbatch(out, single, y)


def amalgam_orbit(spec, x, n):
    """a-orbit of x as an f pseudo-orbit with jumps d(f(x_k), x_{k+1})."""
    pts = [as_array(x).astype(float)]
    for _ in range(n):
        pts.append(amalgam(spec, pts[-1][None])[0])
    pts = np.array(pts)
    jumps = torus_dist(apply(spec.f_sys, pts[:-1]), pts[1:])
    return PseudoOrbit(pts, np.atleast_1d(jumps))


def tail_depth(nu, r, tol, n_max=200):
    """Smallest N with nu^N * r < tol."""
    if not 0 < nu < 1:
        raise DomainError("nu must lie in (0, 1)")
    N = int(np.ceil(np.log(tol / r) / np.log(nu)))
    if N > n_max:
        raise NonConvergenceError("tail bound nu^N r < tol needs N = %d > %d" % (N, n_max))
    return max(N, 1)


def _uniform_nu(sys):
    n = 16 if sys.dim == 2 else 8
    return bracketing(sys, torus_grid(n, sys.dim), n_iters=40).uniform["nu"]


def _s_raw(spec, X, N):
    y = X
    for _ in range(N):
        y = amalgam_inverse(spec, y)
    for _ in range(N):
        y = apply(spec.g_sys, y)
    return y


def su_intersection(sys, x, y, tol=1e-15, max_iter=20, h=1e-7):
    """W^s(x) ∩ W^u(y) in 2-d, W^s(x) ∩ (W^u(y) + center segment) in 3-d.

    Chord Newton in the leaf parameters, with a one-sided difference Jacobian
    taken once.  Returns lifts near x.
    """
    X = np.atleast_2d(np.asarray(x, dtype=float))
    Y = X + torus_delta(X, np.atleast_2d(y))
    B, Binv = linear_frame(sys)
    d = sys.dim
    dv = Y - X
    tau = np.stack([dv @ Binv[1], -(dv @ Binv[0])] + ([-(dv @ Binv[2])] if d == 3 else []), -1)

    def F(tau):
        out = strong_leaf_points(sys, X, tau[:, 0], "s") - strong_leaf_points(sys, Y, tau[:, 1], "u")
        if d == 3:
            out = out - tau[:, 2:3] * B[:, 2]
        return out

    r = F(tau)
    J = np.stack([(F(tau + h * np.eye(d)[j]) - r) / h for j in range(d)], -1)
    Jinv = np.linalg.inv(J)
    for _ in range(max_iter):
        step = (Jinv @ r[..., None])[..., 0]
        tau = tau - step
        if np.max(np.abs(step)) <= tol:
            break
        r = F(tau)
    else:
        if np.max(np.abs(step)) > 1e-12:
            raise NonConvergenceError("stable/unstable leaf intersection did not converge")
    return strong_leaf_points(sys, X, tau[:, 0], "s")


def leaf_conjugacy_stable(spec, x, N=None, tol=1e-9, nu=None, return_field=False):
    """s(x) = g^N(a^-N(x)), placed exactly on W^s_g(x).

    The raw value carries roundoff amplified by the unstable expansion of g^N,
    almost entirely along the unstable leaf of g through it; the result is the
    point where that leaf (thickened by the center direction in 3-d) meets
    W^s_g(x).
    """
    X, single = _batch(x)
    if nu is None:
        nu = _uniform_nu(spec.g_sys)
    if N is None:
        N = tail_depth(nu, spec.r, tol)
    raw = _s_raw(spec, X, N)
    s = wrap_array(su_intersection(spec.g_sys, X, raw))
    if not return_field:
        return _unbatch(s, single, x)
    a = amalgam(spec, X)
    sa = leaf_conjugacy_stable(spec, a, N, tol, nu)
    resid = torus_dist(apply(spec.g_sys, s), sa)
    return ConjugacyField(X, s, "E-plaques", N, nu**N * spec.r, np.atleast_1d(resid))


# --- structural-stability oracle ------------------------------------------------------


@dataclass(frozen=True)
class BaseConjugacy:
    """h0 = id + w on the n x n rational grid (exact there)."""

    n: int
    w: np.ndarray  # (n, n, 2)
    residual: float
    sweeps: int
    log: tuple = ()

    def __call__(self, pts):
        P, single = _batch(pts)
        t = P[:, :2] * self.n
        idx = np.rint(t)
        on = np.all(np.abs(t - idx) < 1e-9, axis=1)
        out = np.empty((P.shape[0], 2))
        ii = np.mod(idx.astype(np.int64), self.n)
        out[on] = self.w[ii[on, 0], ii[on, 1]]
        if np.any(~on):
            # bilinear interpolation off the grid (not exact)
            f = t[~on] - np.floor(t[~on])
            i0 = np.mod(np.floor(t[~on]).astype(np.int64), self.n)
            i1 = np.mod(i0 + 1, self.n)
            w = self.w
            out[~on] = (
                w[i0[:, 0], i0[:, 1]] * ((1 - f[:, 0]) * (1 - f[:, 1]))[:, None]
                + w[i1[:, 0], i0[:, 1]] * (f[:, 0] * (1 - f[:, 1]))[:, None]
                + w[i0[:, 0], i1[:, 1]] * ((1 - f[:, 0]) * f[:, 1])[:, None]
                + w[i1[:, 0], i1[:, 1]] * (f[:, 0] * f[:, 1])[:, None]
            )
        res = wrap_array(P[:, :2] + out)
        return res[0] if single else res

    @property
    def sup_displacement(self):
        return float(np.max(np.abs(self.w)))


def anosov_base_conjugacy(A, g0_sys, tol=1e-10, n=128, max_sweeps=200):
    """h0 with g0 ∘ h0 = h0 ∘ A, by the contraction on eigen-components.

    w_u(x) = (w_u(Ax) - p_u(h0 x)) / lambda_u,
    w_s(y) = lambda_s w_s(A^-1 y) + p_s(h0(A^-1 y)),
    where p = g0 - A.  The grid {i/n} is A-invariant, so no interpolation
    enters the iteration.
    """
    A = np.asarray(getattr(A, "matrix", A), dtype=int)
    g0 = base_system(g0_sys)
    if tuple(map(tuple, A)) != g0.matrix:
        raise DomainError("g0 must perturb the given matrix")
    lin = SystemSpec("linear_anosov", g0.matrix)
    B, Binv = linear_frame(lin)
    lam = np.real(np.linalg.eigvals(lin.A))
    lam_u, lam_s = (lam[0], lam[1]) if abs(lam[0]) > abs(lam[1]) else (lam[1], lam[0])
    I, J = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    X = np.stack([I, J], -1) / n
    Ai = np.mod(A[0, 0] * I + A[0, 1] * J, n), np.mod(A[1, 0] * I + A[1, 1] * J, n)
    (a, b), (c, d) = A
    det = a * d - b * c
    Inv = np.round(np.array([[d, -b], [-c, a]]) / det).astype(int)
    Bi = np.mod(Inv[0, 0] * I + Inv[0, 1] * J, n), np.mod(Inv[1, 0] * I + Inv[1, 1] * J, n)

    def p(y):
        return lift_map(g0, y) - y @ lin.A.T

    wu = np.zeros((n, n))
    ws = np.zeros((n, n))
    log = []
    for sweep in range(1, max_sweeps + 1):
        w = wu[..., None] * B[:, 0] + ws[..., None] * B[:, 1]
        ph = p(X + w)
        pu, ps = ph @ Binv[0], ph @ Binv[1]
        wu_new = (wu[Ai] - pu) / lam_u
        ws_new = lam_s * ws[Bi] + ps[Bi]
        change = max(np.max(np.abs(wu_new - wu)), np.max(np.abs(ws_new - ws)))
        wu, ws = wu_new, ws_new
        log.append((sweep, float(change)))
        if change < tol * 1e-2:
            break
    else:
        raise NonConvergenceError("structural-stability iteration did not converge")
    w = wu[..., None] * B[:, 0] + ws[..., None] * B[:, 1]
    h = X + w
    lhs = lift_map(g0, h)
    rhs = X[Ai] + w[Ai]
    residual = float(np.max(np.abs(torus_delta(rhs, lhs))))
    if residual > tol:
        raise NonConvergenceError("conjugacy residual %.3g above tol %.3g" % (residual, tol))
    return BaseConjugacy(n, w, residual, sweep, tuple(log))


def _curve_intersection(c1, c2, t1, t2, tol=1e-14, max_iter=30, h=1e-7):
    """Batched Newton for c1(t1) = c2(t2) with 2-d curves given as callables."""
    for _ in range(max_iter):
        F = c1(t1) - c2(t2)
        J = np.stack([(c1(t1 + h) - c1(t1 - h)) / (2 * h), -(c2(t2 + h) - c2(t2 - h)) / (2 * h)], -1)
        step = np.linalg.solve(J, F[..., None])[..., 0]
        t1, t2 = t1 - step[:, 0], t2 - step[:, 1]
        if np.max(np.abs(step)) < tol:
            return t1, t2
    if np.max(np.abs(c1(t1) - c2(t2))) > 1e-12:
        raise NonConvergenceError("leaf intersection did not converge")
    return t1, t2


def stable_conjugacy_oracle(spec, x, h0):
    """W^s_g(x) ∩ W^cu_g(h(x)), with the g-leaf picked out by the conjugacy h0.

    For skew products the cu-leaf of g is W^u_{g0}(h0 b) x S^1, so the
    intersection is found in the base and lifted to W^s_g(x).
    """
    X, single = _batch(x)
    g, g0 = spec.g_sys, base_system(spec.g_sys)
    hb = h0(X[:, :2])
    hb = X[:, :2] + torus_delta(X[:, :2], hb)
    c1 = lambda t: strong_leaf_points(g, X, t, "s")[:, :2]
    c2 = lambda t: strong_leaf_points(g0, hb, t, "u")
    B, Binv = linear_frame(g0)
    t1 = (hb - X[:, :2]) @ Binv[1]
    t2 = -(hb - X[:, :2]) @ Binv[0]
    t1, _ = _curve_intersection(c1, c2, t1, t2)
    out = wrap_array(strong_leaf_points(g, X, t1, "s"))
    return out[0] if single else out


# --- center leaf conjugacy -------------------------------------------------------------


def _slanted_normal(sys, angle_deg):
    """Normal of the transversal plane tilted by ``angle_deg`` toward the fiber."""
    _, Binv = linear_frame(sys)
    a = np.deg2rad(angle_deg)
    return np.cos(a) * Binv[2] + np.sin(a) * Binv[1]


def leaf_conjugacy_center(f_sys, g_sys, p, r=0.1, tol=1e-9, N=30, slant_deg=0.0, verify=True, return_field=False):
    """h(p): the g center leaf shadowing f's vertical leaf through p, cut by N(p, r).

    N(p, r) is the horizontal plane through p (or a plane tilted by
    ``slant_deg`` toward the fiber).  The g-orbit of the result is checked
    against the f-orbit over 30 iterates.
    """
    P, single = _batch(p)
    ref = _f_reference(f_sys, P, N)
    pins = center_pins(g_sys, N, 0.0)
    if slant_deg:
        pins[0] = (N, _slanted_normal(g_sys, slant_deg), 0.0)
    try:
        xi = shoot(g_sys, ref, pins)
    except NonConvergenceError as exc:
        raise CoherenceError("center leaf misses the transversal: %s" % exc) from exc
    disp = xi[:, N]
    if np.any(np.linalg.norm(disp, axis=1) > r):
        raise CoherenceError("center leaf misses N(p, r) within r = %g" % r)
    h = wrap_array(P + disp)
    if verify:
        shadowing_check(f_sys, g_sys, P, h)
    if not return_field:
        return _unbatch(h, single, p)
    resid = center_equivariance_residual(f_sys, g_sys, P, h, N)
    return ConjugacyField(P, h, "vertical" if not slant_deg else "slanted %g deg" % slant_deg, N,
                          float(0.5 ** N * r), resid)


def center_equivariance_residual(f_sys, g_sys, P, h, N=30):
    """Distance from g(h(p)) to the g leaf assigned to f(p), read at the same height."""
    gh = wrap_array(lift_map(g_sys, h))
    fp = wrap_array(lift_map(f_sys, P))
    Q = np.column_stack([fp[:, :2], gh[:, 2]])
    leaf, _ = center_leaf_points(g_sys, _f_reference(f_sys, Q, N), 0.0, N)
    return torus_dist(wrap_array(leaf), gh)


def shadowing_check(f_sys, g_sys, P, h, window=30, factor=4.0):
    """g-orbit of h(p) against the f-orbit of the vertical leaf of p, over ``window`` iterates.

    Raises ShadowingError when the base components separate by more than
    factor * d_C0(f, g).  Returns the largest separation seen.
    """
    thresh = factor * max(c0_distance(f_sys, g_sys, 24), 1e-300)
    a, b = np.array(P, dtype=float), np.array(h, dtype=float)
    worst = float(np.max(torus_dist(a[:, :2], b[:, :2])))
    fa, fb = a.copy(), b.copy()
    for _ in range(window):
        fa, fb = apply(f_sys, fa), apply(g_sys, fb)
        a, b = apply_inverse(f_sys, a), apply_inverse(g_sys, b)
        worst = max(worst, float(np.max(torus_dist(fa[:, :2], fb[:, :2]))), float(np.max(torus_dist(a[:, :2], b[:, :2]))))
    if worst > thresh and f_sys != g_sys:
        raise ShadowingError("g-orbit leaves the 4 d_C0 shadow of the f plaque orbit (%.3g > %.3g)" % (worst, thresh))
    return worst


# --- suspension holonomy ----------------------------------------------------------------


def _loop_system(loop, t):
    # same kind along the whole loop, so the amplitude derivative is consistent at t = 0
    sl = suspension_slice(loop, min(max(t, 0.5), 0.5))
    b = float(loop.bump(t))
    f, g = loop.f_spec, loop.g_spec
    return replace(sl, delta=f.delta + b * (g.delta - f.delta), eps=f.eps + b * (g.eps - f.eps))


def _suspension_rhs(loop, ref, xi, pins, t):
    sl = _loop_system(loop, t)
    rd, re = loop.amplitude_rate(t)
    y = ref + xi
    dd, de = amplitude_derivative(sl, y[:, :-1])
    m, M, d = ref.shape
    dG = np.concatenate([(rd * dd + re * de).reshape(m, -1), np.zeros((m, d))], axis=1)
    J = shooting_jacobian(sl, ref, xi, pins)
    return -splu(J).solve(dG.ravel()).reshape(m, M, d)


def _rk4(loop, ref, pins, steps):
    xi = np.zeros_like(ref)
    h = 1.0 / steps
    for k in range(steps):
        t = k * h
        k1 = _suspension_rhs(loop, ref, xi, pins, t)
        k2 = _suspension_rhs(loop, ref, xi + 0.5 * h * k1, pins, t + 0.5 * h)
        k3 = _suspension_rhs(loop, ref, xi + 0.5 * h * k2, pins, t + 0.5 * h)
        k4 = _suspension_rhs(loop, ref, xi + h * k3, pins, t + h)
        xi = xi + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
    return xi


def suspension_holonomy(loop, p, x=None, t_steps=32, N=30, r=0.1, check=True):
    """Suspension holonomy h_p(x), continued in the loop parameter from t=0 to t=1.

    The state is the whole orbit segment of the lifted point; it moves with the
    linear response dY/dt = -J^-1 dG/dt of the shooting equations, so the only
    solver is RK4 in t (no Newton).  With ``check`` the integration is repeated
    at half step and the step-halving difference is returned as well.
    """
    if t_steps < 16:
        raise DomainError("t_steps must be at least 16")
    P, single = _batch(p)
    X = P if x is None else _batch(x)[0]
    if np.any(np.abs(torus_delta(P[:, 2], X[:, 2])) > 1e-12):
        raise DomainError("x must lie on the horizontal transversal N(p, r)")
    if np.any(torus_dist(P, X) > r):
        raise DomainError("x outside N(p, r)")
    f = loop.f_spec
    ref = _f_reference(f, X, N)
    pins = center_pins(f, N, 0.0)
    xi = _rk4(loop, ref, pins, t_steps)
    disp = xi[:, N]
    if np.any(np.linalg.norm(disp, axis=1) > r):
        raise HolonomyUndefinedError("continuation leaves the tube", exit_point=wrap_array((X + disp)[0]))
    out = wrap_array(X + disp)
    if not check:
        return out[0] if single else out
    fine = wrap_array(X + _rk4(loop, ref, pins, 2 * t_steps)[:, N])
    halving = float(np.max(torus_dist(out, fine)))
    return (fine[0] if single else fine), halving


# --- leaf expansivity ----------------------------------------------------------------------


@dataclass(frozen=True)
class ExpansivityReport:
    p: np.ndarray
    q: np.ndarray
    initial_distance: float
    max_distance: float
    control: np.ndarray
    control_initial: float
    control_max: float
    distances: np.ndarray
    control_distances: np.ndarray
    ks: np.ndarray


def _leaf_distances(A, p, q, ks):
    out = []
    Ainv = np.round(np.linalg.inv(A))
    for k in ks:
        M = np.linalg.matrix_power(A if k >= 0 else Ainv, abs(int(k)))
        out.append(float(leaf_pair_hausdorff(wrap_array(M @ p), wrap_array(M @ q))))
    return np.array(out)


def leaf_expansivity_probe(quotient_sys, p, k_range=25, control_offset=(0.0131, -0.0077)):
    """Leaves through {p, -p} and {q, -q}, q = W^u(p) ∩ W^s(-p), under iteration.

    Solves a v_u - b v_s = -2p so that q = p + a v_u = -p + b v_s.  The two
    leaves stay close for all |k| <= k_range; the control leaf, through a point
    off W^u(p) ∪ W^s(-p), separates.
    """
    p = np.asarray(as_array(p), dtype=float)[:2]
    if quotient_sys.kind != "quotient_cat" or quotient_sys.delta:
        raise DomainError("the probe runs on the linear quotient Cat system")
    two_p = wrap_array(2 * p)
    if np.min(np.minimum(two_p, 1 - two_p).max(axis=-1, keepdims=True)) < 1e-9:
        raise DegenerateInputError("p lies on a special leaf (2p = 0 mod 1)")
    A = np.array(quotient_sys.matrix, dtype=float)
    w, V = np.linalg.eig(A)
    iu = int(np.argmax(np.abs(w)))
    v_u = V[:, iu] / V[0, iu]
    v_s = V[:, 1 - iu] / V[0, 1 - iu]
    M = np.column_stack([v_u, -v_s])
    # any lattice shift of -2p gives a valid intersection; keep the nearest one
    shifts = np.array([(i, j) for i in range(-2, 3) for j in range(-2, 3)], dtype=float)
    ab = np.linalg.solve(M, (-2 * p + shifts).T).T
    a, b = ab[np.argmin(np.abs(ab).max(axis=1))]
    q = p + a * v_u
    ks = np.arange(-k_range, k_range + 1)
    dist = _leaf_distances(A, p, q, ks)
    qc = q + np.asarray(control_offset, dtype=float)
    cdist = _leaf_distances(A, p, qc, ks)
    return ExpansivityReport(
        p, wrap_array(q), float(dist[k_range]), float(dist.max()), wrap_array(qc), float(cdist[k_range]),
        float(cdist.max()), dist, cdist, ks,
    )
