"""
Local invariant manifolds, center leaves of skew products, holonomy maps and
the triangle constant of a pair of transverse foliations.

Strong manifolds are graphs over the linear eigendirection.  A point of
W^s(x) with frame coordinate t is obtained by pulling back the straight
segment x_n + tau * E_s through n inverse steps and solving for tau (the
graph transform, run in displacement coordinates so that tiny segments
keep full relative precision); W^u likewise by pushing forward.

Center leaves need orbit information in both time directions.  They are
computed by multiple shooting: the orbit segment y_{-N..N} is the unknown,
the dynamics y_{k+1} = g(y_k) are the equations, and three pins close the
system (the height at time 0, the u-coordinate at +N, the s-coordinate at
-N, all relative to a reference orbit).
"""

from dataclasses import dataclass
import csv

import numpy as np
from scipy.sparse import csc_matrix
from scipy.sparse.linalg import splu

from .errors import (
    CoherenceError,
    DomainError,
    HolonomyUndefinedError,
    NonConvergenceError,
    TransversalityError,
)
from .phasespace import Transversal, TorusPoint, as_array, torus_delta, wrap_array
from .systems import apply, apply_inverse, jacobian, lift_map

TWO_PI = 2 * np.pi
SIDES = ("u", "s", "cu", "cs", "c")


# --- linear frame -------------------------------------------------------------


def linear_frame(sys):
    """Columns (E_u, E_s[, E_c]) of the frame of the linear part, and its inverse.

    Coordinates of a vector v in this frame are ``Binv @ v``; index 0 is the
    u-coordinate, 1 the s-coordinate, 2 the center (height) coordinate.
    """
    A = sys.A
    w, V = np.linalg.eig(A)
    w, V = np.real(w), np.real(V)
    iu = int(np.argmax(np.abs(w)))
    eu, es = V[:, iu], V[:, 1 - iu]
    eu = eu / np.linalg.norm(eu) * (1 if eu[0] > 0 else -1)
    es = es / np.linalg.norm(es) * (1 if es[0] > 0 else -1)
    if sys.dim == 2:
        B = np.column_stack([eu, es])
    else:
        B = np.zeros((3, 3))
        B[:2, 0], B[:2, 1], B[2, 2] = eu, es, 1.0
    return B, np.linalg.inv(B)


_SIDE_INDEX = {"u": 0, "s": 1, "c": 2}


# --- increments without cancellation ----------------------------------------------


def _dsin(a, h):
    """sin(2 pi (a + h)) - sin(2 pi a)"""
    return 2 * np.cos(TWO_PI * a + np.pi * h) * np.sin(np.pi * h)


def _dcos(a, h):
    return -2 * np.sin(TWO_PI * a + np.pi * h) * np.sin(np.pi * h)


def map_increment(sys, x, dx):
    """f(x + dx) - f(x) for lifted x, accurate relative to |dx|."""
    x = np.asarray(x, dtype=float)
    dx = np.asarray(dx, dtype=float)
    out = np.empty(np.broadcast(x, dx).shape)
    out[..., :2] = dx[..., :2] @ sys.A.T
    b, db = x[..., :2], dx[..., :2]
    if sys.delta:
        out[..., 0] += sys.delta * _dsin(b[..., 1], db[..., 1])
        out[..., 1] += sys.delta * _dsin(b[..., 0], db[..., 0])
    if sys.dim == 3:
        z, dz = x[..., 2], dx[..., 2]
        out[..., 2] = dz
        if sys.kind != "quotient_cat" and sys.eps:
            if sys.shape == "shear":
                out[..., 2] += sys.eps * _dsin(b[..., 0], db[..., 0])
            else:
                s0 = np.sin(TWO_PI * z)
                out[..., 2] += sys.eps * (
                    _dsin(z, dz) * np.cos(TWO_PI * (b[..., 0] + db[..., 0])) + s0 * _dcos(b[..., 0], db[..., 0])
                )
        if sys.kind == "perturbed_skew" and sys.delta:
            out[..., :2] += sys.delta * _dsin(z, dz)[..., None]
    return out


def _solve(J, r):
    """Batched solve of small systems (d = 2 or 3) by the adjugate formula."""
    if J.shape[-1] == 2:
        a, b, c, d = J[..., 0, 0], J[..., 0, 1], J[..., 1, 0], J[..., 1, 1]
        det = a * d - b * c
        return np.stack([d * r[..., 0] - b * r[..., 1], a * r[..., 1] - c * r[..., 0]], -1) / det[..., None]
    a = J
    # columns of the adjugate
    c0 = np.stack([a[..., 1, 1] * a[..., 2, 2] - a[..., 1, 2] * a[..., 2, 1],
                   a[..., 1, 2] * a[..., 2, 0] - a[..., 1, 0] * a[..., 2, 2],
                   a[..., 1, 0] * a[..., 2, 1] - a[..., 1, 1] * a[..., 2, 0]], -1)
    c1 = np.stack([a[..., 2, 1] * a[..., 0, 2] - a[..., 2, 2] * a[..., 0, 1],
                   a[..., 2, 2] * a[..., 0, 0] - a[..., 2, 0] * a[..., 0, 2],
                   a[..., 2, 0] * a[..., 0, 1] - a[..., 2, 1] * a[..., 0, 0]], -1)
    c2 = np.stack([a[..., 0, 1] * a[..., 1, 2] - a[..., 0, 2] * a[..., 1, 1],
                   a[..., 0, 2] * a[..., 1, 0] - a[..., 0, 0] * a[..., 1, 2],
                   a[..., 0, 0] * a[..., 1, 1] - a[..., 0, 1] * a[..., 1, 0]], -1)
    det = np.einsum("...i,...i->...", a[..., 0, :], c0)
    return (c0 * r[..., 0:1] + c1 * r[..., 1:2] + c2 * r[..., 2:3]) / det[..., None]


def inverse_increment(sys, x, rhs, max_steps=40):
    """Solve f(x + dx) - f(x) = rhs for dx by Newton iteration (per-row stopping)."""
    x = np.broadcast_to(x, rhs.shape)
    dx = _solve(jacobian(sys, x), rhs)
    active = np.arange(rhs.shape[0])
    for _ in range(max_steps):
        xa, da = x[active], dx[active]
        r = map_increment(sys, xa, da) - rhs[active]
        step = _solve(jacobian(sys, xa + da), r)
        dx[active] = da - step
        size = np.linalg.norm(step, axis=-1)
        done = size <= 1e-15 * np.linalg.norm(dx[active], axis=-1) + 1e-300
        active = active[~done]
        if active.size == 0:
            return dx
    if np.max(size[~done]) > 1e-12 * max(1e-300, float(np.max(np.abs(dx)))):
        raise NonConvergenceError("inverse increment did not converge: perturbation too large")
    return dx


# --- strong manifolds --------------------------------------------------------------


def _orbit_with_defects(sys, x0, n, forward):
    """Wrapped orbit x_0..x_n (forward) or x_0..x_{-n} (backward) and defects.

    Defect k is f(x_k) - x_{k+1} (lattice-reduced) in forward time order.
    """
    pts = [x0]
    for _ in range(n):
        pts.append(apply(sys, pts[-1]) if forward else apply_inverse(sys, pts[-1]))
    if not forward:
        pts = pts[::-1]  # oldest first
    defects = [torus_delta(pts[k + 1], lift_map(sys, pts[k])) for k in range(n)]
    return pts, defects


def strong_leaf_points(sys, base, t, side, depth=30, tol=1e-15, max_iter=12):
    """Points of W^side(base) (side u or s) with frame coordinate t.

    ``base`` may be lifted; the result is a lift near it.  Batched over rows.
    """
    if side not in ("u", "s"):
        raise DomainError("strong leaves have side u or s")
    base = np.atleast_2d(np.asarray(as_array(base), dtype=float))
    t = np.broadcast_to(np.asarray(t, dtype=float), base.shape[:1]).copy()
    B, Binv = linear_frame(sys)
    e = B[:, _SIDE_INDEX[side]]
    row = Binv[_SIDE_INDEX[side]]
    if sys.is_linear and (sys.dim == 2 or sys.kind == "quotient_cat"):
        return base + t[:, None] * e
    x0 = wrap_array(base)
    shift = base - x0
    m, d = base.shape
    if side == "s":
        pts, defects = _orbit_with_defects(sys, x0, depth, forward=True)
    else:
        pts, defects = _orbit_with_defects(sys, x0, depth, forward=False)

    def run(tau):
        delta = tau[:, None] * e
        v = np.broadcast_to(e, (m, d)).copy()
        if side == "s":
            for k in range(depth - 1, -1, -1):
                delta = inverse_increment(sys, pts[k], delta - defects[k])
                v = _solve(jacobian(sys, pts[k] + delta), v)
        else:
            for k in range(depth):
                v = (jacobian(sys, pts[k] + delta) @ v[..., None])[..., 0]
                delta = map_increment(sys, pts[k], delta) + defects[k]
        return delta, v

    tau = np.zeros(m)
    delta, v = run(tau)
    for _ in range(max_iter):
        c = delta @ row
        dc = v @ row
        err = c - t
        tau = tau - err / dc
        delta, v = run(tau)
        if np.all(np.abs(delta @ row - t) <= tol * np.maximum(1.0, np.abs(t))):
            break
    else:
        if np.max(np.abs(delta @ row - t)) > 1e-12:
            raise NonConvergenceError("strong manifold graph transform did not converge")
    return x0 + shift + delta


@dataclass(frozen=True)
class LeafPatch:
    side: str
    base: TorusPoint
    radius: float
    samples: np.ndarray
    tangents: np.ndarray
    params: np.ndarray
    residual: float = float("nan")

    @property
    def arclength(self):
        seg = np.linalg.norm(np.diff(self.samples, axis=0), axis=1)
        s = np.concatenate([[0.0], np.cumsum(seg)])
        i0 = int(np.argmin(np.abs(self.params)))
        return s - s[i0]

    def to_csv(self, path):
        d = self.samples.shape[1]
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["arclength"] + ["x%d" % (i + 1) for i in range(d)])
            for a, p in zip(self.arclength, self.samples):
                w.writerow(["%.17g" % a] + ["%.17g" % v for v in p])


def _tangents(samples, closed=False):
    if closed:
        t = np.roll(samples, -1, axis=0) - np.roll(samples, 1, axis=0)
        t[:, -1] = np.where(np.abs(t[:, -1]) > 0.5, t[:, -1] - np.sign(t[:, -1]), t[:, -1])
    else:
        t = np.gradient(samples, axis=0)
    return t / np.linalg.norm(t, axis=1, keepdims=True)


def strong_manifold(sys, p, side, r=0.1, tol=1e-6, n=201, depth=30):
    """Local strong manifold W^side(p, r) as a polyline; the invariance residual is checked."""
    x = as_array(p).astype(float)
    t = np.linspace(-r, r, n)
    pts = strong_leaf_points(sys, np.tile(x, (n, 1)), t, side, depth)
    res = strong_invariance_residual(sys, x, pts, side, depth)
    if res > tol:
        raise NonConvergenceError("invariance residual %.3g above tolerance %.3g" % (res, tol))
    return LeafPatch(side, TorusPoint(x), r, pts, _tangents(pts), t, res)


def strong_invariance_residual(sys, p, samples, side, depth=30):
    """max distance from f(samples) to the leaf through f(p), read at the same frame coordinate."""
    _, Binv = linear_frame(sys)
    row = Binv[_SIDE_INDEX[side]]
    fp = lift_map(sys, np.asarray(p, dtype=float))
    img = lift_map(sys, samples)
    img = fp + torus_delta(fp, img)
    t_img = (img - fp) @ row
    on_leaf = strong_leaf_points(sys, np.tile(fp, (len(samples), 1)), t_img, side, depth)
    return float(np.max(np.linalg.norm(img - on_leaf, axis=1)))


# --- multiple shooting --------------------------------------------------------------


def _assemble(J, pins, m, M, d):
    """Sparse Jacobian of the shooting system for a batch of m segments."""
    rows, cols, vals = [], [], []
    n_per = M * d
    s = np.arange(m)
    for k in range(M - 1):
        for i in range(d):
            r = s * n_per + k * d + i
            for l in range(d):
                rows.append(r)
                cols.append(s * n_per + k * d + l)
                vals.append(J[:, k, i, l])
            rows.append(r)
            cols.append(s * n_per + (k + 1) * d + i)
            vals.append(np.full(m, -1.0))
    for j, (k, c, _) in enumerate(pins):
        r = s * n_per + (M - 1) * d + j
        c = np.broadcast_to(c, (m, d))
        for l in range(d):
            rows.append(r)
            cols.append(s * n_per + k * d + l)
            vals.append(c[:, l])
    rows, cols, vals = (np.concatenate(a) for a in (rows, cols, vals))
    keep = vals != 0
    return csc_matrix((vals[keep], (rows[keep], cols[keep])), shape=(m * n_per, m * n_per))


def _residual(sys, ref, xi, pins):
    y = ref + xi
    r = lift_map(sys, y[:, :-1]) - y[:, 1:]
    r = r - np.round(r)
    m, M, d = xi.shape
    pin = np.stack([np.einsum("md,md->m", xi[:, k], np.broadcast_to(c, (m, d))) - v for k, c, v in pins], 1)
    return np.concatenate([r.reshape(m, -1), pin], axis=1)


def shoot(sys, ref, pins, xi=None, tol=1e-13, max_iter=25):
    """Solve for displacements xi (m, M, d) with y = ref + xi a true orbit segment of sys.

    ``pins`` is a list of (index, covector, value) closing the system; there
    must be exactly d of them.
    """
    ref = np.asarray(ref, dtype=float)
    m, M, d = ref.shape
    if len(pins) != d:
        raise DomainError("shooting needs exactly %d pins" % d)
    pins = [(k, np.asarray(c, dtype=float), np.broadcast_to(np.asarray(v, dtype=float), (m,))) for k, c, v in pins]
    xi = np.zeros_like(ref) if xi is None else np.array(xi, dtype=float)
    for it in range(max_iter):
        F = _residual(sys, ref, xi, pins)
        if np.max(np.abs(F)) < tol:
            return xi
        J = jacobian(sys, ref[:, :-1] + xi[:, :-1])
        lu = splu(_assemble(J, pins, m, M, d))
        step = lu.solve(F.ravel()).reshape(m, M, d)
        xi = xi - step
        if np.max(np.abs(step)) < tol:
            return xi
    raise NonConvergenceError("shooting Newton iteration did not converge in %d steps" % max_iter)


def shooting_jacobian(sys, ref, xi, pins):
    m, M, d = ref.shape
    pins = [(k, np.asarray(c, dtype=float), v) for k, c, v in pins]
    J = jacobian(sys, ref[:, :-1] + xi[:, :-1])
    return _assemble(J, pins, m, M, d)


def reference_orbits(sys, points, n_back, n_fwd):
    """Wrapped orbit segments (m, n_back + n_fwd + 1, d), time 0 at index n_back."""
    x = np.atleast_2d(np.asarray(points, dtype=float))
    back = [x]
    for _ in range(n_back):
        back.append(apply_inverse(sys, back[-1]))
    fwd = []
    cur = x
    for _ in range(n_fwd):
        cur = apply(sys, cur)
        fwd.append(cur)
    return np.stack(back[::-1] + fwd, axis=1)


def center_pins(sys, N, height):
    """Pins for a center leaf: height at time 0, no u-drift at +N, no s-drift at -N."""
    _, Binv = linear_frame(sys)
    return [(N, Binv[2], height), (2 * N, Binv[0], 0.0), (0, Binv[1], 0.0)]


def _require_skew(sys, what):
    if sys.dim != 3 or sys.kind == "quotient_cat":
        raise DomainError("%s needs a skew-product system" % what)


def center_leaf_points(g_sys, ref, height=0.0, N=30, xi=None):
    """Points of the g center leaf shadowing the reference orbits, at height offset ``height``.

    ``ref`` holds (m, 2N+1, 3) wrapped reference orbits with time 0 at index N.
    Returns (points (m, 3) lifted near ref[:, N], full displacement array).
    """
    _require_skew(g_sys, "center leaves")
    try:
        xi = shoot(g_sys, ref, center_pins(g_sys, N, height), xi)
    except NonConvergenceError as exc:
        raise CoherenceError("center leaf not found inside the tube: %s" % exc) from exc
    return ref[:, N] + xi[:, N], xi


def _f_reference(f_sys, points, N):
    if f_sys.dim != 3 or f_sys.kind == "perturbed_skew" or f_sys.kind == "quotient_cat":
        raise DomainError("reference system must be a skew product with z-independent base")
    return reference_orbits(f_sys, points, N, N)


def center_patch_g(f_sys, g_sys, leaf_base, r=0.1, tol=1e-6, n=64, N=30):
    """The g-invariant circle near {b} x S^1 as a closed polyline of n samples.

    The residual compares g(leaf) with the leaf computed at f(b).
    """
    b = as_array(leaf_base).astype(float)[:2]
    z = np.arange(n) / n
    pts0 = np.column_stack([np.tile(b, (n, 1)), z])
    ref = _f_reference(f_sys, pts0, N)
    leaf, _ = center_leaf_points(g_sys, ref, 0.0, N)
    tilt = float(np.max(np.linalg.norm(torus_delta(pts0[:, :2], leaf[:, :2]), axis=1)))
    if tilt > r:
        raise CoherenceError("leaf leaves the tube: tilt %.3g > r = %.3g" % (tilt, r))
    # invariance: g(leaf) against the leaf at the image base point
    img = wrap_array(lift_map(g_sys, leaf))
    fb = wrap_array(lift_map(f_sys, np.concatenate([b, [0.0]])))[:2]
    pts1 = np.column_stack([np.tile(fb, (n, 1)), img[:, 2]])
    leaf1, _ = center_leaf_points(g_sys, _f_reference(f_sys, pts1, N), 0.0, N)
    res = float(np.max(np.linalg.norm(torus_delta(leaf1, img), axis=1)))
    if res > tol:
        raise CoherenceError("center leaf invariance residual %.3g above %.3g" % (res, tol))
    samples = np.column_stack([b + torus_delta(b, leaf[:, :2]), leaf[:, 2]])
    return LeafPatch("c", TorusPoint(np.concatenate([b, [0.0]])), 0.5, samples, _tangents(samples, closed=True), z, res)


# --- foliation models -------------------------------------------------------------------


@dataclass(frozen=True)
class FoliationModel:
    """A foliation by curves given by ``generator(base_points, t) -> points``.

    Points are lifted near the (possibly lifted) base points.  ``param_dir``
    approximates the leaf direction of increasing t.
    """

    system: object
    side: str
    plaque_radius: float
    generator: object
    param_dir: np.ndarray = None

    def leaf_point(self, base, t):
        base = np.atleast_2d(np.asarray(as_array(base), dtype=float))
        return self.generator(base, np.broadcast_to(np.asarray(t, dtype=float), base.shape[:1]))

    def plaque(self, base, n=101):
        x = as_array(base).astype(float)
        t = np.linspace(-self.plaque_radius, self.plaque_radius, n)
        pts = self.leaf_point(np.tile(x, (n, 1)), t)
        return LeafPatch(self.side, TorusPoint(x), self.plaque_radius, pts, _tangents(pts), t)

    def path(self, base, t_end, n_steps=None):
        """Polyline in the leaf of ``base`` from t=0 to t=t_end, steps <= plaque_radius/2."""
        if n_steps is None:
            n_steps = max(1, int(np.ceil(abs(t_end) / (self.plaque_radius / 2))))
        t = np.linspace(0.0, t_end, n_steps + 1)
        x = as_array(base).astype(float)
        return self.leaf_point(np.tile(x, (len(t), 1)), t)


def linear_foliation(direction, radius=0.25, system=None, side="u"):
    e = np.asarray(direction, dtype=float)
    e = e / np.linalg.norm(e)
    return FoliationModel(system, side, radius, lambda b, t: b + t[:, None] * e, e)


def strong_foliation(sys, side, radius=0.1, depth=30):
    B, _ = linear_frame(sys)
    gen = lambda b, t: strong_leaf_points(sys, b, t, side, depth)
    return FoliationModel(sys, side, radius, gen, B[:, _SIDE_INDEX[side]])


def center_foliation(g_sys, radius=0.25, N=30):
    """g center foliation: the leaf through P is found from the g-orbit of P."""
    _require_skew(g_sys, "center foliation")

    def gen(base, t):
        x0 = wrap_array(base)
        ref = reference_orbits(g_sys, x0, N, N)
        pts, _ = center_leaf_points(g_sys, ref, t, N)
        return base + (pts - x0)

    return FoliationModel(g_sys, "c", radius, gen, np.array([0.0, 0.0, 1.0]))


# --- holonomy -------------------------------------------------------------------------


def _section_solve(model, X, P, T, guess, tol=1e-14, max_iter=30):
    """t with <leaf_point(X, t) - P, T> = 0, by secant iteration (batched)."""
    def g(t):
        return np.einsum("md,md->m", model.leaf_point(X, t) - P, T)

    t0 = guess
    g0 = g(t0)
    t1 = t0 - g0 / np.where(np.abs(np.einsum("d,md->m", model.param_dir, T)) > 1e-3,
                            np.einsum("d,md->m", model.param_dir, T), 1.0)
    for _ in range(max_iter):
        g1 = g(t1)
        done = np.abs(g1) < tol
        if np.all(done):
            return t1
        denom = g1 - g0
        safe = np.where(np.abs(denom) > 0, denom, 1.0)
        t2 = np.where(done | (denom == 0), t1, t1 - g1 * (t1 - t0) / safe)
        t0, g0, t1 = t1, g1, t2
    if np.max(np.abs(g(t1))) > 1e-11:
        raise NonConvergenceError("holonomy section solve did not converge")
    return t1


def holonomy_params(model, tau_from, tau_to, path, s, tube=None):
    """Vectorised holonomy: parameters s on tau_from -> parameters on tau_to.

    The leaf through each point is lifted along ``path`` (a polyline in a leaf,
    lifted coordinates, consecutive points closer than the plaque radius):
    at each path vertex the lifted point is moved within its plaque onto the
    slice through the vertex orthogonal to the path.  The last move lands on
    tau_to itself.
    """
    s = np.atleast_1d(np.asarray(s, dtype=float))
    path = np.atleast_2d(np.asarray(path, dtype=float))
    if tube is None:
        tube = max(model.plaque_radius, tau_from.radius, tau_to.radius) * (1 + 1e-9)
    start = path[0] + torus_delta(path[0], tau_from.base.coords)
    X = start + s[:, None] * tau_from.direction
    m, d = X.shape
    if len(path) < 2 and tau_from == tau_to:
        return s.copy()
    for j in range(1, len(path)):
        last = j == len(path) - 1
        if last:
            P = path[j] + torus_delta(path[j], tau_to.base.coords)
            if d == 2:
                T = np.tile(Transversal(tau_to.base, tau_to.direction, tau_to.radius).normal, (m, 1))
            else:
                # plane orthogonal to tau_to's complement in direction of travel
                tan = path[j] - path[j - 1]
                tan = tan - (tan @ tau_to.direction) * tau_to.direction
                T = np.tile(tan / np.linalg.norm(tan), (m, 1))
        else:
            P = path[j]
            tan = path[j + 1] - path[j - 1]
            T = np.tile(tan / np.linalg.norm(tan), (m, 1))
        P = np.broadcast_to(P, (m, d))
        guess = np.einsum("md,md->m", P - X, T) * np.sign(np.einsum("d,md->m", model.param_dir, T))
        t = _section_solve(model, X, P, T, guess)
        X = model.leaf_point(X, t)
        off = np.linalg.norm(X - path[j], axis=1)
        if np.any(off > tube):
            k = int(np.argmax(off))
            raise HolonomyUndefinedError(
                "lifted leaf leaves the tube at path vertex %d (distance %.3g > %.3g)" % (j, off[k], tube),
                exit_point=wrap_array(X[k]),
            )
    P_end = path[-1] + torus_delta(path[-1], tau_to.base.coords)
    out = (X - P_end) @ tau_to.direction
    if np.any(np.abs(out) > tau_to.radius * (1 + 1e-9)):
        k = int(np.argmax(np.abs(out)))
        raise HolonomyUndefinedError("holonomy image outside the target transversal", exit_point=wrap_array(X[k]))
    return out


def holonomy_map(model, tau_from, tau_to, path, x):
    """Holonomy of a single point x on tau_from; returns a TorusPoint on tau_to."""
    xv = as_array(x).astype(float)
    s = float(torus_delta(tau_from.base.coords, xv) @ tau_from.direction)
    out = holonomy_params(model, tau_from, tau_to, path, np.array([s]))[0]
    return TorusPoint(tau_to.base.coords + out * tau_to.direction)


def bruteforce_unstable_holonomy(sys, tau_from, tau_to, s, n_back=14, n_pts=40001, span=1.2):
    """Independent oracle: trace W^u(x) as the forward image of a tiny segment at f^-n(x).

    The segment starts along the linear unstable direction at the preimage and
    is pushed forward n times (displacement form); the polyline crossing of
    tau_to is found by linear interpolation on the dense image.  2-d only.
    """
    if sys.dim != 2:
        raise DomainError("brute-force holonomy oracle is two-dimensional")
    B, _ = linear_frame(sys)
    e_u = B[:, 0]
    lam = abs(np.linalg.eigvals(sys.A)).max()
    out = []
    normal = Transversal(tau_to.base, tau_to.direction, tau_to.radius).normal
    for sv in np.atleast_1d(s):
        x = tau_from.base.coords + sv * tau_from.direction
        pts, defects = _orbit_with_defects(sys, wrap_array(x), n_back, forward=False)
        h = np.linspace(-0.05 * span, span, n_pts) / lam**n_back
        delta = h[:, None] * e_u
        for k in range(n_back):
            delta = map_increment(sys, pts[k], delta) + defects[k]
        curve = x + delta
        base = x + torus_delta(x, tau_to.base.coords)
        side = (curve - base) @ normal
        idx = np.nonzero(np.sign(side[:-1]) != np.sign(side[1:]))[0]
        if idx.size == 0:
            raise HolonomyUndefinedError("oracle leaf does not reach the target transversal")
        i = idx[0]
        a = side[i] / (side[i] - side[i + 1])
        hit = curve[i] + a * (curve[i + 1] - curve[i])
        out.append((hit - base) @ tau_to.direction)
    return np.array(out)


# --- triangle constant -----------------------------------------------------------------


def triangle_constant(model_F, model_G, tau, n_pairs=2000, seed=0):
    """Smallest D with max(d_F, d_G)/D <= d_tau <= D (d_F + d_G) over sampled triangles.

    Two-dimensional models.  y is the intersection of the F-leaf of p with the
    G-leaf of q; the edges a = 0 and b = 0 are included in the sample.
    """
    base = tau.base.coords if isinstance(tau, Transversal) else np.asarray(tau, dtype=float)
    radius = tau.radius if isinstance(tau, Transversal) else 0.1
    if base.shape[0] != 2:
        raise DomainError("triangle constant is implemented for surfaces")
    rng = np.random.default_rng(seed)
    p = base + rng.uniform(-radius / 2, radius / 2, (n_pairs, 2))
    a = rng.uniform(-radius / 2, radius / 2, n_pairs)
    b = rng.uniform(-radius / 2, radius / 2, n_pairs)
    a[: n_pairs // 10] = 0.0
    b[n_pairs // 10 : n_pairs // 5] = 0.0
    y = model_F.leaf_point(p, a)
    q = model_G.leaf_point(y, b)
    # angle between the two leaves at p
    eps = 1e-6
    tf = model_F.leaf_point(p[:1], np.array([eps]))[0] - p[0]
    tg = model_G.leaf_point(p[:1], np.array([eps]))[0] - p[0]
    cosang = abs(tf @ tg) / (np.linalg.norm(tf) * np.linalg.norm(tg))
    if np.sqrt(max(0.0, 1 - cosang**2)) < 1e-3:
        raise TransversalityError("foliations nearly tangent (angle below 1e-3)")
    dF = np.linalg.norm(y - p, axis=1)
    dG = np.linalg.norm(q - y, axis=1)
    dt = np.linalg.norm(q - p, axis=1)
    ok = dt > 0
    ratio = np.maximum(np.maximum(dF, dG)[ok] / dt[ok], dt[ok] / (dF + dG)[ok])
    return float(np.max(ratio))
