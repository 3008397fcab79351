"""
Invariant splittings, bracketing functions and the exponent calculator.

Bracketing functions are one-dimensional here: each of E^u, E^c, E^s is a
line, so T^s f at p is the number |Df(p) e_s(p)| and the brackets are that
number relaxed outward by a small margin.  In dimension 2 the center is
trivial and gamma = gammahat = 1.
"""

from dataclasses import dataclass, field
import csv
import warnings

import numpy as np

from .errors import ConditionViolatedError, DomainError, NonConvergenceError
from .phasespace import TorusPoint, as_array
from .systems import apply, apply_inverse, jacobian, lift_map

BRACKETS = ("mu", "nu", "gamma", "gammahat", "nuhat", "muhat")


def conorm(m):
    """Minimal stretch ||m^-1||^-1 (smallest singular value)."""
    m = np.asarray(m, dtype=float)
    s = np.linalg.svd(m, compute_uv=False)
    if s[-1] <= 1e-14 * max(s[0], 1.0):
        raise DomainError("conorm of a singular matrix")
    return float(s[-1])


def _orient(v):
    """Fix the sign so the first non-negligible component is positive."""
    v = np.asarray(v, dtype=float)
    v = v / np.linalg.norm(v, axis=-1, keepdims=True)
    idx = np.argmax(np.abs(v) > 1e-12, axis=-1)
    lead = np.take_along_axis(v, idx[..., None], -1)
    return np.where(lead < 0, -v, v)


@dataclass(frozen=True)
class SplittingFrame:
    point: TorusPoint
    e_u: np.ndarray
    e_s: np.ndarray
    e_c: np.ndarray = None
    residual: float = 0.0
    eigenvalues: tuple = None


def exact_splitting_linear(matrix):
    A = np.asarray(matrix, dtype=float)
    if A.shape != (2, 2):
        raise DomainError("expected a 2x2 matrix")
    w, V = np.linalg.eig(A)
    if np.any(np.iscomplex(w)) or np.min(np.abs(np.abs(w) - 1)) < 1e-12:
        raise DomainError("matrix is not hyperbolic")
    w = np.real(w)
    V = np.real(V)
    iu = int(np.argmax(np.abs(w)))
    e_u, e_s = _orient(V[:, iu]), _orient(V[:, 1 - iu])
    return SplittingFrame(TorusPoint([0.0, 0.0]), e_u, e_s, None, 0.0, (float(w[iu]), float(w[1 - iu])))


def _backward_orbits(sys, x, n):
    """Preimages x_{-1}, ..., x_{-n} reduced mod 1 (Jacobians are periodic)."""
    out = []
    cur = x
    for _ in range(n):
        cur = apply_inverse(sys, cur)
        out.append(cur)
    return out


def _forward_orbits(sys, x, n):
    out = []
    cur = x
    for _ in range(n):
        cur = apply(sys, cur)
        out.append(cur)
    return out


def _push(mats, V, inverse=False):
    """Push the frames V (m, d, k) through the list of Jacobians, re-orthonormalising."""
    for J in mats:
        V = np.linalg.solve(J, V) if inverse else J @ V
        V, _ = np.linalg.qr(V)
    return V


def _fields_at(sys, x, n_iters):
    """Unit fields (e_u, e_c, e_s) at the points x (m, d) by power iteration."""
    m, d = x.shape
    back = _backward_orbits(sys, x, n_iters)
    fwd = _forward_orbits(sys, x, n_iters - 1)
    # Jacobians along the backward orbit, oldest first, for forward pushes
    J_back = [jacobian(sys, y) for y in back[::-1]]
    # inverse pushes from x_n down to x_0 use Df(x_{n-1}), ..., Df(x_0)
    J_fwd = [jacobian(sys, y) for y in (fwd[::-1] + [x])]
    rng_vec = np.array([1.0, 0.3141, 0.2718][:d])
    v0 = np.broadcast_to(rng_vec[:, None], (m, d, 1)).copy()
    e_u = _push(J_back, v0)[..., 0]
    e_s = _push(J_fwd, v0, inverse=True)[..., 0]
    e_c = None
    if d == 3:
        P0 = np.broadcast_to(np.array([[1.0, 0.0], [0.3141, 0.1], [0.2718, 1.0]]), (m, 3, 2)).copy()
        cu = _push(J_back, P0)
        cs = _push(J_fwd, P0, inverse=True)
        n_cu = np.cross(cu[..., 0], cu[..., 1])
        n_cs = np.cross(cs[..., 0], cs[..., 1])
        e_c = _orient(np.cross(n_cu, n_cs))
    return _orient(e_u), e_c, _orient(e_s)


def _line_residual(J, e, e_img):
    v = (J @ e[..., None])[..., 0]
    v = v / np.linalg.norm(v, axis=-1, keepdims=True)
    # lines are unsigned
    return np.minimum(np.linalg.norm(v - e_img, axis=-1), np.linalg.norm(v + e_img, axis=-1))


def splitting_field(sys, points, n_iters=60, tol=1e-8):
    """Batched splitting estimate.  Returns (e_u, e_c, e_s, residual) arrays.

    The residual is the invariance defect of each line field, measured against
    an independent estimate at the image point.
    """
    if n_iters < 20:
        raise DomainError("n_iters must be at least 20")
    x = np.atleast_2d(as_array(points)).astype(float)
    if sys.dim == 2 and sys.delta == 0:
        fr = exact_splitting_linear(sys.A)
        m = x.shape[0]
        return np.tile(fr.e_u, (m, 1)), None, np.tile(fr.e_s, (m, 1)), np.zeros(m)
    e_u, e_c, e_s = _fields_at(sys, x, n_iters)
    fx = lift_map(sys, x)
    f_u, f_c, f_s = _fields_at(sys, fx, n_iters)
    J = jacobian(sys, x)
    res = np.maximum(_line_residual(J, e_u, f_u), _line_residual(J, e_s, f_s))
    if e_c is not None:
        res = np.maximum(res, _line_residual(J, e_c, f_c))
    if np.max(res) > tol:
        raise NonConvergenceError(
            "splitting invariance residual %.3g exceeds %.3g (n_iters=%d)" % (np.max(res), tol, n_iters)
        )
    return e_u, e_c, e_s, res


def estimate_splitting(sys, p, n_iters=60, tol=1e-8):
    e_u, e_c, e_s, res = splitting_field(sys, np.atleast_2d(as_array(p)), n_iters, tol)
    return SplittingFrame(
        TorusPoint(as_array(p)), e_u[0], e_s[0], None if e_c is None else e_c[0], float(res[0])
    )


def torus_grid(n, d):
    axes = [np.arange(n) / n] * d
    return np.stack(np.meshgrid(*axes, indexing="ij"), -1).reshape(-1, d)


# --- bracketing ----------------------------------------------------------------


@dataclass
class BracketingReport:
    grid: np.ndarray
    pointwise: dict
    margin: float = 1e-6
    uniform: dict = field(init=False)

    def __post_init__(self):
        pw = self.pointwise
        self.uniform = {
            "nu": float(np.max(pw["nu"])),
            "mu": float(np.min(pw["mu"])),
            "gamma": float(np.min(pw["gamma"])),
            "gammahat": float(np.min(pw["gammahat"])),
            "nuhat": float(np.max(pw["nuhat"])),
            "muhat": float(np.min(pw["muhat"])),
        }

    @property
    def lam(self):
        return 1.0 / self.pointwise["nuhat"]

    @property
    def omega(self):
        return 1.0 / self.pointwise["muhat"]

    @classmethod
    def from_constants(cls, mu, nu, gamma=1.0, gammahat=1.0, nuhat=None, muhat=None):
        """Single-point report from given constants (no ordering check on missing sides)."""
        nuhat = mu if nuhat is None else nuhat
        muhat = nuhat if muhat is None else muhat
        vals = dict(mu=mu, nu=nu, gamma=gamma, gammahat=gammahat, nuhat=nuhat, muhat=muhat)
        return cls(np.zeros((1, 0)), {k: np.array([float(v)]) for k, v in vals.items()}, 0.0)

    def check_ordering(self):
        pw = self.pointwise
        ok = (
            (0 < pw["mu"])
            & (pw["mu"] <= pw["nu"])
            & (pw["nu"] < 1)
            & (pw["nu"] < pw["gamma"])
            & (pw["gamma"] <= 1 / pw["gammahat"])
            & (1 / pw["gammahat"] < 1 / pw["nuhat"])
            & (1 / pw["nuhat"] <= 1 / pw["muhat"])
        )
        return bool(np.all(ok))

    def to_csv(self, path):
        d = self.grid.shape[1]
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["x%d" % (i + 1) for i in range(d)] + list(BRACKETS))
            for i in range(self.grid.shape[0]):
                row = list(self.grid[i]) + [self.pointwise[k][i] for k in BRACKETS]
                w.writerow(["%.17g" % v for v in row])


def bracketing(sys, grid=None, frames=None, margin=1e-6, n_iters=60):
    """Pointwise brackets of Tf on each summand of the splitting.

    ``frames`` may be a tuple (e_u, e_c, e_s) of arrays as returned by
    splitting_field; otherwise it is computed.
    """
    if grid is None:
        grid = torus_grid(64 if sys.dim == 2 else 16, sys.dim)
    grid = np.atleast_2d(np.asarray(grid, dtype=float))
    if frames is None:
        e_u, e_c, e_s, _ = splitting_field(sys, grid, n_iters)
    else:
        e_u, e_c, e_s = frames[:3]
    J = jacobian(sys, grid)
    t_u = np.linalg.norm((J @ e_u[..., None])[..., 0], axis=-1)
    t_s = np.linalg.norm((J @ e_s[..., None])[..., 0], axis=-1)
    t_c = np.ones_like(t_u) if e_c is None else np.linalg.norm((J @ e_c[..., None])[..., 0], axis=-1)
    pw = {
        "mu": t_s - margin,
        "nu": t_s + margin,
        "gamma": t_c - margin if e_c is not None else t_c,
        "gammahat": 1 / (t_c + margin) if e_c is not None else t_c,
        "nuhat": 1 / (t_u - margin),
        "muhat": 1 / (t_u + margin),
    }
    rep = BracketingReport(grid, pw, margin)
    if not rep.check_ordering():
        raise ConditionViolatedError("bracketing ordering violated: system not normally hyperbolic at these amplitudes")
    return rep


def validate_system(sys, n=16, slack=1.1):
    """Load-time C^1 smallness proxy: nu < gamma < gammahat^-1 < nuhat^-1 with 10% room."""
    rep = bracketing(sys, torus_grid(n, sys.dim), n_iters=40)
    u = rep.uniform
    # the center pair gamma <= 1/gammahat may be an equality (isometric center);
    # the 10% room is required across the hyperbolic gaps only
    gaps = [(u["nu"], u["gamma"]), (1 / u["gammahat"], 1 / u["nuhat"])]
    for a, b in gaps:
        if not a * slack < b:
            raise ConditionViolatedError(
                "bunching chain nu < gamma < 1/gammahat < 1/nuhat fails with 10%% margin (%.4g vs %.4g)" % (a, b)
            )
    return rep


# --- exponent calculator --------------------------------------------------------

# each condition is a list of (X, Y, Z) meaning X < Y * Z**theta
_SIDES = {
    "cu": lambda c: [(c["nu"], c["gamma"], c["mu"])],
    "cs": lambda c: [(c["nuhat"], c["gammahat"], c["muhat"])],
}
CONDITIONS = {
    "Eu": lambda c: [(c["nuhat"], c["gammahat"], c["mu"])],
    "Wu_C2": lambda c: [(c["nuhat"], c["gammahat"], c["mu"])],
    "Es": lambda c: [(c["nu"], c["gamma"], c["muhat"])],
    "Ws_C2": lambda c: [(c["nu"], c["gamma"], c["muhat"])],
    "Ecu": lambda c: [(c["nu"], c["gamma"], c["mu"])],
    "Ecs": lambda c: [(c["nuhat"], c["gammahat"], c["muhat"])],
    "Ec": lambda c: [(c["nu"], c["gamma"], c["mu"]), (c["nuhat"], c["gammahat"], c["muhat"])],
    "Wu_C1": lambda c: [(c["nuhat"], c["gammahat"], c["nuhat"] * c["mu"])],
    "Ws_C1": lambda c: [(c["nu"], c["gamma"], c["nu"] * c["muhat"])],
    "ThmA_cu": lambda c: [(c["nu"], 1.0, c["mu"])],
    "ThmA_cs": lambda c: [(c["nuhat"], 1.0, c["muhat"])],
    "ThmA_c": lambda c: [(c["nu"], 1.0, c["mu"]), (c["nuhat"], 1.0, c["muhat"])],
    "ThmB_in_cs": lambda c: [(c["nu"], 1.0, c["mu"])],
    "ThmB_in_cu": lambda c: [(c["nuhat"], 1.0, c["muhat"])],
    "ThmB_full": lambda c: [(c["nu"], 1.0, c["mu"]), (c["nuhat"], 1.0, c["muhat"])],
}


@dataclass(frozen=True)
class PredictedExponent:
    condition: str
    theta_max: float
    mode: str
    constants: dict
    satisfiable: bool = True

    def holds(self, theta):
        """Strict inequality of the condition at exponent theta (all points in pointwise mode)."""
        ok = True
        for X, Y, Z in CONDITIONS[self.condition](self.constants):
            ok = ok and bool(np.all(np.asarray(X) < np.asarray(Y) * np.asarray(Z) ** theta))
        return ok


def _solve(X, Y, Z):
    X, Y, Z = (np.asarray(v, dtype=float) for v in (X, Y, Z))
    with np.errstate(divide="ignore", invalid="ignore"):
        th = np.log(X / Y) / np.log(Z)
    th = np.where(X < Y, th, 0.0)
    return np.minimum(th, 1.0)


def predicted_exponent(report, condition, mode="uniform"):
    if condition not in CONDITIONS:
        raise DomainError("unknown exponent condition %r" % (condition,))
    if mode == "uniform":
        consts = dict(report.uniform)
    elif mode == "pointwise":
        consts = {k: np.asarray(v) for k, v in report.pointwise.items()}
    else:
        raise DomainError("mode must be 'uniform' or 'pointwise'")
    theta = min(float(np.min(_solve(*t))) for t in CONDITIONS[condition](consts))
    if theta <= 0:
        warnings.warn("condition %s is not satisfied for any theta > 0" % condition)
        return PredictedExponent(condition, 0.0, mode, consts, False)
    return PredictedExponent(condition, theta, mode, consts)
