"""
Experiment runner: one experiment per call, CSV artifacts plus a manifest.

Every CSV is a pure function of the config and seed.  The manifest records
versions, the config hash, wall time and a sha256 per artifact, so it is the
one file that differs between re-runs.
"""

from dataclasses import replace
import csv
import hashlib
import os
import platform
import time
import warnings

import numpy as np
import scipy

from .. import __version__
from ..bunching import CONDITIONS, bracketing, predicted_exponent, torus_grid
from ..conjugacy import (
    AmalgamSpec,
    anosov_base_conjugacy,
    leaf_conjugacy_center,
    leaf_conjugacy_stable,
    leaf_expansivity_probe,
    stable_conjugacy_oracle,
    suspension_holonomy,
)
from ..errors import DomainError
from ..estimation import fit_holder, fit_to_csv, sample_pairs, samples_to_csv
from ..foliations import holonomy_params, linear_frame, strong_foliation, strong_invariance_residual as leaf_residual
from ..phasespace import Transversal, TorusPoint, torus_dist, wrap_array
from ..sections import contraction_ratio, holder_budget, lacunary_oracle, shear_example, solve_invariant_section
from ..systems import SuspensionLoop, SystemSpec
from .config import floats
from .gallery import run_gallery


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "%d" % int(v)
    if isinstance(v, (int, np.integer)):
        return "%d" % v
    if isinstance(v, (float, np.floating)):
        return "%.17g" % v
    return str(v)


def write_rows(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def write_summary(path, items):
    write_rows(path, ["key", "value"], list(items.items()))


def sha256_file(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


# --- experiments ---------------------------------------------------------------------
# each returns (artifact names, summary dict, plot callbacks)


def _bunching(cfg, out):
    sys = cfg.system
    n = cfg.numeric["grid"]
    rep = bracketing(sys, torus_grid(n, sys.dim))
    rep.to_csv(os.path.join(out, "bunching.csv"))
    rows = []
    for cond in CONDITIONS:
        for mode in ("uniform", "pointwise"):
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                pe = predicted_exponent(rep, cond, mode)
            rows.append((cond, mode, pe.theta_max, pe.satisfiable))
    write_rows(os.path.join(out, "exponents.csv"), ["condition", "mode", "theta_max", "satisfiable"], rows)
    summary = {"grid_points": rep.grid.shape[0]}
    summary.update({"uniform_" + k: v for k, v in rep.uniform.items()})
    return ["bunching.csv", "exponents.csv"], summary, []


def _section(cfg, out):
    nm = cfg.numeric
    fc = shear_example(nm["section_n"])
    sec = solve_invariant_section(fc, tol=min(nm["tol"], 1e-8))
    lo, hi = floats(cfg.params["window"])
    sec.to_csv(os.path.join(out, "section.csv"), window=(lo, hi))
    sec.log_to_csv(os.path.join(out, "section_log.csv"))
    idx = fc.base.window(lo, hi)
    err = float(np.max(np.abs(sec.values[np.mod(idx, fc.base.n)] - lacunary_oracle(fc.base.n, idx))))
    quarter = float(sec(np.array([np.pi / 100]))[0])
    budget = holder_budget(fc, fc.theta)
    smp = sample_pairs(sec, (lo, hi), nm["n_pairs"], nm["scale_min"], nm["scale_max"], seed=nm["seed"])
    fit = fit_holder(smp)
    samples_to_csv(smp, os.path.join(out, "section_samples.csv"))
    fit_to_csv(fit, os.path.join(out, "fit_summary.csv"))
    summary = {
        "lattice_points": fc.base.n,
        "iterations": len(sec.log),
        "residual": sec.residual,
        "sup_error_vs_oracle": err,
        "value_at_pi_over_100": quarter,
        "contraction_ratio": contraction_ratio(sec),
        "declared_k": fc.k,
        "theta_budget": budget.theta,
        "H_budget": budget.H,
        "H_budget_with_shear": budget.H_shear,
        "theta_hat": fit.theta_hat,
    }
    files = ["section.csv", "section_log.csv", "section_samples.csv", "fit_summary.csv"]

    def plot(ax_factory):
        fig, ax = ax_factory()
        x, v = sec.on_window(lo, hi)
        ax.plot(x, v, lw=0.4)
        ax.set_xlabel("x")
        ax.set_ylabel("invariant section")
        return "section.svg", fig

    return files, summary, [plot, _fit_plot(smp, fit, "section_fit.svg")]


def _holonomy_setup(sys, side, offset):
    """Holonomy along W^side(0) from the transversal at 0 to the one a frame distance ``offset`` away."""
    B, _ = linear_frame(sys)
    k = 0 if side == "u" else 1
    other = B[:, 1 - k]
    model = strong_foliation(sys, side, 0.1)
    # leaf parameter that moves the first coordinate by ``offset``
    path = model.path(np.zeros(2), offset / B[0, k])
    tau_from = Transversal(TorusPoint([0.0, 0.0]), other, 0.2)
    tau_to = Transversal(TorusPoint(wrap_array(path[-1])), other, 0.3)
    return model, tau_from, tau_to, path


def _holonomy(cfg, out):
    sys, nm = cfg.system, cfg.numeric
    if sys.dim != 2:
        raise DomainError("holonomy experiments run on 2-d systems")
    side = cfg.params["side"]
    model, tf, tt, path = _holonomy_setup(sys, side, float(cfg.params["offset"]))
    fn = lambda s: holonomy_params(model, tf, tt, path, s)
    smp = sample_pairs(fn, tf, nm["n_pairs"], nm["scale_min"], min(nm["scale_max"], 0.1), seed=nm["seed"])
    fit = fit_holder(smp)
    samples_to_csv(smp, os.path.join(out, "holonomy_samples.csv"))
    fit_to_csv(fit, os.path.join(out, "fit_summary.csv"))
    cond = "Eu" if side == "u" else "Es"
    rep = bracketing(sys, torus_grid(16, 2), n_iters=40)
    pred = predicted_exponent(rep, cond)
    rng = np.random.default_rng(nm["seed"])
    pts = rng.uniform(0, 1, (nm["n_points"], 2))
    resid = max(float(leaf_residual(sys, p, model.plaque(p, 21).samples, side, nm["depth"])) for p in pts[:8])
    summary = {
        "condition": cond,
        "predicted_theta": pred.theta_max,
        "theta_hat": fit.theta_hat,
        "envelope_theta": fit.envelope_theta,
        "verdict": "pass" if fit.envelope_theta >= pred.theta_max - 0.05 else "fail",
        "invariance_residual": resid,
    }
    return ["holonomy_samples.csv", "fit_summary.csv"], summary, [_fit_plot(smp, fit, "holonomy_fit.svg")]


def _skew_pair(sys):
    if sys.kind not in ("skew_product", "perturbed_anosov", "linear_anosov"):
        raise DomainError("conjugacy experiments need a base-perturbed skew product or a 2-d Anosov map")
    if sys.dim == 2:
        return SystemSpec("linear_anosov", sys.matrix), sys
    return replace(sys, delta=0.0), sys


def _grid_points(sys, n, heights):
    b = torus_grid(n, 2)
    if sys.dim == 2:
        return b
    z = np.arange(heights) / heights
    return np.column_stack([np.repeat(b, heights, 0), np.tile(z, len(b))])


def _conjugacy(cfg, out):
    nm = cfg.numeric
    f, g = _skew_pair(cfg.system)
    X = _grid_points(g, nm["grid"], nm["heights"])
    h0 = anosov_base_conjugacy(f.A, g, tol=1e-10)
    write_rows(os.path.join(out, "h0_log.csv"), ["sweep", "sup_change"], h0.log)
    files, summary = ["h0_log.csv"], {"h0_residual": h0.residual, "h0_sweeps": h0.sweeps, "h0_sup_displacement": h0.sup_displacement}
    method = cfg.params["method"]
    if method in ("stable", "both"):
        spec = AmalgamSpec(f, g)
        fld = leaf_conjugacy_stable(spec, X, tol=nm["tol"], return_field=True)
        fld.to_csv(os.path.join(out, "conjugacy_stable.csv"))
        oracle = stable_conjugacy_oracle(spec, X, h0)
        summary.update(
            stable_window=fld.window,
            stable_tail_bound=fld.tail_bound,
            stable_oracle_error=float(np.max(torus_dist(fld.values, oracle))),
            stable_equivariance=float(np.max(fld.equivariance_residual)),
        )
        files.append("conjugacy_stable.csv")
    if method in ("center", "both") and g.dim == 3:
        fld = leaf_conjugacy_center(f, g, X, return_field=True)
        fld.to_csv(os.path.join(out, "conjugacy_center.csv"))
        base_err = torus_dist(fld.values[:, :2], h0(X[:, :2]))
        summary.update(
            center_oracle_error=float(np.max(base_err)),
            center_equivariance=float(np.max(fld.equivariance_residual)),
        )
        files.append("conjugacy_center.csv")
    return files, summary, []


def _suspension(cfg, out):
    nm = cfg.numeric
    g = cfg.system
    if g.dim != 3 or g.kind == "quotient_cat":
        raise DomainError("suspension experiments need a skew-product system")
    f = replace(g, kind="skew_product", delta=0.0)
    loop = SuspensionLoop(f, g)
    rng = np.random.default_rng(nm["seed"])
    P = rng.uniform(0, 1, (nm["n_points"], 3))
    hs, halving = suspension_holonomy(loop, P, t_steps=nm["t_steps"])
    hc = leaf_conjugacy_center(f, g, P)
    diff = torus_dist(hs, hc)
    write_rows(
        os.path.join(out, "suspension.csv"),
        ["p1", "p2", "p3", "h1", "h2", "h3", "tail", "resid"],
        [tuple(p) + tuple(h) + (halving, d) for p, h, d in zip(P, hs, diff)],
    )
    summary = {"points": len(P), "t_steps": nm["t_steps"], "step_halving": halving, "max_diff_vs_center": float(np.max(diff))}
    return ["suspension.csv"], summary, []


def _leafexp(cfg, out):
    nm = cfg.numeric
    p = floats(cfg.params["p"])
    sys = cfg.system if cfg.system.kind == "quotient_cat" else SystemSpec("quotient_cat", cfg.system.matrix)
    rep = leaf_expansivity_probe(sys, p, nm["k_range"])
    write_rows(
        os.path.join(out, "leafexp.csv"),
        ["k", "d_pair", "d_control"],
        zip(rep.ks, rep.distances, rep.control_distances),
    )
    summary = {
        "p1": rep.p[0], "p2": rep.p[1], "q1": rep.q[0], "q2": rep.q[1],
        "initial_distance": rep.initial_distance, "max_distance": rep.max_distance,
        "control_initial": rep.control_initial, "control_max": rep.control_max,
    }
    return ["leafexp.csv"], summary, []


def _gallery(cfg, out):
    nm = cfg.numeric
    name = cfg.params["name"]
    res = run_gallery(name, nm["n_pairs"], nm["scale_min"], nm["scale_max"], nm["seed"], s=float(cfg.params["slant"]))
    files, summary, plots, slopes = [], {"name": name}, [], []
    for label, (smp, fit) in res.items():
        fn = "gallery_%s_samples.csv" % label
        samples_to_csv(smp, os.path.join(out, fn))
        files.append(fn)
        for b, sl in fit.local_slopes:
            slopes.append((label, b, sl))
        summary.update({
            label + "_theta_hat": fit.theta_hat,
            label + "_finest_slope": fit.finest_slope,
            label + "_non_holder": fit.non_holder,
        })
        plots.append(_fit_plot(smp, fit, "gallery_%s.svg" % label))
    write_rows(os.path.join(out, "local_slopes.csv"), ["label", "bucket", "slope"], slopes)
    files.append("local_slopes.csv")
    return files, summary, plots


EXPERIMENT_RUNNERS = {
    "bunching": _bunching,
    "section": _section,
    "holonomy": _holonomy,
    "conjugacy": _conjugacy,
    "suspension": _suspension,
    "leafexp": _leafexp,
    "gallery": _gallery,
}


# --- plots ---------------------------------------------------------------------------


def _fit_plot(smp, fit, name):
    def plot(ax_factory):
        fig, ax = ax_factory()
        d = np.array([(s.d_in, s.d_out) for s in smp])
        ok = (d[:, 0] > 0) & (d[:, 1] > 0)
        ax.loglog(d[ok, 0], d[ok, 1], ".", ms=2)
        xs = np.array(fit.scale_range)
        ax.loglog(xs, fit.H_hat * xs**fit.theta_hat, "-", lw=1)
        ax.set_xlabel("d_in")
        ax.set_ylabel("d_out")
        ax.set_title("theta_hat = %.3f" % fit.theta_hat)
        return name, fig

    return plot


def _render(plots, out):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    matplotlib.rcParams["svg.hashsalt"] = "holderlab"

    def factory():
        fig, ax = plt.subplots(figsize=(5, 4))
        return fig, ax

    names = []
    for p in plots:
        name, fig = p(factory)
        fig.savefig(os.path.join(out, name), format="svg", metadata={"Date": None})
        plt.close(fig)
        names.append(name)
    return names


# --- entry points --------------------------------------------------------------------


def run_experiment(cfg, out_dir=None):
    """Run one experiment; returns (artifact paths, summary dict)."""
    out = out_dir or cfg.out_dir
    os.makedirs(out, exist_ok=True)
    t0 = time.perf_counter()
    files, summary, plots = EXPERIMENT_RUNNERS[cfg.experiment](cfg, out)
    write_summary(os.path.join(out, "summary.csv"), summary)
    files = files + ["summary.csv"]
    if cfg.plots and plots:
        files += _render(plots, out)
    wall = time.perf_counter() - t0
    write_manifest(cfg, out, files, wall)
    return [os.path.join(out, f) for f in files], summary


def write_manifest(cfg, out, files, wall):
    rows = [
        ("holderlab", __version__),
        ("numpy", np.__version__),
        ("scipy", scipy.__version__),
        ("python", platform.python_version()),
        ("experiment", cfg.experiment),
        ("seed", cfg.numeric["seed"]),
        ("config_sha256", cfg.config_hash),
        ("wall_time_s", "%.3f" % wall),
    ]
    rows += [("sha256:" + f, sha256_file(os.path.join(out, f))) for f in files]
    write_rows(os.path.join(out, "manifest.csv"), ["key", "value"], rows)


def verify_manifest(out):
    """Re-hash every listed artifact; returns the names that changed or vanished."""
    bad = []
    with open(os.path.join(out, "manifest.csv"), newline="") as fh:
        for key, value in list(csv.reader(fh))[1:]:
            if key.startswith("sha256:"):
                path = os.path.join(out, key[7:])
                if not os.path.exists(path) or sha256_file(path) != value:
                    bad.append(key[7:])
    return bad
