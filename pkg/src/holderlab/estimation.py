"""
Empirical Hölder exponents from sampled pairs.

Two estimators are reported: the least-squares slope of log d_out against
log d_in over every sample, and the slope of the per-bucket upper envelope
(worst pair in each dyadic scale).  Verdicts use the envelope.
"""

from dataclasses import dataclass
import csv
from typing import NamedTuple

import numpy as np

from .errors import HolderLabError, InsufficientDataError, DomainError
from .phasespace import Transversal


class HolonomySample(NamedTuple):
    d_in: float
    d_out: float
    scale_bucket: int


class SampleEvaluationError(HolderLabError):
    def __init__(self, message, coords):
        super().__init__(message)
        self.coords = coords


def _param_range(domain):
    if isinstance(domain, Transversal):
        return -domain.radius, domain.radius
    lo, hi = domain
    if not lo < hi:
        raise DomainError("empty sampling interval")
    return float(lo), float(hi)


def _evaluate(fn, s):
    try:
        return np.asarray(fn(s), dtype=float)
    except Exception as exc:
        # locate the first failing parameter for the report
        for v in np.atleast_1d(s):
            try:
                fn(np.array([v]))
            except Exception:
                raise SampleEvaluationError("map evaluation failed at s = %r: %s" % (float(v), exc), float(v)) from exc
        raise


def _out_distance(a, b, metric):
    if metric is not None:
        return np.asarray(metric(a, b), dtype=float)
    diff = a - b
    return np.abs(diff) if diff.ndim == 1 else np.linalg.norm(diff, axis=-1)


def sample_pairs(fn, domain, n_pairs, scale_min, scale_max, seed=0, anchor=None, metric=None):
    """Pairs (s, s + d) with d log-uniform in each dyadic bucket of [scale_min, scale_max].

    ``fn`` is vectorised over a 1-d parameter array; ``domain`` is a
    Transversal (parameter range [-radius, radius]) or an interval.  With an
    ``anchor`` every pair starts at that parameter.  ``metric(a, b)`` measures
    output distances (default: Euclidean).
    """
    lo, hi = _param_range(domain)
    if not 0 < scale_min < scale_max:
        raise DomainError("need 0 < scale_min < scale_max")
    if scale_max > hi - lo:
        raise DomainError("scale_max exceeds the sampling domain")
    j0 = int(np.floor(np.log2(scale_min)))
    j1 = int(np.ceil(np.log2(scale_max)))
    buckets = list(range(j0, j1))
    per = max(1, n_pairs // len(buckets))
    children = np.random.SeedSequence(seed).spawn(len(buckets))
    s1_all, d_all, b_all = [], [], []
    for j, ss in zip(buckets, children):
        rng = np.random.default_rng(ss)
        a, b = max(2.0**j, scale_min), min(2.0 ** (j + 1), scale_max)
        d = np.exp(rng.uniform(np.log(a), np.log(b), per))
        if anchor is None:
            s1 = lo + rng.uniform(0, 1, per) * (hi - lo - d)
        else:
            s1 = np.full(per, float(anchor))
            if np.any(s1 + d > hi):
                raise DomainError("anchor too close to the end of the domain for scale_max")
        s1_all.append(s1)
        d_all.append(d)
        b_all.append(np.full(per, j))
    s1 = np.concatenate(s1_all)
    d = np.concatenate(d_all)
    bk = np.concatenate(b_all)
    y1 = _evaluate(fn, s1)
    y2 = _evaluate(fn, s1 + d)
    dout = _out_distance(y1, y2, metric)
    return [HolonomySample(float(a), float(b), int(c)) for a, b, c in zip(d, dout, bk)]


def samples_from_arrays(d_in, d_out):
    """Wrap precomputed distances, assigning dyadic buckets."""
    d_in = np.asarray(d_in, dtype=float)
    d_out = np.asarray(d_out, dtype=float)
    bk = np.floor(np.log2(d_in)).astype(int)
    return [HolonomySample(float(a), float(b), int(c)) for a, b, c in zip(d_in, d_out, bk)]


@dataclass(frozen=True)
class HolderFit:
    theta_hat: float
    H_hat: float
    envelope_theta: float
    r_squared: float
    scale_range: tuple
    n_samples: int
    n_buckets: int
    local_slopes: tuple
    non_holder: bool

    @property
    def finest_slope(self):
        return self.local_slopes[0][1]

    def summary_row(self):
        return {
            "theta_hat": self.theta_hat,
            "H_hat": self.H_hat,
            "envelope_theta": self.envelope_theta,
            "r_squared": self.r_squared,
            "scale_min": self.scale_range[0],
            "scale_max": self.scale_range[1],
            "n_samples": self.n_samples,
            "n_buckets": self.n_buckets,
            "finest_local_slope": self.finest_slope,
            "non_holder": int(self.non_holder),
        }


def _ols(x, y):
    A = np.column_stack([x, np.ones_like(x)])
    (slope, icpt), *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - (slope * x + icpt)
    ss = np.sum((y - y.mean()) ** 2)
    r2 = 1.0 - np.sum(resid**2) / ss if ss > 0 else 1.0
    return float(slope), float(icpt), float(r2)


def fit_holder(samples, min_samples=50, min_buckets=4):
    arr = np.array([(s.d_in, s.d_out, s.scale_bucket) for s in samples], dtype=float).reshape(-1, 3)
    ok = (arr[:, 0] > 0) & (arr[:, 1] > 0)
    arr = arr[ok]
    buckets = np.unique(arr[:, 2]).astype(int)
    if arr.shape[0] < min_samples or buckets.size < min_buckets:
        raise InsufficientDataError(
            "need >= %d samples over >= %d dyadic buckets, got %d over %d"
            % (min_samples, min_buckets, arr.shape[0], buckets.size)
        )
    lx, ly = np.log(arr[:, 0]), np.log(arr[:, 1])
    slope, icpt, r2 = _ols(lx, ly)
    # worst pair per bucket, finest bucket first
    ex, ey = [], []
    for j in buckets:
        sel = arr[:, 2] == j
        k = np.argmax(ly[sel])
        ex.append(lx[sel][k])
        ey.append(ly[sel][k])
    ex, ey = np.array(ex), np.array(ey)
    env, _, _ = _ols(ex, ey)
    local = tuple((int(buckets[i]), float((ey[i + 1] - ey[i]) / (ex[i + 1] - ex[i]))) for i in range(len(ex) - 1))
    slopes = np.array([v for _, v in local])
    half = max(1, len(slopes) // 2)
    decaying = np.mean(slopes[:half]) < np.mean(slopes[-half:])
    non_holder = bool(slopes[0] < 0.2 and decaying)
    return HolderFit(
        theta_hat=max(slope, 0.0),
        H_hat=float(np.exp(icpt)),
        envelope_theta=float(env),
        r_squared=r2,
        scale_range=(float(arr[:, 0].min()), float(arr[:, 0].max())),
        n_samples=int(arr.shape[0]),
        n_buckets=int(buckets.size),
        local_slopes=local,
        non_holder=non_holder,
    )


def verdict(fit, predicted, margin=0.05):
    if not margin > 0:
        raise DomainError("margin must be positive")
    target = predicted.theta_max if hasattr(predicted, "theta_max") else float(predicted)
    return "pass" if fit.envelope_theta >= target - margin else "fail"


def samples_to_csv(samples, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["d_in", "d_out", "bucket"])
        for s in samples:
            w.writerow(["%.17g" % s.d_in, "%.17g" % s.d_out, "%d" % s.scale_bucket])


def fit_to_csv(fit, path):
    row = fit.summary_row()
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(list(row))
        w.writerow([v if isinstance(v, int) else "%.17g" % v for v in row.values()])
