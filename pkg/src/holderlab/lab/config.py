"""
Experiment configuration: one INI file with sections [system], [experiment],
[numeric] and [output].  Every value is checked on load; failures raise
ConfigError naming the offending field as section.key.
"""

from dataclasses import dataclass, field
import configparser
import hashlib

from ..errors import ConfigError, DomainError
from ..systems import KINDS, SHAPES, SystemSpec

EXPERIMENTS = ("bunching", "section", "holonomy", "conjugacy", "suspension", "leafexp", "gallery")

# key -> (type, default, (lo, hi) or None)
NUMERIC = {
    "seed": (int, 0, (0, 2**32 - 1)),
    "grid": (int, 16, (2, 256)),
    "heights": (int, 4, (1, 64)),
    "n_pairs": (int, 2000, (50, 10**6)),
    "scale_min": (float, 2.0**-20, (1e-15, 1.0)),
    "scale_max": (float, 2.0**-4, (1e-15, 1.0)),
    "tol": (float, 1e-9, (1e-15, 1e-2)),
    "depth": (int, 30, (5, 200)),
    "t_steps": (int, 32, (16, 4096)),
    "section_n": (int, 4120, (16, 10**6)),
    "k_range": (int, 25, (1, 60)),
    "n_points": (int, 64, (1, 10**5)),
}

# per-experiment overrides of the numeric defaults
NUMERIC_DEFAULTS = {
    "section": {"scale_min": 2.0**-14, "scale_max": 2.0**-8, "n_pairs": 4000},
    "conjugacy": {"grid": 32},
    "gallery": {"scale_min": 2.0**-24},
}

EXPERIMENT_KEYS = {
    "bunching": {},
    "section": {"window": "-1 1"},
    "holonomy": {"side": "u", "offset": "0.5"},
    "conjugacy": {"method": "both"},
    "suspension": {},
    "leafexp": {"p": "0.02 0.01"},
    "gallery": {"name": "slanted-conjugacy", "slant": "0.5"},
}


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    system: SystemSpec
    params: dict = field(default_factory=dict)
    numeric: dict = field(default_factory=dict)
    out_dir: str = "holderlab_out"
    plots: bool = False
    source_text: str = ""

    @property
    def config_hash(self):
        return hashlib.sha256(self.source_text.encode()).hexdigest()


def _get(parser, section, key, conv, default):
    if not parser.has_option(section, key):
        return default
    raw = parser.get(section, key)
    try:
        return conv(raw)
    except ValueError:
        raise ConfigError("cannot read %r as %s" % (raw, conv.__name__), "%s.%s" % (section, key)) from None


def _bool(raw):
    v = raw.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(raw)


def _matrix(raw):
    vals = [int(v) for v in raw.replace(",", " ").split()]
    if len(vals) != 4:
        raise ValueError(raw)
    return ((vals[0], vals[1]), (vals[2], vals[3]))


def _floats(raw):
    return tuple(float(v) for v in raw.replace(",", " ").split())


def parse_config(text, experiment=None, overrides=None):
    """Build an ExperimentConfig from INI text.

    ``experiment`` (the CLI subcommand) must agree with [experiment] kind when
    both are given.  ``overrides`` may set numeric.seed, output.directory and
    output.plots.
    """
    parser = configparser.ConfigParser()
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError("malformed config: %s" % exc, "file") from None
    known = {"system", "experiment", "numeric", "output"}
    for sec in parser.sections():
        if sec not in known:
            raise ConfigError("unknown section [%s]" % sec, sec)

    kind = _get(parser, "experiment", "kind", str, None)
    if kind is not None and kind not in EXPERIMENTS:
        raise ConfigError("unknown experiment %r (choose from %s)" % (kind, ", ".join(EXPERIMENTS)), "experiment.kind")
    if experiment is not None:
        if experiment not in EXPERIMENTS:
            raise ConfigError("unknown experiment %r" % experiment, "experiment.kind")
        if kind is not None and kind != experiment:
            raise ConfigError("config is for %r but %r was requested" % (kind, experiment), "experiment.kind")
        kind = experiment
    if kind is None:
        raise ConfigError("no experiment given", "experiment.kind")

    skind = _get(parser, "system", "kind", str, _default_kind(kind))
    if skind not in KINDS:
        raise ConfigError("unknown system kind %r (choose from %s)" % (skind, ", ".join(KINDS)), "system.kind")
    shape = _get(parser, "system", "shape", str, "shear")
    if shape not in SHAPES:
        raise ConfigError("unknown shape %r" % shape, "system.shape")
    matrix = _get(parser, "system", "matrix", _matrix, ((2, 1), (1, 1)))
    delta = _get(parser, "system", "delta", float, 0.0)
    eps = _get(parser, "system", "eps", float, 0.0)
    for name, v in (("delta", delta), ("eps", eps)):
        if not 0 <= v <= 0.05:
            raise ConfigError("%s = %g outside [0, 0.05]" % (name, v), "system.%s" % name)
    try:
        system = SystemSpec(skind, matrix, delta, eps, shape)
    except DomainError as exc:
        raise ConfigError(str(exc), "system.matrix" if "matrix" in str(exc) else "system.kind") from None

    params = {}
    allowed = EXPERIMENT_KEYS[kind]
    if parser.has_section("experiment"):
        for key in parser.options("experiment"):
            if key != "kind" and key not in allowed:
                raise ConfigError("unknown key for %s experiments" % kind, "experiment.%s" % key)
    for key, default in allowed.items():
        params[key] = _get(parser, "experiment", key, str, default)
    _check_params(kind, params)

    numeric = {}
    if parser.has_section("numeric"):
        for key in parser.options("numeric"):
            if key not in NUMERIC:
                raise ConfigError("unknown numeric parameter", "numeric.%s" % key)
    for key, (conv, default, rng) in NUMERIC.items():
        default = NUMERIC_DEFAULTS.get(kind, {}).get(key, default)
        numeric[key] = _get(parser, "numeric", key, conv, default)
    overrides = overrides or {}
    if overrides.get("seed") is not None:
        numeric["seed"] = int(overrides["seed"])
    for key, (conv, default, rng) in NUMERIC.items():
        lo, hi = rng
        if not lo <= numeric[key] <= hi:
            raise ConfigError("%s = %r outside [%g, %g]" % (key, numeric[key], lo, hi), "numeric.%s" % key)
    if not numeric["scale_min"] < numeric["scale_max"]:
        raise ConfigError("scale_min must be below scale_max", "numeric.scale_min")

    out_dir = overrides.get("out") or _get(parser, "output", "directory", str, "holderlab_out")
    plots = bool(overrides.get("plots")) or _get(parser, "output", "plots", _bool, False)
    return ExperimentConfig(kind, system, params, numeric, out_dir, plots, text)


def _default_kind(experiment):
    return {
        "conjugacy": "skew_product",
        "suspension": "skew_product",
        "leafexp": "quotient_cat",
    }.get(experiment, "linear_anosov")


def _check_params(kind, params):
    try:
        if kind == "holonomy":
            if params["side"] not in ("u", "s"):
                raise ValueError("side")
            float(params["offset"])
        elif kind == "conjugacy":
            if params["method"] not in ("stable", "center", "both"):
                raise ValueError("method")
        elif kind == "leafexp":
            if len(_floats(params["p"])) != 2:
                raise ValueError("p")
        elif kind == "section":
            lo, hi = _floats(params["window"])
            if not lo < hi:
                raise ValueError("window")
        elif kind == "gallery":
            from .gallery import GALLERY

            if params["name"] not in GALLERY:
                raise ValueError("name")
            float(params["slant"])
    except ValueError as exc:
        key = str(exc) if str(exc) in params else next(iter(params))
        raise ConfigError("invalid value %r" % params.get(key), "experiment.%s" % key) from None


def load_config(path, experiment=None, overrides=None):
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError("cannot read config: %s" % exc, "file") from None
    return parse_config(text, experiment, overrides)


def floats(raw):
    return _floats(raw)
