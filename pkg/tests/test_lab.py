import csv
import os

import numpy as np
import pytest

from holderlab.errors import ConfigError, DomainError
from holderlab.lab.cli import main
from holderlab.lab.config import EXPERIMENTS, parse_config
from holderlab.lab.gallery import (
    intersection_holonomy,
    leaf_height,
    leaf_label,
    omega,
    run_gallery,
    slanted_image,
    slice_holonomy,
)
from holderlab.lab.runner import run_experiment, verify_manifest

# small but complete settings per experiment
QUICK = {
    "bunching": "",
    "section": "",
    "holonomy": "",
    "conjugacy": "[system]\ndelta = 0.01\n[numeric]\ngrid = 4\nheights = 2\n",
    "suspension": "[system]\ndelta = 0.01\n[numeric]\nn_points = 2\n",
    "leafexp": "",
    "gallery": "",
}

GOLDEN = {
    "bunching": {"bunching.csv": "x1,x2,mu,nu,gamma,gammahat,nuhat,muhat", "exponents.csv": "condition,mode,theta_max,satisfiable"},
    "section": {
        "section.csv": "x,value",
        "section_log.csv": "iter,sup_change,ratio",
        "section_samples.csv": "d_in,d_out,bucket",
        "fit_summary.csv": "theta_hat,H_hat,envelope_theta,r_squared,scale_min,scale_max,n_samples,n_buckets,finest_local_slope,non_holder",
    },
    "holonomy": {"holonomy_samples.csv": "d_in,d_out,bucket", "fit_summary.csv": "theta_hat,H_hat,envelope_theta,r_squared,scale_min,scale_max,n_samples,n_buckets,finest_local_slope,non_holder"},
    "conjugacy": {
        "conjugacy_stable.csv": "p1,p2,p3,h1,h2,h3,tail,resid",
        "conjugacy_center.csv": "p1,p2,p3,h1,h2,h3,tail,resid",
        "h0_log.csv": "sweep,sup_change",
    },
    "suspension": {"suspension.csv": "p1,p2,p3,h1,h2,h3,tail,resid"},
    "leafexp": {"leafexp.csv": "k,d_pair,d_control"},
    "gallery": {
        "gallery_vertical_samples.csv": "d_in,d_out,bucket",
        "gallery_slanted_samples.csv": "d_in,d_out,bucket",
        "local_slopes.csv": "label,bucket,slope",
    },
}


def write_cfg(tmp_path, experiment, extra=""):
    path = tmp_path / ("%s.ini" % experiment)
    path.write_text("[experiment]\nkind = %s\n%s" % (experiment, QUICK[experiment] + extra))
    return str(path)


def summary(out):
    with open(os.path.join(out, "summary.csv"), newline="") as fh:
        return dict(list(csv.reader(fh))[1:])


@pytest.mark.parametrize("experiment", EXPERIMENTS)
def test_schemas_and_manifest(tmp_path, experiment):
    out = str(tmp_path / "out")
    assert main([experiment, "--config", write_cfg(tmp_path, experiment), "--out", out]) == 0
    for name, header in GOLDEN[experiment].items():
        with open(os.path.join(out, name)) as fh:
            assert fh.readline().rstrip("\n") == header
    for name in ("summary.csv", "manifest.csv"):
        with open(os.path.join(out, name)) as fh:
            assert fh.readline().rstrip("\n") == "key,value"
    with open(os.path.join(out, "manifest.csv"), newline="") as fh:
        keys = [row[0] for row in csv.reader(fh)]
    for name in list(GOLDEN[experiment]) + ["summary.csv"]:
        assert "sha256:" + name in keys
    for key in ("config_sha256", "seed", "wall_time_s", "numpy", "python"):
        assert key in keys
    assert verify_manifest(out) == []


@pytest.mark.parametrize("experiment", EXPERIMENTS)
def test_determinism(tmp_path, experiment):
    cfg = write_cfg(tmp_path, experiment)
    a, b = str(tmp_path / "a"), str(tmp_path / "b")
    assert main([experiment, "--config", cfg, "--out", a, "--seed", "3"]) == 0
    assert main([experiment, "--config", cfg, "--out", b, "--seed", "3"]) == 0
    names = sorted(f for f in os.listdir(a) if f.endswith(".csv") and f != "manifest.csv")
    assert names == sorted(f for f in os.listdir(b) if f.endswith(".csv") and f != "manifest.csv")
    for name in names:
        with open(os.path.join(a, name), "rb") as fa, open(os.path.join(b, name), "rb") as fb:
            assert fa.read() == fb.read(), name


def test_plots_are_deterministic(tmp_path):
    pytest.importorskip("matplotlib")
    cfg = write_cfg(tmp_path, "gallery")
    a, b = str(tmp_path / "a"), str(tmp_path / "b")
    assert main(["gallery", "--config", cfg, "--out", a, "--plots"]) == 0
    assert main(["gallery", "--config", cfg, "--out", b, "--plots"]) == 0
    svgs = sorted(f for f in os.listdir(a) if f.endswith(".svg"))
    assert svgs
    for name in svgs:
        with open(os.path.join(a, name), "rb") as fa, open(os.path.join(b, name), "rb") as fb:
            assert fa.read() == fb.read()


def test_cat_holonomy_run(tmp_path, capsys):
    out = str(tmp_path / "o")
    assert main(["holonomy", "--out", out]) == 0
    assert os.path.exists(os.path.join(out, "holonomy_samples.csv"))
    assert os.path.exists(os.path.join(out, "fit_summary.csv"))
    s = summary(out)
    assert float(s["envelope_theta"]) >= 0.99 and s["verdict"] == "pass"


def test_unknown_system_kind_exit_2(tmp_path, capsys):
    path = tmp_path / "c.ini"
    path.write_text("[system]\nkind = banana\n[experiment]\nkind = holonomy\n")
    assert main(["run", "--config", str(path), "--out", str(tmp_path / "o")]) == 2
    assert "system.kind" in capsys.readouterr().err


def test_numeric_out_of_range_exit_2(tmp_path, capsys):
    path = tmp_path / "c.ini"
    path.write_text("[experiment]\nkind = bunching\n[numeric]\ngrid = 100000\n")
    assert main(["run", "--config", str(path)]) == 2
    assert "numeric.grid" in capsys.readouterr().err


def test_solver_error_exit_3(tmp_path, capsys):
    path = tmp_path / "c.ini"
    path.write_text("[system]\ndelta = 0.05\n[experiment]\nkind = conjugacy\nmethod = stable\n[numeric]\ngrid = 4\nheights = 1\n")
    assert main(["run", "--config", str(path), "--out", str(tmp_path / "o")]) == 3
    assert "conjugacy" in capsys.readouterr().err


def test_degenerate_input_exit_2(tmp_path):
    path = tmp_path / "c.ini"
    path.write_text("[experiment]\nkind = leafexp\np = 0.5 0.5\n")
    assert main(["run", "--config", str(path), "--out", str(tmp_path / "o")]) == 2


def test_verify_detects_tampering(tmp_path, capsys):
    out = str(tmp_path / "o")
    assert main(["leafexp", "--out", out]) == 0
    assert main(["verify", out]) == 0
    with open(os.path.join(out, "leafexp.csv"), "a") as fh:
        fh.write("tampered\n")
    assert main(["verify", out]) == 3
    assert "leafexp.csv" in capsys.readouterr().out


@pytest.mark.parametrize(
    "text, field",
    [
        ("[experiment]\nkind = nope\n", "experiment.kind"),
        ("[system]\ndelta = 0.3\n[experiment]\nkind = bunching\n", "system.delta"),
        ("[system]\nmatrix = 1 1 0 1\n[experiment]\nkind = bunching\n", "system.matrix"),
        ("[system]\neps = x\n[experiment]\nkind = bunching\n", "system.eps"),
        ("[experiment]\nkind = holonomy\nside = q\n", "experiment.side"),
        ("[experiment]\nkind = holonomy\nfoo = 1\n", "experiment.foo"),
        ("[experiment]\nkind = gallery\nname = other\n", "experiment.name"),
        ("[experiment]\nkind = bunching\n[numeric]\nscale_min = 0.5\nscale_max = 0.1\n", "numeric.scale_min"),
        ("[experiment]\nkind = bunching\n[numeric]\nbogus = 1\n", "numeric.bogus"),
        ("[experiment]\nkind = bunching\n[extra]\na = 1\n", "extra"),
        ("[experiment]\nkind = bunching\n[output]\nplots = maybe\n", "output.plots"),
    ],
)
def test_config_errors_name_field(text, field):
    with pytest.raises(ConfigError) as exc:
        parse_config(text)
    assert exc.value.field == field


def test_config_defaults_and_overrides():
    cfg = parse_config("[experiment]\nkind = conjugacy\n", overrides={"seed": 9, "out": "x", "plots": True})
    assert cfg.system.kind == "skew_product" and cfg.numeric["grid"] == 32
    assert cfg.numeric["seed"] == 9 and cfg.out_dir == "x" and cfg.plots
    assert parse_config("", "leafexp").system.kind == "quotient_cat"
    with pytest.raises(ConfigError):
        parse_config("[experiment]\nkind = section\n", "holonomy")
    a = parse_config("[experiment]\nkind = section\n")
    b = parse_config("[experiment]\nkind = section\n\n")
    assert a.config_hash != b.config_hash


def test_gallery_leaf_family():
    c = np.array([0.0, 0.1, 0.5, 0.9, 1.3])
    assert np.allclose(leaf_height(0.0, c), c)
    assert np.allclose(leaf_height(1.0, c[:4]), omega(c[:4]))
    z = np.linspace(0.01, 0.99, 25)
    for x in (0.0, 0.4, 1.0):
        assert np.allclose(leaf_height(x, leaf_label(x, z)), z, atol=1e-12)
    assert np.allclose(slice_holonomy(z), omega(z), atol=1e-12)


def test_gallery_vertical_is_translation():
    y = np.linspace(0.0, 0.4, 9)
    img = slanted_image(y, 0.0)
    assert np.allclose(img[:, 0], 0) and np.allclose(img[:, 1], y + 0.5, atol=1e-12)


def test_gallery_intersection_is_identity():
    z = np.linspace(0.0, 0.9, 10)
    assert np.max(np.abs(intersection_holonomy(0.7, z) - z)) < 1e-12


def test_gallery_verdicts():
    sl = run_gallery("slanted-conjugacy")
    assert sl["vertical"][1].theta_hat >= 0.99
    assert sl["slanted"][1].finest_slope < 0.2 and sl["slanted"][1].non_holder
    gb = run_gallery("good-bad-intersection")
    assert gb["intersection"][1].theta_hat >= 0.99 and not gb["intersection"][1].non_holder
    assert gb["slice"][1].non_holder
    with pytest.raises(DomainError):
        run_gallery("nope")


def test_run_experiment_api(tmp_path):
    cfg = parse_config("[experiment]\nkind = leafexp\n")
    paths, s = run_experiment(cfg, str(tmp_path))
    assert s["max_distance"] < 0.05 and s["control_max"] > 0.25
    assert all(os.path.exists(p) for p in paths)
