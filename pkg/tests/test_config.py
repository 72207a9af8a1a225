from __future__ import annotations

import numpy as np
import pytest

from metatherm.config import (
    RunConfig,
    config_hash,
    materialize_grid,
    parse_config,
    parse_gridspec,
    serialize_config,
)
from metatherm.errors import ParseError, ValidationError


def write_cfg(tmp_path, text, name="run.cfg"):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return str(p)


MINIMAL_META = "family.kind = tfim\nfamily.n = 2\ngrid.train = uniform(-2, 2, 10)\n"


# ------------------------------------------------------------------ grid specs

def test_gridspec_uniform():
    (ax,) = parse_gridspec("uniform(-2, 2, 5)")
    assert (ax.kind, ax.lo, ax.hi, ax.count) == ("uniform", -2.0, 2.0, 5)


def test_gridspec_list_and_product():
    axes = parse_gridspec("list(0.5, 1.0) x uniform(0, 1, 3)")
    assert axes[0].values == (0.5, 1.0)
    assert axes[1].count == 3


@pytest.mark.parametrize("text", [
    "grid(1, 2, 3)",
    "uniform(1, 2)",
    "uniform(a, 2, 3)",
    "uniform(1, 2, 0)",
    "random(2, 2, 5)",
    "random(3, 1, 5)",
    "list()",
    "list(1, x)",
    "uniform(1, 2, 3",
])
def test_gridspec_rejects_malformed(text):
    with pytest.raises(ParseError):
        parse_gridspec(text)


def test_materialize_uniform_shape_and_values():
    pts = materialize_grid("uniform(0, 1, 5)", 1, 0, "train")
    assert pts.shape == (5, 1)
    assert np.allclose(pts[:, 0], np.linspace(0, 1, 5))


def test_materialize_product_grid_row_order():
    pts = materialize_grid("list(0, 1) x uniform(0, 10, 3)", 2, 0, "train")
    want = [[0, 0], [0, 5], [0, 10], [1, 0], [1, 5], [1, 10]]
    assert np.allclose(pts, want)


def test_materialize_random_is_label_scoped():
    a = materialize_grid("random(-1, 1, 6)", 1, 3, "train")
    b = materialize_grid("random(-1, 1, 6)", 1, 3, "train")
    c = materialize_grid("random(-1, 1, 6)", 1, 3, "test")
    d = materialize_grid("random(-1, 1, 6)", 1, 4, "train")
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)
    assert not np.array_equal(a, d)
    assert a.min() >= -1 and a.max() <= 1


def test_materialize_axis_count_mismatch():
    with pytest.raises(ValidationError):
        materialize_grid("uniform(0, 1, 5)", 2, 0, "train")


# ------------------------------------------------------------------- defaults

def test_train_meta_defaults(tmp_path, monkeypatch):
    monkeypatch.delenv("METATHERM_OUT", raising=False)
    cfg = parse_config(write_cfg(tmp_path, MINIMAL_META), command="train-meta")
    assert cfg.command == "train-meta"
    assert cfg.family_kind == "tfim" and cfg.family_n == 2 and cfg.family_j == 1.0
    assert cfg.beta == 1.0 and cfg.seed == 0
    assert cfg.epochs == 500 and cfg.lr == 0.01 and cfg.grad_step == 1e-4
    assert cfg.l_enc == 2 and cfg.l_hva == 2
    assert cfg.out == "runs"


def test_train_nn_meta_defaults(tmp_path):
    text = "family.kind = heisenberg\ngrid.train = random(-2, 2, 4) x random(-2, 2, 4)\n"
    cfg = parse_config(write_cfg(tmp_path, text), command="train-nn-meta")
    assert cfg.lr == 0.001
    assert cfg.l_su2 == 4 and cfg.l_hva == 0
    assert cfg.hidden == (16, 16, 16)
    assert cfg.family_n == 2


def test_qbm_defaults(tmp_path):
    text = "checkpoint = ck.json\nqbm.target = 0.62, 0.17, 0.17, 0.04\n"
    cfg = parse_config(write_cfg(tmp_path, text), command="qbm")
    assert cfg.epochs == 200 and cfg.lr == 0.1 and cfg.grad_step == 1e-3
    assert cfg.qbm_target == (0.62, 0.17, 0.17, 0.04)


def test_out_env_default(tmp_path, monkeypatch):
    monkeypatch.setenv("METATHERM_OUT", "/data/results")
    cfg = parse_config(write_cfg(tmp_path, MINIMAL_META), command="train-meta")
    assert cfg.out == "/data/results"
    cfg = parse_config(
        write_cfg(tmp_path, MINIMAL_META + "out = elsewhere\n"), command="train-meta"
    )
    assert cfg.out == "elsewhere"


# ------------------------------------------------------------------ validation

def test_all_problems_reported_together(tmp_path):
    text = (
        "family.kindd = tfim\n"      # unknown key
        "checkpoint = ck.json\n"     # foreign to train-meta
        "epochs = soon\n"            # bad value
    )
    with pytest.raises(ValidationError) as err:
        parse_config(write_cfg(tmp_path, text), command="train-meta")
    problems = err.value.problems
    assert len(problems) == 5  # plus the two missing required keys
    assert any("unknown key" in p for p in problems)
    assert any("not used by" in p for p in problems)
    assert any("epochs" in p and "bad value" in p for p in problems)
    assert any("requires key" in p for p in problems)


def test_range_problems_collected(tmp_path):
    text = MINIMAL_META + "epochs = -1\nlr = 0.0\nbeta = -2\n"
    with pytest.raises(ValidationError) as err:
        parse_config(write_cfg(tmp_path, text), command="train-meta")
    assert len(err.value.problems) == 3


def test_family_size_cap(tmp_path):
    text = "family.kind = tfim\nfamily.n = 9\ngrid.train = uniform(0, 1, 3)\n"
    with pytest.raises(ValidationError, match="8 system qubits"):
        parse_config(write_cfg(tmp_path, text), command="train-meta")


def test_family_n_required_for_tfim(tmp_path):
    text = "family.kind = tfim\ngrid.train = uniform(0, 1, 3)\n"
    with pytest.raises(ValidationError, match="family.n is required"):
        parse_config(write_cfg(tmp_path, text), command="train-meta")


def test_heisenberg_forces_two_qubits(tmp_path):
    text = "family.kind = heisenberg\ngrid.train = list(1) x list(1)\n"
    cfg = parse_config(write_cfg(tmp_path, text), command="train-meta")
    assert cfg.family_n == 2
    bad = "family.kind = heisenberg\nfamily.n = 3\ngrid.train = list(1) x list(1)\n"
    with pytest.raises(ValidationError, match="must be 2"):
        parse_config(write_cfg(tmp_path, bad), command="train-meta")


def test_grid_axes_must_match_family(tmp_path):
    bad = "family.kind = tfim\nfamily.n = 2\ngrid.train = list(1) x list(1)\n"
    with pytest.raises(ValidationError, match="wants 1 axes"):
        parse_config(write_cfg(tmp_path, bad), command="train-meta")
    bad = "family.kind = heisenberg\ngrid.train = uniform(0, 1, 4)\n"
    with pytest.raises(ValidationError, match="wants 2 axes"):
        parse_config(write_cfg(tmp_path, bad), command="train-nn-meta")


def test_phase_scan_rejects_heisenberg(tmp_path):
    text = "family.kind = heisenberg\ngrid.h = uniform(0, 1, 3) x uniform(0, 1, 3)\n"
    with pytest.raises(ValidationError, match="single field"):
        parse_config(write_cfg(tmp_path, text), command="phase-scan")


def test_command_conflict(tmp_path):
    text = "command = oracle\n" + MINIMAL_META.replace("grid.train", "grid.h")
    with pytest.raises(ValidationError, match="invoked as"):
        parse_config(write_cfg(tmp_path, text), command="eval")


def test_command_from_file(tmp_path):
    text = "command = oracle\nfamily.kind = tfim\nfamily.n = 2\ngrid.h = list(1.0)\n"
    cfg = parse_config(write_cfg(tmp_path, text))
    assert cfg.command == "oracle"


def test_no_command(tmp_path):
    with pytest.raises(ValidationError, match="no command"):
        parse_config(write_cfg(tmp_path, MINIMAL_META))


def test_unknown_command(tmp_path):
    with pytest.raises(ValidationError, match="unknown command"):
        parse_config(write_cfg(tmp_path, MINIMAL_META), command="train-everything")


def test_file_syntax_error(tmp_path):
    path = write_cfg(tmp_path, "family.kind tfim\n")
    with pytest.raises(ParseError, match=":1:"):
        parse_config(path, command="train-meta")


def test_override_syntax_error():
    with pytest.raises(ParseError, match="KEY=VALUE"):
        parse_config(None, overrides=("epochs",), command="train-meta")


def test_overrides_replace_file_values(tmp_path):
    path = write_cfg(tmp_path, MINIMAL_META + "epochs = 100\n")
    cfg = parse_config(path, overrides=("epochs=7",), command="train-meta")
    assert cfg.epochs == 7


def test_missing_file():
    with pytest.raises(ParseError, match="cannot read"):
        parse_config("/nonexistent/run.cfg", command="train-meta")


def test_comments_and_blank_lines(tmp_path):
    text = "# a comment\n\n" + MINIMAL_META + "   # indented comment\n"
    cfg = parse_config(write_cfg(tmp_path, text), command="train-meta")
    assert cfg.family_kind == "tfim"


# --------------------------------------------------------------- serialization

def test_serialize_parse_round_trip(tmp_path):
    cfg = parse_config(write_cfg(tmp_path, MINIMAL_META), command="train-meta")
    text = serialize_config(cfg)
    back = parse_config(write_cfg(tmp_path, text, "round.cfg"))
    assert back == cfg


def test_serialize_round_trip_nn(tmp_path):
    text = (
        "family.kind = heisenberg\n"
        "grid.train = random(-2, 2, 10) x random(-2, 2, 10)\n"
        "mlp.hidden = 8, 8\n"
        "epochs = 123\n"
    )
    cfg = parse_config(write_cfg(tmp_path, text), command="train-nn-meta")
    back = parse_config(write_cfg(tmp_path, serialize_config(cfg), "round.cfg"))
    assert back == cfg
    assert back.hidden == (8, 8)


def test_config_hash_is_stable_and_sensitive(tmp_path):
    a = parse_config(write_cfg(tmp_path, MINIMAL_META), command="train-meta")
    b = parse_config(write_cfg(tmp_path, MINIMAL_META, "b.cfg"), command="train-meta")
    assert config_hash(a) == config_hash(b)
    assert len(config_hash(a)) == 64
    c = parse_config(
        write_cfg(tmp_path, MINIMAL_META, "c.cfg"),
        overrides=("epochs=501",),
        command="train-meta",
    )
    assert config_hash(c) != config_hash(a)


def test_family_builder_dispatch():
    cfg = RunConfig(command="oracle", family_kind="kitaev", family_n=3, family_j=1.0)
    fam = cfg.family()
    assert fam.param_dim == 1
