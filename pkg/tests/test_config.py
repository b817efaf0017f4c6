import pytest

from ahc.config import ConfigError, load_config, parse_config


def base(**experiment):
    return {"experiment": dict({"type": "sweep-h", "R": 4, "h_list": [1, 2]}, **experiment),
            "medium": {"kind": "random_checkerboard", "lambda": 1.0, "Lambda_cap": 4.0, "values": [1.0, 2.0]}}


def test_defaults_and_problem():
    cfg = parse_config(base(), env={})
    assert cfg.experiment.seeds == [0]
    P = cfg.problem()
    assert P.spacing == 0.1 and P.opts.max_iters == 20000
    assert P.medium.bounds == (1.0, 4.0)
    assert cfg.canonical()["medium"]["lambda"] == 1.0


def test_bounds_order_names_both_keys():
    data = base()
    data["medium"]["lambda"] = 5.0
    with pytest.raises(ConfigError) as err:
        parse_config(data, env={})
    assert "medium.lambda" in str(err.value) and "medium.Lambda_cap" in str(err.value)


def test_unknown_keys_rejected_with_path():
    data = base()
    data["solver"] = {"max_iter": 5}
    with pytest.raises(ConfigError, match="solver.max_iter"):
        parse_config(data, env={})
    with pytest.raises(ConfigError, match="experiment"):
        parse_config({"experiment": {"type": "nope"}}, env={})


def test_numeric_ranges():
    with pytest.raises(ConfigError, match="spacing"):
        parse_config(base(spacing=0), env={})
    with pytest.raises(ConfigError, match="seeds"):
        parse_config(base(seeds=[-1]), env={})


def test_seed_override():
    cfg = parse_config(base(seeds=[0, 1, 2]), env={"AHC_SEED_OVERRIDE": "7"})
    assert cfg.experiment.seeds == [7]
    with pytest.raises(ConfigError):
        parse_config(base(), env={"AHC_SEED_OVERRIDE": "x"})
    assert parse_config(base(seeds=[3]), env={"AHC_SEED_OVERRIDE": ""}).experiment.seeds == [3]


def test_load_yaml(tmp_path):
    p = tmp_path / "c.yaml"
    p.write_text("experiment:\n  type: oracle-1d\n")
    cfg = load_config(p, env={})
    assert cfg.experiment.h == 10.0 and cfg.experiment.e == [1.0]
    with pytest.raises(ConfigError, match="not found"):
        load_config(tmp_path / "missing.yaml")
    (tmp_path / "bad.yaml").write_text("experiment: [")
    with pytest.raises(ConfigError, match="YAML"):
        load_config(tmp_path / "bad.yaml")
    (tmp_path / "list.yaml").write_text("- 1\n")
    with pytest.raises(ConfigError, match="mapping"):
        load_config(tmp_path / "list.yaml")
