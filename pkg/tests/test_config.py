"""Config parsing: strictness, defaults, cross-field checks, round trips."""

import json

import pytest

from sparselab.config import EXPERIMENT_NAMES, ExperimentConfig, load_config, parse_config
from sparselab.errors import ConfigError


def test_minimal_config_fills_defaults():
    cfg = parse_config({"experiment": "square-sv", "N": 50})
    assert cfg.trials == 100
    assert cfg.seed == 0
    assert cfg.workers == 1
    assert cfg.format == "both"
    assert cfg.ensemble.distribution == "gaussian"
    assert cfg.params.compressibility_radius == 0.2
    assert cfg.eps_grid.points == 101


def test_unknown_keys_rejected_at_every_level():
    with pytest.raises(ConfigError):
        parse_config({"experiment": "square-sv", "N": 10, "bogus": 1})
    with pytest.raises(ConfigError):
        parse_config({"experiment": "square-sv", "N": 10, "ensemble": {"distribution": "gaussian", "x": 1}})
    with pytest.raises(ConfigError):
        parse_config({"experiment": "square-sv", "N": 10, "params": {"nope": 2}})
    with pytest.raises(ConfigError):
        parse_config({"experiment": "square-sv", "N": 10, "eps_grid": {"lo": 0, "hi": 1, "n": 5}})


def test_experiment_name_must_be_known():
    with pytest.raises(ConfigError):
        parse_config({"experiment": "not-an-experiment", "N": 10})
    assert len(EXPERIMENT_NAMES) == 11


@pytest.mark.parametrize(
    "data",
    [
        {"experiment": "rect-sv", "N": 10},                      # missing n
        {"experiment": "rect-sv", "N": 10, "n": 20},             # n > N
        {"experiment": "ric-prop1", "N": 16, "n": 8, "s": 2},    # missing delta
        {"experiment": "ric-exact", "N": 16, "n": 8},            # missing s
        {"experiment": "l1-recovery", "N": 64, "n": 32},         # missing s
        {"experiment": "l1-recovery", "N": 64, "n": 32, "s": 40},  # s > n
        {"experiment": "net-bounds", "N": 8},                    # missing eps
        {"experiment": "net-bounds", "N": 8, "s": 6, "eps": 0.5},  # s > N/2
        {"experiment": "hyperplane-dist", "N": 1},
        {"experiment": "square-sv", "N": 10, "s": 20},           # s > N
        {"experiment": "square-sv", "N": 0},
        {"experiment": "square-sv", "N": 10, "seed": -1},
        {"experiment": "square-sv", "N": 10, "seed": 1 << 64},
        {"experiment": "square-sv", "N": 10, "trials": 0},
        {"experiment": "square-sv", "N": 10, "workers": 0},
        {"experiment": "square-sv", "N": 10, "format": "xml"},
        {"experiment": "square-sv", "N": 10, "eps": 3.0},
        {"experiment": "square-sv", "N": 10, "eps_grid": {"lo": 1.0, "hi": 0.5}},
        {"experiment": "ric-prop1", "N": 16, "n": 8, "s": 2, "delta": 1.5},
        {"experiment": "square-sv", "N": 10, "ensemble": {"distribution": "cauchy"}},
        {"experiment": "square-sv", "N": 10, "params": {"compressibility_radius": 2.0}},
    ],
)
def test_invalid_configs_rejected(data):
    with pytest.raises(ConfigError):
        parse_config(data)


def test_all_experiments_have_a_valid_minimal_config():
    minimal = {
        "square-sv": {"N": 10},
        "rect-sv": {"N": 10, "n": 5},
        "tail-curve": {"N": 10},
        "ric-exact": {"N": 10, "n": 8, "s": 2},
        "ric-prop1": {"N": 10, "n": 8, "s": 2, "delta": 0.5},
        "sparse-min": {"N": 12},
        "hyperplane-dist": {"N": 10},
        "berry-esseen": {"N": 10},
        "net-bounds": {"N": 4, "eps": 0.5},
        "l1-recovery": {"N": 20, "n": 10, "s": 2},
        "decomposition": {"N": 20},
    }
    assert set(minimal) == set(EXPERIMENT_NAMES)
    for name, extra in minimal.items():
        cfg = parse_config({"experiment": name, **extra})
        assert cfg.experiment == name


def test_round_trip_is_identity():
    cfg = parse_config(
        {
            "experiment": "l1-recovery",
            "N": 128,
            "n": 64,
            "s": 4,
            "trials": 7,
            "seed": 99,
            "ensemble": {"distribution": "rademacher"},
            "params": {"sparsity_fraction": 0.05},
            "format": "csv",
        }
    )
    again = parse_config(cfg.to_json())
    assert again == cfg
    assert json.loads(again.to_json()) == json.loads(cfg.to_json())


def test_parse_config_accepts_json_text():
    cfg = parse_config('{"experiment": "square-sv", "N": 5}')
    assert cfg.N == 5
    with pytest.raises(ConfigError):
        parse_config('{"experiment": "square-sv"')  # truncated JSON


def test_load_config(tmp_path):
    p = tmp_path / "cfg.json"
    p.write_text('{"experiment": "square-sv", "N": 6, "trials": 2}')
    cfg = load_config(p)
    assert cfg.N == 6
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.json")


def test_grid_values():
    cfg = parse_config({"experiment": "tail-curve", "N": 10, "eps_grid": {"lo": 0.0, "hi": 1.0, "points": 11}})
    g = cfg.eps_grid.values()
    assert g.shape == (11,)
    assert g[0] == 0.0 and g[-1] == 1.0
