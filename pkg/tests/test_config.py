import json

import jsonschema
import numpy as np
import pytest

from analog_qc import config as cf
from analog_qc import quantum_math as qm
from analog_qc.errors import ConfigError
from analog_qc.signal_engine import NoiseModel


def test_defaults_round_trip():
    cfg = cf.ExperimentConfig()
    assert cf.ExperimentConfig.from_dict(json.loads(cfg.dumps())) == cfg


def test_full_round_trip(tmp_path):
    cfg = cf.ExperimentConfig(
        seed=2**64 - 1,
        noise=NoiseModel(awgn_sigma=0.3, gate_amplitude_error_sigma=0.01),
        noise_preset=None,
        shots=17,
        iterations=3,
        gate=[[0, 1], [1, 0]],
        state="bell",
        exact=True,
        base_frequency_hz=250.0,
    )
    path = tmp_path / "c.json"
    path.write_text(cfg.dumps())
    back = cf.ExperimentConfig.load(path)
    assert back == cfg
    np.testing.assert_array_equal(back.gate_matrix, qm.X)


def test_preset_is_expanded():
    cfg = cf.ExperimentConfig.from_dict({"noise": "calibrated"})
    assert cfg.noise_preset == "calibrated"
    assert cfg.noise == cf.load_preset("calibrated")
    assert cfg.to_dict()["noise"]["awgn_sigma"] > 0


def test_noise_from_file(tmp_path):
    path = tmp_path / "n.json"
    path.write_text(json.dumps({"awgn_sigma": 0.2}))
    noise, name = cf.resolve_noise(str(path))
    assert noise.awgn_sigma == 0.2 and name is None


@pytest.mark.parametrize(
    "data",
    [
        {"seed": -1},
        {"seed": 2**64},
        {"seed": 1.5},
        {"shots": 0},
        {"shots": True},
        {"iterations": 1001},
        {"gate": "Q"},
        {"gate": [[1, 1], [0, 1]]},
        {"state": "ghz"},
        {"noise": "nonexistent-preset"},
        {"noise": {"awgn_sigma": -1}},
        {"noise_preset": "loud"},
        {"bogus": 1},
        {"base_frequency_hz": 0},
        {"exact": "yes"},
    ],
)
def test_invalid_configs(data):
    with pytest.raises(ConfigError):
        cf.ExperimentConfig.from_dict(data)


def test_load_reports_json_line(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{\n "seed": 1,\n "shots": ,\n}\n')
    with pytest.raises(ConfigError, match=":3:"):
        cf.ExperimentConfig.load(path)


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        cf.ExperimentConfig.load(tmp_path / "none.json")


@pytest.mark.parametrize(
    "spec, expected",
    [
        ("h", qm.H),
        ([[[0, 0], [1, 0]], [[1, 0], [0, 0]]], qm.X),
        ({"re": [[0, 0], [0, 0]], "im": [[0, -1], [1, 0]]}, qm.Y),
    ],
)
def test_gate_literals(spec, expected):
    np.testing.assert_allclose(cf.parse_gate(spec), expected)


def test_overrides():
    cfg = cf.ExperimentConfig().with_overrides(seed=5, shots=None, noise="calibrated")
    assert cfg.seed == 5 and cfg.shots == 2000 and cfg.noise_preset == "calibrated"


@pytest.mark.parametrize("name", cf.SCHEMAS)
def test_schemas_are_valid(name):
    jsonschema.Draft202012Validator.check_schema(cf.load_schema(name))


def test_unknown_schema():
    with pytest.raises(KeyError):
        cf.load_schema("nope")


def test_config_and_presets_validate():
    v = jsonschema.Draft202012Validator(cf.load_schema("experiment_config"))
    v.validate(cf.ExperimentConfig.from_dict({"noise": "calibrated"}).to_dict())
    for name in cf.PRESETS:
        jsonschema.validate(cf.load_preset(name).to_dict(), cf.load_schema("noise_model"))
