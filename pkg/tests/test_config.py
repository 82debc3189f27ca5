import json

import pytest

from onesided.core.error_handler import ConfigParseError, ConfigValidationError, ErrorHandler
from onesided.core.config_manager import (
    ConfigManager,
    RunConfig,
    parse_config,
    serialize_config,
    validate_config,
)
from onesided.core.keyrate import RateMode
from onesided.core.model import ChannelParams


def test_empty_text_gives_defaults():
    config = parse_config("")
    assert config == RunConfig()
    assert config.channel == ChannelParams()
    assert config.signal_by_eta_s == {1.0: 0.45, 0.95: 0.3, 0.9: 0.1, 0.85: 0.05}
    assert config.mc_trials == 10_000_000
    assert config.mc_seed == 20180116
    assert config.out == "keyrate.csv"


def test_default_grid_has_one_point_per_kilometre():
    grid = RunConfig().grid()
    assert len(grid.distances_km) == 201
    assert grid.distances_km[0] == 0.0 and grid.distances_km[-1] == 200.0
    assert grid.eta_s_values == (1.0, 0.95, 0.9, 0.85)


def test_comments_and_whitespace():
    config = parse_config("""
# reference setup with a noisier detector
p_d = 1e-5   # per gate
  mode=two-decoy
eta_s_list = 1.0, 0.9
mu_signal = 0.4, 0.2
""")
    assert config.p_d == 1e-5
    assert config.mode is RateMode.TWO_DECOY
    assert config.signal_by_eta_s == {1.0: 0.4, 0.9: 0.2}


def test_out_of_range_probability_names_the_key():
    with pytest.raises(ConfigValidationError) as excinfo:
        parse_config("eta_d = 1.5\n")
    assert excinfo.value.key == "eta_d"


def test_round_trip():
    config = validate_config({
        "eta_d": 0.35, "e_d": 0.02, "p_d": 1e-7, "f": 1.1, "alpha": 0.16,
        "mu_signal": [0.5, 0.25], "mu_decoy": 0.02, "eta_s_list": [1.0, 0.9],
        "mode": "two-decoy", "l_min": 10.0, "l_max": 90.0, "l_step": 0.5,
        "mc_trials": 123_456, "mc_seed": 7, "out": "curves/run.csv",
    })
    assert parse_config(serialize_config(config)) == config
    assert parse_config(serialize_config(RunConfig())) == RunConfig()


def test_malformed_line_reports_its_number():
    with pytest.raises(ConfigParseError) as excinfo:
        parse_config("eta_d = 0.4\n\n# comment\nthis line has no separator\n")
    assert excinfo.value.line_number == 4


def test_duplicate_and_empty_keys():
    with pytest.raises(ConfigParseError) as excinfo:
        parse_config("e_d = 0.01\ne_d = 0.02\n")
    assert excinfo.value.line_number == 2
    with pytest.raises(ConfigParseError):
        parse_config(" = 0.02\n")


def test_unknown_key():
    with pytest.raises(ConfigValidationError) as excinfo:
        parse_config("eta_x = 0.4\n")
    assert excinfo.value.key == "eta_x"
    with pytest.raises(ConfigValidationError):
        validate_config({"colour": "blue"})


def test_single_signal_intensity_is_broadcast():
    config = parse_config("mu_signal = 0.3\n")
    assert config.mu_signal == (0.3, 0.3, 0.3, 0.3)


@pytest.mark.parametrize("text, key", [
    ("mu_signal = 0.3, 0.2\n", "mu_signal"),
    ("mu_signal = 0.3, , 0.2, 0.1\n", "mu_signal"),
    ("mu_signal = 0.0\n", "mu_signal"),
    ("eta_s_list = 1.0, 1.0, 0.9, 0.8\n", "eta_s_list"),
    ("eta_s_list = 1.2, 0.9, 0.8, 0.7\n", "eta_s_list"),
    ("f = 0.9\n", "f"),
    ("alpha = 0\n", "alpha"),
    ("mu_decoy = -0.01\n", "mu_decoy"),
    ("mode = fast\n", "mode"),
    ("l_min = -5\n", "l_min"),
    ("l_min = 100\nl_max = 50\n", "l_max"),
    ("l_step = 0\n", "l_step"),
    ("mc_trials = 1.5\n", "mc_trials"),
    ("mc_trials = 0\n", "mc_trials"),
    ("mc_seed = -1\n", "mc_seed"),
    ("e_d = lots\n", "e_d"),
    ("p_d = nan\n", "p_d"),
    ("out = \n", "out"),
    ("mode = two-decoy\nmu_decoy = 0.1\n", "mu_signal"),
])
def test_invalid_values_name_their_key(text, key):
    with pytest.raises(ConfigValidationError) as excinfo:
        parse_config(text)
    assert excinfo.value.key == key


def test_integer_keys_accept_scientific_notation():
    assert parse_config("mc_trials = 1e6\n").mc_trials == 1_000_000


@pytest.mark.parametrize("config_type", ["conf", "yaml", "json"])
def test_default_config_files_load_back(tmp_path, config_type):
    manager = ConfigManager(ErrorHandler())
    path = manager.create_default_config(tmp_path, config_type)
    assert path.exists()
    assert path.name == f"onesided.{config_type}"
    assert manager.load_config_file(path) == RunConfig()


def test_yaml_and_json_accept_overrides(tmp_path):
    manager = ConfigManager()
    yaml_file = tmp_path / "run.yaml"
    yaml_file.write_text("e_d: 0.02\nmu_signal: [0.4, 0.3, 0.2, 0.1]\nmode: two-decoy\n")
    config = manager.load_config_file(yaml_file)
    assert config.e_d == 0.02
    assert config.mu_signal == (0.4, 0.3, 0.2, 0.1)
    assert config.mode is RateMode.TWO_DECOY

    json_file = tmp_path / "run.json"
    json_file.write_text(json.dumps({"mc_trials": 200000, "mc_seed": 3}))
    config = manager.load_config_file(json_file)
    assert (config.mc_trials, config.mc_seed) == (200_000, 3)


def test_malformed_structured_files(tmp_path):
    manager = ConfigManager()
    bad_yaml = tmp_path / "bad.yaml"
    bad_yaml.write_text("e_d: 0.02\nmu_signal: [0.4, 0.3\n")
    with pytest.raises(ConfigParseError):
        manager.load_config_file(bad_yaml)

    bad_json = tmp_path / "bad.json"
    bad_json.write_text('{\n  "e_d": 0.02,\n  "p_d": \n}\n')
    with pytest.raises(ConfigParseError) as excinfo:
        manager.load_config_file(bad_json)
    assert excinfo.value.line_number == 4

    listed = tmp_path / "list.yaml"
    listed.write_text("- e_d\n- p_d\n")
    with pytest.raises(ConfigParseError):
        manager.load_config_file(listed)


def test_undecodable_file_is_a_parse_error(tmp_path):
    latin = tmp_path / "latin.conf"
    latin.write_bytes(b"e_d = 0.02\n# caf\xe9\n")
    with pytest.raises(ConfigParseError) as excinfo:
        ConfigManager().load_config_file(latin)
    assert excinfo.value.line_number == 2
    assert "0xe9" in str(excinfo.value)


def test_load_errors_are_recorded(tmp_path):
    handler = ErrorHandler()
    manager = ConfigManager(handler)
    with pytest.raises(OSError):
        manager.load_config_file(tmp_path / "missing.conf")
    with pytest.raises(ConfigValidationError):
        (tmp_path / "bad.conf").write_text("eta_d = 2\n")
        manager.load_config_file(tmp_path / "bad.conf")
    assert handler.get_error_summary()["total_errors"] == 2


def test_unknown_config_type(tmp_path):
    with pytest.raises(ValueError):
        ConfigManager().create_default_config(tmp_path, "toml")
