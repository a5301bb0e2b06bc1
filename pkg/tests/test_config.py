import pytest

from mprk.solver.config import (
    NUMERICS, SCENARIO_PRESETS, ConfigError, deep_merge, output_directory,
    parse_overrides, read_config_file, resolve_config,
)


def test_presets_resolve_with_defaults():
    for name in SCENARIO_PRESETS:
        cfg = resolve_config(name)
        assert cfg["scenario"] == name
        assert cfg["threads"] == 1
        assert cfg["output"]["cadence"] == 1
        assert cfg["domain"]["buffer_layers"] == NUMERICS["buffer_layers"]


def test_unknown_preset():
    with pytest.raises(ConfigError, match="unknown preset"):
        resolve_config("hurricane")


def test_missing_scenario():
    with pytest.raises(ConfigError, match="scenario"):
        resolve_config()


def test_overrides_nest_and_coerce():
    overrides = parse_overrides(["--t-end=0", "--domain.buffer-layers=3", "--m=4",
                                 "--scheme=rk2", "--fluid.mu1=0.0001", "--check-buffer=true"])
    assert overrides == {
        "t_end": 0,
        "domain": {"buffer_layers": 3},
        "m": 4,
        "scheme": "rk2",
        "fluid": {"mu1": 0.0001},
        "check_buffer": True,
    }


def test_overrides_need_a_value():
    with pytest.raises(ConfigError):
        parse_overrides(["--threads"])


def test_override_precedence(tmp_path):
    path = tmp_path / "run.yaml"
    path.write_text("scenario: manufactured\nm: 2\ndt: 0.01\n")
    cfg = resolve_config(config_path=path, overrides={"m": 8})
    assert cfg["scenario"] == "manufactured"
    assert cfg["dt"] == 0.01
    assert cfg["m"] == 8


def test_yaml_errors_carry_position(tmp_path):
    path = tmp_path / "broken.yaml"
    path.write_text("scenario: khi2d\ndomain: [1, 2\n")
    with pytest.raises(ConfigError, match="line"):
        read_config_file(path)


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError, match="not found"):
        read_config_file(tmp_path / "absent.yaml")


@pytest.mark.parametrize("overrides, message", [
    ({"dt": -1.0}, "dt"),
    ({"m": 0}, "m"),
    ({"scheme": "rk3"}, "scheme"),
    ({"threads": 0}, "threads"),
    ({"fluid": {"gamma": 1.0}}, "gamma"),
    ({"domain": {"lateral_bc": "open"}}, "lateral_bc"),
    ({"perturbations": [{"domain": 1, "amplitude": 1.0, "radius": 0.0}]}, "radius"),
])
def test_invalid_fields(overrides, message):
    with pytest.raises(ConfigError, match=message):
        resolve_config("convection2d", overrides=overrides)


def test_threads_from_environment(monkeypatch):
    monkeypatch.setenv("MPRK_THREADS", "3")
    assert resolve_config("khi2d")["threads"] == 3
    assert resolve_config("khi2d", overrides={"threads": 2})["threads"] == 2


def test_threads_environment_must_be_an_integer(monkeypatch):
    monkeypatch.setenv("MPRK_THREADS", "many")
    with pytest.raises(ConfigError, match="MPRK_THREADS"):
        resolve_config("khi2d")


def test_output_directory_precedence(monkeypatch, tmp_path):
    monkeypatch.setenv("MPRK_OUTPUT_DIR", str(tmp_path / "env"))
    assert output_directory({}) == tmp_path / "env"
    explicit = {"output": {"directory": str(tmp_path / "cfg")}}
    assert output_directory(explicit) == tmp_path / "cfg"


def test_deep_merge_leaves_inputs_alone():
    base = {"a": {"b": 1, "c": 2}}
    merged = deep_merge(base, {"a": {"b": 5}})
    assert merged == {"a": {"b": 5, "c": 2}}
    assert base["a"]["b"] == 1
