"""
Test: model/da/config.py
------------------------
Settings layering: defaults, YAML file, environment, then replace().
"""

import pytest
import yaml

from model.da.config import Settings, load_settings
from model.tools.errors import ParseError


def test_defaults(monkeypatch, tmp_path):
    monkeypatch.chdir(tmp_path)
    settings = load_settings()
    assert settings.tol == 1e-9
    assert settings.grid == 16
    assert settings.db_url is None
    assert settings.public() == {"tol": 1e-9, "grid": 16, "seed": 0}


def test_yaml_file(tmp_path):
    path = tmp_path / "run.yaml"
    path.write_text(yaml.safe_dump({"grid": 8, "seed": 3, "max_rounds": 500}), encoding="utf-8")
    settings = load_settings(str(path))
    assert (settings.grid, settings.seed, settings.max_rounds) == (8, 3, 500)


def test_config_from_environment_path(tmp_path, monkeypatch):
    path = tmp_path / "env.yaml"
    path.write_text("grid: 4\n", encoding="utf-8")
    monkeypatch.setenv("CONTRIBNET_CONFIG", str(path))
    assert load_settings().grid == 4


def test_tolerance_override(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    monkeypatch.setenv("CONTRIBNET_TOL", "1e-6")
    assert load_settings().tol == 1e-6
    monkeypatch.setenv("CONTRIBNET_TOL", "tight")
    with pytest.raises(ParseError, match="CONTRIBNET_TOL"):
        load_settings()


@pytest.mark.parametrize(
    "content, message",
    [
        ("- 1\n- 2\n", "mapping"),
        ("colour: red\n", "unknown configuration keys"),
        ("grid: 0\n", "grid must be a positive integer"),
    ],
)
def test_bad_files(tmp_path, content, message):
    path = tmp_path / "bad.yaml"
    path.write_text(content, encoding="utf-8")
    with pytest.raises(ParseError, match=message):
        load_settings(str(path))


def test_replace_skips_none():
    settings = Settings().replace(tol=None, grid=4, db_url=None)
    assert settings.tol == 1e-9
    assert settings.grid == 4
    with pytest.raises(ValueError):
        Settings(tol=0)


if __name__ == "__main__":
    pytest.main([__file__])
