"""
Shared fixtures: a throwaway run ledger and canonical games written to disk.
"""

import pytest

from controller.instances import canonical
from model.da.codec import save_game, save_profile
from model.da.config import Settings, initialize_database


@pytest.fixture(autouse=True)
def clean_environment(monkeypatch):
    """Keep the user's CONTRIBNET_* variables out of every test."""
    for name in ("CONTRIBNET_TOL", "CONTRIBNET_CONFIG"):
        monkeypatch.delenv(name, raising=False)


@pytest.fixture
def ledger_url(tmp_path):
    url = f"sqlite:///{tmp_path / 'runs.db'}"
    initialize_database(url)
    return url


@pytest.fixture
def ledger_settings(ledger_url):
    return Settings(db_url=ledger_url)


@pytest.fixture
def instance_files(tmp_path):
    """write(name, **params) -> (game path, start profile path or None)."""

    def write(name, **params):
        game, start = canonical(name, **params)
        game_path = tmp_path / f"{name}.json"
        game_path.write_bytes(save_game(game))
        profile_path = None
        if start is not None:
            profile_path = tmp_path / f"{name}.start.json"
            profile_path.write_bytes(save_profile(start))
        return str(game_path), str(profile_path) if profile_path else None

    return write
