"""
model/da/config.py
------------------
Handles run configuration and run-ledger database setup.

Settings are layered: built-in defaults, then an optional YAML file, then
the CONTRIBNET_TOL environment variable. CLI flags are applied on top by
the caller through Settings.replace().

Exports:
- Settings            : Frozen configuration record.
- load_settings()     : Build Settings from defaults, YAML and environment.
- initialize_database(): Create the ledger engine and tables, bind Session.
- Session             : SQLAlchemy sessionmaker bound by initialize_database.
"""

import dataclasses
import os
from dataclasses import dataclass
from typing import Any, Dict, Optional

import yaml
from sqlalchemy import create_engine
from sqlalchemy.engine import Engine
from sqlalchemy.exc import SQLAlchemyError
from sqlalchemy.orm import Session as SessionType
from sqlalchemy.orm import sessionmaker

from model.entity.base import Base
from model.tools.errors import ParseError
from model.tools.logger import Logger
from model.tools.validators import positive_validator, resolution_validator

CONFIG_ENV = "CONTRIBNET_CONFIG"
TOL_ENV = "CONTRIBNET_TOL"
DEFAULT_CONFIG_FILE = "contribnet.yaml"
DEFAULT_DB_URL = "sqlite:///contribnet.db"


@dataclass(frozen=True)
class Settings:
    tol: float = 1e-9
    grid: int = 16
    grid_cap: int = 2_000_000
    pair_cap: int = 250_000
    bisection_tol: float = 1e-10
    max_rounds: int = 100_000
    seed: int = 0
    db_url: Optional[str] = None
    log_dir: str = "log"
    log_level: str = "INFO"

    def __post_init__(self) -> None:
        positive_validator(self.tol, "tol must be > 0")
        positive_validator(self.bisection_tol, "bisection_tol must be > 0")
        resolution_validator(self.grid, "grid must be a positive integer")
        resolution_validator(self.grid_cap, "grid_cap must be a positive integer")
        resolution_validator(self.pair_cap, "pair_cap must be a positive integer")
        resolution_validator(self.max_rounds, "max_rounds must be a positive integer")

    def replace(self, **changes: Any) -> "Settings":
        """Copy with the non-None entries of ``changes`` applied."""
        return dataclasses.replace(self, **{k: v for k, v in changes.items() if v is not None})

    def public(self) -> Dict[str, Any]:
        """The settings that influence results (recorded in run reports)."""
        return {"tol": self.tol, "grid": self.grid, "seed": self.seed}


def load_settings(path: Optional[str] = None) -> Settings:
    """
    Build Settings from defaults, then YAML, then the environment.

    Args:
        path (str): YAML file; falls back to $CONTRIBNET_CONFIG, then
                    ./contribnet.yaml when it exists.

    Returns:
        Settings: The merged configuration.
    """
    settings = Settings()
    path = path or os.environ.get(CONFIG_ENV)
    if path is None and os.path.exists(DEFAULT_CONFIG_FILE):
        path = DEFAULT_CONFIG_FILE
    if path:
        with open(path, "r", encoding="utf-8") as handle:
            data = yaml.safe_load(handle) or {}
        if not isinstance(data, dict):
            raise ParseError(path, "configuration must be a mapping")
        known = {f.name for f in dataclasses.fields(Settings)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ParseError(path, f"unknown configuration keys {unknown}")
        try:
            settings = settings.replace(**data)
        except ValueError as e:
            raise ParseError(path, str(e)) from e
    env_tol = os.environ.get(TOL_ENV)
    if env_tol:
        try:
            settings = settings.replace(tol=float(env_tol))
        except ValueError as e:
            raise ParseError(TOL_ENV, f"invalid tolerance {env_tol!r}") from e
    return settings


engine: Optional[Engine] = None
Session: sessionmaker = sessionmaker()


def initialize_database(url: str = DEFAULT_DB_URL) -> Engine:
    """
    Create the ledger engine and its tables, and bind Session to it.
    Calling again with the current URL keeps the existing engine.

    Args:
        url (str): SQLAlchemy database URL.

    Returns:
        Engine: SQLAlchemy engine connected to the ledger.
    """
    global engine
    if engine is not None and engine.url.render_as_string(hide_password=False) == url:
        return engine
    try:
        engine = create_engine(url, echo=False)
        Base.metadata.create_all(engine)
        Session.configure(bind=engine)
        Logger.info(f"Run ledger ready at {url}.")
        return engine
    except SQLAlchemyError as e:
        Logger.error(f"Run ledger initialization failed: {e}")
        raise


def open_session() -> SessionType:
    if engine is None:
        initialize_database()
    return Session()
