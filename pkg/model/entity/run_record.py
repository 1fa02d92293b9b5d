"""
model/entity/run_record.py
-------------
Defines the RunRecord entity class, mapped to the 'runs' table.

One row per CLI invocation persisted with --db. Columns are written
through validated properties, the same way every ledger field is checked
before it reaches the session.
"""

import json
from datetime import datetime, timezone
from typing import Any, Dict

from sqlalchemy import DateTime, Float, Integer, String, Text
from sqlalchemy.orm import Mapped, mapped_column

from model.entity.base import Base
from model.tools.validators import budget_validator, command_validator, digest_validator


class RunRecord(Base):
    """SQLAlchemy model for a persisted RunReport."""

    __tablename__ = "runs"

    _id: Mapped[int] = mapped_column("id", Integer, primary_key=True, autoincrement=True)
    _command: Mapped[str] = mapped_column("command", String(30))
    _input_hash: Mapped[str] = mapped_column("input_hash", String(64), index=True)
    _config_json: Mapped[str] = mapped_column("config", Text)
    _payload_json: Mapped[str] = mapped_column("payload", Text)
    _exit_code: Mapped[int] = mapped_column("exit_code", Integer)
    _wall_time: Mapped[float] = mapped_column("wall_time", Float)
    _created_at: Mapped[datetime] = mapped_column("created_at", DateTime)

    def __init__(
        self,
        command: str,
        input_hash: str,
        config: Dict[str, Any],
        payload: Dict[str, Any],
        exit_code: int,
        wall_time: float,
    ):
        self._id = None
        self.command = command
        self.input_hash = input_hash
        self.config = config
        self.payload = payload
        self.exit_code = exit_code
        self.wall_time = wall_time
        self._created_at = datetime.now(timezone.utc).replace(tzinfo=None)

    @property
    def id(self) -> int:
        return self._id

    @property
    def command(self) -> str:
        return self._command

    @command.setter
    def command(self, value: str) -> None:
        self._command = command_validator(value, "Invalid command name!")

    @property
    def input_hash(self) -> str:
        return self._input_hash

    @input_hash.setter
    def input_hash(self, value: str) -> None:
        self._input_hash = digest_validator(value, "Invalid input hash!")

    @property
    def config(self) -> Dict[str, Any]:
        return json.loads(self._config_json)

    @config.setter
    def config(self, value: Dict[str, Any]) -> None:
        if not isinstance(value, dict):
            raise ValueError("Invalid run config!")
        self._config_json = json.dumps(value, sort_keys=True)

    @property
    def payload(self) -> Dict[str, Any]:
        return json.loads(self._payload_json)

    @payload.setter
    def payload(self, value: Dict[str, Any]) -> None:
        if not isinstance(value, dict):
            raise ValueError("Invalid run payload!")
        self._payload_json = json.dumps(value, sort_keys=True)

    @property
    def exit_code(self) -> int:
        return self._exit_code

    @exit_code.setter
    def exit_code(self, value: int) -> None:
        if not isinstance(value, int) or not 0 <= value <= 4:
            raise ValueError("Invalid exit code!")
        self._exit_code = value

    @property
    def wall_time(self) -> float:
        return self._wall_time

    @wall_time.setter
    def wall_time(self, value: float) -> None:
        self._wall_time = budget_validator(value, "Invalid wall time!")

    @property
    def created_at(self) -> datetime:
        return self._created_at
