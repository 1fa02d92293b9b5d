"""
Test: model/da/run_queries.py
-----------------------------
"""

import pytest

from model.da.base_access import DataAccess
from model.da.run_queries import count_runs_by_exit_code, find_runs_by_command, find_runs_by_input
from model.da.session import get_session
from model.entity.run_record import RunRecord

HASH = "c3" * 32


def _save(command, exit_code, input_hash=HASH):
    DataAccess(RunRecord).save(
        RunRecord(command, input_hash, {}, {"exit_code": exit_code}, exit_code, 0.0)
    )


def test_queries(ledger_url):
    _save("solve", 0)
    _save("solve", 2)
    _save("verify", 2, input_hash="d4" * 32)

    with get_session() as session:
        solves = find_runs_by_command(session, "solve")
        assert [r.exit_code for r in solves] == [0, 2]
        assert [r.command for r in find_runs_by_input(session, HASH)] == ["solve", "solve"]
        assert count_runs_by_exit_code(session) == {0: 1, 2: 2}


def test_unknown_command_is_empty(ledger_url):
    with get_session() as session:
        assert find_runs_by_command(session, "oracle") == []


if __name__ == "__main__":
    pytest.main([__file__])
