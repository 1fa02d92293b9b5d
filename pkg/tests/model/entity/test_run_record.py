"""
Test: model/entity/run_record.py
--------------------------------
Validated ledger columns.
"""

import pytest

from model.entity.run_record import RunRecord

HASH = "0f" * 32


def _record(**changes):
    fields = dict(
        command="solve",
        input_hash=HASH,
        config={"tol": 1e-9, "grid": 16},
        payload={"exit_code": 0},
        exit_code=0,
        wall_time=0.25,
    )
    fields.update(changes)
    return RunRecord(**fields)


def test_create_record():
    record = _record()
    assert record.command == "solve"
    assert record.config == {"grid": 16, "tol": 1e-9}
    assert record.payload == {"exit_code": 0}
    assert record.created_at is not None


@pytest.mark.parametrize(
    "field, value",
    [
        ("command", "Solve!"),
        ("input_hash", "not-a-hash"),
        ("config", ["tol"]),
        ("payload", "text"),
        ("exit_code", 7),
        ("wall_time", -1.0),
    ],
)
def test_invalid_fields(field, value):
    with pytest.raises(ValueError):
        _record(**{field: value})


def test_setters_validate_after_creation():
    record = _record()
    record.exit_code = 4
    assert record.exit_code == 4
    with pytest.raises(ValueError, match="Invalid exit code"):
        record.exit_code = -1


if __name__ == "__main__":
    pytest.main([__file__])
