"""
model/da/run_queries.py
-------------------
Ledger queries over persisted runs.

Functions:
- find_runs_by_command
- find_runs_by_input
- count_runs_by_exit_code
"""

from typing import Dict, List

from sqlalchemy import func
from sqlalchemy.orm.session import Session

from model.entity.run_record import RunRecord


def find_runs_by_command(session: Session, command: str) -> List[RunRecord]:
    """
    Retrieve runs of one command, oldest first.

    Args:
        session: SQLAlchemy session object.
        command: CLI command name.

    Returns:
        List of RunRecord ORM objects.
    """
    return (
        session.query(RunRecord)
        .filter(RunRecord._command == command)
        .order_by(RunRecord._id)
        .all()
    )


def find_runs_by_input(session: Session, input_hash: str) -> List[RunRecord]:
    """Retrieve runs whose primary input has the given hash."""
    return (
        session.query(RunRecord)
        .filter(RunRecord._input_hash == input_hash)
        .order_by(RunRecord._id)
        .all()
    )


def count_runs_by_exit_code(session: Session) -> Dict[int, int]:
    """Map exit code -> number of runs."""
    rows = (
        session.query(RunRecord._exit_code, func.count(RunRecord._id))
        .group_by(RunRecord._exit_code)
        .all()
    )
    return {code: count for code, count in rows}
