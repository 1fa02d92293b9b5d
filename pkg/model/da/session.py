"""
model/da/session.py
-------------------
Manages SQLAlchemy sessions using a context manager.
Provides automatic handling of commits and rollbacks.

Used by DataAccess and the ledger queries wherever transactional access
to the run ledger is required.
"""

from contextlib import contextmanager
from typing import Generator

from sqlalchemy.orm import Session as SessionType

from model.da.config import open_session


@contextmanager
def get_session() -> Generator[SessionType, None, None]:
    """
    Provide a transactional scope for a ledger session.

    Commits if the block succeeds, rolls back on exceptions,
    and closes the session in all cases.

    Usage:
    -------
    with get_session() as session:
        session.add(record)

    Yields:
        SessionType: An active SQLAlchemy session object.
    """
    session: SessionType = open_session()
    try:
        yield session
        session.commit()
    except Exception:
        session.rollback()
        raise
    finally:
        session.close()
