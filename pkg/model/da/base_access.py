"""
model/da/base_access.py
-----------------------
Generic access to one mapped entity of the run ledger.

The ledger is append-only: records are saved once and read back detached,
so callers can use them after the session closes.
"""

from typing import Generic, List, Type, TypeVar

from sqlalchemy import inspect

from model.da.session import get_session

T = TypeVar("T")  # SQLAlchemy entity type


class DataAccess(Generic[T]):
    """
    Generic Data Access Object (DAO).

    Attributes:
        class_name (Type[T]): SQLAlchemy model class to operate on.
    """

    def __init__(self, class_name: Type[T]) -> None:
        self.class_name: Type[T] = class_name

    def save(self, entity: T) -> T:
        """
        Append a new entity and return it detached, with its id assigned.
        """
        with get_session() as session:
            session.add(entity)
            session.commit()
            session.refresh(entity)
            session.expunge(entity)
            return entity

    def find_all(self) -> List[T]:
        """All records in insertion (primary key) order."""
        key = inspect(self.class_name).primary_key
        with get_session() as session:
            entities: List[T] = session.query(self.class_name).order_by(*key).all()
            session.expunge_all()
            return entities

