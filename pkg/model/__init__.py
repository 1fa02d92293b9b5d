"""
model.__init__.py
-----------------
Marks the 'model' directory as a Python package.

Exposes:
- entity layer (Game, Profile, RunRecord, Base)
- data access layer (DataAccess, Settings)
- tools (Logger, validation)
"""

from model.entity import Base, Game, Profile, RunRecord
from model.da import DataAccess, Settings
from model.tools.logger import Logger
from model.tools import validators
