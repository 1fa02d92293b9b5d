"""
model/entity/__init__.py
------------------------
Centralized import module for the entity layer.

Exposed Entities:
- Base: Declarative base shared by the ORM models.
- RunRecord: One persisted CLI run (the 'runs' table).
- Game, Node, Edge: The network and its budgets.
- Profile: Efforts per node and edge.
- Reward and ScalarFn families: Edge reward functions.

Typical usage:
    from model.entity import Game, Profile, RunRecord
"""

# Internal Utilities
from model.tools.logger import Logger

# Entity Classes
from model.entity.base import Base
from model.entity.run_record import RunRecord
from model.entity.game import Edge, Game, Node
from model.entity.profile import Profile
from model.entity.reward import MaxEffort, MinEffort, PolyConvex, Reward, WeightedProduct, WeightedSum
from model.entity.scalar_fn import Linear, PiecewiseLinear, Power, ScalarFn, Truncated
