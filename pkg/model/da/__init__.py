"""
model/da/__init__.py
--------------------
Data access layer: run ledger, settings, and the file formats.

Modules included:
- config         : Settings and ledger initialization
- session        : Session manager with context control
- base_access    : Generic DataAccess class
- run_queries    : Ledger queries over persisted runs
- codec          : Game/profile JSON and trajectory JSONL
- dimacs         : DIMACS CNF reader and writer

Usage Example:
--------------
from model.da.base_access import DataAccess
from model.da.codec import load_game
"""

# Session and DB Management
from model.da.config import Settings, initialize_database, load_settings
from model.da.session import get_session

# Core Data Access
from model.da.base_access import DataAccess

# Ledger queries
from model.da.run_queries import count_runs_by_exit_code, find_runs_by_command, find_runs_by_input

# File formats
from model.da.codec import load_game, load_profile, save_game, save_profile
from model.da.dimacs import parse_dimacs, read_dimacs, write_dimacs
