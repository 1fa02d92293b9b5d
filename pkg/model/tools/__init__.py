"""
model.tools.__init__.py
------------------------
Initializes the tools utility package, exposing key helper modules
such as logging, validation, errors and the seeded RNG.

Available imports:
- Logger: Centralized logger utility
- validators: Input validation utilities
- errors: Exception hierarchy
- SeededRNG: Portable seeded random generator
"""

from model.tools.logger import Logger
from model.tools import validators
from model.tools import errors
from model.tools.rng import SeededRNG
