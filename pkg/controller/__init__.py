"""
controller.__init__.py
-----------------------
Initializes the controller package.

Aggregates the algorithm modules and the command functions that sit
between the CLI and the model layer.
"""

from controller import (
    allocation,
    equilibria,
    solvers,
    oracle,
    instances,
    dynamics,
    run_controller,
)
