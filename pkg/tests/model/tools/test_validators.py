"""
Test: model/tools/validators.py
-------------------------------
Every validator returns the normalized value or raises ValueError with
the caller's message.
"""

import math

import pytest

from model.tools.validators import (
    budget_validator,
    command_validator,
    digest_validator,
    fraction_validator,
    identifier_validator,
    positive_validator,
    resolution_validator,
)


@pytest.mark.parametrize("identifier", ["e1", "v10", "x3t-c2z", "c1u'", "node_A"])
def test_identifier_validator_valid(identifier):
    assert identifier_validator(identifier, "bad id") == identifier


@pytest.mark.parametrize("identifier", ["", "a b", 'say"hi', "back\\slash", "x" * 65, 7])
def test_identifier_validator_invalid(identifier):
    with pytest.raises(ValueError, match="bad id"):
        identifier_validator(identifier, "bad id")


def test_budget_validator_valid():
    assert budget_validator(0, "bad") == 0.0
    assert budget_validator(2, "bad") == 2.0
    assert isinstance(budget_validator(2, "bad"), float)


@pytest.mark.parametrize("amount", [-1e-12, math.inf, math.nan, True, "1"])
def test_budget_validator_invalid(amount):
    with pytest.raises(ValueError):
        budget_validator(amount, "bad budget")


def test_positive_validator():
    assert positive_validator(0.5, "bad") == 0.5
    with pytest.raises(ValueError, match="must be > 0"):
        positive_validator(0, "must be > 0")


def test_resolution_validator():
    assert resolution_validator(16, "bad") == 16
    for value in (0, -4, 2.0, True):
        with pytest.raises(ValueError):
            resolution_validator(value, "bad grid")


def test_fraction_validator():
    assert fraction_validator(0, "bad") == 0.0
    assert fraction_validator(1, "bad") == 1.0
    with pytest.raises(ValueError):
        fraction_validator(1.5, "bad density")


def test_command_validator():
    assert command_validator("solve", "bad") == "solve"
    assert command_validator("gen", "bad") == "gen"
    for command in ("Solve", "s", "solve now", "9lives"):
        with pytest.raises(ValueError):
            command_validator(command, "bad command")


def test_digest_validator():
    digest = "0123456789abcdef" * 4
    assert digest_validator(digest, "bad") == digest
    for value in ("ABCDEF0123456789", "abc", "g" * 16):
        with pytest.raises(ValueError):
            digest_validator(value, "bad digest")


if __name__ == "__main__":
    pytest.main([__file__])
