"""
model/tools/validators.py
-------------
This module provides input validation functions used throughout the application.

Every validator returns the (normalized) value or raises ValueError with
the caller's message.

Functions:
- identifier_validator: Validates node and edge ids.
- budget_validator: Validates nonnegative finite budgets and efforts.
- positive_validator: Validates strictly positive finite constants.
- resolution_validator: Validates positive integer grid resolutions and caps.
- fraction_validator: Validates numbers in [0, 1].
- command_validator: Validates CLI command names stored in the run ledger.
- digest_validator: Validates hex digests.
"""

import math
import re
from numbers import Real


def _is_real(value) -> bool:
    return isinstance(value, Real) and not isinstance(value, bool)


def identifier_validator(identifier: str, message: str) -> str:
    """
    Validate a node or edge id: 1-64 characters, no whitespace or quotes.

    :param identifier: Input id.
    :param message: Error message on failure.
    :return: Validated id.
    :raises ValueError: If validation fails.
    """
    if isinstance(identifier, str) and re.match(r"^[^\s\"\\]{1,64}$", identifier):
        return identifier
    raise ValueError(message)


def budget_validator(amount: float, message: str) -> float:
    """
    Validate that the amount is a finite real number >= 0.

    :param amount: Input amount (budget or effort).
    :param message: Error message on failure.
    :return: Validated amount as float.
    :raises ValueError: If validation fails.
    """
    if _is_real(amount) and math.isfinite(amount) and amount >= 0:
        return float(amount)
    raise ValueError(message)


def positive_validator(amount: float, message: str) -> float:
    """
    Validate that the amount is a finite real number > 0.

    :param amount: Input amount.
    :param message: Error message on failure.
    :return: Validated amount as float.
    :raises ValueError: If validation fails.
    """
    if _is_real(amount) and math.isfinite(amount) and amount > 0:
        return float(amount)
    raise ValueError(message)


def resolution_validator(value: int, message: str) -> int:
    """
    Validate that the value is a positive integer.

    :param value: Input value.
    :param message: Error message on failure.
    :return: Validated value.
    :raises ValueError: If validation fails.
    """
    if isinstance(value, int) and not isinstance(value, bool) and value > 0:
        return value
    raise ValueError(message)


def fraction_validator(value: float, message: str) -> float:
    """Validate that the value is a real number in [0, 1]."""
    if _is_real(value) and 0.0 <= value <= 1.0:
        return float(value)
    raise ValueError(message)


def command_validator(command: str, message: str) -> str:
    """
    Validate a lower-case command name (2-30 chars, letters and dashes).

    :param command: Input command name.
    :param message: Error message on failure.
    :return: Validated command.
    :raises ValueError: If validation fails.
    """
    if isinstance(command, str) and re.match(r"^[a-z][a-z\-]{1,29}$", command):
        return command
    raise ValueError(message)


def digest_validator(digest: str, message: str) -> str:
    """Validate a lower-case hex digest of 16 to 64 characters."""
    if isinstance(digest, str) and re.match(r"^[0-9a-f]{16,64}$", digest):
        return digest
    raise ValueError(message)
