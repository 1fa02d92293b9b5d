"""
model/da/dimacs.py
------------------
DIMACS CNF reader and writer for the hardness gadgets.

Only 3-CNF is accepted on read, since the gadgets are built per clause
with exactly three literals.
"""

from typing import List

from model.entity.results import CnfFormula
from model.tools.errors import ParseError


def parse_dimacs(text: str) -> CnfFormula:
    """
    Parse DIMACS CNF text.

    Args:
        text: File contents.

    Returns:
        CnfFormula with k from the problem line.

    Raises:
        ParseError: bad problem line, clause without trailing 0, literal out
                    of range, clause that is not 3 literals, count mismatch.
    """
    num_vars = None
    num_clauses = None
    clauses: List[tuple] = []
    pending: List[int] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("c") or line.startswith("%"):
            continue
        if line.startswith("p"):
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise ParseError(f"line {lineno}", f"invalid problem line: {line}")
            try:
                num_vars, num_clauses = int(parts[2]), int(parts[3])
            except ValueError as e:
                raise ParseError(f"line {lineno}", f"invalid problem line: {line}") from e
            continue
        if num_vars is None:
            raise ParseError(f"line {lineno}", "clause before problem line")
        try:
            literals = [int(x) for x in line.split()]
        except ValueError as e:
            raise ParseError(f"line {lineno}", f"non-integer literal in: {line}") from e
        if literals[-1] != 0:
            raise ParseError(f"line {lineno}", f"clause must end with 0: {line}")
        pending.extend(literals[:-1])
        if not pending:
            raise ParseError(f"line {lineno}", "empty clause")
        if len(pending) != 3:
            raise ParseError(f"line {lineno}", f"clause has {len(pending)} literals, expected 3")
        for lit in pending:
            if abs(lit) > num_vars:
                raise ParseError(f"line {lineno}", f"literal {lit} exceeds {num_vars} variables")
        clauses.append(tuple(pending))
        pending = []
    if num_vars is None:
        raise ParseError("line 1", "missing problem line")
    if num_clauses is not None and len(clauses) != num_clauses:
        raise ParseError("p", f"problem line announces {num_clauses} clauses, found {len(clauses)}")
    try:
        return CnfFormula(num_vars, tuple(clauses))
    except ValueError as e:
        raise ParseError("p", str(e)) from e


def read_dimacs(filename: str) -> CnfFormula:
    with open(filename, "r", encoding="utf-8") as handle:
        return parse_dimacs(handle.read())


def write_dimacs(formula: CnfFormula) -> str:
    """Render a formula as DIMACS text."""
    lines = [f"p cnf {formula.k} {formula.l}"]
    lines.extend(" ".join(str(lit) for lit in clause) + " 0" for clause in formula.clauses)
    return "\n".join(lines) + "\n"
