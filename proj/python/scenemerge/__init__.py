"""Three-way diff and merge for level graphs.

All functions take and return level documents as text.
"""

from ._core import (
    IncompatibleInputError,
    InvalidGraphError,
    ParseError,
    canonicalize,
    diff,
    merge,
    simulate,
    validate,
)

__all__ = [
    "IncompatibleInputError",
    "InvalidGraphError",
    "ParseError",
    "canonicalize",
    "diff",
    "merge",
    "simulate",
    "validate",
]
