"""Lipschitz, contraction and Wadge reducibility on Baire space, decided by games.

Sets are given as expressions over cylinders, Boolean operations and a few
named families; the tier-1 fragment compiles to deterministic weak automata
on which reducibility games are solved exactly.
"""

__version__ = "0.1.0"

from .core import Point, vec, parse_point, format_point  # noqa: E402
from .errors import (WadgeError, RejectedInput, PreconditionError, ModeError,  # noqa: E402
                     UnsupportedTier, ExtractionError, ConstructionError, ParseError)

__all__ = [
    "__version__", "Point", "vec", "parse_point", "format_point",
    "WadgeError", "RejectedInput", "PreconditionError", "ModeError", "UnsupportedTier",
    "ExtractionError", "ConstructionError", "ParseError",
]
