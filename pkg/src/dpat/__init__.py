"""Definable-set pattern experiments over finite fields and the integers."""
__version__ = "0.1.0"

from .errors import DpatError  # noqa: E402
from .finfield import FiniteField, make_field  # noqa: E402
from .formula import complexity, parse, print_formula  # noqa: E402
from .evaluate import evaluate, family_scan  # noqa: E402
from .mset import MembershipSet  # noqa: E402

__all__ = ["__version__", "DpatError", "FiniteField", "make_field", "complexity", "parse", "print_formula",
           "evaluate", "family_scan", "MembershipSet"]
