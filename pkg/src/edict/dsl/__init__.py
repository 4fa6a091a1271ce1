"""Lisp-style text-editing command language: parsing, resolution, execution."""

from .ast import Action, Constraint, Target
from .parser import parse_program, print_canonical, program_match
from .resolve import ResolutionContext, ResolvedTarget, resolve, resolve_target
from .execute import execute

__all__ = [
    "Action",
    "Constraint",
    "Target",
    "parse_program",
    "print_canonical",
    "program_match",
    "ResolutionContext",
    "ResolvedTarget",
    "resolve",
    "resolve_target",
    "execute",
]
