"""Expression nodes for the command language.

Nodes are frozen, so structural equality and hashing work out of the box and
round-tripping through the printer can be checked with ==. Literal string and
integer arguments appear in args as plain str and int values.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union


@dataclass(frozen=True)
class Action:
    head: str
    args: tuple["Arg", ...] = ()


@dataclass(frozen=True)
class Target:
    head: str
    args: tuple["Arg", ...] = ()


@dataclass(frozen=True)
class Constraint:
    head: str
    args: tuple["Arg", ...] = ()


Arg = Union[Action, Target, Constraint, str, int]

# A program is its root action; `do` chains nest arbitrarily.
Program = Action
