"""Span-annotated syntax tree of the mini-Fortran language.

Every node is an immutable dataclass. Unit annotations have their own
small surface tree (`BaseUnit`, `One`, `UnitVar`, `UMul`, `UDiv`,
`UPow`) which `unitscheck.units.unit_normalize` folds into a normal form.
"""
from __future__ import annotations

import dataclasses
from fractions import Fraction
from typing import Dict, Iterator, Optional, Set, Tuple, Union


@dataclasses.dataclass(frozen=True, order=True)
class Span:
    """Location of the first character of a syntactic entity.

    Parameters
    ----------
    file : str
        File name as given by the user.
    line : int
        1-based line number.
    column : int
        1-based column number.
    length : int
        Number of characters covered, by default 0.
    """
    file: str
    line: int
    column: int
    length: int = 0

    def location(self) -> str:
        """Return `file (line:column)`.

        Examples
        --------
        >>> Span('sample.f90', 3, 11, 1).location()
        'sample.f90 (3:11)'
        """
        return f'{self.file} ({self.line}:{self.column})'

    def position(self) -> str:
        return f'({self.line}:{self.column})'

    def until(self, other: Span) -> Span:
        """Return the span from the start of `self` to the end of `other`."""
        if other.line != self.line:
            return self
        end = other.column + other.length
        return Span(self.file, self.line, self.column, end - self.column)


# Unit expressions as written inside `!= unit(...)` annotations.


@dataclasses.dataclass(frozen=True)
class BaseUnit:
    name: str


@dataclasses.dataclass(frozen=True)
class One:
    pass


@dataclasses.dataclass(frozen=True)
class UnitVar:
    """Unit-variable written `'name`."""
    name: str


@dataclasses.dataclass(frozen=True)
class UMul:
    lhs: UnitSpecSyntax
    rhs: UnitSpecSyntax


@dataclasses.dataclass(frozen=True)
class UDiv:
    lhs: UnitSpecSyntax
    rhs: UnitSpecSyntax


@dataclasses.dataclass(frozen=True)
class UPow:
    base: UnitSpecSyntax
    exponent: Fraction


UnitSpecSyntax = Union[BaseUnit, One, UnitVar, UMul, UDiv, UPow]


def iter_unit_vars(spec: UnitSpecSyntax) -> Iterator[str]:
    """Yield unit-variable names in order of first mention."""
    seen = set()
    stack = [spec]
    while stack:
        node = stack.pop()
        if isinstance(node, UnitVar):
            if node.name not in seen:
                seen.add(node.name)
                yield node.name
        elif isinstance(node, (UMul, UDiv)):
            stack.append(node.rhs)
            stack.append(node.lhs)
        elif isinstance(node, UPow):
            stack.append(node.base)


# Expressions.


@dataclasses.dataclass(frozen=True)
class NumLit:
    text: str
    span: Span

    def is_integer(self) -> bool:
        return self.text.isdigit()


@dataclasses.dataclass(frozen=True)
class Var:
    name: str
    span: Span


@dataclasses.dataclass(frozen=True)
class Neg:
    operand: Expr
    span: Span


@dataclasses.dataclass(frozen=True)
class Add:
    lhs: Expr
    rhs: Expr
    span: Span


@dataclasses.dataclass(frozen=True)
class Sub:
    lhs: Expr
    rhs: Expr
    span: Span


@dataclasses.dataclass(frozen=True)
class Mul:
    lhs: Expr
    rhs: Expr
    span: Span


@dataclasses.dataclass(frozen=True)
class Div:
    lhs: Expr
    rhs: Expr
    span: Span


@dataclasses.dataclass(frozen=True)
class Pow:
    base: Expr
    exponent: Expr
    span: Span


@dataclasses.dataclass(frozen=True)
class Call:
    callee: str
    args: Tuple[Expr, ...]
    span: Span


Expr = Union[NumLit, Var, Neg, Add, Sub, Mul, Div, Pow, Call]


def integer_exponent(expr: Expr) -> Optional[int]:
    """Return the value of an integer literal exponent, else `None`.

    `2`, `-2` and `(-2)` all count as integer literals.
    """
    if isinstance(expr, NumLit) and expr.is_integer():
        return int(expr.text)
    if isinstance(expr, Neg):
        value = integer_exponent(expr.operand)
        return None if value is None else -value
    return None


# Statements.


@dataclasses.dataclass(frozen=True)
class DeclItem:
    name: str
    span: Span
    init: Optional[Expr] = None


@dataclasses.dataclass(frozen=True)
class Decl:
    items: Tuple[DeclItem, ...]
    span: Span


@dataclasses.dataclass(frozen=True)
class Annotation:
    spec: UnitSpecSyntax
    names: Tuple[Tuple[str, Span], ...]
    span: Span


@dataclasses.dataclass(frozen=True)
class Assign:
    target: str
    target_span: Span
    value: Expr
    span: Span


Stmt = Union[Decl, Annotation, Assign]


@dataclasses.dataclass(frozen=True)
class FuncDef:
    """`real function name(params) ... end function`.

    The function name doubles as the result variable inside the body.
    Annotations written between `contains` and the header are part of
    `body`.
    """
    name: str
    span: Span
    params: Tuple[Tuple[str, Span], ...]
    body: Tuple[Stmt, ...]

    @property
    def param_names(self) -> Tuple[str, ...]:
        return tuple(name for name, _ in self.params)

    def declared_items(self) -> Tuple[DeclItem, ...]:
        return tuple(item for stmt in self.body if isinstance(stmt, Decl)
                     for item in stmt.items)

    def local_items(self) -> Tuple[DeclItem, ...]:
        """Return declarations that are neither parameters nor the result."""
        excluded = set(self.param_names) | {self.name}
        return tuple(item for item in self.declared_items()
                     if item.name not in excluded)


@dataclasses.dataclass(frozen=True)
class Program:
    """A parsed source file.

    Parameters
    ----------
    file : str
        File name used in spans.
    statements : tuple of Stmt
        Main-scope statements in source order.
    functions : tuple of FuncDef
        Functions of the `contains` block in source order.
    source_lines : tuple of str
        Raw lines including their line endings.
    """
    file: str
    statements: Tuple[Stmt, ...]
    functions: Tuple[FuncDef, ...]
    source_lines: Tuple[str, ...]

    def function(self, name: str) -> Optional[FuncDef]:
        for func in self.functions:
            if func.name == name:
                return func
        return None

    def main_items(self) -> Tuple[DeclItem, ...]:
        return tuple(item for stmt in self.statements
                     if isinstance(stmt, Decl) for item in stmt.items)

    def count_declared(self) -> int:
        """Return the number of declared variables over all scopes."""
        return len(self.main_items()) + sum(
            len(func.declared_items()) for func in self.functions)

    def annotated_names(self) -> Dict[Optional[str], Set[str]]:
        """Return annotated names per scope, `None` being the main scope."""
        scopes: Dict[Optional[str], Set[str]] = {None: set()}
        for scope, body in [(None, self.statements)] + [
                (func.name, func.body) for func in self.functions]:
            names = scopes.setdefault(scope, set())
            for stmt in body:
                if isinstance(stmt, Annotation):
                    names.update(name for name, _ in stmt.names)
        return scopes

    def render(self) -> str:
        """Return the source text, byte for byte."""
        return ''.join(self.source_lines)
