"""Recursive-descent parser for programs and unit annotations.

Grammar (one statement per line)::

    program    := {stmt} ['contains' {{annotation} function}]
    stmt       := decl | annotation | assign
    decl       := 'real' '::' item {',' item}      item := name ['=' expr]
    annotation := '!=' 'unit' '(' unitexpr ')' '::' name {',' name}
    assign     := name '=' expr
    function   := 'real' 'function' name '(' [name {',' name}] ')'
                  {stmt} 'end' 'function' [name]
"""
from __future__ import annotations

import logging
import re
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Set, Tuple

from unitscheck.errors import DuplicateName
from unitscheck.errors import MissingResultAssignment
from unitscheck.errors import ParseError
from unitscheck.errors import UnresolvedName
from unitscheck.frontend import syntax
from unitscheck.frontend.lexer import Token
from unitscheck.frontend.lexer import TokenKind
from unitscheck.frontend.lexer import tokenize
from unitscheck.frontend.lexer import tokenize_unit
from unitscheck.frontend.syntax import Span

logger = logging.getLogger(__name__)


class _Parser:
    """Token cursor shared by the program and unit-expression grammars.

    While a statement is being parsed, tokens on later lines read as end
    of input, since statements never continue onto the next line.
    """

    def __init__(self, tokens: Sequence[Token]):
        self._tokens = tokens
        self._index = 0
        self._line: Optional[int] = None

    def peek(self) -> Token:
        token = self._tokens[self._index]
        if self._line is not None and token.span.line != self._line:
            return Token(TokenKind.EOF, '', token.span)
        return token

    def at(self, *kinds: TokenKind) -> bool:
        return self.peek().kind in kinds

    def advance(self) -> Token:
        token = self.peek()
        if token.kind is not TokenKind.EOF:
            self._index += 1
        return token

    def expect(self, kind: TokenKind, what: Optional[str] = None) -> Token:
        if not self.at(kind):
            self.fail(what or repr(kind.value))
        return self.advance()

    def fail(self, expected: str):
        token = self.peek()
        if self._tokens[self._index].kind is TokenKind.EOF:
            found = 'end of file'
        elif token.kind is TokenKind.EOF:
            found = 'end of line'
        else:
            found = repr(token.text)
        raise ParseError(f'expected {expected}, found {found}',
                         token.span,
                         expected=expected,
                         found=found)

    def begin_statement(self):
        self._line = self._tokens[self._index].span.line

    def end_statement(self):
        if not self.at(TokenKind.EOF):
            self.fail('end of line')
        self._line = None

    # Unit expressions.

    def unit_expr(self) -> syntax.UnitSpecSyntax:
        node = self.unit_term()
        while self.at(TokenKind.STAR, TokenKind.SLASH):
            operator = self.advance()
            rhs = self.unit_term()
            if operator.kind is TokenKind.STAR:
                node = syntax.UMul(node, rhs)
            else:
                node = syntax.UDiv(node, rhs)
        return node

    def unit_term(self) -> syntax.UnitSpecSyntax:
        node = self.unit_factor()
        if self.at(TokenKind.POW):
            self.advance()
            node = syntax.UPow(node, self.unit_exponent())
        return node

    def unit_factor(self) -> syntax.UnitSpecSyntax:
        token = self.peek()
        if token.kind is TokenKind.IDENT:
            self.advance()
            return syntax.BaseUnit(token.text)
        if token.kind is TokenKind.UNIT_VAR:
            self.advance()
            return syntax.UnitVar(token.text[1:])
        if token.kind is TokenKind.NUMBER and token.text == '1':
            self.advance()
            return syntax.One()
        if token.kind is TokenKind.LPAREN:
            self.advance()
            node = self.unit_expr()
            self.expect(TokenKind.RPAREN)
            return node
        self.fail('a unit')

    def unit_exponent(self) -> Fraction:
        if not self.at(TokenKind.LPAREN):
            return Fraction(self.signed_integer())
        self.advance()
        numerator = self.signed_integer()
        denominator = 1
        if self.at(TokenKind.SLASH):
            self.advance()
            span = self.peek().span
            denominator = self.signed_integer()
            if denominator == 0:
                raise ParseError('zero denominator in exponent', span)
        self.expect(TokenKind.RPAREN)
        return Fraction(numerator, denominator)

    def signed_integer(self) -> int:
        sign = 1
        if self.at(TokenKind.MINUS):
            self.advance()
            sign = -1
        token = self.peek()
        if token.kind is not TokenKind.NUMBER or not token.text.isdigit():
            self.fail('an integer exponent')
        self.advance()
        return sign * int(token.text)

    def annotation(self) -> syntax.Annotation:
        start = self.peek().span
        if self.at(TokenKind.ANNOT_START):
            self.advance()
        self.expect(TokenKind.KW_UNIT)
        self.expect(TokenKind.LPAREN)
        spec = self.unit_expr()
        self.expect(TokenKind.RPAREN)
        self.expect(TokenKind.DCOLON)
        names = [self.name()]
        while self.at(TokenKind.COMMA):
            self.advance()
            names.append(self.name())
        return syntax.Annotation(spec, tuple(names), start)

    def name(self) -> Tuple[str, Span]:
        token = self.expect(TokenKind.IDENT, 'a name')
        return token.text, token.span

    # Expressions.

    def expr(self) -> syntax.Expr:
        node = self.term()
        while self.at(TokenKind.PLUS, TokenKind.MINUS):
            operator = self.advance()
            rhs = self.term()
            node_type = (syntax.Add
                         if operator.kind is TokenKind.PLUS else syntax.Sub)
            node = node_type(node, rhs, node.span.until(rhs.span))
        return node

    def term(self) -> syntax.Expr:
        node = self.unary()
        while self.at(TokenKind.STAR, TokenKind.SLASH):
            operator = self.advance()
            rhs = self.unary()
            node_type = (syntax.Mul
                         if operator.kind is TokenKind.STAR else syntax.Div)
            node = node_type(node, rhs, node.span.until(rhs.span))
        return node

    def unary(self) -> syntax.Expr:
        if self.at(TokenKind.MINUS, TokenKind.PLUS):
            operator = self.advance()
            operand = self.unary()
            if operator.kind is TokenKind.PLUS:
                return operand
            return syntax.Neg(operand, operator.span.until(operand.span))
        return self.power()

    def power(self) -> syntax.Expr:
        base = self.primary()
        if self.at(TokenKind.POW):
            self.advance()
            exponent = self.unary()
            return syntax.Pow(base, exponent, base.span.until(exponent.span))
        return base

    def primary(self) -> syntax.Expr:
        token = self.peek()
        if token.kind is TokenKind.NUMBER:
            self.advance()
            return syntax.NumLit(token.text, token.span)
        if token.kind is TokenKind.IDENT:
            self.advance()
            if not self.at(TokenKind.LPAREN):
                return syntax.Var(token.text, token.span)
            self.advance()
            args = []
            if not self.at(TokenKind.RPAREN):
                args.append(self.expr())
                while self.at(TokenKind.COMMA):
                    self.advance()
                    args.append(self.expr())
            close = self.expect(TokenKind.RPAREN)
            return syntax.Call(token.text, tuple(args),
                               token.span.until(close.span))
        if token.kind is TokenKind.LPAREN:
            self.advance()
            node = self.expr()
            self.expect(TokenKind.RPAREN)
            return node
        self.fail('an expression')

    # Statements.

    def statement(self) -> syntax.Stmt:
        self.begin_statement()
        token = self.peek()
        if token.kind is TokenKind.ANNOT_START:
            stmt = self.annotation()
        elif token.kind is TokenKind.KW_REAL:
            stmt = self.declaration()
        elif token.kind is TokenKind.IDENT:
            target, target_span = self.name()
            self.expect(TokenKind.EQ)
            value = self.expr()
            stmt = syntax.Assign(target, target_span, value,
                                 target_span.until(value.span))
        else:
            self.fail('a statement')
        self.end_statement()
        return stmt

    def declaration(self) -> syntax.Decl:
        keyword = self.expect(TokenKind.KW_REAL)
        if self.at(TokenKind.KW_FUNCTION):
            raise ParseError('function definitions must follow contains',
                             keyword.span)
        self.expect(TokenKind.DCOLON)
        items = [self.declaration_item()]
        while self.at(TokenKind.COMMA):
            self.advance()
            items.append(self.declaration_item())
        return syntax.Decl(tuple(items), keyword.span)

    def declaration_item(self) -> syntax.DeclItem:
        name, span = self.name()
        init = None
        if self.at(TokenKind.EQ):
            self.advance()
            init = self.expr()
        return syntax.DeclItem(name, span, init)

    def program(self, file: str, source_lines: Tuple[str, ...]):
        statements = []
        while not self.at(TokenKind.EOF, TokenKind.KW_CONTAINS):
            statements.append(self.statement())
        functions = []
        if self.at(TokenKind.KW_CONTAINS):
            self.begin_statement()
            self.advance()
            self.end_statement()
            while not self.at(TokenKind.EOF):
                functions.append(self.function())
        return syntax.Program(file, tuple(statements), tuple(functions),
                              source_lines)

    def function(self) -> syntax.FuncDef:
        leading = []
        while self.at(TokenKind.ANNOT_START):
            leading.append(self.statement())
        if self.at(TokenKind.EOF):
            raise ParseError('annotation must precede a function',
                             leading[-1].span)
        self.begin_statement()
        self.expect(TokenKind.KW_REAL)
        self.expect(TokenKind.KW_FUNCTION)
        name, span = self.name()
        self.expect(TokenKind.LPAREN)
        params = []
        if not self.at(TokenKind.RPAREN):
            params.append(self.name())
            while self.at(TokenKind.COMMA):
                self.advance()
                params.append(self.name())
        self.expect(TokenKind.RPAREN)
        self.end_statement()
        body = list(leading)
        while not self.at(TokenKind.KW_END, TokenKind.EOF):
            body.append(self.statement())
        self.begin_statement()
        self.expect(TokenKind.KW_END, "'end function'")
        self.expect(TokenKind.KW_FUNCTION)
        if self.at(TokenKind.IDENT):
            closing = self.advance()
            if closing.text != name:
                raise ParseError(
                    f'end function {closing.text} closes function {name}',
                    closing.span,
                    expected=name,
                    found=closing.text)
        self.end_statement()
        return syntax.FuncDef(name, span, tuple(params), tuple(body))


def split_lines(text: str) -> Tuple[str, ...]:
    r"""Split `text` into lines keeping their endings.

    Examples
    --------
    >>> split_lines('a\r\nb\n')
    ('a\r\n', 'b\n')
    >>> split_lines('')
    ()
    """
    return tuple(line for line in re.split(r'(?<=\n)', text) if line)


def parse_program(tokens: Sequence[Token], file: str,
                  source_lines: Sequence[str]) -> syntax.Program:
    """Parse a token stream into a resolved `Program`.

    Parameters
    ----------
    tokens : sequence of Token
        Output of `tokenize`.
    file : str
        File name used in spans.
    source_lines : sequence of str
        Raw lines including line endings.

    Raises
    ------
    ParseError
        On a grammar violation.
    UnresolvedName
        On a reference without a declaration in scope.
    """
    program = _Parser(tokens).program(file, tuple(source_lines))
    resolve(program)
    logger.debug('%s: %d statements, %d functions', file,
                 len(program.statements), len(program.functions))
    return program


def parse_source(text: str, file: str = '<string>') -> syntax.Program:
    """Tokenize and parse source text."""
    return parse_program(tokenize(text, file), file, split_lines(text))


def parse_unit_expr(tokens: Sequence[Token]) -> syntax.UnitSpecSyntax:
    """Parse a bare unit expression.

    Examples
    --------
    >>> parse_unit_expr(tokenize_unit('m**2'))
    UPow(base=BaseUnit(name='m'), exponent=Fraction(2, 1))
    >>> parse_unit_expr(tokenize_unit('1'))
    One()
    """
    parser = _Parser(tokens)
    node = parser.unit_expr()
    parser.expect(TokenKind.EOF, 'end of unit')
    return node


def parse_unit(text: str) -> syntax.UnitSpecSyntax:
    """Parse the text of a unit expression such as `m / s**2`."""
    return parse_unit_expr(tokenize_unit(text))


def parse_annotation(tokens: Sequence[Token]) -> syntax.Annotation:
    """Parse `[!=] unit ( <unitexpr> ) :: <names>`."""
    parser = _Parser(tokens)
    annotation = parser.annotation()
    parser.expect(TokenKind.EOF, 'end of annotation')
    return annotation


def resolve(program: syntax.Program):
    """Check that every name is declared once and resolves in its scope.

    Raises
    ------
    DuplicateName
        On a name declared twice in one scope.
    UnresolvedName
        On a reference to an undeclared name.
    MissingResultAssignment
        On a function that never assigns its result.
    """
    main_scope = _declare(program.main_items(), set())
    function_names: Set[str] = set()
    for func in program.functions:
        if func.name in main_scope or func.name in function_names:
            raise DuplicateName(func.name, func.span)
        function_names.add(func.name)
    for stmt in program.statements:
        _resolve_statement(stmt, main_scope)
    for func in program.functions:
        params: Dict[str, Span] = {}
        for name, span in func.params:
            if name in params or name == func.name:
                raise DuplicateName(name, span)
            params[name] = span
        scope = set(params) | {func.name}
        scope |= _declare(func.declared_items(), set())
        for stmt in func.body:
            _resolve_statement(stmt, scope)
        if not any(
                isinstance(stmt, syntax.Assign) and stmt.target == func.name
                for stmt in func.body):
            raise MissingResultAssignment(
                f'function {func.name!r} never assigns its result', func.span)


def _declare(items: Sequence[syntax.DeclItem], scope: Set[str]) -> Set[str]:
    for item in items:
        if item.name in scope:
            raise DuplicateName(item.name, item.span)
        scope.add(item.name)
    return scope


def _resolve_statement(stmt: syntax.Stmt, scope: Set[str]):
    if isinstance(stmt, syntax.Decl):
        for item in stmt.items:
            if item.init is not None:
                _resolve_expr(item.init, scope)
    elif isinstance(stmt, syntax.Annotation):
        for name, span in stmt.names:
            if name not in scope:
                raise UnresolvedName(name, span)
    else:
        if stmt.target not in scope:
            raise UnresolvedName(stmt.target, stmt.target_span)
        _resolve_expr(stmt.value, scope)


def _resolve_expr(expr: syntax.Expr, scope: Set[str]):
    stack: List[syntax.Expr] = [expr]
    while stack:
        node = stack.pop()
        if isinstance(node, syntax.Var):
            if node.name not in scope:
                raise UnresolvedName(node.name, node.span)
        elif isinstance(node, syntax.Call):
            stack.extend(node.args)
        elif isinstance(node, syntax.Neg):
            stack.append(node.operand)
        elif isinstance(node, syntax.Pow):
            stack.extend([node.base, node.exponent])
        elif not isinstance(node, syntax.NumLit):
            stack.extend([node.lhs, node.rhs])
