"""Line-oriented tokenizer.

A line whose first non-blank characters are `!=` is a unit annotation
and is lexed with the annotation vocabulary (`unit`, `'a`). Any other
`!` starts a comment, kept as trivia on the next token.
"""
from __future__ import annotations

import dataclasses
import enum
import logging
import re
from typing import List, Tuple

from unitscheck.errors import LexError
from unitscheck.frontend.syntax import Span

logger = logging.getLogger(__name__)


class TokenKind(enum.Enum):
    KW_REAL = 'real'
    KW_FUNCTION = 'function'
    KW_END = 'end'
    KW_CONTAINS = 'contains'
    KW_UNIT = 'unit'
    ANNOT_START = '!='
    IDENT = 'identifier'
    NUMBER = 'number'
    UNIT_VAR = 'unit variable'
    DCOLON = '::'
    COMMA = ','
    LPAREN = '('
    RPAREN = ')'
    EQ = '='
    PLUS = '+'
    MINUS = '-'
    POW = '**'
    STAR = '*'
    SLASH = '/'
    COMMENT = 'comment'
    EOF = 'end of file'


@dataclasses.dataclass(frozen=True)
class Token:
    """A token with its span and the comments preceding it."""
    kind: TokenKind
    text: str
    span: Span
    trivia: Tuple[str, ...] = ()


CODE_KEYWORDS = {
    'real': TokenKind.KW_REAL,
    'function': TokenKind.KW_FUNCTION,
    'end': TokenKind.KW_END,
    'contains': TokenKind.KW_CONTAINS,
}
ANNOTATION_KEYWORDS = {'unit': TokenKind.KW_UNIT}
OPERATORS = {
    '**': TokenKind.POW,
    '::': TokenKind.DCOLON,
    ',': TokenKind.COMMA,
    '(': TokenKind.LPAREN,
    ')': TokenKind.RPAREN,
    '=': TokenKind.EQ,
    '+': TokenKind.PLUS,
    '-': TokenKind.MINUS,
    '*': TokenKind.STAR,
    '/': TokenKind.SLASH,
}

_TOKEN_PATTERN = re.compile(r"""
    (?P<space>[ \t\f]+)
  | (?P<comment>!.*)
  | (?P<number>(?:\d+\.\d*|\.\d+|\d+)(?:[eEdD][+-]?\d+)?)
  | (?P<name>[A-Za-z][A-Za-z0-9_]*)
  | (?P<unitvar>'[a-z][A-Za-z0-9_]*)
  | (?P<op>\*\*|::|[-+*/=(),])
""", re.VERBOSE)
_ANNOTATION_LINE = re.compile(r'^[ \t]*!=')


def is_annotation_line(line: str) -> bool:
    """Return whether `line` is a unit annotation.

    Examples
    --------
    >>> is_annotation_line('  != unit(m) :: x')
    True
    >>> is_annotation_line('  x = 1.0 != unit(m) :: x')
    False
    """
    return _ANNOTATION_LINE.match(line) is not None


def tokenize(source: str, file: str = '<string>') -> List[Token]:
    """Return the tokens of `source` followed by an `EOF` token.

    Parameters
    ----------
    source : str
        Source text with `\\n` or `\\r\\n` line endings.
    file : str, optional
        File name recorded in spans.

    Raises
    ------
    LexError
        On a character outside the token vocabulary.

    Examples
    --------
    >>> [t.kind.name for t in tokenize('real :: a, b')]
    ['KW_REAL', 'DCOLON', 'IDENT', 'COMMA', 'IDENT', 'EOF']
    """
    tokens: List[Token] = []
    trivia: List[str] = []
    for number, line in enumerate(source.split('\n'), start=1):
        if line.endswith('\r'):
            line = line[:-1]
        if is_annotation_line(line):
            start = line.index('!=')
            tokens.append(
                Token(TokenKind.ANNOT_START,
                      '!=',
                      Span(file, number, start + 1, 2),
                      tuple(trivia)))
            trivia = []
            tokens.extend(
                _tokenize_line(line, file, number, start + 2, annotation=True))
            continue
        for token in _tokenize_line(line, file, number, 0, annotation=False):
            if token.kind is TokenKind.COMMENT:
                trivia.append(token.text)
                continue
            if trivia:
                token = dataclasses.replace(token, trivia=tuple(trivia))
                trivia = []
            tokens.append(token)
    eof_line = source.count('\n') + 1
    tokens.append(
        Token(TokenKind.EOF, '', Span(file, eof_line, 1, 0), tuple(trivia)))
    logger.debug('%s: %d tokens', file, len(tokens))
    return tokens


def tokenize_unit(text: str, file: str = '<unit>') -> List[Token]:
    """Return the tokens of a bare unit expression such as `m / s**2`."""
    tokens = _tokenize_line(text, file, 1, 0, annotation=True)
    tokens.append(Token(TokenKind.EOF, '', Span(file, 1, len(text) + 1, 0)))
    return tokens


def _tokenize_line(line: str, file: str, number: int, start: int,
                   annotation: bool) -> List[Token]:
    """Lex one line from column index `start`.

    Comments come back as `COMMENT` tokens.
    """
    keywords = ANNOTATION_KEYWORDS if annotation else CODE_KEYWORDS
    tokens = []
    position = start
    while position < len(line):
        match = _TOKEN_PATTERN.match(line, position)
        if match is None or (match.lastgroup == 'unitvar' and not annotation):
            raise LexError(f'illegal character {line[position]!r}',
                           Span(file, number, position + 1, 1))
        text = match.group()
        span = Span(file, number, position + 1, len(text))
        group = match.lastgroup
        position = match.end()
        if group == 'space':
            continue
        if group == 'comment':
            if annotation:
                break
            tokens.append(Token(TokenKind.COMMENT, text, span))
            continue
        if group == 'number':
            kind = TokenKind.NUMBER
        elif group == 'name':
            kind = keywords.get(text, TokenKind.IDENT)
        elif group == 'unitvar':
            kind = TokenKind.UNIT_VAR
        else:
            kind = OPERATORS[text]
        tokens.append(Token(kind, text, span))
    return tokens
