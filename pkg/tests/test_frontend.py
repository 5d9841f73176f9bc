from fractions import Fraction

import pytest

from unitscheck.errors import DuplicateName
from unitscheck.errors import LexError
from unitscheck.errors import MissingResultAssignment
from unitscheck.errors import ParseError
from unitscheck.errors import UnresolvedName
from unitscheck.frontend import syntax
from unitscheck.frontend.lexer import TokenKind
from unitscheck.frontend.lexer import tokenize
from unitscheck.frontend.parser import parse_annotation
from unitscheck.frontend.parser import parse_source
from unitscheck.frontend.parser import parse_unit
from unitscheck.frontend.syntax import Span


def kinds(text):
    return [token.kind for token in tokenize(text)][:-1]


def test_tokenize():
    assert kinds('real :: a, b') == [
        TokenKind.KW_REAL, TokenKind.DCOLON, TokenKind.IDENT, TokenKind.COMMA,
        TokenKind.IDENT
    ]
    assert kinds('!= unit(m) :: x') == [
        TokenKind.ANNOT_START, TokenKind.KW_UNIT, TokenKind.LPAREN,
        TokenKind.IDENT, TokenKind.RPAREN, TokenKind.DCOLON, TokenKind.IDENT
    ]
    assert kinds('a = sqr(x)') == [
        TokenKind.IDENT, TokenKind.EQ, TokenKind.IDENT, TokenKind.LPAREN,
        TokenKind.IDENT, TokenKind.RPAREN
    ]
    assert kinds("!= unit(('a)**2) :: sqr")[4] is TokenKind.UNIT_VAR
    assert kinds('x = 6.674e-11 ** 2')[2:4] == [
        TokenKind.NUMBER, TokenKind.POW
    ]


def test_tokenize_spans():
    tokens = tokenize('real :: a\n  real :: x = 20.0\r\n', 'f.f90')
    x = [token for token in tokens if token.text == 'x'][0]
    assert x.span == Span('f.f90', 2, 11, 1)
    assert tokens[-1].kind is TokenKind.EOF
    assert tokens[-1].span.line == 3


def test_comments_are_trivia():
    tokens = tokenize('! header\nreal :: x ! trailing')
    assert tokens[0].kind is TokenKind.KW_REAL
    assert tokens[0].trivia == ('! header',)
    assert tokens[-1].kind is TokenKind.EOF
    assert tokens[-1].trivia == ('! trailing',)
    assert [t.kind for t in tokenize('! not an annotation != x')] == [
        TokenKind.EOF
    ]


def test_annotation_must_start_the_line():
    assert kinds('  != unit(s) :: t')[0] is TokenKind.ANNOT_START
    assert TokenKind.ANNOT_START not in kinds('x = 1.0 != unit(s) :: t')


def test_lex_errors():
    with pytest.raises(LexError) as exc_info:
        tokenize('real :: x$', 'bad.f90')
    assert exc_info.value.span == Span('bad.f90', 1, 10, 1)
    assert str(exc_info.value) == "bad.f90 (1:10): illegal character '$'"
    with pytest.raises(LexError):
        tokenize("x = 'a")


def test_parse_sample(source):
    program = parse_source(source('sample.f90'), 'sample.f90')
    decls = [s for s in program.statements if isinstance(s, syntax.Decl)]
    assigns = [s for s in program.statements if isinstance(s, syntax.Assign)]
    assert len(decls) == 3
    assert len(assigns) == 2
    assert [item.name for item in decls[0].items] == ['a', 'b']
    assert decls[1].items[0].span == Span('sample.f90', 2, 11, 1)
    assert decls[2].items[0].span == Span('sample.f90', 3, 11, 1)
    assert decls[1].items[0].init == syntax.NumLit(
        '20.0', Span('sample.f90', 2, 15, 4))
    assert assigns[0].value == syntax.Call(
        'sqr', (syntax.Var('x', Span('sample.f90', 4, 11, 1)),),
        Span('sample.f90', 4, 7, 6))
    (sqr,) = program.functions
    assert sqr.name == 'sqr'
    assert sqr.param_names == ('y',)
    assert sqr.local_items() == ()
    assert program.count_declared() == 5
    assert program.render() == source('sample.f90')


def test_parse_empty():
    program = parse_source('')
    assert program.statements == ()
    assert program.functions == ()
    assert program.count_declared() == 0
    assert parse_source('! just a comment\n\n').statements == ()


def test_expression_shapes():
    program = parse_source('real :: x, y\ny = -x * x**(-2) + (x - 1.0)\n')
    value = program.statements[1].value
    assert isinstance(value, syntax.Add)
    assert isinstance(value.lhs, syntax.Mul)
    assert isinstance(value.lhs.lhs, syntax.Neg)
    assert isinstance(value.lhs.rhs, syntax.Pow)
    assert syntax.integer_exponent(value.lhs.rhs.exponent) == -2
    assert isinstance(value.rhs, syntax.Sub)
    assert value.span.column == 5


def test_annotations_belong_to_their_scope(source):
    program = parse_source(source('annotated_sample.f90'))
    annotated = program.annotated_names()
    assert annotated[None] == {'a', 'b', 'x', 't'}
    assert annotated['sqr'] == {'sqr', 'y'}
    body = program.functions[0].body
    assert isinstance(body[0], syntax.Annotation)
    assert body[0].names == (('sqr', Span('<string>', 12, 23, 3)),)


def test_parse_unit_expressions():
    assert parse_unit('m**2') == syntax.UPow(syntax.BaseUnit('m'), Fraction(2))
    assert parse_unit('1') == syntax.One()
    assert parse_unit('m / s**2') == syntax.UDiv(
        syntax.BaseUnit('m'), syntax.UPow(syntax.BaseUnit('s'), Fraction(2)))
    assert parse_unit("'a") == syntax.UnitVar('a')
    assert parse_unit('m**(1/2)').exponent == Fraction(1, 2)
    assert parse_unit('s**(-2)').exponent == -2
    annotation = parse_annotation(tokenize('!= unit(1) :: k, j'))
    assert annotation.spec == syntax.One()
    assert [name for name, _ in annotation.names] == ['k', 'j']


@pytest.mark.parametrize('text', ['m**', '(m', 'm**(1/0)', 'm s', '**2', ''])
def test_malformed_units(text):
    with pytest.raises(ParseError):
        parse_unit(text)


def test_unresolved_name():
    with pytest.raises(UnresolvedName) as exc_info:
        parse_source('real :: x\nx = y')
    assert exc_info.value.name == 'y'
    assert exc_info.value.span == Span('<string>', 2, 5, 1)
    with pytest.raises(UnresolvedName):
        parse_source('real :: x\n!= unit(m) :: z\n')


@pytest.mark.parametrize('text', [
    'real :: x\nreal :: x\n',
    'real :: f\ncontains\nreal function f(p)\n  f = p\nend function\n',
    'contains\nreal function f(p, p)\n  f = p\nend function\n',
])
def test_duplicate_names(text):
    with pytest.raises(DuplicateName):
        parse_source(text)


def test_missing_result_assignment():
    with pytest.raises(MissingResultAssignment):
        parse_source('contains\nreal function f(p)\n  real :: q\n'
                     'end function\n')


@pytest.mark.parametrize('text, found', [
    ('real :: ', 'end of file'),
    ('real ::\nreal :: x\n', 'end of line'),
    ('real :: x y\n', "'y'"),
    ('real function f(p)\n  f = p\nend function\n', None),
    ('contains\nreal function f(p)\n  f = p\nend function g\n', 'g'),
    ('contains\nreal function f(p)\n  f = p\nend function\n'
     '!= unit(m) :: f\n', None),
])
def test_parse_errors(text, found):
    with pytest.raises(ParseError) as exc_info:
        parse_source(text)
    if found is not None:
        assert exc_info.value.found == found


def test_crlf_source_round_trips():
    text = 'real :: x\r\n!= unit(m) :: x\r\nx = 1.0\r\n'
    program = parse_source(text)
    assert program.render() == text
    assert program.statements[2].span.line == 3
