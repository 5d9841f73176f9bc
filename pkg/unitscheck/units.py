"""Exact exponent arithmetic and the group of units.

Units are kept in a normal form, `UnitNorm`, mapping base-unit names and
unit-variable names to non-zero rational exponents. Multiplication adds
exponents, powers scale them, and the empty mapping is the dimensionless
unit `1`.
"""
from __future__ import annotations

import dataclasses
from fractions import Fraction
from typing import Dict, Iterable, Mapping, Optional, Tuple, Union

from unitscheck.errors import DivisionByZero
from unitscheck.frontend import syntax

Rational = Fraction
RationalLike = Union[Fraction, int]


def rat_add(a: RationalLike, b: RationalLike) -> Fraction:
    """Return `a + b`.

    Examples
    --------
    >>> rat_add(Fraction(1, 2), Fraction(1, 3))
    Fraction(5, 6)
    """
    return Fraction(a) + Fraction(b)


def rat_mul(a: RationalLike, b: RationalLike) -> Fraction:
    """Return `a * b`.

    Examples
    --------
    >>> rat_mul(Fraction(4, 6), Fraction(3, 2))
    Fraction(1, 1)
    """
    return Fraction(a) * Fraction(b)


def rat_neg(a: RationalLike) -> Fraction:
    return -Fraction(a)


def rat_inv(a: RationalLike) -> Fraction:
    """Return `1 / a`.

    Raises
    ------
    DivisionByZero
        If `a` is zero.

    Examples
    --------
    >>> rat_inv(Fraction(-2, 3))
    Fraction(-3, 2)
    """
    if a == 0:
        raise DivisionByZero('inverse of zero')
    return 1 / Fraction(a)


Exponents = Tuple[Tuple[str, Fraction], ...]


def _canonical(exponents: Optional[Mapping[str, RationalLike]]) -> Exponents:
    if not exponents:
        return ()
    return tuple(
        sorted((name, Fraction(value))
               for name, value in exponents.items()
               if value != 0))


@dataclasses.dataclass(frozen=True)
class UnitNorm:
    """Normal form of a unit.

    Parameters
    ----------
    base : tuple of (str, Fraction)
        Base-unit exponents sorted by name, none zero.
    vars : tuple of (str, Fraction)
        Unit-variable exponents sorted by name, none zero. Names are
        stored without the leading `'`.

    Use `UnitNorm.create` to build one from mappings.
    """
    base: Exponents = ()
    vars: Exponents = ()

    @classmethod
    def create(cls,
               base: Optional[Mapping[str, RationalLike]] = None,
               vars: Optional[Mapping[str, RationalLike]] = None) -> UnitNorm:
        """Create a unit from exponent mappings, dropping zeros.

        Examples
        --------
        >>> UnitNorm.create({'m': 2, 's': 0})
        UnitNorm(base=(('m', Fraction(2, 1)),), vars=())
        """
        return cls(_canonical(base), _canonical(vars))

    def base_exponents(self) -> Dict[str, Fraction]:
        return dict(self.base)

    def is_dimensionless(self) -> bool:
        return not self.base and not self.vars

    def is_polymorphic(self) -> bool:
        return bool(self.vars)

    def __str__(self):
        return unit_render(self)


DIMENSIONLESS = UnitNorm()


def _combine(*parts: Tuple[Exponents, Fraction]) -> Exponents:
    total: Dict[str, Fraction] = {}
    for exponents, scale in parts:
        for name, value in exponents:
            total[name] = total.get(name, Fraction(0)) + value * scale
    return _canonical(total)


def unit_mul(a: UnitNorm, b: UnitNorm) -> UnitNorm:
    """Return the product of two units.

    Examples
    --------
    >>> unit_mul(UnitNorm.create({'m': 1}), UnitNorm.create({'m': -1}))
    UnitNorm(base=(), vars=())
    """
    return UnitNorm(_combine((a.base, Fraction(1)), (b.base, Fraction(1))),
                    _combine((a.vars, Fraction(1)), (b.vars, Fraction(1))))


def unit_pow(u: UnitNorm, k: RationalLike) -> UnitNorm:
    """Return `u` raised to the rational power `k`."""
    k = Fraction(k)
    return UnitNorm(_combine((u.base, k)), _combine((u.vars, k)))


def unit_div(a: UnitNorm, b: UnitNorm) -> UnitNorm:
    return unit_mul(a, unit_pow(b, -1))


def unit_product(units: Iterable[UnitNorm]) -> UnitNorm:
    result = DIMENSIONLESS
    for unit in units:
        result = unit_mul(result, unit)
    return result


def unit_normalize(spec: syntax.UnitSpecSyntax) -> UnitNorm:
    """Fold a surface unit expression into its normal form.

    Examples
    --------
    >>> from unitscheck.frontend.parser import parse_unit
    >>> unit_normalize(parse_unit('m * m / (s**2) * s')).base_exponents()
    {'m': Fraction(2, 1), 's': Fraction(-1, 1)}
    """
    if isinstance(spec, syntax.BaseUnit):
        return UnitNorm.create(base={spec.name: 1})
    if isinstance(spec, syntax.UnitVar):
        return UnitNorm.create(vars={spec.name: 1})
    if isinstance(spec, syntax.One):
        return DIMENSIONLESS
    if isinstance(spec, syntax.UMul):
        return unit_mul(unit_normalize(spec.lhs), unit_normalize(spec.rhs))
    if isinstance(spec, syntax.UDiv):
        return unit_div(unit_normalize(spec.lhs), unit_normalize(spec.rhs))
    return unit_pow(unit_normalize(spec.base), spec.exponent)


def _render_exponent(value: Fraction) -> str:
    if value.denominator == 1:
        return str(value.numerator)
    return f'({value.numerator}/{value.denominator})'


def _render_factor(name: str, value: Fraction, is_var: bool) -> str:
    text = f"'{name}" if is_var else name
    if value == 1:
        return text
    if is_var:
        text = f'({text})'
    return f'{text}**{_render_exponent(value)}'


def unit_render(u: UnitNorm) -> str:
    """Render a unit in annotation syntax.

    Positive factors come first, unit-variables before base units and
    each group in alphabetical order, joined by `*`. Negative factors
    follow a single ` / `, parenthesised when there are several.

    Examples
    --------
    >>> unit_render(UnitNorm.create({'m': 2}))
    'm**2'
    >>> unit_render(UnitNorm.create(vars={'a': 2}))
    "('a)**2"
    >>> unit_render(UnitNorm.create({'m': 1, 's': -1}))
    'm / s'
    >>> unit_render(UnitNorm.create({'kg': 1, 'm': 1, 's': -2}))
    'kg*m / s**2'
    >>> unit_render(UnitNorm.create({'m': 1, 'kg': -1, 's': -2}))
    'm / (kg*s**2)'
    >>> unit_render(UnitNorm.create({'m': Fraction(1, 2)}))
    'm**(1/2)'
    >>> unit_render(UnitNorm())
    '1'
    """
    numerator = []
    denominator = []
    for exponents, is_var in ((u.vars, True), (u.base, False)):
        for name, value in exponents:
            if value > 0:
                numerator.append(_render_factor(name, value, is_var))
            else:
                denominator.append(_render_factor(name, -value, is_var))
    text = '*'.join(numerator) or '1'
    if not denominator:
        return text
    if len(denominator) == 1:
        return f'{text} / {denominator[0]}'
    return f"{text} / ({'*'.join(denominator)})"
