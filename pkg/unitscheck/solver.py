"""Exact Gauss-Jordan solving of unit constraints.

Constraints are encoded as an augmented matrix of `Fraction` entries: one
column per unknown, one right-hand-side column per base unit. Reduced
row-echelon form then tells everything the tools need:

* rows `0 = rhs` with a non-zero rhs are contradictions;
* pivot columns are unknowns determined by the others;
* free columns are unknowns nothing determines. The free declared
  variables form the critical set a user should annotate.

Column order decides which of several minimal critical sets is found,
since pivots are taken left to right: literals and call-site copies come
first and declared variables last.
"""
from __future__ import annotations

import dataclasses
import itertools
import logging
import string
from fractions import Fraction
from typing import Dict, FrozenSet, Iterator, List, Sequence, Tuple, Union

import numpy as np

from unitscheck import units
from unitscheck.constraints import Constraint
from unitscheck.constraints import ConstraintSet
from unitscheck.constraints import FunctionTemplate
from unitscheck.constraints import ProvenanceTag
from unitscheck.constraints import UnknownKind
from unitscheck.errors import CalledOnInconsistent
from unitscheck.frontend.syntax import Span
from unitscheck.units import UnitNorm

logger = logging.getLogger(__name__)

_ZERO = Fraction(0)


@dataclasses.dataclass
class AugMatrix:
    """Augmented matrix `[coeffs | rhs]` with per-row provenance.

    Parameters
    ----------
    coeffs : np.ndarray
        `(rows, len(col_order))` object array of `Fraction`.
    rhs : np.ndarray
        `(rows, len(base_cols))` object array of `Fraction`.
    provenance : list of frozenset of ProvenanceTag
        Constraints each row was combined from, never empty.
    col_order : tuple of int
        Unknown id of each coefficient column.
    base_cols : tuple of str
        Base unit of each rhs column, alphabetical.
    """
    coeffs: np.ndarray
    rhs: np.ndarray
    provenance: List[FrozenSet[ProvenanceTag]]
    col_order: Tuple[int, ...]
    base_cols: Tuple[str, ...]

    @classmethod
    def create(cls, coeffs, rhs, provenance: Sequence[FrozenSet[ProvenanceTag]],
               col_order: Sequence[int],
               base_cols: Sequence[str]) -> AugMatrix:
        """Create a matrix from nested sequences of rationals."""
        n_rows = len(provenance)
        return cls(_fraction_array(coeffs, (n_rows, len(col_order))),
                   _fraction_array(rhs, (n_rows, len(base_cols))),
                   list(provenance), tuple(col_order), tuple(base_cols))

    @property
    def n_rows(self) -> int:
        return self.coeffs.shape[0]

    @property
    def n_cols(self) -> int:
        return self.coeffs.shape[1]

    def row_unit(self, row: int) -> UnitNorm:
        """Return the rhs of `row` as a unit."""
        return UnitNorm.create(dict(zip(self.base_cols, self.rhs[row])))


def _fraction_array(values, shape: Tuple[int, int]) -> np.ndarray:
    array = np.full(shape, _ZERO, dtype=object)
    for i, row in enumerate(values):
        for j, value in enumerate(row):
            array[i, j] = Fraction(value)
    return array


@dataclasses.dataclass
class RrefResult:
    """A matrix in reduced row-echelon form.

    Parameters
    ----------
    matrix : AugMatrix
        The reduced matrix.
    pivots : dict of int to int
        Pivot coefficient column to its row.
    free_cols : tuple of int
        Coefficient columns without a pivot, increasing.
    inconsistent_rows : tuple of int
        Rows with zero coefficients and a non-zero rhs.
    """
    matrix: AugMatrix
    pivots: Dict[int, int]
    free_cols: Tuple[int, ...]
    inconsistent_rows: Tuple[int, ...]

    @property
    def rank(self) -> int:
        return len(self.pivots)


@dataclasses.dataclass(frozen=True)
class SymbolicUnit:
    """`base * prod(unit(u) ** k for u, k in terms)` over free unknowns."""
    base: UnitNorm
    terms: Tuple[Tuple[int, Fraction], ...] = ()

    def is_ground(self) -> bool:
        return not self.terms


@dataclasses.dataclass(frozen=True)
class Conflict:
    """One contradiction and the constraints it was derived from.

    `residual` is the unit the contradiction claims to be dimensionless;
    `description` replaces the default message when set.
    """
    provenance: Tuple[ProvenanceTag, ...]
    residual: UnitNorm
    description: str = ''

    @property
    def spans(self) -> Tuple[Span, ...]:
        return tuple(tag.span for tag in self.provenance)

    def message(self) -> str:
        if self.description:
            return self.description
        return f'units do not match (residual {units.unit_render(self.residual)})'


@dataclasses.dataclass(frozen=True)
class Inconsistent:
    conflicts: Tuple[Conflict, ...]


@dataclasses.dataclass(frozen=True)
class Consistent:
    """Solution of a consistent system.

    Parameters
    ----------
    assignments : dict of int to SymbolicUnit
        Unit of every column unknown; a free unknown maps to itself.
    free : tuple of int
        Free unknown ids in column order.
    """
    assignments: Dict[int, SymbolicUnit]
    free: Tuple[int, ...]


SolveOutcome = Union[Consistent, Inconsistent]


@dataclasses.dataclass(frozen=True)
class FunctionSpec:
    """Published unit specification of a function.

    Units mention the unit-variables `'a`, `'b`, ... where the function
    is polymorphic.
    """
    name: str
    params: Tuple[Tuple[str, UnitNorm], ...]
    result: UnitNorm
    locals: Tuple[Tuple[str, UnitNorm], ...] = ()

    def is_polymorphic(self) -> bool:
        return self.result.is_polymorphic() or any(
            unit.is_polymorphic() for _, unit in self.params)

    def units_by_name(self) -> Dict[str, UnitNorm]:
        named = dict(self.params)
        named.update(self.locals)
        named[self.name] = self.result
        return named


TemplateOutcome = Union[FunctionSpec, Inconsistent]


def encode(constraints: Sequence[Constraint],
           col_order: Sequence[int]) -> AugMatrix:
    """Encode constraints as matrix rows over the given columns."""
    index = {uid: col for col, uid in enumerate(col_order)}
    base_cols = sorted({
        name
        for constraint in constraints for name, _ in constraint.rhs.base
    })
    base_index = {name: col for col, name in enumerate(base_cols)}
    coeffs = np.full((len(constraints), len(col_order)), _ZERO, dtype=object)
    rhs = np.full((len(constraints), len(base_cols)), _ZERO, dtype=object)
    for row, constraint in enumerate(constraints):
        for uid, value in constraint.terms:
            coeffs[row, index[uid]] = value
        for name, value in constraint.rhs.base:
            rhs[row, base_index[name]] = value
    provenance = [
        frozenset({constraint.provenance}) for constraint in constraints
    ]
    return AugMatrix(coeffs, rhs, provenance, tuple(col_order),
                     tuple(base_cols))


def main_columns(cs: ConstraintSet) -> List[int]:
    """Return main-scope unknown ids in matrix column order.

    Literals, then call-site copies, each in creation order, then
    declared variables in declaration order.
    """
    main = cs.main_unknowns()
    return [
        unknown.id for kind in (UnknownKind.LITERAL, UnknownKind.INSTANTIATED,
                                UnknownKind.DECLARED) for unknown in main
        if unknown.kind is kind
    ]


def build_matrix(cs: ConstraintSet) -> AugMatrix:
    """Return the augmented matrix of the main-scope constraints."""
    return encode(cs.constraints, main_columns(cs))


def rref(m: AugMatrix) -> RrefResult:
    """Reduce `m` to reduced row-echelon form with exact arithmetic.

    Columns are scanned left to right, coefficient columns first and then
    the rhs columns, so the whole augmented matrix ends up reduced. Each
    pivot is the first unused row with a non-zero entry; rows that absorb
    a multiple of the pivot row also absorb its provenance.

    Examples
    --------
    >>> m = AugMatrix.create([[2, 0], [0, 3]], [[2, 0], [0, 3]],
    ...                      [frozenset(), frozenset()], [0, 1], ['m', 's'])
    >>> result = rref(m)
    >>> result.matrix.coeffs.tolist() == [[1, 0], [0, 1]]
    True
    >>> result.matrix.rhs.tolist() == [[1, 0], [0, 1]]
    True
    >>> result.pivots, result.free_cols
    ({0: 0, 1: 1}, ())
    """
    n_rows, n_coeffs = m.coeffs.shape
    aug = np.concatenate([m.coeffs, m.rhs], axis=1)
    provenance = list(m.provenance)
    pivots: Dict[int, int] = {}
    row = 0
    for col in range(aug.shape[1]):
        if row >= n_rows:
            break
        candidates = [r for r in range(row, n_rows) if aug[r, col] != 0]
        if not candidates:
            continue
        found = candidates[0]
        if found != row:
            aug[[row, found]] = aug[[found, row]]
            provenance[row], provenance[found] = (provenance[found],
                                                  provenance[row])
        aug[row] = aug[row] / aug[row, col]
        for other in range(n_rows):
            if other != row and aug[other, col] != 0:
                aug[other] = aug[other] - aug[other, col] * aug[row]
                provenance[other] = provenance[other] | provenance[row]
        if col < n_coeffs:
            pivots[col] = row
        row += 1
    reduced = AugMatrix(aug[:, :n_coeffs], aug[:, n_coeffs:], provenance,
                        m.col_order, m.base_cols)
    free_cols = tuple(col for col in range(n_coeffs) if col not in pivots)
    inconsistent_rows = tuple(
        r for r in range(n_rows) if not np.any(reduced.coeffs[r] != 0)
        and np.any(reduced.rhs[r] != 0))
    logger.debug('rref of %dx%d matrix: rank %d, %d free, %d inconsistent',
                 n_rows, n_coeffs, len(pivots), len(free_cols),
                 len(inconsistent_rows))
    return RrefResult(reduced, pivots, free_cols, inconsistent_rows)


def _sorted_tags(tags: FrozenSet[ProvenanceTag]) -> Tuple[ProvenanceTag, ...]:
    return tuple(sorted(tags, key=ProvenanceTag.sort_key))


def classify(r: RrefResult) -> SolveOutcome:
    """Turn a reduced matrix into a solve outcome.

    Inconsistent rows become conflicts sorted by their first span.
    Otherwise every pivot unknown is its row's rhs divided by the row's
    free-column terms, and every free unknown is itself.
    """
    m = r.matrix
    if r.inconsistent_rows:
        conflicts = [
            Conflict(_sorted_tags(m.provenance[row]), m.row_unit(row))
            for row in r.inconsistent_rows
        ]
        conflicts.sort(key=lambda conflict: conflict.spans)
        return Inconsistent(tuple(conflicts))
    free = tuple(m.col_order[col] for col in r.free_cols)
    assignments = {
        uid: SymbolicUnit(units.DIMENSIONLESS, ((uid, Fraction(1)), ))
        for uid in free
    }
    for col, row in r.pivots.items():
        terms = tuple((m.col_order[other], -m.coeffs[row, other])
                      for other in r.free_cols if m.coeffs[row, other] != 0)
        assignments[m.col_order[col]] = SymbolicUnit(m.row_unit(row), terms)
    return Consistent(assignments, free)


def solve(cs: ConstraintSet) -> Tuple[RrefResult, SolveOutcome]:
    """Solve the main-scope constraints of `cs`."""
    result = rref(build_matrix(cs))
    return result, classify(result)


def critical_variables(outcome: SolveOutcome,
                       cs: ConstraintSet) -> List[Tuple[str, Span]]:
    """Return the main-scope declared variables left free, by name.

    Raises
    ------
    CalledOnInconsistent
        If `outcome` is `Inconsistent`.
    """
    if isinstance(outcome, Inconsistent):
        raise CalledOnInconsistent(
            'critical variables of an inconsistent system')
    critical = []
    for uid in outcome.free:
        unknown = cs.unknowns[uid]
        if unknown.kind is UnknownKind.DECLARED and unknown.scope is None:
            critical.append((unknown.name, unknown.span))
    return sorted(critical)


def unit_var_names() -> Iterator[str]:
    """Yield `a`, `b`, ..., `z`, `a1`, `b1`, ...

    Examples
    --------
    >>> names = unit_var_names()
    >>> [next(names) for _ in range(3)]
    ['a', 'b', 'c']
    """
    for suffix in itertools.chain([''], map(str, itertools.count(1))):
        for letter in string.ascii_lowercase:
            yield letter + suffix


def template_columns(template: FunctionTemplate) -> List[int]:
    """Return template unknowns in matrix column order.

    Literals, call-site copies and locals, then the result, then the
    parameters, then the annotated unit-variables. Parameters to the
    right of the result stay free, so the result is expressed through
    them.
    """
    tail = [template.result, *template.params, *template.unit_vars]
    head = [uid for uid in template.unknowns if uid not in set(tail)]
    return head + tail


def solve_template(template: FunctionTemplate,
                   cs: ConstraintSet) -> TemplateOutcome:
    """Solve one function body in isolation.

    A unit-variable written in an annotation must stay free; one the body
    pins down is reported as a conflict.
    """
    result = rref(encode(template.constraints, template_columns(template)))
    outcome = classify(result)
    if isinstance(outcome, Inconsistent):
        return outcome
    m = result.matrix
    rigid = []
    for uid in template.unit_vars:
        if uid in outcome.free:
            continue
        row = result.pivots[m.col_order.index(uid)]
        rigid.append(
            Conflict(
                _sorted_tags(m.provenance[row]), units.DIMENSIONLESS,
                f'unit-variable {cs.unknowns[uid].name} is more '
                f'polymorphic than the body of {template.name} allows'))
    if rigid:
        return Inconsistent(tuple(rigid))
    # Annotated unit-variables keep their written letter; new ones skip it.
    letters: Dict[int, str] = {
        uid: cs.unknowns[uid].name[1:]
        for uid in template.unit_vars
    }
    taken = set(letters.values())
    names = (name for name in unit_var_names() if name not in taken)

    def to_unit(uid: int) -> UnitNorm:
        assignment = outcome.assignments[uid]
        for free_id, _ in assignment.terms:
            if free_id not in letters:
                letters[free_id] = next(names)
        return units.unit_mul(
            assignment.base,
            UnitNorm.create(vars={
                letters[free_id]: value
                for free_id, value in assignment.terms
            }))

    params = tuple(
        (cs.unknowns[uid].name, to_unit(uid)) for uid in template.params)
    spec = FunctionSpec(
        template.name, params, to_unit(template.result),
        tuple((cs.unknowns[uid].name, to_unit(uid))
              for uid in template.locals))
    logger.debug('function %s: %s', template.name, spec)
    return spec


def solve_templates(cs: ConstraintSet) -> Dict[str, TemplateOutcome]:
    """Solve every function template independently of its call sites.

    Examples
    --------
    >>> from unitscheck.constraints import gen_constraints
    >>> from unitscheck.frontend.parser import parse_source
    >>> program = parse_source(
    ...     'contains\\nreal function sqr(y)\\n  sqr = y * y\\nend function\\n')
    >>> spec = solve_templates(gen_constraints(program))['sqr']
    >>> units.unit_render(spec.result), units.unit_render(spec.params[0][1])
    ("('a)**2", "'a")
    """
    return {
        name: solve_template(template, cs)
        for name, template in cs.templates.items()
    }
