"""Unit constraint generation.

Each program variable, numeric literal and call-site copy gets an
*unknown* standing for its unit. Expressions fold into linear
combinations of unknowns (`u(a*b) = u(a) + u(b)` in exponent space);
equations are emitted only where units must agree: the operands of `+`
and `-`, assignments, annotations and argument passing.

Every function body becomes a `FunctionTemplate` which is copied afresh
at each call site, so a function such as `sqr` keeps a unit-polymorphic
type.
"""
from __future__ import annotations

import dataclasses
import enum
import logging
from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from unitscheck import units
from unitscheck.errors import ArityMismatch
from unitscheck.errors import PolymorphicAnnotationAtMainScope
from unitscheck.errors import PowExponentError
from unitscheck.errors import RecursionUnsupported
from unitscheck.errors import UnknownFunction
from unitscheck.frontend import syntax
from unitscheck.frontend.syntax import Span
from unitscheck.units import UnitNorm

logger = logging.getLogger(__name__)

LinExpr = Dict[int, Fraction]


class UnknownKind(enum.Enum):
    DECLARED = 'declared variable'
    LITERAL = 'literal'
    INSTANTIATED = 'call-site copy'
    PARAM = 'parameter'
    RESULT = 'function result'
    UNIT_VAR = 'unit variable'


@dataclasses.dataclass(frozen=True)
class Unknown:
    """Solver variable standing for the unit of something in the source.

    Parameters
    ----------
    id : int
        Unique per analysis run, increasing in creation order.
    kind : UnknownKind
        What the unknown stands for.
    name : str
        Display name.
    span : Span
        Declaration, literal or call site.
    scope : str, optional
        Function owning the unknown, `None` for the main scope.
    origin : int, optional
        Template unknown an `INSTANTIATED` unknown was copied from.
    """
    id: int
    kind: UnknownKind
    name: str
    span: Span
    scope: Optional[str] = None
    origin: Optional[int] = None


class ProvenanceReason(enum.Enum):
    ADDITION_OPERANDS = 'addition operands'
    SUBTRACTION_OPERANDS = 'subtraction operands'
    ASSIGNMENT = 'assignment'
    ANNOTATION_BINDING = 'annotation'
    ARGUMENT_PASSING = 'argument passing'
    RESULT_BINDING = 'result assignment'
    POW_EXPONENT = 'power exponent'


@dataclasses.dataclass(frozen=True)
class ProvenanceTag:
    span: Span
    reason: ProvenanceReason

    def sort_key(self):
        return self.span, self.reason.value


@dataclasses.dataclass(frozen=True)
class Constraint:
    """Linear equation `prod(unit(u) ** coeff) == rhs`.

    `terms` is sorted by unknown id and never empty; `rhs` mentions base
    units only.
    """
    terms: Tuple[Tuple[int, Fraction], ...]
    rhs: UnitNorm
    provenance: ProvenanceTag

    @classmethod
    def create(cls, terms: Mapping[int, Fraction], rhs: UnitNorm,
               provenance: ProvenanceTag) -> Constraint:
        return cls(
            tuple(
                sorted((uid, Fraction(value))
                       for uid, value in terms.items()
                       if value != 0)), rhs, provenance)

    def renamed(self, mapping: Mapping[int, int]) -> Constraint:
        return Constraint.create(
            {mapping[uid]: value
             for uid, value in self.terms}, self.rhs, self.provenance)


@dataclasses.dataclass(frozen=True)
class FunctionTemplate:
    """Constraints of one function body over template-local unknowns.

    Parameters
    ----------
    name : str
        Function name.
    params : tuple of int
        Parameter unknowns in order.
    result : int
        Result unknown.
    constraints : tuple of Constraint
        Body constraints in source order.
    locals : tuple of int
        Local declared-variable unknowns in declaration order.
    unit_vars : tuple of int
        Unknowns of the unit-variables written in the function's
        annotations, in first-mention order.
    unknowns : tuple of int
        Every template-local unknown in creation order.
    """
    name: str
    params: Tuple[int, ...]
    result: int
    constraints: Tuple[Constraint, ...]
    locals: Tuple[int, ...]
    unit_vars: Tuple[int, ...]
    unknowns: Tuple[int, ...]


@dataclasses.dataclass
class ConstraintSet:
    """Main-scope constraints plus one template per function."""
    constraints: List[Constraint] = dataclasses.field(default_factory=list)
    unknowns: Dict[int, Unknown] = dataclasses.field(default_factory=dict)
    templates: Dict[str,
                    FunctionTemplate] = dataclasses.field(default_factory=dict)
    declared: Dict[str, int] = dataclasses.field(default_factory=dict)

    def fresh(self,
              kind: UnknownKind,
              name: str,
              span: Span,
              scope: Optional[str] = None,
              origin: Optional[int] = None) -> Unknown:
        unknown = Unknown(len(self.unknowns), kind, name, span, scope, origin)
        self.unknowns[unknown.id] = unknown
        return unknown

    def main_unknowns(self) -> List[Unknown]:
        return [
            unknown for unknown in self.unknowns.values()
            if unknown.scope is None
        ]


class _Generator:
    """Emit the constraints of one scope into `sink`."""

    def __init__(self,
                 cs: ConstraintSet,
                 program: syntax.Program,
                 names: Mapping[str, int],
                 sink: List[Constraint],
                 scope: Optional[str] = None,
                 unit_vars: Optional[Mapping[str, int]] = None):
        self._cs = cs
        self._program = program
        self._names = names
        self._sink = sink
        self._scope = scope
        self._unit_vars = unit_vars or {}
        self.created: List[int] = []

    def fresh(self,
              kind: UnknownKind,
              name: str,
              span: Span,
              origin: Optional[int] = None) -> Unknown:
        unknown = self._cs.fresh(kind, name, span, self._scope, origin)
        self.created.append(unknown.id)
        return unknown

    def emit(self, lhs: LinExpr, rhs: LinExpr, ground: UnitNorm,
             span: Span, reason: ProvenanceReason):
        terms = dict(lhs)
        for uid, value in rhs.items():
            terms[uid] = terms.get(uid, Fraction(0)) - value
        constraint = Constraint.create(terms, ground,
                                       ProvenanceTag(span, reason))
        if constraint.terms:
            self._sink.append(constraint)

    def statement(self, stmt: syntax.Stmt):
        if isinstance(stmt, syntax.Decl):
            for item in stmt.items:
                if item.init is not None:
                    self.assign(item.name, item.init,
                                item.span.until(item.init.span))
        elif isinstance(stmt, syntax.Annotation):
            self.annotation(stmt)
        else:
            self.assign(stmt.target, stmt.value, stmt.span)

    def assign(self, target: str, value: syntax.Expr, span: Span):
        reason = (ProvenanceReason.RESULT_BINDING
                  if target == self._scope else ProvenanceReason.ASSIGNMENT)
        self.emit({self._names[target]: Fraction(1)}, self.expr(value),
                  units.DIMENSIONLESS, span, reason)

    def annotation(self, stmt: syntax.Annotation):
        unit = units.unit_normalize(stmt.spec)
        if unit.vars and self._scope is None:
            raise PolymorphicAnnotationAtMainScope(
                'unit-variables are only allowed inside functions', stmt.span)
        variables = {
            self._unit_vars[name]: value
            for name, value in unit.vars
        }
        ground = UnitNorm(base=unit.base)
        for name, span in stmt.names:
            self.emit({self._names[name]: Fraction(1)}, variables, ground,
                      span, ProvenanceReason.ANNOTATION_BINDING)

    def expr(self, expr: syntax.Expr) -> LinExpr:
        if isinstance(expr, syntax.NumLit):
            return {self.fresh(UnknownKind.LITERAL, expr.text,
                               expr.span).id: Fraction(1)}
        if isinstance(expr, syntax.Var):
            return {self._names[expr.name]: Fraction(1)}
        if isinstance(expr, syntax.Neg):
            return self.expr(expr.operand)
        if isinstance(expr, syntax.Pow):
            exponent = syntax.integer_exponent(expr.exponent)
            if exponent is None:
                raise PowExponentError(
                    f'{ProvenanceReason.POW_EXPONENT.value} must be an '
                    f'integer literal', expr.exponent.span)
            return _scale(self.expr(expr.base), Fraction(exponent))
        if isinstance(expr, syntax.Call):
            return {self.call(expr): Fraction(1)}
        lhs = self.expr(expr.lhs)
        rhs = self.expr(expr.rhs)
        if isinstance(expr, syntax.Mul):
            return _add(lhs, rhs, Fraction(1))
        if isinstance(expr, syntax.Div):
            return _add(lhs, rhs, Fraction(-1))
        reason = (ProvenanceReason.ADDITION_OPERANDS if isinstance(
            expr, syntax.Add) else ProvenanceReason.SUBTRACTION_OPERANDS)
        self.emit(lhs, rhs, units.DIMENSIONLESS, expr.span, reason)
        return lhs

    def call(self, call: syntax.Call) -> int:
        template = self._cs.templates.get(call.callee)
        if template is None:
            raise UnknownFunction(f'unknown function {call.callee!r}',
                                  call.span)
        args = [(self.expr(arg), arg.span) for arg in call.args]
        return self.instantiate(template, args, call.span)

    def instantiate(self, template: FunctionTemplate,
                    args: Sequence[Tuple[LinExpr, Span]],
                    call_span: Span) -> int:
        if len(args) != len(template.params):
            raise ArityMismatch(
                f'{template.name} takes {len(template.params)} arguments, '
                f'{len(args)} given', call_span)
        mapping = {}
        for uid in template.unknowns:
            origin = self._cs.unknowns[uid]
            copy = self.fresh(
                UnknownKind.INSTANTIATED,
                f'{origin.name}@{call_span.line}:{call_span.column}',
                call_span,
                origin=uid)
            mapping[uid] = copy.id
        for constraint in template.constraints:
            self._sink.append(constraint.renamed(mapping))
        for (arg, span), param in zip(args, template.params):
            self.emit(arg, {mapping[param]: Fraction(1)},
                      units.DIMENSIONLESS, span,
                      ProvenanceReason.ARGUMENT_PASSING)
        return mapping[template.result]


def _add(a: LinExpr, b: LinExpr, scale: Fraction) -> LinExpr:
    total = dict(a)
    for uid, value in b.items():
        total[uid] = total.get(uid, Fraction(0)) + scale * value
    return {uid: value for uid, value in total.items() if value != 0}


def _scale(a: LinExpr, scale: Fraction) -> LinExpr:
    return {uid: scale * value for uid, value in a.items() if scale != 0}


def instantiate_template(template: FunctionTemplate, args: Sequence[Unknown],
                         call_span: Span, out: ConstraintSet) -> Unknown:
    """Copy `template` into the main set of `out` for one call site.

    Every template-local unknown is copied to a fresh `INSTANTIATED`
    unknown, the body constraints are copied over the copies, and each
    argument is equated with its parameter copy.

    Returns
    -------
    Unknown
        The copy of the result unknown.

    Raises
    ------
    ArityMismatch
        If `args` and the template's parameters differ in length.
    """
    generator = _Generator(out, None, {}, out.constraints)
    result = generator.instantiate(
        template, [({arg.id: Fraction(1)}, call_span) for arg in args],
        call_span)
    return out.unknowns[result]


def _called_functions(func: syntax.FuncDef) -> List[syntax.Call]:
    calls = []
    stack: List[syntax.Expr] = []
    for stmt in func.body:
        if isinstance(stmt, syntax.Decl):
            stack.extend(item.init for item in stmt.items
                         if item.init is not None)
        elif isinstance(stmt, syntax.Assign):
            stack.append(stmt.value)
    while stack:
        node = stack.pop()
        if isinstance(node, syntax.Call):
            calls.append(node)
            stack.extend(node.args)
        elif isinstance(node, syntax.Neg):
            stack.append(node.operand)
        elif isinstance(node, syntax.Pow):
            stack.extend([node.base, node.exponent])
        elif not isinstance(node, (syntax.NumLit, syntax.Var)):
            stack.extend([node.lhs, node.rhs])
    return calls


def _template_order(program: syntax.Program) -> List[syntax.FuncDef]:
    """Return functions so that callees precede their callers.

    Raises
    ------
    RecursionUnsupported
        On a direct or mutual recursive call.
    """
    order: List[syntax.FuncDef] = []
    state: Dict[str, str] = {}

    def visit(func: syntax.FuncDef, via: Optional[syntax.Call]):
        if state.get(func.name) == 'done':
            return
        if state.get(func.name) == 'active':
            raise RecursionUnsupported(
                f'recursive call of {func.name!r} is not supported', via.span)
        state[func.name] = 'active'
        for call in _called_functions(func):
            callee = program.function(call.callee)
            if callee is not None:
                visit(callee, call)
        state[func.name] = 'done'
        order.append(func)

    for func in program.functions:
        visit(func, None)
    return order


def _generate_template(cs: ConstraintSet, program: syntax.Program,
                       func: syntax.FuncDef) -> FunctionTemplate:
    owner: List[int] = []

    def fresh(kind, name, span):
        unknown = cs.fresh(kind, name, span, func.name)
        owner.append(unknown.id)
        return unknown.id

    names = {func.name: fresh(UnknownKind.RESULT, func.name, func.span)}
    params = []
    for name, span in func.params:
        names[name] = fresh(UnknownKind.PARAM, name, span)
        params.append(names[name])
    local_ids = []
    for item in func.local_items():
        names[item.name] = fresh(UnknownKind.DECLARED, item.name, item.span)
        local_ids.append(names[item.name])
    unit_vars: Dict[str, int] = {}
    for stmt in func.body:
        if isinstance(stmt, syntax.Annotation):
            for name in syntax.iter_unit_vars(stmt.spec):
                if name not in unit_vars:
                    unit_vars[name] = fresh(UnknownKind.UNIT_VAR, f"'{name}",
                                            stmt.span)
    body: List[Constraint] = []
    generator = _Generator(cs, program, names, body, func.name, unit_vars)
    for stmt in func.body:
        generator.statement(stmt)
    return FunctionTemplate(name=func.name,
                            params=tuple(params),
                            result=names[func.name],
                            constraints=tuple(body),
                            locals=tuple(local_ids),
                            unit_vars=tuple(unit_vars.values()),
                            unknowns=tuple(owner + generator.created))


def gen_constraints(program: syntax.Program) -> ConstraintSet:
    """Generate the unit constraints of a resolved program.

    Functions become templates (callees before callers); main-scope
    statements are generated in source order, instantiating a template at
    every call.

    Raises
    ------
    ArityMismatch, UnknownFunction
        On a bad call.
    PolymorphicAnnotationAtMainScope
        On a unit-variable outside a function.
    RecursionUnsupported
        On recursive calls.
    PowExponentError
        On `**` with a non-integer-literal exponent.
    """
    cs = ConstraintSet()
    for func in _template_order(program):
        cs.templates[func.name] = _generate_template(cs, program, func)
    for item in program.main_items():
        cs.declared[item.name] = cs.fresh(UnknownKind.DECLARED, item.name,
                                          item.span).id
    generator = _Generator(cs, program, cs.declared, cs.constraints)
    for stmt in program.statements:
        generator.statement(stmt)
    logger.debug('%s: %d unknowns, %d main constraints, %d templates',
                 program.file, len(cs.unknowns), len(cs.constraints),
                 len(cs.templates))
    return cs
