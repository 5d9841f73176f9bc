"""Suggest, infer and check reports, and specification synthesis.

The text formats are fixed: suggest lists one critical variable per
line, infer lines are copy-pastable annotations, and
synthesis only ever inserts `!= unit(...) :: name` lines.
"""
from __future__ import annotations

import dataclasses
import enum
import json
import logging
import re
from fractions import Fraction
from typing import Dict, List, Optional, Tuple, Union

from unitscheck import solver
from unitscheck import units
from unitscheck.analysis import Analysis
from unitscheck.constraints import ProvenanceTag
from unitscheck.errors import RefusesOnInconsistent
from unitscheck.frontend.syntax import Program
from unitscheck.frontend.syntax import Span
from unitscheck.units import UnitNorm

logger = logging.getLogger(__name__)


@dataclasses.dataclass(frozen=True)
class AnnotationBurden:
    """How much of the annotation work inference saves.

    Parameters
    ----------
    total : int
        Declared variables over all scopes.
    critical : int
        Variables suggested for annotation.
    ratio : Fraction, optional
        `1 - critical / total`, `None` when nothing is declared.
    """
    total: int
    critical: int
    ratio: Optional[Fraction]

    def render(self) -> str:
        """Return the suggest footer line.

        Examples
        --------
        >>> AnnotationBurden(5, 2, Fraction(3, 5)).render()
        '    annotation burden: 2 critical of 5 declared variables, reduction 0.6'
        """
        ratio = 'n/a' if self.ratio is None else f'{float(self.ratio):.4g}'
        return (f'    annotation burden: {self.critical} critical of '
                f'{self.total} declared variables, reduction {ratio}')


@dataclasses.dataclass(frozen=True)
class SuggestReport:
    file: str
    entries: Tuple[Tuple[str, Span], ...]
    burden: Optional[AnnotationBurden] = None

    @property
    def count(self) -> int:
        return len(self.entries)


@dataclasses.dataclass(frozen=True)
class InferEntry:
    """Inferred unit of one variable.

    `span` anchors the entry: the declaration, or the function header
    for results and undeclared parameters. `scope` is the owning function
    or `None`.
    """
    name: str
    span: Span
    unit: UnitNorm
    scope: Optional[str] = None

    @property
    def text(self) -> str:
        return units.unit_render(self.unit)

    @property
    def polymorphic(self) -> bool:
        return self.unit.is_polymorphic()


@dataclasses.dataclass(frozen=True)
class InferReport:
    """Inferred units of the variables the user did not annotate.

    An inconsistent file yields `consistent=False` and no entries.
    """
    file: str
    entries: Tuple[InferEntry, ...]
    unresolved: Tuple[Tuple[str, Span], ...]
    consistent: bool = True


class Verdict(enum.Enum):
    CONSISTENT = 'consistent'
    INCONSISTENT = 'inconsistent'


@dataclasses.dataclass(frozen=True)
class ReportedConflict:
    message: str
    provenance: Tuple[ProvenanceTag, ...]

    @property
    def spans(self) -> Tuple[Span, ...]:
        return tuple(tag.span for tag in self.provenance)


@dataclasses.dataclass(frozen=True)
class CheckReport:
    file: str
    verdict: Verdict
    conflicts: Tuple[ReportedConflict, ...] = ()


@dataclasses.dataclass(frozen=True)
class Insertion:
    before_line: int
    indent: str
    text: str


@dataclasses.dataclass(frozen=True)
class RewritePlan:
    """Annotation lines to insert into the original source lines."""
    file: str
    insertions: Tuple[Insertion, ...]
    original_lines: Tuple[str, ...]

    def render(self) -> str:
        """Return the rewritten text; existing lines are kept byte for byte."""
        ending = detect_line_ending(self.original_lines)
        pending: Dict[int, List[Insertion]] = {}
        for insertion in self.insertions:
            pending.setdefault(insertion.before_line, []).append(insertion)
        out = []
        for number, line in enumerate(self.original_lines, start=1):
            for insertion in pending.get(number, []):
                out.append(insertion.indent + insertion.text + ending)
            out.append(line)
        return ''.join(out)


Report = Union[SuggestReport, InferReport, CheckReport, RewritePlan]


def detect_line_ending(lines: Tuple[str, ...]) -> str:
    r"""Return the dominant line ending, `\n` on a tie.

    Examples
    --------
    >>> detect_line_ending(('a\r\n', 'b\r\n', 'c\n'))
    '\r\n'
    >>> detect_line_ending(())
    '\n'
    """
    crlf = sum(1 for line in lines if line.endswith('\r\n'))
    lf = sum(1 for line in lines if line.endswith('\n')) - crlf
    return '\r\n' if crlf > lf else '\n'


def annotation_burden(p: Program, suggest: SuggestReport) -> AnnotationBurden:
    """Return the annotation burden of `p` given its suggestions."""
    total = p.count_declared()
    ratio = 1 - Fraction(suggest.count, total) if total else None
    return AnnotationBurden(total, suggest.count, ratio)


def make_suggest_report(analysis: Analysis,
                        burden: bool = False) -> SuggestReport:
    """Return the critical variables of a consistent analysis.

    Raises
    ------
    CalledOnInconsistent
        If the main-scope constraints are inconsistent.
    """
    entries = tuple(
        solver.critical_variables(analysis.outcome, analysis.constraints))
    report = SuggestReport(analysis.file, entries)
    if burden:
        report = dataclasses.replace(report,
                                     burden=annotation_burden(
                                         analysis.program, report))
    return report


def make_infer_report(analysis: Analysis) -> InferReport:
    """Return inferred units of every variable lacking an annotation."""
    if not analysis.is_consistent():
        return InferReport(analysis.file, (), (), consistent=False)
    program = analysis.program
    annotated = program.annotated_names()
    entries = []
    unresolved = []
    for item in program.main_items():
        if item.name in annotated[None]:
            continue
        assignment = analysis.outcome.assignments[
            analysis.constraints.declared[item.name]]
        if assignment.is_ground():
            entries.append(InferEntry(item.name, item.span, assignment.base))
        else:
            unresolved.append((item.name, item.span))
    for func in program.functions:
        spec = analysis.functions[func.name]
        anchors = {name: span for name, span in func.params}
        anchors.update(
            (item.name, item.span) for item in func.declared_items())
        anchors[func.name] = func.span
        for name, unit in spec.units_by_name().items():
            if name not in annotated[func.name]:
                entries.append(
                    InferEntry(name, anchors[name], unit, func.name))
    entries.sort(key=lambda entry: entry.span)
    unresolved.sort(key=lambda pair: pair[1])
    return InferReport(analysis.file, tuple(entries), tuple(unresolved))


def make_check_report(analysis: Analysis) -> CheckReport:
    """Return the verdict and every conflict, each reported once."""
    seen = set()
    conflicts = []
    for function, conflict in analysis.conflicts():
        if conflict.provenance in seen:
            continue
        seen.add(conflict.provenance)
        message = conflict.message()
        if function is not None:
            message = f'in function {function}: {message}'
        conflicts.append(ReportedConflict(message, conflict.provenance))
    verdict = Verdict.INCONSISTENT if conflicts else Verdict.CONSISTENT
    return CheckReport(analysis.file, verdict, tuple(conflicts))


def synthesize(p: Program, inferred: InferReport) -> RewritePlan:
    """Plan the insertion of inferred annotations not already present.

    Each annotation goes on its own line directly above the anchoring
    declaration or function header, indented like it. Names of one
    declaration get one line each, in declaration order.

    Raises
    ------
    RefusesOnInconsistent
        If `inferred` comes from an inconsistent program.
    """
    if not inferred.consistent:
        raise RefusesOnInconsistent(
            f'{p.file}: refusing to synthesize annotations for an '
            f'inconsistent program')
    annotated = p.annotated_names()
    insertions = []
    planned = set()
    for entry in sorted(inferred.entries, key=lambda entry: entry.span):
        key = (entry.scope, entry.name)
        if entry.name in annotated.get(entry.scope, ()) or key in planned:
            continue
        planned.add(key)
        line = p.source_lines[entry.span.line - 1]
        indent = re.match(r'[ \t]*', line).group()
        insertions.append(
            Insertion(entry.span.line, indent,
                      f'!= unit({entry.text}) :: {entry.name}'))
    logger.debug('%s: %d annotations to insert', p.file, len(insertions))
    return RewritePlan(p.file, tuple(insertions), p.source_lines)


def render_suggest(r: SuggestReport) -> str:
    lines = [
        f'{r.file}: {r.count} variable declarations suggested to be given '
        f'a specification:'
    ]
    lines.extend(f'    {span.file} {span.position()}    {name}'
                 for name, span in r.entries)
    if r.burden is not None:
        lines.append(r.burden.render())
    return '\n'.join(lines)


def render_infer(r: InferReport) -> str:
    lines = [
        f'{entry.span.location()}    unit({entry.text}) :: {entry.name}'
        for entry in r.entries
    ]
    if r.unresolved:
        lines.append('underdetermined:')
        lines.extend(f'    {span.location()}    {name}'
                     for name, span in r.unresolved)
    return '\n'.join(lines)


def render_check(r: CheckReport) -> str:
    if r.verdict is Verdict.CONSISTENT:
        return f'{r.file}: consistent'
    count = len(r.conflicts)
    lines = [f'{r.file}: inconsistent, {count} conflicts:']
    for conflict in r.conflicts:
        lines.append(f'    {conflict.message}')
        lines.extend(f'        {tag.span.location()}    {tag.reason.value}'
                     for tag in conflict.provenance)
    return '\n'.join(lines)


def _span_json(name: str, span: Span) -> dict:
    return {'name': name, 'line': span.line, 'column': span.column}


def emit_json(report: Report) -> str:
    """Return a compact JSON document for one file's report.

    Examples
    --------
    >>> emit_json(CheckReport('a.f90', Verdict.CONSISTENT))
    '{"file":"a.f90","mode":"check","verdict":"consistent","conflicts":[]}'
    """
    if isinstance(report, SuggestReport):
        document = {
            'file': report.file,
            'mode': 'suggest',
            'count': report.count,
            'entries': [_span_json(name, span) for name, span in report.entries],
        }
        if report.burden is not None:
            ratio = report.burden.ratio
            document['burden'] = {
                'total': report.burden.total,
                'critical': report.burden.critical,
                'ratio': None if ratio is None else float(ratio),
            }
    elif isinstance(report, InferReport):
        document = {
            'file': report.file,
            'mode': 'infer',
            'entries': [
                dict(_span_json(entry.name, entry.span),
                     unit=entry.text,
                     polymorphic=entry.polymorphic)
                for entry in report.entries
            ],
            'underdetermined': [
                _span_json(name, span) for name, span in report.unresolved
            ],
        }
    elif isinstance(report, CheckReport):
        document = {
            'file': report.file,
            'mode': 'check',
            'verdict': report.verdict.value,
            'conflicts': [{
                'message': conflict.message,
                'spans': [{
                    'line': tag.span.line,
                    'column': tag.span.column,
                    'reason': tag.reason.value,
                } for tag in conflict.provenance],
            } for conflict in report.conflicts],
        }
    else:
        document = {
            'file': report.file,
            'mode': 'synth',
            'insertions': [{
                'line': insertion.before_line,
                'text': insertion.indent + insertion.text,
            } for insertion in report.insertions],
        }
    return json.dumps(document, ensure_ascii=False, separators=(',', ':'))
