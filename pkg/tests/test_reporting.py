import json
from fractions import Fraction

import pytest

from tests.conftest import CORPUS
from unitscheck import analysis
from unitscheck import reporting
from unitscheck.errors import RefusesOnInconsistent
from unitscheck.frontend.parser import split_lines


def strip_annotations(text):
    return ''.join(line for line in split_lines(text)
                   if not line.lstrip().startswith('!='))


def synthesized(result: analysis.Analysis) -> str:
    inferred = reporting.make_infer_report(result)
    return reporting.synthesize(result.program, inferred).render()


def test_suggest_sample(analyze):
    report = reporting.make_suggest_report(analyze('sample.f90'))
    assert report.count == 2
    assert reporting.render_suggest(report) == (
        'sample.f90: 2 variable declarations suggested to be given a '
        'specification:\n'
        '    sample.f90 (3:11)    t\n'
        '    sample.f90 (2:11)    x')


def test_suggest_nothing(analyze):
    report = reporting.make_suggest_report(analyze('velocity.f90'))
    assert reporting.render_suggest(report) == (
        'velocity.f90: 0 variable declarations suggested to be given a '
        'specification:')


def test_annotation_burden(analyze):
    report = reporting.make_suggest_report(analyze('sample.f90'), burden=True)
    assert report.burden == reporting.AnnotationBurden(5, 2, Fraction(3, 5))
    assert reporting.render_suggest(report).splitlines()[-1] == (
        '    annotation burden: 2 critical of 5 declared variables, '
        'reduction 0.6')
    empty = reporting.make_suggest_report(
        analyze('corpus/comments_only.f90'), burden=True)
    assert empty.burden.ratio is None
    assert empty.burden.render().endswith('reduction n/a')
    determined = reporting.make_suggest_report(analyze('velocity.f90'),
                                               burden=True)
    assert determined.burden.ratio == 1


def test_infer_annotated_sample(analyze):
    report = reporting.make_infer_report(analyze('sample_annotated.f90'))
    assert [(entry.name, entry.text, entry.polymorphic)
            for entry in report.entries] == [
                ('a', 'm**2', False),
                ('b', 's**2', False),
                ('sqr', "('a)**2", True),
                ('y', "'a", True),
            ]
    assert report.unresolved == ()
    assert reporting.render_infer(report) == (
        'sample_annotated.f90 (1:11)    unit(m**2) :: a\n'
        'sample_annotated.f90 (1:14)    unit(s**2) :: b\n'
        "sample_annotated.f90 (10:17)    unit(('a)**2) :: sqr\n"
        "sample_annotated.f90 (11:13)    unit('a) :: y")


def test_infer_lists_underdetermined(analyze):
    report = reporting.make_infer_report(analyze('sample.f90'))
    assert [entry.name for entry in report.entries] == ['sqr', 'y']
    assert [name for name, _ in report.unresolved] == ['a', 'b', 'x', 't']
    text = reporting.render_infer(report)
    assert text.splitlines()[2:4] == [
        'underdetermined:', '    sample.f90 (1:11)    a'
    ]


def test_infer_velocity(analyze):
    report = reporting.make_infer_report(analyze('velocity.f90'))
    assert reporting.render_infer(report) == (
        'velocity.f90 (5:9)    unit(m / s) :: v')


def test_infer_inconsistent(analyze):
    report = reporting.make_infer_report(analyze('conflict.f90'))
    assert not report.consistent
    assert report.entries == ()


def test_check_reports(analyze):
    consistent = reporting.make_check_report(analyze('annotated_sample.f90'))
    assert consistent.verdict is reporting.Verdict.CONSISTENT
    assert reporting.render_check(consistent) == (
        'annotated_sample.f90: consistent')
    conflict = reporting.make_check_report(analyze('conflict.f90'))
    assert conflict.verdict is reporting.Verdict.INCONSISTENT
    assert reporting.render_check(conflict) == (
        'conflict.f90: inconsistent, 1 conflicts:\n'
        '    units do not match (residual m / s)\n'
        '        conflict.f90 (1:15)    annotation\n'
        '        conflict.f90 (3:15)    annotation\n'
        '        conflict.f90 (6:5)    addition operands')


def test_check_reports_function_conflicts():
    result = analysis.analyze_source('real :: x = 1.0\n'
                                     'real :: y\n'
                                     'y = f(x)\n'
                                     'contains\n'
                                     'real function f(p)\n'
                                     '  != unit(m) :: p\n'
                                     '  != unit(s) :: f\n'
                                     '  f = p\n'
                                     'end function\n')
    report = reporting.make_check_report(result)
    assert report.verdict is reporting.Verdict.INCONSISTENT
    assert report.conflicts[0].message.startswith('in function f: ')
    provenances = [conflict.provenance for conflict in report.conflicts]
    assert len(provenances) == len(set(provenances))


def test_synthesis_reproduces_annotated_sample(analyze, source):
    result = analyze('sample_annotated.f90')
    plan = reporting.synthesize(result.program,
                                reporting.make_infer_report(result))
    assert [(i.before_line, i.indent, i.text) for i in plan.insertions] == [
        (1, '  ', '!= unit(m**2) :: a'),
        (1, '  ', '!= unit(s**2) :: b'),
        (10, '  ', "!= unit(('a)**2) :: sqr"),
        (11, '    ', "!= unit('a) :: y"),
    ]
    assert plan.render() == source('annotated_sample.f90')
    check = reporting.make_check_report(
        analysis.analyze_source(plan.render(), 'annotated_sample.f90'))
    assert check.verdict is reporting.Verdict.CONSISTENT


def test_synthesis_of_complete_file_is_identity(analyze, source):
    assert synthesized(analyze('annotated_sample.f90')) == source(
        'annotated_sample.f90')


def test_synthesis_refuses_inconsistent(analyze):
    result = analyze('conflict.f90')
    with pytest.raises(RefusesOnInconsistent):
        reporting.synthesize(result.program,
                             reporting.make_infer_report(result))


def test_synthesis_keeps_crlf(analyze, source):
    text = synthesized(analyze('corpus/crlf.f90'))
    assert '!= unit(km / h) :: rate\r\n' in text
    assert '!= unit(h**2 / km**2) :: rate2\r\n' in text
    assert all(line.endswith('\r\n') for line in split_lines(text))
    assert strip_annotations(text) == strip_annotations(
        source('corpus/crlf.f90'))


def test_detect_line_ending():
    assert reporting.detect_line_ending(('a\n', 'b\r\n', 'c\n')) == '\n'
    assert reporting.detect_line_ending(('a\r\n',)) == '\r\n'


def test_emit_json(analyze):
    suggest = json.loads(
        reporting.emit_json(
            reporting.make_suggest_report(analyze('sample.f90'), True)))
    assert list(suggest) == ['file', 'mode', 'count', 'entries', 'burden']
    assert [entry['name'] for entry in suggest['entries']] == ['t', 'x']
    assert suggest['burden'] == {'total': 5, 'critical': 2, 'ratio': 0.6}
    infer = json.loads(
        reporting.emit_json(
            reporting.make_infer_report(analyze('sample_annotated.f90'))))
    assert [entry['unit'] for entry in infer['entries']
            ] == ['m**2', 's**2', "('a)**2", "'a"]
    assert infer['underdetermined'] == []
    check = json.loads(
        reporting.emit_json(
            reporting.make_check_report(analyze('conflict.f90'))))
    assert check['verdict'] == 'inconsistent'
    assert [span['line'] for span in check['conflicts'][0]['spans']
            ] == [1, 3, 6]
    result = analyze('sample_annotated.f90')
    plan = reporting.synthesize(result.program,
                                reporting.make_infer_report(result))
    synth = json.loads(reporting.emit_json(plan))
    assert synth['mode'] == 'synth'
    assert synth['insertions'][0] == {
        'line': 1,
        'text': '  != unit(m**2) :: a'
    }
    assert '\n' not in reporting.emit_json(plan)


@pytest.mark.parametrize('path', CORPUS, ids=lambda path: path.name)
def test_corpus_synthesis(path):
    original = path.read_bytes().decode('utf-8')
    result = analysis.analyze_source(original, path.name)
    assert result.is_consistent()
    once = synthesized(result)
    assert strip_annotations(once) == strip_annotations(original)
    assert set(split_lines(original)) <= set(split_lines(once))
    rechecked = analysis.analyze_source(once, path.name)
    assert rechecked.is_consistent()
    assert synthesized(rechecked) == once
    previously_inferred = {
        entry.name
        for entry in reporting.make_infer_report(result).entries
        if entry.scope is None
    }
    suggested = {
        name
        for name, _ in reporting.make_suggest_report(rechecked).entries
    }
    assert not suggested & previously_inferred


def annotate(text, names):
    lines = [f'!= unit(u{k}) :: {name}\n' for k, name in enumerate(names)]
    return ''.join(lines) + text


@pytest.mark.parametrize('path', CORPUS, ids=lambda path: path.name)
def test_corpus_critical_variables(path):
    original = path.read_bytes().decode('utf-8')
    report = reporting.make_suggest_report(
        analysis.analyze_source(original, path.name), burden=True)
    total = report.burden.total
    if total:
        assert report.burden.ratio == 1 - Fraction(report.count, total)
    critical = [name for name, _ in report.entries]
    complete = analysis.analyze_source(annotate(original, critical))
    assert reporting.make_infer_report(complete).unresolved == ()
    for missing in critical:
        rest = [name for name in critical if name != missing]
        partial = analysis.analyze_source(annotate(original, rest))
        unresolved = reporting.make_infer_report(partial).unresolved
        assert missing in [name for name, _ in unresolved]


def test_corpus_size():
    assert len(CORPUS) >= 10
    for path in CORPUS:
        assert len(split_lines(path.read_bytes().decode('utf-8'))) <= 40


@pytest.mark.parametrize('text, expected', [
    ("contains\nreal function sqr(y)\n  != unit('b) :: y\n  sqr = y * y\n"
     'end function\n', {
         'sqr': "('b)**2"
     }),
    ("contains\nreal function g(p, q)\n  != unit('a) :: q\n  g = p * q\n"
     'end function\n', {
         'g': "'a*'b",
         'p': "'b"
     }),
])
def test_synthesis_keeps_written_unit_variables(text, expected):
    result = analysis.analyze_source(text)
    report = reporting.make_infer_report(result)
    assert {entry.name: entry.text for entry in report.entries} == expected
    once = synthesized(result)
    rechecked = analysis.analyze_source(once)
    check = reporting.make_check_report(rechecked)
    assert check.verdict is reporting.Verdict.CONSISTENT
    assert synthesized(rechecked) == once
