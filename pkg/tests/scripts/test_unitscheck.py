import json
import shutil

import pytest

from unitscheck.scripts import unitscheck

SUGGEST_SAMPLE = ('sample.f90: 2 variable declarations suggested to be given '
                  'a specification:\n'
                  '    sample.f90 (3:11)    t\n'
                  '    sample.f90 (2:11)    x\n')

CHECK_CONFLICT = ('conflict.f90: inconsistent, 1 conflicts:\n'
                  '    units do not match (residual m / s)\n'
                  '        conflict.f90 (1:15)    annotation\n'
                  '        conflict.f90 (3:15)    annotation\n'
                  '        conflict.f90 (6:5)    addition operands\n')


@pytest.fixture
def broken(tmp_path):
    path = tmp_path / 'broken.f90'
    path.write_text('real :: x\nx = y\n')
    yield path


def test_suggest(runner, fixtures_dir):
    results = runner.invoke(unitscheck.unitscheck, ['suggest', 'sample.f90'])
    assert results.exit_code == 1
    assert results.output == SUGGEST_SAMPLE
    results = runner.invoke(unitscheck.unitscheck,
                            ['suggest', 'velocity.f90'])
    assert results.exit_code == 0
    assert results.output == ('velocity.f90: 0 variable declarations '
                              'suggested to be given a specification:\n')


def test_suggest_burden(runner, fixtures_dir):
    results = runner.invoke(unitscheck.unitscheck,
                            ['suggest', '--burden', 'sample.f90'])
    assert results.exit_code == 1
    assert results.output == SUGGEST_SAMPLE + (
        '    annotation burden: 2 critical of 5 declared variables, '
        'reduction 0.6\n')


def test_suggest_json(runner, fixtures_dir):
    results = runner.invoke(unitscheck.unitscheck,
                            ['suggest', '--json', 'sample.f90'])
    assert results.exit_code == 1
    document = json.loads(results.stdout)
    assert document['mode'] == 'suggest'
    assert document['count'] == 2
    assert [entry['line'] for entry in document['entries']] == [3, 2]


def test_infer(runner, fixtures_dir):
    results = runner.invoke(unitscheck.unitscheck, ['infer', 'velocity.f90'])
    assert results.exit_code == 0
    assert results.output == 'velocity.f90 (5:9)    unit(m / s) :: v\n'


def test_check(runner, fixtures_dir):
    results = runner.invoke(unitscheck.unitscheck,
                            ['check', 'annotated_sample.f90'])
    assert results.exit_code == 0
    assert results.output == 'annotated_sample.f90: consistent\n'
    results = runner.invoke(unitscheck.unitscheck, ['check', 'conflict.f90'])
    assert results.exit_code == 1
    assert results.output == CHECK_CONFLICT


@pytest.mark.parametrize('mode', ['suggest', 'infer', 'synth'])
def test_inconsistent_file_prints_check_report(runner, fixtures_dir, mode):
    results = runner.invoke(unitscheck.unitscheck, [mode, 'conflict.f90'])
    assert results.exit_code == 1
    assert results.output == CHECK_CONFLICT


def test_synth_to_stdout(runner, source):
    results = runner.invoke(unitscheck.unitscheck,
                            ['synth', 'sample_annotated.f90'])
    assert results.exit_code == 0
    assert results.stdout == source('annotated_sample.f90')


def test_synth_in_place(runner, fixtures_dir, source, tmp_path, monkeypatch):
    shutil.copy(fixtures_dir / 'sample_annotated.f90', tmp_path / 'copy.f90')
    monkeypatch.chdir(tmp_path)
    results = runner.invoke(unitscheck.unitscheck,
                            ['synth', '--in-place', 'copy.f90'])
    assert results.exit_code == 0
    assert results.output == ''
    assert (tmp_path / 'copy.f90').read_text() == source(
        'annotated_sample.f90')


def test_synth_output(runner, source, tmp_path):
    target = tmp_path / 'out.f90'
    results = runner.invoke(
        unitscheck.unitscheck,
        ['synth', '-o', str(target), 'sample_annotated.f90'])
    assert results.exit_code == 0
    assert results.output == ''
    assert target.read_text() == source('annotated_sample.f90')
    assert source('sample_annotated.f90') != source('annotated_sample.f90')


def test_parse_error_exit_code(runner, broken):
    results = runner.invoke(unitscheck.unitscheck, ['check', str(broken)])
    assert results.exit_code == 2
    assert f"{broken} (2:5): unresolved name 'y'" in results.output


@pytest.mark.parametrize('args', [
    ['synth', '-i', '-o', 'out.f90', 'sample_annotated.f90'],
    ['synth', '-o', 'out.f90', 'sample.f90', 'velocity.f90'],
    ['check', 'missing.f90'],
    ['check'],
    ['-j', '0', 'check', 'sample.f90'],
])
def test_usage_errors(runner, fixtures_dir, args):
    results = runner.invoke(unitscheck.unitscheck, args)
    assert results.exit_code == 2


def test_aliases(runner, fixtures_dir):
    results = runner.invoke(unitscheck.unitscheck,
                            ['units-suggest', 'sample.f90'])
    assert results.exit_code == 1
    assert results.output == SUGGEST_SAMPLE
    results = runner.invoke(unitscheck.unitscheck,
                            ['units-check', 'annotated_sample.f90'])
    assert results.exit_code == 0


@pytest.mark.parametrize('jobs', ['1', '2'])
def test_several_files(runner, fixtures_dir, broken, jobs):
    results = runner.invoke(
        unitscheck.unitscheck,
        ['-j', jobs, 'check', 'annotated_sample.f90', 'conflict.f90'])
    assert results.exit_code == 1
    assert results.output == ('annotated_sample.f90: consistent\n'
                              + CHECK_CONFLICT)
    results = runner.invoke(
        unitscheck.unitscheck,
        ['-j', jobs, 'check', 'conflict.f90',
         str(broken), 'velocity.f90'])
    assert results.exit_code == 2
    assert results.stdout == CHECK_CONFLICT + 'velocity.f90: consistent\n'



@pytest.mark.parametrize('args', [
    ['suggest', '--burden', 'sample.f90', 'velocity.f90'],
    ['infer', 'sample.f90', 'sample_annotated.f90'],
    ['check', '--json', 'conflict.f90', 'annotated_sample.f90'],
    ['-j', '2', 'synth', 'sample_annotated.f90', 'velocity.f90'],
])
def test_repeated_runs_are_identical(runner, fixtures_dir, args):
    first = runner.invoke(unitscheck.unitscheck, args)
    second = runner.invoke(unitscheck.unitscheck, args)
    assert first.exit_code == second.exit_code
    assert first.stdout_bytes == second.stdout_bytes


def test_infer_writes_nothing(runner, fixtures_dir, tmp_path, monkeypatch):
    for name in ('sample.f90', 'sample_annotated.f90', 'conflict.f90'):
        shutil.copy(fixtures_dir / name, tmp_path / name)
    monkeypatch.chdir(tmp_path)
    before = {path.name: path.read_bytes() for path in tmp_path.iterdir()}
    results = runner.invoke(
        unitscheck.unitscheck,
        ['infer', 'sample.f90', 'sample_annotated.f90', 'conflict.f90'])
    assert results.exit_code == 1
    after = {path.name: path.read_bytes() for path in tmp_path.iterdir()}
    assert after == before
