import pathlib

import pytest

from unitscheck import analysis

FIXTURES = pathlib.Path(__file__).parent / 'fixtures'
CORPUS = sorted((FIXTURES / 'corpus').glob('*.f90'))


@pytest.fixture
def fixtures_dir(monkeypatch):
    monkeypatch.chdir(FIXTURES)
    yield FIXTURES


@pytest.fixture
def analyze(fixtures_dir):
    """Analyse a fixture by its path relative to `tests/fixtures`."""

    def _analyze(name: str) -> analysis.Analysis:
        return analysis.analyze_file(name)

    yield _analyze


@pytest.fixture
def source(fixtures_dir):

    def _source(name: str) -> str:
        return (fixtures_dir / name).read_bytes().decode('utf-8')

    yield _source
