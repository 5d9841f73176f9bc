"""Per-file pipeline: parse, generate, solve templates, solve main."""
from __future__ import annotations

import dataclasses
import logging
import pathlib
from typing import Dict, List, Optional, Tuple, Union

from unitscheck import solver
from unitscheck.constraints import ConstraintSet
from unitscheck.constraints import gen_constraints
from unitscheck.frontend.parser import parse_source
from unitscheck.frontend.syntax import Program

logger = logging.getLogger(__name__)


@dataclasses.dataclass(frozen=True)
class Analysis:
    """Everything the report builders need for one file."""
    program: Program
    constraints: ConstraintSet
    functions: Dict[str, solver.TemplateOutcome]
    reduced: solver.RrefResult
    outcome: solver.SolveOutcome

    @property
    def file(self) -> str:
        return self.program.file

    def is_consistent(self) -> bool:
        return not self.conflicts()

    def conflicts(self) -> List[Tuple[Optional[str], solver.Conflict]]:
        """Return conflicts paired with the function they arise in.

        Main-scope conflicts are paired with `None`. Functions follow
        source order.
        """
        found = []
        for func in self.program.functions:
            outcome = self.functions[func.name]
            if isinstance(outcome, solver.Inconsistent):
                found.extend((func.name, conflict)
                             for conflict in outcome.conflicts)
        if isinstance(self.outcome, solver.Inconsistent):
            found.extend((None, conflict)
                         for conflict in self.outcome.conflicts)
        return found


def analyze_program(program: Program) -> Analysis:
    cs = gen_constraints(program)
    functions = solver.solve_templates(cs)
    reduced, outcome = solver.solve(cs)
    return Analysis(program, cs, functions, reduced, outcome)


def analyze_source(text: str, file: str = '<string>') -> Analysis:
    """Analyze source text.

    Raises
    ------
    UnitsError
        If the text does not parse or cannot be turned into constraints.
    """
    return analyze_program(parse_source(text, file))


def analyze_file(path: Union[str, pathlib.Path]) -> Analysis:
    """Analyze a UTF-8 file, keeping its line endings untouched."""
    text = pathlib.Path(path).read_bytes().decode('utf-8')
    logger.debug('analyzing %s', path)
    return analyze_source(text, str(path))
