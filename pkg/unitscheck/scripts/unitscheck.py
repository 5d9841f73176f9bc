import concurrent.futures
import dataclasses
import enum
import logging
import pathlib
from typing import Optional, Tuple

import click

from unitscheck import reporting
from unitscheck.analysis import Analysis
from unitscheck.analysis import analyze_file
from unitscheck.errors import UnitsError

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FOUND = 1
EXIT_ERROR = 2


class Mode(enum.Enum):
    SUGGEST = 'suggest'
    INFER = 'infer'
    CHECK = 'check'
    SYNTH = 'synth'


@dataclasses.dataclass(frozen=True)
class CliConfig:
    """Parsed command line of one run.

    Parameters
    ----------
    mode : Mode
        Analysis to run.
    files : tuple of str
        Source files, analysed independently in this order.
    json : bool
        Print one JSON document per file instead of text.
    in_place : bool
        Synth only: rewrite the files themselves.
    output_path : str, optional
        Synth only: write the rewritten file there.
    show_burden : bool
        Suggest only: add the annotation-burden footer.
    verbosity : int
        0 logs warnings, 1 info, 2 and more debug.
    jobs : int
        Worker threads.
    """
    mode: Mode
    files: Tuple[str, ...]
    json: bool = False
    in_place: bool = False
    output_path: Optional[str] = None
    show_burden: bool = False
    verbosity: int = 0
    jobs: int = 1


@dataclasses.dataclass(frozen=True)
class FileResult:
    stdout: str = ''
    stderr: str = ''
    code: int = EXIT_OK


def _launch_cli_config_verify(config: CliConfig):
    if not config.files:
        raise click.UsageError('至少需要一个源文件')
    if config.in_place and config.output_path is not None:
        raise click.UsageError('--in-place 与 --output 不能同时使用')
    if config.output_path is not None and len(config.files) > 1:
        raise click.UsageError('--output 只能用于单个源文件')
    if config.jobs < 1:
        raise click.UsageError('--jobs 应不小于 1')


def _report_text(config: CliConfig, report: reporting.Report,
                 text: str) -> str:
    if config.json:
        return reporting.emit_json(report) + '\n'
    return text + '\n' if text else ''


def _inconsistent(config: CliConfig, analysis: Analysis) -> FileResult:
    report = reporting.make_check_report(analysis)
    return FileResult(
        _report_text(config, report, reporting.render_check(report)),
        code=EXIT_FOUND)


def _write_synthesized(config: CliConfig, path: str,
                       plan: reporting.RewritePlan) -> Optional[str]:
    """Write the rewritten text, returning it when it goes to stdout."""
    text = plan.render()
    if config.in_place:
        target = pathlib.Path(path)
    elif config.output_path is not None:
        target = pathlib.Path(config.output_path)
    else:
        return text
    target.write_bytes(text.encode('utf-8'))
    logger.info('wrote %s', target)
    return None


def analyze_one(config: CliConfig, path: str) -> FileResult:
    """Run the configured mode on one file."""
    try:
        analysis = analyze_file(path)
        if config.mode is Mode.CHECK:
            report = reporting.make_check_report(analysis)
            code = (EXIT_OK if report.verdict is reporting.Verdict.CONSISTENT
                    else EXIT_FOUND)
            return FileResult(
                _report_text(config, report, reporting.render_check(report)),
                code=code)
        if not analysis.is_consistent():
            return _inconsistent(config, analysis)
        if config.mode is Mode.SUGGEST:
            report = reporting.make_suggest_report(analysis,
                                                   config.show_burden)
            return FileResult(
                _report_text(config, report,
                             reporting.render_suggest(report)),
                code=EXIT_FOUND if report.count else EXIT_OK)
        inferred = reporting.make_infer_report(analysis)
        if config.mode is Mode.INFER:
            return FileResult(
                _report_text(config, inferred,
                             reporting.render_infer(inferred)))
        plan = reporting.synthesize(analysis.program, inferred)
        text = _write_synthesized(config, path, plan)
        if config.json:
            return FileResult(reporting.emit_json(plan) + '\n')
        return FileResult(text or '')
    except UnitsError as e:
        return FileResult(stderr=str(e), code=EXIT_ERROR)
    except (OSError, UnicodeDecodeError) as e:
        return FileResult(stderr=f'{path}: {e}', code=EXIT_ERROR)


def run(config: CliConfig) -> int:
    """Analyse every file and print the reports in argument order.

    Returns
    -------
    int
        Largest exit code over the files.
    """
    _launch_cli_config_verify(config)
    with concurrent.futures.ThreadPoolExecutor(
            max_workers=config.jobs) as executor:
        results = list(
            executor.map(lambda path: analyze_one(config, path),
                         config.files))
    for result in results:
        if result.stdout:
            click.echo(result.stdout, nl=False)
        if result.stderr:
            click.echo(result.stderr, err=True)
    return max(result.code for result in results)


def _configure_logging(verbosity: int):
    level = {0: logging.WARNING, 1: logging.INFO}.get(verbosity, logging.DEBUG)
    logging.basicConfig(format='%(levelname)s %(name)s: %(message)s',
                        level=level)


def _invoke(ctx: click.Context, mode: Mode, files, **kwargs):
    obj = ctx.obj or {}
    config = CliConfig(mode=mode,
                       files=tuple(files),
                       verbosity=obj.get('verbosity', 0),
                       jobs=obj.get('jobs', 1),
                       **kwargs)
    ctx.exit(run(config))


_files_argument = click.argument('files',
                                 nargs=-1,
                                 required=True,
                                 type=click.Path(exists=True,
                                                 dir_okay=False))
_json_option = click.option('--json',
                            'as_json',
                            is_flag=True,
                            help='以 JSON 格式输出, 每个文件一行')


@click.group()
@click.version_option(package_name='unitscheck')
@click.option('--verbose', '-v', count=True, help='日志详细程度, 可重复')
@click.option('--jobs',
              '-j',
              type=int,
              default=1,
              show_default=True,
              help='并行分析的线程数')
@click.pass_context
def unitscheck(ctx, verbose, jobs):
    """迷你 Fortran 程序的物理单位检查工具"""
    ctx.ensure_object(dict)
    ctx.obj['verbosity'] = verbose
    ctx.obj['jobs'] = jobs
    _configure_logging(verbose)


@unitscheck.command()
@_json_option
@click.option('--burden', is_flag=True, help='显示注解负担统计')
@_files_argument
@click.pass_context
def suggest(ctx, as_json, burden, files):
    """列出需要给出单位注解的关键变量"""
    _invoke(ctx, Mode.SUGGEST, files, json=as_json, show_burden=burden)


@unitscheck.command()
@_json_option
@_files_argument
@click.pass_context
def infer(ctx, as_json, files):
    """推断未注解变量的单位"""
    _invoke(ctx, Mode.INFER, files, json=as_json)


@unitscheck.command()
@_json_option
@_files_argument
@click.pass_context
def check(ctx, as_json, files):
    """检查单位注解与代码是否一致"""
    _invoke(ctx, Mode.CHECK, files, json=as_json)


@unitscheck.command()
@_json_option
@click.option('--in-place', '-i', is_flag=True, help='直接改写源文件')
@click.option('--output',
              '-o',
              'output_path',
              type=click.Path(dir_okay=False),
              help='改写后的文件路径')
@_files_argument
@click.pass_context
def synth(ctx, as_json, in_place, output_path, files):
    """将推断出的单位注解插入源代码"""
    _invoke(ctx,
            Mode.SYNTH,
            files,
            json=as_json,
            in_place=in_place,
            output_path=output_path)


for _command in (suggest, infer, check, synth):
    unitscheck.add_command(_command, name=f'units-{_command.name}')
