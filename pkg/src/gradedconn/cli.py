"""Command-line interface for graded-connections."""

import json
import logging
import sys
from pathlib import Path
from typing import Any, Optional

import click

from gradedconn import __version__
from gradedconn.config import EngineConfig
from gradedconn.evaluate import evaluate, parse_point
from gradedconn.exceptions import GconnError
from gradedconn.manifest import load_manifest
from gradedconn.report import CheckReport
from gradedconn.suites import EQUATION_IDS, REFERENCES, SUITES, run_suite

logger = logging.getLogger(__name__)


def setup_logging(verbose: bool = False, level: str = "INFO") -> None:
    """Setup logging configuration; logs go to stderr so stdout stays machine-readable."""
    logging.basicConfig(
        level=logging.DEBUG if verbose else getattr(logging, level.upper(), logging.INFO),
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        stream=sys.stderr,
    )


@click.group()
@click.version_option(version=__version__)
@click.option("-v", "--verbose", is_flag=True, help="Enable verbose logging")
@click.option(
    "--config",
    "config_path",
    type=click.Path(exists=True, path_type=Path),
    help="Engine config file (default: config.yml at the project root)",
)
@click.pass_context
def main(ctx: click.Context, verbose: bool, config_path: Optional[Path]) -> None:
    """gconn: verify graded connection identities on a coordinate chart."""
    ctx.ensure_object(dict)
    ctx.obj["verbose"] = verbose
    ctx.obj["config_path"] = config_path
    config = EngineConfig(config_path)
    ctx.obj["config"] = config
    setup_logging(verbose, config.get_log_level())


def _load(ctx: click.Context, manifest_path: Path) -> Any:
    """Load a manifest or exit with code 2."""
    try:
        return load_manifest(manifest_path, ctx.obj["config"])
    except GconnError as e:
        click.echo(f"error: {e}", err=True)
        sys.exit(2)


def _emit_report(report: CheckReport, json_path: Optional[Path], quiet: bool) -> None:
    """Write the JSON-lines report, print a summary to stderr, and exit with the report code."""
    text = report.to_jsonl()
    if json_path:
        json_path.write_text(text + "\n", encoding="utf-8")
    else:
        click.echo(text)

    if not quiet:
        summary = report.summary
        status = "PASS" if report.passed else "FAIL"
        click.echo(
            f"[{status}] {report.manifest_name} suite={report.suite}: "
            f"{summary['pass']} pass, {summary['fail']} fail, {summary['error']} error, "
            f"{summary['info']} info of {summary['total']} row(s)",
            err=True,
        )
        for equation, count in sorted(report.failing_equations().items()):
            worst = report.max_residual(equation)
            click.echo(
                f"  failing: {equation} ({count} row(s), max residual {worst:.3g})", err=True
            )

    sys.exit(report.exit_code())


@main.command()
@click.argument("manifest_path", type=click.Path(exists=True, path_type=Path))
@click.option(
    "--suite",
    "-s",
    type=click.Choice(list(SUITES)),
    default="all",
    show_default=True,
    help="Suite to run",
)
@click.option("--tol", type=float, help="Relative tolerance (overrides manifest and config)")
@click.option(
    "--json",
    "json_path",
    type=click.Path(path_type=Path),
    help="Write the JSON-lines report to this file (default: stdout)",
)
@click.option("--threads", type=int, help="Worker threads (overrides GCONN_THREADS)")
@click.option("--quiet", "-q", is_flag=True, help="Suppress the summary on stderr")
@click.pass_context
def check(
    ctx: click.Context,
    manifest_path: Path,
    suite: str,
    tol: Optional[float],
    json_path: Optional[Path],
    threads: Optional[int],
    quiet: bool,
) -> None:
    """Run a check suite over a manifest; exit 0 iff every row passes."""
    manifest = _load(ctx, manifest_path)
    report = run_suite(manifest, suite, tol=tol, config=ctx.obj["config"], threads=threads)
    _emit_report(report, json_path, quiet)


@main.command("eval")
@click.argument("manifest_path", type=click.Path(exists=True, path_type=Path))
@click.option("--expr", "-e", "text", required=True, help='e.g. "curvature(L(e1), L(e2), i(U))"')
@click.option("--at", "at", required=True, help="Comma-separated point, e.g. 0.5,1.2")
@click.option(
    "--connection",
    "-c",
    default="ss",
    show_default=True,
    help="lc, ss, canonical, dual or lambda=<value>",
)
@click.pass_context
def eval_command(
    ctx: click.Context, manifest_path: Path, text: str, at: str, connection: str
) -> None:
    """Evaluate a derivation or form expression at one point and print JSON."""
    manifest = _load(ctx, manifest_path)
    try:
        point = parse_point(at, manifest.dim)
        result = evaluate(manifest, text, point, connection)
    except GconnError as e:
        click.echo(f"error: {e}", err=True)
        sys.exit(2)
    click.echo(json.dumps(result, indent=2, sort_keys=True))


@main.command()
@click.argument("manifest_path", type=click.Path(exists=True, path_type=Path))
@click.pass_context
def validate(ctx: click.Context, manifest_path: Path) -> None:
    """Validate a manifest without running any suite."""
    manifest = _load(ctx, manifest_path)
    extras = []
    if manifest.parallel_frame is not None:
        extras.append("parallel frame")
    if manifest.distribution is not None:
        extras.append(f"distribution D={[k + 1 for k in manifest.distribution.indices]}")
    detail = f"; {', '.join(extras)}" if extras else ""
    click.echo(
        f"✓ Valid {manifest.name}: dim={manifest.dim}, points={len(manifest.points)}, "
        f"P={manifest.p_text} ({manifest.p_kind}){detail}"
    )


@main.command()
@click.option("--json", "as_json", is_flag=True, help="Print as JSON")
def coverage(as_json: bool) -> None:
    """List the equation ids each suite can emit."""
    if as_json:
        click.echo(json.dumps({k: list(v) for k, v in EQUATION_IDS.items()}, indent=2))
        return
    for suite, equations in EQUATION_IDS.items():
        click.echo(f"{suite} ({len(equations)}):")
        for equation in equations:
            click.echo(f"  {equation:<32} {REFERENCES[equation]}")


if __name__ == "__main__":
    main()
