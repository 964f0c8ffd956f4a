"""Command-line interface over a labeling project directory.

Exit codes: 0 on success, 1 for user errors (bad input, missing files,
invalid rules), 2 for internal failures. Every failure prints a one-line
diagnostic to stderr; partial output is never left behind because all
writes go through atomic replace.
"""

from __future__ import annotations

import json
import sys
from dataclasses import dataclass
from pathlib import Path

import click

from . import corpus as corpus_mod
from . import ops
from .dsl import LfParseError
from .models import TrainConfig
from .project import Project

USER_ERRORS = (
    ValueError,
    KeyError,
    FileNotFoundError,
    IsADirectoryError,
    NotADirectoryError,
    PermissionError,
)


@dataclass
class CliState:
    root: Path
    seed: int | None
    threshold: float | None

    def project(self) -> Project:
        project = Project(self.root)
        project.require_exists()
        return project


@click.group(name="weaklabel")
@click.option(
    "--project",
    "project_root",
    default=".",
    show_default=True,
    metavar="DIR",
    help="Project directory.",
)
@click.option("--seed", type=int, default=None, help="Random seed (default: the project setting).")
@click.option(
    "--threshold",
    type=float,
    default=None,
    help="Probability cutoff when hardening tag predictions.",
)
@click.pass_context
def cli(ctx: click.Context, project_root: str, seed: int | None, threshold: float | None) -> None:
    """Weak-supervision labeling projects: rules in, labeled datasets out."""
    ctx.obj = CliState(root=Path(project_root), seed=seed, threshold=threshold)


@cli.command()
@click.argument("raw_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--max-tokens", default=corpus_mod.DEFAULT_MAX_TOKENS, show_default=True, type=int)
@click.option("--train-ratio", default=0.8, show_default=True, type=float)
@click.option("--validation-ratio", default=0.1, show_default=True, type=float)
@click.option(
    "--bundled/--no-bundled",
    "include_bundled",
    default=True,
    help="Register the built-in rule sets in the new project.",
)
@click.pass_obj
def ingest(
    state: CliState,
    raw_path: str,
    max_tokens: int,
    train_ratio: float,
    validation_ratio: float,
    include_bundled: bool,
) -> None:
    """Chunk raw articles into a fresh project with train/validation/test splits."""
    project = ops.ingest(
        state.root,
        raw_path,
        max_tokens=max_tokens,
        train_ratio=train_ratio,
        validation_ratio=validation_ratio,
        seed=state.seed if state.seed is not None else 0,
        include_bundled=include_bundled,
    )
    settings = project.state.settings
    docs = project.load_documents()
    counts: dict[str, int] = {}
    for doc in docs:
        counts[doc.split or "train"] = counts.get(doc.split or "train", 0) + 1
    split_note = ", ".join(f"{name}: {counts.get(name, 0)}" for name in corpus_mod.SPLITS)
    click.echo(
        f"ingested {settings['n_articles']} articles into {settings['n_documents']} documents "
        f"({split_note})"
    )
    if project.state.manifests:
        click.echo(f"registered rule sets: {', '.join(sorted(project.state.manifests))}")


@cli.command("lf-check")
@click.argument("manifests", nargs=-1)
@click.pass_obj
def lf_check(state: CliState, manifests: tuple[str, ...]) -> None:
    """Parse and validate rule sets; exits nonzero when any has errors."""
    project = state.project()
    report = ops.check_manifests(project, list(manifests) or None)
    failed = False
    for name in sorted(report):
        diagnostics = report[name]
        if not diagnostics:
            click.echo(f"{name}: ok")
            continue
        for diag in diagnostics:
            if diag.severity == "error":
                failed = True
            click.echo(f"{name}: {diag.render()}")
    if failed:
        sys.exit(1)


@cli.command()
@click.option("--task", required=True)
@click.option("--manifest", "manifest_name", default=None, help="Rule set (default: the task's current one).")
@click.option(
    "--stage1",
    default="mv",
    show_default=True,
    type=click.Choice(["mv", "cm"]),
    help="Tag aggregation feeding second-stage rules.",
)
@click.option("--use-gold-tags", is_flag=True, help="Prefer reviewed tags over model output for stage one.")
@click.pass_obj
def apply(
    state: CliState,
    task: str,
    manifest_name: str | None,
    stage1: str,
    use_gold_tags: bool,
) -> None:
    """Run a rule set over the corpus and store the vote matrix."""
    project = state.project()
    meta = ops.build_matrix(
        project,
        task,
        manifest_name,
        stage1_model=stage1,
        threshold=state.threshold,
        use_gold_tags=use_gold_tags,
        seed=state.seed,
    )
    click.echo(
        f"applied {meta['manifest']} to {meta['n_docs']} documents "
        f"({meta['n_lfs']} rules); matrix fingerprint {meta['fingerprint'][:12]}"
    )


@cli.command()
@click.option("--task", required=True)
@click.option("--manifest", "manifest_name", default=None, help="Analyze this rule set (rebuilds the matrix if needed).")
@click.option("--json", "as_json", is_flag=True, help="Machine-readable report.")
@click.pass_obj
def analyze(state: CliState, task: str, manifest_name: str | None, as_json: bool) -> None:
    """Coverage, overlap and conflict statistics for the task's matrix."""
    project = state.project()
    report = ops.analyze_task(project, task, manifest_name)
    if as_json:
        click.echo(json.dumps(report.to_json(), ensure_ascii=False, sort_keys=True, indent=2))
    else:
        click.echo(report.render_table())


@cli.command()
@click.option("--task", required=True)
@click.option("--model", default="cm", show_default=True, type=click.Choice(["mv", "cm"]))
@click.option("--epochs", default=None, type=int)
@click.option("--batch-size", default=None, type=int)
@click.option("--learning-rate", default=None, type=float)
@click.option("--l2", default=None, type=float)
@click.option("--uniform-prior", is_flag=True, help="Use a uniform class prior instead of the vote-derived one.")
@click.option("--a-fire", default=0.9, show_default=True, type=float, help="Fallback confidence for single-rule tags.")
@click.pass_obj
def fit(
    state: CliState,
    task: str,
    model: str,
    epochs: int | None,
    batch_size: int | None,
    learning_rate: float | None,
    l2: float | None,
    uniform_prior: bool,
    a_fire: float,
) -> None:
    """Fit an aggregation model on the task's vote matrix."""
    project = state.project()
    defaults = TrainConfig()
    seed = state.seed if state.seed is not None else project.state.settings.get("seed", 0)
    config = TrainConfig(
        learning_rate=defaults.learning_rate if learning_rate is None else learning_rate,
        l2=defaults.l2 if l2 is None else l2,
        epochs=defaults.epochs if epochs is None else epochs,
        batch_size=defaults.batch_size if batch_size is None else batch_size,
        seed=seed,
    )
    model_id = ops.fit_task(
        project, task, model=model, config=config, uniform_prior=uniform_prior, a_fire=a_fire
    )
    click.echo(f"fitted {model} model {model_id} for task {task}")


@cli.command()
@click.option("--task", required=True)
@click.option("--model-id", default=None, help="Model to use (default: the task's latest fit).")
@click.pass_obj
def predict(state: CliState, task: str, model_id: str | None) -> None:
    """Write soft and hard predictions for every document."""
    project = state.project()
    entry = ops.predict_task(project, task, model_id=model_id, threshold=state.threshold)
    click.echo(
        f"predicted {entry['n_docs']} documents with model {entry['model_id']} "
        f"(threshold {entry['threshold']})"
    )


@cli.command(name="eval")
@click.option("--task", required=True)
@click.option("--split", default="validation", show_default=True, type=click.Choice(["validation", "test"]))
@click.option("--json", "as_json", is_flag=True, help="Machine-readable report.")
@click.pass_obj
def eval_cmd(state: CliState, task: str, split: str, as_json: bool) -> None:
    """Score current predictions against reviewed labels."""
    project = state.project()
    report = ops.evaluate_task(project, task, split=split, threshold=state.threshold)
    if as_json:
        click.echo(json.dumps(report.to_json(), ensure_ascii=False, sort_keys=True, indent=2))
    else:
        click.echo(report.render_table())


@cli.command()
@click.option("--task", required=True)
@click.option("--split", required=True, type=click.Choice(list(corpus_mod.SPLITS)))
@click.option("--labels", default="soft", show_default=True, type=click.Choice(["soft", "hard", "gold"]))
@click.option("--out", "out_path", default=None, type=click.Path(dir_okay=False))
@click.pass_obj
def export(state: CliState, task: str, split: str, labels: str, out_path: str | None) -> None:
    """Write a line-delimited labeled dataset for one split."""
    project = state.project()
    path = ops.export_dataset(project, task, split, labels, out_path)
    count = sum(1 for line in path.read_text(encoding="utf-8").splitlines() if line)
    click.echo(f"wrote {count} records to {path}")


@cli.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True, type=int)
@click.pass_obj
def serve(state: CliState, host: str, port: int) -> None:
    """Start the HTTP API for this project."""
    import uvicorn

    from .api import create_app

    state.project()
    uvicorn.run(create_app(state.root), host=host, port=port)


def _one_line(exc: BaseException) -> str:
    if isinstance(exc, LfParseError) and exc.diagnostics:
        head = exc.diagnostics[0].render()
        more = len(exc.diagnostics) - 1
        return f"{head} (+{more} more)" if more else head
    text = str(exc).strip() or type(exc).__name__
    return text.splitlines()[0]


def main(argv: list[str] | None = None) -> int:
    """Console entry point mapping failures to the documented exit codes."""
    try:
        cli.main(args=argv, standalone_mode=False)
    except click.exceptions.Exit as exc:
        return int(exc.exit_code)
    except SystemExit as exc:
        return int(exc.code or 0)
    except click.UsageError as exc:
        click.echo(f"error: {exc.format_message()}", err=True)
        return 1
    except click.ClickException as exc:
        click.echo(f"error: {exc.format_message()}", err=True)
        return 1
    except click.Abort:
        click.echo("error: aborted", err=True)
        return 1
    except USER_ERRORS as exc:
        click.echo(f"error: {_one_line(exc)}", err=True)
        return 1
    except Exception as exc:
        click.echo(f"internal error: {_one_line(exc)}", err=True)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
