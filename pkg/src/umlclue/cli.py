"""Command-line interface.

All commands run in-process by default.  ``validate`` and ``score`` also
accept ``--server URL`` to act as thin clients of a running scoring
service (see ``umlclue serve``).  Endpoint auth tokens are read from the
environment: ``GENERATION_API_TOKEN`` for the chat-completions endpoint
and ``EMBED_SERVICE_TOKEN`` for the embedding service.
"""

from __future__ import annotations

import functools
import json
import os
import sys
from importlib import resources
from pathlib import Path

import click
import httpx

from . import __version__
from .clue import METRIC_NAMES, RelationshipTypeLUT, WeightConfig, clue
from .difficulty import TaskFeatures, difficulty_ratings, readability
from .harness import (
    EndpointConfig,
    SamplingConfig,
    build_prompt,
    dump_scored_records,
    generate as run_generation,
    load_dataset,
    load_persisted,
    load_scored_records,
    persist_record,
    report as build_report,
    score_records,
)
from .model import model_stats
from .optimizer import RatedPair, optimize, stratified_split
from .passk import TaskSampleRecord, pass_at_k
from .plantuml import parse
from .semantics import EmbeddingServiceProvider, LexicalProvider, cached
from . import model as model_mod

GENERATION_TOKEN_ENV = "GENERATION_API_TOKEN"


def _data_path(name: str) -> Path:
    return Path(str(resources.files("umlclue").joinpath("data", name)))


def _records_file(path: str) -> Path:
    """Accept either a records_scored.jsonl file or the directory holding it."""
    given = Path(path)
    if given.is_dir():
        candidate = given / "records_scored.jsonl"
        if not candidate.exists():
            raise click.UsageError(f"no records_scored.jsonl under {given}")
        return candidate
    return given


def _load_weights(path: str | None) -> WeightConfig:
    if path:
        return WeightConfig.load(path)
    return WeightConfig.load(_data_path("default_weights.json"))


def _load_lut(path: str | None) -> RelationshipTypeLUT:
    if path:
        return RelationshipTypeLUT.load(path)
    return RelationshipTypeLUT.load(_data_path("relationship_lut.json"))


def _make_provider(kind: str, endpoint: str | None):
    if kind == "embedding":
        if not endpoint:
            raise click.UsageError("--embed-endpoint is required with --provider embedding")
        return cached(EmbeddingServiceProvider(endpoint))
    return cached(LexicalProvider())


provider_options = [
    click.option("--provider", "provider_kind", type=click.Choice(["lexical", "embedding"]),
                 default="lexical", show_default=True,
                 help="string similarity provider"),
    click.option("--embed-endpoint", default=None,
                 help="embedding service base URL (provider=embedding)"),
    click.option("--weights", "weights_path", default=None,
                 help="weight config JSON [default: bundled fitted weights]"),
    click.option("--lut", "lut_path", default=None,
                 help="relationship-type LUT JSON [default: bundled table]"),
]


def add_options(options):
    def wrap(func):
        for option in reversed(options):
            func = option(func)
        return func
    return wrap


def friendly_errors(func):
    """Surface domain errors as clean CLI messages instead of tracebacks."""

    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except (ValueError, OSError, json.JSONDecodeError) as exc:
            raise click.ClickException(str(exc)) from exc

    return wrapper


@click.group()
@click.version_option(version=__version__, prog_name="umlclue")
def main() -> None:
    """Score, validate and benchmark UML class-diagram designs."""


@main.command()
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@click.option("--server", default=None, help="scoring service URL to delegate to")
@friendly_errors
def validate(file: str, server: str | None) -> None:
    """Check FILE against the PlantUML grammar; exit 1 when invalid."""
    code = Path(file).read_text()
    if server:
        response = httpx.post(server.rstrip("/") + "/validate", json={"code": code})
        response.raise_for_status()
        payload = response.json()
        valid = payload["valid"]
        diagnostics = [
            f"{d['line']}:{d['column']}: {d['message']}" for d in payload["diagnostics"]
        ]
    else:
        outcome = parse(code)
        valid = outcome.ok
        diagnostics = [str(d) for d in outcome.diagnostics]
    if valid:
        click.echo("valid")
        return
    click.echo("invalid")
    for diagnostic in diagnostics:
        click.echo(f"  {diagnostic}")
    sys.exit(1)


@main.command()
@click.option("--task", "task_id", type=int, required=True, help="task id in the dataset")
@click.option("--candidate", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--dataset", type=click.Path(exists=True), required=True)
@click.option("--server", default=None, help="scoring service URL to delegate to")
@add_options(provider_options)
@friendly_errors
def score(task_id: int, candidate: str, dataset: str, server: str | None,
          provider_kind: str, embed_endpoint: str | None,
          weights_path: str | None, lut_path: str | None) -> None:
    """Score a candidate PlantUML file against a task's reference design."""
    tasks = {t.id: t for t in load_dataset(dataset)}
    if task_id not in tasks:
        raise click.UsageError(f"task {task_id} not in dataset")
    task = tasks[task_id]
    candidate_code = Path(candidate).read_text()
    if server:
        from .plantuml import to_plantuml

        response = httpx.post(
            server.rstrip("/") + "/score",
            json={"reference": to_plantuml(task.reference), "candidate": candidate_code},
            timeout=120.0,
        )
        if response.status_code != 200:
            raise click.ClickException(f"service error: {response.text}")
        for name in METRIC_NAMES:
            click.echo(f"{name:<16}{response.json()[name]:.6f}")
        return
    outcome = parse(candidate_code)
    if not outcome.ok:
        raise click.ClickException(
            f"candidate does not parse: {outcome.diagnostics[0]}"
        )
    provider = _make_provider(provider_kind, embed_endpoint)
    scores = clue(task.reference, outcome.model, provider,
                  _load_weights(weights_path), _load_lut(lut_path))
    for name, value in scores.to_mapping().items():
        click.echo(f"{name:<16}{value:.6f}")


@main.command()
@click.option("--k", type=int, required=True)
@click.option("--records", "records_path", type=click.Path(exists=True), required=True,
              help="records_scored.jsonl (or the directory holding it)")
@friendly_errors
def passk(k: int, records_path: str) -> None:
    """Pass@k over the tasks of a scored-records file."""
    records = load_scored_records(_records_file(records_path))
    per_task: dict[tuple[str, int], list] = {}
    for record in records:
        per_task.setdefault((record.generator, record.task_id), []).append(record)
    counts = [
        TaskSampleRecord(task_id, n=len(group), c=sum(1 for r in group if r.parse_status == "ok"))
        for (_, task_id), group in sorted(per_task.items())
    ]
    click.echo(f"pass@{k} = {pass_at_k(counts, k):.6f}")


@main.command()
@click.option("--dataset", type=click.Path(exists=True), required=True)
@click.option("--outputs", type=click.Path(exists=True), required=True,
              help="directory of persisted raw outputs with a manifest")
@click.option("--report-dir", type=click.Path(), default=None,
              help="where to write report files [default: the outputs directory]")
@click.option("--k", "k_values", type=int, multiple=True, default=(1,), show_default=True)
@click.option("--workers", type=int, default=1, show_default=True)
@add_options(provider_options)
@friendly_errors
def evaluate(dataset: str, outputs: str, report_dir: str | None, k_values: tuple[int, ...],
             workers: int, provider_kind: str, embed_endpoint: str | None,
             weights_path: str | None, lut_path: str | None) -> None:
    """Score persisted raw outputs and write report.json / report.txt."""
    tasks = load_dataset(dataset)
    records = load_persisted(outputs)
    provider = _make_provider(provider_kind, embed_endpoint)
    score_records(records, tasks, provider, _load_weights(weights_path),
                  _load_lut(lut_path), workers=workers)
    destination = Path(report_dir or outputs)
    destination.mkdir(parents=True, exist_ok=True)
    dump_scored_records(records, destination / "records_scored.jsonl")
    result = build_report(records, tasks, k_values)
    (destination / "report.json").write_text(result.to_json())
    (destination / "report.txt").write_text(result.to_text())
    click.echo(result.to_text())
    click.echo(f"wrote {destination / 'report.json'}")


@main.command(name="generate")
@click.option("--dataset", type=click.Path(exists=True), required=True)
@click.option("--endpoint", required=True, help="full chat-completions URL")
@click.option("--model", "model_name", required=True)
@click.option("--outputs", type=click.Path(), default="outputs", show_default=True)
@click.option("--samples", type=int, default=5, show_default=True)
@click.option("--temperature", type=float, default=0.2, show_default=True)
@click.option("--max-output-tokens", type=int, default=2048, show_default=True)
@click.option("--retries", type=int, default=2, show_default=True)
@click.option("--workers", type=int, default=1, show_default=True)
@friendly_errors
def generate_cmd(dataset: str, endpoint: str, model_name: str, outputs: str,
                 samples: int, temperature: float, max_output_tokens: int,
                 retries: int, workers: int) -> None:
    """Sample designs for every task and persist the raw outputs."""
    tasks = load_dataset(dataset)
    config = EndpointConfig(
        url=endpoint,
        model=model_name,
        token=os.environ.get(GENERATION_TOKEN_ENV),
        max_retries=retries,
    )
    sampling = SamplingConfig(
        temperature=temperature, samples=samples, max_output_tokens=max_output_tokens
    )
    outputs_dir = Path(outputs)
    outputs_dir.mkdir(parents=True, exist_ok=True)
    for task in tasks:
        records = run_generation(task, config, sampling, workers=workers)
        for record in records:
            persist_record(record, outputs_dir)
        failures = sum(1 for r in records if r.parse_status != "ok")
        click.echo(f"task {task.id}: {len(records)} samples, {failures} failed")
    click.echo(f"raw outputs persisted under {outputs_dir}")


@main.command(name="optimize")
@click.option("--ratings", type=click.Path(exists=True, dir_okay=False), required=True,
              help="JSON list of {reference, candidate, score} rated pairs")
@click.option("--output", type=click.Path(), default="fitted_weights.json", show_default=True)
@click.option("--budget", type=int, default=300, show_default=True)
@click.option("--stall-limit", type=int, default=50, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--train-fraction", type=float, default=0.8, show_default=True)
@click.option("--workers", type=int, default=1, show_default=True)
@add_options(provider_options)
@friendly_errors
def optimize_cmd(ratings: str, output: str, budget: int, stall_limit: int, seed: int,
                 train_fraction: float, workers: int,
                 provider_kind: str, embed_endpoint: str | None,
                 weights_path: str | None, lut_path: str | None) -> None:
    """Fit the weight configuration to human ratings."""
    raw = json.loads(Path(ratings).read_text())
    pairs = [
        RatedPair(
            reference=model_mod.from_canonical_document(json.dumps(entry["reference"])),
            candidate=model_mod.from_canonical_document(json.dumps(entry["candidate"])),
            human_score=float(entry["score"]),
        )
        for entry in raw
    ]
    train, test = stratified_split(pairs, train_fraction, seed)
    provider = _make_provider(provider_kind, embed_endpoint)
    result = optimize(train, test, provider, budget=budget, stall_limit=stall_limit,
                      seed=seed, lut=_load_lut(lut_path), workers=workers or None)
    result.weights.dump(output)
    click.echo(f"train objective: {result.train_objective:.4f} "
               f"({result.evaluations} evaluations)")
    for name in METRIC_NAMES:
        train_r = result.train_correlations.get(name)
        test_r = result.test_correlations.get(name)
        test_text = "n/a" if test_r is None else f"{test_r:.4f}"
        click.echo(f"{name:<16}train r={train_r:.4f}  test r={test_text}")
    click.echo(f"wrote {output}")


@main.command(name="difficulty")
@click.option("--dataset", type=click.Path(exists=True), required=True)
@click.option("--output", type=click.Path(), default=None,
              help="write the report JSON here instead of stdout")
@friendly_errors
def difficulty_cmd(dataset: str, output: str | None) -> None:
    """Rate every task's difficulty and band the dataset."""
    tasks = load_dataset(dataset)
    features = []
    for task in tasks:
        stats = model_stats(task.reference)
        features.append(
            TaskFeatures(
                class_count=stats.class_count,
                avg_attributes=stats.avg_attributes_per_class,
                avg_methods=stats.avg_methods_per_class,
                relationship_count=stats.relationship_count,
                readability=readability(task.requirement),
            )
        )
    result = difficulty_ratings(features)
    doc = result.to_document()
    for task, entry in zip(tasks, doc["tasks"]):
        entry["task_id"] = task.id
    text = json.dumps(doc, indent=2) + "\n"
    if output:
        Path(output).write_text(text)
        click.echo(f"wrote {output}")
    else:
        click.echo(text, nl=False)


@main.command(name="report")
@click.option("--records", "records_path", type=click.Path(exists=True), required=True,
              help="records_scored.jsonl (or the directory holding it)")
@click.option("--dataset", type=click.Path(exists=True), default=None,
              help="dataset directory, for per-band subsets")
@click.option("--k", "k_values", type=int, multiple=True, default=(1,), show_default=True)
@friendly_errors
def report_cmd(records_path: str, dataset: str | None, k_values: tuple[int, ...]) -> None:
    """Rebuild the aggregate report from scored records."""
    records = load_scored_records(_records_file(records_path))
    tasks = load_dataset(dataset) if dataset else []
    result = build_report(records, tasks, k_values)
    click.echo(result.to_text(), nl=False)


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8100, show_default=True)
@add_options(provider_options)
@friendly_errors
def serve(host: str, port: int, provider_kind: str, embed_endpoint: str | None,
          weights_path: str | None, lut_path: str | None) -> None:
    """Run the scoring service."""
    import uvicorn

    from .service import create_app

    app = create_app(
        weights=_load_weights(weights_path),
        lut=_load_lut(lut_path),
        provider=_make_provider(provider_kind, embed_endpoint),
    )
    uvicorn.run(app, host=host, port=port)


@main.command(name="prompt")
@click.option("--dataset", type=click.Path(exists=True), required=True)
@click.option("--task", "task_id", type=int, required=True)
@friendly_errors
def prompt_cmd(dataset: str, task_id: int) -> None:
    """Print the generation prompt for one task."""
    tasks = {t.id: t for t in load_dataset(dataset)}
    if task_id not in tasks:
        raise click.UsageError(f"task {task_id} not in dataset")
    click.echo(build_prompt(tasks[task_id]))


if __name__ == "__main__":
    main()
