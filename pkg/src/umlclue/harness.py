"""End-to-end benchmark pipeline.

Flow: load tasks -> obtain candidate designs (persisted raw outputs or a
chat-completions endpoint) -> extract the marker-delimited code -> parse ->
triage failures -> score against the reference -> aggregate into a report.

Raw model outputs are the source of truth.  They are persisted one file
per (generator, task, sample) plus a manifest, and every later stage is a
deterministic replay from them, so scoring the same outputs twice yields
byte-identical reports.

Failure triage partitions every record into exactly one category:
``instruction_failure`` (no marker-delimited code), ``syntax_error``
(extracted but unparseable), ``semantic_bias`` (parsed but not a perfect
score), or ``none``.  Unparsed records score 0 on every metric in the
aggregates: a design that cannot be read is a wrong design.
"""

from __future__ import annotations

import json
import threading
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import httpx

from .clue import METRIC_NAMES, ClueScores, RelationshipTypeLUT, WeightConfig, clue
from .difficulty import BANDS, TaskFeatures
from .model import ClassModel, DocumentError, ModelError, from_canonical_document, model_stats
from .passk import TaskSampleRecord, pass_at_k
from .plantuml import extract_plantuml, parse
from .stats import mean_stderr

CATEGORIES = ("instruction_failure", "syntax_error", "semantic_bias", "none")
_PERFECT = 1.0 - 1e-9

#: total context budget and output reservation, in approximate tokens.
CONTEXT_WINDOW_TOKENS = 4096
MAX_OUTPUT_TOKENS = 2048
_CHARS_PER_TOKEN = 4

PROMPT_TEMPLATE = """## System Message
you are a professional UML class diagram design expert, which can generate the corresponding PlantUML class diagram design based on system requirements.
## Instruction
System requirement is as follows :
{user_requirement}
please generate plantuml code based on system requirement. You should follow the instructions below:
1. Generate standard PlantUML class diagram code directly, start with @startuml and end with @enduml tags. Do not generate any analysis, explanations, or irrelevant content.
2. Class names, attributes, and method names should use meaningful english names from system requirement.
3. Reasonably use inheritance, implementation, dependence, association, aggregation, and composition relationships to design the class diagram.
## Response"""


class HarnessError(ValueError):
    """Dataset or records could not be loaded."""


@dataclass
class Task:
    id: int
    requirement: str
    reference: ClassModel
    features: TaskFeatures | None = None
    band: str | None = None


@dataclass
class GenerationRecord:
    task_id: int
    generator: str
    sample_index: int
    raw_output: str
    extraction_status: str = "missing_markers"
    code: str = ""
    parse_status: str = "syntax_error"
    diagnostics: list[str] = field(default_factory=list)
    category: str = "instruction_failure"
    scores: ClueScores | None = None
    error: str | None = None


def triage(task_id: int, generator: str, sample_index: int, raw_output: str,
           error: str | None = None) -> GenerationRecord:
    """Extract and parse one raw output, assigning its failure category.

    A record that parses starts at category ``none``; scoring downgrades it
    to ``semantic_bias`` unless it is a perfect match.
    """
    record = GenerationRecord(task_id, generator, sample_index, raw_output, error=error)
    extraction = extract_plantuml(raw_output)
    record.extraction_status = extraction.status
    if not extraction.found:
        record.category = "instruction_failure"
        return record
    record.code = extraction.code
    outcome = parse(extraction.code)
    record.parse_status = outcome.status
    if not outcome.ok:
        record.diagnostics = [str(d) for d in outcome.diagnostics]
        record.category = "syntax_error"
        return record
    record.category = "none"
    return record


# ---------------------------------------------------------------------------
# Dataset loading.  A dataset is a directory of one-task JSON files (or a
# single JSON file holding a list of tasks).  Each task object carries
# {"id", "requirement", "reference"} with the reference in canonical
# document form, plus an optional "metadata" block with the feature counts,
# readability and difficulty band.
# ---------------------------------------------------------------------------


def _load_task(raw: dict, origin: str) -> Task:
    for key in ("id", "requirement", "reference"):
        if key not in raw:
            raise HarnessError(f"{origin}: missing field {key!r}")
    task_id = raw["id"]
    if not isinstance(task_id, int):
        raise HarnessError(f"{origin}: field 'id' must be an integer")
    if not isinstance(raw["requirement"], str):
        raise HarnessError(f"task {task_id}: field 'requirement' must be text")
    try:
        reference = from_canonical_document(json.dumps(raw["reference"]))
    except (DocumentError, ModelError) as exc:
        raise HarnessError(f"task {task_id}: field 'reference' invalid: {exc}") from exc

    features = None
    band = None
    metadata = raw.get("metadata") or {}
    if not isinstance(metadata, dict):
        raise HarnessError(f"task {task_id}: field 'metadata' must be an object")
    if metadata:
        band = metadata.get("difficulty_band")
        if band is not None and band not in BANDS:
            raise HarnessError(f"task {task_id}: field 'difficulty_band' unknown: {band!r}")
        counts = ("class_count", "avg_attributes_per_class", "avg_methods_per_class",
                  "relationship_count")
        if all(key in metadata for key in counts):
            features = TaskFeatures(
                class_count=float(metadata["class_count"]),
                avg_attributes=float(metadata["avg_attributes_per_class"]),
                avg_methods=float(metadata["avg_methods_per_class"]),
                relationship_count=float(metadata["relationship_count"]),
                readability=float(metadata.get("readability", 0.0)),
            )
            stats = model_stats(reference)
            declared = (features.class_count, features.avg_attributes,
                        features.avg_methods, features.relationship_count)
            actual = (stats.class_count, stats.avg_attributes_per_class,
                      stats.avg_methods_per_class, stats.relationship_count)
            if any(abs(a - b) > 1e-9 for a, b in zip(declared, actual)):
                warnings.warn(
                    f"task {task_id}: metadata counts {declared} disagree with "
                    f"model stats {actual}",
                    stacklevel=2,
                )
    return Task(task_id, raw["requirement"], reference, features, band)


def load_dataset(path: str | Path) -> list[Task]:
    path = Path(path)
    if not path.exists():
        raise HarnessError(f"dataset path {path} does not exist")
    raws: list[tuple[dict, str]] = []
    if path.is_dir():
        files = sorted(path.glob("*.json"))
        if not files:
            raise HarnessError(f"dataset directory {path} holds no *.json files")
        for file in files:
            try:
                data = json.loads(file.read_text())
            except json.JSONDecodeError as exc:
                raise HarnessError(f"{file.name}: malformed JSON: {exc}") from exc
            if isinstance(data, list):
                raws.extend((item, file.name) for item in data)
            else:
                raws.append((data, file.name))
    else:
        data = json.loads(path.read_text())
        if not isinstance(data, list):
            data = [data]
        raws.extend((item, path.name) for item in data)

    tasks = []
    seen: set[int] = set()
    for raw, origin in raws:
        task = _load_task(raw, origin)
        if task.id in seen:
            raise HarnessError(f"duplicate task id {task.id}")
        seen.add(task.id)
        tasks.append(task)
    tasks.sort(key=lambda t: t.id)
    return tasks


def build_prompt(task: Task, max_prompt_tokens: int | None = None) -> str:
    """Instantiate the generation prompt for a task.

    When a token budget is given the requirement text is truncated to fit,
    with a warning; truncation is never silent.
    """
    requirement = task.requirement
    if max_prompt_tokens is not None:
        overhead = len(PROMPT_TEMPLATE.format(user_requirement="")) // _CHARS_PER_TOKEN + 1
        allowed_chars = max(0, (max_prompt_tokens - overhead) * _CHARS_PER_TOKEN)
        if len(requirement) > allowed_chars:
            warnings.warn(
                f"task {task.id}: requirement truncated from {len(requirement)} to "
                f"{allowed_chars} characters to fit the prompt budget",
                stacklevel=2,
            )
            requirement = requirement[:allowed_chars]
    return PROMPT_TEMPLATE.format(user_requirement=requirement)


# ---------------------------------------------------------------------------
# Generation against a chat-completions endpoint.
# ---------------------------------------------------------------------------


@dataclass
class EndpointConfig:
    url: str  # full chat-completions URL
    model: str
    token: str | None = None  # bearer token; CLI reads it from the environment
    max_retries: int = 2
    timeout: float = 120.0


@dataclass
class SamplingConfig:
    temperature: float = 0.2
    samples: int = 5
    max_output_tokens: int = MAX_OUTPUT_TOKENS
    context_window: int = CONTEXT_WINDOW_TOKENS


def _request_completion(client: httpx.Client, endpoint: EndpointConfig,
                        prompt: str, sampling: SamplingConfig) -> str:
    headers = {"Content-Type": "application/json"}
    if endpoint.token:
        headers["Authorization"] = f"Bearer {endpoint.token}"
    body = {
        "model": endpoint.model,
        "messages": [{"role": "user", "content": prompt}],
        "temperature": sampling.temperature,
        "max_tokens": sampling.max_output_tokens,
    }
    last_error: Exception | None = None
    for attempt in range(endpoint.max_retries + 1):
        try:
            response = client.post(endpoint.url, json=body, headers=headers)
            response.raise_for_status()
            payload = response.json()
            return payload["choices"][0]["message"]["content"]
        except (httpx.HTTPError, KeyError, IndexError, ValueError) as exc:
            last_error = exc
            if attempt < endpoint.max_retries:
                time.sleep(min(2.0 ** attempt, 8.0))
    raise RuntimeError(f"generation failed after retries: {last_error}")


def generate(task: Task, endpoint: EndpointConfig,
             sampling: SamplingConfig | None = None,
             client: httpx.Client | None = None,
             workers: int = 1) -> list[GenerationRecord]:
    """Sample designs for one task; transport failures never abort the run."""
    sampling = sampling or SamplingConfig()
    own_client = client is None
    client = client or httpx.Client(timeout=endpoint.timeout)
    prompt = build_prompt(
        task, max_prompt_tokens=sampling.context_window - sampling.max_output_tokens
    )

    def one(sample_index: int) -> GenerationRecord:
        try:
            raw = _request_completion(client, endpoint, prompt, sampling)
            return triage(task.id, endpoint.model, sample_index, raw)
        except RuntimeError as exc:
            return triage(task.id, endpoint.model, sample_index, "", error=str(exc))

    try:
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                records = list(pool.map(one, range(sampling.samples)))
        else:
            records = [one(i) for i in range(sampling.samples)]
    finally:
        if own_client:
            client.close()
    return records


# ---------------------------------------------------------------------------
# Persistence: one raw-output file per sample plus a JSONL manifest.
# ---------------------------------------------------------------------------

MANIFEST_NAME = "manifest.jsonl"
_manifest_lock = threading.Lock()


def persist_record(record: GenerationRecord, outputs_dir: str | Path) -> Path:
    outputs_dir = Path(outputs_dir)
    directory = outputs_dir / record.generator
    directory.mkdir(parents=True, exist_ok=True)
    name = f"task{record.task_id:03d}_s{record.sample_index}.txt"
    file = directory / name
    file.write_text(record.raw_output)
    entry = {
        "generator": record.generator,
        "task_id": record.task_id,
        "sample_index": record.sample_index,
        "file": f"{record.generator}/{name}",
        "error": record.error,
    }
    with _manifest_lock:
        with open(outputs_dir / MANIFEST_NAME, "a") as handle:
            handle.write(json.dumps(entry) + "\n")
    return file


def load_persisted(outputs_dir: str | Path) -> list[GenerationRecord]:
    """Rebuild records by re-triaging the persisted raw outputs."""
    outputs_dir = Path(outputs_dir)
    manifest = outputs_dir / MANIFEST_NAME
    if not manifest.exists():
        raise HarnessError(f"no {MANIFEST_NAME} under {outputs_dir}")
    records = []
    for line_no, line in enumerate(manifest.read_text().splitlines(), start=1):
        if not line.strip():
            continue
        try:
            entry = json.loads(line)
        except json.JSONDecodeError as exc:
            raise HarnessError(f"{manifest.name}:{line_no}: malformed entry: {exc}") from exc
        raw = (outputs_dir / entry["file"]).read_text()
        records.append(
            triage(entry["task_id"], entry["generator"], entry["sample_index"],
                   raw, error=entry.get("error"))
        )
    records.sort(key=lambda r: (r.generator, r.task_id, r.sample_index))
    return records


def score_records(records: list[GenerationRecord], tasks: list[Task], provider,
                  weights: WeightConfig | None = None,
                  lut: RelationshipTypeLUT | None = None,
                  workers: int = 1) -> list[GenerationRecord]:
    """Attach CLUE scores to every parsed record; others are untouched."""
    by_id = {task.id: task for task in tasks}
    unknown = sorted({r.task_id for r in records} - set(by_id))
    if unknown:
        raise HarnessError(f"records reference unknown task ids {unknown}")

    def score(record: GenerationRecord) -> None:
        if record.parse_status != "ok":
            return
        model = parse(record.code).model
        record.scores = clue(by_id[record.task_id].reference, model, provider,
                             weights, lut)
        record.category = "none" if record.scores.clue >= _PERFECT else "semantic_bias"

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(score, records))
    else:
        for record in records:
            score(record)
    return records


# ---------------------------------------------------------------------------
# Report assembly.
# ---------------------------------------------------------------------------


@dataclass
class MetricAggregate:
    mean: float
    stderr: float | None
    count: int


@dataclass
class GeneratorReport:
    generator: str
    subsets: dict[str, dict[str, MetricAggregate]]  # subset -> metric -> aggregate
    pass_at_k: dict[str, dict[int, float]]  # subset -> k -> value
    failure_shares: dict[str, float]
    record_count: int


@dataclass
class EvaluationReport:
    generators: list[GeneratorReport]
    k_values: tuple[int, ...]

    def to_document(self) -> dict:
        return {
            "k_values": list(self.k_values),
            "generators": [
                {
                    "generator": g.generator,
                    "records": g.record_count,
                    "subsets": {
                        subset: {
                            metric: {
                                "mean": round(agg.mean, 6),
                                "stderr": None if agg.stderr is None else round(agg.stderr, 6),
                                "count": agg.count,
                            }
                            for metric, agg in metrics.items()
                        }
                        for subset, metrics in g.subsets.items()
                    },
                    "pass_at_k": {
                        subset: {str(k): round(v, 6) for k, v in by_k.items()}
                        for subset, by_k in g.pass_at_k.items()
                    },
                    "failure_shares": {
                        category: round(share, 6)
                        for category, share in g.failure_shares.items()
                    },
                }
                for g in self.generators
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_document(), indent=2) + "\n"

    def to_text(self) -> str:
        lines = []
        metric_columns = [f"pass@{k}" for k in self.k_values] + list(METRIC_NAMES)
        header = f"{'generator':<24}{'subset':<10}" + "".join(
            f"{column:>16}" for column in metric_columns
        )
        lines.append(header)
        lines.append("-" * len(header))
        for g in self.generators:
            for subset in g.subsets:
                cells = []
                for k in self.k_values:
                    value = g.pass_at_k.get(subset, {}).get(k)
                    cells.append("n/a" if value is None else f"{value:.3f}")
                for metric in METRIC_NAMES:
                    agg = g.subsets[subset][metric]
                    spread = "n/a" if agg.stderr is None else f"{agg.stderr:.3f}"
                    cells.append(f"{agg.mean:.3f}+-{spread}")
                lines.append(
                    f"{g.generator:<24}{subset:<10}" + "".join(f"{c:>16}" for c in cells)
                )
            shares = "  ".join(
                f"{category}={share:.1%}" for category, share in g.failure_shares.items()
            )
            lines.append(f"{g.generator:<24}failures  {shares}")
        return "\n".join(lines) + "\n"


def _zero_scores() -> ClueScores:
    return ClueScores(0.0, 0.0, 0.0, 0.0, 0.0)


def _aggregate(values: list[float]) -> MetricAggregate:
    if len(values) >= 2:
        mean, stderr = mean_stderr(values)
        return MetricAggregate(mean, stderr, len(values))
    return MetricAggregate(values[0], None, 1)


def report(records: list[GenerationRecord], tasks: list[Task],
           k_values: tuple[int, ...] = (1,)) -> EvaluationReport:
    """Aggregate scored records; deterministic for identical records."""
    band_by_task = {task.id: task.band for task in tasks}
    by_generator: dict[str, list[GenerationRecord]] = {}
    ordered = sorted(records, key=lambda r: (r.generator, r.task_id, r.sample_index))
    for record in ordered:
        by_generator.setdefault(record.generator, []).append(record)

    reports = []
    for generator in sorted(by_generator):
        group = by_generator[generator]
        subsets: dict[str, list[GenerationRecord]] = {"overall": group}
        for band in BANDS:
            members = [r for r in group if band_by_task.get(r.task_id) == band]
            if members:
                subsets[band] = members

        metric_table: dict[str, dict[str, MetricAggregate]] = {}
        passk_table: dict[str, dict[int, float]] = {}
        for subset, members in subsets.items():
            metric_table[subset] = {}
            for metric in METRIC_NAMES:
                values = [
                    getattr(r.scores if r.scores else _zero_scores(), metric)
                    for r in members
                ]
                metric_table[subset][metric] = _aggregate(values)
            per_task: dict[int, list[GenerationRecord]] = {}
            for r in members:
                per_task.setdefault(r.task_id, []).append(r)
            sample_records = [
                TaskSampleRecord(
                    task_id,
                    n=len(task_records),
                    c=sum(1 for r in task_records if r.parse_status == "ok"),
                )
                for task_id, task_records in sorted(per_task.items())
            ]
            passk_table[subset] = {
                k: pass_at_k(sample_records, k)
                for k in k_values
                if all(k <= rec.n for rec in sample_records)
            }

        failure_shares = {
            category: sum(1 for r in group if r.category == category) / len(group)
            for category in CATEGORIES
        }
        reports.append(
            GeneratorReport(
                generator=generator,
                subsets=metric_table,
                pass_at_k=passk_table,
                failure_shares=failure_shares,
                record_count=len(group),
            )
        )
    return EvaluationReport(reports, tuple(k_values))


# ---------------------------------------------------------------------------
# Scored-record persistence so reports can be rebuilt without re-scoring.
# ---------------------------------------------------------------------------

RECORDS_NAME = "records_scored.jsonl"


def dump_scored_records(records: list[GenerationRecord], path: str | Path) -> None:
    ordered = sorted(records, key=lambda r: (r.generator, r.task_id, r.sample_index))
    with open(path, "w") as handle:
        for r in ordered:
            entry = {
                "task_id": r.task_id,
                "generator": r.generator,
                "sample_index": r.sample_index,
                "extraction_status": r.extraction_status,
                "parse_status": r.parse_status,
                "category": r.category,
                "diagnostics": r.diagnostics,
                "scores": r.scores.to_mapping() if r.scores else None,
                "error": r.error,
            }
            handle.write(json.dumps(entry) + "\n")


def load_scored_records(path: str | Path) -> list[GenerationRecord]:
    records = []
    for line in Path(path).read_text().splitlines():
        if not line.strip():
            continue
        entry = json.loads(line)
        record = GenerationRecord(
            task_id=entry["task_id"],
            generator=entry["generator"],
            sample_index=entry["sample_index"],
            raw_output="",
            extraction_status=entry["extraction_status"],
            parse_status=entry["parse_status"],
            category=entry["category"],
            diagnostics=entry.get("diagnostics", []),
            error=entry.get("error"),
        )
        if entry.get("scores"):
            record.scores = ClueScores(**entry["scores"])
        records.append(record)
    return records
