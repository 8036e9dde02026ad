import json

import pytest
from hypothesis import given, settings, strategies as st

from umlclue.clue import clue
from umlclue.harness import (
    CATEGORIES,
    EndpointConfig,
    HarnessError,
    SamplingConfig,
    Task,
    build_prompt,
    dump_scored_records,
    generate,
    load_dataset,
    load_persisted,
    load_scored_records,
    persist_record,
    report,
    score_records,
    triage,
)
from umlclue.model import ClassModel, to_canonical_document
from umlclue.plantuml import parse, to_plantuml

from conftest import FIXTURES

VALID_DIAGRAM = "@startuml\nclass A {\n +x : int\n}\nclass B\nA --> B\n@enduml"
BROKEN_DIAGRAM = "@startuml\nclass A\nA --?> B\n@enduml"
PROSE = "I would design a class diagram with classes for orders and customers."


class TestTriage:
    def test_instruction_failure(self):
        record = triage(1, "m", 0, PROSE)
        assert record.extraction_status == "missing_markers"
        assert record.category == "instruction_failure"

    def test_syntax_error(self):
        record = triage(1, "m", 0, BROKEN_DIAGRAM)
        assert record.extraction_status == "found"
        assert record.parse_status == "syntax_error"
        assert record.category == "syntax_error"
        assert record.diagnostics

    def test_parsed_record_starts_none(self):
        record = triage(1, "m", 0, VALID_DIAGRAM)
        assert record.parse_status == "ok"
        assert record.category == "none"

    def test_categories_partition(self):
        for raw in (PROSE, BROKEN_DIAGRAM, VALID_DIAGRAM, "@startuml\n@enduml"):
            record = triage(1, "m", 0, raw)
            assert record.category in CATEGORIES

    @given(st.text(max_size=120))
    @settings(max_examples=150, deadline=None)
    def test_category_follows_status_table(self, raw):
        record = triage(1, "m", 0, raw)
        if record.extraction_status == "missing_markers":
            assert record.category == "instruction_failure"
        elif record.parse_status != "ok":
            assert record.category == "syntax_error"
        else:
            assert record.category == "none"


class TestLoadDataset:
    def test_bundled_sample(self, sample_dataset_dir):
        tasks = load_dataset(sample_dataset_dir)
        assert [t.id for t in tasks] == [1, 2, 3]
        for task in tasks:
            assert task.reference.classes
            assert task.requirement

    def test_duplicate_id_rejected(self, tmp_path):
        task = {"id": 7, "requirement": "r", "reference": {"classes": [], "relationships": []}}
        (tmp_path / "a.json").write_text(json.dumps(task))
        (tmp_path / "b.json").write_text(json.dumps(task))
        with pytest.raises(HarnessError, match="7"):
            load_dataset(tmp_path)

    def test_schema_violation_names_field(self, tmp_path):
        (tmp_path / "a.json").write_text(json.dumps({"id": 3, "requirement": "r"}))
        with pytest.raises(HarnessError, match="reference"):
            load_dataset(tmp_path)

    def test_metadata_mismatch_warns_with_both_values(self, tmp_path, corpus_models):
        model = corpus_models["minimal"]
        doc = {
            "id": 1,
            "requirement": "text",
            "reference": json.loads(to_canonical_document(model)),
            "metadata": {
                "class_count": 99,
                "avg_attributes_per_class": 0.0,
                "avg_methods_per_class": 0.0,
                "relationship_count": 1,
            },
        }
        (tmp_path / "t.json").write_text(json.dumps(doc))
        with pytest.warns(UserWarning, match="99"):
            load_dataset(tmp_path)

    def test_single_file_with_list(self, tmp_path):
        tasks = [
            {"id": i, "requirement": "r", "reference": {"classes": [], "relationships": []}}
            for i in (1, 2)
        ]
        file = tmp_path / "all.json"
        file.write_text(json.dumps(tasks))
        assert [t.id for t in load_dataset(file)] == [1, 2]


class TestBuildPrompt:
    def test_contains_markers_and_instructions(self, sample_dataset_dir):
        task = load_dataset(sample_dataset_dir)[0]
        prompt = build_prompt(task)
        assert "@startuml" in prompt and "@enduml" in prompt
        for number in ("1.", "2.", "3."):
            assert number in prompt
        assert prompt.endswith("## Response")

    def test_requirement_appears_exactly_once(self, sample_dataset_dir):
        task = load_dataset(sample_dataset_dir)[0]
        assert build_prompt(task).count(task.requirement) == 1

    def test_golden_file(self, sample_dataset_dir):
        task = load_dataset(sample_dataset_dir)[0]
        golden = (FIXTURES / "prompt_golden.txt").read_text()
        assert build_prompt(task) == golden

    def test_truncation_warns(self):
        task = Task(9, "word " * 4000, ClassModel())
        with pytest.warns(UserWarning, match="truncated"):
            prompt = build_prompt(task, max_prompt_tokens=256)
        assert len(prompt) < 4000 * 5


class FakeResponse:
    def __init__(self, content):
        self._content = content
        self.status_code = 200

    def raise_for_status(self):
        return None

    def json(self):
        return {"choices": [{"message": {"content": self._content}}]}


class FakeClient:
    def __init__(self, content):
        self.content = content
        self.calls = 0

    def post(self, url, json=None, headers=None):
        self.calls += 1
        return FakeResponse(self.content)


class FailingClient:
    def __init__(self):
        self.calls = 0

    def post(self, url, json=None, headers=None):
        self.calls += 1
        import httpx

        raise httpx.ConnectError("boom")


class TestGenerate:
    def endpoint(self):
        return EndpointConfig(url="http://fake/v1/chat/completions", model="mock",
                              max_retries=1, timeout=1.0)

    def test_valid_mock_yields_clean_records(self, sample_dataset_dir):
        task = load_dataset(sample_dataset_dir)[0]
        records = generate(task, self.endpoint(), SamplingConfig(samples=5),
                           client=FakeClient(VALID_DIAGRAM))
        assert len(records) == 5
        assert all(r.category == "none" for r in records)
        assert [r.sample_index for r in records] == list(range(5))

    def test_prose_mock_yields_instruction_failures(self, sample_dataset_dir):
        task = load_dataset(sample_dataset_dir)[0]
        records = generate(task, self.endpoint(), SamplingConfig(samples=5),
                           client=FakeClient(PROSE))
        assert all(r.category == "instruction_failure" for r in records)

    def test_malformed_arrow_mock_keeps_diagnostics(self, sample_dataset_dir):
        task = load_dataset(sample_dataset_dir)[0]
        records = generate(task, self.endpoint(), SamplingConfig(samples=3),
                           client=FakeClient(BROKEN_DIAGRAM))
        assert all(r.category == "syntax_error" for r in records)
        assert all(any("arrow" in d for d in r.diagnostics) for r in records)

    def test_transport_failure_recorded_with_retries(self, sample_dataset_dir):
        task = load_dataset(sample_dataset_dir)[0]
        client = FailingClient()
        records = generate(task, self.endpoint(), SamplingConfig(samples=2), client=client)
        assert len(records) == 2
        assert all(r.error for r in records)
        assert all(r.category == "instruction_failure" for r in records)
        # one initial call plus one retry per sample
        assert client.calls == 4


class TestScoreRecords:
    def test_reference_copy_scores_one(self, sample_dataset_dir, provider):
        task = load_dataset(sample_dataset_dir)[0]
        raw = to_plantuml(task.reference)
        record = triage(task.id, "m", 0, raw)
        score_records([record], [task], provider)
        for value in record.scores.to_mapping().values():
            assert value == pytest.approx(1.0, abs=1e-9)
        assert record.category == "none"

    def test_empty_block_scores_zero(self, sample_dataset_dir, provider):
        task = load_dataset(sample_dataset_dir)[0]
        record = triage(task.id, "m", 0, "@startuml\n@enduml")
        assert record.parse_status == "ok"
        score_records([record], [task], provider)
        for value in record.scores.to_mapping().values():
            assert value == 0.0
        assert record.category == "semantic_bias"

    def test_matches_direct_clue_calls(self, sample_dataset_dir, provider, default_weights):
        tasks = load_dataset(sample_dataset_dir)
        records = [
            triage(task.id, "m", 0, to_plantuml(task.reference).replace("String", "Text"))
            for task in tasks
        ]
        score_records(records, tasks, provider, default_weights)
        for task, record in zip(tasks, records):
            candidate = parse(record.code).model
            direct = clue(task.reference, candidate, provider, default_weights)
            assert record.scores == direct

    def test_unknown_task_rejected(self, sample_dataset_dir, provider):
        record = triage(999, "m", 0, VALID_DIAGRAM)
        with pytest.raises(HarnessError, match="999"):
            score_records([record], load_dataset(sample_dataset_dir), provider)

    def test_unparsed_records_untouched(self, sample_dataset_dir, provider):
        task = load_dataset(sample_dataset_dir)[0]
        record = triage(task.id, "m", 0, PROSE)
        score_records([record], [task], provider)
        assert record.scores is None

    def test_worker_pool_matches_serial(self, sample_dataset_dir, provider):
        tasks = load_dataset(sample_dataset_dir)
        def build():
            return [
                triage(t.id, "m", i, to_plantuml(t.reference).replace("String", "Str"))
                for t in tasks
                for i in range(3)
            ]
        serial = score_records(build(), tasks, provider, workers=1)
        threaded = score_records(build(), tasks, provider, workers=4)
        assert [r.scores for r in serial] == [r.scores for r in threaded]


class TestReport:
    def build_records(self, tasks, provider):
        records = []
        for task in tasks:
            for index in range(3):
                records.append(triage(task.id, "mock", index, to_plantuml(task.reference)))
        return score_records(records, tasks, provider)

    def test_all_perfect_run(self, sample_dataset_dir, provider):
        tasks = load_dataset(sample_dataset_dir)
        records = self.build_records(tasks, provider)
        result = report(records, tasks, (1,))
        generator = result.generators[0]
        overall = generator.subsets["overall"]
        for metric, aggregate in overall.items():
            assert aggregate.mean == pytest.approx(1.0, abs=1e-9), metric
            assert aggregate.stderr == pytest.approx(0.0, abs=1e-12)
        assert generator.pass_at_k["overall"][1] == 1.0
        assert generator.failure_shares["none"] == 1.0

    def test_all_instruction_failures(self, sample_dataset_dir, provider):
        tasks = load_dataset(sample_dataset_dir)
        records = [triage(task.id, "mock", i, PROSE) for task in tasks for i in range(2)]
        score_records(records, tasks, provider)
        result = report(records, tasks, (1,))
        generator = result.generators[0]
        for metric, aggregate in generator.subsets["overall"].items():
            assert aggregate.mean == 0.0, metric
        assert generator.failure_shares["instruction_failure"] == 1.0
        assert generator.pass_at_k["overall"][1] == 0.0

    def test_mixed_aggregates_recomputed(self, sample_dataset_dir, provider):
        tasks = load_dataset(sample_dataset_dir)
        records = []
        for task in tasks:
            records.append(triage(task.id, "mock", 0, to_plantuml(task.reference)))
            records.append(triage(task.id, "mock", 1, PROSE))
        score_records(records, tasks, provider)
        result = report(records, tasks, (1,))
        generator = result.generators[0]
        values = [r.scores.clue if r.scores else 0.0 for r in records]
        expected_mean = sum(values) / len(values)
        assert generator.subsets["overall"]["clue"].mean == pytest.approx(expected_mean)
        assert generator.pass_at_k["overall"][1] == pytest.approx(0.5)
        assert generator.failure_shares["instruction_failure"] == pytest.approx(0.5)

    def test_deterministic_output(self, sample_dataset_dir, provider):
        tasks = load_dataset(sample_dataset_dir)
        records = self.build_records(tasks, provider)
        first = report(records, tasks, (1,))
        second = report(list(reversed(records)), tasks, (1,))
        assert first.to_json() == second.to_json()
        assert first.to_text() == second.to_text()


class TestPersistence:
    def test_round_trip(self, tmp_path, sample_dataset_dir):
        tasks = load_dataset(sample_dataset_dir)
        originals = []
        for task in tasks:
            for index in range(2):
                record = triage(task.id, "mock", index, to_plantuml(task.reference))
                persist_record(record, tmp_path)
                originals.append(record)
        loaded = load_persisted(tmp_path)
        assert len(loaded) == len(originals)
        for original, reloaded in zip(
            sorted(originals, key=lambda r: (r.generator, r.task_id, r.sample_index)), loaded
        ):
            assert reloaded.raw_output == original.raw_output
            assert reloaded.category == original.category

    def test_replay_is_byte_identical(self, tmp_path, sample_dataset_dir, provider):
        tasks = load_dataset(sample_dataset_dir)
        for task in tasks:
            persist_record(triage(task.id, "mock", 0, to_plantuml(task.reference)), tmp_path)
            persist_record(triage(task.id, "mock", 1, PROSE), tmp_path)

        def run():
            records = load_persisted(tmp_path)
            score_records(records, tasks, provider)
            result = report(records, tasks, (1,))
            return result.to_json().encode(), result.to_text().encode()

        assert run() == run()

    def test_scored_records_round_trip(self, tmp_path, sample_dataset_dir, provider):
        tasks = load_dataset(sample_dataset_dir)
        records = [triage(t.id, "mock", 0, to_plantuml(t.reference)) for t in tasks]
        score_records(records, tasks, provider)
        path = tmp_path / "records_scored.jsonl"
        dump_scored_records(records, path)
        loaded = load_scored_records(path)
        assert [r.scores for r in loaded] == [r.scores for r in records]
        assert report(loaded, tasks, (1,)).to_json() == report(records, tasks, (1,)).to_json()
