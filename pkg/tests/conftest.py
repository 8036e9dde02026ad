import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from umlclue.clue import RelationshipTypeLUT, WeightConfig
from umlclue.plantuml import parse
from umlclue.semantics import LexicalProvider, cached

FIXTURES = Path(__file__).parent / "fixtures"
DIAGRAMS = FIXTURES / "diagrams"

REFERENCE_DIAGRAMS = sorted(
    p for p in DIAGRAMS.glob("*.puml") if p.stem != "worked_candidate"
)


@pytest.fixture(scope="session")
def provider():
    return cached(LexicalProvider())


@pytest.fixture(scope="session")
def default_weights():
    return WeightConfig.default()


@pytest.fixture(scope="session")
def uniform_weights():
    return WeightConfig.uniform()


@pytest.fixture(scope="session")
def lut():
    return RelationshipTypeLUT.default()


@pytest.fixture(scope="session")
def corpus_models():
    models = {}
    for path in REFERENCE_DIAGRAMS:
        outcome = parse(path.read_text())
        assert outcome.ok, f"{path.name}: {outcome.diagnostics}"
        models[path.stem] = outcome.model
    return models


@pytest.fixture(scope="session")
def sample_dataset_dir():
    import umlclue

    return Path(umlclue.__file__).parent / "data" / "sample_dataset"
