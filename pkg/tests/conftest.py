from pathlib import Path

import pytest

from pedforge import extraction, gateway, store

# The scripted session used across the store/api/acceptance tests: five
# passing answers in questioning order.
SESSION_ANSWERS = [
    ("ConceptScope", "fraction equivalence concepts"),
    ("Materials", "printed fraction card sets"),
    ("ObservableAction", "solve matching problems"),
    ("PerformanceTarget", "solve 8 of 10 matches within 15 minutes"),
    ("Context", "environment: kitchen; realism: stylized; tone: playful"),
]

# What the seeded offline provider composes from those answers.
EXPECTED_PEDAGOGY = (
    "Players (Students) [accurately, 8 of 10 within 15 minutes] "
    "[solve matching problems] [fraction equivalence concepts] "
    "in a [stylized kitchen] environment."
)


@pytest.fixture
def mock_gateway():
    return gateway.Gateway(gateway.mock_provider(0))


@pytest.fixture
def project(tmp_path: Path):
    with store.ProjectStore.create(tmp_path / "proj.pedforge") as proj:
        yield proj


@pytest.fixture
def answered_project(project, mock_gateway):
    """A project with all five requirement items passed."""
    for field, text in SESSION_ANSWERS:
        extraction.ingest_answer(
            project, extraction.RequirementField(field), text
        )
    return project
