import pytest
from fastapi.testclient import TestClient

from pedforge.api import ServeConfig, create_app
from pedforge.cnl import Register, parse_sentence
from pedforge.development import validate_pseudocode

from conftest import EXPECTED_PEDAGOGY, SESSION_ANSWERS


@pytest.fixture
def client(tmp_path):
    app = create_app(ServeConfig(data_dir=tmp_path / "data", mock_seed=0))
    with TestClient(app, raise_server_exceptions=False) as test_client:
        yield test_client


def create_project(client) -> str:
    response = client.post("/projects")
    assert response.status_code == 201
    return response.json()["id"]


def answer_all(client, project_id):
    for field, text in SESSION_ANSWERS:
        response = client.post(
            f"/projects/{project_id}/answers", json={"field": field, "text": text}
        )
        assert response.status_code == 200


def run_session(client, project_id):
    """answers -> compose -> 3 candidates -> edit one slot -> accept ->
    refine -> zoom x2; returns the pseudocode artifact."""
    answer_all(client, project_id)
    assert client.post(f"/projects/{project_id}/pedagogy-sentence").status_code == 200
    response = client.post(f"/projects/{project_id}/candidates", json={"n": 3})
    assert response.status_code == 200
    assert len(response.json()["candidates"]) == 3
    response = client.patch(
        f"/projects/{project_id}/candidates/c2/slots/Noun",
        json={"text": "fraction strips", "rationale": "more tactile content"},
    )
    assert response.status_code == 200
    response = client.post(f"/projects/{project_id}/candidates/c2/accept")
    assert response.status_code == 200
    response = client.post(
        f"/projects/{project_id}/refine",
        json={"instruction": 'set verb to "stack and compare"'},
    )
    assert response.status_code == 200
    sentence_artifact = response.json()
    response = client.post(
        f"/projects/{project_id}/artifacts/{sentence_artifact['id']}/zoom"
    )
    assert response.status_code == 200
    paragraph = response.json()
    response = client.post(f"/projects/{project_id}/artifacts/{paragraph['id']}/zoom")
    assert response.status_code == 200
    return response.json()


class TestBasics:
    def test_health(self, client):
        body = client.get("/health").json()
        assert body == {"status": "ok", "format_version": "pedforge/1"}

    def test_mapping_table(self, client):
        rows = client.get("/mapping-table").json()["rows"]
        assert [r["kind"] for r in rows] == ["Adverb", "Verb", "Noun", "Adjective"]
        assert rows[1]["game_meaning"] == (
            "Game mechanics that define the primary player action and interaction pattern."
        )

    def test_unknown_project(self, client):
        response = client.get("/projects/doesnotexist")
        assert response.status_code == 404
        assert response.json()["error"]["code"] == "NOT_FOUND"

    def test_question_flow(self, client):
        project_id = create_project(client)
        question = client.get(f"/projects/{project_id}/question").json()
        assert question["field"] == "ConceptScope"
        answer_all(client, project_id)
        assert client.get(f"/projects/{project_id}/question").json() == {
            "complete": True
        }

    def test_bad_field_name(self, client):
        project_id = create_project(client)
        response = client.post(
            f"/projects/{project_id}/answers",
            json={"field": "NotAField", "text": "x"},
        )
        assert response.status_code == 422
        assert response.json()["error"]["code"] == "VALIDATION"


class TestEndToEndSession:
    def test_full_session_produces_valid_pseudocode(self, client):
        project_id = create_project(client)
        pseudocode = run_session(client, project_id)
        assert pseudocode["level"] == "Pseudocode"
        view = client.get(f"/projects/{project_id}").json()
        current = next(
            a for a in view["artifacts"]
            if a["level"] == "Sentence" and not a["outdated"]
        )
        game = parse_sentence(current["content"], Register.GAME)
        assert validate_pseudocode(pseudocode["content"], game).passed

    def test_trace_ends_in_five_answers(self, client):
        project_id = create_project(client)
        pseudocode = run_session(client, project_id)
        chain = client.get(
            f"/projects/{project_id}/trace/artifact:{pseudocode['id']}"
        ).json()
        actions = [link["event"]["action"] for link in chain["links"]]
        assert actions[-5:] == ["AnswerIngested"] * 5
        assert len(chain["links"]) >= 6

    def test_project_view_after_session(self, client):
        project_id = create_project(client)
        run_session(client, project_id)
        view = client.get(f"/projects/{project_id}").json()
        assert view["phase"] == "Development"
        assert view["accepted_candidate"] == "c2"
        assert view["document_complete"] is True
        assert view["pedagogy"]["canonical"] == EXPECTED_PEDAGOGY
        assert len(view["candidates"]) == 3
        assert view["gates"]["refine"]["open"] is True
        levels = {a["level"] for a in view["artifacts"]}
        assert levels == {"Sentence", "Paragraph", "Pseudocode"}

    def test_events_endpoint(self, client):
        project_id = create_project(client)
        run_session(client, project_id)
        events = client.get(f"/projects/{project_id}/events").json()["events"]
        assert [e["sequence"] for e in events] == list(range(1, len(events) + 1))
        actions = {e["action"] for e in events}
        assert "CandidateAccepted" in actions
        assert "ArtifactZoomed" in actions


class TestErrorMapping:
    def test_accept_misaligned_is_409_not_aligned(self, client):
        project_id = create_project(client)
        answer_all(client, project_id)
        client.post(f"/projects/{project_id}/pedagogy-sentence")
        client.post(f"/projects/{project_id}/candidates", json={"n": 1})
        client.patch(
            f"/projects/{project_id}/candidates/c1/slots/Verb",
            json={"text": "changed verb"},
        )
        response = client.post(f"/projects/{project_id}/candidates/c1/accept")
        assert response.status_code == 409
        body = response.json()["error"]
        assert body["code"] == "NOT_ALIGNED"
        assert body["detail"]["stale"] == ["Verb"]

    def test_compose_incomplete_is_409(self, client):
        project_id = create_project(client)
        response = client.post(f"/projects/{project_id}/pedagogy-sentence")
        assert response.status_code == 409
        assert response.json()["error"]["code"] == "INCOMPLETE_DOCUMENT"

    def test_refine_without_acceptance(self, client):
        project_id = create_project(client)
        answer_all(client, project_id)
        client.post(f"/projects/{project_id}/pedagogy-sentence")
        response = client.post(
            f"/projects/{project_id}/refine", json={"instruction": "set verb to x"}
        )
        assert response.status_code == 409
        assert response.json()["error"]["code"] == "NO_ACCEPTED_CANDIDATE"

    def test_zoom_past_pseudocode_is_max_depth(self, client):
        project_id = create_project(client)
        pseudocode = run_session(client, project_id)
        response = client.post(
            f"/projects/{project_id}/artifacts/{pseudocode['id']}/zoom"
        )
        assert response.status_code == 409
        assert response.json()["error"]["code"] == "MAX_DEPTH"

    def test_invalid_slot_text_is_422(self, client):
        project_id = create_project(client)
        answer_all(client, project_id)
        client.post(f"/projects/{project_id}/pedagogy-sentence")
        client.post(f"/projects/{project_id}/candidates", json={"n": 1})
        response = client.patch(
            f"/projects/{project_id}/candidates/c1/slots/Noun",
            json={"text": "nested [brackets]"},
        )
        assert response.status_code == 422
        assert response.json()["error"]["code"] == "VALIDATION"


class TestIdempotence:
    def test_reaccept_is_noop_success(self, client):
        project_id = create_project(client)
        answer_all(client, project_id)
        client.post(f"/projects/{project_id}/pedagogy-sentence")
        client.post(f"/projects/{project_id}/candidates", json={"n": 1})
        first = client.post(f"/projects/{project_id}/candidates/c1/accept")
        events_after_first = len(
            client.get(f"/projects/{project_id}/events").json()["events"]
        )
        second = client.post(f"/projects/{project_id}/candidates/c1/accept")
        assert first.status_code == second.status_code == 200
        assert second.json()["accepted"] == "c1"
        events_after_second = len(
            client.get(f"/projects/{project_id}/events").json()["events"]
        )
        assert events_after_first == events_after_second


class TestUserAuthoredCandidates:
    def test_write_my_own(self, client):
        project_id = create_project(client)
        answer_all(client, project_id)
        client.post(f"/projects/{project_id}/pedagogy-sentence")
        response = client.post(
            f"/projects/{project_id}/candidates",
            json={
                "sentence": {
                    "adverb": "with house rules enforcing 8 of 10 in 15 minutes",
                    "verb": "assemble and compare",
                    "noun": "fraction plates",
                    "adjective": "stylized kitchen diorama",
                },
                "rationales": {
                    "Adverb": "mirrors the target",
                    "Verb": "hands-on assembly shows matching",
                    "Noun": "plates carry the fractions",
                    "Adjective": "keeps the kitchen frame",
                },
            },
        )
        assert response.status_code == 200
        candidate = response.json()["candidates"][0]
        assert candidate["origin"] == "UserAuthored"
        assert candidate["fully_aligned"] is True
        accept = client.post(
            f"/projects/{project_id}/candidates/{candidate['id']}/accept"
        )
        assert accept.status_code == 200

    def test_missing_rationales_rejected(self, client):
        project_id = create_project(client)
        answer_all(client, project_id)
        client.post(f"/projects/{project_id}/pedagogy-sentence")
        response = client.post(
            f"/projects/{project_id}/candidates",
            json={
                "sentence": {
                    "adverb": "a", "verb": "b", "noun": "c", "adjective": "d"
                },
                "rationales": {"Adverb": "only one"},
            },
        )
        assert response.status_code == 422


class TestRestart:
    def test_kill_restart_loses_nothing(self, tmp_path):
        data_dir = tmp_path / "data"
        app = create_app(ServeConfig(data_dir=data_dir, mock_seed=0))
        with TestClient(app, raise_server_exceptions=False) as client:
            project_id = create_project(client)
            answer_all(client, project_id)
            client.post(f"/projects/{project_id}/pedagogy-sentence")
            client.post(f"/projects/{project_id}/candidates", json={"n": 3})
            events_before = client.get(
                f"/projects/{project_id}/events"
            ).json()["events"]
        # Fresh service over the same data directory.
        app2 = create_app(ServeConfig(data_dir=data_dir, mock_seed=0))
        with TestClient(app2, raise_server_exceptions=False) as client:
            events_after = client.get(
                f"/projects/{project_id}/events"
            ).json()["events"]
            assert events_after == events_before
            # Session continues where it stopped.
            response = client.post(f"/projects/{project_id}/candidates/c1/accept")
            assert response.status_code == 200
            view = client.get(f"/projects/{project_id}").json()
            assert view["phase"] == "Development"
