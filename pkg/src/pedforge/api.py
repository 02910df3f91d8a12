"""HTTP service exposing the full workflow.

All state lives in the per-project stores; handlers are stateless, so a
service restart mid-session loses nothing. Requests that mutate the same
project are serialized by the store's lock; distinct projects proceed in
parallel. Every error body carries a stable machine-readable code::

    {"error": {"code": "NOT_ALIGNED", "message": "...", "detail": {...}}}

Codes: NOT_FOUND, VALIDATION, GATE_NOT_SATISFIED, INCOMPLETE_DOCUMENT,
NOT_ALIGNED, NO_ACCEPTED_CANDIDATE, MAX_DEPTH, ARTIFACT_OUTDATED,
PROVIDER_FAILURE, PROJECT_LOCKED, CORRUPT_FILE, STORAGE_FAILURE.
"""

from __future__ import annotations

import threading
import uuid
from contextlib import asynccontextmanager
from dataclasses import dataclass
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from . import cnl, development, extraction, gateway, mapping, store, translation
from .errors import (
    GateNotSatisfied,
    NotFound,
    PedforgeError,
    ProjectLocked,
    StorageFailure,
)

PROJECT_SUFFIX = ".pedforge"


@dataclass
class ServeConfig:
    data_dir: Path
    mock_seed: int | None = None
    host: str = "127.0.0.1"
    port: int = 8077
    provider: gateway.Provider | None = None
    retry_policy: gateway.RetryPolicy = gateway.RetryPolicy()
    ui_dir: Path | None = None

    def build_gateway(self) -> gateway.Gateway:
        if self.provider is not None:
            provider = self.provider
        elif self.mock_seed is not None:
            provider = gateway.mock_provider(self.mock_seed)
        else:
            provider = gateway.HttpChatProvider.from_env()
        return gateway.Gateway(provider, self.retry_policy)


class ProjectRegistry:
    """Open stores for the serving process, one lock-holding handle each."""

    def __init__(self, data_dir: Path):
        self.data_dir = Path(data_dir)
        self._stores: dict[str, store.ProjectStore] = {}
        self._mutex = threading.Lock()

    def _path(self, project_id: str) -> Path:
        if not project_id.isalnum():
            raise NotFound(f"unknown project: {project_id}")
        return self.data_dir / f"{project_id}{PROJECT_SUFFIX}"

    def create(self) -> store.ProjectStore:
        with self._mutex:
            project_id = uuid.uuid4().hex[:12]
            opened = store.ProjectStore.create(self._path(project_id))
            self._stores[project_id] = opened
            return opened

    def get(self, project_id: str) -> store.ProjectStore:
        with self._mutex:
            opened = self._stores.get(project_id)
            if opened is None:
                opened = store.ProjectStore.load(self._path(project_id))
                self._stores[project_id] = opened
            return opened

    def close_all(self) -> None:
        with self._mutex:
            for opened in self._stores.values():
                opened.close()
            self._stores.clear()


class AnswerBody(BaseModel):
    field: str
    text: str


class CandidatesBody(BaseModel):
    n: int | None = None
    sentence: dict | None = None
    rationales: dict[str, str] | None = None


class SlotPatchBody(BaseModel):
    text: str
    rationale: str | None = None


class RefineBody(BaseModel):
    instruction: str


_ERROR_CODES: list[tuple[type[Exception], str, int]] = [
    (NotFound, "NOT_FOUND", 404),
    (translation.NotAligned, "NOT_ALIGNED", 409),
    (GateNotSatisfied, "GATE_NOT_SATISFIED", 409),
    (extraction.IncompleteDocument, "INCOMPLETE_DOCUMENT", 409),
    (development.NoAcceptedCandidate, "NO_ACCEPTED_CANDIDATE", 409),
    (development.MaxDepth, "MAX_DEPTH", 409),
    (development.ArtifactOutdated, "ARTIFACT_OUTDATED", 409),
    (gateway.ProviderFailure, "PROVIDER_FAILURE", 502),
    (ProjectLocked, "PROJECT_LOCKED", 409),
    (store.CorruptFile, "CORRUPT_FILE", 500),
    (StorageFailure, "STORAGE_FAILURE", 500),
    (cnl.InvalidSlotText, "VALIDATION", 422),
    (cnl.ParseError, "VALIDATION", 422),
    (cnl.RegisterMismatch, "VALIDATION", 422),
    (mapping.DuplicateRationale, "VALIDATION", 422),
    (ValueError, "VALIDATION", 422),
]


def _error_response(err: Exception) -> JSONResponse:
    for klass, code, status in _ERROR_CODES:
        if isinstance(err, klass):
            detail: dict = {}
            if isinstance(err, PedforgeError):
                detail = err.detail
            if isinstance(err, translation.NotAligned):
                detail = {
                    "stale": [k.value for k in err.stale],
                    "missing": [k.value for k in err.missing],
                }
            if isinstance(err, gateway.ProviderFailure):
                detail = {
                    "attempts": err.attempts,
                    "last_violation": err.last_violation,
                }
            return JSONResponse(
                status_code=status,
                content={"error": {"code": code, "message": str(err), "detail": detail}},
            )
    raise err


def _display_view(sentence: cnl.ControlledSentence) -> dict:
    rendering = cnl.render_display(sentence)
    return {
        "text": rendering.text,
        "ranges": [
            {
                "kind": r.kind.value,
                "start": r.start,
                "length": r.length,
                "color": r.color,
            }
            for r in rendering.ranges
        ],
    }


def _sentence_view(sentence: cnl.ControlledSentence) -> dict:
    return {
        "sentence": sentence.to_dict(),
        "canonical": cnl.render_sentence(sentence),
        "display": _display_view(sentence),
    }


def _candidate_view(project: store.ProjectStore,
                    candidate: translation.TranslationCandidate) -> dict:
    view = candidate.to_dict()
    view.update(_sentence_view(candidate.sentence))
    report = translation.alignment_for(project, candidate)
    view["alignment"] = report.to_dict()
    view["fully_aligned"] = mapping.is_fully_aligned(report)
    return view


def _artifact_view(artifact: development.ExpansionArtifact) -> dict:
    return artifact.to_dict()


def _gate(open_: bool, reason: str | None) -> dict:
    return {"open": open_, "reason": None if open_ else reason}


def _project_view(project: store.ProjectStore) -> dict:
    state = project.state
    active = state.active_pedagogy()
    question = extraction.next_question(state.document)
    return {
        "id": project.project_id,
        "format_version": store.FORMAT_VERSION,
        "phase": state.phase.value,
        "document": state.document.to_dict(),
        "document_complete": state.document.complete(),
        "question": (
            None
            if question is None
            else {"field": question.field.value, "prompt": question.prompt}
        ),
        "options": {
            field.value: list(options) for field, options in state.options.items()
        },
        "pedagogy": (
            None
            if active is None
            else {"version": active[0], **_sentence_view(active[1])}
        ),
        "pedagogy_versions": [
            {"version": version, **_sentence_view(sentence)}
            for version, sentence in state.pedagogy_versions
        ],
        "candidates": [_candidate_view(project, c) for c in state.candidates],
        "accepted_candidate": state.accepted_candidate,
        "artifacts": [_artifact_view(a) for a in state.artifacts],
        "chat": list(state.chat),
        "gates": {
            "compose_pedagogy": _gate(
                state.document.complete(), "requirement document is not complete"
            ),
            "generate_candidates": _gate(
                active is not None, "no pedagogy sentence has been composed"
            ),
            "accept": _gate(bool(state.candidates), "no candidates yet"),
            "refine": _gate(
                state.accepted_candidate is not None, "no candidate has been accepted"
            ),
            "zoom": _gate(
                state.accepted_candidate is not None, "no candidate has been accepted"
            ),
        },
        "warnings": list(project.warnings),
    }


def _parse_field(name: str) -> extraction.RequirementField:
    try:
        return extraction.RequirementField(name)
    except ValueError as err:
        raise ValueError(f"unknown requirement field: {name}") from err


def _parse_kind(name: str) -> cnl.SlotKind:
    try:
        return cnl.SlotKind(name)
    except ValueError as err:
        raise ValueError(f"unknown slot kind: {name}") from err


def create_app(config: ServeConfig) -> FastAPI:
    config.data_dir.mkdir(parents=True, exist_ok=True)
    probe = config.data_dir / ".write-probe"
    try:
        probe.touch()
        probe.unlink()
    except OSError as err:
        raise StorageFailure(f"data directory is not writable: {err}") from err

    registry = ProjectRegistry(config.data_dir)
    llm = config.build_gateway()

    @asynccontextmanager
    async def lifespan(_app: FastAPI):
        yield
        registry.close_all()

    app = FastAPI(title="pedforge", lifespan=lifespan)

    @app.exception_handler(Exception)
    async def handle_domain_error(_request: Request, err: Exception):
        return _error_response(err)

    @app.get("/health")
    def health():
        return {"status": "ok", "format_version": store.FORMAT_VERSION}

    @app.get("/mapping-table")
    def mapping_table():
        return {"rows": [rule.to_dict() for rule in mapping.MAPPING_TABLE]}

    @app.post("/projects", status_code=201)
    def create_project():
        project = registry.create()
        return _project_view(project)

    @app.get("/projects/{project_id}")
    def get_project(project_id: str):
        return _project_view(registry.get(project_id))

    @app.get("/projects/{project_id}/question")
    def get_question(project_id: str):
        project = registry.get(project_id)
        question = extraction.next_question(project.state.document)
        if question is None:
            return {"complete": True}
        return {
            "complete": False,
            "field": question.field.value,
            "prompt": question.prompt,
        }

    @app.post("/projects/{project_id}/answers")
    def post_answer(project_id: str, body: AnswerBody):
        project = registry.get(project_id)
        field = _parse_field(body.field)
        with project.exclusive():
            document = extraction.ingest_answer(project, field, body.text)
        entry = document.answer(field)
        question = extraction.next_question(document)
        return {
            "field": field.value,
            "specificity": entry.specificity.to_dict(),
            "document": document.to_dict(),
            "document_complete": document.complete(),
            "next_question": (
                None
                if question is None
                else {"field": question.field.value, "prompt": question.prompt}
            ),
        }

    @app.get("/projects/{project_id}/options/{field}")
    def get_options(project_id: str, field: str):
        project = registry.get(project_id)
        parsed = _parse_field(field)
        with project.exclusive():
            option_set = extraction.propose_options(project, llm, parsed)
        return {"field": parsed.value, "options": list(option_set.options)}

    @app.post("/projects/{project_id}/pedagogy-sentence")
    def compose_pedagogy(project_id: str):
        project = registry.get(project_id)
        with project.exclusive():
            version, sentence = extraction.compose_pedagogy_sentence(project, llm)
        return {"version": version, **_sentence_view(sentence),
                "phase": project.state.phase.value}

    @app.post("/projects/{project_id}/candidates")
    def post_candidates(project_id: str, body: CandidatesBody):
        project = registry.get(project_id)
        with project.exclusive():
            if body.sentence is not None:
                if body.rationales is None:
                    raise ValueError("user-authored candidates require rationales")
                sentence = cnl.ControlledSentence.from_dict(
                    {**body.sentence, "register": cnl.Register.GAME.value}
                )
                rationale_texts = {
                    _parse_kind(kind): text for kind, text in body.rationales.items()
                }
                missing = [k.value for k in cnl.SLOT_ORDER if k not in rationale_texts]
                if missing:
                    raise ValueError(f"missing rationales for: {', '.join(missing)}")
                candidate = translation.author_candidate(
                    project, sentence, rationale_texts
                )
                return {
                    "pedagogy_version": candidate.source_pedagogy_version,
                    "candidates": [_candidate_view(project, candidate)],
                    "accepted": project.state.accepted_candidate,
                }
            n = body.n if body.n is not None else translation.DEFAULT_CANDIDATE_COUNT
            candidate_set = translation.generate_candidates(project, llm, n)
        return {
            "pedagogy_version": candidate_set.pedagogy_version,
            "candidates": [
                _candidate_view(project, c) for c in candidate_set.candidates
            ],
            "accepted": candidate_set.accepted,
        }

    @app.post("/projects/{project_id}/candidates/{candidate_id}/slots/{kind}/regenerate")
    def regenerate_slot(project_id: str, candidate_id: str, kind: str):
        project = registry.get(project_id)
        parsed_kind = _parse_kind(kind)
        with project.exclusive():
            candidate = translation.regenerate_slot(
                project, llm, candidate_id, parsed_kind
            )
        return _candidate_view(project, candidate)

    @app.patch("/projects/{project_id}/candidates/{candidate_id}/slots/{kind}")
    def edit_slot(project_id: str, candidate_id: str, kind: str, body: SlotPatchBody):
        project = registry.get(project_id)
        parsed_kind = _parse_kind(kind)
        with project.exclusive():
            candidate = translation.edit_slot(
                project, candidate_id, parsed_kind, body.text, body.rationale
            )
        return _candidate_view(project, candidate)

    @app.post("/projects/{project_id}/candidates/{candidate_id}/accept")
    def accept_candidate(project_id: str, candidate_id: str):
        project = registry.get(project_id)
        with project.exclusive():
            candidate_set = translation.accept_candidate(project, candidate_id)
        return {
            "accepted": candidate_set.accepted,
            "phase": project.state.phase.value,
            "artifacts": [_artifact_view(a) for a in project.state.artifacts],
        }

    @app.post("/projects/{project_id}/refine")
    def refine(project_id: str, body: RefineBody):
        project = registry.get(project_id)
        with project.exclusive():
            artifact = development.refine_sentence(project, llm, body.instruction)
        return _artifact_view(artifact)

    @app.post("/projects/{project_id}/artifacts/{artifact_id}/zoom")
    def zoom(project_id: str, artifact_id: str):
        project = registry.get(project_id)
        with project.exclusive():
            artifact = development.zoom_in(project, llm, artifact_id)
        return _artifact_view(artifact)

    @app.get("/projects/{project_id}/trace/{ref}")
    def trace(project_id: str, ref: str):
        project = registry.get(project_id)
        return project.trace(ref).to_dict()

    @app.get("/projects/{project_id}/events")
    def events(project_id: str):
        project = registry.get(project_id)
        return {"events": [e.to_dict() for e in project.events]}

    if config.ui_dir is not None and Path(config.ui_dir).is_dir():
        app.mount("/", StaticFiles(directory=config.ui_dir, html=True), name="ui")

    return app
