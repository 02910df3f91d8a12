"""Event-sourced per-project persistence.

The append-only event log is the source of truth: live state is always the
fold of the log, and the snapshot stored alongside it is a pure cache. Every
mutation in the system lands here as exactly one event.

Project file format (version ``pedforge/1``)::

    pedforge/1
    [events]
    <one canonical-JSON event per line>
    [snapshot]
    <one canonical-JSON line: the folded state>

The file is rewritten atomically on every append, so an event is durable
before the append returns and the file is always self-consistent. On load the
snapshot is compared against a replay of the log; the log wins on mismatch
(with a warning), while a damaged log raises :class:`CorruptFile`.

Timestamps are recorded on events but excluded from state, so replay equality
is exact. Single-writer per project is enforced by an exclusive file lock
held for the lifetime of the open store, plus an in-process mutex.
"""

from __future__ import annotations

import json
import os
import threading
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path
from typing import Iterable, Mapping

from filelock import FileLock, Timeout

from .cnl import ControlledSentence
from .development import ExpansionArtifact, ExpansionLevel
from .errors import GateNotSatisfied, NotFound, PedforgeError, ProjectLocked, StorageFailure
from .extraction import FIELD_ORDER, RequirementDocument, RequirementField
from .translation import Origin, TranslationCandidate

FORMAT_VERSION = "pedforge/1"


class CorruptFile(PedforgeError):
    """The project file cannot be trusted: bad header, section, or log line."""


class Phase(Enum):
    EXTRACTION = "Extraction"
    TRANSLATION = "Translation"
    DEVELOPMENT = "Development"


PHASE_ORDER: tuple[Phase, ...] = (
    Phase.EXTRACTION, Phase.TRANSLATION, Phase.DEVELOPMENT
)


class Actor(Enum):
    INSTRUCTOR = "Instructor"
    ASSISTANT = "Assistant"


class EventAction(Enum):
    ANSWER_INGESTED = "AnswerIngested"
    OPTIONS_PROPOSED = "OptionsProposed"
    PEDAGOGY_SENTENCE_COMPOSED = "PedagogySentenceComposed"
    CANDIDATE_GENERATED = "CandidateGenerated"
    SLOT_EDITED = "SlotEdited"
    SLOT_REGENERATED = "SlotRegenerated"
    CANDIDATE_ACCEPTED = "CandidateAccepted"
    ACCEPTANCE_CLEARED = "AcceptanceCleared"
    SENTENCE_REFINED = "SentenceRefined"
    ARTIFACT_ZOOMED = "ArtifactZoomed"
    PHASE_ADVANCED = "PhaseAdvanced"


@dataclass(frozen=True)
class ProjectEvent:
    sequence: int
    timestamp: str
    actor: Actor
    action: EventAction
    subject: str
    payload: dict

    def to_dict(self) -> dict:
        return {
            "sequence": self.sequence,
            "timestamp": self.timestamp,
            "actor": self.actor.value,
            "action": self.action.value,
            "subject": self.subject,
            "payload": self.payload,
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "ProjectEvent":
        return cls(
            sequence=data["sequence"],
            timestamp=data["timestamp"],
            actor=Actor(data["actor"]),
            action=EventAction(data["action"]),
            subject=data["subject"],
            payload=dict(data["payload"]),
        )


def canonical_json(obj) -> str:
    """Stable serialization used for files, snapshots, and equality checks."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


@dataclass
class ProjectState:
    """Derived state: the fold of the event log. No timestamps, no identity."""

    phase: Phase = Phase.EXTRACTION
    document: RequirementDocument = field(default_factory=RequirementDocument.empty)
    options: dict[RequirementField, tuple[str, ...]] = field(default_factory=dict)
    pedagogy_versions: list[tuple[str, ControlledSentence]] = field(default_factory=list)
    candidates: list[TranslationCandidate] = field(default_factory=list)
    accepted_candidate: str | None = None
    artifacts: list[ExpansionArtifact] = field(default_factory=list)
    chat: list[dict] = field(default_factory=list)
    revisions: dict[str, int] = field(default_factory=dict)

    def active_pedagogy(self) -> tuple[str, ControlledSentence] | None:
        return self.pedagogy_versions[-1] if self.pedagogy_versions else None

    def pedagogy_by_version(self, version: str) -> ControlledSentence | None:
        for version_id, sentence in self.pedagogy_versions:
            if version_id == version:
                return sentence
        return None

    def candidate_by_id(self, candidate_id: str) -> TranslationCandidate | None:
        for candidate in self.candidates:
            if candidate.id == candidate_id:
                return candidate
        return None

    def candidate_revision(self, candidate_id: str) -> int:
        return self.revisions.get(candidate_id, 0)

    def artifact_by_id(self, artifact_id: str) -> ExpansionArtifact | None:
        for artifact in self.artifacts:
            if artifact.id == artifact_id:
                return artifact
        return None

    def current_artifact(self, level: ExpansionLevel,
                         candidate_id: str) -> ExpansionArtifact | None:
        for artifact in reversed(self.artifacts):
            if (artifact.level is level and artifact.source_candidate == candidate_id
                    and not artifact.outdated):
                return artifact
        return None

    def next_artifact_version(self, level: ExpansionLevel, candidate_id: str) -> int:
        count = sum(
            1 for a in self.artifacts
            if a.level is level and a.source_candidate == candidate_id
        )
        return count + 1

    def to_dict(self) -> dict:
        return {
            "phase": self.phase.value,
            "document": self.document.to_dict(),
            "options": {
                f.value: list(self.options[f]) for f in FIELD_ORDER if f in self.options
            },
            "pedagogy_versions": [
                {"version": v, "sentence": s.to_dict()}
                for v, s in self.pedagogy_versions
            ],
            "candidates": [c.to_dict() for c in self.candidates],
            "accepted_candidate": self.accepted_candidate,
            "artifacts": [a.to_dict() for a in self.artifacts],
            "chat": list(self.chat),
            "revisions": dict(sorted(self.revisions.items())),
        }


def initial_state() -> ProjectState:
    return ProjectState()


def _outdate_artifacts(artifacts: list[ExpansionArtifact], candidate_id: str,
                       levels: Iterable[ExpansionLevel]) -> list[ExpansionArtifact]:
    level_set = set(levels)
    return [
        replace(a, outdated=True)
        if a.source_candidate == candidate_id and a.level in level_set and not a.outdated
        else a
        for a in artifacts
    ]


def apply_event(state: ProjectState, event: ProjectEvent) -> ProjectState:
    """Pure reducer: the next state after one event."""
    payload = event.payload
    action = event.action

    if action is EventAction.ANSWER_INGESTED:
        field_ = RequirementField(payload["field"])
        document = state.document.with_answer(field_, payload["text"])
        return replace(state, document=document)

    if action is EventAction.OPTIONS_PROPOSED:
        field_ = RequirementField(payload["field"])
        options = dict(state.options)
        options[field_] = tuple(payload["options"])
        return replace(state, options=options)

    if action is EventAction.PEDAGOGY_SENTENCE_COMPOSED:
        versions = list(state.pedagogy_versions)
        versions.append(
            (payload["version"], ControlledSentence.from_dict(payload["sentence"]))
        )
        return replace(state, pedagogy_versions=versions)

    if action is EventAction.CANDIDATE_GENERATED:
        candidates = list(state.candidates)
        candidates.append(TranslationCandidate.from_dict(payload["candidate"]))
        return replace(state, candidates=candidates)

    if action in (EventAction.SLOT_EDITED, EventAction.SLOT_REGENERATED):
        from .cnl import SlotKind
        from .mapping import SlotRationale

        candidate_id = payload["candidate_id"]
        kind = SlotKind(payload["kind"])
        candidates = []
        for candidate in state.candidates:
            if candidate.id != candidate_id:
                candidates.append(candidate)
                continue
            updated = replace(
                candidate,
                sentence=candidate.sentence.with_slot(kind, payload["text"]),
                origin=Origin(payload["origin"]),
            )
            if payload.get("rationale") is not None:
                updated = updated.with_rationale(
                    SlotRationale.from_dict(payload["rationale"])
                )
            else:
                old = updated.rationale_for(kind)
                updated = updated.with_rationale(replace(old, stale=True))
            candidates.append(updated)
        revisions = dict(state.revisions)
        revisions[candidate_id] = revisions.get(candidate_id, 0) + 1
        return replace(state, candidates=candidates, revisions=revisions)

    if action is EventAction.CANDIDATE_ACCEPTED:
        artifacts = _outdate_artifacts(
            state.artifacts, payload["candidate_id"], list(ExpansionLevel)
        )
        artifacts.append(ExpansionArtifact.from_dict(payload["artifact"]))
        return replace(
            state, accepted_candidate=payload["candidate_id"], artifacts=artifacts
        )

    if action is EventAction.ACCEPTANCE_CLEARED:
        return replace(state, accepted_candidate=None)

    if action is EventAction.SENTENCE_REFINED:
        artifact = ExpansionArtifact.from_dict(payload["artifact"])
        artifacts = _outdate_artifacts(
            state.artifacts, artifact.source_candidate, list(ExpansionLevel)
        )
        artifacts.append(artifact)
        chat = list(state.chat)
        chat.append(
            {"instruction": payload["instruction"], "sentence": artifact.content}
        )
        return replace(state, artifacts=artifacts, chat=chat)

    if action is EventAction.ARTIFACT_ZOOMED:
        artifact = ExpansionArtifact.from_dict(payload["artifact"])
        artifacts = _outdate_artifacts(
            state.artifacts, artifact.source_candidate, [artifact.level]
        )
        artifacts.append(artifact)
        return replace(state, artifacts=artifacts)

    if action is EventAction.PHASE_ADVANCED:
        return replace(state, phase=Phase(payload["to"]))

    raise ValueError(f"unknown event action: {action}")


def replay(events: Iterable[ProjectEvent]) -> ProjectState:
    state = initial_state()
    for event in events:
        state = apply_event(state, event)
    return state


@dataclass(frozen=True)
class TraceLink:
    ref: str
    event: ProjectEvent

    def to_dict(self) -> dict:
        return {"ref": self.ref, "event": self.event.to_dict()}


@dataclass(frozen=True)
class TraceChain:
    links: tuple[TraceLink, ...]

    def to_dict(self) -> dict:
        return {"links": [link.to_dict() for link in self.links]}


class ProjectStore:
    """One project: its event log, folded state, file, and exclusive lock."""

    def __init__(self, path: Path, events: list[ProjectEvent],
                 lock: FileLock, warnings: list[str]):
        self.path = Path(path)
        self.events = events
        self.state = replay(events)
        self.warnings = warnings
        self._lock = lock
        self._mutex = threading.RLock()

    # -- lifecycle ----------------------------------------------------------

    @staticmethod
    def _acquire_lock(path: Path) -> FileLock:
        # Process-scoped, not thread-local: requests acquire in worker threads
        # while shutdown releases from the lifespan thread. In-process
        # serialization is the mutex's job.
        lock = FileLock(str(path) + ".lock", thread_local=False)
        try:
            lock.acquire(timeout=0.0)
        except Timeout as err:
            raise ProjectLocked(f"project file is locked: {path}") from err
        return lock

    @classmethod
    def create(cls, path: Path) -> "ProjectStore":
        path = Path(path)
        if path.exists():
            raise StorageFailure(f"project file already exists: {path}")
        lock = cls._acquire_lock(path)
        store = cls(path, [], lock, [])
        store._write()
        return store

    @classmethod
    def load(cls, path: Path) -> "ProjectStore":
        path = Path(path)
        if not path.exists():
            raise NotFound(f"no project file at {path}")
        lock = cls._acquire_lock(path)
        try:
            events, snapshot, warnings = cls._read(path)
        except Exception:
            lock.release()
            raise
        store = cls(path, events, lock, warnings)
        if snapshot is not None and canonical_json(store.state.to_dict()) != canonical_json(snapshot):
            store.warnings.append(
                "snapshot did not match the event log; state rebuilt from the log"
            )
        return store

    def close(self) -> None:
        if self._lock.is_locked:
            self._lock.release()

    def __enter__(self) -> "ProjectStore":
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    @property
    def project_id(self) -> str:
        return self.path.stem

    def exclusive(self):
        """Per-project mutation mutex; used by the service layer."""
        return self._mutex

    # -- persistence ----------------------------------------------------------

    @staticmethod
    def _read(path: Path) -> tuple[list[ProjectEvent], dict | None, list[str]]:
        text = path.read_text(encoding="utf-8")
        lines = text.splitlines()
        if not lines or lines[0] != FORMAT_VERSION:
            raise CorruptFile(f"bad header; expected {FORMAT_VERSION!r}")
        if len(lines) < 2 or lines[1] != "[events]":
            raise CorruptFile("missing [events] section")
        try:
            snapshot_index = lines.index("[snapshot]")
        except ValueError:
            raise CorruptFile("missing [snapshot] section (truncated file?)") from None
        events: list[ProjectEvent] = []
        for offset, line in enumerate(lines[2:snapshot_index], start=3):
            if not line.strip():
                continue
            try:
                events.append(ProjectEvent.from_dict(json.loads(line)))
            except (json.JSONDecodeError, KeyError, ValueError) as err:
                raise CorruptFile(f"unreadable event at line {offset}: {err}") from err
        for expected, event in enumerate(events, start=1):
            if event.sequence != expected:
                raise CorruptFile(
                    f"event sequence gap: expected {expected}, found {event.sequence}"
                )
        warnings: list[str] = []
        snapshot: dict | None = None
        snapshot_lines = [l for l in lines[snapshot_index + 1 :] if l.strip()]
        if not snapshot_lines:
            warnings.append("empty snapshot; state rebuilt from the log")
        else:
            try:
                snapshot = json.loads("\n".join(snapshot_lines))
            except json.JSONDecodeError:
                warnings.append("unreadable snapshot; state rebuilt from the log")
        return events, snapshot, warnings

    def _write(self) -> None:
        lines = [FORMAT_VERSION, "[events]"]
        lines.extend(canonical_json(e.to_dict()) for e in self.events)
        lines.append("[snapshot]")
        lines.append(canonical_json(self.state.to_dict()))
        data = "\n".join(lines) + "\n"
        tmp = self.path.with_suffix(self.path.suffix + ".tmp")
        try:
            with open(tmp, "w", encoding="utf-8") as handle:
                handle.write(data)
                handle.flush()
                os.fsync(handle.fileno())
            os.replace(tmp, self.path)
        except OSError as err:
            raise StorageFailure(f"could not write project file: {err}") from err

    def save(self) -> None:
        """Serialize log + snapshot. Appends already persist; this re-writes."""
        with self._mutex:
            self._write()

    # -- mutation ----------------------------------------------------------

    def append_event(self, actor: Actor, action: EventAction, subject: str,
                     payload: dict) -> ProjectEvent:
        """Assign the next sequence number, persist durably, fold into state."""
        with self._mutex:
            event = ProjectEvent(
                sequence=len(self.events) + 1,
                timestamp=datetime.now(timezone.utc).isoformat(timespec="microseconds"),
                actor=actor,
                action=action,
                subject=subject,
                payload=payload,
            )
            new_state = apply_event(self.state, event)
            self.events.append(event)
            previous_state = self.state
            self.state = new_state
            try:
                self._write()
            except BaseException:
                self.events.pop()
                self.state = previous_state
                raise
            return event

    def advance_phase(self, target: Phase) -> Phase:
        """Move the workflow phase; forward moves are gated and stepwise."""
        current = self.state.phase
        if target is current:
            return current
        current_index = PHASE_ORDER.index(current)
        target_index = PHASE_ORDER.index(target)
        if target_index > current_index:
            if target_index != current_index + 1:
                raise GateNotSatisfied("phases advance one step at a time")
            if target is Phase.TRANSLATION and not self.state.document.complete():
                raise GateNotSatisfied("requirement document is not complete")
            if target is Phase.DEVELOPMENT and self.state.accepted_candidate is None:
                raise GateNotSatisfied("no candidate has been accepted")
        self.append_event(
            Actor.INSTRUCTOR,
            EventAction.PHASE_ADVANCED,
            "phase",
            {"from": current.value, "to": target.value},
        )
        return self.state.phase

    # -- trace queries ----------------------------------------------------------

    def _producing_event(self, ref: str, before: int | None = None) -> ProjectEvent | None:
        kind, _, ident = ref.partition(":")
        for event in reversed(self.events):
            if before is not None and event.sequence >= before:
                continue
            payload = event.payload
            if kind in ("answer", "options", "pedagogy") and event.subject == ref:
                return event
            if kind == "candidate" and event.action is EventAction.CANDIDATE_GENERATED:
                if payload.get("candidate", {}).get("id") == ident:
                    return event
            if kind == "artifact" and event.action in (
                EventAction.CANDIDATE_ACCEPTED,
                EventAction.SENTENCE_REFINED,
                EventAction.ARTIFACT_ZOOMED,
            ):
                if payload.get("artifact", {}).get("id") == ident:
                    return event
        return None

    def _answer_links(self, before: int) -> list[TraceLink]:
        links = []
        for field_ in FIELD_ORDER:
            ref = f"answer:{field_.value}"
            event = self._producing_event(ref, before=before)
            if event is not None:
                links.append(TraceLink(ref, event))
        return links

    def trace(self, ref: str) -> TraceChain:
        """Follow stored parent/source references from ``ref`` back to the
        requirement answers that ground it."""
        links: list[TraceLink] = []
        kind, _, ident = ref.partition(":")

        if kind == "artifact":
            current = self.state.artifact_by_id(ident)
            if current is None:
                raise NotFound(f"unknown trace ref: {ref}")
            while True:
                event = self._producing_event(f"artifact:{current.id}")
                links.append(TraceLink(f"artifact:{current.id}", event))
                if current.parent is None:
                    break
                current = self.state.artifact_by_id(current.parent)
            kind, ident = "candidate", current.source_candidate

        if kind == "candidate":
            candidate = self.state.candidate_by_id(ident)
            if candidate is None:
                raise NotFound(f"unknown trace ref: {ref}")
            event = self._producing_event(f"candidate:{ident}")
            links.append(TraceLink(f"candidate:{ident}", event))
            kind, ident = "pedagogy", candidate.source_pedagogy_version

        if kind == "pedagogy":
            if self.state.pedagogy_by_version(ident) is None:
                raise NotFound(f"unknown trace ref: {ref}")
            event = self._producing_event(f"pedagogy:{ident}")
            links.append(TraceLink(f"pedagogy:{ident}", event))
            links.extend(self._answer_links(before=event.sequence))
            return TraceChain(tuple(links))

        if kind == "answer":
            event = self._producing_event(ref)
            if event is None:
                raise NotFound(f"unknown trace ref: {ref}")
            return TraceChain((TraceLink(ref, event),))

        if kind == "options":
            event = self._producing_event(ref)
            if event is None:
                raise NotFound(f"unknown trace ref: {ref}")
            return TraceChain((TraceLink(ref, event),))

        raise NotFound(f"unknown trace ref: {ref}")
