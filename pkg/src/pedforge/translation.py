"""Game-language translation candidates.

The committed pedagogy sentence is translated into several candidate game
sentences, each carrying one rationale per slot that cites the pedagogy text
it realizes. Candidates can be regenerated slot by slot, edited in place, or
written from scratch; accepting one requires it to be fully aligned against
the *current* pedagogy sentence.

Slot regeneration asks the provider for a whole fresh candidate and splices
in only the named slot, so the other three slots are unchanged by
construction. An edit without a replacement rationale marks the old rationale
stale, which blocks acceptance until a rationale is supplied.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum
from typing import TYPE_CHECKING, Mapping

from .cnl import (
    SLOT_ORDER,
    ControlledSentence,
    Register,
    SlotKind,
    render_sentence,
    validate_slot_text,
)
from .errors import GateNotSatisfied, NotFound
from .gateway import CandidateContract, Gateway, PromptPhase, PromptSpec
from .mapping import (
    AlignmentReport,
    SlotRationale,
    align_candidate,
    is_fully_aligned,
    mapping_table_text,
)

if TYPE_CHECKING:
    from .store import ProjectStore

DEFAULT_CANDIDATE_COUNT = 3
MAX_CANDIDATE_COUNT = 5


class Origin(Enum):
    AI_GENERATED = "AiGenerated"
    USER_AUTHORED = "UserAuthored"
    USER_EDITED = "UserEdited"


class NotAligned(Exception):
    """The candidate is not fully aligned against the current pedagogy sentence."""

    def __init__(self, stale: tuple[SlotKind, ...], missing: tuple[SlotKind, ...]):
        kinds = ", ".join(k.value for k in (*stale, *missing))
        super().__init__(f"candidate not fully aligned; affected kinds: {kinds}")
        self.stale = stale
        self.missing = missing


@dataclass(frozen=True)
class TranslationCandidate:
    """One game-register proposal with per-slot rationale."""

    id: str
    sentence: ControlledSentence
    rationales: tuple[SlotRationale, ...]
    origin: Origin
    source_pedagogy_version: str

    def __post_init__(self):
        if self.sentence.register is not Register.GAME:
            raise ValueError("candidate sentences are in the Game register")
        kinds = [r.kind for r in self.rationales]
        if sorted(kinds, key=SLOT_ORDER.index) != list(SLOT_ORDER):
            raise ValueError("candidates carry exactly one rationale per slot kind")

    def rationale_for(self, kind: SlotKind) -> SlotRationale:
        return next(r for r in self.rationales if r.kind is kind)

    def with_rationale(self, rationale: SlotRationale) -> "TranslationCandidate":
        updated = tuple(
            rationale if r.kind is rationale.kind else r for r in self.rationales
        )
        return replace(self, rationales=updated)

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "sentence": self.sentence.to_dict(),
            "rationales": [r.to_dict() for r in self.rationales],
            "origin": self.origin.value,
            "source_pedagogy_version": self.source_pedagogy_version,
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "TranslationCandidate":
        return cls(
            id=data["id"],
            sentence=ControlledSentence.from_dict(data["sentence"]),
            rationales=tuple(SlotRationale.from_dict(r) for r in data["rationales"]),
            origin=Origin(data["origin"]),
            source_pedagogy_version=data["source_pedagogy_version"],
        )


@dataclass(frozen=True)
class CandidateSet:
    pedagogy_version: str
    candidates: tuple[TranslationCandidate, ...]
    accepted: str | None = None

    def __post_init__(self):
        if self.accepted is not None:
            if self.accepted not in {c.id for c in self.candidates}:
                raise ValueError("accepted id must name a member candidate")


def alignment_for(project: "ProjectStore",
                  candidate: TranslationCandidate) -> AlignmentReport:
    """Alignment of a candidate against the current pedagogy sentence."""
    active = project.state.active_pedagogy()
    if active is None:
        raise GateNotSatisfied("no pedagogy sentence has been composed")
    _, pedagogy = active
    return align_candidate(pedagogy, candidate.sentence, candidate.rationales)


def _require_candidate(project: "ProjectStore", candidate_id: str) -> TranslationCandidate:
    candidate = project.state.candidate_by_id(candidate_id)
    if candidate is None:
        raise NotFound(f"unknown candidate: {candidate_id}")
    return candidate


def _require_pedagogy(project: "ProjectStore") -> tuple[str, ControlledSentence]:
    active = project.state.active_pedagogy()
    if active is None:
        raise GateNotSatisfied("no pedagogy sentence has been composed")
    return active


def _rationales_from_texts(pedagogy: ControlledSentence,
                           texts: Mapping[SlotKind, str]) -> tuple[SlotRationale, ...]:
    return tuple(
        SlotRationale(kind, texts[kind], pedagogy.slot_text(kind))
        for kind in SLOT_ORDER
    )


def _candidate_spec(pedagogy: ControlledSentence, index: int, total: int,
                    forbid: tuple[str, ...]) -> PromptSpec:
    return PromptSpec(
        phase=PromptPhase.TRANSLATION,
        objective=(
            f"Translate the pedagogy sentence into game language: propose "
            f"candidate {index + 1} of {total}, distinct from the others."
        ),
        context_blocks=(
            ("pedagogy-sentence", render_sentence(pedagogy)),
            ("mapping-table", mapping_table_text()),
            ("candidate-index", str(index)),
        ),
        output_contract=CandidateContract(forbid_sentences=forbid),
    )


def generate_candidates(project: "ProjectStore", gateway: Gateway,
                        n: int = DEFAULT_CANDIDATE_COUNT) -> CandidateSet:
    """Generate ``n`` distinct, fully aligned candidates via the gateway."""
    from .store import Actor, EventAction

    if not 1 <= n <= MAX_CANDIDATE_COUNT:
        raise ValueError(f"candidate count must be between 1 and {MAX_CANDIDATE_COUNT}")
    version, pedagogy = _require_pedagogy(project)
    existing = tuple(
        render_sentence(c.sentence) for c in project.state.candidates
    )
    created: list[TranslationCandidate] = []
    for index in range(n):
        forbid = existing + tuple(render_sentence(c.sentence) for c in created)
        spec = _candidate_spec(pedagogy, index, n, forbid)
        result = gateway.complete(spec)
        sentence, rationale_texts = spec.output_contract.validate(result.raw_text)
        candidate = TranslationCandidate(
            id=f"c{len(project.state.candidates) + 1}",
            sentence=sentence,
            rationales=_rationales_from_texts(pedagogy, rationale_texts),
            origin=Origin.AI_GENERATED,
            source_pedagogy_version=version,
        )
        project.append_event(
            Actor.ASSISTANT,
            EventAction.CANDIDATE_GENERATED,
            f"candidate:{candidate.id}",
            {"candidate": candidate.to_dict()},
        )
        created.append(candidate)
    return CandidateSet(version, tuple(created))


def author_candidate(project: "ProjectStore", sentence: ControlledSentence,
                     rationale_texts: Mapping[SlotKind, str]) -> TranslationCandidate:
    """Store an instructor-written candidate (rationales required for all kinds)."""
    from .store import Actor, EventAction

    version, pedagogy = _require_pedagogy(project)
    candidate = TranslationCandidate(
        id=f"c{len(project.state.candidates) + 1}",
        sentence=sentence,
        rationales=_rationales_from_texts(pedagogy, rationale_texts),
        origin=Origin.USER_AUTHORED,
        source_pedagogy_version=version,
    )
    project.append_event(
        Actor.INSTRUCTOR,
        EventAction.CANDIDATE_GENERATED,
        f"candidate:{candidate.id}",
        {"candidate": candidate.to_dict()},
    )
    return candidate


def regenerate_slot(project: "ProjectStore", gateway: Gateway,
                    candidate_id: str, kind: SlotKind) -> TranslationCandidate:
    """Regenerate one slot; the other three slots stay byte-identical."""
    from .store import Actor, EventAction

    candidate = _require_candidate(project, candidate_id)
    _, pedagogy = _require_pedagogy(project)
    revision = project.state.candidate_revision(candidate_id)
    spec = PromptSpec(
        phase=PromptPhase.TRANSLATION,
        objective=(
            f"Regenerate only the {kind.value.lower()} slot of the candidate "
            f"below; propose a fresh take on it."
        ),
        context_blocks=(
            ("pedagogy-sentence", render_sentence(pedagogy)),
            ("candidate", render_sentence(candidate.sentence)),
            ("slot-kind", kind.value),
            ("revision", str(revision)),
            ("candidate-index", str(revision)),
        ),
        output_contract=CandidateContract(),
    )
    result = gateway.complete(spec)
    fresh_sentence, fresh_rationales = spec.output_contract.validate(result.raw_text)
    new_text = fresh_sentence.slot_text(kind)
    rationale = SlotRationale(kind, fresh_rationales[kind], pedagogy.slot_text(kind))
    project.append_event(
        Actor.ASSISTANT,
        EventAction.SLOT_REGENERATED,
        f"candidate:{candidate_id}",
        {
            "candidate_id": candidate_id,
            "kind": kind.value,
            "text": new_text,
            "rationale": rationale.to_dict(),
            "origin": Origin.AI_GENERATED.value,
        },
    )
    return project.state.candidate_by_id(candidate_id)


def edit_slot(project: "ProjectStore", candidate_id: str, kind: SlotKind,
              new_text: str, new_rationale: str | None = None) -> TranslationCandidate:
    """Manually edit one slot; without a new rationale the old one goes stale."""
    from .store import Actor, EventAction

    candidate = _require_candidate(project, candidate_id)
    validate_slot_text(new_text)
    payload: dict = {
        "candidate_id": candidate_id,
        "kind": kind.value,
        "text": new_text,
        "rationale": None,
        "origin": Origin.USER_EDITED.value,
    }
    if new_rationale is not None:
        _, pedagogy = _require_pedagogy(project)
        rationale = SlotRationale(kind, new_rationale, pedagogy.slot_text(kind))
        payload["rationale"] = rationale.to_dict()
    project.append_event(
        Actor.INSTRUCTOR, EventAction.SLOT_EDITED,
        f"candidate:{candidate_id}", payload,
    )
    return project.state.candidate_by_id(candidate_id)


def accept_candidate(project: "ProjectStore", candidate_id: str) -> CandidateSet:
    """Commit to a candidate; opens the development phase.

    Re-accepting the already-accepted candidate is a no-op success.
    """
    from .development import ExpansionLevel
    from .store import Actor, EventAction, Phase

    candidate = _require_candidate(project, candidate_id)
    state = project.state
    if state.accepted_candidate == candidate_id:
        return CandidateSet(
            candidate.source_pedagogy_version, tuple(state.candidates), candidate_id
        )
    report = alignment_for(project, candidate)
    if not is_fully_aligned(report):
        from .mapping import AlignmentStatus

        raise NotAligned(
            stale=report.kinds_with(AlignmentStatus.STALE_REFERENCE),
            missing=report.kinds_with(AlignmentStatus.MISSING_RATIONALE),
        )
    artifact = {
        "id": f"a{len(state.artifacts) + 1}",
        "level": ExpansionLevel.SENTENCE.value,
        "content": render_sentence(candidate.sentence),
        "parent": None,
        "source_candidate": candidate_id,
        "version": state.next_artifact_version(ExpansionLevel.SENTENCE, candidate_id),
        "outdated": False,
    }
    project.append_event(
        Actor.INSTRUCTOR,
        EventAction.CANDIDATE_ACCEPTED,
        f"candidate:{candidate_id}",
        {"candidate_id": candidate_id, "artifact": artifact},
    )
    if project.state.phase is Phase.TRANSLATION:
        project.advance_phase(Phase.DEVELOPMENT)
    return CandidateSet(
        candidate.source_pedagogy_version,
        tuple(project.state.candidates),
        candidate_id,
    )
