"""Context-aware refinement and the Zoom In ladder.

After a candidate is accepted, its game sentence becomes the root of a
three-rung ladder: sentence -> descriptive paragraph with play examples ->
pseudocode. Refining the sentence creates a new sentence version and flags
existing paragraph/pseudocode artifacts outdated; zooming always works from a
current (non-outdated) artifact.

Pseudocode format
-----------------
The exported pseudocode is plain text with uppercase top-level section
keywords and two-space nesting::

    GAME: <title>
    SETUP:
      ...
    LOOP:
      ...
    WIN_CONDITION:
      ...
    LOSE_OR_RETRY:
      ...

All five sections are required. For traceability, every slot text of the
source game sentence must appear verbatim at least once.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from typing import TYPE_CHECKING, Iterable, Mapping

from .cnl import SLOT_ORDER, ControlledSentence, Register, parse_sentence, render_sentence
from .errors import NotFound
from .extraction import document_context_block
from .gateway import (
    ControlledSentenceContract,
    Gateway,
    ParagraphContract,
    PromptPhase,
    PromptSpec,
    PseudocodeContract,
)

if TYPE_CHECKING:
    from .store import ProjectStore


class ExpansionLevel(Enum):
    SENTENCE = "Sentence"
    PARAGRAPH = "Paragraph"
    PSEUDOCODE = "Pseudocode"


LEVEL_ORDER: tuple[ExpansionLevel, ...] = (
    ExpansionLevel.SENTENCE,
    ExpansionLevel.PARAGRAPH,
    ExpansionLevel.PSEUDOCODE,
)


def next_level(level: ExpansionLevel) -> ExpansionLevel | None:
    index = LEVEL_ORDER.index(level)
    if index + 1 >= len(LEVEL_ORDER):
        return None
    return LEVEL_ORDER[index + 1]


class NoAcceptedCandidate(Exception):
    """Refinement and zooming require an accepted candidate."""


class MaxDepth(Exception):
    """Pseudocode is the top of the ladder; it cannot be zoomed further."""


class ArtifactOutdated(Exception):
    """Zooming works from the newest version only."""


@dataclass(frozen=True)
class ExpansionArtifact:
    """One rung of the ladder, with parent provenance."""

    id: str
    level: ExpansionLevel
    content: str
    parent: str | None
    source_candidate: str
    version: int
    outdated: bool = False

    def __post_init__(self):
        if (self.parent is None) != (self.level is ExpansionLevel.SENTENCE):
            raise ValueError("exactly the sentence-level artifact has no parent")

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "level": self.level.value,
            "content": self.content,
            "parent": self.parent,
            "source_candidate": self.source_candidate,
            "version": self.version,
            "outdated": self.outdated,
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "ExpansionArtifact":
        return cls(
            id=data["id"],
            level=ExpansionLevel(data["level"]),
            content=data["content"],
            parent=data["parent"],
            source_candidate=data["source_candidate"],
            version=data["version"],
            outdated=bool(data.get("outdated", False)),
        )


PSEUDOCODE_SECTIONS = ("GAME", "SETUP", "LOOP", "WIN_CONDITION", "LOSE_OR_RETRY")

_KEYWORD_LINE_RE = re.compile(r"^(?P<keyword>[^\s:]+):(?P<rest>.*)$")
_UPPER_KEYWORD_RE = re.compile(r"^[A-Z][A-Z0-9_]*$")


@dataclass(frozen=True)
class FormatCheck:
    passed: bool
    reasons: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {"passed": self.passed, "reasons": list(self.reasons)}


def check_pseudocode_format(content: str,
                            slot_texts: Iterable[str] = ()) -> FormatCheck:
    """Check sections, keyword case, indentation, and slot-text traceability."""
    reasons: list[str] = []
    if not content.strip():
        return FormatCheck(False, ("empty content",))
    seen_sections: set[str] = set()
    for number, line in enumerate(content.splitlines(), start=1):
        if not line.strip():
            continue
        if "\t" in line:
            reasons.append(f"tab character at line {number}")
            continue
        indent = len(line) - len(line.lstrip(" "))
        if indent == 0:
            match = _KEYWORD_LINE_RE.match(line)
            if match is None:
                reasons.append(f"top-level line {number} is not a section keyword")
                continue
            keyword = match.group("keyword")
            if not _UPPER_KEYWORD_RE.match(keyword):
                reasons.append(f"keyword not uppercase at line {number}: {keyword}")
                continue
            seen_sections.add(keyword)
        elif indent % 2 != 0:
            reasons.append(f"indentation not a multiple of two spaces at line {number}")
    for section in PSEUDOCODE_SECTIONS:
        if section not in seen_sections:
            reasons.append(f"missing section {section}")
    for text in slot_texts:
        if text not in content:
            reasons.append(f"slot text not traced: {text}")
    return FormatCheck(not reasons, tuple(reasons))


def validate_pseudocode(content: str,
                        source: ControlledSentence | None = None) -> FormatCheck:
    """Format check; with a source sentence, also checks slot traceability."""
    slot_texts = (
        tuple(source.slot_text(k) for k in SLOT_ORDER) if source is not None else ()
    )
    return check_pseudocode_format(content, slot_texts)


# ---------------------------------------------------------------------------
# Project-level commands
# ---------------------------------------------------------------------------


def _require_accepted(project: "ProjectStore"):
    state = project.state
    if state.accepted_candidate is None:
        raise NoAcceptedCandidate("no candidate has been accepted")
    return state.candidate_by_id(state.accepted_candidate)


def _current_sentence_artifact(project: "ProjectStore", candidate_id: str) -> ExpansionArtifact:
    artifact = project.state.current_artifact(ExpansionLevel.SENTENCE, candidate_id)
    if artifact is None:
        raise NotFound("no sentence-level artifact for the accepted candidate")
    return artifact


def current_game_sentence(project: "ProjectStore") -> ControlledSentence:
    """The newest refined game sentence of the accepted candidate."""
    candidate = _require_accepted(project)
    artifact = _current_sentence_artifact(project, candidate.id)
    return parse_sentence(artifact.content, Register.GAME)


def _chat_block(project: "ProjectStore") -> str:
    turns = project.state.chat
    if not turns:
        return "(no prior turns)"
    return "\n".join(
        f"{i}. instruction: {t['instruction']} -> {t['sentence']}"
        for i, t in enumerate(turns, start=1)
    )


def refine_sentence(project: "ProjectStore", gateway: Gateway,
                    instruction: str) -> ExpansionArtifact:
    """Apply a refinement instruction to the accepted game sentence.

    The full project context (requirement document, pedagogy sentence,
    accepted candidate, prior chat turns) rides along in the prompt. The
    result must reparse in the Game register; descendants become outdated.
    """
    from .store import Actor, EventAction

    candidate = _require_accepted(project)
    sentence_artifact = _current_sentence_artifact(project, candidate.id)
    active = project.state.active_pedagogy()
    pedagogy_text = render_sentence(active[1]) if active else "(none)"
    spec = PromptSpec(
        phase=PromptPhase.DEVELOPMENT,
        objective="Refine the game sentence as instructed, keeping the frame.",
        context_blocks=(
            ("requirement-document", document_context_block(project.state.document)),
            ("pedagogy-sentence", pedagogy_text),
            ("accepted-candidate", render_sentence(candidate.sentence)),
            ("game-sentence", sentence_artifact.content),
            ("chat", _chat_block(project)),
            ("instruction", instruction),
        ),
        output_contract=ControlledSentenceContract(Register.GAME),
    )
    result = gateway.complete(spec)
    refined = parse_sentence(result.raw_text.strip(), Register.GAME)
    artifact = {
        "id": f"a{len(project.state.artifacts) + 1}",
        "level": ExpansionLevel.SENTENCE.value,
        "content": render_sentence(refined),
        "parent": None,
        "source_candidate": candidate.id,
        "version": project.state.next_artifact_version(
            ExpansionLevel.SENTENCE, candidate.id
        ),
        "outdated": False,
    }
    project.append_event(
        Actor.ASSISTANT,
        EventAction.SENTENCE_REFINED,
        f"artifact:{artifact['id']}",
        {"instruction": instruction, "artifact": artifact},
    )
    return project.state.artifact_by_id(artifact["id"])


def zoom_in(project: "ProjectStore", gateway: Gateway,
            artifact_id: str) -> ExpansionArtifact:
    """Expand an artifact to the next rung of the ladder."""
    from .store import Actor, EventAction

    state = project.state
    artifact = state.artifact_by_id(artifact_id)
    if artifact is None:
        raise NotFound(f"unknown artifact: {artifact_id}")
    if artifact.level is ExpansionLevel.PSEUDOCODE:
        raise MaxDepth("pseudocode is the final expansion level")
    if artifact.outdated:
        raise ArtifactOutdated("zoom works from the newest version; this one is outdated")

    candidate_id = artifact.source_candidate
    sentence_artifact = _current_sentence_artifact(project, candidate_id)
    game_sentence = parse_sentence(sentence_artifact.content, Register.GAME)
    target = next_level(artifact.level)

    if target is ExpansionLevel.PARAGRAPH:
        contract = ParagraphContract()
        context = (
            ("game-sentence", sentence_artifact.content),
            ("requirement-document", document_context_block(state.document)),
        )
        objective = (
            "Write a descriptive paragraph, with play examples, of how the "
            "game described by the sentence plays."
        )
    else:
        slot_texts = tuple(game_sentence.slot_text(k) for k in SLOT_ORDER)
        contract = PseudocodeContract(slot_texts)
        context = (
            ("game-sentence", sentence_artifact.content),
            ("paragraph", artifact.content),
        )
        objective = "Expand the game description into reference pseudocode."

    spec = PromptSpec(
        phase=PromptPhase.DEVELOPMENT,
        objective=objective,
        context_blocks=context,
        output_contract=contract,
    )
    result = gateway.complete(spec)
    content = spec.output_contract.validate(result.raw_text)
    new_artifact = {
        "id": f"a{len(state.artifacts) + 1}",
        "level": target.value,
        "content": content,
        "parent": artifact_id,
        "source_candidate": candidate_id,
        "version": state.next_artifact_version(target, candidate_id),
        "outdated": False,
    }
    project.append_event(
        Actor.ASSISTANT,
        EventAction.ARTIFACT_ZOOMED,
        f"artifact:{new_artifact['id']}",
        {"artifact": new_artifact},
    )
    return project.state.artifact_by_id(new_artifact["id"])
