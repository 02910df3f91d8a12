"""Row-wise correspondence between teaching-register and game-register slots,
and the alignment check that gates translation candidates.

The table is fixed: one row per slot kind, each pairing an instructional
meaning with its game-design counterpart. Alignment is kind-to-kind -- a game
adverb is justified against the pedagogy adverb, and so on. A rationale is
*stale* when the pedagogy text it cites no longer matches the current
pedagogy sentence, or when it was explicitly marked stale after a game-side
edit left it justifying text that no longer exists.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Mapping

from .cnl import SLOT_ORDER, ControlledSentence, Register, RegisterMismatch, SlotKind

_TEACHING_MEANINGS = {
    SlotKind.ADVERB: "Specifies performance requirements for the targeted ability.",
    SlotKind.VERB: "Expresses the targeted teaching ability as an observable action.",
    SlotKind.NOUN: "Denotes the focal teaching concept or content domain.",
    SlotKind.ADJECTIVE: "Characterizes the learning context, realism level, and instructional tone.",
}

_GAME_MEANINGS = {
    SlotKind.ADVERB: "Rules and parameters that configure difficulty and success conditions.",
    SlotKind.VERB: "Game mechanics that define the primary player action and interaction pattern.",
    SlotKind.NOUN: "Content models and in-game artifacts that instantiate the concept.",
    SlotKind.ADJECTIVE: "Aesthetic and contextual profiles that define the game world and framing.",
}

_ELEMENT_LABELS = {
    SlotKind.ADVERB: "Adverb",
    SlotKind.VERB: "Verbs",
    SlotKind.NOUN: "Nouns",
    SlotKind.ADJECTIVE: "Adjectives",
}


@dataclass(frozen=True)
class MappingRule:
    """One fixed row of the teaching-to-game correspondence table."""

    kind: SlotKind
    element_label: str
    teaching_meaning: str
    game_meaning: str
    arrow: str = "teaching-to-game"

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "element_label": self.element_label,
            "teaching_meaning": self.teaching_meaning,
            "arrow": self.arrow,
            "game_meaning": self.game_meaning,
        }


MAPPING_TABLE: tuple[MappingRule, ...] = tuple(
    MappingRule(
        kind=kind,
        element_label=_ELEMENT_LABELS[kind],
        teaching_meaning=_TEACHING_MEANINGS[kind],
        game_meaning=_GAME_MEANINGS[kind],
    )
    for kind in SLOT_ORDER
)


def mapping_row(kind: SlotKind) -> MappingRule:
    """The fixed correspondence rule for one slot kind."""
    return MAPPING_TABLE[SLOT_ORDER.index(kind)]


def mapping_table_text() -> str:
    """Plain-text rendering of the table, for prompt context blocks."""
    lines = []
    for rule in MAPPING_TABLE:
        lines.append(
            f"{rule.element_label}: teaching = {rule.teaching_meaning} "
            f"-> game = {rule.game_meaning}"
        )
    return "\n".join(lines)


class DuplicateRationale(ValueError):
    """Two rationales were supplied for the same slot kind."""

    def __init__(self, kind: SlotKind):
        super().__init__(f"duplicate rationale for {kind.value}")
        self.kind = kind


@dataclass(frozen=True)
class SlotRationale:
    """Why one game slot realizes the same-kind pedagogy slot.

    ``pedagogy_slot_text`` is the teaching-side text the explanation cites;
    ``stale`` is set when a game-side edit invalidated the explanation before
    a replacement was supplied.
    """

    kind: SlotKind
    explanation: str
    pedagogy_slot_text: str
    stale: bool = False

    def __post_init__(self):
        if not self.explanation.strip():
            raise ValueError("rationale explanation must be nonempty")

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "explanation": self.explanation,
            "pedagogy_slot_text": self.pedagogy_slot_text,
            "stale": self.stale,
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "SlotRationale":
        return cls(
            kind=SlotKind(data["kind"]),
            explanation=data["explanation"],
            pedagogy_slot_text=data["pedagogy_slot_text"],
            stale=bool(data.get("stale", False)),
        )


class AlignmentStatus(Enum):
    ALIGNED = "Aligned"
    MISSING_RATIONALE = "MissingRationale"
    STALE_REFERENCE = "StaleReference"


@dataclass(frozen=True)
class SlotAlignment:
    status: AlignmentStatus
    rationale: SlotRationale | None = None


@dataclass(frozen=True)
class AlignmentReport:
    """Per-kind alignment verdicts for one candidate against the current
    pedagogy sentence; covers all four kinds exactly once."""

    statuses: Mapping[SlotKind, SlotAlignment]

    def kinds_with(self, status: AlignmentStatus) -> tuple[SlotKind, ...]:
        return tuple(k for k in SLOT_ORDER if self.statuses[k].status is status)

    def misaligned_kinds(self) -> tuple[SlotKind, ...]:
        return tuple(
            k for k in SLOT_ORDER
            if self.statuses[k].status is not AlignmentStatus.ALIGNED
        )

    def to_dict(self) -> dict:
        return {
            k.value: {
                "status": self.statuses[k].status.value,
                "rationale": (
                    self.statuses[k].rationale.to_dict()
                    if self.statuses[k].rationale
                    else None
                ),
            }
            for k in SLOT_ORDER
        }


def align_candidate(
    pedagogy: ControlledSentence,
    candidate_sentence: ControlledSentence,
    rationales: Iterable[SlotRationale],
) -> AlignmentReport:
    """Check that every game slot carries a current, same-kind rationale."""
    if pedagogy.register is not Register.TEACHING:
        raise RegisterMismatch("pedagogy sentence must be in the Teaching register")
    if candidate_sentence.register is not Register.GAME:
        raise RegisterMismatch("candidate sentence must be in the Game register")

    by_kind: dict[SlotKind, SlotRationale] = {}
    for rationale in rationales:
        if rationale.kind in by_kind:
            raise DuplicateRationale(rationale.kind)
        by_kind[rationale.kind] = rationale

    statuses: dict[SlotKind, SlotAlignment] = {}
    for kind in SLOT_ORDER:
        rationale = by_kind.get(kind)
        if rationale is None:
            statuses[kind] = SlotAlignment(AlignmentStatus.MISSING_RATIONALE)
        elif rationale.stale or rationale.pedagogy_slot_text != pedagogy.slot_text(kind):
            statuses[kind] = SlotAlignment(AlignmentStatus.STALE_REFERENCE, rationale)
        else:
            statuses[kind] = SlotAlignment(AlignmentStatus.ALIGNED, rationale)
    return AlignmentReport(statuses)


def is_fully_aligned(report: AlignmentReport) -> bool:
    """True iff every kind is Aligned."""
    return not report.misaligned_kinds()
