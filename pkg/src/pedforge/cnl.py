"""The controlled sentence language: a fixed four-slot template shared by
pedagogy descriptions and game descriptions.

Every sentence in the system is an instance of one surface frame::

    Players (Students) [<adverb>] [<verb>] [<noun>] in a [<adjective>] environment.

The four bracketed slots carry fixed semantic roles (performance requirement,
observable action, focal content, context/tone) and each slot has a fixed
display color used by clients to link corresponding slots across registers.

This module is purely functional: parsing, rendering, and diffing. No I/O.

Parsing rules (deterministic, documented so error cases are testable):

* Fixed frame words are matched case-sensitively with flexible whitespace
  between tokens; the trailing period is optional on input.
* Bracket nesting or a ``[`` inside an open group raises ``NestedBracket``;
  a stray unmatched bracket raises ``MalformedFrame``.
* More than four bracket groups raises ``ExtraMaterial``.
* Fewer than four groups: groups fill the latest template positions, so the
  first absent slot in template order is reported -- three groups before the
  final ``in a [...] environment`` means ``MissingSlot(Adverb)``; a missing
  final group means ``MissingSlot(Adjective)``. Empty/whitespace-only groups
  report the slot at their position.
* With four groups, the text between them must be exactly the frame words.
  If the required words are present in order but extra words surround them,
  the error is ``ExtraMaterial``; wrong, missing, or reordered frame words
  raise ``MalformedFrame``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace
from enum import Enum
from typing import Iterable, Mapping

FRAME_PREFIX = "Players (Students)"
FRAME_INFIX = "in a"
FRAME_SUFFIX = "environment"


class Register(Enum):
    TEACHING = "Teaching"
    GAME = "Game"


class SlotKind(Enum):
    ADVERB = "Adverb"
    VERB = "Verb"
    NOUN = "Noun"
    ADJECTIVE = "Adjective"

    @property
    def color(self) -> str:
        return SLOT_COLORS[self]


# Template order; also the questioning/diff/report order everywhere else.
SLOT_ORDER: tuple[SlotKind, ...] = (
    SlotKind.ADVERB,
    SlotKind.VERB,
    SlotKind.NOUN,
    SlotKind.ADJECTIVE,
)

SLOT_COLORS: Mapping[SlotKind, str] = {
    SlotKind.ADVERB: "red",
    SlotKind.VERB: "yellow",
    SlotKind.NOUN: "green",
    SlotKind.ADJECTIVE: "blue",
}

_SLOT_ATTR = {
    SlotKind.ADVERB: "adverb",
    SlotKind.VERB: "verb",
    SlotKind.NOUN: "noun",
    SlotKind.ADJECTIVE: "adjective",
}


class InvalidSlotText(ValueError):
    """Slot text violates the fill rules (empty, untrimmed, brackets, newline)."""


class RegisterMismatch(ValueError):
    """Two sentences from different registers were combined where one register
    is required."""


class ParseError(ValueError):
    """Base class for surface-text parse failures."""


class MalformedFrame(ParseError):
    """The fixed frame words are wrong, misordered, or absent."""


class MissingSlot(ParseError):
    """A bracket group is absent or empty."""

    def __init__(self, kind: SlotKind):
        super().__init__(f"missing slot: {kind.value}")
        self.kind = kind


class ExtraMaterial(ParseError):
    """Text or bracket groups beyond the frame."""


class NestedBracket(ParseError):
    """A bracket group contains another bracket."""


def validate_slot_text(text: str) -> None:
    """Raise InvalidSlotText unless ``text`` is a legal slot fill."""
    if not isinstance(text, str) or not text.strip():
        raise InvalidSlotText("slot text must be nonempty")
    if text != text.strip():
        raise InvalidSlotText("slot text must be trimmed")
    if "[" in text or "]" in text:
        raise InvalidSlotText("slot text may not contain '[' or ']'")
    if "\n" in text or "\r" in text:
        raise InvalidSlotText("slot text may not contain newlines")


@dataclass(frozen=True)
class SlotFill:
    """One filled slot: a kind plus nonempty, trimmed, bracket-free text."""

    kind: SlotKind
    text: str

    def __post_init__(self):
        validate_slot_text(self.text)


@dataclass(frozen=True)
class ControlledSentence:
    """A complete instance of the template in one register."""

    register: Register
    adverb: str
    verb: str
    noun: str
    adjective: str

    def __post_init__(self):
        for kind in SLOT_ORDER:
            validate_slot_text(self.slot_text(kind))

    def slot_text(self, kind: SlotKind) -> str:
        return getattr(self, _SLOT_ATTR[kind])

    def fills(self) -> tuple[SlotFill, ...]:
        return tuple(SlotFill(kind, self.slot_text(kind)) for kind in SLOT_ORDER)

    def with_slot(self, kind: SlotKind, text: str) -> "ControlledSentence":
        return replace(self, **{_SLOT_ATTR[kind]: text})

    def to_dict(self) -> dict:
        return {
            "register": self.register.value,
            "adverb": self.adverb,
            "verb": self.verb,
            "noun": self.noun,
            "adjective": self.adjective,
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "ControlledSentence":
        return cls(
            register=Register(data["register"]),
            adverb=data["adverb"],
            verb=data["verb"],
            noun=data["noun"],
            adjective=data["adjective"],
        )


@dataclass(frozen=True)
class SlotChange:
    old: str
    new: str


@dataclass(frozen=True)
class SlotDiff:
    """Per-slot comparison of two same-register sentences.

    ``changes[kind]`` is None where the slot is unchanged.
    """

    changes: Mapping[SlotKind, SlotChange | None]

    def changed_kinds(self) -> tuple[SlotKind, ...]:
        return tuple(k for k in SLOT_ORDER if self.changes[k] is not None)

    @property
    def identical(self) -> bool:
        return not self.changed_kinds()


@dataclass(frozen=True)
class ColorRange:
    """A highlighted span in display-mode text."""

    kind: SlotKind
    start: int
    length: int

    @property
    def color(self) -> str:
        return self.kind.color


@dataclass(frozen=True)
class DisplayRendering:
    """Bracket-free sentence text plus one color range per slot."""

    text: str
    ranges: tuple[ColorRange, ...]


def render_sentence(sentence: ControlledSentence) -> str:
    """Canonical surface form: bracketed slots, single spaces, trailing period."""
    return (
        f"{FRAME_PREFIX} [{sentence.adverb}] [{sentence.verb}] [{sentence.noun}] "
        f"{FRAME_INFIX} [{sentence.adjective}] {FRAME_SUFFIX}."
    )


def render_display(sentence: ControlledSentence) -> DisplayRendering:
    """Display form: the frame without brackets, plus per-slot color ranges."""
    parts: list[str] = [FRAME_PREFIX, " "]
    ranges: list[ColorRange] = []
    offset = len(FRAME_PREFIX) + 1
    for kind in (SlotKind.ADVERB, SlotKind.VERB, SlotKind.NOUN):
        text = sentence.slot_text(kind)
        ranges.append(ColorRange(kind, offset, len(text)))
        parts.append(text)
        parts.append(" ")
        offset += len(text) + 1
    parts.append(FRAME_INFIX)
    parts.append(" ")
    offset += len(FRAME_INFIX) + 1
    text = sentence.adjective
    ranges.append(ColorRange(SlotKind.ADJECTIVE, offset, len(text)))
    parts.append(text)
    parts.append(f" {FRAME_SUFFIX}.")
    return DisplayRendering("".join(parts), tuple(ranges))


def _normalize(segment: str) -> str:
    return " ".join(segment.split())


def _scan_brackets(surface: str) -> tuple[list[str], list[str]]:
    """Split ``surface`` into bracket-group texts and the segments around them.

    Returns (groups, segments) with len(segments) == len(groups) + 1.
    """
    groups: list[str] = []
    segments: list[str] = []
    current: list[str] = []
    depth = 0
    for ch in surface:
        if ch == "[":
            if depth > 0:
                raise NestedBracket("'[' inside an open bracket group")
            depth = 1
            segments.append("".join(current))
            current = []
        elif ch == "]":
            if depth == 0:
                raise MalformedFrame("unmatched ']'")
            depth = 0
            groups.append("".join(current))
            current = []
        else:
            current.append(ch)
    if depth > 0:
        raise MalformedFrame("unclosed '['")
    segments.append("".join(current))
    return groups, segments


_SUFFIX_RE = re.compile(r"^environment *\.?$")

# Expected inter-group segments for a well-formed four-group sentence:
# prefix, empty, empty, infix, suffix(+optional period).
_EXPECTED_TOKENS = (
    ("Players", "(Students)"),
    (),
    (),
    ("in", "a"),
)


def _is_token_subsequence(expected: Iterable[str], actual: list[str]) -> bool:
    it = iter(actual)
    return all(tok in it for tok in expected)


def _segment_ok(index: int, segment: str) -> bool:
    norm = _normalize(segment)
    if index == 4:
        return bool(_SUFFIX_RE.match(norm))
    return norm == " ".join(_EXPECTED_TOKENS[index])


def _segment_salvageable(index: int, segment: str) -> bool:
    """True when the required frame tokens appear, in order, amid extra text."""
    tokens = _normalize(segment).split()
    if index == 4:
        return any(t in ("environment", "environment.") for t in tokens)
    return _is_token_subsequence(_EXPECTED_TOKENS[index], tokens)


def _classify_short(groups: list[str], segments: list[str]) -> ParseError:
    """Decide the error for fewer than four bracket groups."""
    k = len(groups)
    last = _normalize(segments[-1])

    # A final "in a [group] environment" identifies the adjective group, so the
    # shortfall is among the leading slots; groups fill the latest positions
    # and the first absent kind (always the adverb here) is reported.
    if k >= 1 and _SUFFIX_RE.match(last):
        before = _normalize(segments[-2])
        if k == 1:
            frame_ok = before == f"{FRAME_PREFIX} {FRAME_INFIX}"
        else:
            frame_ok = (
                before == FRAME_INFIX
                and _normalize(segments[0]) == FRAME_PREFIX
                and all(not _normalize(s) for s in segments[1:-2])
            )
        if frame_ok:
            return MissingSlot(SlotKind.ADVERB)
        return MalformedFrame("surface does not match the sentence frame")

    # Frame tail "in a environment" intact but no adjective group.
    tail_re = re.compile(rf"^{re.escape(FRAME_INFIX)} {re.escape(FRAME_SUFFIX)} *\.?$")
    if k == 0:
        whole_re = re.compile(
            rf"^{re.escape(FRAME_PREFIX)} {re.escape(FRAME_INFIX)}"
            rf" {re.escape(FRAME_SUFFIX)} *\.?$"
        )
        if whole_re.match(last):
            return MissingSlot(SlotKind.ADVERB)
    elif (
        tail_re.match(last)
        and _normalize(segments[0]) == FRAME_PREFIX
        and all(not _normalize(s) for s in segments[1:-1])
    ):
        if k == 3:
            return MissingSlot(SlotKind.ADJECTIVE)
        return MissingSlot(SlotKind.ADVERB)
    return MalformedFrame("surface does not match the sentence frame")


def parse_sentence(surface: str, register: Register) -> ControlledSentence:
    """Parse canonical surface text into a sentence of the given register.

    Raises MalformedFrame, MissingSlot, ExtraMaterial, or NestedBracket.
    """
    if "\n" in surface or "\r" in surface:
        raise MalformedFrame("sentence must be a single line")
    groups, segments = _scan_brackets(surface)

    if len(groups) > 4:
        raise ExtraMaterial("more than four bracket groups")
    if len(groups) < 4:
        raise _classify_short(groups, segments)

    malformed = False
    extra = False
    for index, segment in enumerate(segments):
        if _segment_ok(index, segment):
            continue
        if _segment_salvageable(index, segment):
            extra = True
        else:
            malformed = True
    if malformed:
        raise MalformedFrame("fixed frame words wrong or misordered")
    if extra:
        raise ExtraMaterial("text outside the sentence frame")

    texts = [g.strip() for g in groups]
    for kind, text in zip(SLOT_ORDER, texts):
        if not text:
            raise MissingSlot(kind)
    return ControlledSentence(register, *texts)


def diff_sentences(a: ControlledSentence, b: ControlledSentence) -> SlotDiff:
    """Per-slot change record between two sentences of the same register."""
    if a.register != b.register:
        raise RegisterMismatch(
            f"cannot diff {a.register.value} against {b.register.value}"
        )
    changes: dict[SlotKind, SlotChange | None] = {}
    for kind in SLOT_ORDER:
        old, new = a.slot_text(kind), b.slot_text(kind)
        changes[kind] = None if old == new else SlotChange(old, new)
    return SlotDiff(changes)
