"""Guided requirement elicitation.

Five requirement items are asked in a fixed order; each answer passes a
deterministic specificity check before the dialogue advances. When all five
pass, the pedagogy sentence is composed through the gateway and must reparse
under the controlled grammar.

Question wording and the non-observable verb deny list are loaded from
``data/elicitation.ini`` so deployments can localize them without code
changes. The checks themselves are rule-based and never depend on a provider:

* every answer must be nonempty after trimming;
* the observable action must start with a verb not on the deny list;
* the performance target needs at least one number and one time-unit token
  (minute/hour/session/week forms);
* the context must name all three facets (environment, realism, tone) with a
  recognized realism level;
* concept and materials answers need at least three words.
"""

from __future__ import annotations

import configparser
import re
from dataclasses import dataclass
from enum import Enum
from importlib import resources
from typing import TYPE_CHECKING, Mapping, Union

from .cnl import ControlledSentence, Register, parse_sentence
from .gateway import ControlledSentenceContract, Gateway, OptionListContract, PromptPhase, PromptSpec

if TYPE_CHECKING:
    from .store import ProjectStore


class RequirementField(Enum):
    CONCEPT_SCOPE = "ConceptScope"
    MATERIALS = "Materials"
    OBSERVABLE_ACTION = "ObservableAction"
    PERFORMANCE_TARGET = "PerformanceTarget"
    CONTEXT = "Context"


# Questioning order: concept, materials, action, target, context.
FIELD_ORDER: tuple[RequirementField, ...] = tuple(RequirementField)


def _load_elicitation_data() -> tuple[dict[RequirementField, str], tuple[str, ...]]:
    parser = configparser.ConfigParser()
    text = resources.files("pedforge.data").joinpath("elicitation.ini").read_text()
    parser.read_string(text)
    prompts = {
        field: parser["questions"][field.value] for field in FIELD_ORDER
    }
    deny = tuple(
        verb.strip().lower()
        for verb in parser["deny_verbs"]["verbs"].split(",")
        if verb.strip()
    )
    return prompts, deny


QUESTION_PROMPTS, NON_OBSERVABLE_VERBS = _load_elicitation_data()

_TIME_UNIT_RE = re.compile(r"\b(minutes?|hours?|sessions?|weeks?)\b", re.IGNORECASE)
_NUMBER_RE = re.compile(r"\d+(?:\.\d+)?")
_N_OF_M_RE = re.compile(r"\b(\d+)\s+(?:out\s+)?of\s+(\d+)\b", re.IGNORECASE)
_PERCENT_RE = re.compile(r"(\d+(?:\.\d+)?)\s*(?:%|percent)", re.IGNORECASE)
_TIME_WINDOW_RE = re.compile(
    r"(\d+(?:\.\d+)?)\s*(minutes?|hours?|sessions?|weeks?)\b", re.IGNORECASE
)


class RealismLevel(Enum):
    ABSTRACT = "Abstract"
    STYLIZED = "Stylized"
    REALISTIC = "Realistic"


@dataclass(frozen=True)
class PerformanceTargetValue:
    """Parsed shape of a performance-target answer."""

    description: str
    quantity: float
    quantity_unit: str  # "count" or "percentage"
    time_window: float
    time_unit: str  # "minutes", "hours", "sessions", "weeks"

    def __post_init__(self):
        if self.quantity <= 0:
            raise ValueError("quantity must be positive")
        if self.time_window <= 0:
            raise ValueError("time window must be positive")

    def to_dict(self) -> dict:
        return {
            "description": self.description,
            "quantity": self.quantity,
            "quantity_unit": self.quantity_unit,
            "time_window": self.time_window,
            "time_unit": self.time_unit,
        }


@dataclass(frozen=True)
class ContextValue:
    environment_type: str
    realism_level: RealismLevel
    tone: str

    def __post_init__(self):
        if not self.environment_type.strip() or not self.tone.strip():
            raise ValueError("context facets must be nonempty")

    def to_dict(self) -> dict:
        return {
            "environment_type": self.environment_type,
            "realism_level": self.realism_level.value,
            "tone": self.tone,
        }


ParsedValue = Union[PerformanceTargetValue, ContextValue]


def _number(text: str) -> float:
    value = float(text)
    return int(value) if value == int(value) else value


def parse_performance_target(answer: str) -> PerformanceTargetValue | None:
    """Best-effort parse; None when no positive quantity/time pair exists."""
    window = _TIME_WINDOW_RE.search(answer)
    if window is None:
        return None
    time_value = _number(window.group(1))
    time_unit = window.group(2).lower()
    if not time_unit.endswith("s"):
        time_unit += "s"

    def build(quantity: float, unit: str) -> PerformanceTargetValue | None:
        try:
            return PerformanceTargetValue(
                answer.strip(), quantity, unit, time_value, time_unit
            )
        except ValueError:
            return None

    percent = _PERCENT_RE.search(answer)
    if percent is not None:
        return build(_number(percent.group(1)), "percentage")
    n_of_m = _N_OF_M_RE.search(answer)
    if n_of_m is not None:
        return build(_number(n_of_m.group(1)), "count")
    for match in _NUMBER_RE.finditer(answer):
        if match.start() != window.start(1):
            return build(_number(match.group()), "count")
    return None


def performance_summary(answer: str) -> str:
    """Compact phrase for the adverb slot, e.g. ``8 of 10 within 15 minutes``."""
    window = _TIME_WINDOW_RE.search(answer)
    window_phrase = (
        f"{window.group(1)} {window.group(2).lower()}" if window else ""
    )
    quantity_phrase = ""
    n_of_m = _N_OF_M_RE.search(answer)
    percent = _PERCENT_RE.search(answer)
    if percent is not None:
        quantity_phrase = f"{percent.group(1)}%"
    elif n_of_m is not None:
        quantity_phrase = f"{n_of_m.group(1)} of {n_of_m.group(2)}"
    else:
        for match in _NUMBER_RE.finditer(answer):
            if window is None or match.start() != window.start(1):
                quantity_phrase = match.group()
                break
    if quantity_phrase and window_phrase:
        return f"{quantity_phrase} within {window_phrase}"
    if window_phrase:
        return f"within {window_phrase}"
    return quantity_phrase


_CONTEXT_PART_RE = re.compile(
    r"(environment|realism|tone)\s*:\s*([^;]+)", re.IGNORECASE
)


def parse_context(answer: str) -> ContextValue | None:
    parts = {
        key.lower(): value.strip()
        for key, value in _CONTEXT_PART_RE.findall(answer)
    }
    if not all(parts.get(k) for k in ("environment", "realism", "tone")):
        return None
    try:
        realism = RealismLevel(parts["realism"].capitalize())
    except ValueError:
        return None
    return ContextValue(parts["environment"], realism, parts["tone"])


@dataclass(frozen=True)
class SpecificityResult:
    passed: bool
    reasons: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {"passed": self.passed, "reasons": list(self.reasons)}

    @classmethod
    def from_dict(cls, data: Mapping) -> "SpecificityResult":
        return cls(bool(data["passed"]), tuple(data["reasons"]))


def _starts_with_denied_verb(answer: str) -> bool:
    lowered = " ".join(answer.lower().split())
    return any(
        lowered == verb or lowered.startswith(verb + " ")
        for verb in NON_OBSERVABLE_VERBS
    )


def specificity_check(field: RequirementField, answer: str) -> SpecificityResult:
    """Deterministic rule evaluation; Fail is a value, not an error."""
    trimmed = answer.strip()
    if not trimmed:
        return SpecificityResult(False, ("empty",))
    reasons: list[str] = []
    if field is RequirementField.OBSERVABLE_ACTION:
        if _starts_with_denied_verb(trimmed):
            reasons.append("non-observable verb")
    elif field is RequirementField.PERFORMANCE_TARGET:
        if not _NUMBER_RE.search(trimmed):
            reasons.append("no number found")
        if not _TIME_UNIT_RE.search(trimmed):
            reasons.append("no time unit found (minutes, hours, sessions, or weeks)")
    elif field is RequirementField.CONTEXT:
        parts = {
            key.lower(): value.strip()
            for key, value in _CONTEXT_PART_RE.findall(trimmed)
        }
        for facet in ("environment", "realism", "tone"):
            if not parts.get(facet):
                reasons.append(f"missing {facet}")
        realism = parts.get("realism", "")
        if realism and parse_context(trimmed) is None:
            reasons.append("realism must be abstract, stylized, or realistic")
    else:  # ConceptScope, Materials
        if len(trimmed.split()) < 3:
            reasons.append("too vague: give at least three words")
    return SpecificityResult(not reasons, tuple(reasons))


def parse_answer(field: RequirementField, answer: str) -> ParsedValue | None:
    if field is RequirementField.PERFORMANCE_TARGET:
        return parse_performance_target(answer)
    if field is RequirementField.CONTEXT:
        return parse_context(answer)
    return None


@dataclass(frozen=True)
class FieldAnswer:
    text: str
    specificity: SpecificityResult
    parsed: ParsedValue | None = None

    def to_dict(self) -> dict:
        return {
            "text": self.text,
            "specificity": self.specificity.to_dict(),
            "parsed": self.parsed.to_dict() if self.parsed else None,
        }


def _field_answer_from_dict(field: RequirementField, data: Mapping) -> FieldAnswer:
    parsed: ParsedValue | None = None
    raw = data.get("parsed")
    if raw is not None:
        if field is RequirementField.PERFORMANCE_TARGET:
            parsed = PerformanceTargetValue(
                raw["description"], raw["quantity"], raw["quantity_unit"],
                raw["time_window"], raw["time_unit"],
            )
        elif field is RequirementField.CONTEXT:
            parsed = ContextValue(
                raw["environment_type"],
                RealismLevel(raw["realism_level"]),
                raw["tone"],
            )
    return FieldAnswer(
        data["text"], SpecificityResult.from_dict(data["specificity"]), parsed
    )


@dataclass(frozen=True)
class RequirementDocument:
    """The co-authored record of the five requirement items."""

    answers: Mapping[RequirementField, FieldAnswer | None]

    @classmethod
    def empty(cls) -> "RequirementDocument":
        return cls({field: None for field in FIELD_ORDER})

    def answer(self, field: RequirementField) -> FieldAnswer | None:
        return self.answers[field]

    def with_answer(self, field: RequirementField, text: str) -> "RequirementDocument":
        entry = FieldAnswer(text, specificity_check(field, text), parse_answer(field, text))
        updated = dict(self.answers)
        updated[field] = entry
        return RequirementDocument(updated)

    def complete(self) -> bool:
        return all(
            entry is not None and entry.specificity.passed
            for entry in self.answers.values()
        )

    def to_dict(self) -> dict:
        return {
            field.value: (entry.to_dict() if entry else None)
            for field, entry in ((f, self.answers[f]) for f in FIELD_ORDER)
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "RequirementDocument":
        answers: dict[RequirementField, FieldAnswer | None] = {}
        for field in FIELD_ORDER:
            raw = data.get(field.value)
            answers[field] = _field_answer_from_dict(field, raw) if raw else None
        return cls(answers)


@dataclass(frozen=True)
class Question:
    field: RequirementField
    prompt: str


def question_for(field: RequirementField) -> Question:
    return Question(field, QUESTION_PROMPTS[field])


def next_question(doc: RequirementDocument) -> Question | None:
    """First field, in order, that has not yet passed; None when complete."""
    for field in FIELD_ORDER:
        entry = doc.answer(field)
        if entry is None or not entry.specificity.passed:
            return question_for(field)
    return None


@dataclass(frozen=True)
class OptionSet:
    field: RequirementField
    options: tuple[str, ...]

    def __post_init__(self):
        if not 2 <= len(self.options) <= 5:
            raise ValueError("option sets carry 2 to 5 options")
        if len(set(self.options)) != len(self.options):
            raise ValueError("options must be pairwise distinct")


class IncompleteDocument(Exception):
    """The pedagogy sentence needs all five requirement items to pass first."""


def document_context_block(doc: RequirementDocument) -> str:
    """Key/value lines describing the document, for prompt context."""
    lines: list[str] = []
    labels = {
        RequirementField.CONCEPT_SCOPE: "concept_scope",
        RequirementField.MATERIALS: "materials",
        RequirementField.OBSERVABLE_ACTION: "observable_action",
        RequirementField.PERFORMANCE_TARGET: "performance_target",
    }
    for field, label in labels.items():
        entry = doc.answer(field)
        if entry is not None:
            lines.append(f"{label}: {entry.text}")
    target = doc.answer(RequirementField.PERFORMANCE_TARGET)
    if target is not None:
        summary = performance_summary(target.text)
        if summary:
            lines.append(f"performance_summary: {summary}")
    context = doc.answer(RequirementField.CONTEXT)
    if context is not None and isinstance(context.parsed, ContextValue):
        lines.append(f"environment_type: {context.parsed.environment_type}")
        lines.append(f"realism_level: {context.parsed.realism_level.value}")
        lines.append(f"tone: {context.parsed.tone}")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# Project-level commands (single-writer per project; see store)
# ---------------------------------------------------------------------------


def ingest_answer(project: "ProjectStore", field: RequirementField,
                  answer: str) -> RequirementDocument:
    """Record an answer (re-answering overwrites); returns the updated document."""
    from .store import Actor, EventAction

    entry_doc = project.state.document.with_answer(field, answer)
    entry = entry_doc.answer(field)
    project.append_event(
        Actor.INSTRUCTOR,
        EventAction.ANSWER_INGESTED,
        f"answer:{field.value}",
        {
            "field": field.value,
            "text": answer,
            "specificity": entry.specificity.to_dict(),
            "parsed": entry.parsed.to_dict() if entry.parsed else None,
        },
    )
    return project.state.document


def propose_options(project: "ProjectStore", gateway: Gateway,
                    field: RequirementField) -> OptionSet:
    """Fetch 2-5 candidate answers for a field from the provider."""
    from .store import Actor, EventAction

    doc = project.state.document
    spec = PromptSpec(
        phase=PromptPhase.EXTRACTION,
        objective=(
            f"Propose candidate answers the instructor could pick for the "
            f"'{field.value}' requirement item."
        ),
        context_blocks=(
            ("question", QUESTION_PROMPTS[field]),
            ("requirement-document", document_context_block(doc)),
        ),
        output_contract=OptionListContract(field.value),
    )
    result = gateway.complete(spec)
    options = tuple(spec.output_contract.validate(result.raw_text))
    option_set = OptionSet(field, options)
    project.append_event(
        Actor.ASSISTANT,
        EventAction.OPTIONS_PROPOSED,
        f"options:{field.value}",
        {"field": field.value, "options": list(options)},
    )
    return option_set


def compose_pedagogy_sentence(project: "ProjectStore",
                              gateway: Gateway) -> tuple[str, ControlledSentence]:
    """Compose the single pedagogy sentence from the complete document.

    Returns (version id, sentence). Recomposing clears any accepted candidate
    and steps the workflow back to the translation phase.
    """
    from .store import Actor, EventAction, Phase

    doc = project.state.document
    if not doc.complete():
        raise IncompleteDocument("all five requirement items must pass first")
    spec = PromptSpec(
        phase=PromptPhase.EXTRACTION,
        objective=(
            "Compose the single pedagogy sentence that captures the "
            "requirement document."
        ),
        context_blocks=(("requirement-document", document_context_block(doc)),),
        output_contract=ControlledSentenceContract(Register.TEACHING),
    )
    result = gateway.complete(spec)
    sentence = parse_sentence(result.raw_text.strip(), Register.TEACHING)
    version = f"p{len(project.state.pedagogy_versions) + 1}"
    project.append_event(
        Actor.ASSISTANT,
        EventAction.PEDAGOGY_SENTENCE_COMPOSED,
        f"pedagogy:{version}",
        {"version": version, "sentence": sentence.to_dict()},
    )
    accepted = project.state.accepted_candidate
    if accepted is not None:
        project.append_event(
            Actor.INSTRUCTOR,
            EventAction.ACCEPTANCE_CLEARED,
            f"candidate:{accepted}",
            {"candidate_id": accepted, "reason": "pedagogy sentence recomposed"},
        )
        if project.state.phase is Phase.DEVELOPMENT:
            project.advance_phase(Phase.TRANSLATION)
    if project.state.phase is Phase.EXTRACTION:
        project.advance_phase(Phase.TRANSLATION)
    return version, sentence
