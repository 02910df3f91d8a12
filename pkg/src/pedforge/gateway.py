"""Single choke point for model calls.

Every provider call goes through :func:`complete`: the prompt is built
deterministically from a :class:`PromptSpec`, the reply is validated against
the spec's output contract, and invalid replies are retried with a corrective
suffix naming the violation. Text that never passes its contract never leaves
this module, so downstream state only ever sees grammar-checked material.

Providers are plain text-in/text-out callables. Three are shipped:

* :class:`MockProvider` -- fully offline and deterministic; its output is a
  pure function of (seed, prompt). It recognizes the machine-readable
  ``contract:`` marker and the labeled context blocks that
  :func:`build_prompt` emits, and fills templates from them. Seeds 0-99 are
  guaranteed to produce pairwise-distinct candidate fills for a fixed prompt.
* :class:`ScriptedProvider` -- replays a fixed output sequence, for retry and
  failure-path tests.
* :class:`HttpChatProvider` -- a minimal chat-completion HTTP client
  (role/content message list); the secret key is read from the environment
  variable named by ``API_KEY_ENV``.
"""

from __future__ import annotations

import hashlib
import json
import os
import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping, Protocol, Sequence, Union

import httpx

from .cnl import (
    SLOT_ORDER,
    ControlledSentence,
    ParseError,
    Register,
    SlotKind,
    parse_sentence,
    render_sentence,
)

API_KEY_ENV = "PEDFORGE_LLM_API_KEY"
ENDPOINT_ENV = "PEDFORGE_LLM_ENDPOINT"
MODEL_ENV = "PEDFORGE_LLM_MODEL"


class PromptPhase(Enum):
    EXTRACTION = "Extraction"
    TRANSLATION = "Translation"
    DEVELOPMENT = "Development"


class ContractViolation(ValueError):
    """The provider reply does not satisfy the requested output contract."""


class ProviderFailure(Exception):
    """No valid reply within the retry budget."""

    def __init__(self, attempts: int, last_violation: str | None):
        super().__init__(
            f"provider failed after {attempts} attempt(s): {last_violation or 'no reply'}"
        )
        self.attempts = attempts
        self.last_violation = last_violation


_FRAME_STATEMENT = (
    "Players (Students) [<adverb phrase>] [<verb phrase>] [<noun phrase>] "
    "in a [<adjective phrase>] environment."
)


@dataclass(frozen=True)
class FreeTextContract:
    def marker(self) -> str:
        return "contract: free-text"

    def statement(self) -> str:
        return f"{self.marker()}\nRespond in plain prose."

    def validate(self, text: str) -> str:
        if not text.strip():
            raise ContractViolation("reply is empty")
        return text.strip()


@dataclass(frozen=True)
class ControlledSentenceContract:
    register: Register

    def marker(self) -> str:
        return f"contract: controlled-sentence register={self.register.value}"

    def statement(self) -> str:
        return (
            f"{self.marker()}\n"
            "Respond with exactly one line of the form:\n"
            f"{_FRAME_STATEMENT}\n"
            "Fill all four bracketed slots with nonempty text, keep the fixed "
            "words exactly, and do not nest brackets."
        )

    def validate(self, text: str) -> ControlledSentence:
        stripped = text.strip()
        try:
            return parse_sentence(stripped, self.register)
        except ParseError as err:
            raise ContractViolation(f"sentence does not parse: {err}") from err


@dataclass(frozen=True)
class OptionListContract:
    field: str

    def marker(self) -> str:
        return f"contract: option-list field={self.field}"

    def statement(self) -> str:
        return (
            f"{self.marker()}\n"
            "Respond with a JSON array of 2 to 5 distinct, nonempty strings."
        )

    def validate(self, text: str) -> list[str]:
        try:
            data = json.loads(text.strip())
        except json.JSONDecodeError as err:
            raise ContractViolation(f"reply is not a JSON array: {err}") from err
        if not isinstance(data, list) or not all(isinstance(x, str) for x in data):
            raise ContractViolation("reply must be a JSON array of strings")
        options: list[str] = []
        for item in data:
            cleaned = item.strip()
            if cleaned and cleaned not in options:
                options.append(cleaned)
        if len(options) < 2:
            raise ContractViolation("fewer than 2 distinct nonempty options")
        return options[:5]


@dataclass(frozen=True)
class CandidateContract:
    """A game sentence plus one rationale text per slot kind, as JSON."""

    forbid_sentences: tuple[str, ...] = ()

    def marker(self) -> str:
        return "contract: candidate"

    def statement(self) -> str:
        lines = [
            self.marker(),
            "Respond with a JSON object of the form:",
            '{"sentence": "<game sentence>", "rationales": '
            '{"adverb": "...", "verb": "...", "noun": "...", "adjective": "..."}}',
            "The sentence must follow (Game register):",
            _FRAME_STATEMENT,
        ]
        if self.forbid_sentences:
            lines.append("Do not repeat any of these sentences:")
            lines.extend(f"- {s}" for s in self.forbid_sentences)
        return "\n".join(lines)

    def validate(self, text: str) -> tuple[ControlledSentence, dict[SlotKind, str]]:
        try:
            data = json.loads(text.strip())
        except json.JSONDecodeError as err:
            raise ContractViolation(f"reply is not a JSON object: {err}") from err
        if not isinstance(data, dict):
            raise ContractViolation("reply must be a JSON object")
        surface = data.get("sentence")
        if not isinstance(surface, str):
            raise ContractViolation("missing 'sentence' string")
        try:
            sentence = parse_sentence(surface.strip(), Register.GAME)
        except ParseError as err:
            raise ContractViolation(f"candidate sentence does not parse: {err}") from err
        if render_sentence(sentence) in self.forbid_sentences:
            raise ContractViolation("candidate duplicates an existing sentence")
        raw = data.get("rationales")
        if not isinstance(raw, dict):
            raise ContractViolation("missing 'rationales' object")
        rationales: dict[SlotKind, str] = {}
        for kind in SLOT_ORDER:
            value = raw.get(kind.value.lower())
            if not isinstance(value, str) or not value.strip():
                raise ContractViolation(
                    f"missing rationale for {kind.value.lower()}"
                )
            rationales[kind] = value.strip()
        return sentence, rationales


@dataclass(frozen=True)
class ParagraphContract:
    """A descriptive paragraph that includes at least one play example."""

    def marker(self) -> str:
        return "contract: paragraph"

    def statement(self) -> str:
        return (
            f"{self.marker()}\n"
            "Respond with one descriptive paragraph of plain prose that "
            "includes at least one concrete play example introduced by "
            "'For example'."
        )

    def validate(self, text: str) -> str:
        cleaned = text.strip()
        if not cleaned:
            raise ContractViolation("reply is empty")
        if "for example" not in cleaned.lower():
            raise ContractViolation("no play example found (expected 'For example')")
        return cleaned


@dataclass(frozen=True)
class PseudocodeContract:
    """Sectioned pseudocode tracing every source slot text verbatim."""

    slot_texts: tuple[str, ...] = ()

    def marker(self) -> str:
        return "contract: pseudocode"

    def statement(self) -> str:
        lines = [
            self.marker(),
            "Respond with plain-text pseudocode using uppercase top-level "
            "section keywords GAME, SETUP, LOOP, WIN_CONDITION, LOSE_OR_RETRY, "
            "with nested lines indented by two spaces.",
        ]
        if self.slot_texts:
            lines.append("Include each of these phrases verbatim at least once:")
            lines.extend(f'- "{t}"' for t in self.slot_texts)
        return "\n".join(lines)

    def validate(self, text: str) -> str:
        from .development import check_pseudocode_format

        check = check_pseudocode_format(text, self.slot_texts)
        if not check.passed:
            raise ContractViolation("; ".join(check.reasons))
        return text


OutputContract = Union[
    FreeTextContract,
    ControlledSentenceContract,
    OptionListContract,
    CandidateContract,
    ParagraphContract,
    PseudocodeContract,
]


@dataclass(frozen=True)
class PromptSpec:
    phase: PromptPhase
    objective: str
    context_blocks: tuple[tuple[str, str], ...]
    output_contract: OutputContract

    def __post_init__(self):
        if not self.objective.strip():
            raise ValueError("objective must be nonempty")
        labels = [label for label, _ in self.context_blocks]
        if len(labels) != len(set(labels)):
            raise ValueError("context block labels must be unique")


@dataclass(frozen=True)
class RetryPolicy:
    max_attempts: int = 4
    per_attempt_timeout: float = 60.0

    def __post_init__(self):
        if self.max_attempts < 1:
            raise ValueError("max_attempts must be >= 1")


@dataclass(frozen=True)
class ProviderResult:
    raw_text: str
    attempts: int
    validated: bool
    provider_name: str


class Provider(Protocol):
    name: str

    def complete(self, prompt: str, timeout: float) -> str: ...


def build_prompt(spec: PromptSpec) -> str:
    """Deterministic prompt: objective, labeled context blocks, contract."""
    parts = [f"[phase: {spec.phase.value}]", spec.objective, ""]
    for label, text in spec.context_blocks:
        parts.append(f"[context: {label}]")
        parts.append(text)
        parts.append("")
    parts.append("[output contract]")
    parts.append(spec.output_contract.statement())
    return "\n".join(parts)


def _corrective_suffix(violation: str) -> str:
    return (
        "\n\n[correction]\n"
        f"Your previous reply violated the output contract: {violation}. "
        "Reply again, following the contract exactly."
    )


def complete(spec: PromptSpec, provider: Provider,
             policy: RetryPolicy = RetryPolicy()) -> ProviderResult:
    """First reply that passes the contract; retries name the violation.

    Raises ProviderFailure once the attempt budget is spent. A per-attempt
    timeout counts as a failed attempt.
    """
    base_prompt = build_prompt(spec)
    prompt = base_prompt
    last_violation: str | None = None
    for attempt in range(1, policy.max_attempts + 1):
        try:
            raw = provider.complete(prompt, timeout=policy.per_attempt_timeout)
        except TimeoutError:
            last_violation = "provider timed out"
            continue
        try:
            spec.output_contract.validate(raw)
        except ContractViolation as violation:
            last_violation = str(violation)
            prompt = base_prompt + _corrective_suffix(last_violation)
            continue
        return ProviderResult(raw, attempt, True, provider.name)
    raise ProviderFailure(policy.max_attempts, last_violation)


@dataclass(frozen=True)
class Gateway:
    """A provider bundled with its retry policy."""

    provider: Provider
    policy: RetryPolicy = RetryPolicy()

    def complete(self, spec: PromptSpec) -> ProviderResult:
        return complete(spec, self.provider, self.policy)


# ---------------------------------------------------------------------------
# Mock provider
# ---------------------------------------------------------------------------

_GENERIC_FILLS = {
    SlotKind.ADVERB: ("carefully", "quickly", "precisely", "boldly", "steadily"),
    SlotKind.VERB: ("sort examples", "classify items", "solve puzzles",
                    "match pairs", "inspect cases"),
    SlotKind.NOUN: ("number patterns", "rock samples", "word roots",
                    "circuit parts", "map regions"),
    SlotKind.ADJECTIVE: ("stylized workshop", "realistic field", "abstract puzzle",
                         "playful arcade", "calm studio"),
}

# Three fixed mechanic archetypes give same-call candidates their variety.
_ARCHETYPES = (
    {
        "name": "sorting task",
        "adverb_frame": "under sorting rules that require",
        "verb_lead": "sort",
        "verb_pairs": ("regroup", "label", "arrange", "stack", "pair"),
        "noun_forms": ("cards", "tiles", "tokens", "bins", "sets"),
        "world_forms": ("workshop", "studio", "market stall", "library", "bench"),
    },
    {
        "name": "timed quiz-quest",
        "adverb_frame": "against a quest timer that enforces",
        "verb_lead": "answer",
        "verb_pairs": ("advance", "react", "recall", "decide", "race"),
        "noun_forms": ("challenges", "rounds", "questions", "stages", "duels"),
        "world_forms": ("quest", "arena", "arcade", "trail", "tower"),
    },
    {
        "name": "simulation-inspection",
        "adverb_frame": "with simulation checks that verify",
        "verb_lead": "inspect",
        "verb_pairs": ("adjust", "observe", "test", "tune", "verify"),
        "noun_forms": ("scenarios", "models", "stations", "cases", "consoles"),
        "world_forms": ("laboratory", "field site", "simulation", "workshop floor",
                        "control room"),
    },
)

_RATIONALE_PHRASES = {
    SlotKind.ADVERB: "rules that set the difficulty and success conditions",
    SlotKind.VERB: "the primary player action and interaction pattern",
    SlotKind.NOUN: "content and in-game artifacts that instantiate the concept",
    SlotKind.ADJECTIVE: "the aesthetic and contextual profile of the game world",
}

_CONTEXT_BLOCK_RE = re.compile(r"^\[context: (?P<label>[^\]]+)\]$")
_INSTRUCTION_RE = re.compile(
    r"^(?:set|change)\s+(?:the\s+)?(adverb|verb|noun|adjective)\s+to\s+(.+)$",
    re.IGNORECASE,
)


def _parse_blocks(prompt: str) -> dict[str, str]:
    """Recover the labeled context blocks emitted by build_prompt."""
    blocks: dict[str, str] = {}
    label: str | None = None
    lines: list[str] = []
    for line in prompt.splitlines():
        match = _CONTEXT_BLOCK_RE.match(line)
        if match is not None:
            if label is not None:
                blocks[label] = "\n".join(lines).strip()
            label = match.group("label")
            lines = []
        elif line.startswith("[output contract]") or line.startswith("[correction]"):
            if label is not None:
                blocks[label] = "\n".join(lines).strip()
            label = None
        elif label is not None:
            lines.append(line)
    if label is not None:
        blocks[label] = "\n".join(lines).strip()
    return blocks


def _block_fields(block: str) -> dict[str, str]:
    fields: dict[str, str] = {}
    for line in block.splitlines():
        key, sep, value = line.partition(":")
        if sep:
            fields[key.strip()] = value.strip()
    return fields


def _contract_marker(prompt: str) -> str:
    for line in prompt.splitlines():
        if line.startswith("contract: "):
            return line[len("contract: "):]
    return "free-text"


def _clean_fill(text: str) -> str:
    cleaned = re.sub(r"[\[\]\r\n]+", " ", text)
    return " ".join(cleaned.split())


@dataclass(frozen=True)
class MockProvider:
    """Offline provider: output is a pure function of (seed, prompt).

    Candidate fills mix a fixed archetype (chosen by the candidate index in
    the prompt) with word choices indexed by the seed's base-5 digits plus a
    prompt-hash offset, so distinct seeds below 125 always differ in at least
    one slot for the same prompt.
    """

    seed: int = 0
    name: str = field(default="mock", init=False)

    # -- helpers ------------------------------------------------------------

    def _digits(self, prompt: str, sizes: Sequence[int]) -> list[int]:
        # Offsets hash the prompt only; the seed enters through base-5 digits.
        # Adding a constant offset mod 5 is a bijection per position, so seeds
        # 0..124 stay pairwise distinct for any fixed prompt.
        digest = hashlib.sha256(prompt.encode()).digest()
        offsets = list(digest[: len(sizes)])
        remaining = self.seed
        picks = []
        for position, size in enumerate(sizes):
            digit = remaining % 5
            remaining //= 5
            picks.append((digit + offsets[position]) % size)
        return picks

    def _sentence_from_document(self, doc: Mapping[str, str],
                                register: Register) -> ControlledSentence:
        summary = doc.get("performance_summary", "")
        adverb = f"accurately, {summary}" if summary else "accurately"
        realism = doc.get("realism_level", "stylized").lower()
        environment = doc.get("environment_type", "classroom")
        return ControlledSentence(
            register,
            _clean_fill(adverb),
            _clean_fill(doc.get("observable_action", "practice the skill")),
            _clean_fill(doc.get("concept_scope", "the chosen concept")),
            _clean_fill(f"{realism} {environment}"),
        )

    def _generic_sentence(self, prompt: str, register: Register) -> ControlledSentence:
        picks = self._digits(prompt, [5, 5, 5, 5])
        return ControlledSentence(
            register,
            _GENERIC_FILLS[SlotKind.ADVERB][picks[0]],
            _GENERIC_FILLS[SlotKind.VERB][picks[1]],
            _GENERIC_FILLS[SlotKind.NOUN][picks[2]],
            _GENERIC_FILLS[SlotKind.ADJECTIVE][picks[3]],
        )

    def _controlled_sentence(self, prompt: str, blocks: dict[str, str],
                             register: Register) -> str:
        game = blocks.get("game-sentence")
        instruction = blocks.get("instruction")
        if game and instruction:
            # Refinement: apply the tiny instruction grammar to the current
            # sentence; unrecognized instructions leave it unchanged.
            current = parse_sentence(game.strip(), register)
            match = _INSTRUCTION_RE.match(instruction.strip())
            if match is not None:
                kind = SlotKind(match.group(1).capitalize())
                new_text = _clean_fill(match.group(2).strip().strip('"').strip("'"))
                if new_text:
                    current = current.with_slot(kind, new_text)
            return render_sentence(current)
        doc_block = blocks.get("requirement-document")
        if doc_block:
            doc = _block_fields(doc_block)
            return render_sentence(self._sentence_from_document(doc, register))
        return render_sentence(self._generic_sentence(prompt, register))

    def _candidate(self, prompt: str, blocks: dict[str, str]) -> str:
        pedagogy_text = blocks.get("pedagogy-sentence", "")
        try:
            pedagogy = parse_sentence(pedagogy_text.strip(), Register.TEACHING)
        except ParseError:
            pedagogy = self._generic_sentence(prompt, Register.TEACHING)
        try:
            index = int(blocks.get("candidate-index", "0"))
        except ValueError:
            index = 0
        archetype = _ARCHETYPES[index % len(_ARCHETYPES)]
        picks = self._digits(prompt, [5, 5, 5])
        sentence = ControlledSentence(
            Register.GAME,
            _clean_fill(f"{archetype['adverb_frame']} {pedagogy.adverb}"),
            _clean_fill(f"{archetype['verb_lead']} and {archetype['verb_pairs'][picks[0]]}"),
            _clean_fill(f"{pedagogy.noun} {archetype['noun_forms'][picks[1]]}"),
            _clean_fill(f"{pedagogy.adjective} {archetype['world_forms'][picks[2]]}"),
        )
        rationales = {
            kind.value.lower(): (
                f"Carries the pedagogy {kind.value.lower()} "
                f"'{pedagogy.slot_text(kind)}' into {_RATIONALE_PHRASES[kind]}."
            )
            for kind in SLOT_ORDER
        }
        return json.dumps(
            {"sentence": render_sentence(sentence), "rationales": rationales}
        )

    def _options(self, blocks: dict[str, str], marker: str) -> str:
        option_field = marker.partition("field=")[2] or "ConceptScope"
        doc = _block_fields(blocks.get("requirement-document", ""))
        concept = doc.get("concept_scope", "the chosen concept")
        templates = {
            "ConceptScope": [
                "comparing fractions with unlike denominators",
                "equivalent fractions using visual models",
                "ordering fractions on a number line",
            ],
            "Materials": [
                f"worked example sheets on {concept}",
                f"an illustrated card deck covering {concept}",
                f"short practice sets drawn from {concept}",
            ],
            "ObservableAction": [
                "sort examples into labeled groups",
                "solve short matching problems",
                "explain a worked example aloud",
            ],
            "PerformanceTarget": [
                "8 of 10 correct within 15 minutes",
                "80% accuracy within 2 sessions",
                "12 of 15 correct within 20 minutes",
            ],
            "Context": [
                "environment: kitchen; realism: stylized; tone: playful",
                "environment: laboratory; realism: realistic; tone: serious",
                "environment: puzzle board; realism: abstract; tone: calm",
            ],
        }
        return json.dumps(templates.get(option_field, templates["ConceptScope"]))

    def _paragraph(self, blocks: dict[str, str]) -> str:
        sentence = self._game_sentence_from_blocks(blocks)
        adv, verb, noun, adj = (sentence.slot_text(k) for k in SLOT_ORDER)
        return (
            f"In this {adj} environment, players {verb} {noun}. "
            f"Success is judged by the rule: {adv}. "
            f"For example, a player might pick one of the {noun}, {verb}, and "
            f"get immediate feedback, repeating until {adv} is satisfied."
        )

    def _pseudocode(self, blocks: dict[str, str]) -> str:
        sentence = self._game_sentence_from_blocks(blocks)
        adv, verb, noun, adj = (sentence.slot_text(k) for k in SLOT_ORDER)
        return "\n".join(
            [
                f"GAME: {noun} challenge",
                "SETUP:",
                f"  environment: {adj}",
                f"  content: load {noun}",
                f"  success rule: {adv}",
                "LOOP:",
                f"  prompt the player to {verb}",
                f'  check the attempt against "{adv}"',
                "  give immediate feedback",
                "WIN_CONDITION:",
                f'  "{adv}" is satisfied',
                "LOSE_OR_RETRY:",
                "  offer a hint and retry after each miss",
            ]
        )

    def _game_sentence_from_blocks(self, blocks: dict[str, str]) -> ControlledSentence:
        text = blocks.get("game-sentence", "")
        try:
            return parse_sentence(text.strip(), Register.GAME)
        except ParseError:
            return self._generic_sentence(text, Register.GAME)

    # -- provider interface ---------------------------------------------------

    def complete(self, prompt: str, timeout: float) -> str:
        marker = _contract_marker(prompt)
        blocks = _parse_blocks(prompt)
        if marker.startswith("controlled-sentence"):
            register = Register(marker.partition("register=")[2] or "Teaching")
            return self._controlled_sentence(prompt, blocks, register)
        if marker.startswith("candidate"):
            return self._candidate(prompt, blocks)
        if marker.startswith("option-list"):
            return self._options(blocks, marker)
        if marker.startswith("paragraph"):
            return self._paragraph(blocks)
        if marker.startswith("pseudocode"):
            return self._pseudocode(blocks)
        return "Acknowledged."


def mock_provider(seed: int) -> MockProvider:
    """A deterministic offline provider for the given seed."""
    return MockProvider(seed)


class ScriptedProvider:
    """Replays a fixed sequence of outputs; for retry/failure tests."""

    name = "scripted"

    def __init__(self, outputs: Sequence[str]):
        self._outputs = list(outputs)
        self._cursor = 0
        self.calls: list[str] = []

    def complete(self, prompt: str, timeout: float) -> str:
        self.calls.append(prompt)
        if self._cursor >= len(self._outputs):
            raise RuntimeError("scripted provider exhausted")
        output = self._outputs[self._cursor]
        self._cursor += 1
        return output


class HttpChatProvider:
    """Minimal chat-completion client.

    POSTs ``{"model": ..., "messages": [{"role": "user", "content": prompt}]}``
    to the configured endpoint with a bearer token, and returns
    ``choices[0].message.content``.
    """

    def __init__(self, endpoint: str, model: str, api_key: str,
                 transport: httpx.BaseTransport | None = None):
        self.endpoint = endpoint
        self.model = model
        self._api_key = api_key
        self.name = f"http:{model}"
        self._client = httpx.Client(transport=transport)

    @classmethod
    def from_env(cls) -> "HttpChatProvider":
        endpoint = os.environ.get(ENDPOINT_ENV)
        model = os.environ.get(MODEL_ENV)
        api_key = os.environ.get(API_KEY_ENV)
        missing = [
            name
            for name, value in (
                (ENDPOINT_ENV, endpoint), (MODEL_ENV, model), (API_KEY_ENV, api_key),
            )
            if not value
        ]
        if missing:
            raise RuntimeError(
                "missing provider configuration: " + ", ".join(missing)
            )
        return cls(endpoint, model, api_key)

    def complete(self, prompt: str, timeout: float) -> str:
        payload = {
            "model": self.model,
            "messages": [{"role": "user", "content": prompt}],
        }
        try:
            response = self._client.post(
                self.endpoint,
                json=payload,
                headers={"Authorization": f"Bearer {self._api_key}"},
                timeout=timeout,
            )
            response.raise_for_status()
        except httpx.TimeoutException as err:
            raise TimeoutError(str(err)) from err
        data = response.json()
        return data["choices"][0]["message"]["content"]
