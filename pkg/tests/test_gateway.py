import json

import httpx
import pytest

from pedforge.cnl import Register, SlotKind, parse_sentence
from pedforge.gateway import (
    CandidateContract,
    ControlledSentenceContract,
    ContractViolation,
    FreeTextContract,
    Gateway,
    HttpChatProvider,
    OptionListContract,
    ParagraphContract,
    PromptPhase,
    PromptSpec,
    ProviderFailure,
    PseudocodeContract,
    RetryPolicy,
    ScriptedProvider,
    build_prompt,
    complete,
    mock_provider,
)

GOOD_SENTENCE = "Players (Students) [a] [b] [c] in a [d] environment."


def sentence_spec(register=Register.TEACHING, context=()):
    return PromptSpec(
        phase=PromptPhase.EXTRACTION,
        objective="Produce a sentence.",
        context_blocks=tuple(context),
        output_contract=ControlledSentenceContract(register),
    )


class TestBuildPrompt:
    def test_deterministic(self):
        spec = sentence_spec(context=[("notes", "alpha")])
        assert build_prompt(spec) == build_prompt(spec)

    def test_contains_literal_frame(self):
        prompt = build_prompt(sentence_spec())
        assert "Players (Students) [" in prompt
        assert "] environment." in prompt

    def test_empty_context(self):
        prompt = build_prompt(sentence_spec())
        assert "Produce a sentence." in prompt
        assert "[output contract]" in prompt
        assert "[context:" not in prompt

    def test_context_blocks_in_order(self):
        prompt = build_prompt(sentence_spec(context=[("one", "1"), ("two", "2")]))
        assert prompt.index("[context: one]") < prompt.index("[context: two]")

    def test_duplicate_labels_rejected(self):
        with pytest.raises(ValueError):
            sentence_spec(context=[("same", "1"), ("same", "2")])

    def test_empty_objective_rejected(self):
        with pytest.raises(ValueError):
            PromptSpec(
                phase=PromptPhase.EXTRACTION,
                objective="  ",
                context_blocks=(),
                output_contract=FreeTextContract(),
            )


class TestRetryContract:
    def test_valid_on_first_attempt(self):
        provider = ScriptedProvider([GOOD_SENTENCE])
        result = complete(sentence_spec(), provider)
        assert result.attempts == 1
        assert result.validated

    def test_bad_bad_good_takes_three_attempts(self):
        provider = ScriptedProvider(["nope", "still nope", GOOD_SENTENCE])
        result = complete(sentence_spec(), provider)
        assert result.attempts == 3
        assert result.validated
        assert result.raw_text == GOOD_SENTENCE

    def test_four_bad_attempts_fail(self):
        provider = ScriptedProvider(["bad"] * 4)
        with pytest.raises(ProviderFailure) as err:
            complete(sentence_spec(), provider)
        assert err.value.attempts == 4
        assert "does not parse" in err.value.last_violation

    def test_corrective_suffix_names_violation(self):
        provider = ScriptedProvider(["garbage", GOOD_SENTENCE])
        complete(sentence_spec(), provider)
        assert len(provider.calls) == 2
        assert "[correction]" in provider.calls[1]
        assert "does not parse" in provider.calls[1]
        assert "[correction]" not in provider.calls[0]

    def test_timeout_counts_as_failed_attempt(self):
        class FlakyProvider:
            name = "flaky"

            def __init__(self):
                self.calls = 0

            def complete(self, prompt, timeout):
                self.calls += 1
                if self.calls == 1:
                    raise TimeoutError("slow")
                return GOOD_SENTENCE

        result = complete(sentence_spec(), FlakyProvider())
        assert result.attempts == 2

    def test_retry_budget_configurable(self):
        provider = ScriptedProvider(["bad", "bad"])
        with pytest.raises(ProviderFailure) as err:
            complete(sentence_spec(), provider, RetryPolicy(max_attempts=2))
        assert err.value.attempts == 2

    def test_max_attempts_must_be_positive(self):
        with pytest.raises(ValueError):
            RetryPolicy(max_attempts=0)


class TestContracts:
    def test_option_list_dedupes(self):
        contract = OptionListContract("ConceptScope")
        options = contract.validate(json.dumps(["a", "a", " b ", "", "c"]))
        assert options == ["a", "b", "c"]

    def test_option_list_too_few_after_dedupe(self):
        contract = OptionListContract("ConceptScope")
        with pytest.raises(ContractViolation):
            contract.validate(json.dumps(["a", "a", ""]))

    def test_option_list_truncates_to_five(self):
        contract = OptionListContract("ConceptScope")
        options = contract.validate(json.dumps([str(i) for i in range(8)]))
        assert len(options) == 5

    def test_candidate_contract_happy_path(self):
        payload = {
            "sentence": GOOD_SENTENCE,
            "rationales": {"adverb": "r1", "verb": "r2", "noun": "r3", "adjective": "r4"},
        }
        sentence, rationales = CandidateContract().validate(json.dumps(payload))
        assert sentence.register is Register.GAME
        assert rationales[SlotKind.NOUN] == "r3"

    def test_candidate_contract_missing_rationale(self):
        payload = {
            "sentence": GOOD_SENTENCE,
            "rationales": {"adverb": "r1", "verb": "r2", "adjective": "r4"},
        }
        with pytest.raises(ContractViolation) as err:
            CandidateContract().validate(json.dumps(payload))
        assert "noun" in str(err.value)

    def test_candidate_contract_forbids_duplicates(self):
        payload = {
            "sentence": GOOD_SENTENCE,
            "rationales": {"adverb": "r", "verb": "r", "noun": "r", "adjective": "r"},
        }
        contract = CandidateContract(forbid_sentences=(GOOD_SENTENCE,))
        with pytest.raises(ContractViolation):
            contract.validate(json.dumps(payload))

    def test_paragraph_requires_play_example(self):
        contract = ParagraphContract()
        with pytest.raises(ContractViolation):
            contract.validate("A paragraph with no illustration.")
        assert contract.validate("Players sort. For example, they pick a card.")

    def test_pseudocode_contract_checks_format(self):
        contract = PseudocodeContract(("noun text",))
        with pytest.raises(ContractViolation):
            contract.validate("GAME: x\nSETUP:\n  a noun text line")


class TestMockProvider:
    def test_pure_function_of_seed_and_prompt(self):
        spec = sentence_spec()
        a = mock_provider(7).complete(build_prompt(spec), 1.0)
        b = mock_provider(7).complete(build_prompt(spec), 1.0)
        assert a == b

    def test_sentence_output_parses(self):
        result = complete(sentence_spec(), mock_provider(3))
        assert result.attempts == 1
        parse_sentence(result.raw_text, Register.TEACHING)

    def test_seeds_differ_on_candidate_contract(self):
        # Distinct seeds below 100 give pairwise-distinct candidate fills
        # for the same prompt.
        spec = PromptSpec(
            phase=PromptPhase.TRANSLATION,
            objective="Translate.",
            context_blocks=(
                ("pedagogy-sentence", GOOD_SENTENCE),
                ("candidate-index", "0"),
            ),
            output_contract=CandidateContract(),
        )
        prompt = build_prompt(spec)
        outputs = [mock_provider(seed).complete(prompt, 1.0) for seed in range(100)]
        assert len(set(outputs)) == 100

    def test_candidate_output_is_valid(self):
        spec = PromptSpec(
            phase=PromptPhase.TRANSLATION,
            objective="Translate.",
            context_blocks=(
                ("pedagogy-sentence", GOOD_SENTENCE),
                ("candidate-index", "1"),
            ),
            output_contract=CandidateContract(),
        )
        result = complete(spec, mock_provider(0))
        sentence, rationales = spec.output_contract.validate(result.raw_text)
        assert sentence.register is Register.GAME
        assert len(rationales) == 4

    def test_scripted_three_attempt_sequence(self):
        provider = ScriptedProvider(["bad", "bad", GOOD_SENTENCE])
        result = complete(sentence_spec(), provider)
        assert result.attempts == 3


class TestGatewayBundle:
    def test_bundle_uses_policy(self):
        bundle = Gateway(ScriptedProvider(["bad"]), RetryPolicy(max_attempts=1))
        with pytest.raises(ProviderFailure):
            bundle.complete(sentence_spec())


class TestHttpProvider:
    def test_request_shape_and_response_parse(self):
        captured = {}

        def handler(request: httpx.Request) -> httpx.Response:
            captured["url"] = str(request.url)
            captured["auth"] = request.headers.get("authorization")
            captured["body"] = json.loads(request.content)
            return httpx.Response(
                200,
                json={"choices": [{"message": {"role": "assistant",
                                               "content": GOOD_SENTENCE}}]},
            )

        provider = HttpChatProvider(
            "https://llm.example/v1/chat/completions",
            "test-model",
            "secret-key",
            transport=httpx.MockTransport(handler),
        )
        text = provider.complete("hello prompt", timeout=5.0)
        assert text == GOOD_SENTENCE
        assert captured["url"] == "https://llm.example/v1/chat/completions"
        assert captured["auth"] == "Bearer secret-key"
        assert captured["body"]["model"] == "test-model"
        assert captured["body"]["messages"] == [
            {"role": "user", "content": "hello prompt"}
        ]

    def test_timeout_translated(self):
        def handler(request: httpx.Request) -> httpx.Response:
            raise httpx.ConnectTimeout("too slow")

        provider = HttpChatProvider(
            "https://llm.example/v1/chat/completions",
            "test-model",
            "secret-key",
            transport=httpx.MockTransport(handler),
        )
        with pytest.raises(TimeoutError):
            provider.complete("prompt", timeout=0.1)

    def test_from_env_requires_configuration(self, monkeypatch):
        monkeypatch.delenv("PEDFORGE_LLM_ENDPOINT", raising=False)
        monkeypatch.delenv("PEDFORGE_LLM_MODEL", raising=False)
        monkeypatch.delenv("PEDFORGE_LLM_API_KEY", raising=False)
        with pytest.raises(RuntimeError) as err:
            HttpChatProvider.from_env()
        assert "PEDFORGE_LLM_API_KEY" in str(err.value)
