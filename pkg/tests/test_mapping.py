import pytest
from hypothesis import given
from hypothesis import strategies as st

from pedforge.cnl import SLOT_ORDER, ControlledSentence, Register, RegisterMismatch, SlotKind
from pedforge.mapping import (
    MAPPING_TABLE,
    AlignmentStatus,
    DuplicateRationale,
    SlotRationale,
    align_candidate,
    is_fully_aligned,
    mapping_row,
)

PEDAGOGY = ControlledSentence(
    Register.TEACHING,
    "accurately, 8 of 10 within 15 minutes",
    "solve matching problems",
    "fraction equivalence",
    "stylized kitchen",
)
GAME = ControlledSentence(
    Register.GAME,
    "under rules requiring 8 of 10 within 15 minutes",
    "sort and match",
    "fraction cards",
    "stylized kitchen puzzle",
)


def full_rationales(pedagogy=PEDAGOGY):
    return [
        SlotRationale(kind, f"justifies the {kind.value.lower()}", pedagogy.slot_text(kind))
        for kind in SLOT_ORDER
    ]


class TestMappingTable:
    def test_total_and_constant(self):
        assert len(MAPPING_TABLE) == 4
        for kind in SLOT_ORDER:
            assert mapping_row(kind) == mapping_row(kind)
            assert mapping_row(kind).kind is kind

    def test_fixed_game_meanings(self):
        assert mapping_row(SlotKind.ADVERB).game_meaning == (
            "Rules and parameters that configure difficulty and success conditions."
        )
        assert mapping_row(SlotKind.VERB).game_meaning == (
            "Game mechanics that define the primary player action and interaction pattern."
        )
        assert mapping_row(SlotKind.NOUN).game_meaning == (
            "Content models and in-game artifacts that instantiate the concept."
        )
        assert mapping_row(SlotKind.ADJECTIVE).game_meaning == (
            "Aesthetic and contextual profiles that define the game world and framing."
        )

    def test_fixed_teaching_meanings(self):
        assert mapping_row(SlotKind.ADVERB).teaching_meaning == (
            "Specifies performance requirements for the targeted ability."
        )
        assert mapping_row(SlotKind.VERB).teaching_meaning == (
            "Expresses the targeted teaching ability as an observable action."
        )
        assert mapping_row(SlotKind.NOUN).teaching_meaning == (
            "Denotes the focal teaching concept or content domain."
        )
        assert mapping_row(SlotKind.ADJECTIVE).teaching_meaning == (
            "Characterizes the learning context, realism level, and instructional tone."
        )


class TestAlignCandidate:
    def test_all_current_rationales_aligned(self):
        report = align_candidate(PEDAGOGY, GAME, full_rationales())
        assert is_fully_aligned(report)
        assert report.misaligned_kinds() == ()

    def test_omitted_rationale_missing(self):
        rationales = [r for r in full_rationales() if r.kind is not SlotKind.NOUN]
        report = align_candidate(PEDAGOGY, GAME, rationales)
        assert report.statuses[SlotKind.NOUN].status is AlignmentStatus.MISSING_RATIONALE
        assert report.misaligned_kinds() == (SlotKind.NOUN,)
        assert not is_fully_aligned(report)

    def test_outdated_pedagogy_text_stale(self):
        edited = PEDAGOGY.with_slot(SlotKind.VERB, "sort worked examples")
        report = align_candidate(edited, GAME, full_rationales(PEDAGOGY))
        assert report.statuses[SlotKind.VERB].status is AlignmentStatus.STALE_REFERENCE
        assert report.misaligned_kinds() == (SlotKind.VERB,)

    def test_explicit_stale_flag(self):
        rationales = full_rationales()
        rationales[1] = SlotRationale(
            SlotKind.VERB, rationales[1].explanation,
            rationales[1].pedagogy_slot_text, stale=True,
        )
        report = align_candidate(PEDAGOGY, GAME, rationales)
        assert report.statuses[SlotKind.VERB].status is AlignmentStatus.STALE_REFERENCE

    def test_duplicate_rationale_rejected(self):
        rationales = full_rationales() + [full_rationales()[0]]
        with pytest.raises(DuplicateRationale) as err:
            align_candidate(PEDAGOGY, GAME, rationales)
        assert err.value.kind is SlotKind.ADVERB

    def test_register_preconditions(self):
        with pytest.raises(RegisterMismatch):
            align_candidate(GAME, GAME, full_rationales())
        with pytest.raises(RegisterMismatch):
            align_candidate(PEDAGOGY, PEDAGOGY, full_rationales())

    @given(st.permutations(list(SLOT_ORDER)))
    def test_monotone_under_rationale_addition(self, order):
        # Adding valid rationales one by one never un-aligns an aligned kind.
        supplied = []
        aligned_so_far: set[SlotKind] = set()
        for kind in order:
            supplied.append(
                SlotRationale(kind, "why", PEDAGOGY.slot_text(kind))
            )
            report = align_candidate(PEDAGOGY, GAME, supplied)
            now_aligned = set(report.kinds_with(AlignmentStatus.ALIGNED))
            assert aligned_so_far <= now_aligned
            aligned_so_far = now_aligned
        assert aligned_so_far == set(SLOT_ORDER)

    def test_editing_one_pedagogy_slot_invalidates_only_that_kind(self):
        rationales = full_rationales()
        for kind in SLOT_ORDER:
            edited = PEDAGOGY.with_slot(kind, PEDAGOGY.slot_text(kind) + " edited")
            report = align_candidate(edited, GAME, rationales)
            assert report.misaligned_kinds() == (kind,)
