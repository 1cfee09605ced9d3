import json

import pytest

from newspod.assembler import (
    BREAK_SENTENCES,
    BREAK_SILENCE_MS,
    CLOSING_TEXT,
    GREETING_TEMPLATE,
    ScriptUnit,
    SegmentScript,
    assemble_podcast,
    build_segment,
    estimate_seconds,
    script_from_dict,
    script_to_dict,
    script_to_json,
    truncate_segment,
    word_budget,
)
from newspod.errors import BudgetTooSmall, ReferenceUnavailable
from newspod.providers import mock_provider_set

from conftest import FIXTURE_DIR, load_story


def providers_for(cluster):
    return mock_provider_set([p.text for p in cluster.paragraphs])


class TestWordBudget:
    def test_five_minutes_five_segments(self):
        assert word_budget(300, 5) == 135

    def test_sixty_seconds_is_135_words(self):
        assert word_budget(60, 1) == 135

    def test_200_words_is_about_90_seconds(self):
        seconds = estimate_seconds(200)
        assert abs(seconds - 90) / 90 < 0.20

    def test_budget_too_small(self):
        with pytest.raises(BudgetTooSmall):
            word_budget(100, 5)
        with pytest.raises(BudgetTooSmall):
            word_budget(300, 0)

    def test_floor_behavior(self):
        # 100s over 3 segments: 100/3 * 2.25 = 75.0
        assert word_budget(100, 3) == 75
        # 95s over 2: 47.5 * 2.25 = 106.875 -> 106
        assert word_budget(95, 2) == 106


class TestBuildSegment:
    def test_qa_best_structure(self):
        cluster = load_story("tesla-autopilot-ban")
        segment = build_segment(cluster, "qa_best", 200, 0, providers_for(cluster))
        kinds = [u.kind for u in segment.units]
        assert kinds[0] == "headline"
        assert kinds[1] == "summary"
        assert kinds[-2:] == ["quote_intro", "quote_body"]
        qa_kinds = kinds[2:-2]
        assert qa_kinds == ["question", "answer"] * (len(qa_kinds) // 2)
        assert len(qa_kinds) // 2 >= 3  # around four pairs at a 200-word budget
        assert segment.degraded is False
        assert len(segment.recommended_questions) == 2

    def test_baseline_all_voice1(self):
        cluster = load_story("tesla-autopilot-ban")
        segment = build_segment(cluster, "baseline", 200, 3, providers_for(cluster))
        assert all(u.voice_role == "V1" for u in segment.units)
        assert all(u.kind not in ("question", "quote_body") for u in segment.units)
        assert segment.word_total() >= 200 or segment.word_total() == sum(
            u.word_count for u in segment.units)

    def test_baseline_article_choice_seeded(self):
        cluster = load_story("rohingya-crisis")
        a = build_segment(cluster, "baseline", 60, 1, providers_for(cluster))
        b = build_segment(cluster, "baseline", 60, 1, providers_for(cluster))
        assert a == b

    def test_qa_rand_seeded(self):
        cluster = load_story("amazon-union-vote")
        a = build_segment(cluster, "qa_rand", 150, 7, providers_for(cluster))
        b = build_segment(cluster, "qa_rand", 150, 7, providers_for(cluster))
        assert a == b

    def test_qa_rand_differs_from_qa_best_sometimes(self):
        cluster = load_story("tesla-autopilot-ban")
        best = build_segment(cluster, "qa_best", 200, 0, providers_for(cluster))
        rand_segments = [
            build_segment(cluster, "qa_rand", 200, seed, providers_for(cluster))
            for seed in range(5)
        ]
        assert any(r.units != best.units for r in rand_segments)

    def test_reference_loads_file(self):
        cluster = load_story("tesla-autopilot-ban")
        segment = build_segment(cluster, "reference", 200, 0, providers_for(cluster),
                                reference_dir=FIXTURE_DIR / "reference")
        assert segment.condition == "reference"
        assert segment.units[0].kind == "headline"
        assert any(u.kind == "question" for u in segment.units)

    def test_reference_missing_raises(self):
        cluster = load_story("swiss-burqa-ban")
        with pytest.raises(ReferenceUnavailable):
            build_segment(cluster, "reference", 200, 0, providers_for(cluster),
                          reference_dir=FIXTURE_DIR / "reference")

    def test_degraded_when_no_questions(self):
        cluster = load_story("swiss-burqa-ban")

        class _DeadQgen:
            def generate_question(self, paragraph, interrogative):
                from newspod.errors import ProviderUnavailable
                raise ProviderUnavailable("down")

        providers = providers_for(cluster)
        providers.question_generator = _DeadQgen()
        segment = build_segment(cluster, "qa_best", 150, 0, providers)
        assert segment.degraded is True
        kinds = [u.kind for u in segment.units]
        assert "question" not in kinds
        assert kinds[:2] == ["headline", "summary"]

    def test_unknown_condition(self):
        cluster = load_story("swiss-burqa-ban")
        with pytest.raises(ValueError):
            build_segment(cluster, "mystery", 150, 0, providers_for(cluster))


def _synthetic_segment():
    """200 words: 40 intro + four 30-word pairs + 40-word quote."""
    def unit(ordinal, kind, n_words):
        text = " ".join(f"{kind}{i}" for i in range(n_words))
        from newspod.assembler import VOICE_FOR_KIND, DEFAULT_VOICE_ROLE
        return ScriptUnit(f"seg-x-u{ordinal}", kind, text,
                          VOICE_FOR_KIND.get(kind, DEFAULT_VOICE_ROLE), n_words)

    units = [unit(0, "headline", 8), unit(1, "summary", 32)]
    ordinal = 2
    for _ in range(4):
        units.append(unit(ordinal, "question", 5))
        units.append(unit(ordinal + 1, "answer", 25))
        ordinal += 2
    units.append(unit(ordinal, "quote_intro", 5))
    units.append(unit(ordinal + 1, "quote_body", 35))
    segment = SegmentScript(
        segment_id="seg-x", story_id="x", title="X", condition="qa_best",
        units=tuple(units),
    )
    assert segment.word_total() == 200
    return segment


class TestTruncateSegment:
    def test_paper_truncation_example(self):
        segment = _synthetic_segment()
        truncated = truncate_segment(segment, 100)
        kinds = [u.kind for u in truncated.units]
        assert kinds == ["headline", "summary", "question", "answer", "question", "answer"]
        assert truncated.word_total() == 100

    def test_identity_when_budget_covers(self):
        segment = _synthetic_segment()
        assert truncate_segment(segment, 200).units == segment.units
        assert truncate_segment(segment, 10_000).units == segment.units

    def test_prefix_monotonicity(self):
        segment = _synthetic_segment()
        small = truncate_segment(segment, 100)
        large = truncate_segment(segment, 160)
        assert large.units[:len(small.units)] == small.units

    def test_idempotent(self):
        segment = _synthetic_segment()
        once = truncate_segment(segment, 130)
        twice = truncate_segment(once, 130)
        assert once == twice

    def test_quote_atomic(self):
        segment = _synthetic_segment()
        # budget that lands inside the quote: intro+pairs = 160, quote starts at 160
        truncated = truncate_segment(segment, 161)
        kinds = [u.kind for u in truncated.units]
        assert kinds[-2:] == ["quote_intro", "quote_body"]
        below = truncate_segment(segment, 160)
        assert "quote_intro" not in [u.kind for u in below.units]

    def test_over_budget_keeps_intro(self):
        segment = _synthetic_segment()
        truncated = truncate_segment(segment, 10)
        assert [u.kind for u in truncated.units] == ["headline", "summary"]
        assert truncated.over_budget is True


class TestAssemblePodcast:
    def _segments(self, n=3, with_quotes=False):
        segments = []
        for i in range(n):
            cluster = load_story(["tesla-autopilot-ban", "rohingya-crisis",
                                  "amazon-union-vote", "iceberg-breakoff"][i % 4])
            segments.append(build_segment(cluster, "qa_best", 135, 0, providers_for(cluster)))
        return segments

    def test_structure_and_texts(self):
        segments = self._segments(3)
        script = assemble_podcast(segments, 180, with_breaks=False)
        titles = [s.title for s in segments]
        expected_greeting = GREETING_TEMPLATE.format(
            titles=f"{titles[0]}, {titles[1]} and {titles[2]}")
        assert script.greeting.text == expected_greeting
        assert script.closing.text == CLOSING_TEXT
        assert [t.text for t in script.transitions] == [
            f"Next up, {titles[1]}.", f"Next up, {titles[2]}.",
        ]

    def test_single_segment_no_transition(self):
        segments = self._segments(1)
        script = assemble_podcast(segments, 60, with_breaks=False)
        assert script.transitions == ()
        assert script.greeting.text.startswith("Welcome to NewsPod, today we'll be covering ")

    def test_breaks_add_two_sentences_and_silences(self):
        segments = self._segments(2)
        script = assemble_podcast(segments, 120, with_breaks=True)
        for segment in script.segments:
            prompts = [u for u in segment.units if u.kind == "break_prompt"]
            silences = [u for u in segment.units if u.kind == "silence"]
            assert [u.text for u in prompts] == list(BREAK_SENTENCES)
            assert len(silences) == 2
            assert all(u.silence_ms == BREAK_SILENCE_MS for u in silences)
            kinds = [u.kind for u in segment.units[-4:]]
            assert kinds == ["break_prompt", "silence", "break_prompt", "silence"]
        joined = " ".join(BREAK_SENTENCES)
        assert joined == ("We're wrapping up this story, if you have a question, now is a "
                          "good time to ask. Otherwise, we'll be moving on to the next story.")

    def test_no_breaks_no_silence_units(self):
        segments = self._segments(2)
        script = assemble_podcast(segments, 120, with_breaks=False)
        for segment in script.segments:
            assert all(u.kind not in ("break_prompt", "silence") for u in segment.units)

    def test_voice_mapping_invariant(self):
        segments = self._segments(3)
        for with_breaks in (False, True):
            script = assemble_podcast(segments, 180, with_breaks=with_breaks)
            for _, unit, _ in script.play_units():
                if unit.kind == "question":
                    assert unit.voice_role == "V2"
                elif unit.kind == "quote_body":
                    assert unit.voice_role == "V3"
                elif unit.kind == "silence":
                    assert unit.voice_role == "none"
                else:
                    assert unit.voice_role == "V1"

    def test_deterministic_serialization(self):
        segments_a = self._segments(2)
        segments_b = self._segments(2)
        a = script_to_json(assemble_podcast(segments_a, 120, True))
        b = script_to_json(assemble_podcast(segments_b, 120, True))
        assert a == b

    def test_round_trip(self):
        script = assemble_podcast(self._segments(2), 120, True)
        data = json.loads(script_to_json(script))
        assert script_from_dict(data) == script
        assert script_to_dict(script_from_dict(data)) == data

    def test_play_units_order(self):
        script = assemble_podcast(self._segments(2), 120, False)
        kinds = [u.kind for _, u, _ in script.play_units()]
        assert kinds[0] == "greeting"
        assert kinds[-1] == "closing"
        assert kinds.count("transition") == 1

    def test_estimated_duration_within_20_percent(self):
        from conftest import STORY_IDS

        segments = []
        for story_id in STORY_IDS[:5]:
            cluster = load_story(story_id)
            segments.append(build_segment(cluster, "qa_best", word_budget(300, 5), 0,
                                          providers_for(cluster)))
        script = assemble_podcast(segments, 300, with_breaks=False)
        words = script.greeting.word_count + script.closing.word_count
        words += sum(u.word_count for u in script.transitions)
        words += sum(s.word_total() for s in script.segments)
        silence_ms = sum(u.silence_ms or 0 for s in script.segments for u in s.units)
        estimate = estimate_seconds(words, silence_ms)
        assert abs(estimate - 300) / 300 <= 0.20
