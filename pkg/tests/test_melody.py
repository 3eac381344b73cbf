from fractions import Fraction

import pytest

from lyricmelody import (
    AlignmentError,
    BeatStrength,
    Melody,
    MelodyToken,
    PauseCause,
    TokenKind,
    compute_beat_grid,
    detect_pauses,
    is_long_note,
    melody_from_json,
    melody_to_json,
    note,
    rest,
    parse_lyrics,
)
from conftest import mk_melody

S, W = BeatStrength.STRONG, BeatStrength.WEAK


class TestTokens:
    def test_rest_cannot_carry_pitch(self):
        with pytest.raises(ValueError):
            MelodyToken(TokenKind.REST, Fraction(1), pitch=60)

    def test_rest_cannot_start_syllable(self):
        with pytest.raises(ValueError):
            MelodyToken(TokenKind.REST, Fraction(1), syllable_start=True)

    def test_duration_positive(self):
        with pytest.raises(ValueError):
            MelodyToken(TokenKind.NOTE, Fraction(0), pitch=60)

    def test_pitch_range(self):
        with pytest.raises(ValueError):
            note(128, 1)


class TestMelodyInvariants:
    def test_alignment_derived(self):
        m = mk_melody([(60, 1), (62, 1, False), ("r", 1), (64, 1)])
        assert m.alignment == ((0, 2), (3, 4))
        assert m.syllable_count == 2
        assert m.span_pitches(0) == [60, 62]

    def test_leading_rest_rejected(self):
        with pytest.raises(AlignmentError):
            mk_melody([("r", 1), (60, 1)])

    def test_consecutive_rests_rejected(self):
        with pytest.raises(AlignmentError):
            mk_melody([(60, 1), ("r", 1), ("r", 1), (62, 1)])

    def test_continuation_after_rest_rejected(self):
        with pytest.raises(AlignmentError):
            mk_melody([(60, 1), ("r", 1), (62, 1, False)])

    def test_total_duration(self):
        m = mk_melody([(60, "1/2"), ("r", "3/2"), (62, 2)])
        assert m.total_duration() == Fraction(4)

    def test_json_round_trip(self):
        m = mk_melody([(60, "1/2"), (62, "1/2", False), ("r", 1), (64, 2)], (3, 4))
        assert melody_from_json(melody_to_json(m)) == m


class TestBeatGrid:
    def test_four_four_quarters(self):
        m = mk_melody([(60, 1), (62, 1), (64, 1), (65, 1)])
        grid = compute_beat_grid(m)
        assert list(grid.strengths) == [S, W, S, W]
        assert list(grid.onsets) == [Fraction(0), Fraction(1), Fraction(2), Fraction(3)]

    def test_three_four_quarters(self):
        m = mk_melody([(60, 1), (62, 1), (64, 1)], (3, 4))
        assert list(compute_beat_grid(m).strengths) == [S, W, W]

    def test_single_note_is_downbeat(self):
        m = mk_melody([(60, 1)])
        assert list(compute_beat_grid(m).strengths) == [S]

    def test_offsets_wrap_at_bar(self):
        m = mk_melody([(60, 2), (62, 2), (64, 2)])
        grid = compute_beat_grid(m)
        assert list(grid.onsets) == [Fraction(0), Fraction(2), Fraction(0)]
        assert list(grid.strengths) == [S, S, S]

    def test_eighth_offsets_exact(self):
        m = mk_melody([(60, "1/2"), (62, "1/2"), (64, 1), (65, 1), (67, 1)])
        grid = compute_beat_grid(m)
        assert list(grid.onsets) == [
            Fraction(0),
            Fraction(1, 2),
            Fraction(1),
            Fraction(2),
            Fraction(3),
        ]
        assert list(grid.strengths) == [S, W, W, S, W]

    def test_non_power_of_two_denominator_rejected(self):
        m = mk_melody([(60, 1)], (4, 6))
        with pytest.raises(ValueError, match="unsupported meter"):
            compute_beat_grid(m)

    def test_onsets_are_monotone_positions_mod_bar(self, rng):
        from lyricmelody.synthetic import random_training_melody

        for _ in range(25):
            m = random_training_melody(rng, length=rng.randint(2, 20))
            grid = compute_beat_grid(m)
            position = Fraction(0)
            positions = []
            for tok in m.tokens:
                positions.append(position)
                position += tok.duration
            # absolute positions are the monotone running duration sum;
            # the grid stores them folded into the bar
            assert all(a <= b for a, b in zip(positions, positions[1:]))
            assert [p % grid.bar_length for p in positions] == list(grid.onsets)
            assert m.total_duration() == positions[-1] + m.tokens[-1].duration

    def test_six_eight_allowed_with_single_strong(self):
        m = mk_melody([(60, "1/2"), (62, "1/2"), (64, "1/2")], (6, 8))
        assert list(compute_beat_grid(m).strengths) == [S, W, W]


class TestLongNote:
    @pytest.mark.parametrize("duration,expected", [(2, True), ("1/2", False), (3, True)])
    def test_threshold_inclusive(self, config, duration, expected):
        assert is_long_note(note(60, duration), config) is expected

    def test_rest_rejected(self, config):
        with pytest.raises(ValueError):
            is_long_note(rest(1), config)


class TestDetectPauses:
    def test_rest_between_syllables(self, config):
        lyr = parse_lyrics("ni3|W hao3|I tian1|W kong1|I .")
        m = mk_melody([(60, 1), (62, 1), (64, 1), ("r", 1), (65, 1)])
        events = detect_pauses(m, lyr, config)
        assert events == [
            type(events[0])(2, PauseCause.REST_NOTE),
        ]

    def test_missing_sentence_boundary_pause(self, config):
        # sentence ends at syllable 4 (0-based) with a short final note
        lyr = parse_lyrics("ni3|W hao3|I tian1|W kong1|I ming2|W .\nyue4|W liang4|I .")
        m = mk_melody([(60, 1)] * 7)
        events = detect_pauses(m, lyr, config)
        assert [(e.position, e.cause) for e in events] == [
            (4, PauseCause.SENTENCE_BOUNDARY_MISSING)
        ]

    def test_single_syllable_has_no_gaps(self, config):
        lyr = parse_lyrics("ni3|W .")
        m = mk_melody([(60, 1)])
        assert detect_pauses(m, lyr, config) == []

    def test_long_note_mid_sentence(self, config):
        lyr = parse_lyrics("ni3|W hao3|I .")
        m = mk_melody([(60, 2), (62, 1)])
        events = detect_pauses(m, lyr, config)
        assert [(e.position, e.cause) for e in events] == [(0, PauseCause.LONG_NOTE)]

    def test_long_note_at_sentence_boundary_is_expected(self, config):
        lyr = parse_lyrics("ni3|W .\nhao3|W .")
        m = mk_melody([(60, 2), (62, 1)])
        assert detect_pauses(m, lyr, config) == []

    def test_alignment_mismatch_rejected(self, config):
        lyr = parse_lyrics("ni3|W hao3|I .")
        m = mk_melody([(60, 1)])
        with pytest.raises(AlignmentError):
            detect_pauses(m, lyr, config)

    def test_rest_and_long_note_both_reported(self, config):
        lyr = parse_lyrics("ni3|W hao3|I .")
        m = mk_melody([(60, 2), ("r", 1), (62, 1)])
        causes = {e.cause for e in detect_pauses(m, lyr, config)}
        assert causes == {PauseCause.REST_NOTE, PauseCause.LONG_NOTE}
