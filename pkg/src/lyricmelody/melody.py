"""Melody tokens, syllable alignment, beat grid, and pause detection.

A melody is a flat stream of note/rest tokens.  Melisma is encoded on the
note itself: ``syllable_start=True`` opens the span of the next syllable,
``False`` continues the current one.  A rest closes whatever span is open
and belongs to no syllable, so the syllable-to-note alignment is recoverable
by a single scan and is recomputed (and validated) whenever a Melody is
constructed.

Durations and onsets are exact rationals in quarter-note units; nothing in
this module touches floats.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Optional, TYPE_CHECKING

from .errors import AlignmentError, MidiFormatError

if TYPE_CHECKING:  # pragma: no cover
    from .lyrics import LyricSequence
    from .rewards import RewardConfig

__all__ = [
    "TokenKind",
    "MelodyToken",
    "Melody",
    "BeatStrength",
    "BeatGrid",
    "PauseCause",
    "PauseEvent",
    "note",
    "rest",
    "compute_beat_grid",
    "is_long_note",
    "detect_pauses",
    "melody_to_json",
    "melody_from_json",
]


class TokenKind(Enum):
    NOTE = "note"
    REST = "rest"


@dataclass(frozen=True, slots=True)
class MelodyToken:
    kind: TokenKind
    duration: Fraction
    pitch: Optional[int] = None
    syllable_start: bool = False

    def __post_init__(self) -> None:
        if self.duration <= 0:
            raise ValueError(f"token duration must be positive, got {self.duration}")
        if self.kind is TokenKind.NOTE:
            if self.pitch is None or not 0 <= self.pitch <= 127:
                raise ValueError(f"note pitch must be a MIDI number 0-127, got {self.pitch}")
        else:
            if self.pitch is not None:
                raise ValueError("rest tokens carry no pitch")
            if self.syllable_start:
                raise ValueError("rest tokens never begin a syllable")

    @property
    def is_note(self) -> bool:
        return self.kind is TokenKind.NOTE


def note(pitch: int, duration, start: bool = True) -> MelodyToken:
    return MelodyToken(TokenKind.NOTE, Fraction(duration), pitch, start)


def rest(duration) -> MelodyToken:
    return MelodyToken(TokenKind.REST, Fraction(duration))


@dataclass(frozen=True)
class Melody:
    """Token stream plus time signature and the derived syllable alignment.

    ``alignment[k]`` is the half-open token-index span of syllable ``k``'s
    notes.  Construction enforces the stream grammar: starts with a
    syllable-opening note, continuations only while a span is open, no two
    rests in a row.  Immutable after construction.
    """

    tokens: tuple[MelodyToken, ...]
    time_signature: tuple[int, int] = (4, 4)
    alignment: tuple[tuple[int, int], ...] = field(default=(), compare=False)

    def __post_init__(self) -> None:
        if not self.tokens:
            raise AlignmentError("melody has no tokens")
        num, den = self.time_signature
        if num < 1 or den < 1:
            raise ValueError(f"bad time signature {self.time_signature}")
        spans: list[tuple[int, int]] = []
        open_start: Optional[int] = None
        prev_rest = False
        for idx, tok in enumerate(self.tokens):
            if tok.kind is TokenKind.REST:
                if idx == 0:
                    raise AlignmentError("melody must not begin with a rest")
                if prev_rest:
                    raise AlignmentError(f"consecutive rests at token {idx}")
                if open_start is not None:
                    spans.append((open_start, idx))
                    open_start = None
                prev_rest = True
                continue
            prev_rest = False
            if tok.syllable_start:
                if open_start is not None:
                    spans.append((open_start, idx))
                open_start = idx
            else:
                if open_start is None:
                    raise AlignmentError(
                        f"continuation note at token {idx} has no open syllable span"
                    )
        if open_start is not None:
            spans.append((open_start, len(self.tokens)))
        if not spans:
            raise AlignmentError("melody contains no syllable-starting note")
        object.__setattr__(self, "alignment", tuple(spans))

    @property
    def syllable_count(self) -> int:
        return len(self.alignment)

    def span_notes(self, k: int) -> list[MelodyToken]:
        start, stop = self.alignment[k]
        return [t for t in self.tokens[start:stop] if t.is_note]

    def span_pitches(self, k: int) -> list[int]:
        return [t.pitch for t in self.span_notes(k)]

    def total_duration(self) -> Fraction:
        return sum((t.duration for t in self.tokens), Fraction(0))


class BeatStrength(Enum):
    STRONG = "strong"
    WEAK = "weak"


@dataclass(frozen=True, slots=True)
class BeatGrid:
    """Per-token bar offset and metrical strength."""

    onsets: tuple[Fraction, ...]
    strengths: tuple[BeatStrength, ...]
    bar_length: Fraction


def strong_offsets(time_signature: tuple[int, int]) -> frozenset[Fraction]:
    """Bar offsets (in quarters) that count as strong for a simple meter.

    Beat 1 is strong everywhere; 4/4 additionally accents beat 3.
    """
    if time_signature == (4, 4):
        return frozenset({Fraction(0), Fraction(2)})
    return frozenset({Fraction(0)})


def beat_strength_at(offset: Fraction, time_signature: tuple[int, int]) -> BeatStrength:
    num, den = time_signature
    bar = Fraction(num) * Fraction(4, den)
    if offset % bar in strong_offsets(time_signature):
        return BeatStrength.STRONG
    return BeatStrength.WEAK


def compute_beat_grid(melody: Melody) -> BeatGrid:
    """Onset and strong/weak strength of every token, from the time signature.

    Onsets are running sums of the preceding durations; the bar length is
    ``numerator * 4/denominator`` quarters.  Only power-of-two denominators
    are metrically meaningful here.
    """
    num, den = melody.time_signature
    if den & (den - 1) != 0:
        raise ValueError(f"unsupported meter {num}/{den}: denominator must be a power of two")
    bar = Fraction(num) * Fraction(4, den)
    strong = strong_offsets(melody.time_signature)
    onsets: list[Fraction] = []
    strengths: list[BeatStrength] = []
    position = Fraction(0)
    for tok in melody.tokens:
        offset = position % bar
        onsets.append(offset)
        strengths.append(
            BeatStrength.STRONG if offset in strong else BeatStrength.WEAK
        )
        position += tok.duration
    return BeatGrid(tuple(onsets), tuple(strengths), bar)


def is_long_note(token: MelodyToken, config: "RewardConfig") -> bool:
    """A note long enough to read as a phrase-ending hold (threshold inclusive)."""
    if not token.is_note:
        raise ValueError("is_long_note is defined for notes only")
    return token.duration >= config.long_note_threshold


class PauseCause(Enum):
    REST_NOTE = "rest"
    LONG_NOTE = "long_note"
    SENTENCE_BOUNDARY_MISSING = "missing"


@dataclass(frozen=True, slots=True)
class PauseEvent:
    """Something pause-related at the gap between syllables ``position`` and
    ``position + 1``: an actual pause (rest / long note) or the absence of an
    expected one at a sentence boundary."""

    position: int
    cause: PauseCause


def detect_pauses(
    melody: Melody, lyrics: "LyricSequence", config: "RewardConfig"
) -> list[PauseEvent]:
    """Scan every syllable gap for pauses and missing sentence-final pauses.

    Per gap: each rest emits a REST_NOTE event; a long span-final note emits
    LONG_NOTE unless the gap is a sentence boundary (where the long note is
    the expected ending); a sentence boundary with neither emits
    SENTENCE_BOUNDARY_MISSING.
    """
    if melody.syllable_count != len(lyrics):
        raise AlignmentError(
            f"melody covers {melody.syllable_count} syllables, lyrics have {len(lyrics)}"
        )
    events: list[PauseEvent] = []
    for gap in range(len(lyrics) - 1):
        left_stop = melody.alignment[gap][1]
        right_start = melody.alignment[gap + 1][0]
        rests = [
            t for t in melody.tokens[left_stop:right_start] if t.kind is TokenKind.REST
        ]
        at_sentence_boundary = lyrics.syllables[gap].sentence_final
        last_note = melody.tokens[melody.alignment[gap][1] - 1]
        long_final = last_note.is_note and is_long_note(last_note, config)
        for _ in rests:
            events.append(PauseEvent(gap, PauseCause.REST_NOTE))
        if long_final and not at_sentence_boundary:
            events.append(PauseEvent(gap, PauseCause.LONG_NOTE))
        if at_sentence_boundary and not rests and not long_final:
            events.append(PauseEvent(gap, PauseCause.SENTENCE_BOUNDARY_MISSING))
    return events


def gap_has_pause(melody: Melody, gap: int, config: "RewardConfig") -> bool:
    """True if the gap after syllable ``gap`` holds a rest or ends on a long note."""
    left_stop = melody.alignment[gap][1]
    right_start = melody.alignment[gap + 1][0]
    if any(t.kind is TokenKind.REST for t in melody.tokens[left_stop:right_start]):
        return True
    last_note = melody.tokens[left_stop - 1]
    return last_note.is_note and is_long_note(last_note, config)


def melody_to_json(melody: Melody) -> str:
    import json

    doc = {
        "time_signature": list(melody.time_signature),
        "tokens": [
            {
                "kind": t.kind.value,
                "duration": str(t.duration),
                **({"pitch": t.pitch, "syllable_start": t.syllable_start} if t.is_note else {}),
            }
            for t in melody.tokens
        ],
    }
    return json.dumps(doc, indent=2, sort_keys=True)


def melody_from_json(source: str) -> Melody:
    import json

    try:
        doc = json.loads(source)
        tokens = []
        for t in doc["tokens"]:
            kind = TokenKind(t["kind"])
            duration = Fraction(t["duration"])
            if kind is TokenKind.NOTE:
                tokens.append(
                    MelodyToken(kind, duration, int(t["pitch"]), bool(t["syllable_start"]))
                )
            else:
                tokens.append(MelodyToken(kind, duration))
        num, den = doc.get("time_signature", [4, 4])
        return Melody(tuple(tokens), (int(num), int(den)))
    except (KeyError, TypeError, ValueError, ArithmeticError) as exc:
        raise MidiFormatError(f"invalid melody JSON: {exc}") from exc
