"""Music-theoretic rewards tying a melody to its lyrics.

Six sub-rewards over three aspects:

* tone — pitch shape of a multi-note syllable, pitch transition between
  adjacent syllables (via a harmony-degree table), pitch contour of a
  whole sentence vs. its intonation;
* rhythm — keywords on strong beats / auxiliaries on weak beats, and
  pauses landing on word or sentence boundaries rather than inside words;
* structure — repeated lyric phrases repeating their pitch intervals.

Each sub-reward is a pure function; :func:`reward_events` derives every
triggered event for a *complete* lyrics/melody pair from the alignment,
beat grid and sentence spans, independently of the decoder's incremental
bookkeeping, so decode scores can be re-checked from scratch.

Event timing convention (shared with the decoder): a syllable's shape and
its sentence's contour fire on the token that closes the span (the next
rest, the next syllable's first note, or the end of the melody); transition,
strong/weak and structure fire on the syllable's first note; the pause
reward fires once per syllable gap — on the gap's rest if there is one,
otherwise on the next syllable's first note.  Within one token, events are
ordered shape, contour, transition, strong/weak, pause, structure.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from enum import Enum
from fractions import Fraction
from importlib import resources
from typing import Iterable, Optional, Sequence

from .errors import ConfigError
from .lyrics import (
    Intonation,
    Language,
    LyricSequence,
    StressClass,
    StructureMatrix,
    TONAL_TONES,
    Tone,
    WordPosition,
    build_structure_matrix,
)
from .melody import (
    BeatStrength,
    Melody,
    TokenKind,
    compute_beat_grid,
    is_long_note,
)

__all__ = [
    "Aspect",
    "ALL_ASPECTS",
    "HarmonyDegree",
    "HarmonyTable",
    "RewardConfig",
    "BoundaryKind",
    "RewardEvent",
    "PRESET_LAMBDAS",
    "pitch_shape_reward",
    "pitch_transition_reward",
    "contour_matches",
    "pitch_contour_reward",
    "strong_weak_reward",
    "pause_reward",
    "structure_reward",
    "total_reward",
    "reward_events",
    "score_rewards",
    "boundary_kind",
    "load_reward_config",
    "default_reward_config",
]


class Aspect(Enum):
    TONE = "tone"
    RHYTHM = "rhythm"
    STRUCTURE = "structure"


ALL_ASPECTS = frozenset(Aspect)


class HarmonyDegree(Enum):
    EXCELLENT = "excellent"
    GOOD = "good"
    FAIR = "fair"
    BAD = "bad"


@dataclass(frozen=True)
class HarmonyTable:
    """Per tone pair, labeled semitone intervals for the pitch jump between
    adjacent syllables.  Differences outside every interval are Bad.

    ``cells`` maps (previous tone, current tone) to a tuple of
    ``(lo, hi, degree)`` inclusive intervals.
    """

    cells: dict[tuple[Tone, Tone], tuple[tuple[int, int, HarmonyDegree], ...]]

    def __post_init__(self) -> None:
        for pair, intervals in self.cells.items():
            covered: set[int] = set()
            for lo, hi, _ in intervals:
                if lo > hi:
                    raise ConfigError(f"harmony cell {pair}: interval ({lo}, {hi}) is inverted")
                span = set(range(lo, hi + 1))
                if span & covered:
                    raise ConfigError(f"harmony cell {pair}: overlapping intervals")
                covered |= span
            if 0 not in covered:
                raise ConfigError(f"harmony cell {pair}: a zero pitch difference must be labeled")

    def degree_of(self, prev: Tone, cur: Tone, delta: int) -> Optional[HarmonyDegree]:
        """Degree for a semitone jump, or None when the pair has no cell."""
        intervals = self.cells.get((prev, cur))
        if intervals is None:
            return None
        for lo, hi, degree in intervals:
            if lo <= delta <= hi:
                return degree
        return HarmonyDegree.BAD


#: λ presets matching the two published operating points plus a null setting.
PRESET_LAMBDAS = {
    "telemelody": (1.2, 1.5, 1.0),
    "songmass": (1.5, 1.0, 1.0),
    "off": (0.0, 0.0, 0.0),
}


@dataclass(frozen=True)
class RewardConfig:
    lambda_tone: float = 1.2
    lambda_rhythm: float = 1.5
    lambda_structure: float = 1.0
    transition_rewards: dict[HarmonyDegree, float] = field(
        default_factory=lambda: {
            HarmonyDegree.EXCELLENT: 3.0,
            HarmonyDegree.GOOD: 2.0,
            HarmonyDegree.FAIR: 1.0,
            HarmonyDegree.BAD: 0.0,
        }
    )
    shape_reward_on_match: float = 1.0
    contour_reward_on_match: float = 1.0
    sw_reward_on_match: float = 1.0
    pause_reward_on_match: float = 1.0
    structure_reward_exact: float = 2.0
    structure_reward_octave: float = 1.0
    long_note_threshold: Fraction = Fraction(2)
    harmony_table: Optional[HarmonyTable] = None

    def __post_init__(self) -> None:
        for name in ("lambda_tone", "lambda_rhythm", "lambda_structure"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be non-negative")
        order = [
            HarmonyDegree.EXCELLENT,
            HarmonyDegree.GOOD,
            HarmonyDegree.FAIR,
            HarmonyDegree.BAD,
        ]
        values = [self.transition_rewards[d] for d in order]
        if any(a < b for a, b in zip(values, values[1:])):
            raise ConfigError("transition rewards must not increase from excellent to bad")
        if self.long_note_threshold <= 0:
            raise ConfigError("long_note_threshold must be positive")

    def lam(self, aspect: Aspect) -> float:
        return {
            Aspect.TONE: self.lambda_tone,
            Aspect.RHYTHM: self.lambda_rhythm,
            Aspect.STRUCTURE: self.lambda_structure,
        }[aspect]

    def with_lambdas(self, lambdas: tuple[float, float, float]) -> "RewardConfig":
        lt, lr, ls = lambdas
        return replace(self, lambda_tone=lt, lambda_rhythm=lr, lambda_structure=ls)

    def with_preset(self, name: str) -> "RewardConfig":
        if name not in PRESET_LAMBDAS:
            raise ConfigError(f"unknown lambda preset {name!r}, expected one of {sorted(PRESET_LAMBDAS)}")
        return self.with_lambdas(PRESET_LAMBDAS[name])


# ---------------------------------------------------------------------------
# sub-rewards
# ---------------------------------------------------------------------------


def _shape_matches(tone: Tone, pitches: Sequence[int]) -> Optional[bool]:
    first, last = pitches[0], pitches[-1]
    if tone is Tone.TONE1:
        return all(p == first for p in pitches)
    if tone is Tone.TONE2:
        return all(a <= b for a, b in zip(pitches, pitches[1:])) and last > first
    if tone is Tone.TONE4:
        return all(a >= b for a, b in zip(pitches, pitches[1:])) and last < first
    if tone is Tone.TONE3:
        if len(pitches) == 2:
            # two notes cannot dip; the tone's onset falls, so falling counts
            return last < first
        return any(p < first and p < last for p in pitches[1:-1])
    if tone is Tone.TONE5:
        return True
    return None


def pitch_shape_reward(
    tone: Tone, syllable_pitches: Sequence[int], config: RewardConfig
) -> Optional[float]:
    """Reward for a melisma whose pitch flow matches the tone's shape.

    Level tones stay flat, rising tones rise, falling tones fall, the
    dipping tone needs an interior low point (or falls, with only two
    notes); the light tone matches anything.  Returns None (not applicable)
    for single-note syllables and for non-tonal tones.
    """
    if len(syllable_pitches) < 2:
        return None
    matched = _shape_matches(tone, syllable_pitches)
    if matched is None:
        return None
    return config.shape_reward_on_match if matched else 0.0


def pitch_transition_reward(
    tone_pair: tuple[Tone, Tone],
    delta_p: int,
    table: Optional[HarmonyTable],
    config: RewardConfig,
) -> Optional[float]:
    """Reward for the pitch jump between two adjacent same-sentence syllables,
    graded by the harmony table.  None when the tone pair is outside the
    table's domain (stress-accent input, unmarked tones, no table at all)."""
    degree = table.degree_of(tone_pair[0], tone_pair[1], delta_p) if table else None
    if degree is None:
        return None
    return config.transition_rewards[degree]


def contour_matches(intonation: Intonation, first_pitch: int, last_pitch: int) -> bool:
    """Does a sentence's overall pitch direction agree with its intonation?"""
    if intonation is Intonation.RISING:
        return last_pitch > first_pitch
    if intonation is Intonation.FALLING:
        return last_pitch < first_pitch
    return True


def pitch_contour_reward(
    intonation: Intonation, first_pitch: int, last_pitch: int, config: RewardConfig
) -> float:
    """Reward when a sentence's overall pitch direction matches its intonation."""
    if contour_matches(intonation, first_pitch, last_pitch):
        return config.contour_reward_on_match
    return 0.0


def strong_weak_reward(
    stress_class: StressClass, strength: BeatStrength, config: RewardConfig
) -> Optional[float]:
    """Keyword-on-strong / auxiliary-on-weak reward at a word's first note.

    Neutral words are unconstrained: None, excluded from counts.
    """
    if stress_class is StressClass.NEUTRAL:
        return None
    matched = (stress_class is StressClass.KEYWORD) == (strength is BeatStrength.STRONG)
    return config.sw_reward_on_match if matched else 0.0


class BoundaryKind(Enum):
    WORD_INNER = "word_inner"
    WORD_BOUNDARY = "word_boundary"
    SENTENCE_BOUNDARY = "sentence_boundary"


def boundary_kind(lyrics: LyricSequence, k: int) -> BoundaryKind:
    """Kind of the gap in front of syllable ``k`` (k >= 1)."""
    left, right = lyrics.syllables[k - 1], lyrics.syllables[k]
    if left.sentence_index != right.sentence_index:
        return BoundaryKind.SENTENCE_BOUNDARY
    if right.word_position is WordPosition.WORD_START:
        return BoundaryKind.WORD_BOUNDARY
    return BoundaryKind.WORD_INNER


def pause_reward(has_pause: bool, kind: BoundaryKind, config: RewardConfig) -> float:
    """Reward pauses at split positions and penalize the two bad cases:
    a pause inside a word, and a sentence boundary without one."""
    if has_pause:
        matched = kind is not BoundaryKind.WORD_INNER
    else:
        matched = kind is not BoundaryKind.SENTENCE_BOUNDARY
    return config.pause_reward_on_match if matched else 0.0


def structure_reward(delta_p_i: int, delta_p_j: int, config: RewardConfig) -> float:
    """Reward a repeated position whose pitch interval echoes its anchor:
    full value for an equal interval, partial for an octave-shifted one."""
    if delta_p_i == delta_p_j:
        return config.structure_reward_exact
    if (delta_p_i - delta_p_j) % 12 == 0:
        return config.structure_reward_octave
    return 0.0


# ---------------------------------------------------------------------------
# event model
# ---------------------------------------------------------------------------

#: Canonical intra-token ordering of reward events.
_EVENT_RANK = {"shape": 0, "contour": 1, "transition": 2, "sw": 3, "pause": 4, "structure": 5}


@dataclass(frozen=True, slots=True)
class RewardEvent:
    """One triggered sub-reward: its aspect, unweighted value, and the value a
    perfectly matching candidate would have earned (used by hard masking)."""

    kind: str
    aspect: Aspect
    value: float
    maximum: float

    @property
    def is_maximal(self) -> bool:
        return self.value >= self.maximum


def event_maximum(kind: str, config: RewardConfig) -> float:
    return {
        "shape": config.shape_reward_on_match,
        "contour": config.contour_reward_on_match,
        "transition": config.transition_rewards[HarmonyDegree.EXCELLENT],
        "sw": config.sw_reward_on_match,
        "pause": config.pause_reward_on_match,
        "structure": config.structure_reward_exact,
    }[kind]


def _event(kind: str, aspect: Aspect, value: Optional[float], config: RewardConfig):
    if value is None:
        return None
    return RewardEvent(kind, aspect, value, event_maximum(kind, config))


def weighted_total(
    events: Iterable[RewardEvent], config: RewardConfig, active: frozenset[Aspect]
) -> float:
    total = 0.0
    for ev in events:
        if ev.aspect in active:
            total += config.lam(ev.aspect) * ev.value
    return total


def total_reward(
    events: Iterable[RewardEvent], config: RewardConfig, active: frozenset[Aspect] = ALL_ASPECTS
) -> float:
    """λ_t·R_t + λ_r·R_r + λ_s·R_s over the events triggered by one step,
    restricted to the active aspects."""
    return weighted_total(events, config, active)


# ---------------------------------------------------------------------------
# whole-pair scan
# ---------------------------------------------------------------------------


def _previous_note_pitch(melody: Melody, token_index: int) -> Optional[int]:
    for idx in range(token_index - 1, -1, -1):
        tok = melody.tokens[idx]
        if tok.is_note:
            return tok.pitch
    return None


def syllable_deltas(melody: Melody) -> list[Optional[int]]:
    """Per syllable, the jump from the previous note to the syllable's first
    note (None for the first note of the piece)."""
    deltas: list[Optional[int]] = []
    for start, _ in melody.alignment:
        prev = _previous_note_pitch(melody, start)
        deltas.append(None if prev is None else melody.tokens[start].pitch - prev)
    return deltas


def reward_events(
    lyrics: LyricSequence,
    melody: Melody,
    config: RewardConfig,
    structure: Optional[StructureMatrix] = None,
) -> list[tuple[Optional[int], RewardEvent]]:
    """Every reward event of a complete pair, tagged with the token index it
    fires on (None = fires when the melody ends).

    Derived from the alignment, beat grid and sentence spans only; events
    come back sorted by (token position, canonical event order), matching
    the decoder's incremental accumulation exactly.
    """
    if melody.syllable_count != len(lyrics):
        from .errors import AlignmentError

        raise AlignmentError(
            f"melody covers {melody.syllable_count} syllables, lyrics have {len(lyrics)}"
        )
    if structure is None:
        structure = build_structure_matrix(lyrics)
    grid = compute_beat_grid(melody)
    deltas = syllable_deltas(melody)
    tonal = lyrics.language is Language.TONAL
    n_tokens = len(melody.tokens)
    events: list[tuple[Optional[int], int, RewardEvent]] = []

    def add(anchor: Optional[int], ev: Optional[RewardEvent]) -> None:
        if ev is not None:
            events.append((anchor, _EVENT_RANK[ev.kind], ev))

    def closer_of(k: int) -> Optional[int]:
        stop = melody.alignment[k][1]
        return stop if stop < n_tokens else None

    # shape: fires where each multi-note span closes
    for k in range(len(lyrics)):
        pitches = melody.span_pitches(k)
        if len(pitches) >= 2:
            add(
                closer_of(k),
                _event(
                    "shape",
                    Aspect.TONE,
                    pitch_shape_reward(lyrics.syllables[k].tone, pitches, config),
                    config,
                ),
            )

    # contour: fires where the sentence-final syllable's span closes
    for sent in lyrics.sentences:
        pitches = [p for k in range(*sent.span) for p in melody.span_pitches(k)]
        add(
            closer_of(sent.span[1] - 1),
            _event(
                "contour",
                Aspect.TONE,
                pitch_contour_reward(sent.intonation, pitches[0], pitches[-1], config),
                config,
            ),
        )

    for k in range(len(lyrics)):
        first_idx = melody.alignment[k][0]
        syl = lyrics.syllables[k]

        # transition: adjacent same-sentence pair, first notes of each span
        if (
            tonal
            and k >= 1
            and lyrics.syllables[k - 1].sentence_index == syl.sentence_index
            and syl.tone in TONAL_TONES
            and lyrics.syllables[k - 1].tone in TONAL_TONES
        ):
            delta = melody.tokens[first_idx].pitch - melody.tokens[melody.alignment[k - 1][0]].pitch
            add(
                first_idx,
                _event(
                    "transition",
                    Aspect.TONE,
                    pitch_transition_reward(
                        (lyrics.syllables[k - 1].tone, syl.tone),
                        delta,
                        config.harmony_table,
                        config,
                    ),
                    config,
                ),
            )

        # strong/weak: first note of each constrained word
        if syl.word_position is WordPosition.WORD_START:
            add(
                first_idx,
                _event(
                    "sw",
                    Aspect.RHYTHM,
                    strong_weak_reward(syl.stress_class, grid.strengths[first_idx], config),
                    config,
                ),
            )

        # pause: one event per gap, on the gap's rest if any, else here
        if k >= 1:
            prev_stop = melody.alignment[k - 1][1]
            kind = boundary_kind(lyrics, k)
            gap_rest = prev_stop < first_idx and melody.tokens[prev_stop].kind is TokenKind.REST
            if gap_rest:
                add(prev_stop, _event("pause", Aspect.RHYTHM, pause_reward(True, kind, config), config))
            else:
                last_note = melody.tokens[prev_stop - 1]
                has_pause = is_long_note(last_note, config)
                add(first_idx, _event("pause", Aspect.RHYTHM, pause_reward(has_pause, kind, config), config))

        # structure: repeated position whose anchor interval is defined
        j = structure.partner.get(k)
        if j is not None and deltas[k] is not None and deltas[j] is not None:
            add(
                first_idx,
                _event(
                    "structure",
                    Aspect.STRUCTURE,
                    structure_reward(deltas[k], deltas[j], config),
                    config,
                ),
            )

    events.sort(key=lambda item: (n_tokens if item[0] is None else item[0], item[1]))
    return [(anchor, ev) for anchor, _, ev in events]


@dataclass(frozen=True)
class RewardSummary:
    total: float
    by_aspect: dict[Aspect, float]
    events: tuple[tuple[Optional[int], RewardEvent], ...]


def score_rewards(
    lyrics: LyricSequence,
    melody: Melody,
    config: RewardConfig,
    active: frozenset[Aspect] = ALL_ASPECTS,
    structure: Optional[StructureMatrix] = None,
) -> RewardSummary:
    """Weighted reward total of a complete pair, recomputed from scratch."""
    events = reward_events(lyrics, melody, config, structure)
    total = 0.0
    by_aspect = {a: 0.0 for a in Aspect}
    for _, ev in events:
        by_aspect[ev.aspect] += ev.value
        if ev.aspect in active:
            total += config.lam(ev.aspect) * ev.value
    return RewardSummary(total, by_aspect, tuple(events))


# ---------------------------------------------------------------------------
# configuration file
# ---------------------------------------------------------------------------

_DEGREE_BY_NAME = {d.value: d for d in HarmonyDegree}


def _table_from_dict(doc: dict) -> HarmonyTable:
    cells = {}
    for key, intervals in doc.items():
        try:
            prev_name, cur_name = key.split(",")
            pair = (Tone(prev_name), Tone(cur_name))
        except ValueError as exc:
            raise ConfigError(f"bad harmony table key {key!r}") from exc
        parsed = []
        for item in intervals:
            lo, hi, degree = item
            if degree not in _DEGREE_BY_NAME:
                raise ConfigError(f"unknown harmony degree {degree!r} in cell {key}")
            parsed.append((int(lo), int(hi), _DEGREE_BY_NAME[degree]))
        cells[pair] = tuple(parsed)
    return HarmonyTable(cells)


def _table_to_dict(table: HarmonyTable) -> dict:
    return {
        f"{prev.value},{cur.value}": [[lo, hi, degree.value] for lo, hi, degree in intervals]
        for (prev, cur), intervals in sorted(
            table.cells.items(), key=lambda item: (item[0][0].value, item[0][1].value)
        )
    }


def reward_config_from_dict(doc: dict) -> RewardConfig:
    try:
        lam = doc.get("lambda", {})
        rewards = doc.get("rewards", {})
        transition = rewards.get("transition", {})
        config = RewardConfig(
            lambda_tone=float(lam.get("tone", 1.2)),
            lambda_rhythm=float(lam.get("rhythm", 1.5)),
            lambda_structure=float(lam.get("structure", 1.0)),
            transition_rewards={
                HarmonyDegree.EXCELLENT: float(transition.get("excellent", 3.0)),
                HarmonyDegree.GOOD: float(transition.get("good", 2.0)),
                HarmonyDegree.FAIR: float(transition.get("fair", 1.0)),
                HarmonyDegree.BAD: float(transition.get("bad", 0.0)),
            },
            shape_reward_on_match=float(rewards.get("shape_match", 1.0)),
            contour_reward_on_match=float(rewards.get("contour_match", 1.0)),
            sw_reward_on_match=float(rewards.get("strong_weak_match", 1.0)),
            pause_reward_on_match=float(rewards.get("pause_match", 1.0)),
            structure_reward_exact=float(rewards.get("structure_exact", 2.0)),
            structure_reward_octave=float(rewards.get("structure_octave", 1.0)),
            long_note_threshold=Fraction(str(doc.get("long_note_threshold", "2"))),
            harmony_table=_table_from_dict(doc["harmony_table"]),
        )
    except ConfigError:
        raise
    except (KeyError, TypeError, ValueError, ArithmeticError) as exc:
        raise ConfigError(f"bad reward config: {exc}") from exc
    return config


def reward_config_to_dict(config: RewardConfig) -> dict:
    return {
        "lambda": {
            "tone": config.lambda_tone,
            "rhythm": config.lambda_rhythm,
            "structure": config.lambda_structure,
        },
        "rewards": {
            "transition": {d.value: config.transition_rewards[d] for d in HarmonyDegree},
            "shape_match": config.shape_reward_on_match,
            "contour_match": config.contour_reward_on_match,
            "strong_weak_match": config.sw_reward_on_match,
            "pause_match": config.pause_reward_on_match,
            "structure_exact": config.structure_reward_exact,
            "structure_octave": config.structure_reward_octave,
        },
        "long_note_threshold": str(config.long_note_threshold),
        "harmony_table": _table_to_dict(config.harmony_table),
    }


def load_reward_config(source: str) -> RewardConfig:
    """Parse a reward config JSON document (see data/default_rewards.json)."""
    try:
        doc = json.loads(source)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid reward config JSON: {exc}") from exc
    return reward_config_from_dict(doc)


def default_reward_config() -> RewardConfig:
    """The shipped default config: documented heuristic harmony table and the
    published λ operating point."""
    text = resources.files("lyricmelody.data").joinpath("default_rewards.json").read_text("utf-8")
    return load_reward_config(text)
