"""Reward-augmented decoding: beam search (soft/hard), top-k sampling,
re-ranking, and the rhythm-then-pitch two-stage pipeline.

The per-step score is the base model's log-probability plus the weighted
reward of everything the candidate token triggers.  Decoding walks a small
grammar over the scorer's vocabulary:

* a syllable-starting note is legal while syllables remain;
* a melisma continuation is legal while the current span is open and under
  the per-syllable note cap;
* a rest is legal after the first note and closes the open span (so two
  rests can never be adjacent);
* the end-of-melody symbol is legal once every syllable has started — an
  optional trailing rest may precede it.

Scores stay re-derivable: the base log-probability and the weighted reward
are accumulated separately, event by event, in exactly the order
:func:`lyricmelody.rewards.reward_events` replays them, so an independent
rescoring of the returned token sequence reproduces the reported score to
the last bit.  Ties break by vocabulary order, then by shorter sequence
(lexicographic comparison of token index sequences).

Hypothesis expansion is pure over immutable models; one decode owns its
hypotheses, and independent decodes may run concurrently.
"""

from __future__ import annotations

import math
import random
import warnings
from dataclasses import dataclass, replace
from enum import Enum
from fractions import Fraction
from typing import Optional, Sequence

from .errors import InternalError, OptionError
from .lyrics import (
    Language,
    LyricSequence,
    StructureMatrix,
    TONAL_TONES,
    WordPosition,
    build_structure_matrix,
)
from .melody import BeatStrength, Melody, MelodyToken, TokenKind, strong_offsets
from .rewards import (
    ALL_ASPECTS,
    Aspect,
    RewardConfig,
    RewardEvent,
    _event,
    boundary_kind,
    pause_reward,
    pitch_contour_reward,
    pitch_shape_reward,
    pitch_transition_reward,
    score_rewards,
    strong_weak_reward,
    structure_reward,
)
from .scorer import (
    END,
    Scorer,
    Vocabulary,
    melody_sequence,
    pitch_sequence,
    rhythm_sequence,
)

__all__ = [
    "DecodeMode",
    "Pipeline",
    "DecodeOptions",
    "DecodeResult",
    "Hypothesis",
    "RhythmSkeleton",
    "beam_search",
    "beam_search_hard",
    "sample",
    "rerank",
    "decode",
    "decode_two_stage",
    "score_decode",
    "score_two_stage",
    "is_masked",
]


class DecodeMode(Enum):
    BEAM_SOFT = "beam"
    BEAM_HARD = "beam-hard"
    SAMPLE = "sample"
    RERANK = "rerank"


class Pipeline(Enum):
    SINGLE_STAGE = "single"
    TWO_STAGE = "two-stage"


@dataclass(frozen=True)
class DecodeOptions:
    mode: DecodeMode = DecodeMode.BEAM_SOFT
    beam_width: int = 4
    top_k: int = 5
    temperature: float = 0.5
    rerank_candidates: int = 10
    pipeline: Pipeline = Pipeline.SINGLE_STAGE
    max_notes_per_syllable: int = 4
    seed: int = 0
    time_signature: tuple[int, int] = (4, 4)
    active: frozenset[Aspect] = ALL_ASPECTS

    def __post_init__(self) -> None:
        if self.beam_width < 1:
            raise OptionError(f"beam_width must be >= 1, got {self.beam_width}")
        if self.top_k < 1:
            raise OptionError(f"top_k must be >= 1, got {self.top_k}")
        if self.temperature <= 0:
            raise OptionError(f"temperature must be positive, got {self.temperature}")
        if self.rerank_candidates < 1:
            raise OptionError(f"rerank_candidates must be >= 1, got {self.rerank_candidates}")
        if self.max_notes_per_syllable < 1:
            raise OptionError("max_notes_per_syllable must be >= 1")


@dataclass(frozen=True)
class RhythmSkeleton:
    """Pitch-free template: per-syllable note durations (with melisma) and the
    rest, if any, trailing each syllable."""

    note_durations: tuple[tuple[Fraction, ...], ...]
    trailing_rests: tuple[Optional[Fraction], ...]

    def __post_init__(self) -> None:
        if any(not group for group in self.note_durations):
            raise InternalError("every syllable needs at least one note in the skeleton")
        if len(self.trailing_rests) != len(self.note_durations):
            raise InternalError("skeleton rest list out of step with syllables")

    @property
    def syllable_count(self) -> int:
        return len(self.note_durations)

    @classmethod
    def from_rhythm_tokens(cls, tokens: Sequence[tuple]) -> "RhythmSkeleton":
        groups: list[list[Fraction]] = []
        rests: list[Optional[Fraction]] = []
        for tok in tokens:
            if tok[0] == "rest":
                if not groups or rests[-1] is not None:
                    raise InternalError("skeleton rest without a preceding syllable")
                rests[-1] = tok[1]
            elif tok[2]:
                groups.append([tok[1]])
                rests.append(None)
            else:
                if not groups or rests[-1] is not None:
                    raise InternalError("skeleton continuation without an open syllable")
                groups[-1].append(tok[1])
        return cls(tuple(tuple(g) for g in groups), tuple(rests))

    def rhythm_tokens(self) -> list[tuple]:
        out: list[tuple] = []
        for group, trailing in zip(self.note_durations, self.trailing_rests):
            out.append(("note", group[0], True))
            out.extend(("note", d, False) for d in group[1:])
            if trailing is not None:
                out.append(("rest", trailing))
        return out


# ---------------------------------------------------------------------------
# decode state machine
# ---------------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class _State:
    onset: Fraction = Fraction(0)
    syl: int = -1
    span_open: bool = False
    span_pitches: tuple = ()
    span_len: int = 0
    last_pitch: Optional[int] = None
    last_duration: Optional[Fraction] = None
    syl_first: tuple = ()
    syl_delta: tuple = ()
    sent_first: Optional[int] = None
    sent_last: Optional[int] = None


class _Context:
    """Static per-decode data: lyric signals, structure partners, meter."""

    def __init__(
        self,
        lyrics: LyricSequence,
        config: RewardConfig,
        options: DecodeOptions,
        active: frozenset[Aspect],
        structure: Optional[StructureMatrix] = None,
    ):
        self.lyrics = lyrics
        self.config = config
        self.options = options
        self.active = active
        self.n = len(lyrics)
        self.structure = structure if structure is not None else build_structure_matrix(lyrics)
        self.partner = dict(self.structure.partner)
        num, den = options.time_signature
        self.bar = Fraction(num) * Fraction(4, den)
        self.strong = strong_offsets(options.time_signature)
        tonal = lyrics.language is Language.TONAL
        syls = lyrics.syllables
        self.tone = [s.tone for s in syls]
        self.sentence_final = [s.sentence_final for s in syls]
        self.intonation = [lyrics.sentence_of(k).intonation for k in range(self.n)]
        self.word_start = [s.word_position is WordPosition.WORD_START for s in syls]
        self.stress = [s.stress_class for s in syls]
        self.new_sentence = [
            k == 0 or syls[k].sentence_index != syls[k - 1].sentence_index for k in range(self.n)
        ]
        self.boundary = [None] + [boundary_kind(lyrics, k) for k in range(1, self.n)]
        self.tone_pair_ok = [
            tonal
            and k >= 1
            and not self.new_sentence[k]
            and syls[k].tone in TONAL_TONES
            and syls[k - 1].tone in TONAL_TONES
            for k in range(self.n)
        ]

    def strength_at(self, onset: Fraction) -> BeatStrength:
        return BeatStrength.STRONG if onset % self.bar in self.strong else BeatStrength.WEAK

    # -- events ------------------------------------------------------------

    def _close_events(self, st: _State) -> list[RewardEvent]:
        if st.syl < 0 or not st.span_open or Aspect.TONE not in self.active:
            return []
        events = []
        if st.span_len >= 2:
            ev = _event(
                "shape",
                Aspect.TONE,
                pitch_shape_reward(self.tone[st.syl], st.span_pitches, self.config),
                self.config,
            )
            if ev is not None:
                events.append(ev)
        if self.sentence_final[st.syl]:
            events.append(
                _event(
                    "contour",
                    Aspect.TONE,
                    pitch_contour_reward(
                        self.intonation[st.syl], st.sent_first, st.sent_last, self.config
                    ),
                    self.config,
                )
            )
        return events

    def step_events(self, st: _State, token, domain: str) -> list[RewardEvent]:
        """Reward events the candidate token triggers, in canonical order."""
        config, active = self.config, self.active
        if token == END:
            return self._close_events(st)
        is_note, pitch, _duration, starts = _token_view(token, domain)
        if not is_note:
            events = self._close_events(st)
            gap_right = st.syl + 1
            if Aspect.RHYTHM in active and gap_right < self.n:
                events.append(
                    _event(
                        "pause",
                        Aspect.RHYTHM,
                        pause_reward(True, self.boundary[gap_right], config),
                        config,
                    )
                )
            return events
        if not starts:
            return []

        events = self._close_events(st)
        k = st.syl + 1
        if Aspect.TONE in active and self.tone_pair_ok[k]:
            ev = _event(
                "transition",
                Aspect.TONE,
                pitch_transition_reward(
                    (self.tone[k - 1], self.tone[k]),
                    pitch - st.syl_first[k - 1],
                    config.harmony_table,
                    config,
                ),
                config,
            )
            if ev is not None:
                events.append(ev)
        if Aspect.RHYTHM in active and self.word_start[k]:
            ev = _event(
                "sw",
                Aspect.RHYTHM,
                strong_weak_reward(self.stress[k], self.strength_at(st.onset), config),
                config,
            )
            if ev is not None:
                events.append(ev)
        if Aspect.RHYTHM in active and k >= 1 and st.span_open:
            # no rest resolved this gap; a long final note still pauses
            has_pause = st.last_duration is not None and st.last_duration >= config.long_note_threshold
            events.append(
                _event(
                    "pause",
                    Aspect.RHYTHM,
                    pause_reward(has_pause, self.boundary[k], config),
                    config,
                )
            )
        if Aspect.STRUCTURE in active:
            j = self.partner.get(k)
            if j is not None and st.last_pitch is not None and st.syl_delta[j] is not None:
                events.append(
                    _event(
                        "structure",
                        Aspect.STRUCTURE,
                        structure_reward(pitch - st.last_pitch, st.syl_delta[j], config),
                        config,
                    )
                )
        return events

    # -- transitions ---------------------------------------------------------

    def apply(self, st: _State, token, domain: str) -> _State:
        is_note, pitch, duration, starts = _token_view(token, domain)
        if not is_note:
            return replace(st, onset=st.onset + duration, span_open=False)
        if starts:
            k = st.syl + 1
            delta = None if st.last_pitch is None or pitch is None else pitch - st.last_pitch
            return _State(
                onset=st.onset + duration,
                syl=k,
                span_open=True,
                span_pitches=(pitch,),
                span_len=1,
                last_pitch=pitch,
                last_duration=duration,
                syl_first=st.syl_first + (pitch,),
                syl_delta=st.syl_delta + (delta,),
                sent_first=pitch if self.new_sentence[k] else st.sent_first,
                sent_last=pitch,
            )
        return replace(
            st,
            onset=st.onset + duration,
            span_pitches=st.span_pitches + (pitch,),
            span_len=st.span_len + 1,
            last_pitch=pitch,
            last_duration=duration,
            sent_last=pitch,
        )

    def legal(self, st: _State, groups: "_VocabGroups") -> list[tuple[int, object]]:
        out: list[tuple[int, object]] = []
        if st.syl + 1 < self.n:
            out.extend(groups.starts)
        if st.syl >= 0 and st.span_open and st.span_len < self.options.max_notes_per_syllable:
            out.extend(groups.continuations)
        if st.syl >= 0 and st.span_open:
            out.extend(groups.rests)
        if st.syl == self.n - 1:
            out.append(groups.end)
        return out


def _token_view(token, domain: str) -> tuple[bool, Optional[int], Fraction, bool]:
    """(is_note, pitch, duration, starts_syllable) for either token domain."""
    if domain == "melody":
        if token.kind is TokenKind.REST:
            return (False, None, token.duration, False)
        return (True, token.pitch, token.duration, token.syllable_start)
    if token[0] == "rest":
        return (False, None, token[1], False)
    return (True, None, token[1], token[2])


@dataclass(frozen=True)
class _VocabGroups:
    starts: tuple[tuple[int, object], ...]
    continuations: tuple[tuple[int, object], ...]
    rests: tuple[tuple[int, object], ...]
    end: tuple[int, object]


def _group_vocab(vocab: Vocabulary, domain: str) -> _VocabGroups:
    starts, continuations, rests = [], [], []
    end = None
    for idx, token in enumerate(vocab.tokens):
        if token == END:
            end = (idx, token)
            continue
        is_note, _, _, starts_syllable = _token_view(token, domain)
        if not is_note:
            rests.append((idx, token))
        elif starts_syllable:
            starts.append((idx, token))
        else:
            continuations.append((idx, token))
    return _VocabGroups(tuple(starts), tuple(continuations), tuple(rests), end)


@dataclass(frozen=True, slots=True)
class Hypothesis:
    """A partial decode: token prefix, its state, and split score accumulators.

    ``score`` is always base + reward; both parts are re-derivable from the
    token sequence.
    """

    tokens: tuple
    key: tuple[int, ...]
    state: _State
    base: float = 0.0
    reward: float = 0.0

    @property
    def score(self) -> float:
        return self.base + self.reward


def _extend(h: Hypothesis, idx, token, lp: float, events, ctx: _Context, domain: str) -> Hypothesis:
    reward = h.reward
    for ev in events:
        if ev.aspect in ctx.active:
            reward += ctx.config.lam(ev.aspect) * ev.value
    return Hypothesis(
        tokens=h.tokens + (token,),
        key=h.key if token == END else h.key + (idx,),
        state=h.state if token == END else ctx.apply(h.state, token, domain),
        base=h.base + lp,
        reward=reward,
    )


def is_masked(events: Sequence[RewardEvent], active: frozenset[Aspect]) -> bool:
    """Hard-constraint rule: any triggered active sub-reward below its maximum
    disqualifies the candidate."""
    return any(ev.aspect in active and not ev.is_maximal for ev in events)


@dataclass(frozen=True)
class DecodeResult:
    melody: Melody
    score: float
    base_logprob: float
    reward_total: float
    mode: DecodeMode
    pipeline: Pipeline = Pipeline.SINGLE_STAGE
    relaxation_steps: tuple[int, ...] = ()
    stage_scores: Optional[dict] = None


def _hyp_sort_key(h: Hypothesis):
    return (-h.score, h.key)


def _completed_better(a: Hypothesis, b: Optional[Hypothesis]) -> bool:
    if b is None:
        return True
    return (-a.score, a.key) < (-b.score, b.key)


def _max_steps(ctx: _Context) -> int:
    return ctx.n * (ctx.options.max_notes_per_syllable + 1) + 2


def _beam(
    ctx: _Context,
    scorer: Scorer,
    domain: str,
    width: int,
    hard: bool,
) -> tuple[Hypothesis, tuple[int, ...]]:
    groups = _group_vocab(scorer.vocab, domain)
    live = [Hypothesis(tokens=(), key=(), state=_State())]
    best: Optional[Hypothesis] = None
    relaxations: list[int] = []
    for step in range(_max_steps(ctx)):
        pool: list[tuple[Hypothesis, list[RewardEvent]]] = []
        for h in live:
            dist = scorer.log_prob_dist(h.tokens)
            for idx, token in ctx.legal(h.state, groups):
                events = ctx.step_events(h.state, token, domain)
                if token == END:
                    done = _extend(h, idx, token, dist[END], events, ctx, domain)
                    if _completed_better(done, best):
                        best = done
                else:
                    pool.append((_extend(h, idx, token, dist[token], events, ctx, domain), events))
        if hard and pool:
            survivors = [item for item in pool if not is_masked(item[1], ctx.active)]
            if not survivors:
                relaxations.append(step)
                survivors = pool
            pool = survivors
        if not pool:
            break
        pool.sort(key=lambda item: _hyp_sort_key(item[0]))
        live = [h for h, _ in pool[:width]]
    else:
        raise InternalError("beam search exceeded the grammar's step bound")
    if best is None:
        raise InternalError("beam search finished without a complete hypothesis")
    return best, tuple(relaxations)


def _result_from(
    ctx: _Context, h: Hypothesis, mode: DecodeMode, relaxations: tuple[int, ...] = ()
) -> DecodeResult:
    tokens = tuple(t for t in h.tokens if t != END)
    melody = Melody(tokens, ctx.options.time_signature)
    if melody.syllable_count != ctx.n:
        raise InternalError(
            f"decoded melody covers {melody.syllable_count} syllables, expected {ctx.n}"
        )
    return DecodeResult(
        melody=melody,
        score=h.score,
        base_logprob=h.base,
        reward_total=h.reward,
        mode=mode,
        relaxation_steps=relaxations,
    )


def beam_search(
    lyrics: LyricSequence,
    scorer: Scorer,
    config: RewardConfig,
    options: DecodeOptions,
    structure: Optional[StructureMatrix] = None,
) -> DecodeResult:
    """Constrained beam search keeping ``beam_width`` hypotheses ranked by the
    combined score; deterministic, returns the best completed hypothesis."""
    ctx = _Context(lyrics, config, options, options.active, structure)
    best, _ = _beam(ctx, scorer, "melody", options.beam_width, hard=False)
    return _result_from(ctx, best, DecodeMode.BEAM_SOFT)


def beam_search_hard(
    lyrics: LyricSequence,
    scorer: Scorer,
    config: RewardConfig,
    options: DecodeOptions,
    structure: Optional[StructureMatrix] = None,
) -> DecodeResult:
    """Beam search that masks out candidates violating any triggered active
    constraint; steps where everything is masked fall back to soft scoring
    and are recorded as relaxation events."""
    ctx = _Context(lyrics, config, options, options.active, structure)
    best, relaxations = _beam(ctx, scorer, "melody", options.beam_width, hard=True)
    return _result_from(ctx, best, DecodeMode.BEAM_HARD, relaxations)


def _sample_run(ctx: _Context, scorer: Scorer, rng: random.Random, top_k: int) -> Hypothesis:
    groups = _group_vocab(scorer.vocab, "melody")
    if top_k > len(scorer.vocab):
        warnings.warn(
            f"top_k={top_k} exceeds the vocabulary size {len(scorer.vocab)}; clamping",
            stacklevel=3,
        )
        top_k = len(scorer.vocab)
    h = Hypothesis(tokens=(), key=(), state=_State())
    temperature = ctx.options.temperature
    for _ in range(_max_steps(ctx)):
        dist = scorer.log_prob_dist(h.tokens)
        candidates = []
        for idx, token in ctx.legal(h.state, groups):
            events = ctx.step_events(h.state, token, "melody")
            candidates.append((_extend(h, idx, token, dist[token], events, ctx, "melody"), token))
        candidates.sort(key=lambda item: _hyp_sort_key(item[0]))
        kept = candidates[:top_k]
        top = max(cand.score for cand, _ in kept)
        weights = [math.exp((cand.score - top) / temperature) for cand, _ in kept]
        total = sum(weights)
        draw = rng.random() * total
        cumulative = 0.0
        chosen, chosen_tok = kept[-1]
        for (cand, token), w in zip(kept, weights):
            cumulative += w
            if draw < cumulative:
                chosen, chosen_tok = cand, token
                break
        h = chosen
        if chosen_tok == END:
            return h
    raise InternalError("sampling exceeded the grammar's step bound")


def sample(
    lyrics: LyricSequence,
    scorer: Scorer,
    config: RewardConfig,
    options: DecodeOptions,
    structure: Optional[StructureMatrix] = None,
) -> DecodeResult:
    """Constrained stochastic decoding: per step, keep the top-k candidates by
    combined score, soften them with the temperature, and draw from the
    seeded generator.  Reproducible per seed."""
    ctx = _Context(lyrics, config, options, options.active, structure)
    rng = random.Random(options.seed)
    h = _sample_run(ctx, scorer, rng, options.top_k)
    return _result_from(ctx, h, DecodeMode.SAMPLE)


def rerank(
    lyrics: LyricSequence,
    scorer: Scorer,
    config: RewardConfig,
    options: DecodeOptions,
    structure: Optional[StructureMatrix] = None,
) -> DecodeResult:
    """Unconstrained sampling of ``rerank_candidates`` melodies, then pick the
    one whose full-sequence combined score (base + weighted rewards) wins."""
    free_ctx = _Context(lyrics, config, options, frozenset(), structure)
    scored_ctx = _Context(lyrics, config, options, options.active, structure)
    rng = random.Random(options.seed)
    best: Optional[Hypothesis] = None
    for _ in range(options.rerank_candidates):
        h = _sample_run(free_ctx, scorer, rng, options.top_k)
        rewarded = Hypothesis(
            tokens=h.tokens,
            key=h.key,
            state=h.state,
            base=h.base,
            reward=_full_reward(scored_ctx, h.tokens),
        )
        if _completed_better(rewarded, best):
            best = rewarded
    return _result_from(scored_ctx, best, DecodeMode.RERANK)


def _full_reward(ctx: _Context, tokens: tuple) -> float:
    melody = Melody(tuple(t for t in tokens if t != END), ctx.options.time_signature)
    summary = score_rewards(ctx.lyrics, melody, ctx.config, ctx.active, ctx.structure)
    return summary.total


def decode(
    lyrics: LyricSequence,
    scorer: Scorer,
    config: RewardConfig,
    options: DecodeOptions,
    structure: Optional[StructureMatrix] = None,
    rhythm_scorer: Optional[Scorer] = None,
    pitch_scorer: Optional[Scorer] = None,
) -> DecodeResult:
    """Dispatch on mode/pipeline."""
    if options.pipeline is Pipeline.TWO_STAGE:
        if rhythm_scorer is None or pitch_scorer is None:
            raise OptionError("two-stage decoding needs rhythm and pitch scorers")
        return decode_two_stage(lyrics, rhythm_scorer, pitch_scorer, config, options, structure)
    dispatch = {
        DecodeMode.BEAM_SOFT: beam_search,
        DecodeMode.BEAM_HARD: beam_search_hard,
        DecodeMode.SAMPLE: sample,
        DecodeMode.RERANK: rerank,
    }
    return dispatch[options.mode](lyrics, scorer, config, options, structure)


# ---------------------------------------------------------------------------
# two-stage pipeline
# ---------------------------------------------------------------------------


def decode_two_stage(
    lyrics: LyricSequence,
    rhythm_scorer: Scorer,
    pitch_scorer: Scorer,
    config: RewardConfig,
    options: DecodeOptions,
    structure: Optional[StructureMatrix] = None,
) -> DecodeResult:
    """Beam-decode a rhythm skeleton under the rhythm rewards only, then
    beam-decode pitches onto the frozen skeleton under tone + structure
    rewards.  Durations, rests and melisma grouping never change in stage 2.
    """
    rhythm_active = frozenset({Aspect.RHYTHM}) & options.active
    stage1_ctx = _Context(lyrics, config, options, rhythm_active, structure)
    stage1, _ = _beam(stage1_ctx, rhythm_scorer, "rhythm", options.beam_width, hard=False)
    skeleton = RhythmSkeleton.from_rhythm_tokens([t for t in stage1.tokens if t != END])
    if skeleton.syllable_count != len(lyrics):
        raise InternalError(
            f"skeleton covers {skeleton.syllable_count} syllables, lyrics have {len(lyrics)}"
        )

    pitch_active = frozenset({Aspect.TONE, Aspect.STRUCTURE}) & options.active
    stage2_ctx = _Context(lyrics, config, options, pitch_active, structure)
    stage2 = _pitch_fill(stage2_ctx, pitch_scorer, skeleton, options.beam_width)

    melody = Melody(tuple(t for t in stage2.tokens if t != END), options.time_signature)
    if melody.syllable_count != len(lyrics):
        raise InternalError("assembled melody does not cover the lyrics")
    return DecodeResult(
        melody=melody,
        score=stage1.score + stage2.score,
        base_logprob=stage1.base + stage2.base,
        reward_total=stage1.reward + stage2.reward,
        mode=options.mode,
        pipeline=Pipeline.TWO_STAGE,
        stage_scores={
            "rhythm": {"base": stage1.base, "reward": stage1.reward, "score": stage1.score},
            "pitch": {"base": stage2.base, "reward": stage2.reward, "score": stage2.score},
        },
    )


def _pitch_fill(
    ctx: _Context, pitch_scorer: Scorer, skeleton: RhythmSkeleton, width: int
) -> Hypothesis:
    """Beam over pitch choices for each note slot of the skeleton; rests and
    the final END are forced and only shift probability mass."""
    from .scorer import REST_MARK

    pitches = [t for t in pitch_scorer.vocab.tokens if isinstance(t, int)]
    pitch_index = {p: pitch_scorer.vocab.index_of(p) for p in pitches}
    slots = skeleton.rhythm_tokens()
    live = [Hypothesis(tokens=(), key=(), state=_State())]
    for slot in slots:
        if slot[0] == "rest":
            advanced = []
            for h in live:
                dist = pitch_scorer.log_prob_dist(_pitch_context(h.tokens))
                token = MelodyToken(TokenKind.REST, slot[1])
                events = ctx.step_events(h.state, token, "melody")
                advanced.append(
                    _extend(h, pitch_scorer.vocab.index_of(REST_MARK), token, dist[REST_MARK], events, ctx, "melody")
                )
            live = advanced
            continue
        pool = []
        for h in live:
            dist = pitch_scorer.log_prob_dist(_pitch_context(h.tokens))
            for pitch in pitches:
                token = MelodyToken(TokenKind.NOTE, slot[1], pitch, slot[2])
                events = ctx.step_events(h.state, token, "melody")
                pool.append(_extend(h, pitch_index[pitch], token, dist[pitch], events, ctx, "melody"))
        pool.sort(key=_hyp_sort_key)
        live = pool[:width]
    best: Optional[Hypothesis] = None
    end_idx = pitch_scorer.vocab.index_of(END)
    for h in live:
        dist = pitch_scorer.log_prob_dist(_pitch_context(h.tokens))
        events = ctx.step_events(h.state, END, "melody")
        done = _extend(h, end_idx, END, dist[END], events, ctx, "melody")
        if _completed_better(done, best):
            best = done
    return best


def _pitch_context(tokens: tuple) -> tuple:
    from .scorer import REST_MARK

    return tuple(REST_MARK if t.kind is TokenKind.REST else t.pitch for t in tokens)


# ---------------------------------------------------------------------------
# from-scratch rescoring
# ---------------------------------------------------------------------------


def score_decode(
    lyrics: LyricSequence,
    melody: Melody,
    scorer: Scorer,
    config: RewardConfig,
    active: frozenset[Aspect] = ALL_ASPECTS,
    structure: Optional[StructureMatrix] = None,
) -> tuple[float, float, float]:
    """(base log-prob, weighted reward, combined score) of an existing melody,
    recomputed from the token sequence alone."""
    sequence = melody_sequence(melody)
    base = 0.0
    for i, token in enumerate(sequence):
        base += scorer.log_prob_dist(sequence[:i])[token]
    reward = score_rewards(lyrics, melody, config, active, structure).total
    return base, reward, base + reward


def score_two_stage(
    lyrics: LyricSequence,
    melody: Melody,
    rhythm_scorer: Scorer,
    pitch_scorer: Scorer,
    config: RewardConfig,
    active: frozenset[Aspect] = ALL_ASPECTS,
    structure: Optional[StructureMatrix] = None,
) -> tuple[float, float, float]:
    """Two-stage counterpart of :func:`score_decode`: rhythm model + rhythm
    rewards plus pitch model + tone/structure rewards."""
    rhythm_seq = rhythm_sequence(melody)
    base = 0.0
    for i, token in enumerate(rhythm_seq):
        base += rhythm_scorer.log_prob_dist(rhythm_seq[:i])[token]
    pitch_seq = pitch_sequence(melody)
    pitch_base = 0.0
    for i, token in enumerate(pitch_seq):
        pitch_base += pitch_scorer.log_prob_dist(pitch_seq[:i])[token]
    rhythm_reward = score_rewards(
        lyrics, melody, config, frozenset({Aspect.RHYTHM}) & active, structure
    ).total
    pitch_reward = score_rewards(
        lyrics, melody, config, frozenset({Aspect.TONE, Aspect.STRUCTURE}) & active, structure
    ).total
    total_base = base + pitch_base
    total_reward = rhythm_reward + pitch_reward
    return total_base, total_reward, total_base + total_reward
