"""Base melody scorers: a trainable n-gram language model and a uniform model.

The decoder only ever asks one question — "given this token context, what is
the log-probability of each vocabulary token?" — so anything implementing
``log_prob_dist`` can drive it.  The shipped models are lyric-agnostic pure
melody language models; every lyric signal enters through the rewards.

Three token domains share the same machinery:

* melody tokens — the full (pitch, duration, syllable flag) alphabet;
* rhythm tokens — the pitch-free projection, for rhythm-first decoding;
* pitch tokens — pitches plus a rest marker, for pitch-onto-skeleton decoding.

Every sequence is trained and scored with a terminal end-of-melody symbol so
stopping has a probability like everything else.

Smoothing is interpolated absolute discounting: a fixed discount ``d`` is
subtracted from every observed count and the freed mass backs off to the
next shorter context, grounding in the empirical unigram distribution mixed
with a uniform prior over the vocabulary.  Models are immutable once
trained; scoring from concurrent decodes is safe.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Protocol, Sequence, Union

from .errors import TrainingError
from .melody import Melody, MelodyToken, TokenKind

__all__ = [
    "END",
    "REST_MARK",
    "Vocabulary",
    "Scorer",
    "UniformScorer",
    "NGramModel",
    "ModelBundle",
    "build_melody_vocabulary",
    "vocabulary_from_corpus",
    "rhythm_projection",
    "pitch_projection",
    "melody_sequence",
    "rhythm_sequence",
    "pitch_sequence",
    "train_ngram",
    "train_model_bundle",
]

#: Terminal symbol appended to every training sequence.
END = "<end>"

#: Rest marker inside pitch-token sequences.
REST_MARK = "R"

Token = Union[MelodyToken, tuple, int, str]


def _encode_duration(d: Fraction) -> str:
    return str(d)


def _encode(kind: str, token: Token) -> str:
    if token == END:
        return END
    if kind == "melody":
        if token.kind is TokenKind.REST:
            return f"R:{_encode_duration(token.duration)}"
        flag = "S" if token.syllable_start else "C"
        return f"N:{token.pitch}:{_encode_duration(token.duration)}:{flag}"
    if kind == "rhythm":
        if token[0] == "rest":
            return f"R:{_encode_duration(token[1])}"
        return f"N:{_encode_duration(token[1])}:{'S' if token[2] else 'C'}"
    if kind == "pitch":
        return REST_MARK if token == REST_MARK else str(token)
    raise ValueError(f"unknown vocabulary kind {kind!r}")


def _decode(kind: str, text: str) -> Token:
    if text == END:
        return END
    if kind == "melody":
        parts = text.split(":")
        if parts[0] == "R":
            return MelodyToken(TokenKind.REST, Fraction(parts[1]))
        return MelodyToken(TokenKind.NOTE, Fraction(parts[2]), int(parts[1]), parts[3] == "S")
    if kind == "rhythm":
        parts = text.split(":")
        if parts[0] == "R":
            return ("rest", Fraction(parts[1]))
        return ("note", Fraction(parts[1]), parts[2] == "S")
    if kind == "pitch":
        return REST_MARK if text == REST_MARK else int(text)
    raise ValueError(f"unknown vocabulary kind {kind!r}")


def _sort_key(kind: str, token: Token):
    if token == END:
        return (9,)
    if kind == "melody":
        if token.kind is TokenKind.NOTE:
            return (0, token.pitch, token.duration, not token.syllable_start)
        return (1, token.duration)
    if kind == "rhythm":
        if token[0] == "note":
            return (0, token[1], not token[2])
        return (1, token[1])
    if kind == "pitch":
        return (1,) if token == REST_MARK else (0, token)
    raise ValueError(f"unknown vocabulary kind {kind!r}")


@dataclass(frozen=True)
class Vocabulary:
    """Finite, deterministically ordered token alphabet (END always last)."""

    kind: str
    tokens: tuple[Token, ...]

    def __post_init__(self) -> None:
        if not self.tokens or self.tokens[-1] != END:
            raise ValueError("vocabulary must end with the end-of-melody symbol")
        object.__setattr__(self, "_index", {t: i for i, t in enumerate(self.tokens)})
        if len(getattr(self, "_index")) != len(self.tokens):
            raise ValueError("vocabulary contains duplicate tokens")

    def __len__(self) -> int:
        return len(self.tokens)

    def __contains__(self, token: Token) -> bool:
        return token in getattr(self, "_index")

    def index_of(self, token: Token) -> int:
        return getattr(self, "_index")[token]

    def encode(self, token: Token) -> str:
        return _encode(self.kind, token)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "tokens": [self.encode(t) for t in self.tokens]}

    @classmethod
    def from_dict(cls, doc: dict) -> "Vocabulary":
        kind = doc["kind"]
        return cls(kind, tuple(_decode(kind, t) for t in doc["tokens"]))

    @classmethod
    def build(cls, kind: str, tokens: Iterable[Token]) -> "Vocabulary":
        ordered = sorted(set(tokens), key=lambda t: _sort_key(kind, t))
        return cls(kind, tuple(ordered) + (END,))


def build_melody_vocabulary(
    pitch_range: tuple[int, int], durations: Sequence
) -> Vocabulary:
    """All note/rest tokens over a pitch range and a finite duration set."""
    lo, hi = pitch_range
    if lo > hi or not 0 <= lo <= 127 or not 0 <= hi <= 127:
        raise ValueError(f"bad pitch range {pitch_range}")
    durs = sorted({Fraction(d) for d in durations})
    if not durs or durs[0] <= 0:
        raise ValueError("durations must be a non-empty set of positive rationals")
    tokens: list[Token] = []
    for pitch in range(lo, hi + 1):
        for dur in durs:
            tokens.append(MelodyToken(TokenKind.NOTE, dur, pitch, True))
            tokens.append(MelodyToken(TokenKind.NOTE, dur, pitch, False))
    tokens.extend(MelodyToken(TokenKind.REST, dur) for dur in durs)
    return Vocabulary.build("melody", tokens)


def rhythm_projection(token: MelodyToken) -> tuple:
    if token.kind is TokenKind.REST:
        return ("rest", token.duration)
    return ("note", token.duration, token.syllable_start)


def pitch_projection(token: MelodyToken) -> Token:
    return REST_MARK if token.kind is TokenKind.REST else token.pitch


def melody_sequence(melody: Melody) -> tuple[Token, ...]:
    return tuple(melody.tokens) + (END,)


def rhythm_sequence(melody: Melody) -> tuple[Token, ...]:
    return tuple(rhythm_projection(t) for t in melody.tokens) + (END,)


def pitch_sequence(melody: Melody) -> tuple[Token, ...]:
    return tuple(pitch_projection(t) for t in melody.tokens) + (END,)


def vocabulary_from_corpus(melodies: Sequence[Melody]) -> Vocabulary:
    """Melody vocabulary spanning the corpus: full pitch range x duration set,
    both syllable flags, rests for every duration."""
    pitches = [t.pitch for m in melodies for t in m.tokens if t.is_note]
    durations = {t.duration for m in melodies for t in m.tokens}
    if not pitches:
        raise TrainingError("corpus contains no notes")
    return build_melody_vocabulary((min(pitches), max(pitches)), sorted(durations))


class Scorer(Protocol):
    """Anything that maps a token context to a log-probability table."""

    vocab: Vocabulary

    def log_prob_dist(self, context: Sequence[Token]) -> dict[Token, float]: ...


@dataclass(frozen=True)
class UniformScorer:
    """Flat distribution; useful as a null model and in enumerable tests."""

    vocab: Vocabulary

    def log_prob_dist(self, context: Sequence[Token]) -> dict[Token, float]:
        lp = -math.log(len(self.vocab))
        return {t: lp for t in self.vocab.tokens}


class NGramModel:
    """Order-N model with interpolated absolute-discount backoff.

    P(t | ctx) = max(c(ctx,t) - d, 0)/c(ctx) + d*distinct(ctx)/c(ctx) * P(t | ctx[1:]),
    grounding at unigrams interpolated with 1/|V|.  Unseen contexts back off
    with all their mass.
    """

    def __init__(
        self,
        order: int,
        discount: float,
        vocab: Vocabulary,
        counts: dict[tuple, dict[Token, int]],
    ):
        if order < 1:
            raise TrainingError(f"order must be >= 1, got {order}")
        if not 0 < discount < 1:
            raise TrainingError(f"discount must lie in (0, 1), got {discount}")
        self.order = order
        self.discount = discount
        self.vocab = vocab
        self.counts = counts
        self.totals = {ctx: sum(succ.values()) for ctx, succ in counts.items()}
        self._dist_cache: dict[tuple, dict[Token, float]] = {}

    @classmethod
    def train(
        cls,
        sequences: Sequence[Sequence[Token]],
        order: int,
        discount: float,
        vocab: Vocabulary,
    ) -> "NGramModel":
        if not sequences:
            raise TrainingError("training corpus is empty")
        counts: dict[tuple, dict[Token, int]] = {}
        for seq in sequences:
            for token in seq:
                if token not in vocab:
                    raise TrainingError(f"out-of-vocabulary token {vocab.encode(token)!r}")
            for i, token in enumerate(seq):
                for ctx_len in range(min(i, order - 1) + 1):
                    ctx = tuple(seq[i - ctx_len : i])
                    counts.setdefault(ctx, {})
                    counts[ctx][token] = counts[ctx].get(token, 0) + 1
        return cls(order, discount, vocab, counts)

    def prob(self, token: Token, context: Sequence[Token]) -> float:
        ctx = tuple(context[-(self.order - 1) :]) if self.order > 1 else ()
        return self._prob(token, ctx)

    def _prob(self, token: Token, ctx: tuple) -> float:
        if ctx not in self.counts:
            if ctx:
                return self._prob(token, ctx[1:])
            # empty corpus cannot happen post-training; uniform for safety
            return 1.0 / len(self.vocab)
        total = self.totals[ctx]
        succ = self.counts[ctx]
        kept = max(succ.get(token, 0) - self.discount, 0.0) / total
        backoff_mass = self.discount * len(succ) / total
        if ctx:
            lower = self._prob(token, ctx[1:])
        else:
            lower = 1.0 / len(self.vocab)
        return kept + backoff_mass * lower

    def log_prob_dist(self, context: Sequence[Token]) -> dict[Token, float]:
        ctx = tuple(context[-(self.order - 1) :]) if self.order > 1 else ()
        while ctx and ctx not in self.counts:
            ctx = ctx[1:]
        cached = self._dist_cache.get(ctx)
        if cached is None:
            cached = {t: math.log(self._prob(t, ctx)) for t in self.vocab.tokens}
            self._dist_cache[ctx] = cached
        return cached

    def to_dict(self) -> dict:
        enc = self.vocab.encode
        counts = [
            [
                [enc(t) for t in ctx],
                sorted([enc(tok), n] for tok, n in succ.items()),
            ]
            for ctx, succ in sorted(
                self.counts.items(), key=lambda item: [self.vocab.encode(t) for t in item[0]]
            )
        ]
        return {
            "order": self.order,
            "discount": self.discount,
            "vocab": self.vocab.to_dict(),
            "counts": counts,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "NGramModel":
        vocab = Vocabulary.from_dict(doc["vocab"])
        dec = lambda s: _decode(vocab.kind, s)
        counts = {
            tuple(dec(t) for t in ctx): {dec(tok): int(n) for tok, n in succ}
            for ctx, succ in doc["counts"]
        }
        return cls(int(doc["order"]), float(doc["discount"]), vocab, counts)


def train_ngram(
    corpus: Sequence[Melody],
    order: int = 3,
    discount: float = 0.5,
    vocab: Optional[Vocabulary] = None,
) -> NGramModel:
    """Train the full melody-token model from a corpus of melodies."""
    if not corpus:
        raise TrainingError("training corpus is empty")
    if vocab is None:
        vocab = vocabulary_from_corpus(corpus)
    return NGramModel.train([melody_sequence(m) for m in corpus], order, discount, vocab)


@dataclass(frozen=True)
class ModelBundle:
    """The three models one training run produces, saved as a single file."""

    token_model: NGramModel
    rhythm_model: NGramModel
    pitch_model: NGramModel

    FORMAT = "lyricmelody-ngram"
    VERSION = 1

    def to_json(self) -> str:
        doc = {
            "format": self.FORMAT,
            "version": self.VERSION,
            "token_model": self.token_model.to_dict(),
            "rhythm_model": self.rhythm_model.to_dict(),
            "pitch_model": self.pitch_model.to_dict(),
        }
        return json.dumps(doc, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ModelBundle":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise TrainingError(f"invalid model file: {exc}") from exc
        if doc.get("format") != cls.FORMAT:
            raise TrainingError(f"not a {cls.FORMAT} model file")
        if doc.get("version") != cls.VERSION:
            raise TrainingError(f"unsupported model file version {doc.get('version')}")
        return cls(
            NGramModel.from_dict(doc["token_model"]),
            NGramModel.from_dict(doc["rhythm_model"]),
            NGramModel.from_dict(doc["pitch_model"]),
        )


def train_model_bundle(
    corpus: Sequence[Melody], order: int = 3, discount: float = 0.5
) -> ModelBundle:
    """Train melody, rhythm, and pitch models off one corpus."""
    if not corpus:
        raise TrainingError("training corpus is empty")
    melody_vocab = vocabulary_from_corpus(corpus)
    rhythm_vocab = Vocabulary.build(
        "rhythm", (rhythm_projection(t) for t in melody_vocab.tokens[:-1])
    )
    pitch_vocab = Vocabulary.build(
        "pitch", (pitch_projection(t) for t in melody_vocab.tokens[:-1])
    )
    return ModelBundle(
        NGramModel.train([melody_sequence(m) for m in corpus], order, discount, melody_vocab),
        NGramModel.train([rhythm_sequence(m) for m in corpus], order, discount, rhythm_vocab),
        NGramModel.train([pitch_sequence(m) for m in corpus], order, discount, pitch_vocab),
    )
