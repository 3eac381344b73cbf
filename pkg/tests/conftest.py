import random
from fractions import Fraction

import pytest

from lyricmelody import (
    DecodeOptions,
    Melody,
    MelodyToken,
    TokenKind,
    UniformScorer,
    build_melody_vocabulary,
    default_reward_config,
    parse_lyrics,
)


@pytest.fixture(scope="session")
def config():
    return default_reward_config()


@pytest.fixture
def tiny_lyrics():
    return parse_lyrics("ni3|W,K cai3|I hong2|I .")


@pytest.fixture
def two_sentence_lyrics():
    return parse_lyrics("ni3|W,K cai3|I hong2|I .\nni3|W,K cai3|I hong2|I .")


@pytest.fixture
def tiny_vocab():
    return build_melody_vocabulary((60, 63), [Fraction(1), Fraction(2)])


@pytest.fixture
def uniform_scorer(tiny_vocab):
    return UniformScorer(tiny_vocab)


def mk_melody(spec, time_signature=(4, 4)):
    """Compact melody builder: each item is (pitch, duration, starts) for a
    note or ('r', duration) for a rest."""
    tokens = []
    for item in spec:
        if item[0] == "r":
            tokens.append(MelodyToken(TokenKind.REST, Fraction(item[1])))
        else:
            pitch, duration = item[0], Fraction(item[1])
            starts = item[2] if len(item) > 2 else True
            tokens.append(MelodyToken(TokenKind.NOTE, duration, pitch, starts))
    return Melody(tuple(tokens), time_signature)


@pytest.fixture
def rng():
    return random.Random(20240811)
