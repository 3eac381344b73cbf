"""Train an n-gram scorer on a small corpus and decode melodies with and
without the lyric-melody constraints.

The base model is a pure melody language model; every lyric signal enters
through the per-step rewards, so turning the weights off (preset "off")
reproduces plain beam search over the model.
"""

import random

from lyricmelody import (
    DecodeOptions,
    beam_search,
    default_reward_config,
    evaluate_pair,
    score_decode,
    serialize_lyrics,
    train_ngram,
)
from lyricmelody.synthetic import random_lyrics, random_training_melody

rng = random.Random(5)

# a desk-sized training corpus of random-walk melodies
corpus = [random_training_melody(rng) for _ in range(20)]
scorer = train_ngram(corpus, order=3, discount=0.5)
print(f"trained an order-3 model over {len(scorer.vocab)} melody tokens")

lyrics = random_lyrics(rng, sentences=2, repeat=True)
print("\nlyrics under test:")
print(serialize_lyrics(lyrics))

config = default_reward_config()
options = DecodeOptions(beam_width=4, seed=0)


def fmt(value):
    return "-" if value is None else f"{value:.3f}"


for preset in ("off", "telemelody", "songmass"):
    result = beam_search(lyrics, scorer, config.with_preset(preset), options)
    report = evaluate_pair(lyrics, result.melody, config)
    pitches = [t.pitch for t in result.melody.tokens if t.is_note]
    print(f"preset {preset:10s} score {result.score:8.3f}  pitches {pitches}")
    print(
        f"   transition {fmt(report.tone_transition)}, s/w {fmt(report.matched_sw)}, "
        f"pauses {fmt(report.matched_pauses)}, MD {fmt(report.md)}"
    )

# Any returned score can be reproduced from the token sequence alone.
result = beam_search(lyrics, scorer, config.with_preset("telemelody"), options)
base, reward, score = score_decode(lyrics, result.melody, scorer, config.with_preset("telemelody"))
print(f"\nreported score {result.score:.12f}")
print(f"recomputed     {score:.12f} (base {base:.3f} + weighted rewards {reward:.3f})")
