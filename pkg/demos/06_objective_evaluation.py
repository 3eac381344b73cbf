"""Corpus-level objective evaluation: the seven lyric-melody metrics.

Each pair yields tone transition and contour scores, matched strong/weak
and pause ratios, and (on repeated lyrics) pitch/duration distribution
similarity plus melody distance.  Metrics with an empty population are
None and are skipped by the corpus mean, never counted as zero.
"""

import random

from lyricmelody import (
    DecodeOptions,
    beam_search,
    default_reward_config,
    evaluate_pair,
    train_ngram,
)
from lyricmelody.metrics import aggregate_reports
from lyricmelody.synthetic import random_lyrics, random_training_melody

rng = random.Random(2024)
scorer = train_ngram([random_training_melody(rng) for _ in range(20)], order=3)
config = default_reward_config()

rows = []
for i in range(12):
    lyrics = random_lyrics(rng, sentences=2, repeat=(i % 2 == 0))
    for preset in ("off", "telemelody"):
        melody = beam_search(
            lyrics, scorer, config.with_preset(preset),
            DecodeOptions(beam_width=4, seed=i),
        ).melody
        rows.append((preset, evaluate_pair(lyrics, melody, config)))

print(f"{'preset':11s} {'transition':>10s} {'contour':>8s} {'s/w':>6s} {'pauses':>7s} {'PD':>6s} {'DD':>6s} {'MD':>6s}")
for preset in ("off", "telemelody"):
    agg = aggregate_reports([rep for p, rep in rows if p == preset])

    def fmt(name):
        value = agg[name]
        return "  -  " if value is None else f"{value:.3f}"

    print(
        f"{preset:11s} {fmt('tone_transition'):>10s} {fmt('tone_contour'):>8s}"
        f" {fmt('matched_sw'):>6s} {fmt('matched_pauses'):>7s}"
        f" {fmt('pd'):>6s} {fmt('dd'):>6s} {fmt('md'):>6s}"
    )

print("\nhigher is better everywhere except MD (mean semitone distance")
print("between repeated segments), where lower is better.")
