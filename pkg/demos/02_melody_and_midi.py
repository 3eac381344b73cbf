"""Melody tokens, the beat grid, pause detection, and MIDI round-trips.

A melody is a flat list of note/rest tokens with exact rational durations
(quarter-note units).  The syllable flag on each note encodes melisma:
True opens the next syllable's span, False continues the current one.
"""

from fractions import Fraction

from lyricmelody import (
    compute_beat_grid,
    default_reward_config,
    detect_pauses,
    note,
    parse_lyrics,
    read_midi,
    rest,
    write_midi,
    Melody,
)

lyrics = parse_lyrics("shan1|W,K shui3|I yun2|W,A hai3|I .")

# four syllables; the third one is sung over two notes (a melisma)
melody = Melody(
    tokens=(
        note(67, 1),                # shan
        note(65, 1),                # shui
        note(64, Fraction(1, 2)),   # yun ...
        note(62, Fraction(1, 2), start=False),  # ... still yun
        rest(1),
        note(60, 2),                # hai
    ),
    time_signature=(4, 4),
)
print("syllable alignment (token spans):", melody.alignment)

grid = compute_beat_grid(melody)
print("\ntoken onsets and strengths in 4/4 (beats 1 and 3 are strong):")
for tok, onset, strength in zip(melody.tokens, grid.onsets, grid.strengths):
    label = f"pitch {tok.pitch}" if tok.is_note else "rest"
    print(f"  offset {str(onset):4s}  {strength.value:6s}  {label}")

config = default_reward_config()
print("\npause events (rests, long notes, missing sentence-final pauses):")
for event in detect_pauses(melody, lyrics, config):
    print(f"  gap {event.position}: {event.cause.value}")

# MIDI round-trip: 480 ticks per quarter, lyrics embedded at syllable starts
data = write_midi(melody, lyrics)
print(f"\nwrote {len(data)} bytes of standard MIDI")
assert read_midi(data) == melody
print("read_midi(write_midi(m)) == m")
