"""Walk through the annotated-lyrics format.

Every linguistic signal the decoder uses is written down explicitly in the
input, one sentence per line: tones (digits 1-5 for tonal languages, a
trailing apostrophe for stressed syllables in English-like languages), word
segmentation (W starts a word, I continues it), stress classes (K keyword,
A auxiliary), and sentence-final punctuation for the intonation.
"""

from lyricmelody import (
    build_structure_matrix,
    detect_intonation,
    parse_lyrics,
    serialize_lyrics,
)

SHEET = """\
tian1|W,K kong1|I de5|W,A yan2|W se4|I ?
ni3|W,K hua4|W guo4|I de5|W,A hong2|W .
tian1|W,K kong1|I de5|W,A yan2|W se4|I .
"""

lyrics = parse_lyrics(SHEET)
print(f"language: {lyrics.language.value}")
print(f"{len(lyrics.syllables)} syllables in {len(lyrics.sentences)} sentences\n")

for k, syl in enumerate(lyrics.syllables):
    marks = []
    if syl.sentence_final:
        marks.append("sentence-final")
    print(
        f"  {k:2d}  {syl.text:5s} {syl.tone.value:8s} {syl.word_position.value:6s}"
        f" {syl.stress_class.value:9s} {' '.join(marks)}"
    )

print("\nsentence intonations (from the punctuation):")
for i, sent in enumerate(lyrics.sentences):
    print(f"  sentence {i}: {sent.intonation.value}")

# standalone, the same mapping:
print("\ndetect_intonation('?') ->", detect_intonation("?").value)
print("detect_intonation('.') ->", detect_intonation(".").value)
print("detect_intonation(',') ->", detect_intonation(",").value)

# Sentences 1 and 3 have identical text, so they form a structure group:
# each syllable of the repeat is paired with the matching position in the
# earliest occurrence.  The decoder's structure reward and the repetition
# metrics both read these pairs.
matrix = build_structure_matrix(lyrics)
print("\nstructure pairs (later syllable -> anchor):")
for i, j in sorted(matrix.pairs):
    print(f"  {i:2d} -> {j:2d}   ({lyrics.syllables[i].text} = {lyrics.syllables[j].text})")

# The format round-trips: serialize and re-parse gives an equal sequence.
assert parse_lyrics(serialize_lyrics(lyrics)) == lyrics
print("\nserialize -> parse round-trip holds")
