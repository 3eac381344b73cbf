"""Exception hierarchy.

Everything a caller can plausibly provoke from the outside derives from
:class:`InputError`; the CLI maps those to exit code 1. :class:`InternalError`
marks broken internal invariants (a bug, not bad input) and maps to exit 2.
"""


class LyricMelodyError(Exception):
    """Base class for all package errors."""


class InputError(LyricMelodyError):
    """Bad input or configuration supplied by the caller."""


class LyricFormatError(InputError):
    """Annotated-lyrics text/JSON does not conform to the format."""


class MidiFormatError(InputError):
    """MIDI bytes are truncated, malformed, or out of the supported subset."""


class ConfigError(InputError):
    """Reward/decode configuration fails validation."""


class TrainingError(InputError):
    """Scorer training cannot proceed (empty corpus, out-of-vocabulary token)."""


class AlignmentError(InputError):
    """Melody and lyrics cannot be aligned syllable-by-syllable."""


class OptionError(InputError):
    """Decode options are inconsistent or out of range."""


class InternalError(LyricMelodyError):
    """An internal consistency check failed; indicates a bug."""
