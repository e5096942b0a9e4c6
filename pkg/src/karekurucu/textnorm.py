"""Turkish-aware text normalization, alphabet validation, and tokenization."""
from __future__ import annotations

# The 29 letters of the Turkish alphabet, uppercase, in alphabet order.
TURKISH_ALPHABET = (
    "A", "B", "C", "Ç", "D", "E", "F", "G", "Ğ", "H", "I", "İ", "J", "K",
    "L", "M", "N", "O", "Ö", "P", "R", "S", "Ş", "T", "U", "Ü", "V", "Y", "Z",
)
TURKISH_LETTER_SET = frozenset(TURKISH_ALPHABET)

# Dotted/dotless i do not follow the default Unicode case rules.
_UPPER_SPECIAL = {"i": "İ", "ı": "I"}
_LOWER_SPECIAL = {"İ": "i", "I": "ı"}

# Circumflexed vowels common in Turkish loanwords fold to their base letter
# (î is the dotted i sound, so it folds to i/İ).
_ACCENT_FOLD = {
    "â": "a", "ê": "e", "î": "i", "ô": "o", "û": "u",
    "Â": "A", "Ê": "E", "Î": "İ", "Ô": "O", "Û": "U",
}


class NonAlphabetCharacter(ValueError):
    """A character outside the 29-letter Turkish alphabet."""

    def __init__(self, position: int, char: str):
        self.position = position
        self.char = char
        super().__init__(f"non-alphabet character {char!r} at position {position}")


def turkish_upper(text: str) -> str:
    """Uppercase with Turkish casing (i→İ, ı→I)."""
    return "".join(_UPPER_SPECIAL.get(ch, ch).upper() for ch in text)


def turkish_lower(text: str) -> str:
    """Lowercase with Turkish casing (İ→i, I→ı)."""
    return "".join(_LOWER_SPECIAL.get(ch, ch).lower() for ch in text)


def fold_accents(text: str) -> str:
    """Map circumflexed loanword vowels to their base Turkish letter."""
    return "".join(_ACCENT_FOLD.get(ch, ch) for ch in text)


def to_grid_form(raw: str) -> str:
    """Normalize a word to canonical uppercase grid letters.

    Applies accent folding and Turkish uppercasing, then validates that
    every character is one of the 29 alphabet letters.

    Raises:
        ValueError: if `raw` is empty.
        NonAlphabetCharacter: on the first character (digit, punctuation,
            whitespace, Q/W/X, ...) that is not a Turkish letter after casing.
    """
    if not raw:
        raise ValueError("cannot normalize an empty string")
    out: list[str] = []
    for pos, ch in enumerate(raw):
        cased = turkish_upper(fold_accents(ch))
        for c in cased:
            if c not in TURKISH_LETTER_SET:
                raise NonAlphabetCharacter(pos, c)
        out.append(cased)
    return "".join(out)


def tokenize_words(text: str) -> list[str]:
    """Split text into lowercase word tokens.

    Splits on whitespace, strips leading/trailing punctuation from each
    token, drops tokens left empty, and lowercases with Turkish casing.
    Internal punctuation (e.g. the apostrophe in "Dünya'nın") is kept.
    """
    tokens: list[str] = []
    for chunk in text.split():
        start = 0
        end = len(chunk)
        while start < end and not chunk[start].isalnum():
            start += 1
        while end > start and not chunk[end - 1].isalnum():
            end -= 1
        if start < end:
            tokens.append(turkish_lower(chunk[start:end]))
    return tokens


def word_count(text: str) -> int:
    """Number of word tokens in `text`."""
    return len(tokenize_words(text))
