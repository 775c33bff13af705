# This module normalizes pattern text for comparison and scoring

import re


# Letters and digits in any script; underscores split words
WORD_PATTERN = re.compile(r"[^\W_]+")


class TextNormalizer:
    """
    Converts wrapped prose into canonical single-line text and word sets.
    """

    # -------------------- WHITESPACE --------------------

    def normalize_whitespace(self, raw_text) -> str:
        """
        Collapse runs of whitespace to single spaces and trim both ends.

        Example:
        "Declared boundaries shorten\\n diagnosis  time" -> "Declared boundaries shorten diagnosis time"

        :param raw_text: text possibly hard-wrapped across lines
        :return: normalized text ("" for None)
        """

        if not raw_text:
            return ""

        return " ".join(str(raw_text).split())

    # -------------------- TOKENS --------------------

    def word_set(self, raw_text) -> frozenset:
        """
        Case-folded set of words (letters and digits of any script).

        Example:
        "Blast-radius events, before risky actions" -> {"blast", "radius", "events", "before", "risky", "actions"}

        :param raw_text: free text
        :return: frozenset of words
        """

        if not raw_text:
            return frozenset()

        return frozenset(WORD_PATTERN.findall(str(raw_text).casefold()))
