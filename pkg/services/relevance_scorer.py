# This class scores how well a stated intent matches a pattern's text

from models.pattern import PatternDocument
from utils.text_normalizer import TextNormalizer


class RelevanceScorer:
    """
    Base scorer interface.
    Any replacement (an embedding model, an LLM judge) must return a value in [0, 1].
    """

    def relevance(self, intent: str, document: PatternDocument) -> float:
        raise NotImplementedError("Subclasses must implement relevance()")


class LexicalRelevanceScorer(RelevanceScorer):
    """
    Jaccard overlap between the intent's words and the words of the
    pattern's summary and context.
    """

    def __init__(self):
        self.normalizer = TextNormalizer()

    def _pattern_words(self, document: PatternDocument) -> frozenset:
        """
        Word set of the text an intent is compared against.

        :param document: pattern
        :return: frozenset of case-folded words
        """

        # Combine text for matching
        combined_text = f"{document.summary} {document.context}"

        return self.normalizer.word_set(combined_text)

    def relevance(self, intent: str, document: PatternDocument) -> float:
        """
        :param intent: stated intention
        :param document: candidate pattern
        :return: |A ∩ B| / |A ∪ B|, 0.0 when both sets are empty
        """

        intent_words = self.normalizer.word_set(intent)
        pattern_words = self._pattern_words(document)

        union_words = intent_words | pattern_words

        if not union_words:
            return 0.0

        return len(intent_words & pattern_words) / len(union_words)
