# This class derives a pattern's maturity state from which fields it carries


from models.pattern import PRECISION_PRIORS, MaturityState, PatternDocument


class MaturityClassifier:
    """
    Classifies patterns by the presence of next-steps and evidence.

    The outcome depends only on whether those two lists hold any
    non-blank entry; clause text never changes the state.
    """

    def __init__(self):
        # (has_next_steps, has_evidence) -> state
        self.classification_rules = {
            (True, True): MaturityState.ACTIVE,
            (True, False): MaturityState.GREENFIELD,
            (False, True): MaturityState.SETTLED,
            (False, False): MaturityState.STUB,
        }

    def field_presence(self, document: PatternDocument):
        """
        :param document: parsed pattern
        :return: Tuple (has_next_steps: bool, has_evidence: bool)
        """

        # Whitespace-only entries count as absent
        has_next_steps = any(entry.strip() for entry in document.next_steps)
        has_evidence = any(entry.strip() for entry in document.evidence)

        return has_next_steps, has_evidence

    def classify_maturity(self, document: PatternDocument) -> MaturityState:
        return self.classification_rules[self.field_presence(document)]

    def precision_prior(self, state: MaturityState) -> float:
        return PRECISION_PRIORS[MaturityState(state)]

    def filter_eligible_patterns(self, documents: list, include_stubs: bool):
        """
        Keep patterns that may enter a candidate table.

        :param documents: list of PatternDocument
        :param include_stubs: True when explore was requested explicitly
        :return: list of eligible documents, input order preserved
        """

        eligible_documents = []

        for document in documents:
            maturity_state = self.classify_maturity(document)

            if maturity_state is MaturityState.STUB and not include_stubs:
                continue

            eligible_documents.append(document)

        return eligible_documents
