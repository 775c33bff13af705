# This service answers "which pattern now?" for a stated intent and
# records the answer in the session trace

import math

from models.belief import SelectionMode, SelectionRecord
from models.trace_event import EventType
from utils.errors import ConfigError, NoCandidatesError, UnknownPatternError


class PatternSelector:
    """
    Builds Pattern Selection Records from a library and a live session.
    """

    def __init__(self, library):
        """
        :param library: PatternLibrary to draw candidates from
        """
        self.library = library

    def selection_mode(self, session, explicit_explore: bool, greedy: bool) -> SelectionMode:
        # Explicit exploration wins over greedy; greedy wins over the automatic trigger
        if explicit_explore:
            return SelectionMode.EXPLORE

        if greedy:
            return SelectionMode.GREEDY

        return session.engine.explore_trigger(session.beliefs, explicit_flag=False)

    def build_selection(
        self,
        session,
        intent: str,
        seed: int,
        explicit_explore: bool = False,
        tau: float = None,
        greedy: bool = False,
    ) -> SelectionRecord:
        """
        Score every eligible pattern and draw one.

        :param tau: override for this selection only; the session's tau otherwise
        :return: SelectionRecord
        """

        if tau is not None and not (math.isfinite(tau) and tau > 0):
            raise ConfigError(f"tau must be positive and finite, got {tau}")

        engine = session.engine
        mode = self.selection_mode(session, explicit_explore, greedy)

        # Stubs need an explicit request; the automatic trigger only adds the epistemic bonus
        scores = engine.score_candidates(
            list(self.library.patterns.values()),
            session.beliefs,
            intent,
            mode,
            admit_stubs=explicit_explore,
        )

        if not scores:
            raise NoCandidatesError(f"No eligible patterns in {self.library.root} for mode {mode.value}")

        tau_used = session.beliefs.tau if tau is None else tau
        distribution = engine.selection_distribution(scores, tau_used)

        return engine.sample_selection(distribution, seed, intent, mode, tau_used)

    def select(self, session, intent: str, seed: int, **options):
        """
        Select a pattern and append intent, psr and pattern-select events.

        :return: Tuple (SelectionRecord, pattern-select TraceEvent)
        """

        record = self.build_selection(session, intent, seed, **options)

        session.record(EventType.INTENT, {"text": intent})
        psr_event = session.record(EventType.PSR, record.to_dict())
        select_event = session.record(EventType.PATTERN_SELECT, {
            "pattern_id": record.chosen,
            "psr_seq": psr_event.seq,
            "note": record.rationale,
        })

        return record, select_event

    def selection_for_target(
        self,
        session,
        intent: str,
        target: str,
        note: str,
        seed: int,
        explicit_explore: bool = False,
    ) -> SelectionRecord:
        """
        Record a choice the agent already made.

        The candidate table is what the engine would have offered; the
        agent's pattern is appended when the engine would not have offered it.
        """

        document = self.library.get(target)

        if document is None:
            raise UnknownPatternError(target)

        engine = session.engine
        mode = self.selection_mode(session, explicit_explore, greedy=False)
        documents = list(self.library.patterns.values())

        scores = engine.score_candidates(documents, session.beliefs, intent, mode, admit_stubs=explicit_explore)

        if target not in {score.pattern_id for score in scores}:
            scores.append(engine.expected_free_energy(document, session.beliefs, intent, mode))

        distribution = engine.selection_distribution(scores, session.beliefs.tau)

        return SelectionRecord(
            intent=intent,
            candidates=distribution,
            chosen=target,
            tau_used=session.beliefs.tau,
            mode=mode,
            rng_seed=seed,
            rationale=note or f"agent selected {target}",
        )
