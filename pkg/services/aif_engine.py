# Pattern selection by expected free energy and softmax sampling,
# plus the belief and policy precision updates that follow each use.

import logging
import math
from dataclasses import replace

import numpy as np

from config.settings import EngineConfig
from models.belief import (
    BeliefState,
    CandidateScore,
    Outcome,
    PatternBelief,
    SelectionMode,
    SelectionRecord,
)
from models.pattern import PatternDocument
from models.trace_event import EVIDENCE_EVENTS, EventType, TraceEvent
from services.maturity_classifier import MaturityClassifier
from services.relevance_scorer import LexicalRelevanceScorer, RelevanceScorer
from utils.errors import NoCandidatesError, UnknownPatternError


logger = logging.getLogger(__name__)


def softmax_probabilities(g_values, tau: float) -> np.ndarray:
    """
    Softmax over -G/tau with max-subtraction.

    :param g_values: sequence of expected free energy scores
    :param tau: policy precision (temperature), > 0
    :return: numpy array of probabilities in input order
    """

    if tau <= 0:
        raise ValueError(f"tau must be positive, got {tau}")

    logits = -np.asarray(g_values, dtype=float) / tau

    if logits.size == 0:
        raise NoCandidatesError("No candidates to score")

    shifted = np.exp(logits - np.max(logits))

    return shifted / np.sum(shifted)


class AIFEngine:
    """
    Scores candidate patterns, samples a selection and folds outcomes
    back into the belief state.

    All operations are pure: they return new BeliefState values and never
    modify their inputs.
    """

    def __init__(self, config: EngineConfig = None, relevance_scorer: RelevanceScorer = None):
        """
        :param config: EngineConfig (defaults when omitted)
        :param relevance_scorer: intent/pattern scorer, lexical overlap by default
        """
        self.config = config or EngineConfig()
        self.relevance_scorer = relevance_scorer or LexicalRelevanceScorer()
        self.classifier = MaturityClassifier()

    # -------------------- BELIEF STATE --------------------

    def initial_beliefs(self, maturity: dict) -> BeliefState:
        """
        :param maturity: pattern id -> maturity state name
        :return: fresh BeliefState with zero counts and tau at tau_0
        """
        return BeliefState(
            patterns={pattern_id: PatternBelief() for pattern_id in sorted(maturity)},
            maturity=dict(sorted(maturity.items())),
            tau=self.config.tau_0,
        )

    def with_patterns(self, beliefs: BeliefState, maturity: dict) -> BeliefState:
        """
        Admit patterns that joined the library since the session started.
        Existing counts are kept; maturity labels are refreshed.
        """

        patterns = dict(beliefs.patterns)

        for pattern_id in sorted(maturity):
            patterns.setdefault(pattern_id, PatternBelief())

        merged_maturity = dict(beliefs.maturity)
        merged_maturity.update(maturity)

        return replace(beliefs, patterns=patterns, maturity=dict(sorted(merged_maturity.items())))

    # -------------------- SCORING --------------------

    def relevance(self, intent: str, document: PatternDocument) -> float:
        return self.relevance_scorer.relevance(intent, document)

    def expected_free_energy(self, document, beliefs: BeliefState, intent: str, mode: SelectionMode) -> CandidateScore:
        """
        G = -[w_p ln(prior) + w_s ln(s) + w_r rel] - w_e u (explore mode only)

        where s is the Laplace-smoothed success rate and u = 1 / (1 + uses).
        Lower G is better.
        """

        config = self.config
        belief = beliefs.patterns.get(document.id, PatternBelief())
        maturity_state = self.classifier.classify_maturity(document)

        prior = self.classifier.precision_prior(maturity_state)
        success_rate = belief.smoothed_success
        relevance_score = self.relevance(intent, document)
        epistemic_bonus = 1.0 / (1 + belief.uses) if mode is SelectionMode.EXPLORE else 0.0

        components = {
            "prior": -config.w_prior * math.log(prior),
            "success": -config.w_success * math.log(success_rate),
            "relevance": -config.w_relevance * relevance_score,
            "epistemic": -config.w_epistemic * epistemic_bonus,
        }

        expected_free_energy = -(
            config.w_prior * math.log(prior)
            + config.w_success * math.log(success_rate)
            + config.w_relevance * relevance_score
        ) - config.w_epistemic * epistemic_bonus

        return CandidateScore(
            pattern_id=document.id,
            G=expected_free_energy,
            components=components,
            maturity=maturity_state.value,
        )

    def score_candidates(
        self,
        documents: list,
        beliefs: BeliefState,
        intent: str,
        mode: SelectionMode,
        admit_stubs: bool = None,
    ) -> list:
        """
        Score every eligible pattern; stubs enter only when admitted.

        :param documents: PatternDocuments in library order
        :param admit_stubs: override stub admission (defaults to mode is EXPLORE)
        :return: list of CandidateScore without probabilities
        """

        eligible_documents = self.classifier.filter_eligible_patterns(
            documents,
            include_stubs=mode is SelectionMode.EXPLORE if admit_stubs is None else admit_stubs,
        )

        return [
            self.expected_free_energy(document, beliefs, intent, mode)
            for document in eligible_documents
        ]

    # -------------------- SELECTION --------------------

    def selection_distribution(self, scores: list, tau: float) -> list:
        """
        Attach softmax(-G/tau) probabilities to each candidate.

        :param scores: non-empty list of CandidateScore
        :param tau: policy precision, > 0
        :return: new CandidateScore list, input order preserved
        """

        if not scores:
            raise NoCandidatesError("No candidates to select from")

        probabilities = softmax_probabilities([score.G for score in scores], tau)

        return [
            replace(score, probability=float(probability))
            for score, probability in zip(scores, probabilities)
        ]

    def sample_selection(
        self,
        distribution: list,
        seed: int,
        intent: str,
        mode: SelectionMode,
        tau_used: float,
        rationale: str = "",
    ) -> SelectionRecord:
        """
        Draw one candidate by inverse CDF with a seeded generator.

        Greedy mode skips the draw and takes the lowest G (lowest index on ties).
        """

        if not distribution:
            raise NoCandidatesError("No candidates to select from")

        if mode is SelectionMode.GREEDY:
            chosen_index = int(np.argmin([candidate.G for candidate in distribution]))
        else:
            draw = np.random.default_rng(seed).random()
            cumulative = np.cumsum([candidate.probability for candidate in distribution])
            # side="left": a draw exactly on a boundary goes to the lower index
            chosen_index = min(int(np.searchsorted(cumulative, draw, side="left")), len(distribution) - 1)

        chosen = distribution[chosen_index]

        if not rationale:
            rationale = (
                f"{mode.value} choice {chosen.pattern_id}: G={chosen.G:.4f}, "
                f"p={chosen.probability:.4f}, tau={tau_used:.4f}"
            )

        return SelectionRecord(
            intent=intent,
            candidates=list(distribution),
            chosen=chosen.pattern_id,
            tau_used=tau_used,
            mode=mode,
            rng_seed=seed,
            rationale=rationale,
        )

    def explore_trigger(self, beliefs: BeliefState, explicit_flag: bool, min_samples: int = None) -> SelectionMode:
        """
        :param beliefs: current beliefs
        :param explicit_flag: caller asked for exploration
        :param min_samples: observations needed before tau is trusted
        :return: EXPLORE or SAMPLED
        """

        if explicit_flag:
            return SelectionMode.EXPLORE

        if min_samples is None:
            min_samples = self.config.min_samples

        if self.config.literal_tau_trigger:
            insufficient = beliefs.tau < min_samples
        else:
            insufficient = beliefs.tau_observation_count < min_samples

        return SelectionMode.EXPLORE if insufficient else SelectionMode.SAMPLED

    # -------------------- BELIEF UPDATE --------------------

    def update_beliefs(self, beliefs: BeliefState, event: TraceEvent) -> BeliefState:
        """
        Fold one pattern event into the counts.

        pattern-read / pattern-update / pattern-implement add evidence;
        a pur adds a use and, for success or failure, the matching count.
        """

        if event.type not in EVIDENCE_EVENTS + (EventType.PATTERN_USE, EventType.PUR):
            raise ValueError(f"Event type {event.type.value} carries no belief update")

        pattern_id = event.payload.get("pattern_id")

        if pattern_id not in beliefs.patterns:
            raise UnknownPatternError(str(pattern_id))

        belief = beliefs.patterns[pattern_id]

        if event.type in EVIDENCE_EVENTS:
            belief = replace(belief, evidence_events=belief.evidence_events + 1, last_updated=event.seq)

        elif event.type is EventType.PUR:
            outcome = Outcome(event.payload["outcome"])
            belief = replace(
                belief,
                uses=belief.uses + 1,
                successes=belief.successes + (outcome is Outcome.SUCCESS),
                failures=belief.failures + (outcome is Outcome.FAILURE),
                last_updated=event.seq,
            )

        else:
            # pattern-use announces intent to apply; the pur carries the effect
            return replace(beliefs, last_updated=event.seq)

        return beliefs.with_pattern(pattern_id, belief, event.seq)

    def score_spread(self, g_values) -> float:
        """
        Relative spread of a candidate table: stddev(G) / (|mean(G)| + eps).
        """

        if len(g_values) < 2:
            return 0.0

        values = np.asarray(g_values, dtype=float)

        return float(np.std(values) / (abs(np.mean(values)) + self.config.epsilon))

    def update_tau(self, beliefs: BeliefState, output_length: int, g_values) -> BeliefState:
        """
        Recompute policy precision from the text-length error proxy and the
        spread of candidate scores.

        :param output_length: length of the agent's output text this turn
        :param g_values: G values of the turn's candidate table (may be empty)
        :return: new BeliefState
        """

        config = self.config

        # First observation fixes the baseline
        len_baseline = beliefs.len_baseline
        if len_baseline is None:
            len_baseline = float(output_length)

        error_proxy = abs(output_length - len_baseline) / max(len_baseline, 1.0)
        error_ewma = (1 - config.ewma_lambda) * beliefs.error_ewma + config.ewma_lambda * error_proxy

        spread = self.score_spread(g_values)
        tau = config.tau_0 * (1 + config.alpha * error_ewma) / (1 + config.beta * spread)
        tau = min(config.tau_max, max(config.tau_min, tau))

        return replace(
            beliefs,
            tau=tau,
            error_ewma=error_ewma,
            len_baseline=len_baseline,
            tau_observation_count=beliefs.tau_observation_count + 1,
        )
