# Belief state and the selection / use records built from it

from dataclasses import asdict, dataclass, field, replace
from enum import Enum
from typing import Dict, List, Optional


class SelectionMode(str, Enum):
    GREEDY = "greedy"
    SAMPLED = "sampled"
    EXPLORE = "explore"


class Outcome(str, Enum):
    SUCCESS = "success"
    FAILURE = "failure"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class PatternBelief:
    uses: int = 0
    successes: int = 0
    failures: int = 0
    evidence_events: int = 0
    last_updated: int = -1

    @property
    def smoothed_success(self) -> float:
        # Laplace smoothing: an unused pattern sits at 0.5
        return (self.successes + 1) / (self.uses + 2)


@dataclass(frozen=True)
class BeliefState:
    """
    Per-session beliefs: evidence counts per pattern plus the policy
    precision tau and the error proxy statistics behind it.
    """

    patterns: Dict[str, PatternBelief] = field(default_factory=dict)
    maturity: Dict[str, str] = field(default_factory=dict)
    tau: float = 1.0
    tau_observation_count: int = 0
    error_ewma: float = 0.0
    len_baseline: Optional[float] = None
    last_updated: int = -1

    def belief(self, pattern_id: str) -> PatternBelief:
        return self.patterns[pattern_id]

    def with_pattern(self, pattern_id: str, belief: PatternBelief, seq: int) -> "BeliefState":
        patterns = dict(self.patterns)
        patterns[pattern_id] = belief
        return replace(self, patterns=patterns, last_updated=seq)

    def to_dict(self) -> dict:
        return {
            "patterns": {pattern_id: asdict(belief) for pattern_id, belief in sorted(self.patterns.items())},
            "maturity": dict(sorted(self.maturity.items())),
            "tau": self.tau,
            "tau_observation_count": self.tau_observation_count,
            "error_ewma": self.error_ewma,
            "len_baseline": self.len_baseline,
            "last_updated": self.last_updated,
        }


@dataclass(frozen=True)
class CandidateScore:
    pattern_id: str
    G: float
    components: Dict[str, float] = field(default_factory=dict)
    probability: Optional[float] = None
    maturity: Optional[str] = None

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, values: dict) -> "CandidateScore":
        return cls(
            pattern_id=values["pattern_id"],
            G=values["G"],
            components=dict(values.get("components") or {}),
            probability=values.get("probability"),
            maturity=values.get("maturity"),
        )


@dataclass(frozen=True)
class SelectionRecord:
    """
    Pattern Selection Record: which pattern we believe applies, and why now.
    """

    intent: str
    candidates: List[CandidateScore]
    chosen: str
    tau_used: float
    mode: SelectionMode
    rng_seed: int
    rationale: str = ""

    def __post_init__(self):
        if self.chosen not in {candidate.pattern_id for candidate in self.candidates}:
            raise ValueError(f"Chosen pattern {self.chosen!r} is not among the candidates")

    def to_dict(self) -> dict:
        return {
            "intent": self.intent,
            "candidates": [candidate.to_dict() for candidate in self.candidates],
            "chosen": self.chosen,
            "tau_used": self.tau_used,
            "mode": self.mode.value,
            "rng_seed": self.rng_seed,
            "rationale": self.rationale,
        }

    @classmethod
    def from_dict(cls, values: dict) -> "SelectionRecord":
        return cls(
            intent=values["intent"],
            candidates=[CandidateScore.from_dict(candidate) for candidate in values["candidates"]],
            chosen=values["chosen"],
            tau_used=values["tau_used"],
            mode=SelectionMode(values["mode"]),
            rng_seed=values["rng_seed"],
            rationale=values.get("rationale", ""),
        )


@dataclass(frozen=True)
class UseRecord:
    """
    Pattern Use Record: what happened when we applied it.
    """

    pattern_id: str
    anchor: int
    outcome: Outcome
    evidence_note: str = ""
    belief_delta: Dict[str, int] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "pattern_id": self.pattern_id,
            "anchor": self.anchor,
            "outcome": self.outcome.value,
            "evidence_note": self.evidence_note,
            "belief_delta": dict(self.belief_delta),
        }

    @classmethod
    def from_dict(cls, values: dict) -> "UseRecord":
        return cls(
            pattern_id=values["pattern_id"],
            anchor=int(values["anchor"]),
            outcome=Outcome(values["outcome"]),
            evidence_note=values.get("evidence_note", ""),
            belief_delta=dict(values.get("belief_delta") or {}),
        )

    @staticmethod
    def expected_delta(outcome: Outcome) -> Dict[str, int]:
        delta = {"uses": 1}

        if outcome is Outcome.SUCCESS:
            delta["successes"] = 1
        elif outcome is Outcome.FAILURE:
            delta["failures"] = 1

        return delta
