# Session trace envelope and the roster signals agents emit

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, Optional


class EventType(str, Enum):
    SESSION_START = "session-start"
    SESSION_RESUME = "session-resume"
    INTENT = "intent"
    PSR = "psr"
    PATTERN_SELECT = "pattern-select"
    PATTERN_READ = "pattern-read"
    PATTERN_USE = "pattern-use"
    PATTERN_UPDATE = "pattern-update"
    PATTERN_IMPLEMENT = "pattern-implement"
    MUSN_PLAN = "musn-plan"
    TOOL_CALL = "tool-call"
    OBSERVATION = "observation"
    PUR = "pur"
    BELIEF_UPDATE = "belief-update"
    TURN_BOUNDARY = "turn-boundary"
    SESSION_END = "session-end"


# Events that count as per-pattern evidence
EVIDENCE_EVENTS = (EventType.PATTERN_READ, EventType.PATTERN_UPDATE, EventType.PATTERN_IMPLEMENT)


@dataclass(frozen=True)
class TraceEvent:
    """
    One line of a session trace: {"seq", "ts", "session", "type", "payload"}.
    """

    seq: int
    timestamp: str
    session_id: str
    type: EventType
    payload: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "seq": self.seq,
            "ts": self.timestamp,
            "session": self.session_id,
            "type": self.type.value,
            "payload": self.payload,
        }

    @classmethod
    def from_dict(cls, values: dict) -> "TraceEvent":
        seq = values["seq"]

        if not isinstance(seq, int) or isinstance(seq, bool):
            raise ValueError(f"seq must be an integer, got {seq!r}")

        payload = values.get("payload") or {}

        if not isinstance(payload, dict):
            raise ValueError("payload must be an object")

        return cls(
            seq=seq,
            timestamp=str(values.get("ts", "")),
            session_id=str(values["session"]),
            type=EventType(values["type"]),
            payload=payload,
        )


class RosterVerb(str, Enum):
    PATTERN_SELECT = "pattern-select"
    PATTERN_USE = "pattern-use"
    MUSN_PLAN = "musn-plan"


@dataclass(frozen=True)
class RosterSignal:
    verb: RosterVerb
    target: Optional[str] = None
    note: str = ""

    def __post_init__(self):
        if self.verb is RosterVerb.MUSN_PLAN and self.target:
            raise ValueError("musn-plan does not take a target")

        if self.verb is not RosterVerb.MUSN_PLAN and not self.target:
            raise ValueError(f"{self.verb.value} requires a target pattern")
