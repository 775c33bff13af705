# Folds session events into belief state.
#
# The same SessionFold runs live (one event at a time, as events are
# written) and on replay (over a whole trace), so the two always agree.

import logging
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional

from config.settings import EngineConfig
from models.belief import BeliefState, SelectionRecord, UseRecord
from models.trace_event import EVIDENCE_EVENTS, EventType, TraceEvent
from services.aif_engine import AIFEngine
from utils.errors import AnchorNotFoundError, FutonError, TraceCorruptError, UnknownPatternError


logger = logging.getLogger(__name__)


@dataclass
class TurnEntry:
    turn: int
    kind: str
    seq: int
    pattern_id: str
    detail: str = ""


@dataclass
class SessionFold:
    """
    Running state of one session: engine, beliefs, last PSR and the
    per-turn PSR/PUR log used by reports.
    """

    engine: Optional[AIFEngine] = None
    beliefs: Optional[BeliefState] = None
    last_selection: Optional[SelectionRecord] = None
    turn: int = 0
    last_seq: int = -1
    ended: bool = False
    turn_log: List[TurnEntry] = field(default_factory=list)
    # seq of each psr / pattern-select -> (pattern id, turn)
    selection_anchors: Dict[int, tuple] = field(default_factory=dict)

    def copy(self) -> "SessionFold":
        """
        Independent fold to try an event on; engine and beliefs are immutable
        and shared.
        """

        return replace(self, turn_log=list(self.turn_log), selection_anchors=dict(self.selection_anchors))

    def apply(self, event: TraceEvent):
        """
        Fold one event. A rejected event may leave the fold part way
        updated; fold into copy() when that matters.
        """

        if self.engine is None and event.type is not EventType.SESSION_START:
            raise ValueError("Trace must begin with session-start")

        if event.type is EventType.SESSION_START:
            engine = AIFEngine(EngineConfig.from_dict(event.payload.get("engine_config") or {}))
            beliefs = engine.initial_beliefs(event.payload.get("patterns") or {})
            self.engine, self.beliefs = engine, beliefs

        elif event.type is EventType.SESSION_RESUME:
            if event.payload.get("patterns"):
                self.beliefs = self.engine.with_patterns(self.beliefs, event.payload["patterns"])
            self.ended = False

        elif event.type is EventType.PSR:
            record = SelectionRecord.from_dict(event.payload)
            self._require_pattern(record.chosen)
            self.selection_anchors[event.seq] = (record.chosen, self.turn)
            self.last_selection = record
            self.turn_log.append(TurnEntry(
                self.turn, "psr", event.seq, record.chosen,
                f"{record.mode.value}, tau={record.tau_used:.4f}"
            ))

        elif event.type is EventType.PATTERN_SELECT:
            pattern_id = event.payload.get("pattern_id")
            self._require_pattern(pattern_id)
            self.selection_anchors[event.seq] = (pattern_id, self.turn)

        elif event.type in EVIDENCE_EVENTS or event.type is EventType.PATTERN_USE:
            self.beliefs = self.engine.update_beliefs(self.beliefs, event)

        elif event.type is EventType.PUR:
            use_record = UseRecord.from_dict(event.payload)
            anchored = self.selection_anchors.get(use_record.anchor)

            if anchored is None or use_record.anchor >= event.seq:
                raise AnchorNotFoundError(use_record.anchor)

            anchored_pattern, anchored_turn = anchored

            if anchored_pattern != use_record.pattern_id:
                raise ValueError(
                    f"pur for {use_record.pattern_id} anchors a selection of {anchored_pattern}"
                )

            if anchored_turn != self.turn:
                raise ValueError(f"pur at seq {event.seq} anchors a selection from an earlier turn")

            self.beliefs = self.engine.update_beliefs(self.beliefs, event)
            self.turn_log.append(TurnEntry(
                self.turn, "pur", event.seq, use_record.pattern_id,
                f"{use_record.outcome.value}, anchor={use_record.anchor}"
            ))

        elif event.type is EventType.TURN_BOUNDARY:
            self.beliefs = self.engine.update_tau(
                self.beliefs,
                int(event.payload.get("output_length", 0)),
                list(event.payload.get("candidate_g") or []),
            )
            self.turn += 1

        elif event.type is EventType.SESSION_END:
            self.ended = True

        # intent, observation, tool-call, musn-plan and belief-update
        # snapshots leave beliefs as they are

        self.last_seq = event.seq

    def _require_pattern(self, pattern_id):
        if pattern_id not in self.beliefs.patterns:
            raise UnknownPatternError(str(pattern_id))


def replay_events(events: list) -> SessionFold:
    """
    Fold a whole event list.

    :raises TraceCorruptError: naming the last seq folded cleanly
    """

    fold = SessionFold()

    for event in events:
        try:
            fold.apply(event)
        except (FutonError, ValueError, KeyError, TypeError) as error:
            raise TraceCorruptError(f"Replay stopped at seq {event.seq}: {error}", fold.last_seq) from error

    return fold


def replay(trace_store, session_id: str):
    """
    Rebuild belief state from a stored trace.

    :param trace_store: TraceStore holding the session
    :param session_id: session to replay
    :return: Tuple (BeliefState, last SelectionRecord or None)
    """

    fold = replay_events(trace_store.read_events(session_id))

    logger.debug("Replayed session %s up to seq %d", session_id, fold.last_seq)

    return fold.beliefs, fold.last_selection
