# A session trace paired with its live fold
#
# Every event is folded into a copy of the live state before it is written,
# from the same JSON form that replay will later read. The copy replaces the
# live state only once the event is on disk.

import json
import logging

from config.settings import ADAPTER_SCHEMA_VERSION, EngineConfig
from models.trace_event import EventType, TraceEvent
from services.maturity_classifier import MaturityClassifier
from services.session_replayer import replay_events
from utils.errors import SessionExistsError, SessionNotFoundError


logger = logging.getLogger(__name__)


def library_maturity(library) -> dict:
    classifier = MaturityClassifier()
    return {
        pattern_id: classifier.classify_maturity(document).value
        for pattern_id, document in sorted(library.patterns.items())
    }


class TracedSession:
    """
    Writable session: append-only trace plus the belief state folded from it.
    """

    def __init__(self, trace):
        """
        :param trace: open SessionTrace (its initial_events seed the fold)
        """
        self.trace = trace
        self.fold = replay_events(trace.initial_events)

    @property
    def session_id(self) -> str:
        return self.trace.session_id

    @property
    def engine(self):
        return self.fold.engine

    @property
    def beliefs(self):
        return self.fold.beliefs

    def record(self, event_type, payload: dict = None) -> TraceEvent:
        """
        Fold then append one event.

        :raises FutonError / ValueError: when the event would not replay;
            nothing is written in that case
        :raises OSError: when the write fails; the live state is unchanged
        """

        event_type = EventType(event_type)
        normalised_payload = json.loads(json.dumps(payload or {}))

        next_fold = self.fold.copy()
        next_fold.apply(TraceEvent(
            seq=self.trace.next_seq,
            timestamp="",
            session_id=self.trace.session_id,
            type=event_type,
            payload=normalised_payload,
        ))

        event = self.trace.append_event(event_type, normalised_payload)
        self.fold = next_fold

        return event

    def snapshot(self) -> TraceEvent:
        return self.record(EventType.BELIEF_UPDATE, self.beliefs.to_dict())

    def close(self, end_payload: dict = None):
        if self.trace.closed:
            return

        try:
            self.record(EventType.SESSION_END, end_payload or {"last_turn": self.fold.turn})
        finally:
            self.trace.close()

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc_value, traceback):
        self.close()


def open_session(trace_store, session_id: str, library, engine_config: EngineConfig, resume=None) -> TracedSession:
    """
    Create or reopen a session.

    :param resume: True requires an existing trace, False requires a new one,
        None picks whichever applies
    :return: TracedSession
    """

    exists = trace_store.exists(session_id)

    if resume is True and not exists:
        raise SessionNotFoundError(f"Unknown session: {session_id}")

    if resume is False and exists:
        raise SessionExistsError(f"Session {session_id} already exists; resume it instead")

    maturity = library_maturity(library)

    if exists:
        trace = trace_store.resume_session(session_id, {"patterns": maturity, "library_root": library.root})
        session = TracedSession(trace)

        if session.engine.config != engine_config:
            logger.warning("Session %s keeps the engine config it was started with", session_id)

        return session

    trace = trace_store.create_session(session_id, {
        "engine_config": engine_config.to_dict(),
        "patterns": maturity,
        "library_root": library.root,
        "adapter_schema_version": ADAPTER_SCHEMA_VERSION,
    })

    return TracedSession(trace)
