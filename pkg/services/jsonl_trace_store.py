# This class stores session traces as append-only JSON Lines files
#
#   <trace_dir>/<session_id>.jsonl   one TraceEvent per line
#   <trace_dir>/<session_id>.lock    held by the single writer

import json
import logging
import os
import re
from datetime import datetime, timezone
from pathlib import Path

from config.settings import TRACE_SCHEMA_VERSION
from models.trace_event import EventType, TraceEvent
from services.storage_base import TraceStore
from utils.errors import (
    AnchorNotFoundError,
    ConfigError,
    SchemaVersionError,
    SessionExistsError,
    SessionLockedError,
    SessionNotFoundError,
    TraceClosedError,
    TraceCorruptError,
)


logger = logging.getLogger(__name__)

SESSION_ID_PATTERN = re.compile(r"^[A-Za-z0-9][A-Za-z0-9._-]*$")


def utc_now() -> datetime:
    return datetime.now(timezone.utc)


class SessionTrace:
    """
    An open, writable session trace.

    Every append is flushed before it returns. Sequence numbers are
    contiguous from 0; no existing line is ever rewritten.
    """

    def __init__(self, session_id: str, path: Path, next_seq: int, lock_path: Path, clock, fsync: bool):
        self.session_id = session_id
        self.path = path
        self.next_seq = next_seq
        self.lock_path = lock_path
        self.clock = clock
        self.fsync = fsync
        self.closed = False
        # Events already in the file when this handle was opened, plus the
        # session-start or session-resume event written by the store
        self.initial_events = []
        self._file = open(path, "a", encoding="utf-8")

    def append_event(self, event_type, payload: dict = None) -> TraceEvent:
        """
        Persist one event with the next sequence number.

        :param event_type: EventType or its string value
        :param payload: JSON-serialisable payload
        :return: the event as written (re-read from its serialised line)
        """

        if self.closed:
            raise TraceClosedError(f"Trace {self.session_id} is closed")

        event = TraceEvent(
            seq=self.next_seq,
            timestamp=self.clock().isoformat(),
            session_id=self.session_id,
            type=EventType(event_type),
            payload=payload or {},
        )

        serialised = json.dumps(event.to_dict(), ensure_ascii=False, sort_keys=True)

        try:
            serialised.encode("utf-8")
        except UnicodeEncodeError:
            # Lone surrogates have no UTF-8 form; keep them as JSON escapes
            serialised = json.dumps(event.to_dict(), sort_keys=True)

        # Offset to roll back to if the write fails half way
        start_offset = self._file.tell()

        try:
            self._file.write(serialised + "\n")
            self._file.flush()

            if self.fsync:
                os.fsync(self._file.fileno())

        except OSError:
            try:
                self._file.truncate(start_offset)
            except OSError as truncate_error:
                logger.error("Could not roll back partial write to %s: %s", self.path, truncate_error)
            raise

        self.next_seq += 1

        return TraceEvent.from_dict(json.loads(serialised))

    def close(self):
        if self.closed:
            return

        self.closed = True
        self._file.close()

        try:
            self.lock_path.unlink()
        except FileNotFoundError:
            pass

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc_value, traceback):
        self.close()


class JsonlTraceStore(TraceStore):
    """
    JSON Lines trace storage implementation.
    """

    def __init__(self, trace_dir, clock=utc_now, fsync: bool = False):
        """
        :param trace_dir: directory holding <session_id>.jsonl files
        :param clock: callable returning the timestamp for each event
        :param fsync: also fsync after each flush
        """
        self.trace_dir = Path(trace_dir)
        self.clock = clock
        self.fsync = fsync

    def trace_path(self, session_id: str) -> Path:
        if not SESSION_ID_PATTERN.match(session_id or ""):
            raise ConfigError(f"Invalid session id: {session_id!r}")

        return self.trace_dir / f"{session_id}.jsonl"

    def lock_path(self, session_id: str) -> Path:
        return self.trace_dir / f"{session_id}.lock"

    def exists(self, session_id: str) -> bool:
        return self.trace_path(session_id).exists()

    # -------------------- WRITERS --------------------

    def _acquire_lock(self, session_id: str) -> Path:
        """
        Create the lock file exclusively. A lock left by a dead process is taken over.
        """

        lock_path = self.lock_path(session_id)

        for _ in range(2):
            try:
                descriptor = os.open(lock_path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
            except FileExistsError:
                if self._lock_is_stale(lock_path):
                    logger.warning("Removing stale lock %s", lock_path)
                    lock_path.unlink(missing_ok=True)
                    continue
                raise SessionLockedError(f"Session {session_id} is being written by another process")

            with os.fdopen(descriptor, "w") as lock_file:
                lock_file.write(str(os.getpid()))

            return lock_path

        raise SessionLockedError(f"Could not lock session {session_id}")

    def _lock_is_stale(self, lock_path: Path) -> bool:
        try:
            owner_pid = int(lock_path.read_text().strip())
        except (OSError, ValueError):
            return False

        if owner_pid == os.getpid():
            return False

        try:
            os.kill(owner_pid, 0)
        except ProcessLookupError:
            return True
        except PermissionError:
            return False

        return False

    def create_session(self, session_id: str, start_payload: dict) -> SessionTrace:
        path = self.trace_path(session_id)
        self.trace_dir.mkdir(parents=True, exist_ok=True)

        lock_path = self._acquire_lock(session_id)

        if path.exists():
            lock_path.unlink(missing_ok=True)
            raise SessionExistsError(f"Session {session_id} already has a trace")

        trace = SessionTrace(session_id, path, 0, lock_path, self.clock, self.fsync)

        payload = dict(start_payload)
        payload["schema_version"] = TRACE_SCHEMA_VERSION
        trace.initial_events = [trace.append_event(EventType.SESSION_START, payload)]

        logger.info("Started session %s at %s", session_id, path)

        return trace

    def resume_session(self, session_id: str, resume_payload: dict = None) -> SessionTrace:
        path = self.trace_path(session_id)

        if not path.exists():
            raise SessionNotFoundError(f"Unknown session: {session_id}")

        lock_path = self._acquire_lock(session_id)

        try:
            events = self.read_events(session_id)
        except Exception:
            lock_path.unlink(missing_ok=True)
            raise

        trace = SessionTrace(session_id, path, events[-1].seq + 1, lock_path, self.clock, self.fsync)
        trace.initial_events = events + [trace.append_event(EventType.SESSION_RESUME, resume_payload or {})]

        logger.info("Resumed session %s at seq %d", session_id, trace.next_seq - 1)

        return trace

    # -------------------- READERS --------------------

    def read_events(self, session_id: str) -> list:
        """
        Read and validate a whole trace.

        :return: list of TraceEvent in seq order
        :raises TraceCorruptError: on a truncated or undecodable line, a seq gap,
            or a first event that is not session-start
        """

        path = self.trace_path(session_id)

        if not path.exists():
            raise SessionNotFoundError(f"Unknown session: {session_id}")

        try:
            raw_bytes = path.read_bytes()
        except OSError as error:
            raise SessionNotFoundError(f"Cannot read trace {path}: {error}") from error

        return self.parse_trace(raw_bytes, session_id)

    def parse_trace(self, raw_bytes: bytes, session_id: str) -> list:
        events = []
        last_good_seq = -1

        try:
            text = raw_bytes.decode("utf-8")
        except UnicodeDecodeError as error:
            raise TraceCorruptError(f"Trace is not valid UTF-8: {error}", last_good_seq) from error

        # Split on "\n" only; payload text may hold other line separators
        lines = text.split("\n")
        complete_lines, tail = lines[:-1], lines[-1]

        if tail:
            complete_lines.append(None)

        for line in complete_lines:
            if line is None:
                raise TraceCorruptError("Truncated final line", last_good_seq)

            try:
                event = TraceEvent.from_dict(json.loads(line))
            except (ValueError, KeyError, TypeError) as error:
                raise TraceCorruptError(f"Undecodable event after seq {last_good_seq}: {error}", last_good_seq) from error

            if event.seq != last_good_seq + 1:
                raise TraceCorruptError(f"Expected seq {last_good_seq + 1}, found {event.seq}", last_good_seq)

            if event.session_id != session_id:
                raise TraceCorruptError(f"Event {event.seq} belongs to session {event.session_id}", last_good_seq)

            if event.seq == 0:
                if event.type is not EventType.SESSION_START:
                    raise TraceCorruptError("First event is not session-start", last_good_seq)

                schema_version = event.payload.get("schema_version")

                if not isinstance(schema_version, int) or schema_version > TRACE_SCHEMA_VERSION:
                    raise SchemaVersionError(f"Unsupported trace schema version: {schema_version!r}")

            events.append(event)
            last_good_seq = event.seq

        if not events:
            raise TraceCorruptError("Trace is empty", last_good_seq)

        return events

    def resolve_anchor(self, session_id: str, seq: int) -> TraceEvent:
        return resolve_anchor(self.read_events(session_id), seq)


def resolve_anchor(events: list, seq: int) -> TraceEvent:
    """
    Look up an event by seq within one session's log only.
    """

    if isinstance(seq, int) and 0 <= seq < len(events) and events[seq].seq == seq:
        return events[seq]

    raise AnchorNotFoundError(seq)
