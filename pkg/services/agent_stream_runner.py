# This service wraps an agent's line-delimited JSON stream into a traced session
#
# Adapter schema v1, one JSON object per line:
#   {"intent": "..."}                                   stated intent
#   {"verb": "...", "target": "...", "note": "...",
#    "outcome": "...", "evidence": "..."}               roster signal / tool call
#   {"output": "..."}                                   agent output text
#   {"turn": "end"}                                     turn boundary

import logging
from dataclasses import dataclass
from functools import partial

from models.belief import Outcome, UseRecord
from models.trace_event import EventType, RosterSignal, RosterVerb
from services.pattern_selector import PatternSelector
from utils.errors import FutonError
from utils.json_parser import parse_json_object


logger = logging.getLogger(__name__)

LIBRARY_PREFIX = "library/"

# Library maintenance verbs that count as evidence for their pattern
EVIDENCE_VERBS = {
    "pattern-update": EventType.PATTERN_UPDATE,
    "pattern-implement": EventType.PATTERN_IMPLEMENT,
}

# Longest slice of a rejected line kept in its observation event
RAW_EXCERPT_LENGTH = 200

RECORD_KEYS = ("intent", "verb", "output", "turn")

ROSTER_VERBS = {roster_verb.value for roster_verb in RosterVerb}


class StreamLineError(ValueError):
    """
    A stream line that cannot be mapped to events.
    """


def parse_outcome(outcome_value) -> Outcome:
    try:
        return Outcome(outcome_value)
    except ValueError as error:
        raise StreamLineError(f"unknown outcome {outcome_value!r}") from error


def printable_excerpt(raw_line: str) -> str:
    """
    Leading slice of a rejected line, with anything UTF-8 cannot carry
    (lone surrogates) replaced.
    """

    excerpt = raw_line.strip()[:RAW_EXCERPT_LENGTH]
    return excerpt.encode("utf-8", errors="replace").decode("utf-8")


@dataclass
class RunSummary:
    lines: int = 0
    rejected: int = 0
    turns: int = 0
    selections: int = 0
    uses: int = 0


class AgentStreamRunner:
    """
    Maps agent stream records to trace events.

    Malformed or unknown records never stop the run; each becomes an
    observation event carrying a warning.
    """

    def __init__(self, library, session, seed: int = 0, explore: bool = False):
        """
        :param library: PatternLibrary the agent selects from
        :param session: TracedSession to append to
        :param seed: seed recorded in the PSRs this run writes
        :param explore: force explore mode for recorded selections
        """
        self.library = library
        self.session = session
        self.seed = seed
        self.explore = explore
        self.selector = PatternSelector(library)
        self.summary = RunSummary()

        self.current_intent = ""
        self._reset_turn()

    def _reset_turn(self):
        self.turn_output_length = 0
        self.turn_candidate_g = []
        # pattern id -> seq of its pattern-select in this turn
        self.turn_selections = {}
        self.turn_open = False

    def _record(self, event_type, payload: dict):
        self.turn_open = True
        return self.session.record(event_type, payload)

    # -------------------- STREAM --------------------

    def run(self, lines) -> RunSummary:
        """
        Consume a whole stream, then close any open turn.

        :param lines: iterable of raw text lines
        :return: RunSummary
        """

        for line_number, raw_line in enumerate(lines, start=1):
            self.process_line(raw_line, line_number)

        if self.turn_open:
            self.end_turn()

        return self.summary

    def process_line(self, raw_line: str, line_number: int = 0):
        if not raw_line or not raw_line.strip():
            return

        self.summary.lines += 1
        record = parse_json_object(raw_line)

        try:
            if record is None:
                raise StreamLineError("line is not a JSON object")

            self.dispatch(record)

        except (StreamLineError, FutonError, ValueError) as error:
            self.reject(raw_line, line_number, str(error))

    def dispatch(self, record: dict):
        """
        Handle the keys of one record in adapter order: intent, verb, output, turn.

        The whole record is checked before its first event is written, so a
        rejected record leaves only its warning in the trace.
        """

        if not any(key in record for key in RECORD_KEYS):
            raise StreamLineError("record has none of intent, verb, output, turn")

        if "turn" in record and record["turn"] != "end":
            raise StreamLineError(f"unknown turn marker {record['turn']!r}")

        write_signal = self.plan_signal(record) if "verb" in record else None

        if "intent" in record:
            self.current_intent = str(record["intent"])
            self._record(EventType.INTENT, {"text": self.current_intent})

        if write_signal is not None:
            write_signal()

        if "output" in record:
            output_text = str(record["output"])
            self.turn_output_length += len(output_text)
            self._record(EventType.OBSERVATION, {"source": "agent-output", "output_length": len(output_text)})

        if "turn" in record:
            self.end_turn()

    def reject(self, raw_line: str, line_number: int, message: str):
        logger.warning("Stream line %d rejected: %s", line_number, message)
        self.summary.rejected += 1
        self._record(EventType.OBSERVATION, {
            "warning": message,
            "line": line_number,
            "raw": printable_excerpt(raw_line),
        })

    # -------------------- SIGNALS --------------------

    def resolve_target(self, target) -> str:
        """
        Accept `<id>` or `library/<id>` for any pattern in the library.
        """

        if not isinstance(target, str) or not target:
            raise StreamLineError("signal needs a target pattern")

        if self.library.get(target) is None and target.startswith(LIBRARY_PREFIX):
            target = target[len(LIBRARY_PREFIX):]

        if self.library.get(target) is None or target not in self.session.beliefs.patterns:
            raise StreamLineError(f"unknown pattern {target}")

        return target

    def plan_signal(self, record: dict):
        """
        Validate a verb record without writing anything.

        :return: callable that writes the signal's events
        """

        verb = str(record["verb"])
        note = str(record.get("note") or "")
        target = record.get("target")

        if verb in ROSTER_VERBS:
            signal = RosterSignal(
                verb=RosterVerb(verb),
                target=self.resolve_target(target) if target else None,
                note=note,
            )

            if signal.verb is RosterVerb.PATTERN_SELECT:
                return partial(self.select, signal.target, signal.note, inferred=False)

            if signal.verb is RosterVerb.PATTERN_USE:
                outcome = parse_outcome(record.get("outcome", Outcome.UNKNOWN.value))
                return partial(self.use, signal.target, signal.note, outcome, record.get("evidence"))

            return partial(self._record, EventType.MUSN_PLAN, {"note": signal.note})

        if verb in EVIDENCE_VERBS:
            return partial(self._record, EVIDENCE_VERBS[verb], {"pattern_id": self.resolve_target(target), "note": note})

        # wide-search and anything else the agent calls is only recorded
        return partial(self._record, EventType.TOOL_CALL, {"verb": verb, "target": target, "note": note})

    def select(self, pattern_id: str, note: str, inferred: bool) -> int:
        """
        Write psr + pattern-select (+ pattern-read unless inferred).

        :return: seq of the pattern-select event
        """

        selection = self.selector.selection_for_target(
            self.session,
            self.current_intent,
            pattern_id,
            note,
            seed=self.seed,
            explicit_explore=self.explore,
        )

        psr_event = self._record(EventType.PSR, selection.to_dict())
        select_event = self._record(EventType.PATTERN_SELECT, {
            "pattern_id": pattern_id,
            "psr_seq": psr_event.seq,
            "note": note,
            "inferred": inferred,
        })

        if not inferred:
            self._record(EventType.PATTERN_READ, {"pattern_id": pattern_id, "note": note})

        self.turn_selections[pattern_id] = select_event.seq
        self.turn_candidate_g = [candidate.G for candidate in selection.candidates]
        self.summary.selections += 1

        return select_event.seq

    def use(self, pattern_id: str, note: str, outcome: Outcome, evidence):
        anchor = self.turn_selections.get(pattern_id)

        if anchor is None:
            anchor = self.select(pattern_id, "inferred from pattern-use", inferred=True)

        self._record(EventType.PATTERN_USE, {"pattern_id": pattern_id, "note": note})

        use_record = UseRecord(
            pattern_id=pattern_id,
            anchor=anchor,
            outcome=outcome,
            evidence_note=str(evidence or note),
            belief_delta=UseRecord.expected_delta(outcome),
        )
        self._record(EventType.PUR, use_record.to_dict())
        self.summary.uses += 1

    # -------------------- TURNS --------------------

    def end_turn(self):
        self.session.record(EventType.TURN_BOUNDARY, {
            "turn": self.session.fold.turn,
            "output_length": self.turn_output_length,
            "candidate_g": self.turn_candidate_g,
        })
        self.session.snapshot()
        self.summary.turns += 1
        self._reset_turn()
