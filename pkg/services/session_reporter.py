# This service summarises a stored session purely by replaying its trace
#
# Which pattern now? (PSRs)  Did it work? (PURs)

from dataclasses import dataclass

import pandas as pd

from services.session_replayer import replay_events


PATTERN_COLUMNS = ["pattern_id", "maturity", "uses", "successes", "failures", "evidence_events"]
TURN_COLUMNS = ["turn", "kind", "seq", "pattern_id", "detail"]


@dataclass
class SessionReport:
    session_id: str
    patterns: pd.DataFrame
    turns: pd.DataFrame
    tau: float
    last_seq: int
    ended: bool

    def render(self) -> str:
        lines = [f"Session {self.session_id} (last seq {self.last_seq}{', ended' if self.ended else ''})", ""]

        lines.append("Patterns:")
        if self.patterns.empty:
            lines.append("  (no pattern activity)")
        else:
            lines.append(self.patterns.to_string(index=False))

        lines.append("")
        lines.append("PSR / PUR by turn:")
        if self.turns.empty:
            lines.append("  (no selections)")
        else:
            lines.append(self.turns.to_string(index=False))

        lines.append("")
        lines.append(f"Final tau: {self.tau:.4f}")

        return "\n".join(lines)


class SessionReporter:
    """
    Builds SessionReports. Never writes to the trace.
    """

    def __init__(self, trace_store):
        """
        :param trace_store: TraceStore to read sessions from
        """
        self.trace_store = trace_store

    def build_report(self, session_id: str) -> SessionReport:
        fold = replay_events(self.trace_store.read_events(session_id))
        beliefs = fold.beliefs

        touched = {entry.pattern_id for entry in fold.turn_log}

        pattern_rows = [
            {
                "pattern_id": pattern_id,
                "maturity": beliefs.maturity.get(pattern_id, ""),
                "uses": belief.uses,
                "successes": belief.successes,
                "failures": belief.failures,
                "evidence_events": belief.evidence_events,
            }
            for pattern_id, belief in sorted(beliefs.patterns.items())
            if pattern_id in touched or belief.uses or belief.evidence_events
        ]

        turn_rows = [
            {
                "turn": entry.turn,
                "kind": entry.kind,
                "seq": entry.seq,
                "pattern_id": entry.pattern_id,
                "detail": entry.detail,
            }
            for entry in fold.turn_log
        ]

        return SessionReport(
            session_id=session_id,
            patterns=pd.DataFrame(pattern_rows, columns=PATTERN_COLUMNS),
            turns=pd.DataFrame(turn_rows, columns=TURN_COLUMNS),
            tau=beliefs.tau,
            last_seq=fold.last_seq,
            ended=fold.ended,
        )
