# Synthetic agent: runs the select / apply / observe loop against a
# library with known per-pattern success rates, through the real trace.

import json
import logging
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from typing import Dict, List

import numpy as np
import pandas as pd

from config.settings import EngineConfig, parse_bool, read_config_file
from models.belief import BeliefState, Outcome, UseRecord
from models.trace_event import EventType
from services.jsonl_trace_store import JsonlTraceStore
from services.pattern_selector import PatternSelector
from services.session_replayer import replay
from services.traced_session import open_session
from utils.errors import ConfigError, FutonError


logger = logging.getLogger(__name__)

TRUE_SUCCESS_PREFIX = "true_success."

# Patterns without a configured rate succeed at this rate
DEFAULT_TRUE_SUCCESS = 0.5

WINDOW_TURNS = 100

SIM_EPOCH = datetime(2000, 1, 1, tzinfo=timezone.utc)


class LogicalClock:
    """
    One second per event from a fixed epoch, so reruns write identical bytes.
    """

    def __init__(self, start: datetime = SIM_EPOCH):
        self.current = start

    def __call__(self) -> datetime:
        now = self.current
        self.current = now + timedelta(seconds=1)
        return now


@dataclass
class SimConfig:
    library: object
    true_success: Dict[str, float] = field(default_factory=dict)
    turns: int = 500
    seed: int = 0
    intent: str = ""
    explore: bool = False
    session_id: str = "sim"
    success_length_mean: float = 400.0
    success_length_sd: float = 50.0
    failure_length_mean: float = 800.0
    failure_length_sd: float = 100.0
    engine_overrides: Dict[str, object] = field(default_factory=dict)

    def validate(self):
        if self.turns < 0:
            raise ConfigError(f"turns must be non-negative, got {self.turns}")

        for pattern_id, rate in self.true_success.items():
            if self.library.get(pattern_id) is None:
                raise ConfigError(f"true_success names unknown pattern {pattern_id}")

            if not 0.0 <= rate <= 1.0:
                raise ConfigError(f"true_success.{pattern_id} must lie in [0, 1], got {rate}")

        if min(self.success_length_sd, self.failure_length_sd) < 0:
            raise ConfigError("Output length standard deviations must be non-negative")

        return self

    def engine_config(self) -> EngineConfig:
        return EngineConfig().with_overrides(self.engine_overrides)

    def success_rate(self, pattern_id: str) -> float:
        return self.true_success.get(pattern_id, DEFAULT_TRUE_SUCCESS)

    @classmethod
    def from_values(cls, library, values: dict) -> "SimConfig":
        """
        Build from key=value text (config file or CLI flags).

        Engine keys become overrides; `true_success.<id>` keys fill the rate map.
        """

        engine_keys = set(EngineConfig.__dataclass_fields__)
        config = cls(library=library)
        true_success = {}
        engine_overrides = {}

        try:
            for key, raw_value in values.items():
                if key.startswith(TRUE_SUCCESS_PREFIX):
                    true_success[key[len(TRUE_SUCCESS_PREFIX):]] = float(raw_value)
                elif key in ("turns", "seed"):
                    setattr(config, key, int(raw_value))
                elif key == "explore":
                    config.explore = parse_bool(raw_value)
                elif key in ("intent", "session_id"):
                    setattr(config, key, str(raw_value))
                elif key.endswith("_length_mean") or key.endswith("_length_sd"):
                    if not hasattr(config, key):
                        raise ConfigError(f"Unknown sim config key: {key}")
                    setattr(config, key, float(raw_value))
                elif key in engine_keys:
                    engine_overrides[key] = raw_value
                else:
                    raise ConfigError(f"Unknown sim config key: {key}")
        except (TypeError, ValueError) as error:
            raise ConfigError(f"Invalid sim config value: {error}") from error

        config.true_success = true_success
        config.engine_overrides = engine_overrides

        # Surface bad engine values now rather than mid-run
        config.engine_config()

        return config.validate()

    @classmethod
    def from_file(cls, library, config_path: str, overrides: dict = None) -> "SimConfig":
        values = read_config_file(config_path)
        values.update(overrides or {})
        return cls.from_values(library, values)


@dataclass
class SimReport:
    config: SimConfig
    chosen: List[str]
    outcomes: List[str]
    window_frequencies: pd.DataFrame
    final_beliefs: BeliefState
    trace_store: JsonlTraceStore
    session_id: str

    @property
    def trace_path(self) -> str:
        return str(self.trace_store.trace_path(self.session_id))

    def window_frequency(self, pattern_id: str, window: int) -> float:
        """
        Selection frequency of a pattern in one window (negative index counts from the end).
        """

        if self.window_frequencies.empty:
            return 0.0

        return float(self.window_frequencies.iloc[window].get(pattern_id, 0.0))

    def to_dict(self) -> dict:
        windows = {
            str(window): {pattern_id: float(value) for pattern_id, value in row.items()}
            for window, row in self.window_frequencies.iterrows()
        }

        return {
            "session_id": self.session_id,
            "trace_path": self.trace_path,
            "turns": self.config.turns,
            "seed": self.config.seed,
            "window_turns": WINDOW_TURNS,
            "window_frequencies": windows,
            "chosen": list(self.chosen),
            "outcomes": list(self.outcomes),
            "final_beliefs": self.final_beliefs.to_dict(),
        }

    def to_json(self, **extra) -> str:
        """
        :param extra: additional top-level keys for the summary
        """
        return json.dumps({**self.to_dict(), **extra}, indent=2, sort_keys=True)


def window_frequencies(chosen: list, pattern_ids: list, window: int = WINDOW_TURNS) -> pd.DataFrame:
    """
    Per-window selection frequency of every pattern (rows: window index).
    """

    if not chosen:
        return pd.DataFrame(columns=pattern_ids, dtype=float)

    selections = pd.DataFrame({"turn": range(len(chosen)), "pattern_id": chosen})
    selections["window"] = selections["turn"] // window

    frequencies = pd.crosstab(selections["window"], selections["pattern_id"], normalize="index")

    return frequencies.reindex(columns=pattern_ids, fill_value=0.0).astype(float)


class SessionSimulator:
    """
    Drives whole sessions with Bernoulli outcomes.
    """

    def __init__(self, trace_dir):
        """
        :param trace_dir: directory the simulated session traces are written to
        """
        self.trace_dir = trace_dir

    def run_simulation(self, config: SimConfig) -> SimReport:
        """
        Each turn: select, draw the outcome, observe output length, write the
        pur and the turn boundary.

        :param config: validated SimConfig
        :return: SimReport
        """

        config.validate()

        trace_store = JsonlTraceStore(self.trace_dir, clock=LogicalClock())
        selector = PatternSelector(config.library)
        rng = np.random.default_rng(config.seed)

        chosen = []
        outcomes = []

        session = open_session(trace_store, config.session_id, config.library, config.engine_config(), resume=False)

        with session:
            for turn in range(config.turns):

                # ---------- STEP 1: Engine selects ----------

                selection_seed = int(rng.integers(0, 2**31 - 1))
                selection, select_event = selector.select(
                    session,
                    config.intent,
                    selection_seed,
                    explicit_explore=config.explore,
                )

                # ---------- STEP 2: Simulated agent applies it ----------

                succeeded = bool(rng.random() < config.success_rate(selection.chosen))
                outcome = Outcome.SUCCESS if succeeded else Outcome.FAILURE

                if succeeded:
                    length = rng.normal(config.success_length_mean, config.success_length_sd)
                else:
                    length = rng.normal(config.failure_length_mean, config.failure_length_sd)

                output_length = max(0, int(round(length)))

                # ---------- STEP 3: Record outcome and close the turn ----------

                session.record(EventType.PATTERN_USE, {"pattern_id": selection.chosen, "note": "simulated"})
                session.record(EventType.OBSERVATION, {"source": "simulator", "output_length": output_length})
                session.record(EventType.PUR, UseRecord(
                    pattern_id=selection.chosen,
                    anchor=select_event.seq,
                    outcome=outcome,
                    evidence_note=f"simulated {outcome.value}",
                    belief_delta=UseRecord.expected_delta(outcome),
                ).to_dict())
                session.record(EventType.TURN_BOUNDARY, {
                    "turn": turn,
                    "output_length": output_length,
                    "candidate_g": [candidate.G for candidate in selection.candidates],
                })
                session.snapshot()

                chosen.append(selection.chosen)
                outcomes.append(outcome.value)

            final_beliefs = session.beliefs

        logger.info("Simulated %d turns in session %s", config.turns, config.session_id)

        return SimReport(
            config=config,
            chosen=chosen,
            outcomes=outcomes,
            window_frequencies=window_frequencies(chosen, sorted(config.library.patterns)),
            final_beliefs=final_beliefs,
            trace_store=trace_store,
            session_id=config.session_id,
        )


def compare_replay(report: SimReport) -> bool:
    """
    True iff replaying the written trace reproduces the live final beliefs.
    """

    try:
        replayed_beliefs, _ = replay(report.trace_store, report.session_id)
    except FutonError as error:
        logger.warning("Replay of %s failed: %s", report.session_id, error)
        return False

    return replayed_beliefs == report.final_beliefs
