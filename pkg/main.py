# -------------------- Imports --------------------
import argparse
import logging
import math
import sys
from pathlib import Path

import pandas as pd

from config.settings import (
    FUTON_CONFIG,
    FUTON_LIBRARY,
    FUTON_TRACE_DIR,
    PATTERN_FILE_EXTENSION,
    configure_logging,
    load_engine_config,
    parse_assignments,
    read_config_file,
)
from models.trace_event import RosterVerb
from services.agent_stream_runner import LIBRARY_PREFIX, AgentStreamRunner
from services.jsonl_trace_store import JsonlTraceStore
from services.maturity_classifier import MaturityClassifier
from services.pattern_library_loader import PatternLibraryLoader
from services.pattern_linter import LENIENT, STRICT, PatternLinter
from services.pattern_parser import PatternParser
from services.pattern_selector import PatternSelector
from services.session_reporter import SessionReporter
from services.session_simulator import SessionSimulator, SimConfig, compare_replay
from services.traced_session import open_session
from utils.errors import EXIT_IO, EXIT_OK, EXIT_USAGE, EXIT_VALIDATION, FutonError


logger = logging.getLogger(__name__)


# -------------------- Roster help --------------------

ROSTER_HELP = f"""Tool roster: emit one signal each time you take the matching action.
  {RosterVerb.PATTERN_SELECT.value} {LIBRARY_PREFIX}<pattern>   <why you want to read it>
  {RosterVerb.PATTERN_USE.value}    {LIBRARY_PREFIX}<pattern>   <where you will apply it>
  {RosterVerb.MUSN_PLAN.value}      <plan outline>
  wide-search    <query>   (recorded as a tool call)

Stream adapter (one JSON object per line):
  {{"intent": "<what you are trying to do>"}}
  {{"verb": "pattern-select", "target": "{LIBRARY_PREFIX}<pattern>", "note": "<why>"}}
  {{"verb": "pattern-use", "target": "{LIBRARY_PREFIX}<pattern>", "note": "<where>", "outcome": "success|failure|unknown"}}
  {{"verb": "musn-plan", "note": "<plan>"}}
  {{"output": "<text you produced>"}}
  {{"turn": "end"}}"""


# -------------------- Helpers --------------------

def trace_store_for(args) -> JsonlTraceStore:
    return JsonlTraceStore(args.trace_dir)


def engine_config_for(args):
    return load_engine_config(args.config or FUTON_CONFIG, parse_assignments(args.set))


def load_library(args):
    library = PatternLibraryLoader().load_library(args.library)

    for diagnostic in library.errors:
        logger.warning("%s", diagnostic)

    return library


def positive_tau(raw_value: str) -> float:
    """
    argparse type for --tau: a finite number above zero.
    """

    try:
        tau = float(raw_value)
    except ValueError as error:
        raise argparse.ArgumentTypeError(f"tau must be a number, got {raw_value!r}") from error

    if not math.isfinite(tau) or tau <= 0:
        raise argparse.ArgumentTypeError(f"tau must be positive and finite, got {raw_value}")

    return tau


def lint_targets(paths: list) -> list:
    """
    Expand directories to their pattern files; missing paths stay as given
    so they are reported as unreadable.
    """

    targets = []

    for raw_path in paths:
        path = Path(raw_path)

        if path.is_dir():
            targets.extend(sorted(path.rglob(f"*{PATTERN_FILE_EXTENSION}")))
        else:
            targets.append(path)

    return targets


# -------------------- Commands --------------------

def cmd_lint(args) -> int:
    parser = PatternParser()
    linter = PatternLinter()
    mode = STRICT if args.strict else LENIENT

    exit_status = EXIT_OK

    for path in lint_targets(args.paths):
        try:
            source_text = path.read_text(encoding="utf-8")
        except (OSError, UnicodeDecodeError) as error:
            print(f"{path}:1: error [io-unreadable] {error}")
            exit_status = EXIT_IO
            continue

        parse_result = parser.parse_pattern(source_text, str(path))
        diagnostics = list(parse_result.diagnostics)

        if parse_result.ok:
            diagnostics.extend(linter.lint_pattern(parse_result.document, mode))

        for diagnostic in diagnostics:
            print(diagnostic)

        if any(diagnostic.is_error for diagnostic in diagnostics):
            exit_status = max(exit_status, EXIT_VALIDATION)
        else:
            print(f"{path}: ok")

    return exit_status


def cmd_classify(args) -> int:
    library = load_library(args)
    classifier = MaturityClassifier()

    rows = []

    for pattern_id, document in library.patterns.items():
        has_next_steps, has_evidence = classifier.field_presence(document)
        maturity_state = classifier.classify_maturity(document)

        rows.append({
            "pattern_id": pattern_id,
            "maturity": maturity_state.value,
            "prior": classifier.precision_prior(maturity_state),
            "next_steps": has_next_steps,
            "evidence": has_evidence,
        })

    if rows:
        print(pd.DataFrame(rows).to_string(index=False))
    else:
        print(f"No loadable patterns in {library.root}")

    return EXIT_VALIDATION if library.errors else EXIT_OK


def cmd_select(args) -> int:

    # ---------- STEP 1: Library and session ----------

    library = load_library(args)
    session = open_session(trace_store_for(args), args.session, library, engine_config_for(args))

    # ---------- STEP 2: Score, sample and record ----------

    with session:
        record, _ = PatternSelector(library).select(
            session,
            args.intent,
            args.seed,
            explicit_explore=args.explore,
            tau=args.tau,
            greedy=args.greedy,
        )

    # ---------- STEP 3: Print candidate table ----------

    candidate_table = pd.DataFrame([
        {
            "pattern_id": candidate.pattern_id,
            "maturity": candidate.maturity,
            "G": round(candidate.G, 4),
            "probability": round(candidate.probability, 4),
        }
        for candidate in record.candidates
    ])

    print(f"Intent: {record.intent}")
    print(f"Mode: {record.mode.value}, tau={record.tau_used:.4f}, seed={record.rng_seed}")
    print(candidate_table.to_string(index=False))
    print(f"Chosen: {record.chosen}")
    print(f"Rationale: {record.rationale}")

    return EXIT_OK


def stdin_lines():
    """
    Agent stream lines from stdin. Bytes that are not UTF-8 become U+FFFD
    instead of stopping the run.
    """

    binary_stdin = getattr(sys.stdin, "buffer", None)

    if binary_stdin is None:
        return sys.stdin

    return (raw_line.decode("utf-8", errors="replace") for raw_line in binary_stdin)


def cmd_run(args) -> int:
    library = load_library(args)
    session = open_session(
        trace_store_for(args),
        args.session,
        library,
        engine_config_for(args),
        resume=bool(args.resume),
    )

    with session:
        summary = AgentStreamRunner(library, session, seed=args.seed, explore=args.explore).run(stdin_lines())

    print(
        f"Session {args.session}: {summary.lines} lines, {summary.turns} turns, "
        f"{summary.selections} selections, {summary.uses} uses, {summary.rejected} rejected"
    )

    return EXIT_OK


def cmd_report(args) -> int:
    report = SessionReporter(trace_store_for(args)).build_report(args.session)
    print(report.render())
    return EXIT_OK


def cmd_sim(args) -> int:
    library = load_library(args)

    # ---------- STEP 1: Resolve sim config ----------

    values = {}
    config_path = args.config or FUTON_CONFIG

    if config_path:
        values.update(read_config_file(config_path))

    values.update(parse_assignments(args.set))

    for assignment in args.true_success or []:
        pattern_id, _, rate = assignment.partition("=")
        values[f"true_success.{pattern_id.strip()}"] = rate

    for key in ("turns", "seed", "intent"):
        if getattr(args, key) is not None:
            values[key] = getattr(args, key)

    if args.explore:
        values["explore"] = True

    values["session_id"] = args.session

    sim_config = SimConfig.from_values(library, values)

    # ---------- STEP 2: Simulate and verify replay ----------

    report = SessionSimulator(args.trace_dir).run_simulation(sim_config)
    replay_matches = compare_replay(report)

    # ---------- STEP 3: Emit summary ----------

    if args.output:
        Path(args.output).write_text(report.to_json(replay_matches=replay_matches) + "\n", encoding="utf-8")
        print(f"Wrote simulation summary to {args.output}")
    else:
        print(report.window_frequencies.to_string())
        print(f"Final tau: {report.final_beliefs.tau:.4f}")

    print(f"Replay matches live state: {replay_matches}")

    return EXIT_OK if replay_matches else EXIT_VALIDATION


def cmd_roster_help(args) -> int:
    print(ROSTER_HELP)
    return EXIT_OK


# -------------------- Argument parsing --------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--library", default=FUTON_LIBRARY, help="pattern library root")
    common.add_argument("--trace-dir", default=FUTON_TRACE_DIR, help="session trace directory")
    common.add_argument("--config", default=None, help="key=value engine config file")
    common.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="engine config override")
    common.add_argument("--log-level", default=None, help="logging level name")

    parser = argparse.ArgumentParser(prog="futon", description="Pattern-guided agent sessions")
    commands = parser.add_subparsers(dest="command", required=True)

    lint = commands.add_parser("lint", parents=[common], help="check pattern files")
    lint.add_argument("paths", nargs="+")
    lint.add_argument("--strict", action="store_true")
    lint.set_defaults(handler=cmd_lint)

    classify = commands.add_parser("classify", parents=[common], help="show maturity of each pattern")
    classify.set_defaults(handler=cmd_classify)

    select = commands.add_parser("select", parents=[common], help="select a pattern for an intent")
    select.add_argument("--intent", required=True)
    select.add_argument("--session", required=True)
    select.add_argument("--seed", type=int, default=0)
    select.add_argument("--tau", type=positive_tau, default=None)
    select.add_argument("--explore", action="store_true")
    select.add_argument("--greedy", action="store_true")
    select.set_defaults(handler=cmd_select)

    run = commands.add_parser("run", parents=[common], help="trace an agent event stream from stdin")
    run.add_argument("--session", required=True)
    run.add_argument("--resume", action="store_true")
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--explore", action="store_true")
    run.set_defaults(handler=cmd_run)

    report = commands.add_parser("report", parents=[common], help="summarise a session")
    report.add_argument("--session", required=True)
    report.set_defaults(handler=cmd_report)

    sim = commands.add_parser("sim", parents=[common], help="run a synthetic agent session")
    sim.add_argument("--session", default="sim")
    sim.add_argument("--turns", type=int, default=None)
    sim.add_argument("--seed", type=int, default=None)
    sim.add_argument("--intent", default=None)
    sim.add_argument("--explore", action="store_true")
    sim.add_argument("--true-success", action="append", metavar="ID=P", help="ground-truth success rate")
    sim.add_argument("--output", default=None, help="write the JSON summary here")
    sim.set_defaults(handler=cmd_sim)

    roster_help = commands.add_parser("roster-help", help="print the agent tool roster")
    roster_help.set_defaults(handler=cmd_roster_help, log_level=None)

    return parser


# -------------------- Main --------------------

def main(argv=None) -> int:
    """
    Run one CLI command.

    :param argv: argument list (defaults to sys.argv[1:])
    :return: exit status: 0 ok, 1 validation, 2 usage, 3 io
    """

    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exit_request:
        return EXIT_OK if exit_request.code in (0, None) else EXIT_USAGE

    try:
        configure_logging(args.log_level)
        return args.handler(args)

    except FutonError as error:
        print(f"error [{error.rule}]: {error}", file=sys.stderr)
        return error.exit_status

    except OSError as error:
        print(f"error [io]: {error}", file=sys.stderr)
        return EXIT_IO


# -------------------- Entry Point --------------------

if __name__ == "__main__":
    sys.exit(main())
