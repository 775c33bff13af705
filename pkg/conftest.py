import shutil
from pathlib import Path

import pytest

from config.settings import EngineConfig
from services.jsonl_trace_store import JsonlTraceStore
from services.pattern_library_loader import PatternLibraryLoader
from services.traced_session import open_session


LIBRARY_DIR = Path(__file__).parent / "library"

AGENT_COMMAND_PATH = LIBRARY_DIR / "p4ng" / "agent-command-pattern.arg"
BLAST_RADIUS_PATH = LIBRARY_DIR / "fulab" / "blast-radius.arg"
TIMEBOX_PATH = LIBRARY_DIR / "p4ng" / "timebox-the-core-agent-prime.arg"


def pattern_text(pattern_id, next_steps=True, evidence=False, context="A shared setting for tests."):
    """
    Small well-formed pattern whose maturity follows from the two flags.
    """

    lines = [
        f"@arg {pattern_id}",
        "",
        f"! conclusion: Summary of {pattern_id}.",
        "",
        f"  + context: {context}",
        "  + if: Something pulls one way.",
        "  + however: Something else pulls the other way.",
        "  + then: Do the balancing thing.",
        "  + because: It resolves the pull.",
    ]

    if evidence:
        lines.append("  + evidence: Seen working in an earlier session.")

    if next_steps:
        lines.append("  + next-steps: Try it on the next change.")

    return "\n".join(lines) + "\n"


def write_library(root: Path, patterns: dict) -> Path:
    """
    :param patterns: pattern id -> source text
    """

    root.mkdir(parents=True, exist_ok=True)

    for pattern_id, text in patterns.items():
        path = root / f"{pattern_id}.arg"
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")

    return root


@pytest.fixture
def agent_command_text():
    return AGENT_COMMAND_PATH.read_text(encoding="utf-8")


@pytest.fixture
def blast_radius_text():
    return BLAST_RADIUS_PATH.read_text(encoding="utf-8")


@pytest.fixture
def timebox_text():
    return TIMEBOX_PATH.read_text(encoding="utf-8")


@pytest.fixture
def fixture_library_dir(tmp_path):
    """
    Library holding the agent-command and blast-radius patterns.
    """

    root = tmp_path / "library"

    for source in (AGENT_COMMAND_PATH, BLAST_RADIUS_PATH):
        target = root / source.relative_to(LIBRARY_DIR)
        target.parent.mkdir(parents=True, exist_ok=True)
        shutil.copy(source, target)

    return root


@pytest.fixture
def fixture_library(fixture_library_dir):
    return PatternLibraryLoader().load_library(fixture_library_dir)


@pytest.fixture
def trace_dir(tmp_path):
    return tmp_path / "traces"


@pytest.fixture
def trace_store(trace_dir):
    return JsonlTraceStore(trace_dir)


@pytest.fixture
def new_session(trace_store, fixture_library):
    """
    Factory for sessions over the fixture library.
    """

    opened = []

    def factory(session_id="s1", library=None, engine_config=None, resume=None):
        session = open_session(
            trace_store,
            session_id,
            library or fixture_library,
            engine_config or EngineConfig(),
            resume=resume,
        )
        opened.append(session)
        return session

    yield factory

    for session in opened:
        session.close()
