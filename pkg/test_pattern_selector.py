import pytest

from config.settings import EngineConfig
from conftest import pattern_text, write_library
from models.belief import SelectionMode
from services.pattern_library_loader import PatternLibraryLoader
from services.pattern_selector import PatternSelector
from utils.errors import ConfigError, NoCandidatesError, UnknownPatternError


BLAST = "fulab/blast-radius"
COMMAND = "p4ng/agent-command-pattern"


def test_symmetric_fixtures_are_chosen_evenly(new_session, fixture_library):
    session = new_session("even")
    selector = PatternSelector(fixture_library)

    chosen = [selector.build_selection(session, "", seed).chosen for seed in range(1_000)]

    assert chosen.count(BLAST) / len(chosen) == pytest.approx(0.5, abs=0.05)


def test_build_selection_writes_nothing(new_session, fixture_library):
    session = new_session("quiet")

    PatternSelector(fixture_library).build_selection(session, "anything", 0)

    assert session.trace.next_seq == 1


def test_mode_precedence(new_session, fixture_library):
    session = new_session("modes")
    selector = PatternSelector(fixture_library)

    assert selector.selection_mode(session, explicit_explore=False, greedy=False) is SelectionMode.EXPLORE
    assert selector.selection_mode(session, explicit_explore=False, greedy=True) is SelectionMode.GREEDY
    assert selector.selection_mode(session, explicit_explore=True, greedy=True) is SelectionMode.EXPLORE


def test_tau_override_is_recorded(new_session, fixture_library):
    session = new_session("tau")

    record, _ = PatternSelector(fixture_library).select(session, "", 4, tau=0.25)

    assert record.tau_used == 0.25
    assert session.beliefs.tau == 1.0


@pytest.mark.parametrize("tau", [0.0, -1.0, float("nan"), float("inf")])
def test_tau_override_must_be_positive_and_finite(new_session, fixture_library, tau):
    session = new_session("bad-tau")

    with pytest.raises(ConfigError):
        PatternSelector(fixture_library).build_selection(session, "", 0, tau=tau)

    assert session.trace.next_seq == 1


def test_no_candidates(tmp_path, new_session):
    root = write_library(tmp_path / "stubs", {"x/stub": pattern_text("x/stub", next_steps=False)})
    library = PatternLibraryLoader().load_library(root)
    session = new_session("empty", library=library)
    selector = PatternSelector(library)

    assert selector.selection_mode(session, explicit_explore=False, greedy=False) is SelectionMode.EXPLORE

    with pytest.raises(NoCandidatesError):
        selector.build_selection(session, "", 0)

    assert selector.build_selection(session, "", 0, explicit_explore=True).chosen == "x/stub"


def test_automatic_explore_never_offers_stubs(tmp_path, new_session):
    root = write_library(tmp_path / "mixed", {
        "x/stub": pattern_text("x/stub", next_steps=False),
        "x/known": pattern_text("x/known"),
    })
    library = PatternLibraryLoader().load_library(root)
    session = new_session("auto", library=library)
    selector = PatternSelector(library)

    for seed in range(8):
        record, _ = selector.select(session, "", seed)

        assert record.mode is SelectionMode.EXPLORE
        assert [candidate.pattern_id for candidate in record.candidates] == ["x/known"]
        assert record.candidates[0].components["epistemic"] < 0


def test_agent_choice_of_ineligible_stub_extends_table(tmp_path, new_session):
    root = write_library(tmp_path / "mixed", {
        "x/stub": pattern_text("x/stub", next_steps=False),
        "x/known": pattern_text("x/known"),
    })
    library = PatternLibraryLoader().load_library(root)
    session = new_session("agent", library=library, engine_config=EngineConfig(min_samples=0))

    record = PatternSelector(library).selection_for_target(session, "", "x/stub", "", seed=0)

    assert [candidate.pattern_id for candidate in record.candidates] == ["x/known", "x/stub"]
    assert record.chosen == "x/stub"
    assert record.rationale == "agent selected x/stub"
    assert sum(candidate.probability for candidate in record.candidates) == pytest.approx(1.0)


def test_agent_choice_of_unknown_pattern(new_session, fixture_library):
    session = new_session("unknown")

    with pytest.raises(UnknownPatternError):
        PatternSelector(fixture_library).selection_for_target(session, "", "nobody/knows", "", seed=0)
