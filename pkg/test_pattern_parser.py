from dataclasses import replace
from itertools import combinations

import pytest

from conftest import pattern_text
from models.pattern import REQUIRED_FIELDS, RULES, Severity
from services.pattern_linter import LENIENT, STRICT, PatternLinter
from services.pattern_parser import PatternParser


def parse(text):
    return PatternParser().parse_pattern(text, "test.arg")


def errors(diagnostics):
    return [diagnostic for diagnostic in diagnostics if diagnostic.severity is Severity.ERROR]


def rules(diagnostics):
    return [diagnostic.rule for diagnostic in diagnostics]


# -------------------- Parsing --------------------

def test_parse_blast_radius(blast_radius_text):
    result = parse(blast_radius_text)

    assert result.ok
    document = result.document
    assert document.id == "fulab/blast-radius"
    assert document.summary == (
        "Clearly define the scope of impact from failure and provide a minimal rapid recovery plan."
    )
    assert document.context.startswith("A change or tool action could impact")
    assert document.then_clause.startswith("Emit a blast-radius event before risky actions")
    assert document.because_clause == "Declared boundaries shorten diagnosis time and reduce collateral damage."
    assert document.next_steps == (
        "Require blast-radius events for cross-futon changes; "
        "audit that the rollback scope matches actual artifacts.",
    )
    assert document.evidence == ()
    assert "header" not in document.metadata


def test_parse_agent_command_metadata(agent_command_text):
    document = parse(agent_command_text).document

    assert document.id == "p4ng/agent-command-pattern"
    assert document.title == "Agent Command Pattern"
    assert document.metadata["title"] == "Agent Command Pattern"
    assert document.metadata["audience"] == "futon developers, CS students, pattern agents"
    assert document.metadata["header"] == "flexiarg"
    assert document.next_steps[0].startswith("next[Log one concrete instance")


def test_parse_instantiated_by_without_conclusion(timebox_text):
    document = parse(timebox_text).document

    assert document.summary == ""
    assert document.metadata["instantiated-by"] == "Timebox the Core (Agent-Facing)"
    assert document.if_clause == "The agent attempts to complete a full inquiry loop."


def test_field_order_and_source_span(blast_radius_text):
    document = parse(blast_radius_text).document

    assert document.field_order == ("context", "if", "however", "then", "because", "next-steps")
    assert document.source.path == "test.arg"
    assert document.source.start_line == 1


def test_because_dash_lines_become_evidence():
    text = pattern_text("test/evidenced").replace(
        "  + because: It resolves the pull.",
        "  + because: It resolves the pull.\n   - evidence: used in release 3\n   - held up under review",
    )

    document = parse(text).document

    assert document.because_clause == "It resolves the pull."
    assert document.evidence == ("used in release 3", "held up under review")


def test_multiple_next_steps_accumulate():
    text = pattern_text("test/steps") + "  + next-steps: And a second step.\n"

    document = parse(text).document

    assert document.next_steps == ("Try it on the next change.", "And a second step.")


@pytest.mark.parametrize("text, rule", [
    ("", "missing-header"),
    ("  + context: no header here\n", "missing-header"),
    ("@arg\n\n  + context: x\n", "invalid-id"),
    ("@arg two words\n", "invalid-id"),
    ("@argue test/x\n", "missing-header"),
])
def test_header_errors(text, rule):
    result = parse(text)

    assert not result.ok
    assert rule in rules(errors(result.diagnostics))


def test_duplicate_field_is_error():
    text = pattern_text("test/dup") + "  + then: A second then.\n"

    result = parse(text)

    assert not result.ok
    assert "duplicate-field" in rules(result.diagnostics)


def test_empty_field_is_unterminated():
    text = pattern_text("test/empty").replace("  + then: Do the balancing thing.", "  + then:")

    result = parse(text)

    assert not result.ok
    assert "unterminated-field" in rules(result.diagnostics)


def test_unknown_field_is_warning_only():
    text = pattern_text("test/unknown") + "  + colour: blue\n"

    result = parse(text)

    assert result.ok
    assert [(d.severity, d.rule) for d in result.diagnostics] == [(Severity.WARNING, "unknown-field")]


def test_indented_at_line_continues_field():
    text = pattern_text("test/oncall").replace(
        "  + context: A shared setting for tests.",
        "  + context: ping the owner\n   @oncall before the change",
    )

    result = parse(text)

    assert result.ok
    assert result.document.context == "ping the owner @oncall before the change"
    assert "oncall" not in result.document.metadata


def test_at_line_after_entries_continues_field():
    text = pattern_text("test/late").replace(
        "  + then: Do the balancing thing.",
        "  + then: Do the balancing thing.\n@title Not a title",
    )

    document = parse(text).document

    assert document.then_clause == "Do the balancing thing. @title Not a title"
    assert document.title is None


def test_header_keyword_needs_whitespace_after_it():
    text = pattern_text("test/notes").replace("@arg test/notes\n", "@arg test/notes\n@arg-notes drafted\n")

    result = parse(text)

    assert result.ok
    assert result.document.id == "test/notes"
    assert result.document.metadata["arg-notes"] == "drafted"


def test_error_diagnostics_use_published_rules():
    for text in ("", "@arg a b\n", pattern_text("test/x") + "  + if: again\n"):
        for diagnostic in errors(parse(text).diagnostics):
            assert diagnostic.rule in RULES


# -------------------- Serialisation --------------------

@pytest.mark.parametrize("fixture_name", ["agent_command_text", "blast_radius_text", "timebox_text"])
def test_serialize_round_trip(fixture_name, request):
    parser = PatternParser()
    document = parser.parse_pattern(request.getfixturevalue(fixture_name)).document

    reparsed = parser.parse_pattern(parser.serialize_pattern(document)).document

    assert reparsed == document


def test_round_trip_keeps_because_evidence():
    parser = PatternParser()
    text = pattern_text("test/evidenced").replace(
        "  + because: It resolves the pull.",
        "  + because: It resolves the pull.\n   - seen in production",
    )
    document = parser.parse_pattern(text).document

    reparsed = parser.parse_pattern(parser.serialize_pattern(document)).document

    assert reparsed == document
    assert reparsed.evidence == ("seen in production",)


# -------------------- Lint --------------------

@pytest.mark.parametrize("fixture_name", ["agent_command_text", "blast_radius_text"])
def test_fixtures_pass_strict_lint(fixture_name, request):
    document = parse(request.getfixturevalue(fixture_name)).document

    diagnostics = PatternLinter().lint_pattern(document, STRICT)

    assert errors(diagnostics) == []
    assert "evidence-missing" in rules(diagnostics)
    assert "semantic-unverified" in rules(diagnostics)


def test_missing_because_is_one_error(blast_radius_text):
    parser = PatternParser()
    document = parser.parse_pattern(blast_radius_text).document
    without_because = parser.parse_pattern(parser.serialize_pattern(replace(document, because_clause=""))).document

    lint_errors = errors(PatternLinter().lint_pattern(without_because, STRICT))

    assert rules(lint_errors) == ["required-field-missing"]


def test_missing_next_steps_depends_on_mode():
    document = parse(pattern_text("test/settled", next_steps=False, evidence=True)).document
    linter = PatternLinter()

    assert rules(errors(linter.lint_pattern(document, STRICT))) == ["required-field-missing"]
    assert errors(linter.lint_pattern(document, LENIENT)) == []


@pytest.mark.parametrize("first, second", list(combinations(REQUIRED_FIELDS, 2)))
def test_swapped_fields_give_one_order_error(first, second):
    lines = pattern_text("test/order").splitlines()
    index = {
        name: next(i for i, line in enumerate(lines) if line.strip().startswith(f"+ {name}:"))
        for name in (first, second)
    }
    lines[index[first]], lines[index[second]] = lines[index[second]], lines[index[first]]

    document = parse("\n".join(lines) + "\n").document
    linter = PatternLinter()

    strict_errors = errors(linter.lint_pattern(document, STRICT))
    lenient = linter.lint_pattern(document, LENIENT)

    assert rules(strict_errors) == ["field-order"]
    assert strict_errors[0].line == index[first] + 1
    assert errors(lenient) == []
    assert "field-order" in rules(lenient)


def test_unknown_lint_mode():
    document = parse(pattern_text("test/mode")).document

    with pytest.raises(ValueError):
        PatternLinter().lint_pattern(document, "pedantic")


def test_missing_field_points_at_where_it_belongs():
    text = pattern_text("test/no-because").replace("  + because: It resolves the pull.\n", "")

    document = parse(text).document
    lint_errors = errors(PatternLinter().lint_pattern(document, STRICT))

    assert [(diagnostic.rule, diagnostic.line) for diagnostic in lint_errors] == [("required-field-missing", 9)]
    assert document.field_lines["next-steps"] == 9


def test_missing_next_steps_points_at_last_line():
    document = parse(pattern_text("test/settled", next_steps=False, evidence=True)).document

    lint_errors = errors(PatternLinter().lint_pattern(document, STRICT))

    assert [diagnostic.line for diagnostic in lint_errors] == [10]


MALFORMED_SOURCES = [
    "",
    "\n\n\n",
    "stray text\n@arg test/stray\n",
    "@arg a b\n",
    pattern_text("test/twice") + "  + if: again\n",
    pattern_text("test/empty").replace("  + then: Do the balancing thing.", "  + then:"),
    pattern_text("test/colour") + "  + colour: blue\n\n\n",
    pattern_text("test/no-steps", next_steps=False),
    pattern_text("test/no-context").replace("  + context: A shared setting for tests.\n", ""),
    "@arg test/bare\n",
]


@pytest.mark.parametrize("text", MALFORMED_SOURCES)
def test_diagnostics_stay_within_the_source(text):
    last_line = max(1, len(text.splitlines()))
    result = parse(text)
    diagnostics = list(result.diagnostics)

    if result.ok:
        diagnostics += PatternLinter().lint_pattern(result.document, STRICT)

    assert diagnostics
    for diagnostic in diagnostics:
        assert 1 <= diagnostic.line <= last_line
