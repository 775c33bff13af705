import pytest

from conftest import pattern_text, write_library
from services.pattern_library_loader import PatternLibraryLoader
from utils.errors import LibraryLoadError


def test_fixture_directory_loads_cleanly(fixture_library):
    assert len(fixture_library) == 2
    assert fixture_library.errors == []
    assert sorted(fixture_library.patterns) == ["fulab/blast-radius", "p4ng/agent-command-pattern"]


def test_bad_file_does_not_block_the_rest(tmp_path):
    root = write_library(tmp_path / "lib", {
        "good/one": pattern_text("good/one"),
        "bad/broken": "no header at all\n",
    })

    library = PatternLibraryLoader().load_library(root)

    assert list(library.patterns) == ["good/one"]
    assert [diagnostic.rule for diagnostic in library.errors] == ["missing-header"]


def test_stub_and_settled_patterns_load_leniently(tmp_path):
    root = write_library(tmp_path / "lib", {
        "x/stub": pattern_text("x/stub", next_steps=False),
        "x/settled": pattern_text("x/settled", next_steps=False, evidence=True),
    })

    library = PatternLibraryLoader().load_library(root)

    assert sorted(library.patterns) == ["x/settled", "x/stub"]
    assert library.errors == []


def test_pattern_failing_lint_is_skipped(tmp_path):
    text = pattern_text("x/no-because").replace("  + because: It resolves the pull.\n", "")
    root = write_library(tmp_path / "lib", {"x/no-because": text})

    library = PatternLibraryLoader().load_library(root)

    assert len(library) == 0
    assert [diagnostic.rule for diagnostic in library.errors] == ["required-field-missing"]


def test_duplicate_id_keeps_first_file(tmp_path):
    root = write_library(tmp_path / "lib", {
        "a/first": pattern_text("shared/id", context="First copy."),
        "b/second": pattern_text("shared/id", context="Second copy."),
    })

    library = PatternLibraryLoader().load_library(root)

    assert library.get("shared/id").context == "First copy."
    assert [diagnostic.rule for diagnostic in library.errors] == ["duplicate-id"]


def test_undecodable_file_is_io_error(tmp_path):
    root = write_library(tmp_path / "lib", {"ok/one": pattern_text("ok/one")})
    (root / "binary.arg").write_bytes(b"\xff\xfe\x00broken")

    library = PatternLibraryLoader().load_library(root)

    assert list(library.patterns) == ["ok/one"]
    assert [diagnostic.rule for diagnostic in library.errors] == ["io-unreadable"]


def test_missing_root_raises(tmp_path):
    with pytest.raises(LibraryLoadError):
        PatternLibraryLoader().load_library(tmp_path / "nowhere")


def test_empty_directory_gives_empty_library(tmp_path):
    library = PatternLibraryLoader().load_library(tmp_path)

    assert len(library) == 0
    assert library.errors == []
