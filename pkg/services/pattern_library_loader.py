# This service walks a library directory, parses every pattern file
# and merges the results into one library keyed by pattern id

import logging
from pathlib import Path

from config.settings import PATTERN_FILE_EXTENSION
from models.pattern import ParseDiagnostic, PatternLibrary, Severity
from services.pattern_linter import LENIENT, PatternLinter
from services.pattern_parser import PatternParser
from utils.errors import LibraryLoadError


logger = logging.getLogger(__name__)


class PatternLibraryLoader:
    """
    Loads a pattern library from disk.

    Files are visited in sorted path order so the result is deterministic.
    A file that fails to parse or lint becomes diagnostics; the rest of the
    library still loads.
    """

    def __init__(self, parser: PatternParser = None, linter: PatternLinter = None):
        """
        :param parser: PatternParser instance
        :param linter: PatternLinter instance
        """
        self.parser = parser or PatternParser()
        self.linter = linter or PatternLinter()

    def pattern_files(self, root: Path) -> list:
        return sorted(path for path in root.rglob(f"*{PATTERN_FILE_EXTENSION}") if path.is_file())

    def load_library(self, root) -> PatternLibrary:
        """
        Load every pattern file under root.

        :param root: library directory
        :return: PatternLibrary
        """

        root_path = Path(root)

        if not root_path.is_dir():
            raise LibraryLoadError(f"Library root is not a readable directory: {root}")

        library = PatternLibrary(root=str(root_path))
        first_seen = {}

        try:
            pattern_paths = self.pattern_files(root_path)
        except OSError as error:
            raise LibraryLoadError(f"Cannot list library root {root}: {error}") from error

        for pattern_path in pattern_paths:
            origin = str(pattern_path)

            try:
                source_text = pattern_path.read_text(encoding="utf-8")
            except (OSError, UnicodeDecodeError) as error:
                logger.warning("Skipping unreadable pattern file %s: %s", origin, error)
                library.diagnostics.append(ParseDiagnostic(
                    Severity.ERROR, "io-unreadable", str(error), origin, 1
                ))
                continue

            parse_result = self.parser.parse_pattern(source_text, origin)
            library.diagnostics.extend(parse_result.diagnostics)

            if not parse_result.ok:
                continue

            document = parse_result.document
            lint_diagnostics = self.linter.lint_pattern(document, LENIENT)
            library.diagnostics.extend(lint_diagnostics)

            if any(diagnostic.is_error for diagnostic in lint_diagnostics):
                logger.warning("Pattern %s in %s failed lint and was not loaded", document.id, origin)
                continue

            # Keep the first file that declares an id
            if document.id in first_seen:
                logger.warning("Duplicate pattern id %s in %s (first in %s)", document.id, origin, first_seen[document.id])
                library.diagnostics.append(ParseDiagnostic(
                    Severity.ERROR,
                    "duplicate-id",
                    f"Pattern id {document.id} already declared in {first_seen[document.id]}",
                    origin,
                    document.source.start_line,
                ))
                continue

            first_seen[document.id] = origin
            library.patterns[document.id] = document

        logger.info("Loaded %d patterns from %s", len(library.patterns), root_path)

        return library
