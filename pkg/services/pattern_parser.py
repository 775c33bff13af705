# This class reads and writes the line-oriented pattern file format
#
#   @arg <id>            (or @flexiarg <id>)
#   @<key> <value>       optional header metadata
#   ! conclusion: ...    summary; other "! key:" lines land in metadata
#   + <field>: ...       context / if / however / then / because /
#                        evidence / next-steps
#
# Lines without a marker continue the current field. @ lines count only
# unindented and before the first "!" or "+" entry; elsewhere they are
# continuation text too. See docs/pattern_grammar.md.

import re
from dataclasses import dataclass, field
from typing import List, Optional

from models.pattern import ParseDiagnostic, PatternDocument, Severity, SourceSpan
from utils.text_normalizer import TextNormalizer


HEADER_LINE = re.compile(r"^@(arg|flexiarg)(?=\s|$)(.*)$")
METADATA_LINE = re.compile(r"^@([\w-]+)(?:\s+(.*))?$")
BANG_LINE = re.compile(r"^!\s*([\w-]+)\s*:(.*)$")
FIELD_LINE = re.compile(r"^\+\s*([\w-]+)\s*:(.*)$")

# Template field name -> PatternDocument attribute
CLAUSE_ATTRIBUTES = {
    "context": "context",
    "if": "if_clause",
    "however": "however_clause",
    "then": "then_clause",
    "because": "because_clause",
}

LIST_FIELDS = ("evidence", "next-steps")

# Metadata keys written back as "! key:" lines rather than "@key"
BANG_METADATA_KEYS = ("instantiated-by",)


@dataclass
class ParseResult:
    document: Optional[PatternDocument]
    diagnostics: List[ParseDiagnostic] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.document is not None


@dataclass
class _Entry:
    kind: str
    name: str
    line: int
    parts: List[str] = field(default_factory=list)
    sub_entries: List[List[str]] = field(default_factory=list)


class PatternParser:
    """
    Parses pattern source text into PatternDocument values and back.
    """

    def __init__(self):
        self.normalizer = TextNormalizer()

    def parse_pattern(self, text: str, origin: str = "<memory>") -> ParseResult:
        """
        Parse one pattern file.

        :param text: UTF-8 decoded source text
        :param origin: path used in diagnostics and the source span
        :return: ParseResult with a document, or error diagnostics
        """

        diagnostics = []
        source_lines = text.splitlines()
        last_line = max(1, len(source_lines))

        header = None
        metadata = {}
        entries = []
        current = None
        first_content_line = None
        last_content_line = None

        for line_number, raw_line in enumerate(source_lines, start=1):
            stripped = raw_line.strip()

            if not stripped:
                continue

            if first_content_line is None:
                first_content_line = line_number
            last_content_line = line_number

            # Header block: unindented @ lines ahead of every entry
            in_header_block = not entries and raw_line.startswith("@")

            header_match = HEADER_LINE.match(stripped) if in_header_block else None

            if header_match:
                if header is not None:
                    diagnostics.append(self._diagnostic(
                        Severity.ERROR, "duplicate-field", "Second header line", origin, line_number
                    ))
                    continue

                header = (header_match.group(1), header_match.group(2).split(), line_number)
                current = None
                continue

            metadata_match = METADATA_LINE.match(stripped) if in_header_block else None

            if metadata_match:
                metadata[metadata_match.group(1)] = self.normalizer.normalize_whitespace(metadata_match.group(2))
                current = None
                continue

            bang_match = BANG_LINE.match(stripped)

            if bang_match:
                current = _Entry("bang", bang_match.group(1).lower(), line_number, [bang_match.group(2)])
                entries.append(current)
                continue

            field_match = FIELD_LINE.match(stripped)

            if field_match:
                current = _Entry("field", field_match.group(1).lower(), line_number, [field_match.group(2)])
                entries.append(current)
                continue

            # Continuation line
            if current is None:
                diagnostics.append(self._diagnostic(
                    Severity.WARNING, "unknown-field", "Text outside any field ignored", origin, line_number
                ))
                continue

            if current.kind == "field" and current.name == "because" and stripped.startswith("- "):
                sub_text = stripped[2:]
                if sub_text.lower().startswith("evidence:"):
                    sub_text = sub_text[len("evidence:"):]
                current.sub_entries.append([sub_text])
            elif current.sub_entries:
                current.sub_entries[-1].append(stripped)
            else:
                current.parts.append(stripped)

        # ---------- Header ----------

        if header is None:
            diagnostics.append(self._diagnostic(
                Severity.ERROR, "missing-header", "No @arg or @flexiarg line", origin, 1
            ))
            return ParseResult(None, diagnostics)

        header_keyword, header_tokens, header_line = header

        if len(header_tokens) != 1:
            diagnostics.append(self._diagnostic(
                Severity.ERROR, "invalid-id", "Header must name exactly one id", origin, header_line
            ))
            return ParseResult(None, diagnostics)

        pattern_id = header_tokens[0]

        if header_keyword == "flexiarg":
            metadata["header"] = "flexiarg"

        # ---------- Fields ----------

        summary = ""
        clauses = {}
        evidence = []
        next_steps = []
        field_order = []
        field_lines = {}

        for entry in entries:
            entry_text = self.normalizer.normalize_whitespace(" ".join(entry.parts))

            if entry.kind == "bang":
                if entry.name == "conclusion":
                    if summary:
                        diagnostics.append(self._diagnostic(
                            Severity.ERROR, "duplicate-field", "conclusion appears twice", origin, entry.line
                        ))
                    summary = entry_text
                else:
                    metadata[entry.name] = entry_text
                continue

            sub_entries = [
                self.normalizer.normalize_whitespace(" ".join(parts)) for parts in entry.sub_entries
            ]

            if entry.name in CLAUSE_ATTRIBUTES:
                if entry.name in clauses:
                    diagnostics.append(self._diagnostic(
                        Severity.ERROR, "duplicate-field", f"{entry.name} appears twice", origin, entry.line
                    ))
                    continue

                if not entry_text:
                    diagnostics.append(self._diagnostic(
                        Severity.ERROR, "unterminated-field", f"{entry.name} has no content", origin, entry.line
                    ))
                    continue

                clauses[entry.name] = entry_text
                field_order.append(entry.name)
                field_lines[entry.name] = entry.line
                evidence.extend(text for text in sub_entries if text)

            elif entry.name in LIST_FIELDS:
                if not entry_text:
                    diagnostics.append(self._diagnostic(
                        Severity.ERROR, "unterminated-field", f"{entry.name} has no content", origin, entry.line
                    ))
                    continue

                if entry.name == "evidence":
                    evidence.append(entry_text)
                else:
                    next_steps.append(entry_text)
                    if "next-steps" not in field_order:
                        field_order.append("next-steps")
                        field_lines["next-steps"] = entry.line

            else:
                diagnostics.append(self._diagnostic(
                    Severity.WARNING, "unknown-field", f"Unrecognised field {entry.name!r} ignored", origin, entry.line
                ))

        if any(diagnostic.is_error for diagnostic in diagnostics):
            return ParseResult(None, diagnostics)

        document = PatternDocument(
            id=pattern_id,
            summary=summary,
            context=clauses.get("context", ""),
            if_clause=clauses.get("if", ""),
            however_clause=clauses.get("however", ""),
            then_clause=clauses.get("then", ""),
            because_clause=clauses.get("because", ""),
            evidence=tuple(evidence),
            next_steps=tuple(next_steps),
            title=metadata.get("title") or None,
            metadata=metadata,
            field_order=tuple(field_order),
            field_lines=field_lines,
            source=SourceSpan(origin, first_content_line or 1, min(last_content_line or 1, last_line)),
        )

        return ParseResult(document, diagnostics)

    def serialize_pattern(self, document: PatternDocument) -> str:
        """
        Render a document in canonical field order.

        :param document: pattern to write
        :return: source text that parses back to an equal document
        """

        header_keyword = "flexiarg" if document.metadata.get("header") == "flexiarg" else "arg"
        lines = [f"@{header_keyword} {document.id}"]

        bang_metadata = []

        for key, value in document.metadata.items():
            if key == "header" and value == "flexiarg":
                continue

            if key in BANG_METADATA_KEYS:
                bang_metadata.append((key, value))
                continue

            lines.append(f"@{key} {value}".rstrip())

        lines.append("")

        if document.summary:
            lines.append(f"! conclusion: {document.summary}")

        for key, value in bang_metadata:
            lines.append(f"! {key}: {value}")

        lines.append("")

        for field_name, attribute in CLAUSE_ATTRIBUTES.items():
            clause_text = getattr(document, attribute)
            if clause_text:
                lines.append(f"  + {field_name}: {clause_text}")

        for entry in document.evidence:
            lines.append(f"  + evidence: {entry}")

        for entry in document.next_steps:
            lines.append(f"  + next-steps: {entry}")

        return "\n".join(lines) + "\n"

    def _diagnostic(self, severity, rule, message, origin, line):
        return ParseDiagnostic(severity=severity, rule=rule, message=message, path=origin, line=line)
