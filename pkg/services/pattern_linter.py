# This class checks parsed patterns against the template structure rules


from models.pattern import REQUIRED_FIELDS, ParseDiagnostic, PatternDocument, Severity


STRICT = "strict"
LENIENT = "lenient"

# Constraints of the template that only a reader can judge
SEMANTIC_RULES = (
    "if/however must outline a tension",
    "because must give a single primary rationale",
    "next-steps must not resolve the tension",
)


class PatternLinter:
    """
    Structural lint for pattern documents.

    Strict mode enforces every required field, once each, in template order.
    Lenient mode downgrades missing next-steps and ordering problems to
    warnings, so stub and settled patterns can still be loaded.
    """

    def lint_pattern(self, document: PatternDocument, mode: str = STRICT) -> list:
        """
        :param document: parsed pattern
        :param mode: "strict" or "lenient"
        :return: list of ParseDiagnostic
        """

        if mode not in (STRICT, LENIENT):
            raise ValueError(f"Unknown lint mode: {mode}")

        path = document.source.path if document.source else "<memory>"
        start_line = document.source.start_line if document.source else 1
        end_line = document.source.end_line if document.source else start_line
        field_lines = document.field_lines
        relaxed = Severity.WARNING if mode == LENIENT else Severity.ERROR

        diagnostics = []

        def report(severity, rule, message, line=start_line):
            diagnostics.append(ParseDiagnostic(severity, rule, message, path, line))

        def missing_field_line(field_name):
            # Where the field belongs: the next field present after it, else the last line
            following = REQUIRED_FIELDS[REQUIRED_FIELDS.index(field_name) + 1:]
            return next((field_lines[name] for name in following if name in field_lines), end_line)

        # ---------------- Presence ----------------

        for field_name in REQUIRED_FIELDS[:-1]:
            if not document.clause(field_name).strip():
                report(
                    Severity.ERROR,
                    "required-field-missing",
                    f"Missing required field: {field_name}",
                    missing_field_line(field_name),
                )

        if not [entry for entry in document.next_steps if entry.strip()]:
            report(relaxed, "required-field-missing", "Missing required field: next-steps", end_line)

        if not [entry for entry in document.evidence if entry.strip()]:
            report(Severity.WARNING, "evidence-missing", "No evidence entries")

        # ---------------- Duplicates ----------------

        seen_fields = set()

        for field_name in document.field_order:
            if field_name in seen_fields:
                report(
                    Severity.ERROR,
                    "duplicate-field",
                    f"{field_name} appears more than once",
                    field_lines.get(field_name, start_line),
                )
            seen_fields.add(field_name)

        # ---------------- Order ----------------

        found_order = list(dict.fromkeys(name for name in document.field_order if name in REQUIRED_FIELDS))
        expected_order = [name for name in REQUIRED_FIELDS if name in found_order]

        if found_order != expected_order:
            first_misplaced = next(
                found for found, expected in zip(found_order, expected_order) if found != expected
            )
            report(
                relaxed,
                "field-order",
                f"Fields out of order: found {', '.join(found_order)}; expected {', '.join(expected_order)}",
                field_lines.get(first_misplaced, start_line),
            )

        report(Severity.INFO, "semantic-unverified", "Not checked: " + "; ".join(SEMANTIC_RULES))

        return diagnostics
