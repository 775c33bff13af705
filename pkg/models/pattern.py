# Value types for parsed design patterns and their libraries

from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Tuple


# Clauses every pattern must carry, in template order
REQUIRED_FIELDS = ("context", "if", "however", "then", "because", "next-steps")

# Published lint / parse rules
RULES = {
    "missing-header": "No @arg or @flexiarg header line",
    "invalid-id": "Pattern id is empty or contains whitespace",
    "duplicate-field": "A single-valued field appears more than once",
    "unterminated-field": "Field marker with no content",
    "unknown-field": "Field marker with an unrecognised name",
    "required-field-missing": "A required template field is absent or empty",
    "field-order": "Required fields are not in template order",
    "evidence-missing": "No evidence entries (pattern cannot reach :active or :settled)",
    "semantic-unverified": "Semantic template constraints are not machine-checked",
    "duplicate-id": "Two files in a library declare the same pattern id",
    "io-unreadable": "File could not be read or decoded",
}


class MaturityState(str, Enum):
    STUB = "stub"
    GREENFIELD = "greenfield"
    ACTIVE = "active"
    SETTLED = "settled"

    @property
    def precision_prior(self) -> float:
        return PRECISION_PRIORS[self]


# Precision prior per maturity state
PRECISION_PRIORS = {
    MaturityState.STUB: 0.2,
    MaturityState.GREENFIELD: 0.4,
    MaturityState.ACTIVE: 0.8,
    MaturityState.SETTLED: 0.9,
}


class Severity(str, Enum):
    ERROR = "error"
    WARNING = "warning"
    INFO = "info"


@dataclass(frozen=True)
class SourceSpan:
    path: str
    start_line: int
    end_line: int

    def __str__(self):
        return f"{self.path}:{self.start_line}-{self.end_line}"


@dataclass(frozen=True)
class ParseDiagnostic:
    severity: Severity
    rule: str
    message: str
    path: str
    line: int

    def __post_init__(self):
        if self.severity is Severity.ERROR and self.rule not in RULES:
            raise ValueError(f"Error diagnostic must name a published rule, got {self.rule!r}")

    @property
    def is_error(self) -> bool:
        return self.severity is Severity.ERROR

    def __str__(self):
        return f"{self.path}:{self.line}: {self.severity.value} [{self.rule}] {self.message}"


@dataclass(frozen=True)
class PatternDocument:
    """
    One parsed design pattern.

    Clause text is whitespace-normalised. field_order, field_lines and
    source describe where the text came from and take no part in equality,
    so a document re-parsed from its own serialisation compares equal.
    """

    id: str
    summary: str = ""
    context: str = ""
    if_clause: str = ""
    however_clause: str = ""
    then_clause: str = ""
    because_clause: str = ""
    evidence: Tuple[str, ...] = ()
    next_steps: Tuple[str, ...] = ()
    title: Optional[str] = None
    metadata: Dict[str, str] = field(default_factory=dict)
    field_order: Tuple[str, ...] = field(default=(), compare=False)
    # template field name -> line of its marker
    field_lines: Dict[str, int] = field(default_factory=dict, compare=False)
    source: Optional[SourceSpan] = field(default=None, compare=False)

    def __post_init__(self):
        if not self.id or any(character.isspace() for character in self.id):
            raise ValueError(f"Pattern id must be non-empty without whitespace, got {self.id!r}")

        if any(not entry for entry in self.evidence) or any(not entry for entry in self.next_steps):
            raise ValueError("evidence and next_steps must not contain empty entries")

        # Title lives in both places so either spelling round-trips
        metadata = dict(self.metadata)
        if self.title and "title" not in metadata:
            metadata["title"] = self.title
        object.__setattr__(self, "metadata", metadata)
        if self.title is None and metadata.get("title"):
            object.__setattr__(self, "title", metadata["title"])
        object.__setattr__(self, "evidence", tuple(self.evidence))
        object.__setattr__(self, "next_steps", tuple(self.next_steps))

    def clause(self, field_name: str) -> str:
        """
        Look up a required clause by its template name.
        """
        return {
            "context": self.context,
            "if": self.if_clause,
            "however": self.however_clause,
            "then": self.then_clause,
            "because": self.because_clause,
        }[field_name]


@dataclass
class PatternLibrary:
    root: str
    patterns: Dict[str, PatternDocument] = field(default_factory=dict)
    diagnostics: List[ParseDiagnostic] = field(default_factory=list)

    @property
    def errors(self) -> List[ParseDiagnostic]:
        return [diagnostic for diagnostic in self.diagnostics if diagnostic.is_error]

    def get(self, pattern_id: str) -> Optional[PatternDocument]:
        return self.patterns.get(pattern_id)

    def __len__(self):
        return len(self.patterns)
