# Exception types shared across services
#
# Each error names a stable rule and the CLI exit status it maps to:
# 1 validation, 2 usage, 3 io.

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_USAGE = 2
EXIT_IO = 3


class FutonError(Exception):
    """
    Base class for all expected failures.
    """

    rule = "error"
    exit_status = EXIT_VALIDATION


class ConfigError(FutonError):
    rule = "config"
    exit_status = EXIT_USAGE


class LibraryLoadError(FutonError):
    rule = "io-unreadable"
    exit_status = EXIT_IO


class NoCandidatesError(FutonError):
    rule = "no-candidates"


class UnknownPatternError(FutonError):
    rule = "unknown-pattern"

    def __init__(self, pattern_id: str):
        super().__init__(f"Unknown pattern: {pattern_id}")
        self.pattern_id = pattern_id


class SessionNotFoundError(FutonError):
    rule = "not-found"
    exit_status = EXIT_IO


class SessionLockedError(FutonError):
    rule = "session-locked"
    exit_status = EXIT_IO


class TraceClosedError(FutonError):
    rule = "trace-closed"
    exit_status = EXIT_IO


class TraceCorruptError(FutonError):
    """
    Raised when a trace cannot be read past some point.

    last_good_seq is the last event that was read intact (-1 if none).
    """

    rule = "trace-corrupt"

    def __init__(self, message: str, last_good_seq: int):
        super().__init__(f"{message} (last good seq: {last_good_seq})")
        self.last_good_seq = last_good_seq


class SchemaVersionError(FutonError):
    rule = "schema-version"


class AnchorNotFoundError(FutonError):
    rule = "not-found"

    def __init__(self, seq: int):
        super().__init__(f"No event with seq {seq} in this session")
        self.seq = seq


class SessionExistsError(FutonError):
    rule = "session-exists"
    exit_status = EXIT_USAGE
