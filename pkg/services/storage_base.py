# This base class defines the common interface for session trace backends


class TraceStore:
    """
    Base trace storage interface.
    All trace implementations must follow this contract.
    """

    def create_session(self, session_id: str, start_payload: dict):
        """
        Start a new trace whose first event is session-start.

        :param session_id: session identifier
        :param start_payload: session-start payload
        :return: open SessionTrace
        """
        raise NotImplementedError("Subclasses must implement create_session()")

    def resume_session(self, session_id: str, resume_payload: dict = None):
        """
        Reopen an existing trace; the next event written is session-resume.
        """
        raise NotImplementedError("Subclasses must implement resume_session()")

    def read_events(self, session_id: str) -> list:
        """
        Read every event of a session in seq order.
        """
        raise NotImplementedError("Subclasses must implement read_events()")

    def exists(self, session_id: str) -> bool:
        raise NotImplementedError("Subclasses must implement exists()")
