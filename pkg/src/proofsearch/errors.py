"""Exception hierarchy shared across the package."""


class ProofSearchError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(ProofSearchError):
    """Invalid run configuration (bad mode, empty premise set, missing capability)."""


class TreeStructureError(ProofSearchError):
    """An entailment tree violates a structural invariant."""

    def __init__(self, message: str, node: str | None = None):
        super().__init__(message if node is None else f"{message} (node: {node})")
        self.node = node


class UnknownStatementError(ProofSearchError):
    """A statement id was referenced but never registered."""


class DslParseError(ProofSearchError):
    """A proof-DSL record could not be parsed."""

    def __init__(self, message: str, record_id: str | None = None, offset: int | None = None):
        detail = message
        if record_id is not None:
            detail += f" [record {record_id}]"
        if offset is not None:
            detail += f" [byte offset {offset}]"
        super().__init__(detail)
        self.record_id = record_id
        self.offset = offset


class IntegrityError(ProofSearchError):
    """A proof could not be reconstructed from the search state."""


class BackendError(ProofSearchError):
    """A model backend call failed; carries the raw payload when available."""

    def __init__(self, message: str, payload: object = None):
        super().__init__(message)
        self.payload = payload


class CapabilityError(ConfigError):
    """The configured backend does not support an operation the mode requires."""
