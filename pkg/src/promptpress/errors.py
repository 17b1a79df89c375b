"""Exception types shared across the package."""


class PromptPressError(Exception):
    """Base class for all package errors."""


class ConfigurationError(PromptPressError):
    """Invalid or unknown configuration (bad flag value, unknown tokenizer/backend)."""


class ValidationError(PromptPressError):
    """A value violated a contract: empty context, misaligned spans, negative scores."""


class DatasetError(PromptPressError):
    """A dataset file could not be parsed. Carries the offending line number."""

    def __init__(self, message: str, *, path: str = "", line: int = 0):
        super().__init__(message)
        self.path = path
        self.line = line


class ProtocolError(PromptPressError):
    """Hard wire-protocol violation (version or chunk-count mismatch). Not retryable."""


class TransportError(PromptPressError):
    """Remote scorer unreachable. Carries retry metadata for diagnostics."""

    def __init__(self, message: str, *, endpoint: str, attempts: int):
        super().__init__(message)
        self.endpoint = endpoint
        self.attempts = attempts
