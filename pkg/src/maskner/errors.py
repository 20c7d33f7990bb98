"""Exception hierarchy shared across the engine."""


class EngineError(Exception):
    """Base class for all maskner errors."""


class ConfigError(EngineError):
    """Invalid or inconsistent engine configuration."""


class ParseError(EngineError):
    """Malformed corpus input; carries a 1-based line number when known."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class CorpusError(EngineError):
    """Inconsistent corpus-level data, e.g. a span outside its sentence."""


class TemplateError(EngineError):
    """Template pattern fails placeholder validation."""


class UnsupportedTemplateError(TemplateError):
    """Template cannot be rendered for the requested backend mode."""


class LexiconError(EngineError):
    """Malformed representative-word lexicon."""


class BackendError(EngineError):
    """Base class for fill-mask backend failures."""


class MissingFixtureError(BackendError):
    """Stub backend has no entry for the requested prompt."""


class BackendUnavailableError(BackendError):
    """Backend could not be reached after the configured retries."""


class ProtocolError(BackendError):
    """Backend answered, but the response violates the wire protocol."""
