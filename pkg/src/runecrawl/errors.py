"""Exception hierarchy shared across the package."""


class RunecrawlError(Exception):
    """Base class for all package errors."""


class ConfigError(RunecrawlError):
    """Invalid dungeon configuration or catalog entry."""


class ScenarioParseError(RunecrawlError):
    """Scenario text rejected; carries a source location."""

    def __init__(self, message: str, line: int, col: int = 0):
        super().__init__(f"line {line}, col {col}: {message}")
        self.line = line
        self.col = col


class TerminalStateError(RunecrawlError):
    """An action was submitted to a game that is already over."""


class SkillCapError(RunecrawlError):
    """Skill is already at its maximum value."""


class InsufficientXpError(RunecrawlError):
    """Experience pool cannot cover the requested raise."""


class ExportError(RunecrawlError):
    """Planning-export goal names an entity absent from the observation."""


class GroundingError(RunecrawlError):
    """A plan step could not be mapped onto an engine primitive."""


class MacroError(RunecrawlError):
    """A macro could not be expanded against the current observation."""


class SealedHistoryError(RunecrawlError):
    """Append attempted after an episode history's terminal record."""


class ProtocolError(RunecrawlError):
    """Gateway wire-protocol violation."""

    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code
