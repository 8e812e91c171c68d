"""Exception hierarchy shared by every module."""


class GsedError(Exception):
    """Base class for all package errors."""


class IdError(GsedError, KeyError):
    """Unknown tile id or malformed tile labels."""

    def __str__(self):
        return Exception.__str__(self)


class ConfigError(GsedError, ValueError):
    pass


class AnalysisError(GsedError):
    """A configuration region does not follow the pattern the analysis needs."""

    def __init__(self, message, location=None):
        super().__init__(message if location is None else f"{message} at {location}")
        self.location = location


class CompileError(GsedError):
    pass


class ResourceError(GsedError):
    """An explicit search/enumeration budget was exceeded."""


class ProtocolError(GsedError):
    pass


class DimensionError(GsedError, ValueError):
    pass
