"""Exception hierarchy shared by every module."""


class PuttloopError(Exception):
    """Base class; the CLI reports ``type(err).__name__`` on failure."""


class SchemaError(PuttloopError):
    pass


class GeometryError(PuttloopError):
    pass


class AmbiguousGoal(PuttloopError):
    pass


class NoMatch(PuttloopError):
    pass


class UnknownId(PuttloopError):
    pass


class ConfigError(PuttloopError):
    pass


class DegenerateContact(PuttloopError):
    pass


class NoRoute(PuttloopError):
    pass


class BracketCollapsed(PuttloopError):
    """Speed bracket narrower than the resolution without a success."""


class NoRemedy(PuttloopError):
    def __init__(self, message, verdict=None):
        super().__init__(message)
        self.verdict = verdict


class EmptyDataset(PuttloopError):
    pass


class Unreachable(PuttloopError):
    pass


class JointLimit(PuttloopError):
    pass


class VelocityLimit(PuttloopError):
    pass
