__all__ = ('CliffwarmError', 'ArgumentError', 'ResourceError',
           'SearchError', 'TrainingError', 'EnvironmentError',
           'LoaderError', 'CommandError')


class CliffwarmError(Exception):
    pass


class ArgumentError(CliffwarmError, ValueError):
    """Raised for inputs that violate the preconditions of an operation,
    like an imaginary observable or a policy target that is not a
    distribution.
    """


class ResourceError(CliffwarmError):
    """An exact oracle was asked for something it cannot hold in memory."""


class SearchError(CliffwarmError):
    pass


class TrainingError(CliffwarmError):
    """The optimizer saw a non-finite loss or gradient.

    The trainer catches this, restores the last good state and reports
    the round as aborted.
    """


class EnvironmentError(CliffwarmError):
    pass


class LoaderError(CliffwarmError):
    """Loaders should raise this when they can't deal with a given file.
    """


class CommandError(CliffwarmError):
    pass
