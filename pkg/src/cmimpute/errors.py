"""Exception hierarchy shared across the package."""


class CmimputeError(Exception):
    """Base class for all package-specific errors."""


class InvalidInputError(CmimputeError, ValueError):
    """Malformed arguments: empty datasets, bad flags, schema violations."""


class DegenerateDataError(CmimputeError):
    """Data cannot support the requested fit (e.g. no observed events)."""


class SingularInformationError(CmimputeError):
    """Information matrix or design matrix is singular."""


class ConfigError(InvalidInputError):
    """Run configuration failed schema validation."""
