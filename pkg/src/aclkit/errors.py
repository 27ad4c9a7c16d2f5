"""Exception hierarchy shared across the package."""


class AclkitError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(AclkitError):
    """Invalid configuration value or inconsistent hyperparameters."""


class ContractViolation(AclkitError):
    """Teacher propose/observe alternation contract was broken."""


class EmptyCurriculumError(AclkitError):
    """A filtered curriculum has no snapshots left, so an expert teacher cannot run."""


class TraceFormatError(AclkitError):
    """A persisted curriculum trace failed validation on load."""


class StudentProtocolError(AclkitError):
    """An external student broke the line protocol or died mid-run."""
