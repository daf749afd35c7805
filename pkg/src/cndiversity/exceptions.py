"""Exception types raised across the package.

All of them derive from :class:`DiversityError` so the CLI can map domain
failures to exit code 1 without swallowing programming errors.
"""


class DiversityError(Exception):
    """Base class for domain errors."""


class EdgeListParseError(DiversityError, ValueError):
    def __init__(self, path, line_no, line):
        self.path = str(path)
        self.line_no = line_no
        self.line = line
        super().__init__(f"{self.path}:{line_no}: cannot parse edge {line!r}")


class EmptyGraphError(DiversityError, ValueError):
    pass


class DiameterRefusedError(DiversityError, ValueError):
    pass


class CatalogMismatchError(DiversityError, ValueError):
    pass


class UndefinedBaselineError(DiversityError, ValueError):
    pass


class UndefinedCorrelationError(DiversityError, ValueError):
    pass


class SingularDesignError(DiversityError, ValueError):
    pass


class DegenerateDatasetError(DiversityError, ValueError):
    pass
