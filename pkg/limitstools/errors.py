class DomainException(ValueError):
    pass


class GraphValidationException(Exception):
    pass


class ResolutionException(Exception):
    pass


class UnsupportedDetectorException(Exception):
    pass


class MissingBranchStatException(Exception):
    pass


class UnoptimizedException(Exception):
    pass


class BoundViolationException(Exception):
    pass


class ScenarioParseException(Exception):
    pass


class NegativeCapacityWarning(UserWarning):
    pass


class UsageException(Exception):
    pass
