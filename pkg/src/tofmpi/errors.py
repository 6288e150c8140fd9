"""Exception hierarchy. CLI exit codes hang off ConfigError (2) and InputDataError (3)."""

import numpy as np


class TofError(Exception):
    pass


class ConfigError(TofError, ValueError):
    pass


class InputDataError(TofError, ValueError):
    pass


class DomainError(TofError, ValueError):
    """An argument lies outside the domain of a conversion (e.g. negative depth)."""


class AliasedDepthError(DomainError):
    pass


class BudgetError(ConfigError):
    """Exhaustive search would exceed its enumeration budget."""


class RankDeficientError(TofError, np.linalg.LinAlgError):
    pass


class SceneValidationError(InputDataError):
    def __init__(self, violations):
        self.violations = list(violations)
        lines = "; ".join(str(v) for v in self.violations[:5])
        more = "" if len(self.violations) <= 5 else f" (+{len(self.violations) - 5} more)"
        super().__init__(f"invalid scene: {lines}{more}")


class PixelError(InputDataError):
    def __init__(self, x, y, cause):
        self.x, self.y, self.cause = x, y, cause
        super().__init__(f"pixel (x={x}, y={y}): {cause}")
