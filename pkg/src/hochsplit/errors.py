"""Exception types raised across the package."""


class HochsplitError(Exception):
    pass


class NotInIdeal(HochsplitError, ValueError):
    """An input that should lie in a maximal ideal does not (to tolerance)."""


class WindowTooSmall(HochsplitError, ValueError):
    """A stored index window does not cover the entries an operation needs."""


class ChainNotRefining(HochsplitError, ValueError):
    """A sequence of rationals is not increasing in the divisibility order."""


class GridMismatch(HochsplitError, ValueError):
    """Grid functions live on incompatible grids."""


class ConfigError(HochsplitError, ValueError):
    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key
