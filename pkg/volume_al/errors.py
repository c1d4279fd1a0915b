import typing

__all__ = [
    "VolumeALError",
    "ConfigError",
    "MalformedInput",
    "ShapeError",
    "DomainError",
    "BudgetExceeded",
    "IoError",
]


class VolumeALError(Exception):
    pass


class ConfigError(VolumeALError, ValueError):
    pass


class MalformedInput(VolumeALError, ValueError):
    row: typing.Optional[int]

    def __init__(self, message: str, row: typing.Optional[int] = None):
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)
        self.row = row


class ShapeError(VolumeALError, ValueError):
    pass


class DomainError(VolumeALError, ValueError):
    pass


class BudgetExceeded(VolumeALError, RuntimeError):
    pass


class IoError(VolumeALError, OSError):
    pass
