"""Exception classes for smaglab."""

from typing import Any


class SmaglabError(Exception):
    """Base exception for smaglab errors."""


class ConfigError(SmaglabError):
    """Exception raised for invalid configuration or mismatched dimensions."""

    def __init__(
        self,
        message: str,
        *,
        key: str | None = None,
        line: int | None = None,
    ):
        """Initialize the configuration error.

        Args:
            message (str): error message.
            key (str | None, optional): offending configuration key. Defaults to None.
            line (int | None, optional): 1-based line number in the config text. Defaults to None.

        """
        self.message = message
        self.key = key
        self.line = line

        prefix = ""
        if line is not None:
            prefix += f"line {line}: "
        if key is not None:
            prefix += f"{key}: "
        super().__init__(prefix + message)


class UsageError(SmaglabError):
    """Exception raised when an operation is called outside its preconditions."""


class BlowUpError(SmaglabError):
    """Exception raised when the solution stops being finite."""

    def __init__(
        self,
        message: str,
        *,
        t: float,
        step_index: int,
        series: list[Any] | None = None,
    ):
        """Initialize the blow-up error.

        Args:
            message (str): error message.
            t (float): time reached by the failing step.
            step_index (int): index of the failing step.
            series (list | None, optional): records gathered before the failure. Defaults to None.

        """
        self.message = message
        self.t = t
        self.step_index = step_index
        self.series = series if series is not None else []
        super().__init__(f"{message} (t={t!r}, step={step_index})")


class CheckpointError(SmaglabError):
    """Base exception for unreadable checkpoints."""


class CheckpointVersionError(CheckpointError):
    """Exception raised when a checkpoint has an unknown magic or format version."""


class ChecksumError(CheckpointError):
    """Exception raised when the checkpoint payload does not match its checksum."""


class TruncatedCheckpointError(CheckpointError):
    """Exception raised when a checkpoint file ends early."""
