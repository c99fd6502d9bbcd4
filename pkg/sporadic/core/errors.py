"""Error hierarchy shared by the library and the CLI.

Library code raises these; only ``sporadic.cli`` maps them to process exit
codes through ``exit_code``.
"""

from __future__ import annotations


class SporadicError(Exception):
    exit_code: int = 1


class InvalidConfigError(SporadicError):
    exit_code = 1


class InvalidInputError(SporadicError, ValueError):
    exit_code = 2


class InsufficientDataError(SporadicError):
    exit_code = 2


class DataFileError(SporadicError):
    exit_code = 2

    def __init__(self, path: str, reason: str) -> None:
        super().__init__(f"{path}: {reason}")
        self.path = path


class TrainingDivergedError(SporadicError):
    exit_code = 3

    def __init__(self, step: int, reason: str = "non-finite value") -> None:
        super().__init__(f"training diverged at step {step}: {reason}")
        self.step = step


class GradientCheckError(SporadicError):
    exit_code = 3
