from __future__ import annotations

from typing import Any, Dict, Optional


EXIT_INFEASIBLE = 1
EXIT_INPUT = 2


class StrongIdError(Exception):
    """
    Base class for every error raised by the toolkit.
    `exit_code` follows the CLI contract: 1 = domain infeasibility, 2 = input error.
    """

    exit_code = EXIT_INPUT

    def __init__(self, message: str, **details: Any):
        super().__init__(message)
        self.message = message
        self.details: Dict[str, Any] = details

    def to_dict(self) -> Dict[str, Any]:
        out: Dict[str, Any] = {"type": type(self).__name__, "message": self.message}
        out.update(self.details)
        return out


# ----------------------------
# Input errors (exit 2)
# ----------------------------

class InvalidParameters(StrongIdError, ValueError):
    pass


class ConfigError(StrongIdError, ValueError):
    pass


class InvalidEdge(StrongIdError, ValueError):
    pass


class SelfLoop(StrongIdError, ValueError):
    pass


class InvalidVertex(StrongIdError, ValueError):
    pass


class SameVertex(StrongIdError, ValueError):
    pass


class InvalidSize(StrongIdError, ValueError):
    pass


class InvalidEpsilon(StrongIdError, ValueError):
    pass


class TooSmall(StrongIdError, ValueError):
    pass


class ParseError(StrongIdError, ValueError):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}", line=line)
        self.line = line


# ----------------------------
# Domain infeasibility (exit 1)
# ----------------------------

class NotRStrong(StrongIdError):
    exit_code = EXIT_INFEASIBLE

    def __init__(self, required: int, achieved: int):
        super().__init__(
            f"graph has strong index {achieved} < required index {required}; no code exists",
            required=required,
            achieved=achieved,
        )
        self.required = required
        self.achieved = achieved


class TooLargeForExact(StrongIdError):
    exit_code = EXIT_INFEASIBLE

    def __init__(self, n: int, limit: int):
        super().__init__(f"n={n} exceeds the exhaustive search limit {limit}", n=n, limit=limit)
        self.n = n
        self.limit = limit


class InfeasibleP(StrongIdError):
    exit_code = EXIT_INFEASIBLE


class GenerationFailed(StrongIdError):
    exit_code = EXIT_INFEASIBLE

    def __init__(self, message: str, verdict: Any = None, block_index: Optional[int] = None):
        details: Dict[str, Any] = {}
        if verdict is not None:
            details["last_verdict"] = verdict.to_dict()
        if block_index is not None:
            details["block_index"] = block_index
        super().__init__(message, **details)
        self.verdict = verdict
        self.block_index = block_index


class ChainVerificationError(StrongIdError):
    exit_code = EXIT_INFEASIBLE
