"""Exception hierarchy shared by the solver, the model loader and the CLI"""
from typing import Any, Dict, List, Optional, Tuple


class CaimdpError(Exception):
    """Base class; `kind` is the stable tag written in CLI error lines"""

    kind = "error"

    def details(self) -> Dict[str, Any]:
        return {}


class ModelParseError(CaimdpError):
    """Model or policy file does not match the schema"""

    kind = "parse_error"

    def __init__(self, message: str, paths: Optional[List[str]] = None):
        super().__init__(message)
        self.paths = paths or []

    def details(self) -> Dict[str, Any]:
        return {"paths": self.paths}


class ModelValidationError(CaimdpError):
    """Model parses but violates a caIMDP invariant"""

    kind = "validation_error"


class MembershipError(CaimdpError):
    """An action lies outside the action set"""

    kind = "membership_error"

    def __init__(self, message: str, index: Optional[int] = None):
        super().__init__(message)
        self.index = index

    def details(self) -> Dict[str, Any]:
        return {"index": self.index}


class CapabilityError(CaimdpError):
    """An action set or objective lacks the oracle a solver needs"""

    kind = "capability_error"


class UnsupportedClassError(CaimdpError):
    """The model falls outside every tractable shape class"""

    kind = "unsupported_class"

    def __init__(self, message: str, entries: Optional[List[Tuple[str, int, int]]] = None):
        super().__init__(message)
        self.entries = entries or []

    def details(self) -> Dict[str, Any]:
        return {"entries": [list(e) for e in self.entries]}


class InvalidIntervalError(CaimdpError):
    """Interval bounds admit no probability distribution"""

    kind = "invalid_interval"


class InfeasibleError(CaimdpError):
    kind = "infeasible"


class UnboundedError(CaimdpError):
    kind = "unbounded"


class BudgetExceededError(CaimdpError):
    """A brute-force oracle was asked for more work than it allows"""

    kind = "budget_exceeded"


class GenerationError(CaimdpError):
    kind = "generation_error"


class InvalidArgumentError(CaimdpError):
    """Horizon, discount or action list outside its domain"""

    kind = "invalid_argument"
