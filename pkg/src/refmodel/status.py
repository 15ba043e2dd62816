from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, Optional

from src.errors import SimError


class RunStatus(str, Enum):
    EXIT = "exit"
    HALT = "halt"
    FAULT = "fault"
    ILLEGAL = "illegal"
    STEP_LIMIT = "step_limit"


@dataclass
class ExitStatus:
    status: RunStatus
    code: Optional[int] = None
    reason: str = ""
    error: Optional[SimError] = None

    @property
    def ok(self) -> bool:
        return self.status in (RunStatus.EXIT, RunStatus.HALT)

    @property
    def exit_code(self) -> int:
        """Process exit code for the CLI: 0 for a clean stop, 1 otherwise."""
        return 0 if self.ok else 1

    def to_dict(self) -> Dict[str, Any]:
        result = {"status": self.status.value, "code": self.code, "reason": self.reason}
        if self.error is not None:
            result["error"] = self.error.to_dict()
        return result
