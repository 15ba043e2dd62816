from typing import Dict, Any, Optional
import logging
from datetime import datetime
from dataclasses import dataclass, field


class SimError(Exception):
    """Base exception class for simulator errors."""
    def __init__(self, message: str, error_code: str, context: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.error_code = error_code
        self.context = context or {}
        self.timestamp = datetime.now().isoformat()

    def to_dict(self) -> Dict[str, Any]:
        return {
            "error_type": type(self).__name__,
            "error_code": self.error_code,
            "message": self.message,
            "context": self.context,
            "timestamp": self.timestamp
        }


class DecodeError(SimError):
    """Raised when a decoder is called outside its precondition."""
    pass


class EncodingError(SimError):
    """Raised when an instruction description cannot be encoded."""
    pass


class ImageError(SimError):
    """Raised for unreadable, malformed or oversized program images."""
    pass


class MemoryFault(SimError):
    """Raised for misaligned or out-of-range memory accesses."""
    pass


class IllegalInstruction(SimError):
    """Raised when an ILLEGAL instruction reaches the commit path."""
    pass


class TwinDatapathError(SimError):
    """Raised when a +2 twin register disagrees with its primary value."""
    pass


class LogFormatError(SimError):
    """Raised for malformed commit-log lines."""
    pass


class ConfigError(SimError):
    """Raised for invalid run configurations."""
    pass


class SimEvent(Exception):
    """Base class for program events that are not failures."""
    pass


class ExitEvent(SimEvent):
    """A store to the EXIT MMIO address."""
    def __init__(self, code: int):
        super().__init__(f"program exited with code {code}")
        self.code = code


@dataclass
class ErrorReport:
    error: SimError
    engine: str
    program: str
    additional_data: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        report = self.error.to_dict()
        report.update({
            "engine": self.engine,
            "program": self.program,
        })
        if self.additional_data:
            report["additional_data"] = self.additional_data
        return report


def report_error(report: ErrorReport, logger: Optional[logging.Logger] = None) -> Dict[str, Any]:
    """Log an error report and return its dictionary form."""
    logger = logger or logging.getLogger("rvsim.errors")
    payload = report.to_dict()
    logger.error(
        f"{payload['error_type']} in {report.engine} running {report.program}: {report.error.message}",
        extra={"error_context": payload}
    )
    return payload


class HaltEvent(SimEvent):
    """ECALL or EBREAK retired; the program stops without an exit code."""
    def __init__(self, op: str, pc: int):
        super().__init__(f"{op} at {pc:#010x}")
        self.op = op
        self.pc = pc
