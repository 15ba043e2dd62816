"""
Commit log text format, shared by both engines.

One line per retired instruction:

    PC=00000000 IR=00100513 X00=00000000 X01=00000000 ... X31=00000000

All hex is lowercase and 8 digits; a compressed instruction's IR is its 16-bit
encoding zero-extended. The format is byte-stable so logs can be diffed.
"""
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Iterable, List, Tuple

from src.errors import LogFormatError

FIELDS = ["PC", "IR"] + [f"X{i:02d}" for i in range(32)]
_TOKEN = re.compile(r"^([A-Z0-9]+)=([0-9a-f]{8})$")


@dataclass(frozen=True)
class CommitRecord:
    pc: int
    raw: int
    regs: Tuple[int, ...]

    def format(self) -> str:
        values = [self.pc, self.raw, *self.regs]
        return " ".join(f"{name}={value & 0xFFFFFFFF:08x}" for name, value in zip(FIELDS, values))

    def to_dict(self) -> Dict[str, Any]:
        return {"pc": f"{self.pc:08x}", "ir": f"{self.raw:08x}", "regs": [f"{r:08x}" for r in self.regs]}


def format_log(records: Iterable[CommitRecord]) -> str:
    return "".join(record.format() + "\n" for record in records)


def write_log(records: Iterable[CommitRecord], path: str) -> None:
    Path(path).write_text(format_log(records))


def split_fields(line: str, lineno: int = 1) -> List[Tuple[str, str]]:
    """Validate one log line and return its (name, hex) pairs in order."""
    tokens = line.rstrip("\n").split(" ")
    if len(tokens) != len(FIELDS):
        raise LogFormatError(
            f"line {lineno}: expected {len(FIELDS)} fields, found {len(tokens)}",
            "E_LOG_FIELDS",
            {"line": lineno}
        )
    pairs = []
    for expected, token in zip(FIELDS, tokens):
        match = _TOKEN.match(token)
        if not match or match.group(1) != expected:
            raise LogFormatError(
                f"line {lineno}: malformed field {token!r}, expected {expected}=xxxxxxxx",
                "E_LOG_FIELD",
                {"line": lineno, "field": expected}
            )
        pairs.append((expected, match.group(2)))
    return pairs


def parse_line(line: str, lineno: int = 1) -> CommitRecord:
    values = [int(value, 16) for _, value in split_fields(line, lineno)]
    return CommitRecord(values[0], values[1], tuple(values[2:]))


def read_log(path: str) -> List[CommitRecord]:
    with open(path) as f:
        return [parse_line(line, n) for n, line in enumerate(f, start=1)]
