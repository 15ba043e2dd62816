"""
Commit-log comparison.

Both logs are validated line by line; the first differing line is reported with
the name of its first differing field. When one log is a prefix of the other the
result is a length mismatch positioned just after the common prefix.
"""
from dataclasses import dataclass
from itertools import zip_longest
from typing import Any, Dict, Iterable, Optional

from src.refmodel.commit_log import split_fields


@dataclass
class DiffResult:
    identical: bool
    line: Optional[int] = None
    field: Optional[str] = None
    left: Optional[str] = None
    right: Optional[str] = None
    reason: str = ""
    compared: int = 0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "identical": self.identical,
            "line": self.line,
            "field": self.field,
            "left": self.left,
            "right": self.right,
            "reason": self.reason,
            "compared": self.compared
        }

    def report(self, left_name: str = "a", right_name: str = "b") -> str:
        if self.identical:
            return f"identical ({self.compared} commits)"
        lines = [f"first divergence at line {self.line}: {self.reason}"]
        if self.field:
            lines.append(f"field: {self.field}")
        lines.append(f"{left_name}: {self.left if self.left is not None else '<end of log>'}")
        lines.append(f"{right_name}: {self.right if self.right is not None else '<end of log>'}")
        return "\n".join(lines)


def diff_lines(left: Iterable[str], right: Iterable[str]) -> DiffResult:
    compared = 0
    for lineno, (a, b) in enumerate(zip_longest(left, right), start=1):
        if a is None or b is None:
            present = a if a is not None else b
            split_fields(present, lineno)
            return DiffResult(
                identical=False,
                line=lineno,
                left=a.rstrip("\n") if a is not None else None,
                right=b.rstrip("\n") if b is not None else None,
                reason=f"length mismatch after {compared} common commits",
                compared=compared,
            )
        fields_a = split_fields(a, lineno)
        fields_b = split_fields(b, lineno)
        for (name, value_a), (_, value_b) in zip(fields_a, fields_b):
            if value_a != value_b:
                return DiffResult(
                    identical=False,
                    line=lineno,
                    field=name,
                    left=a.rstrip("\n"),
                    right=b.rstrip("\n"),
                    reason=f"{name} differs ({value_a} vs {value_b})",
                    compared=compared,
                )
        compared += 1
    return DiffResult(identical=True, compared=compared)


def diff_files(path_a: str, path_b: str) -> DiffResult:
    with open(path_a) as fa, open(path_b) as fb:
        return diff_lines(fa, fb)
