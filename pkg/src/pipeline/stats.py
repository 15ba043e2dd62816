from dataclasses import dataclass
from typing import Any, Dict, List, Optional

CSV_HEADER = [
    "config", "program", "cycles", "instructions", "ipc", "branches",
    "mispredicts", "hit_rate", "fetch_misses", "stalls",
]
NOT_APPLICABLE = "N/A"


@dataclass
class Stats:
    cycles: int = 0
    instructions: int = 0
    branches: int = 0
    mispredicts: int = 0
    fetch_misses: int = 0
    load_use_stalls: int = 0
    prohibited_updates: int = 0
    flushed_slots: int = 0
    fetch_cycles: int = 0
    predictor_enabled: bool = True

    @property
    def ipc(self) -> float:
        return self.instructions / self.cycles if self.cycles else 0.0

    @property
    def hit_rate(self) -> Optional[float]:
        """Fraction of committed control instructions whose next pc was fetched correctly."""
        if not self.predictor_enabled:
            return None
        if not self.branches:
            return 1.0
        return (self.branches - self.mispredicts) / self.branches

    def to_dict(self) -> Dict[str, Any]:
        return {
            "cycles": self.cycles,
            "instructions": self.instructions,
            "ipc": self.ipc,
            "branches": self.branches,
            "mispredicts": self.mispredicts,
            "hit_rate": self.hit_rate,
            "fetch_misses": self.fetch_misses,
            "load_use_stalls": self.load_use_stalls,
            "prohibited_updates": self.prohibited_updates,
            "flushed_slots": self.flushed_slots,
            "fetch_cycles": self.fetch_cycles
        }

    def csv_row(self, config: str, program: str) -> List[str]:
        hit_rate = self.hit_rate
        return [
            config,
            program,
            str(self.cycles),
            str(self.instructions),
            repr(self.ipc),
            str(self.branches),
            str(self.mispredicts),
            NOT_APPLICABLE if hit_rate is None else repr(hit_rate),
            str(self.fetch_misses),
            str(self.load_use_stalls),
        ]
