"""
Pipelined branch predictor: PHT of 2-bit counters plus an untagged BTB.

The lookup made while an instruction is being fetched predicts the *next*
instruction in memory, so a branch's counter and target live under the address
of its memory predecessor. Updates from the MA stage therefore index with that
predecessor address, and are suppressed when the predecessor is not known.
"""
import logging
from dataclasses import asdict, dataclass
from enum import Enum
from typing import Any, Dict

import numpy as np

from src.errors import ConfigError

PHT_ENTRIES = 8192
BTB_ENTRIES = 512
PHT_INIT = 1  # weakly not-taken

logger = logging.getLogger("rvsim.bpred")


class Scheme(str, Enum):
    GSHARE = "gshare"
    BIMODAL = "bimodal"
    NONE = "none"


@dataclass(frozen=True)
class Prediction:
    taken: bool
    target: int
    target_2: int
    for_pc: int
    ghr: int = 0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "taken": self.taken,
            "target": f"{self.target:08x}",
            "for_pc": f"{self.for_pc:08x}",
            "ghr": self.ghr
        }


@dataclass
class PredictorStats:
    lookups: int = 0
    predicted_taken: int = 0
    updates: int = 0
    prohibited_updates: int = 0
    alias_corrections: int = 0

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def pht_index(pc: int, ghr: int, scheme: str = Scheme.GSHARE, entries: int = PHT_ENTRIES) -> int:
    if Scheme(scheme) == Scheme.GSHARE:
        return ((pc >> 1) ^ ghr) % entries
    return (pc >> 1) % entries


def btb_index(pc: int, entries: int = BTB_ENTRIES) -> int:
    return (pc >> 1) % entries


class BranchPredictor:
    def __init__(self, scheme: str = "gshare", pht_entries: int = PHT_ENTRIES, btb_entries: int = BTB_ENTRIES):
        try:
            self.scheme = Scheme(scheme)
        except ValueError:
            raise ConfigError(f"unknown predictor {scheme!r}", "E_BPRED_KIND",
                              {"choices": [s.value for s in Scheme]})
        for name, size in (("pht", pht_entries), ("btb", btb_entries)):
            if size < 1 or size & (size - 1):
                raise ConfigError(f"{name} size must be a power of two", "E_BPRED_SIZE", {name: size})
        self.pht = np.full(pht_entries, PHT_INIT, dtype=np.uint8)
        self.btb = np.zeros(btb_entries, dtype=np.uint32)
        self.ghr_bits = pht_entries.bit_length() - 1
        self.ghr = 0
        self.stats = PredictorStats()

    @property
    def enabled(self) -> bool:
        return self.scheme != Scheme.NONE

    def index(self, pc: int, ghr: int) -> int:
        return pht_index(pc, ghr, self.scheme, len(self.pht))

    def predict(self, lookup_pc: int, for_pc: int) -> Prediction:
        """Look up at the pc being fetched; the result applies to `for_pc` on the next cycle."""
        self.stats.lookups += 1
        ghr = self.ghr
        taken = self.enabled and int(self.pht[self.index(lookup_pc, ghr)]) >= 2
        target = int(self.btb[btb_index(lookup_pc, len(self.btb))])
        if taken:
            self.stats.predicted_taken += 1
        return Prediction(taken, target, (target + 2) & 0xFFFFFFFF, for_pc, ghr)

    def update(self, branch_pc: int, pred_addr: int, outcome: bool, target: int,
               prohibit: bool, ghr_snapshot: int, conditional: bool = True) -> None:
        if conditional:
            self.shift_history(outcome)
        if not self.enabled:
            return
        if prohibit:
            self.stats.prohibited_updates += 1
            logger.debug(f"prohibited update for branch at {branch_pc:#x}")
            return
        self.stats.updates += 1
        idx = self.index(pred_addr, ghr_snapshot)
        counter = int(self.pht[idx])
        self.pht[idx] = min(counter + 1, 3) if outcome else max(counter - 1, 0)
        if outcome:
            self.btb[btb_index(pred_addr, len(self.btb))] = target & 0xFFFFFFFF

    def correct_alias(self, inst_pc: int, pred_addr: int, prohibit: bool, ghr_snapshot: int) -> None:
        """A non-control instruction was predicted taken; train its entry toward not-taken."""
        self.stats.alias_corrections += 1
        self.update(inst_pc, pred_addr, False, 0, prohibit, ghr_snapshot, conditional=False)

    def shift_history(self, outcome: bool) -> None:
        self.ghr = ((self.ghr << 1) | int(outcome)) & ((1 << self.ghr_bits) - 1)

    def to_dict(self) -> Dict[str, Any]:
        return {"scheme": self.scheme.value, "ghr": self.ghr, **self.stats.to_dict()}
