"""
Instruction fetch units.

All three units deliver the same (pc, raw) stream; they differ only in how many
cycles a fetch costs:

  dualpc  two program counters (pc, pc+2) read two 16-bit entries through both
          memory ports, so every instruction arrives in one cycle.
  buffer  32-bit entries plus a one-halfword buffer. Sequential flow is always
          one cycle; a redirect empties the buffer, and a redirect onto a 32-bit
          instruction at pc % 4 == 2 costs a second access (a fetch miss).
  naive   32-bit entries with no buffer: every 32-bit instruction at
          pc % 4 == 2 takes two accesses.
"""
import logging
from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, Optional, Protocol, Tuple

from src.errors import ConfigError, TwinDatapathError
from src.isa.decoder import is_compressed
from src.isa.opcodes import RawInst
from src.memsys.memory import InstMemory

logger = logging.getLogger("rvsim.fetch")


class FetchKind(str, Enum):
    DUALPC = "dualpc"
    BUFFER = "buffer"
    NAIVE = "naive"


@dataclass(frozen=True)
class FetchResult:
    raw: RawInst
    pc: int
    cycles: int = 1
    fetch_miss: bool = False

    def to_dict(self) -> Dict[str, Any]:
        return {
            "pc": f"{self.pc:08x}",
            "raw": f"{self.raw.bits:0{2 * self.raw.len}x}",
            "len": self.raw.len,
            "cycles": self.cycles,
            "fetch_miss": self.fetch_miss
        }


@dataclass(frozen=True)
class DualPCState:
    pc: int
    pc2: int

    def check(self) -> None:
        if self.pc2 != (self.pc + 2) & 0xFFFFFFFF:
            raise TwinDatapathError(
                "fetch pc2 is not pc + 2",
                "E_TWIN_PC",
                {"pc": self.pc, "pc2": self.pc2}
            )


@dataclass(frozen=True)
class BufferState:
    """Empty when half is None, otherwise HasHalf(half, addr)."""
    half: Optional[int] = None
    addr: Optional[int] = None

    @property
    def empty(self) -> bool:
        return self.half is None


EMPTY = BufferState()


def _combine(low: int, high: int) -> RawInst:
    if is_compressed(low):
        return RawInst(low, 2)
    return RawInst(low | (high << 16), 4)


def fetch_dualpc(state: DualPCState, imem: InstMemory) -> FetchResult:
    state.check()
    low, high = imem.read_entry_pair(state.pc, state.pc2)
    return FetchResult(_combine(low, high), state.pc)


def fetch_buffered(state: BufferState, pc: int, redirect: bool,
                   imem: InstMemory) -> Tuple[FetchResult, BufferState]:
    if redirect:
        state = EMPTY

    if pc % 4 == 0:
        word = imem.read_word_entry(pc)
        raw = _combine(word & 0xFFFF, word >> 16)
        if raw.len == 2:
            return FetchResult(raw, pc), BufferState(word >> 16, pc + 2)
        return FetchResult(raw, pc), EMPTY

    buffered = not state.empty and state.addr == pc
    half = state.half if buffered else imem.read_word_entry(pc - 2) >> 16
    if is_compressed(half):
        return FetchResult(RawInst(half, 2), pc), EMPTY

    # the upper half lives in the next entry; without a buffered low half that
    # is a second access
    missed = not buffered
    following = imem.read_word_entry(pc + 2)
    raw = RawInst(half | ((following & 0xFFFF) << 16), 4)
    result = FetchResult(raw, pc, cycles=2 if missed else 1, fetch_miss=missed)
    return result, BufferState(following >> 16, pc + 4)


def fetch_naive32(pc: int, imem: InstMemory) -> FetchResult:
    if pc % 4 == 0:
        word = imem.read_word_entry(pc)
        return FetchResult(_combine(word & 0xFFFF, word >> 16), pc)
    half = imem.read_word_entry(pc - 2) >> 16
    if is_compressed(half):
        return FetchResult(RawInst(half, 2), pc)
    following = imem.read_word_entry(pc + 2)
    return FetchResult(RawInst(half | ((following & 0xFFFF) << 16), 4), pc, cycles=2, fetch_miss=True)


class FetchUnit(Protocol):
    kind: FetchKind

    def fetch(self, pc: int, pc2: int, redirect: bool) -> FetchResult:
        ...


class DualPCFetchUnit:
    kind = FetchKind.DUALPC

    def __init__(self, imem: InstMemory):
        self.imem = imem

    def fetch(self, pc: int, pc2: int, redirect: bool) -> FetchResult:
        return fetch_dualpc(DualPCState(pc, pc2), self.imem)


class BufferedFetchUnit:
    kind = FetchKind.BUFFER

    def __init__(self, imem: InstMemory):
        self.imem = imem
        self.state = EMPTY

    def fetch(self, pc: int, pc2: int, redirect: bool) -> FetchResult:
        result, self.state = fetch_buffered(self.state, pc, redirect, self.imem)
        return result


class NaiveFetchUnit:
    kind = FetchKind.NAIVE

    def __init__(self, imem: InstMemory):
        self.imem = imem

    def fetch(self, pc: int, pc2: int, redirect: bool) -> FetchResult:
        return fetch_naive32(pc, self.imem)


_UNITS = {
    FetchKind.DUALPC: DualPCFetchUnit,
    FetchKind.BUFFER: BufferedFetchUnit,
    FetchKind.NAIVE: NaiveFetchUnit,
}


def make_fetch_unit(kind: str, imem: InstMemory) -> FetchUnit:
    try:
        unit_cls = _UNITS[FetchKind(kind)]
    except ValueError:
        raise ConfigError(f"unknown fetch unit {kind!r}", "E_FETCH_KIND",
                          {"choices": [k.value for k in FetchKind]})
    logger.debug(f"fetch unit {unit_cls.kind.value} over {imem.size_bytes} byte imem")
    return unit_cls(imem)
