"""
Ideal single-cycle Harvard memories.

InstMemory is organised as 16-bit entries with two read ports; the baseline
fetch units view the same storage as 32-bit entries. DataMemory is byte
addressed with naturally aligned 1/2/4 byte accesses and two MMIO registers.
"""
import logging
from typing import BinaryIO, Optional, Tuple

import numpy as np

from src.errors import ConfigError, ExitEvent, ImageError, MemoryFault

EXIT_ADDR = 0xFFFF0000
PUTCHAR_ADDR = 0xFFFF0004
MMIO_MAP = {EXIT_ADDR: "exit", PUTCHAR_ADDR: "putchar"}

DEFAULT_SIZE = 64 * 1024

logger = logging.getLogger("rvsim.memsys")


def _check_size(size_bytes: int, what: str) -> None:
    if size_bytes < 4 or size_bytes & (size_bytes - 1):
        raise ConfigError(
            f"{what} size must be a power of two of at least 4 bytes",
            "E_MEMORY_SIZE",
            {"size_bytes": size_bytes}
        )


class InstMemory:
    def __init__(self, size_bytes: int = DEFAULT_SIZE):
        _check_size(size_bytes, "instruction memory")
        self.size_bytes = size_bytes
        self.entries = np.zeros(size_bytes // 2, dtype="<u2")

    def load(self, payload: bytes, origin: int = 0) -> None:
        if origin % 2 or origin + len(payload) > self.size_bytes:
            raise ImageError(
                "image exceeds instruction memory capacity",
                "E_IMAGE_TOO_LARGE",
                {"origin": origin, "image_bytes": len(payload), "capacity": self.size_bytes}
            )
        raw = self.entries.view(np.uint8)
        raw[origin:origin + len(payload)] = np.frombuffer(payload, dtype=np.uint8)

    def _index(self, addr: int) -> int:
        if addr % 2 or not 0 <= addr < self.size_bytes:
            raise MemoryFault(
                f"instruction fetch outside memory at {addr:#010x}",
                "E_FETCH_FAULT",
                {"addr": addr, "capacity": self.size_bytes}
            )
        return addr >> 1

    def read_entry(self, addr: int) -> int:
        return int(self.entries[self._index(addr)])

    def read_entry_pair(self, pc: int, pc2: int) -> Tuple[int, int]:
        """Both halfwords in one access, one per read port."""
        return self.read_entry(pc), self.read_entry(pc2)

    def read_word_entry(self, addr: int) -> int:
        """One 32-bit entry, as seen by the single-port baseline units."""
        if addr % 4:
            raise MemoryFault(f"32-bit entry read at unaligned {addr:#010x}", "E_FETCH_FAULT", {"addr": addr})
        low = self.read_entry(addr)
        return low | (self.read_entry(addr + 2) << 16)


class DataMemory:
    def __init__(self, size_bytes: int = DEFAULT_SIZE, console: Optional[BinaryIO] = None):
        _check_size(size_bytes, "data memory")
        self.size_bytes = size_bytes
        self.data = np.zeros(size_bytes, dtype=np.uint8)
        self._views = {
            (1, False): self.data,
            (1, True): self.data.view(np.int8),
            (2, False): self.data.view("<u2"),
            (2, True): self.data.view("<i2"),
            (4, False): self.data.view("<u4"),
            (4, True): self.data.view("<i4"),
        }
        self.console = bytearray()
        self._stream = console

    def load(self, payload: bytes, origin: int = 0) -> None:
        if origin + len(payload) > self.size_bytes:
            raise ImageError(
                "image exceeds data memory capacity",
                "E_IMAGE_TOO_LARGE",
                {"origin": origin, "image_bytes": len(payload), "capacity": self.size_bytes}
            )
        self.data[origin:origin + len(payload)] = np.frombuffer(payload, dtype=np.uint8)

    def _check(self, addr: int, size: int) -> None:
        if size not in (1, 2, 4):
            raise MemoryFault(f"unsupported access size {size}", "E_ACCESS_SIZE", {"size": size})
        if addr % size:
            raise MemoryFault(
                f"misaligned {size}-byte access at {addr:#010x}",
                "E_MISALIGNED",
                {"addr": addr, "size": size}
            )
        if addr + size > self.size_bytes:
            raise MemoryFault(
                f"data access outside memory at {addr:#010x}",
                "E_OUT_OF_RANGE",
                {"addr": addr, "size": size, "capacity": self.size_bytes}
            )

    def load_value(self, addr: int, size: int, signed: bool = False) -> int:
        addr &= 0xFFFFFFFF
        if addr in MMIO_MAP:
            return 0
        self._check(addr, size)
        return int(self._views[(size, signed)][addr // size])

    def store_value(self, addr: int, size: int, value: int) -> None:
        addr &= 0xFFFFFFFF
        if addr in MMIO_MAP:
            self._mmio_write(addr, value)
            return
        self._check(addr, size)
        self._views[(size, False)][addr // size] = value & ((1 << (8 * size)) - 1)

    def data_access(self, addr: int, size: int, signed: bool = False,
                    write: bool = False, value: int = 0) -> Optional[int]:
        """Single entry point used by both engines; raises ExitEvent or MemoryFault."""
        if write:
            self.store_value(addr, size, value)
            return None
        return self.load_value(addr, size, signed)

    def _mmio_write(self, addr: int, value: int) -> None:
        if MMIO_MAP[addr] == "exit":
            raise ExitEvent(value & 0xFFFFFFFF)
        char = value & 0xFF
        self.console.append(char)
        if self._stream is not None:
            self._stream.write(bytes([char]))
            self._stream.flush()
