"""
Label-resolving program emitter over the encoder.

Layout is fixed at emission time (every instruction's size is known as soon as
it is emitted), labels are resolved in a second pass when build() encodes.

    b = ProgramBuilder()
    b.li(8, 100)
    b.label("loop")
    b.emit(Op.ADDI, rd=8, rs1=8, imm=-1, c=True)
    b.emit(Op.BNE, rs1=8, rs2=0, target="loop")
    b.exit()
    image = b.build()
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple, Union

from src.errors import EncodingError
from src.isa.encoder import encode, instr, is_compressible
from src.isa.opcodes import DecodedInst, Op, to_signed

EXIT_ADDR = 0xFFFF0000
PUTCHAR_ADDR = 0xFFFF0004

logger = logging.getLogger("rvsim.isa.program")


@dataclass
class _Slot:
    addr: int
    op: Op
    rd: int = 0
    rs1: int = 0
    rs2: int = 0
    imm: int = 0
    target: Optional[str] = None
    base: Optional[str] = None
    compressed: bool = False

    @property
    def size(self) -> int:
        return 2 if self.compressed else 4


@dataclass
class _Data:
    addr: int
    payload: bytes


@dataclass
class ProgramBuilder:
    origin: int = 0
    _items: List[Union[_Slot, _Data]] = field(default_factory=list)
    _labels: Dict[str, int] = field(default_factory=dict)
    _pc: int = 0

    def __post_init__(self):
        self._pc = self.origin

    @property
    def pc(self) -> int:
        return self._pc

    @property
    def labels(self) -> Dict[str, int]:
        return dict(self._labels)

    def label(self, name: str) -> int:
        if name in self._labels:
            raise EncodingError(f"duplicate label {name!r}", "E_DUPLICATE_LABEL", {"label": name})
        self._labels[name] = self._pc
        return self._pc

    def emit(self, op: Op, rd: int = 0, rs1: int = 0, rs2: int = 0, imm: int = 0,
             target: Optional[str] = None, base: Optional[str] = None,
             c: Union[bool, str] = False) -> int:
        """Append one instruction and return its address.

        `target` names a label whose pc-relative offset becomes the immediate
        (relative to `base` when given, otherwise to this instruction).
        `c=True` demands the compressed form; `c="auto"` picks it when the
        operands fit, which is only decidable for label-free instructions.
        """
        if c == "auto":
            c = target is None and is_compressible(instr(op, rd, rs1, rs2, imm))
        slot = _Slot(self._pc, op, rd, rs1, rs2, imm, target, base, bool(c))
        self._items.append(slot)
        self._pc += slot.size
        return slot.addr

    def li(self, rd: int, value: int, c: Union[bool, str] = "auto") -> None:
        """Load a 32-bit constant with ADDI, LUI or LUI+ADDI."""
        value = to_signed(value)
        if -2048 <= value < 2048:
            self.emit(Op.ADDI, rd=rd, rs1=0, imm=value, c=c)
            return
        hi = to_signed(((value + 0x800) >> 12) << 12)
        lo = value - hi
        self.emit(Op.LUI, rd=rd, imm=hi, c=c)
        if lo:
            self.emit(Op.ADDI, rd=rd, rs1=rd, imm=lo, c=c)

    def exit(self, code_reg: int = 0, scratch: int = 5) -> None:
        """Store `code_reg` to the EXIT MMIO address."""
        self.emit(Op.LUI, rd=scratch, imm=to_signed(EXIT_ADDR), c=True)
        self.emit(Op.SW, rs1=scratch, rs2=code_reg, imm=0)

    def putchar(self, value_reg: int, scratch: int = 5) -> None:
        self.emit(Op.LUI, rd=scratch, imm=to_signed(EXIT_ADDR), c=True)
        self.emit(Op.SW, rs1=scratch, rs2=value_reg, imm=PUTCHAR_ADDR - EXIT_ADDR)

    def org(self, addr: int) -> None:
        """Move the emission point forward; the gap is zero filled."""
        if addr < self._pc:
            raise EncodingError(f"org {addr:#x} is behind pc {self._pc:#x}", "E_ORG_BACKWARDS")
        self._pc = addr

    def words(self, values: List[int]) -> int:
        addr = self._pc
        payload = b"".join((v & 0xFFFFFFFF).to_bytes(4, "little") for v in values)
        self._items.append(_Data(addr, payload))
        self._pc += len(payload)
        return addr

    def layout(self) -> List[Tuple[int, int]]:
        """(address, size) of every emitted instruction."""
        return [(s.addr, s.size) for s in self._items if isinstance(s, _Slot)]

    def resolve(self) -> List[DecodedInst]:
        """Instruction descriptions with label offsets filled in."""
        out = []
        for slot in self._items:
            if isinstance(slot, _Slot):
                out.append(instr(slot.op, slot.rd, slot.rs1, slot.rs2, self._immediate(slot)))
        return out

    def _immediate(self, slot: _Slot) -> int:
        if slot.target is None:
            return slot.imm
        if slot.target not in self._labels:
            raise EncodingError(f"undefined label {slot.target!r}", "E_UNDEFINED_LABEL",
                                {"label": slot.target, "addr": slot.addr})
        base = slot.addr if slot.base is None else self._labels[slot.base]
        return self._labels[slot.target] - base + slot.imm

    def build(self) -> bytes:
        """Encode everything into a flat image starting at `origin`."""
        image = bytearray(self._pc - self.origin)
        for item in self._items:
            offset = item.addr - self.origin
            if isinstance(item, _Data):
                chunk = item.payload
            else:
                desc = instr(item.op, item.rd, item.rs1, item.rs2, self._immediate(item))
                chunk = encode(desc, compressed=item.compressed).to_bytes()
            image[offset:offset + len(chunk)] = chunk
        logger.debug(f"built {len(image)} byte image with {len(self._labels)} labels")
        return bytes(image)
