"""
Functional RV32IC reference model.

One instruction per step, no timing. Compressed instructions are expanded with
decompress() and executed through the 32-bit decoder, so this engine never
touches decode16.
"""
import logging
from dataclasses import dataclass, field
from typing import BinaryIO, List, Optional, Tuple, Union

from src.errors import ExitEvent, HaltEvent, IllegalInstruction, MemoryFault
from src.isa.compressed import decompress
from src.isa.decoder import decode32, is_compressed
from src.isa.disasm import disassemble
from src.isa.opcodes import (
    BRANCHES,
    CSR_CYCLEH,
    CSR_INSTRETH,
    CSR_TIMEH,
    DecodedInst,
    HALTS,
    IMM_ALU,
    LOAD_WIDTH,
    Op,
    STORE_WIDTH,
    to_signed,
)
from src.memsys.image import MemoryImage, build_memories
from src.memsys.memory import DEFAULT_SIZE, DataMemory, InstMemory
from src.refmodel.commit_log import CommitRecord
from src.refmodel.status import ExitStatus, RunStatus

MASK = 0xFFFFFFFF

logger = logging.getLogger("rvsim.refmodel")
trace_logger = logging.getLogger("rvsim.trace")


@dataclass
class ArchState:
    pc: int = 0
    regs: List[int] = field(default_factory=lambda: [0] * 32)
    cycle: int = 0
    instret: int = 0

    def write(self, rd: int, value: int) -> None:
        if rd:
            self.regs[rd] = value & MASK


@dataclass
class RefRunResult:
    commits: List[CommitRecord]
    status: ExitStatus
    console: bytes

    @property
    def instructions(self) -> int:
        return len(self.commits)


def _alu(op: Op, a: int, b: int) -> int:
    shamt = b & 0x1F
    if op in (Op.ADD, Op.ADDI):
        return a + b
    if op == Op.SUB:
        return a - b
    if op in (Op.SLL, Op.SLLI):
        return a << shamt
    if op in (Op.SLT, Op.SLTI):
        return int(to_signed(a) < to_signed(b))
    if op in (Op.SLTU, Op.SLTIU):
        return int((a & MASK) < (b & MASK))
    if op in (Op.XOR, Op.XORI):
        return a ^ b
    if op in (Op.SRL, Op.SRLI):
        return (a & MASK) >> shamt
    if op in (Op.SRA, Op.SRAI):
        return to_signed(a) >> shamt
    if op in (Op.OR, Op.ORI):
        return a | b
    if op in (Op.AND, Op.ANDI):
        return a & b
    raise ValueError(f"{op} is not an ALU operation")


def _taken(op: Op, a: int, b: int) -> bool:
    if op == Op.BEQ:
        return a == b
    if op == Op.BNE:
        return a != b
    if op == Op.BLT:
        return to_signed(a) < to_signed(b)
    if op == Op.BGE:
        return to_signed(a) >= to_signed(b)
    if op == Op.BLTU:
        return a < b
    return a >= b


def fetch_decode(pc: int, imem: InstMemory) -> Tuple[int, int, DecodedInst]:
    """Return (raw, length, decoded) for the instruction at pc."""
    low = imem.read_entry(pc)
    if is_compressed(low):
        return low, 2, decode32(decompress(low))
    raw = low | (imem.read_entry((pc + 2) & MASK) << 16)
    return raw, 4, decode32(raw)


def _counter(state: ArchState, csr: int) -> int:
    # cycle, time and instret all count retired instructions here
    value = state.instret
    if csr in (CSR_CYCLEH, CSR_TIMEH, CSR_INSTRETH):
        return (value >> 32) & MASK
    return value & MASK


def step(state: ArchState, imem: InstMemory, dmem: DataMemory) -> Tuple[CommitRecord, Optional[Union[ExitEvent, HaltEvent]]]:
    """Execute one instruction.

    MemoryFault and IllegalInstruction propagate without a commit; an EXIT store
    or ECALL/EBREAK commits and is returned as the event.
    """
    pc = state.pc
    raw, length, inst = fetch_decode(pc, imem)
    if inst.op == Op.ILLEGAL:
        raise IllegalInstruction(
            f"illegal instruction {raw:0{2 * length}x} at {pc:#010x}",
            "E_ILLEGAL",
            {"pc": pc, "raw": raw}
        )

    regs = state.regs
    a, b = regs[inst.rs1], regs[inst.rs2]
    next_pc = (pc + length) & MASK
    event = None
    op = inst.op

    if op == Op.LUI:
        state.write(inst.rd, inst.imm)
    elif op == Op.AUIPC:
        state.write(inst.rd, pc + inst.imm)
    elif op == Op.JAL:
        state.write(inst.rd, next_pc)
        next_pc = (pc + inst.imm) & MASK
    elif op == Op.JALR:
        target = (a + inst.imm) & MASK & ~1
        state.write(inst.rd, next_pc)
        next_pc = target
    elif op in BRANCHES:
        if _taken(op, a, b):
            next_pc = (pc + inst.imm) & MASK
    elif op in LOAD_WIDTH:
        size, signed = LOAD_WIDTH[op]
        state.write(inst.rd, dmem.data_access((a + inst.imm) & MASK, size, signed))
    elif op in STORE_WIDTH:
        try:
            dmem.data_access((a + inst.imm) & MASK, STORE_WIDTH[op], write=True, value=b)
        except ExitEvent as e:
            event = e
    elif op == Op.CSRR:
        state.write(inst.rd, _counter(state, inst.imm))
    elif op in HALTS:
        event = HaltEvent(op.value, pc)
    elif op == Op.FENCE:
        pass
    elif op in IMM_ALU:
        state.write(inst.rd, _alu(op, a, inst.imm & MASK))
    else:
        state.write(inst.rd, _alu(op, a, b))

    state.pc = next_pc
    state.instret += 1
    state.cycle = state.instret
    record = CommitRecord(pc, raw, tuple(regs))
    if trace_logger.isEnabledFor(logging.DEBUG):
        trace_logger.debug(f"ref {pc:08x} {disassemble(inst)}")
    return record, event


def run(image: MemoryImage, max_steps: int = 1_000_000, imem_bytes: int = DEFAULT_SIZE,
        dmem_bytes: int = DEFAULT_SIZE, sp_init: bool = False, console: Optional[BinaryIO] = None) -> RefRunResult:
    """Run until an exit store, ECALL/EBREAK, a fault, or max_steps commits."""
    imem, dmem = build_memories(image, imem_bytes, dmem_bytes, console=console)
    state = ArchState()
    if sp_init:
        state.write(2, dmem.size_bytes)

    commits: List[CommitRecord] = []
    status = None
    while status is None:
        if len(commits) >= max_steps:
            status = ExitStatus(RunStatus.STEP_LIMIT, reason=f"step limit {max_steps} reached")
            break
        try:
            record, event = step(state, imem, dmem)
        except IllegalInstruction as e:
            status = ExitStatus(RunStatus.ILLEGAL, reason=e.message, error=e)
            break
        except MemoryFault as e:
            status = ExitStatus(RunStatus.FAULT, reason=e.message, error=e)
            break
        commits.append(record)
        if isinstance(event, ExitEvent):
            status = ExitStatus(RunStatus.EXIT, code=event.code, reason=str(event))
        elif isinstance(event, HaltEvent):
            status = ExitStatus(RunStatus.HALT, reason=str(event))

    logger.info(f"reference run of {image.source}: {status.status.value} after {len(commits)} commits")
    return RefRunResult(commits, status, bytes(dmem.console))
