# Execute-stage arithmetic for the pipelined core. Operands are unsigned 32-bit.
import operator
from typing import Callable, Dict

from src.isa.opcodes import Op, to_signed

MASK = 0xFFFFFFFF


def _sra(a: int, b: int) -> int:
    return to_signed(a) >> (b & 0x1F)


def _slt(a: int, b: int) -> int:
    return 1 if to_signed(a) < to_signed(b) else 0


_ALU: Dict[Op, Callable[[int, int], int]] = {
    Op.ADD: operator.add,
    Op.SUB: operator.sub,
    Op.SLL: lambda a, b: a << (b & 0x1F),
    Op.SLT: _slt,
    Op.SLTU: lambda a, b: 1 if a < b else 0,
    Op.XOR: operator.xor,
    Op.SRL: lambda a, b: a >> (b & 0x1F),
    Op.SRA: _sra,
    Op.OR: operator.or_,
    Op.AND: operator.and_,
}
# immediate forms share the register-form functions
_ALU.update({
    Op.ADDI: _ALU[Op.ADD],
    Op.SLTI: _ALU[Op.SLT],
    Op.SLTIU: _ALU[Op.SLTU],
    Op.XORI: _ALU[Op.XOR],
    Op.ORI: _ALU[Op.OR],
    Op.ANDI: _ALU[Op.AND],
    Op.SLLI: _ALU[Op.SLL],
    Op.SRLI: _ALU[Op.SRL],
    Op.SRAI: _ALU[Op.SRA],
})

_CONDITIONS: Dict[Op, Callable[[int, int], bool]] = {
    Op.BEQ: operator.eq,
    Op.BNE: operator.ne,
    Op.BLT: lambda a, b: to_signed(a) < to_signed(b),
    Op.BGE: lambda a, b: to_signed(a) >= to_signed(b),
    Op.BLTU: operator.lt,
    Op.BGEU: operator.ge,
}


def alu(op: Op, a: int, b: int) -> int:
    return _ALU[op](a & MASK, b & MASK) & MASK


def branch_condition(op: Op, a: int, b: int) -> bool:
    return _CONDITIONS[op](a & MASK, b & MASK)
