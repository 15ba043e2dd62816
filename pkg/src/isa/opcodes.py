"""
Instruction representation shared by the decoders, the encoder and both engines.
"""
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Any

XLEN_MASK = 0xFFFFFFFF

# Counter CSRs readable with CSRRS rd, csr, x0
CSR_CYCLE = 0xC00
CSR_TIME = 0xC01
CSR_INSTRET = 0xC02
CSR_CYCLEH = 0xC80
CSR_TIMEH = 0xC81
CSR_INSTRETH = 0xC82
COUNTER_CSRS = (CSR_CYCLE, CSR_TIME, CSR_INSTRET, CSR_CYCLEH, CSR_TIMEH, CSR_INSTRETH)


class Op(Enum):
    LUI = "LUI"
    AUIPC = "AUIPC"
    JAL = "JAL"
    JALR = "JALR"
    BEQ = "BEQ"
    BNE = "BNE"
    BLT = "BLT"
    BGE = "BGE"
    BLTU = "BLTU"
    BGEU = "BGEU"
    LB = "LB"
    LH = "LH"
    LW = "LW"
    LBU = "LBU"
    LHU = "LHU"
    SB = "SB"
    SH = "SH"
    SW = "SW"
    ADDI = "ADDI"
    SLTI = "SLTI"
    SLTIU = "SLTIU"
    XORI = "XORI"
    ORI = "ORI"
    ANDI = "ANDI"
    SLLI = "SLLI"
    SRLI = "SRLI"
    SRAI = "SRAI"
    ADD = "ADD"
    SUB = "SUB"
    SLL = "SLL"
    SLT = "SLT"
    SLTU = "SLTU"
    XOR = "XOR"
    SRL = "SRL"
    SRA = "SRA"
    OR = "OR"
    AND = "AND"
    FENCE = "FENCE"
    ECALL = "ECALL"
    EBREAK = "EBREAK"
    CSRR = "CSRR"
    ILLEGAL = "ILLEGAL"


BRANCHES = frozenset({Op.BEQ, Op.BNE, Op.BLT, Op.BGE, Op.BLTU, Op.BGEU})
JUMPS = frozenset({Op.JAL, Op.JALR})
CONTROL = BRANCHES | JUMPS
LOADS = frozenset({Op.LB, Op.LH, Op.LW, Op.LBU, Op.LHU})
STORES = frozenset({Op.SB, Op.SH, Op.SW})
IMM_ALU = frozenset({Op.ADDI, Op.SLTI, Op.SLTIU, Op.XORI, Op.ORI, Op.ANDI, Op.SLLI, Op.SRLI, Op.SRAI})
REG_ALU = frozenset({Op.ADD, Op.SUB, Op.SLL, Op.SLT, Op.SLTU, Op.XOR, Op.SRL, Op.SRA, Op.OR, Op.AND})
HALTS = frozenset({Op.ECALL, Op.EBREAK})

# (size in bytes, sign-extend)
LOAD_WIDTH = {
    Op.LB: (1, True),
    Op.LH: (2, True),
    Op.LW: (4, True),
    Op.LBU: (1, False),
    Op.LHU: (2, False),
}
STORE_WIDTH = {Op.SB: 1, Op.SH: 2, Op.SW: 4}

_READS_RS1 = CONTROL - {Op.JAL} | LOADS | STORES | IMM_ALU | REG_ALU
_READS_RS2 = BRANCHES | STORES | REG_ALU
_WRITES_RD = JUMPS | LOADS | IMM_ALU | REG_ALU | {Op.LUI, Op.AUIPC, Op.CSRR}


def reads_rs1(op: Op) -> bool:
    return op in _READS_RS1


def reads_rs2(op: Op) -> bool:
    return op in _READS_RS2


def writes_rd(op: Op) -> bool:
    return op in _WRITES_RD


def to_signed(value: int, bits: int = 32) -> int:
    """Interpret the low `bits` of value as a two's complement number."""
    value &= (1 << bits) - 1
    if value & (1 << (bits - 1)):
        value -= 1 << bits
    return value


@dataclass(frozen=True)
class RawInst:
    bits: int
    len: int

    def __post_init__(self):
        if self.len not in (2, 4):
            raise ValueError(f"instruction length must be 2 or 4, got {self.len}")
        if (self.len == 2) != ((self.bits & 0b11) != 0b11):
            raise ValueError(f"length {self.len} disagrees with bits {self.bits:#x}")

    def to_bytes(self) -> bytes:
        return (self.bits & ((1 << (8 * self.len)) - 1)).to_bytes(self.len, "little")


@dataclass(frozen=True)
class DecodedInst:
    op: Op
    rd: int = 0
    rs1: int = 0
    rs2: int = 0
    imm: int = 0
    comp: bool = False
    len: int = 4
    raw: int = 0

    @property
    def semantic(self):
        """Fields that must agree between the 16-bit and 32-bit decoders."""
        return (self.op, self.rd, self.rs1, self.rs2, self.imm)

    @property
    def is_control(self) -> bool:
        return self.op in CONTROL

    @property
    def is_branch(self) -> bool:
        return self.op in BRANCHES

    @property
    def is_load(self) -> bool:
        return self.op in LOADS

    def to_dict(self) -> Dict[str, Any]:
        return {
            "op": self.op.value,
            "rd": self.rd,
            "rs1": self.rs1,
            "rs2": self.rs2,
            "imm": self.imm,
            "comp": self.comp,
            "len": self.len,
            "raw": f"{self.raw:08x}"
        }


def illegal(raw: int, comp: bool) -> DecodedInst:
    return DecodedInst(Op.ILLEGAL, comp=comp, len=2 if comp else 4, raw=raw)
