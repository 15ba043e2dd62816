"""
RV32I decoding.

decode32 never raises on a 32-bit word: unrecognised encodings decode to an
ILLEGAL instruction carrying the raw bits.
"""
from functools import lru_cache

from src.errors import DecodeError
from src.isa.opcodes import (
    COUNTER_CSRS,
    DecodedInst,
    Op,
    illegal,
    to_signed,
)

OPC_LOAD = 0x03
OPC_MISC_MEM = 0x0F
OPC_OP_IMM = 0x13
OPC_AUIPC = 0x17
OPC_STORE = 0x23
OPC_OP = 0x33
OPC_LUI = 0x37
OPC_BRANCH = 0x63
OPC_JALR = 0x67
OPC_JAL = 0x6F
OPC_SYSTEM = 0x73

_BRANCH_F3 = {0: Op.BEQ, 1: Op.BNE, 4: Op.BLT, 5: Op.BGE, 6: Op.BLTU, 7: Op.BGEU}
_LOAD_F3 = {0: Op.LB, 1: Op.LH, 2: Op.LW, 4: Op.LBU, 5: Op.LHU}
_STORE_F3 = {0: Op.SB, 1: Op.SH, 2: Op.SW}
_OP_IMM_F3 = {0: Op.ADDI, 2: Op.SLTI, 3: Op.SLTIU, 4: Op.XORI, 6: Op.ORI, 7: Op.ANDI}
_OP_F3F7 = {
    (0, 0x00): Op.ADD,
    (0, 0x20): Op.SUB,
    (1, 0x00): Op.SLL,
    (2, 0x00): Op.SLT,
    (3, 0x00): Op.SLTU,
    (4, 0x00): Op.XOR,
    (5, 0x00): Op.SRL,
    (5, 0x20): Op.SRA,
    (6, 0x00): Op.OR,
    (7, 0x00): Op.AND,
}

ECALL_WORD = 0x00000073
EBREAK_WORD = 0x00100073


def is_compressed(halfword: int) -> bool:
    """RISC-V length rule: only a low bit pair of 0b11 starts a 32-bit instruction."""
    return (halfword & 0b11) != 0b11


def imm_i(word: int) -> int:
    return to_signed(word >> 20, 12)


def imm_s(word: int) -> int:
    return to_signed(((word >> 25) << 5) | ((word >> 7) & 0x1F), 12)


def imm_b(word: int) -> int:
    value = (((word >> 31) & 1) << 12) \
        | (((word >> 7) & 1) << 11) \
        | (((word >> 25) & 0x3F) << 5) \
        | (((word >> 8) & 0xF) << 1)
    return to_signed(value, 13)


def imm_u(word: int) -> int:
    return to_signed(word & 0xFFFFF000, 32)


def imm_j(word: int) -> int:
    value = (((word >> 31) & 1) << 20) \
        | (((word >> 12) & 0xFF) << 12) \
        | (((word >> 20) & 1) << 11) \
        | (((word >> 21) & 0x3FF) << 1)
    return to_signed(value, 21)


@lru_cache(maxsize=1 << 16)
def decode32(word: int) -> DecodedInst:
    """Decode a 32-bit RV32I instruction word."""
    word &= 0xFFFFFFFF
    if (word & 0b11) != 0b11:
        raise DecodeError(
            "decode32 called on a compressed encoding",
            "E_DECODE_PRECONDITION",
            {"word": f"{word:08x}"}
        )

    opcode = word & 0x7F
    rd = (word >> 7) & 0x1F
    funct3 = (word >> 12) & 0x7
    rs1 = (word >> 15) & 0x1F
    rs2 = (word >> 20) & 0x1F
    funct7 = word >> 25

    def inst(op, rd=0, rs1=0, rs2=0, imm=0):
        return DecodedInst(op, rd=rd, rs1=rs1, rs2=rs2, imm=imm, comp=False, len=4, raw=word)

    if opcode == OPC_LUI:
        return inst(Op.LUI, rd=rd, imm=imm_u(word))
    if opcode == OPC_AUIPC:
        return inst(Op.AUIPC, rd=rd, imm=imm_u(word))
    if opcode == OPC_JAL:
        return inst(Op.JAL, rd=rd, imm=imm_j(word))
    if opcode == OPC_JALR:
        if funct3 != 0:
            return illegal(word, False)
        return inst(Op.JALR, rd=rd, rs1=rs1, imm=imm_i(word))
    if opcode == OPC_BRANCH:
        op = _BRANCH_F3.get(funct3)
        if op is None:
            return illegal(word, False)
        return inst(op, rs1=rs1, rs2=rs2, imm=imm_b(word))
    if opcode == OPC_LOAD:
        op = _LOAD_F3.get(funct3)
        if op is None:
            return illegal(word, False)
        return inst(op, rd=rd, rs1=rs1, imm=imm_i(word))
    if opcode == OPC_STORE:
        op = _STORE_F3.get(funct3)
        if op is None:
            return illegal(word, False)
        return inst(op, rs1=rs1, rs2=rs2, imm=imm_s(word))
    if opcode == OPC_OP_IMM:
        if funct3 == 1:
            if funct7 != 0:
                return illegal(word, False)
            return inst(Op.SLLI, rd=rd, rs1=rs1, imm=rs2)
        if funct3 == 5:
            if funct7 == 0x00:
                return inst(Op.SRLI, rd=rd, rs1=rs1, imm=rs2)
            if funct7 == 0x20:
                return inst(Op.SRAI, rd=rd, rs1=rs1, imm=rs2)
            return illegal(word, False)
        return inst(_OP_IMM_F3[funct3], rd=rd, rs1=rs1, imm=imm_i(word))
    if opcode == OPC_OP:
        op = _OP_F3F7.get((funct3, funct7))
        if op is None:
            return illegal(word, False)
        return inst(op, rd=rd, rs1=rs1, rs2=rs2)
    if opcode == OPC_MISC_MEM:
        # FENCE and FENCE.I are architectural NOPs on ideal Harvard memories
        if funct3 in (0, 1):
            return inst(Op.FENCE)
        return illegal(word, False)
    if opcode == OPC_SYSTEM:
        if word == ECALL_WORD:
            return inst(Op.ECALL)
        if word == EBREAK_WORD:
            return inst(Op.EBREAK)
        csr = word >> 20
        if funct3 == 2 and rs1 == 0 and csr in COUNTER_CSRS:
            return inst(Op.CSRR, rd=rd, imm=csr)
        return illegal(word, False)
    return illegal(word, False)
