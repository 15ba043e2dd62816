"""
Programmatic RV32IC encoder used to synthesize test programs.

    >>> encode(instr(Op.ADDI, rd=10, rs1=0, imm=1), compressed=True)
    RawInst(bits=17669, len=2)      # 0x4505, C.LI a0, 1
"""
from typing import Callable, Dict, Optional

from src.errors import EncodingError
from src.isa.opcodes import (
    BRANCHES,
    COUNTER_CSRS,
    DecodedInst,
    IMM_ALU,
    LOADS,
    Op,
    RawInst,
    REG_ALU,
    STORES,
)

_OPC = {
    "LUI": 0x37, "AUIPC": 0x17, "JAL": 0x6F, "JALR": 0x67, "BRANCH": 0x63,
    "LOAD": 0x03, "STORE": 0x23, "OP_IMM": 0x13, "OP": 0x33, "MISC_MEM": 0x0F, "SYSTEM": 0x73,
}
_BRANCH_F3 = {Op.BEQ: 0, Op.BNE: 1, Op.BLT: 4, Op.BGE: 5, Op.BLTU: 6, Op.BGEU: 7}
_LOAD_F3 = {Op.LB: 0, Op.LH: 1, Op.LW: 2, Op.LBU: 4, Op.LHU: 5}
_STORE_F3 = {Op.SB: 0, Op.SH: 1, Op.SW: 2}
_OP_IMM_F3 = {Op.ADDI: 0, Op.SLTI: 2, Op.SLTIU: 3, Op.XORI: 4, Op.ORI: 6, Op.ANDI: 7,
              Op.SLLI: 1, Op.SRLI: 5, Op.SRAI: 5}
_OP_F3F7 = {
    Op.ADD: (0, 0x00), Op.SUB: (0, 0x20), Op.SLL: (1, 0x00), Op.SLT: (2, 0x00), Op.SLTU: (3, 0x00),
    Op.XOR: (4, 0x00), Op.SRL: (5, 0x00), Op.SRA: (5, 0x20), Op.OR: (6, 0x00), Op.AND: (7, 0x00),
}
FENCE_WORD = 0x0FF0000F


def instr(op: Op, rd: int = 0, rs1: int = 0, rs2: int = 0, imm: int = 0) -> DecodedInst:
    """Build an instruction description for encode()."""
    return DecodedInst(op, rd=rd, rs1=rs1, rs2=rs2, imm=imm)


def _fail(inst: DecodedInst, reason: str, code: str = "E_NOT_ENCODABLE") -> EncodingError:
    return EncodingError(reason, code, {"inst": inst.to_dict()})


def _check_regs(inst: DecodedInst) -> None:
    for name in ("rd", "rs1", "rs2"):
        value = getattr(inst, name)
        if not 0 <= value <= 31:
            raise _fail(inst, f"{name}=x{value} is not a register")


def _fits(value: int, bits: int) -> bool:
    return -(1 << (bits - 1)) <= value < (1 << (bits - 1))


def _enc_r(funct7, rs2, rs1, funct3, rd, opcode):
    return (funct7 << 25) | (rs2 << 20) | (rs1 << 15) | (funct3 << 12) | (rd << 7) | opcode


def _enc_i(imm, rs1, funct3, rd, opcode):
    return ((imm & 0xFFF) << 20) | (rs1 << 15) | (funct3 << 12) | (rd << 7) | opcode


def _enc_s(imm, rs2, rs1, funct3, opcode):
    imm &= 0xFFF
    return ((imm >> 5) << 25) | (rs2 << 20) | (rs1 << 15) | (funct3 << 12) | ((imm & 0x1F) << 7) | opcode


def _enc_b(imm, rs2, rs1, funct3):
    imm &= 0x1FFF
    return (((imm >> 12) & 1) << 31) | (((imm >> 5) & 0x3F) << 25) | (rs2 << 20) | (rs1 << 15) \
        | (funct3 << 12) | (((imm >> 1) & 0xF) << 8) | (((imm >> 11) & 1) << 7) | _OPC["BRANCH"]


def _enc_j(imm, rd):
    imm &= 0x1FFFFF
    return (((imm >> 20) & 1) << 31) | (((imm >> 1) & 0x3FF) << 21) | (((imm >> 11) & 1) << 20) \
        | (((imm >> 12) & 0xFF) << 12) | (rd << 7) | _OPC["JAL"]


def encode32(inst: DecodedInst) -> int:
    """Encode a description as a 32-bit RV32I word."""
    _check_regs(inst)
    op, rd, rs1, rs2, imm = inst.op, inst.rd, inst.rs1, inst.rs2, inst.imm

    if op in (Op.LUI, Op.AUIPC):
        if imm & 0xFFF or not _fits(imm, 32):
            raise _fail(inst, "upper immediate must be a signed 32-bit multiple of 4096")
        return (imm & 0xFFFFF000) | (rd << 7) | _OPC[op.value]
    if op == Op.JAL:
        if imm & 1 or not _fits(imm, 21):
            raise _fail(inst, "JAL offset must be even and within +-1 MiB")
        return _enc_j(imm, rd)
    if op == Op.JALR:
        if not _fits(imm, 12):
            raise _fail(inst, "JALR offset out of 12-bit range")
        return _enc_i(imm, rs1, 0, rd, _OPC["JALR"])
    if op in BRANCHES:
        if imm & 1 or not _fits(imm, 13):
            raise _fail(inst, "branch offset must be even and within +-4 KiB")
        return _enc_b(imm, rs2, rs1, _BRANCH_F3[op])
    if op in LOADS:
        if not _fits(imm, 12):
            raise _fail(inst, "load offset out of 12-bit range")
        return _enc_i(imm, rs1, _LOAD_F3[op], rd, _OPC["LOAD"])
    if op in STORES:
        if not _fits(imm, 12):
            raise _fail(inst, "store offset out of 12-bit range")
        return _enc_s(imm, rs2, rs1, _STORE_F3[op], _OPC["STORE"])
    if op in (Op.SLLI, Op.SRLI, Op.SRAI):
        if not 0 <= imm <= 31:
            raise _fail(inst, "shift amount must be 0..31")
        return _enc_r(0x20 if op == Op.SRAI else 0x00, imm, rs1, _OP_IMM_F3[op], rd, _OPC["OP_IMM"])
    if op in IMM_ALU:
        if not _fits(imm, 12):
            raise _fail(inst, "immediate out of 12-bit range")
        return _enc_i(imm, rs1, _OP_IMM_F3[op], rd, _OPC["OP_IMM"])
    if op in REG_ALU:
        funct3, funct7 = _OP_F3F7[op]
        return _enc_r(funct7, rs2, rs1, funct3, rd, _OPC["OP"])
    if op == Op.FENCE:
        return FENCE_WORD
    if op == Op.ECALL:
        return 0x00000073
    if op == Op.EBREAK:
        return 0x00100073
    if op == Op.CSRR:
        if imm not in COUNTER_CSRS:
            raise _fail(inst, f"CSR {imm:#x} is not a readable counter")
        return _enc_i(imm, 0, 2, rd, _OPC["SYSTEM"])
    raise _fail(inst, f"{op.value} has no encoding")


# -----------------------------------------------------------------------------
# Compressed forms
# -----------------------------------------------------------------------------

def _creg(r: int) -> bool:
    return 8 <= r <= 15


def _ci(funct3: int, rd: int, imm6: int, quadrant: int) -> int:
    imm6 &= 0x3F
    return (funct3 << 13) | ((imm6 >> 5) << 12) | (rd << 7) | ((imm6 & 0x1F) << 2) | quadrant


def _cj(funct3: int, offset: int) -> int:
    o = offset & 0xFFF
    bits = (((o >> 11) & 1) << 12) | (((o >> 4) & 1) << 11) | (((o >> 8) & 3) << 9) \
        | (((o >> 10) & 1) << 8) | (((o >> 6) & 1) << 7) | (((o >> 7) & 1) << 6) \
        | (((o >> 1) & 7) << 3) | (((o >> 5) & 1) << 2)
    return (funct3 << 13) | bits | 0b01


def _cb(funct3: int, rs1: int, offset: int) -> int:
    o = offset & 0x1FF
    bits = (((o >> 8) & 1) << 12) | (((o >> 3) & 3) << 10) | ((rs1 - 8) << 7) \
        | (((o >> 6) & 3) << 5) | (((o >> 1) & 3) << 3) | (((o >> 5) & 1) << 2)
    return (funct3 << 13) | bits | 0b01


def _cl(funct3: int, rs1: int, reg: int, uimm: int) -> int:
    return (funct3 << 13) | (((uimm >> 3) & 7) << 10) | ((rs1 - 8) << 7) \
        | (((uimm >> 2) & 1) << 6) | (((uimm >> 6) & 1) << 5) | ((reg - 8) << 2)


def _c_addi(inst: DecodedInst) -> Optional[int]:
    rd, rs1, imm = inst.rd, inst.rs1, inst.imm
    if rs1 == 0 and _fits(imm, 6) and not (rd == 0 and imm == 0):
        return _ci(0b010, rd, imm, 0b01)  # C.LI
    if rd == rs1 and _fits(imm, 6):
        return _ci(0b000, rd, imm, 0b01)  # C.ADDI / C.NOP
    if rd == rs1 == 2 and imm and imm % 16 == 0 and -512 <= imm <= 496:
        v = imm & 0x3FF
        return (0b011 << 13) | (((v >> 9) & 1) << 12) | (2 << 7) | (((v >> 4) & 1) << 6) \
            | (((v >> 6) & 1) << 5) | (((v >> 7) & 3) << 3) | (((v >> 5) & 1) << 2) | 0b01
    if rs1 == 2 and _creg(rd) and imm % 4 == 0 and 4 <= imm <= 1020:
        return (((imm >> 4) & 3) << 11) | (((imm >> 6) & 0xF) << 7) | (((imm >> 2) & 1) << 6) \
            | (((imm >> 3) & 1) << 5) | ((rd - 8) << 2)
    return None


def _c_lui(inst: DecodedInst) -> Optional[int]:
    upper = inst.imm >> 12
    if inst.rd != 2 and not inst.imm & 0xFFF and upper != 0 and _fits(upper, 6):
        return _ci(0b011, inst.rd, upper, 0b01)
    return None


def _c_andi(inst: DecodedInst) -> Optional[int]:
    if inst.rd == inst.rs1 and _creg(inst.rd) and _fits(inst.imm, 6):
        return (0b100 << 13) | (((inst.imm >> 5) & 1) << 12) | (0b10 << 10) | ((inst.rd - 8) << 7) \
            | ((inst.imm & 0x1F) << 2) | 0b01
    return None


def _c_shift(inst: DecodedInst) -> Optional[int]:
    if inst.rd != inst.rs1 or not 0 <= inst.imm <= 31:
        return None
    if inst.op == Op.SLLI:
        return _ci(0b000, inst.rd, inst.imm, 0b10)
    if not _creg(inst.rd):
        return None
    funct2 = 0b00 if inst.op == Op.SRLI else 0b01
    return (0b100 << 13) | (funct2 << 10) | ((inst.rd - 8) << 7) | (inst.imm << 2) | 0b01


def _c_add(inst: DecodedInst) -> Optional[int]:
    if inst.rs2 == 0:
        return None
    if inst.rs1 == 0:
        return (0b100 << 13) | (inst.rd << 7) | (inst.rs2 << 2) | 0b10  # C.MV
    if inst.rd == inst.rs1:
        return (0b100 << 13) | (1 << 12) | (inst.rd << 7) | (inst.rs2 << 2) | 0b10  # C.ADD
    return None


def _c_arith(inst: DecodedInst) -> Optional[int]:
    if inst.rd != inst.rs1 or not (_creg(inst.rd) and _creg(inst.rs2)):
        return None
    funct2 = {Op.SUB: 0b00, Op.XOR: 0b01, Op.OR: 0b10, Op.AND: 0b11}[inst.op]
    return (0b100 << 13) | (0b11 << 10) | ((inst.rd - 8) << 7) | (funct2 << 5) | ((inst.rs2 - 8) << 2) | 0b01


def _c_lw(inst: DecodedInst) -> Optional[int]:
    imm = inst.imm
    if imm % 4:
        return None
    if inst.rs1 == 2 and inst.rd != 0 and 0 <= imm <= 252:
        return (0b010 << 13) | (((imm >> 5) & 1) << 12) | (inst.rd << 7) | (((imm >> 2) & 7) << 4) \
            | (((imm >> 6) & 3) << 2) | 0b10
    if _creg(inst.rs1) and _creg(inst.rd) and 0 <= imm <= 124:
        return _cl(0b010, inst.rs1, inst.rd, imm)
    return None


def _c_sw(inst: DecodedInst) -> Optional[int]:
    imm = inst.imm
    if imm % 4:
        return None
    if inst.rs1 == 2 and 0 <= imm <= 252:
        return (0b110 << 13) | (((imm >> 2) & 0xF) << 9) | (((imm >> 6) & 3) << 7) | (inst.rs2 << 2) | 0b10
    if _creg(inst.rs1) and _creg(inst.rs2) and 0 <= imm <= 124:
        return _cl(0b110, inst.rs1, inst.rs2, imm)
    return None


def _c_jal(inst: DecodedInst) -> Optional[int]:
    if inst.rd in (0, 1) and not inst.imm & 1 and _fits(inst.imm, 12):
        return _cj(0b101 if inst.rd == 0 else 0b001, inst.imm)
    return None


def _c_jalr(inst: DecodedInst) -> Optional[int]:
    if inst.imm == 0 and inst.rs1 != 0 and inst.rd in (0, 1):
        return (0b100 << 13) | ((1 if inst.rd == 1 else 0) << 12) | (inst.rs1 << 7) | 0b10
    return None


def _c_branch(inst: DecodedInst) -> Optional[int]:
    if inst.rs2 == 0 and _creg(inst.rs1) and not inst.imm & 1 and _fits(inst.imm, 9):
        return _cb(0b110 if inst.op == Op.BEQ else 0b111, inst.rs1, inst.imm)
    return None


_COMPRESSORS: Dict[Op, Callable[[DecodedInst], Optional[int]]] = {
    Op.ADDI: _c_addi,
    Op.LUI: _c_lui,
    Op.ANDI: _c_andi,
    Op.SLLI: _c_shift,
    Op.SRLI: _c_shift,
    Op.SRAI: _c_shift,
    Op.ADD: _c_add,
    Op.SUB: _c_arith,
    Op.XOR: _c_arith,
    Op.OR: _c_arith,
    Op.AND: _c_arith,
    Op.LW: _c_lw,
    Op.SW: _c_sw,
    Op.JAL: _c_jal,
    Op.JALR: _c_jalr,
    Op.BEQ: _c_branch,
    Op.BNE: _c_branch,
    Op.EBREAK: lambda inst: 0x9002,
}


def encode16(inst: DecodedInst) -> int:
    """Encode a description as a 16-bit RV32C instruction."""
    _check_regs(inst)
    compressor = _COMPRESSORS.get(inst.op)
    bits = compressor(inst) if compressor else None
    if bits is None:
        raise _fail(inst, "not compressible", "E_NOT_COMPRESSIBLE")
    return bits


def encode(inst: DecodedInst, compressed: bool = False) -> RawInst:
    """Encode an instruction description; compressed output is requested explicitly."""
    if compressed:
        return RawInst(encode16(inst), 2)
    return RawInst(encode32(inst), 4)


def is_compressible(inst: DecodedInst) -> bool:
    try:
        encode16(inst)
    except EncodingError:
        return False
    return True
