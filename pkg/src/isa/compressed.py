"""
RV32C support: expansion of 16-bit instructions into their RV32I equivalents,
and a direct 16-bit decoder that never builds the 32-bit word.

The two paths are written independently; the test suite checks that
decode16(h) and decode32(decompress(h)) agree on every halfword.

Quadrants (bits [1:0]):
    00  stack-pointer based immediates, loads and stores with x8-x15
    01  immediates, control flow, x8-x15 arithmetic
    10  shifts, stack-pointer loads/stores, register moves and jumps

Floating-point forms (C.FLW, C.FSW, C.FLD, ...) are not part of RV32IC here and
expand/decode to ILLEGAL.
"""
from functools import lru_cache

from src.errors import DecodeError
from src.isa.decoder import is_compressed
from src.isa.opcodes import DecodedInst, Op, illegal, to_signed

# Canonical word returned for reserved compressed encodings; decode32 reports it
# as ILLEGAL (major opcode 0x7F is unused in RV32I).
ILLEGAL_WORD = 0xFFFFFFFF


def _check(halfword: int) -> int:
    halfword &= 0xFFFFFFFF
    if halfword > 0xFFFF or not is_compressed(halfword):
        raise DecodeError(
            "not a compressed instruction",
            "E_DECODE_PRECONDITION",
            {"halfword": f"{halfword:#x}"}
        )
    return halfword


# -----------------------------------------------------------------------------
# 32-bit word builders used by the expander
# -----------------------------------------------------------------------------

def _r(funct7, rs2, rs1, funct3, rd, opcode):
    return (funct7 << 25) | (rs2 << 20) | (rs1 << 15) | (funct3 << 12) | (rd << 7) | opcode


def _i(imm, rs1, funct3, rd, opcode):
    return ((imm & 0xFFF) << 20) | (rs1 << 15) | (funct3 << 12) | (rd << 7) | opcode


def _s(imm, rs2, rs1, funct3, opcode):
    imm &= 0xFFF
    return ((imm >> 5) << 25) | (rs2 << 20) | (rs1 << 15) | (funct3 << 12) | ((imm & 0x1F) << 7) | opcode


def _b(imm, rs2, rs1, funct3):
    imm &= 0x1FFF
    return (((imm >> 12) & 1) << 31) | (((imm >> 5) & 0x3F) << 25) | (rs2 << 20) | (rs1 << 15) \
        | (funct3 << 12) | (((imm >> 1) & 0xF) << 8) | (((imm >> 11) & 1) << 7) | 0x63


def _j(imm, rd):
    imm &= 0x1FFFFF
    return (((imm >> 20) & 1) << 31) | (((imm >> 1) & 0x3FF) << 21) | (((imm >> 11) & 1) << 20) \
        | (((imm >> 12) & 0xFF) << 12) | (rd << 7) | 0x6F


@lru_cache(maxsize=1 << 16)
def decompress(halfword: int) -> int:
    """Expand a 16-bit instruction into its 32-bit RV32I equivalent."""
    c = _check(halfword)
    quadrant = c & 0x3
    funct3 = (c >> 13) & 0x7

    if quadrant == 0b00:
        rd_p = ((c >> 2) & 0x7) + 8
        rs1_p = ((c >> 7) & 0x7) + 8
        if funct3 == 0b000:  # C.ADDI4SPN
            nzuimm = ((c >> 7) & 0x30) | ((c >> 1) & 0x3C0) | ((c >> 4) & 0x4) | ((c >> 2) & 0x8)
            if nzuimm == 0:
                return ILLEGAL_WORD
            return _i(nzuimm, 2, 0, rd_p, 0x13)
        if funct3 == 0b010:  # C.LW
            uimm = ((c >> 7) & 0x38) | ((c >> 4) & 0x4) | ((c << 1) & 0x40)
            return _i(uimm, rs1_p, 2, rd_p, 0x03)
        if funct3 == 0b110:  # C.SW
            uimm = ((c >> 7) & 0x38) | ((c >> 4) & 0x4) | ((c << 1) & 0x40)
            return _s(uimm, rd_p, rs1_p, 2, 0x23)
        return ILLEGAL_WORD

    if quadrant == 0b01:
        rd = (c >> 7) & 0x1F
        imm6 = to_signed(((c >> 7) & 0x20) | ((c >> 2) & 0x1F), 6)
        if funct3 == 0b000:  # C.NOP / C.ADDI (HINTs included)
            return _i(imm6, rd, 0, rd, 0x13)
        if funct3 in (0b001, 0b101):  # C.JAL / C.J
            offset = ((c >> 1) & 0x800) | ((c << 2) & 0x400) | ((c >> 1) & 0x300) | ((c << 1) & 0x80) \
                | ((c >> 1) & 0x40) | ((c << 3) & 0x20) | ((c >> 7) & 0x10) | ((c >> 2) & 0xE)
            return _j(to_signed(offset, 12), 1 if funct3 == 0b001 else 0)
        if funct3 == 0b010:  # C.LI
            return _i(imm6, 0, 0, rd, 0x13)
        if funct3 == 0b011:
            if rd == 2:  # C.ADDI16SP
                nzimm = ((c >> 3) & 0x200) | ((c >> 2) & 0x10) | ((c << 1) & 0x40) \
                    | ((c << 4) & 0x180) | ((c << 3) & 0x20)
                if nzimm == 0:
                    return ILLEGAL_WORD
                return _i(to_signed(nzimm, 10), 2, 0, 2, 0x13)
            if imm6 == 0:  # C.LUI with zero immediate is reserved
                return ILLEGAL_WORD
            return ((imm6 << 12) & 0xFFFFF000) | (rd << 7) | 0x37
        if funct3 == 0b100:
            rd_p = ((c >> 7) & 0x7) + 8
            funct2 = (c >> 10) & 0x3
            shamt = ((c >> 7) & 0x20) | ((c >> 2) & 0x1F)
            if funct2 == 0b00:  # C.SRLI
                if shamt & 0x20:
                    return ILLEGAL_WORD
                return _r(0x00, shamt, rd_p, 5, rd_p, 0x13)
            if funct2 == 0b01:  # C.SRAI
                if shamt & 0x20:
                    return ILLEGAL_WORD
                return _r(0x20, shamt, rd_p, 5, rd_p, 0x13)
            if funct2 == 0b10:  # C.ANDI
                return _i(imm6, rd_p, 7, rd_p, 0x13)
            if c & 0x1000:  # C.SUBW / C.ADDW are RV64 only
                return ILLEGAL_WORD
            rs2_p = ((c >> 2) & 0x7) + 8
            funct7, funct3_op = {
                0b00: (0x20, 0),  # C.SUB
                0b01: (0x00, 4),  # C.XOR
                0b10: (0x00, 6),  # C.OR
                0b11: (0x00, 7),  # C.AND
            }[(c >> 5) & 0x3]
            return _r(funct7, rs2_p, rd_p, funct3_op, rd_p, 0x33)
        # C.BEQZ / C.BNEZ
        rs1_p = ((c >> 7) & 0x7) + 8
        offset = ((c >> 4) & 0x100) | ((c << 1) & 0xC0) | ((c << 3) & 0x20) | ((c >> 7) & 0x18) | ((c >> 2) & 0x6)
        return _b(to_signed(offset, 9), 0, rs1_p, 0 if funct3 == 0b110 else 1)

    if quadrant == 0b10:
        rd = (c >> 7) & 0x1F
        rs2 = (c >> 2) & 0x1F
        if funct3 == 0b000:  # C.SLLI
            shamt = ((c >> 7) & 0x20) | rs2
            if shamt & 0x20:
                return ILLEGAL_WORD
            return _r(0x00, shamt, rd, 1, rd, 0x13)
        if funct3 == 0b010:  # C.LWSP
            if rd == 0:
                return ILLEGAL_WORD
            uimm = ((c >> 7) & 0x20) | ((c >> 2) & 0x1C) | ((c << 4) & 0xC0)
            return _i(uimm, 2, 2, rd, 0x03)
        if funct3 == 0b100:
            if not c & 0x1000:
                if rs2 == 0:  # C.JR
                    if rd == 0:
                        return ILLEGAL_WORD
                    return _i(0, rd, 0, 0, 0x67)
                return _r(0x00, rs2, 0, 0, rd, 0x33)  # C.MV
            if rs2 == 0:
                if rd == 0:  # C.EBREAK
                    return 0x00100073
                return _i(0, rd, 0, 1, 0x67)  # C.JALR
            return _r(0x00, rs2, rd, 0, rd, 0x33)  # C.ADD
        if funct3 == 0b110:  # C.SWSP
            uimm = ((c >> 7) & 0x3C) | ((c >> 1) & 0xC0)
            return _s(uimm, rs2, 2, 2, 0x23)
        return ILLEGAL_WORD

    # quadrant 0b11 is excluded by _check
    raise AssertionError("unreachable")


# -----------------------------------------------------------------------------
# Direct 16-bit decoding
# -----------------------------------------------------------------------------

def _bit(c: int, pos: int) -> int:
    return (c >> pos) & 1


def _field(c: int, hi: int, lo: int) -> int:
    return (c >> lo) & ((1 << (hi - lo + 1)) - 1)


def _ci_imm(c: int) -> int:
    return to_signed((_bit(c, 12) << 5) | _field(c, 6, 2), 6)


def _cj_offset(c: int) -> int:
    value = (_bit(c, 12) << 11) | (_bit(c, 11) << 4) | (_field(c, 10, 9) << 8) | (_bit(c, 8) << 10) \
        | (_bit(c, 7) << 6) | (_bit(c, 6) << 7) | (_field(c, 5, 3) << 1) | (_bit(c, 2) << 5)
    return to_signed(value, 12)


def _cb_offset(c: int) -> int:
    value = (_bit(c, 12) << 8) | (_field(c, 11, 10) << 3) | (_field(c, 6, 5) << 6) \
        | (_field(c, 4, 3) << 1) | (_bit(c, 2) << 5)
    return to_signed(value, 9)


def _cl_offset(c: int) -> int:
    return (_field(c, 12, 10) << 3) | (_bit(c, 6) << 2) | (_bit(c, 5) << 6)


_CA_OPS = {0b00: Op.SUB, 0b01: Op.XOR, 0b10: Op.OR, 0b11: Op.AND}


@lru_cache(maxsize=1 << 16)
def decode16(halfword: int) -> DecodedInst:
    """Decode a 16-bit instruction straight to its RV32I semantics."""
    c = _check(halfword)
    quadrant = _field(c, 1, 0)
    funct3 = _field(c, 15, 13)

    def inst(op, rd=0, rs1=0, rs2=0, imm=0):
        return DecodedInst(op, rd=rd, rs1=rs1, rs2=rs2, imm=imm, comp=True, len=2, raw=c)

    if quadrant == 0:
        rd_p = 8 + _field(c, 4, 2)
        rs1_p = 8 + _field(c, 9, 7)
        if funct3 == 0b000:
            nzuimm = (_field(c, 12, 11) << 4) | (_field(c, 10, 7) << 6) | (_bit(c, 6) << 2) | (_bit(c, 5) << 3)
            if nzuimm == 0:
                return illegal(c, True)
            return inst(Op.ADDI, rd=rd_p, rs1=2, imm=nzuimm)
        if funct3 == 0b010:
            return inst(Op.LW, rd=rd_p, rs1=rs1_p, imm=_cl_offset(c))
        if funct3 == 0b110:
            return inst(Op.SW, rs1=rs1_p, rs2=rd_p, imm=_cl_offset(c))
        return illegal(c, True)

    if quadrant == 1:
        rd = _field(c, 11, 7)
        if funct3 == 0b000:
            return inst(Op.ADDI, rd=rd, rs1=rd, imm=_ci_imm(c))
        if funct3 == 0b001:
            return inst(Op.JAL, rd=1, imm=_cj_offset(c))
        if funct3 == 0b010:
            return inst(Op.ADDI, rd=rd, rs1=0, imm=_ci_imm(c))
        if funct3 == 0b011:
            if rd == 2:
                nzimm = (_bit(c, 12) << 9) | (_bit(c, 6) << 4) | (_bit(c, 5) << 6) \
                    | (_field(c, 4, 3) << 7) | (_bit(c, 2) << 5)
                if nzimm == 0:
                    return illegal(c, True)
                return inst(Op.ADDI, rd=2, rs1=2, imm=to_signed(nzimm, 10))
            upper = _ci_imm(c)
            if upper == 0:
                return illegal(c, True)
            return inst(Op.LUI, rd=rd, imm=to_signed(upper << 12, 32))
        if funct3 == 0b100:
            rd_p = 8 + _field(c, 9, 7)
            funct2 = _field(c, 11, 10)
            shamt = (_bit(c, 12) << 5) | _field(c, 6, 2)
            if funct2 in (0b00, 0b01):
                if shamt & 0x20:
                    return illegal(c, True)
                return inst(Op.SRLI if funct2 == 0b00 else Op.SRAI, rd=rd_p, rs1=rd_p, imm=shamt)
            if funct2 == 0b10:
                return inst(Op.ANDI, rd=rd_p, rs1=rd_p, imm=_ci_imm(c))
            if _bit(c, 12):
                return illegal(c, True)
            return inst(_CA_OPS[_field(c, 6, 5)], rd=rd_p, rs1=rd_p, rs2=8 + _field(c, 4, 2))
        if funct3 == 0b101:
            return inst(Op.JAL, rd=0, imm=_cj_offset(c))
        rs1_p = 8 + _field(c, 9, 7)
        return inst(Op.BEQ if funct3 == 0b110 else Op.BNE, rs1=rs1_p, rs2=0, imm=_cb_offset(c))

    # quadrant 2
    rd = _field(c, 11, 7)
    rs2 = _field(c, 6, 2)
    if funct3 == 0b000:
        if _bit(c, 12):
            return illegal(c, True)
        return inst(Op.SLLI, rd=rd, rs1=rd, imm=rs2)
    if funct3 == 0b010:
        if rd == 0:
            return illegal(c, True)
        offset = (_bit(c, 12) << 5) | (_field(c, 6, 4) << 2) | (_field(c, 3, 2) << 6)
        return inst(Op.LW, rd=rd, rs1=2, imm=offset)
    if funct3 == 0b100:
        if not _bit(c, 12):
            if rs2 == 0:
                if rd == 0:
                    return illegal(c, True)
                return inst(Op.JALR, rd=0, rs1=rd, imm=0)
            return inst(Op.ADD, rd=rd, rs1=0, rs2=rs2)
        if rs2 == 0:
            if rd == 0:
                return inst(Op.EBREAK)
            return inst(Op.JALR, rd=1, rs1=rd, imm=0)
        return inst(Op.ADD, rd=rd, rs1=rd, rs2=rs2)
    if funct3 == 0b110:
        offset = (_field(c, 12, 9) << 2) | (_field(c, 8, 7) << 6)
        return inst(Op.SW, rs1=2, rs2=rs2, imm=offset)
    return illegal(c, True)
