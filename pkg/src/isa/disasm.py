from src.isa.opcodes import DecodedInst, Op, reads_rs1, reads_rs2, writes_rd


def disassemble(inst: DecodedInst) -> str:
    """Render the trace form `OP rd, rs1, rs2, imm`.

    Only the operands an instruction uses are printed; compressed instructions
    carry a `c.` prefix and ILLEGAL shows its raw bits.
    """
    if inst.op == Op.ILLEGAL:
        width = 4 if inst.comp else 8
        return f"ILLEGAL {inst.raw:0{width}x}"

    operands = []
    if writes_rd(inst.op):
        operands.append(f"x{inst.rd}")
    if reads_rs1(inst.op):
        operands.append(f"x{inst.rs1}")
    if reads_rs2(inst.op):
        operands.append(f"x{inst.rs2}")
    if inst.op == Op.CSRR:
        operands.append(f"{inst.imm:#x}")
    elif inst.op not in (Op.FENCE, Op.ECALL, Op.EBREAK) and not _is_register_form(inst.op):
        operands.append(str(inst.imm))

    mnemonic = ("c." if inst.comp else "") + inst.op.value
    if not operands:
        return mnemonic
    return f"{mnemonic} {', '.join(operands)}"


def _is_register_form(op: Op) -> bool:
    return reads_rs2(op) and writes_rd(op)
