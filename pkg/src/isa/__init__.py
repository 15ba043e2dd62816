# This file marks the isa directory as a Python package
from src.isa.opcodes import DecodedInst, Op, RawInst
from src.isa.decoder import decode32, is_compressed
from src.isa.compressed import decode16, decompress
from src.isa.encoder import encode, instr


def decode(raw: RawInst) -> DecodedInst:
    """Decode a RawInst with the decoder matching its length."""
    if raw.len == 2:
        return decode16(raw.bits & 0xFFFF)
    return decode32(raw.bits)


__all__ = [
    "DecodedInst",
    "Op",
    "RawInst",
    "decode",
    "decode16",
    "decode32",
    "decompress",
    "encode",
    "instr",
    "is_compressed",
]
