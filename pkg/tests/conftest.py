import logging

import pytest

from src.isa.opcodes import Op
from src.isa.program import ProgramBuilder
from src.memsys.image import MemoryImage, build_memories
from src.pipeline.core import CoreConfig

FETCH_KINDS = ["dualpc", "buffer", "naive"]
SCHEMES = ["gshare", "bimodal", "none"]
DATA = 0x800


def image_of(builder: ProgramBuilder, source: str = "<test>") -> MemoryImage:
    return MemoryImage(payload=builder.build(), source=source)


@pytest.fixture
def logger():
    """Fixture to provide a configured logger"""
    return logging.getLogger("rvsim.test")


@pytest.fixture
def builder():
    """Fixture to provide an empty program builder at address 0"""
    return ProgramBuilder()


@pytest.fixture
def fig2_builder():
    """Mixed-width layout: 32-bit A at 0x00, 16-bit B at 0x04, 32-bit C straddling 0x06/0x08."""
    b = ProgramBuilder()
    b.emit(Op.ADDI, rd=10, rs1=0, imm=1)               # A
    b.emit(Op.ADDI, rd=10, rs1=10, imm=1, c=True)      # B
    b.emit(Op.ADDI, rd=11, rs1=10, imm=5)              # C
    b.emit(Op.ADD, rd=12, rs1=12, rs2=11, c=True)      # D at 0x0A
    b.exit()                                           # C.LUI at 0x0C, SW straddling 0x0E/0x10
    return b


@pytest.fixture
def fig2_image(fig2_builder):
    """Fixture to provide the mixed-width layout as a memory image"""
    return image_of(fig2_builder, "fig2")


@pytest.fixture
def fig2_memories(fig2_image):
    """Fixture to provide (imem, dmem) loaded with the mixed-width layout"""
    return build_memories(fig2_image)


@pytest.fixture
def loop_program():
    """Factory: a two-instruction countdown loop of `trips` iterations ending in EBREAK."""
    def make(trips: int) -> MemoryImage:
        b = ProgramBuilder()
        b.li(8, trips)
        b.label("loop")
        b.emit(Op.ADDI, rd=8, rs1=8, imm=-1, c=True)
        b.emit(Op.BNE, rs1=8, rs2=0, target="loop")
        b.emit(Op.EBREAK)
        return image_of(b, f"loop{trips}")
    return make


@pytest.fixture
def default_config():
    """Fixture to provide the default core configuration"""
    return CoreConfig()
