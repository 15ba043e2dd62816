"""
Tests for the reference interpreter and the commit-log format
"""
import pytest

from src.errors import LogFormatError
from src.isa.opcodes import Op
from src.isa.program import ProgramBuilder
from src.memsys.image import MemoryImage, build_memories
from src.refmodel import interpreter
from src.refmodel.commit_log import FIELDS, CommitRecord, format_log, parse_line, read_log, write_log
from src.refmodel.interpreter import ArchState, step
from src.refmodel.status import RunStatus

from tests.conftest import image_of


def _memories(builder: ProgramBuilder):
    return build_memories(MemoryImage(payload=builder.build()))


class TestStep:
    def test_addi(self):
        """Test ADDI a0, x0, 1 at pc 0"""
        b = ProgramBuilder()
        b.emit(Op.ADDI, rd=10, rs1=0, imm=1)
        imem, dmem = _memories(b)
        state = ArchState()
        record, event = step(state, imem, dmem)
        assert state.regs[10] == 1 and state.pc == 4
        assert record.pc == 0 and record.raw == 0x00100513 and event is None

    def test_compressed_jr(self):
        """Test C.JR ra"""
        b = ProgramBuilder()
        b.emit(Op.JALR, rd=0, rs1=1, imm=0, c=True)
        imem, dmem = _memories(b)
        state = ArchState()
        state.write(1, 0x102)
        record, _ = step(state, imem, dmem)
        assert state.pc == 0x102 and record.raw == 0x8082

    def test_jalr_clears_bit_zero(self):
        """Test the JALR target rule"""
        b = ProgramBuilder()
        b.emit(Op.JALR, rd=1, rs1=5, imm=0)
        imem, dmem = _memories(b)
        state = ArchState()
        state.write(5, 0x103)
        step(state, imem, dmem)
        assert state.pc == 0x102 and state.regs[1] == 4

    def test_x0_stays_zero(self):
        """Test that writes to x0 are discarded"""
        b = ProgramBuilder()
        b.emit(Op.ADDI, rd=0, rs1=0, imm=7)
        imem, dmem = _memories(b)
        state = ArchState()
        record, _ = step(state, imem, dmem)
        assert state.regs[0] == 0 and record.regs[0] == 0


class TestRun:
    def test_exit_immediately(self):
        """Test a program that stores zero to the EXIT address"""
        b = ProgramBuilder()
        b.exit()
        result = interpreter.run(image_of(b))
        assert result.status.status == RunStatus.EXIT and result.status.code == 0
        assert result.instructions == 2

    def test_step_limit(self):
        """Test that an infinite loop stops at max_steps with a distinct status"""
        b = ProgramBuilder()
        b.label("spin")
        b.emit(Op.JAL, rd=0, target="spin", c=True)
        result = interpreter.run(image_of(b), max_steps=1000)
        assert result.status.status == RunStatus.STEP_LIMIT
        assert len(result.commits) == 1000
        assert not result.status.ok and result.status.exit_code == 1

    def test_console(self):
        """Test that PUTCHAR output is captured"""
        b = ProgramBuilder()
        b.li(10, ord("A"))
        b.putchar(10)
        b.exit()
        result = interpreter.run(image_of(b))
        assert result.console == b"A"
        assert result.status.ok

    def test_illegal_instruction_stops_without_commit(self):
        """Test the zero halfword"""
        b = ProgramBuilder()
        b.emit(Op.ADDI, rd=1, rs1=1, imm=1, c=True)
        b.words([0])
        result = interpreter.run(image_of(b))
        assert result.status.status == RunStatus.ILLEGAL
        assert len(result.commits) == 1

    def test_misaligned_load_faults(self):
        """Test that a data fault ends the run"""
        b = ProgramBuilder()
        b.emit(Op.LW, rd=10, rs1=0, imm=0x102)
        result = interpreter.run(image_of(b))
        assert result.status.status == RunStatus.FAULT
        assert result.status.error.error_code == "E_MISALIGNED"

    def test_ebreak_halts_after_commit(self):
        """Test the halt-class instructions"""
        b = ProgramBuilder()
        b.emit(Op.EBREAK, c=True)
        result = interpreter.run(image_of(b))
        assert result.status.status == RunStatus.HALT
        assert len(result.commits) == 1

    def test_counters_count_retired_instructions(self):
        """Test CSR reads of instret"""
        b = ProgramBuilder()
        b.emit(Op.ADDI, c=True)
        b.emit(Op.CSRR, rd=10, imm=0xC02)
        b.emit(Op.EBREAK)
        result = interpreter.run(image_of(b))
        assert result.commits[1].regs[10] == 1

    def test_sp_init(self):
        """Test that sp starts at the top of data memory when asked"""
        b = ProgramBuilder()
        b.emit(Op.EBREAK)
        result = interpreter.run(image_of(b), dmem_bytes=4096, sp_init=True)
        assert result.commits[0].regs[2] == 4096


class TestCommitLog:
    def test_format(self):
        """Test the canonical line layout"""
        record = CommitRecord(0x10, 0x4505, tuple([0] * 10 + [0xFFFFFFFF] + [0] * 21))
        line = record.format()
        tokens = line.split(" ")
        assert len(tokens) == len(FIELDS) == 34
        assert tokens[0] == "PC=00000010" and tokens[1] == "IR=00004505"
        assert tokens[12] == "X10=ffffffff"

    def test_parse_inverts_format(self):
        """Test that a formatted line parses back to the same record"""
        record = CommitRecord(0x20, 0x00100513, tuple(range(32)))
        assert parse_line(record.format()) == record

    def test_file_round_trip(self, tmp_path):
        """Test write_log/read_log"""
        records = [CommitRecord(i * 4, 0x13, tuple([i] * 32)) for i in range(3)]
        path = tmp_path / "run.log"
        write_log(records, str(path))
        assert read_log(str(path)) == records
        assert path.read_text() == format_log(records)

    @pytest.mark.parametrize("line", [
        "PC=00000000",
        "PC=00000000 IR=zz " + " ".join(f"X{i:02d}=00000000" for i in range(32)),
    ])
    def test_malformed_lines(self, line):
        """Test field-count and field-shape errors"""
        with pytest.raises(LogFormatError):
            parse_line(line, 7)
