"""
Cycle-accurate five-stage RV32IC core (IF, ID, EX, MA, WB).

Each tick evaluates the stages from WB back to IF, so a stage always sees the
values its older neighbours produced in the same cycle: WB writes the register
file before EX reads it, and MA's redirect reaches IF in the cycle it resolves.

Control flow resolves in MA. A wrong next pc flushes EX, ID and the fetch in
flight, three slots in total, and IF restarts at TruePC on the next cycle.
"""
import json
import logging
from dataclasses import dataclass, field
from typing import Any, BinaryIO, Callable, Dict, List, Optional, Tuple

from src.bpred.predictor import BranchPredictor
from src.errors import ExitEvent, IllegalInstruction, MemoryFault
from src.fetch.units import make_fetch_unit
from src.isa import decode
from src.isa.disasm import disassemble
from src.isa.opcodes import (
    CSR_CYCLEH,
    CSR_INSTRETH,
    CSR_INSTRET,
    CSR_TIMEH,
    HALTS,
    IMM_ALU,
    LOAD_WIDTH,
    Op,
    STORE_WIDTH,
    reads_rs1,
    reads_rs2,
    writes_rd,
)
from src.memsys.image import MemoryImage, build_memories
from src.memsys.memory import DEFAULT_SIZE, DataMemory, InstMemory
from src.pipeline.alu import alu, branch_condition
from src.pipeline.stages import (
    MASK,
    IfState,
    InFlight,
    PcCandidates,
    PcControl,
    StageRegs,
    check_fetch_twins,
    check_redirect,
    check_twins,
    compute_taken_pc,
    hazard_detect,
    resolve_branch,
    select_next_pc,
)
from src.pipeline.stats import Stats
from src.refmodel.commit_log import CommitRecord
from src.refmodel.status import ExitStatus, RunStatus

FLUSH_DEPTH = 3

logger = logging.getLogger("rvsim.pipeline")
trace_logger = logging.getLogger("rvsim.trace")

TraceHook = Callable[[int, Dict[str, Optional[int]]], None]


@dataclass
class CoreConfig:
    fetch: str = "dualpc"
    bpred: str = "gshare"
    max_cycles: int = 10_000_000
    imem_bytes: int = DEFAULT_SIZE
    dmem_bytes: int = DEFAULT_SIZE
    sp_init: bool = False

    @property
    def label(self) -> str:
        return f"{self.fetch}/{self.bpred}"

    def to_dict(self) -> Dict[str, Any]:
        return {
            "fetch": self.fetch,
            "bpred": self.bpred,
            "max_cycles": self.max_cycles,
            "imem_bytes": self.imem_bytes,
            "dmem_bytes": self.dmem_bytes,
            "sp_init": self.sp_init
        }


@dataclass
class CoreRunResult:
    stats: Stats
    commits: List[CommitRecord]
    console: bytes
    status: ExitStatus
    predictor: Dict[str, Any] = field(default_factory=dict)


@dataclass(frozen=True)
class _Predecessor:
    """The previous instruction that passed through MA."""
    comp: bool
    taken: bool


class Core:
    def __init__(self, imem: InstMemory, dmem: DataMemory, config: Optional[CoreConfig] = None,
                 trace: Optional[TraceHook] = None):
        self.config = config or CoreConfig()
        self.imem = imem
        self.dmem = dmem
        self.fetch_unit = make_fetch_unit(self.config.fetch, imem)
        self.predictor = BranchPredictor(self.config.bpred)
        self.regfile = [0] * 32
        if self.config.sp_init:
            self.regfile[2] = dmem.size_bytes & MASK
        self.regs = StageRegs()
        self.fetch_state = IfState()
        self.stats = Stats(predictor_enabled=self.predictor.enabled)
        self.commits: List[CommitRecord] = []
        self.cycle = 0
        self.trace = trace
        self._id_inst = None
        self._last_ma: Optional[_Predecessor] = None

    # ------------------------------------------------------------------
    # WB
    # ------------------------------------------------------------------
    def _writeback(self, slot: Optional[InFlight]) -> Optional[ExitStatus]:
        if slot is None:
            return None
        if slot.fault is not None:
            return ExitStatus(RunStatus.FAULT, reason=slot.fault.message, error=slot.fault)
        inst = slot.inst
        if inst.op == Op.ILLEGAL:
            error = IllegalInstruction(
                f"illegal instruction {slot.raw.bits:0{2 * slot.raw.len}x} at {slot.pc:#010x}",
                "E_ILLEGAL",
                {"pc": slot.pc, "raw": slot.raw.bits}
            )
            return ExitStatus(RunStatus.ILLEGAL, reason=error.message, error=error)

        if writes_rd(inst.op) and inst.rd:
            self.regfile[inst.rd] = slot.result & MASK
        self.commits.append(CommitRecord(slot.pc, slot.raw.bits, tuple(self.regfile)))
        self.stats.instructions += 1
        if inst.is_control:
            self.stats.branches += 1
        if slot.fetch_miss:
            self.stats.fetch_misses += 1
        self.stats.load_use_stalls += slot.load_use_stalls
        if trace_logger.isEnabledFor(logging.DEBUG):
            trace_logger.debug(f"commit {slot.pc:08x} {disassemble(inst)}")

        if isinstance(slot.event, ExitEvent):
            return ExitStatus(RunStatus.EXIT, code=slot.event.code, reason=str(slot.event))
        if inst.op in HALTS:
            return ExitStatus(RunStatus.HALT, reason=f"{inst.op.value} at {slot.pc:#010x}")
        return None

    # ------------------------------------------------------------------
    # MA
    # ------------------------------------------------------------------
    def _memory_access(self, slot: Optional[InFlight]) -> Tuple[Optional[InFlight], Optional[Tuple[int, int]], Optional[ExitStatus]]:
        if slot is None:
            return None, None, None
        if slot.fault is not None:
            return slot, None, None

        op = slot.inst.op
        try:
            if op in LOAD_WIDTH:
                size, signed = LOAD_WIDTH[op]
                slot.result = self.dmem.data_access(slot.mem_addr, size, signed)
            elif op in STORE_WIDTH:
                self.dmem.data_access(slot.mem_addr, STORE_WIDTH[op], write=True, value=slot.store_data)
        except ExitEvent as e:
            slot.event = e
        except MemoryFault as e:
            return None, None, ExitStatus(RunStatus.FAULT, reason=e.message, error=e)

        resolution = resolve_branch(slot)
        check_redirect(resolution)
        self._train_predictor(slot, resolution.mispredict)
        if not resolution.mispredict:
            return slot, None, None
        self.stats.flushed_slots += FLUSH_DEPTH
        return slot, (resolution.true_pc, resolution.true_pc_2), None

    def _train_predictor(self, slot: InFlight, mispredict: bool) -> None:
        inst = slot.inst
        prev = self._last_ma
        # without a known sequential predecessor the PHT/BTB slot is unknown
        prohibit = prev is None or prev.taken
        pred_addr = 0 if prev is None else (slot.pc - (2 if prev.comp else 4)) & MASK
        if inst.is_control:
            if mispredict:
                self.stats.mispredicts += 1
            self.predictor.update(slot.pc, pred_addr, slot.branch_taken, slot.taken_pc,
                                  prohibit, slot.ghr, conditional=inst.is_branch)
        elif slot.pred_taken:
            self.predictor.correct_alias(slot.pc, pred_addr, prohibit, slot.ghr)
        self._last_ma = _Predecessor(slot.comp, inst.is_control and slot.branch_taken)

    # ------------------------------------------------------------------
    # EX
    # ------------------------------------------------------------------
    def _operand(self, reg: int, older: Optional[InFlight]) -> int:
        if reg == 0:
            return 0
        if older is not None and older.valid and writes_rd(older.inst.op) and older.inst.rd == reg:
            return older.result & MASK
        return self.regfile[reg]

    def _counter(self, csr: int, older: Optional[InFlight]) -> int:
        if csr in (CSR_INSTRET, CSR_INSTRETH):
            value = self.stats.instructions + (1 if older is not None and older.valid else 0)
        else:
            value = self.cycle
        if csr in (CSR_CYCLEH, CSR_TIMEH, CSR_INSTRETH):
            return (value >> 32) & MASK
        return value & MASK

    def _execute(self, slot: Optional[InFlight], older: Optional[InFlight]) -> Optional[InFlight]:
        if slot is None or slot.fault is not None:
            return slot
        inst = slot.inst
        op = inst.op
        step, step_2 = (2, 4) if slot.comp else (4, 6)
        slot.below_pc = (slot.pc + step) & MASK
        slot.below_pc_2 = (slot.pc + step_2) & MASK
        slot.executed = True
        if op == Op.ILLEGAL:
            return slot

        a = self._operand(inst.rs1, older) if reads_rs1(op) else 0
        b = self._operand(inst.rs2, older) if reads_rs2(op) else 0

        if inst.is_control:
            base = a if op == Op.JALR else slot.pc
            slot.taken_pc, slot.taken_pc_2 = compute_taken_pc(base, slot.imm, slot.imm_2, jalr=op == Op.JALR)
            if inst.is_branch:
                slot.branch_taken = branch_condition(op, a, b)
            else:
                slot.branch_taken = True
                slot.result = slot.below_pc
        elif op == Op.LUI:
            slot.result = slot.imm & MASK
        elif op == Op.AUIPC:
            slot.result = (slot.pc + slot.imm) & MASK
        elif op in LOAD_WIDTH or op in STORE_WIDTH:
            slot.mem_addr = (a + slot.imm) & MASK
            slot.store_data = b
        elif op == Op.CSRR:
            slot.result = self._counter(slot.imm, older)
        elif op in IMM_ALU:
            slot.result = alu(op, a, slot.imm)
        elif op == Op.FENCE or op in HALTS:
            pass
        else:
            slot.result = alu(op, a, b)
        return slot

    # ------------------------------------------------------------------
    # ID
    # ------------------------------------------------------------------
    def _decode(self, slot: Optional[InFlight]) -> Optional[InFlight]:
        self._id_inst = None
        if slot is None or slot.fault is not None:
            return slot
        slot.inst = decode(slot.raw)
        slot.imm = slot.inst.imm
        slot.imm_2 = slot.inst.imm + 2
        self._id_inst = slot.inst
        return slot

    # ------------------------------------------------------------------
    # IF
    # ------------------------------------------------------------------
    def _fetch(self, redirect: Optional[Tuple[int, int]]) -> Optional[InFlight]:
        f = self.fetch_state
        if redirect is not None:
            f.held = f.busy = None
            f.stalls = 0
            f.pc, f.pc2 = select_next_pc(PcCandidates.around(f.pc, true=redirect), PcControl(mispredict=True))
            f.prediction = None
            f.redirect_pending = True
            f.stopped = False
            return None
        if f.stopped:
            return None

        if f.held is None:
            if f.busy is not None:
                f.held, f.busy = f.busy, None
            else:
                try:
                    result = self.fetch_unit.fetch(f.pc, f.pc2, f.redirect_pending)
                except MemoryFault as e:
                    # carried down the pipe; it only halts the core if it commits
                    f.stopped = True
                    f.redirect_pending = False
                    return InFlight(pc=f.pc, fault=e)
                f.redirect_pending = False
                if result.cycles > 1:
                    f.busy = result
                    self.stats.fetch_cycles += result.cycles - 1
                    return None
                f.held = result

        result = f.held
        if hazard_detect(decode(result.raw), self._id_inst):
            f.stalls += 1
            f.pc, f.pc2 = select_next_pc(PcCandidates.around(f.pc), PcControl(stall=True))
            return None

        f.held = None
        pred = f.prediction
        applies = pred is not None and pred.for_pc == f.pc
        use_pred = applies and pred.taken
        candidates = PcCandidates.around(f.pc, pred=(pred.target, pred.target_2) if use_pred else None)
        next_pc, next_pc2 = select_next_pc(
            candidates,
            PcControl(predicted_taken=use_pred, compressed=result.raw.len == 2)
        )
        slot = InFlight(
            pc=f.pc,
            raw=result.raw,
            fetch_miss=result.fetch_miss,
            load_use_stalls=f.stalls,
            pred_next=next_pc,
            pred_taken=use_pred,
            ghr=pred.ghr if applies else self.predictor.ghr,
        )
        f.stalls = 0
        f.prediction = self.predictor.predict(f.pc, (f.pc + result.raw.len) & MASK)
        f.redirect_pending = use_pred
        f.pc, f.pc2 = next_pc, next_pc2
        return slot

    # ------------------------------------------------------------------
    def tick(self) -> Optional[ExitStatus]:
        """Advance one cycle; returns an ExitStatus once the program stops."""
        self.cycle += 1
        regs = self.regs

        status = self._writeback(regs.ma_wb)
        if status is not None:
            return status
        ma_wb, redirect, status = self._memory_access(regs.ex_ma)
        if status is not None:
            return status
        if redirect is None:
            ex_ma = self._execute(regs.id_ex, ma_wb)
            id_ex = self._decode(regs.if_id)
        else:
            ex_ma = id_ex = None
            self._id_inst = None
        if_id = self._fetch(redirect)

        self.regs = StageRegs(if_id=if_id, id_ex=id_ex, ex_ma=ex_ma, ma_wb=ma_wb)
        check_fetch_twins(self.fetch_state)
        for slot in (id_ex, ex_ma):
            check_twins(slot)

        if self.trace is not None or trace_logger.isEnabledFor(logging.DEBUG):
            occupancy = {"IF": self.fetch_state.pc, **self.regs.occupancy()}
            if self.trace is not None:
                self.trace(self.cycle, occupancy)
            trace_logger.debug(f"{self.cycle:8d} " + " ".join(
                f"{stage}={'--------' if pc is None else format(pc, '08x')}" for stage, pc in occupancy.items()
            ))
        return None

    def run(self, max_cycles: Optional[int] = None) -> ExitStatus:
        limit = self.config.max_cycles if max_cycles is None else max_cycles
        status = None
        while status is None:
            if self.cycle >= limit:
                status = ExitStatus(RunStatus.STEP_LIMIT, reason=f"cycle limit {limit} reached")
                break
            status = self.tick()
        self.stats.cycles = self.cycle
        self.stats.prohibited_updates = self.predictor.stats.prohibited_updates
        return status


def run_core(image: MemoryImage, config: Optional[CoreConfig] = None, console: Optional[BinaryIO] = None,
             trace: Optional[TraceHook] = None) -> CoreRunResult:
    config = config or CoreConfig()
    imem, dmem = build_memories(image, config.imem_bytes, config.dmem_bytes, console=console)
    core = Core(imem, dmem, config, trace=trace)
    status = core.run()
    logger.info(f"pipeline run of {image.source} [{config.label}]: " + json.dumps({
        "status": status.status.value,
        **core.stats.to_dict()
    }))
    return CoreRunResult(core.stats, core.commits, bytes(dmem.console), status, core.predictor.to_dict())
