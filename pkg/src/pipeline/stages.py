"""
Pipeline registers and the combinational pieces of the core.

Every address that feeds the fetch stage travels with a precomputed +2 twin
(pc2, IMM_2, BelowPC_2, TakenPC_2, TruePC_2, PredPC_2), so the dual-PC fetch
unit never has to add after a selection. check_twins() asserts the twin law.
"""
from dataclasses import dataclass
from typing import Any, Dict, Optional, Tuple

from src.bpred.predictor import Prediction
from src.errors import SimError, SimEvent, TwinDatapathError
from src.fetch.units import FetchResult
from src.isa.opcodes import DecodedInst, RawInst, reads_rs1, reads_rs2

MASK = 0xFFFFFFFF

PcPair = Tuple[int, int]


def plus2(addr: int) -> int:
    return (addr + 2) & MASK


@dataclass
class InFlight:
    """One instruction's pipeline-register contents, filled in stage by stage."""
    pc: int
    raw: Optional[RawInst] = None
    fetch_miss: bool = False
    load_use_stalls: int = 0
    # IF: the pc fetched after this one, and the prediction state it was fetched with
    pred_next: int = 0
    pred_taken: bool = False
    ghr: int = 0
    fault: Optional[SimError] = None
    # ID
    inst: Optional[DecodedInst] = None
    imm: int = 0
    imm_2: int = 2
    # EX
    below_pc: int = 0
    below_pc_2: int = 0
    taken_pc: Optional[int] = None
    taken_pc_2: Optional[int] = None
    branch_taken: bool = False
    result: int = 0
    mem_addr: int = 0
    store_data: int = 0
    executed: bool = False
    # MA
    event: Optional[SimEvent] = None

    @property
    def comp(self) -> bool:
        return self.raw is not None and self.raw.len == 2

    @property
    def valid(self) -> bool:
        return self.fault is None and self.inst is not None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "pc": f"{self.pc:08x}",
            "op": self.inst.op.value if self.inst else None,
            "comp": self.comp,
            "pred_next": f"{self.pred_next:08x}",
            "branch_taken": self.branch_taken,
            "fault": self.fault.error_code if self.fault else None
        }


@dataclass
class StageRegs:
    if_id: Optional[InFlight] = None
    id_ex: Optional[InFlight] = None
    ex_ma: Optional[InFlight] = None
    ma_wb: Optional[InFlight] = None

    def occupancy(self) -> Dict[str, Optional[int]]:
        return {
            "ID": self.if_id.pc if self.if_id else None,
            "EX": self.id_ex.pc if self.id_ex else None,
            "MA": self.ex_ma.pc if self.ex_ma else None,
            "WB": self.ma_wb.pc if self.ma_wb else None,
        }


@dataclass
class IfState:
    pc: int = 0
    pc2: int = 2
    held: Optional[FetchResult] = None
    busy: Optional[FetchResult] = None
    prediction: Optional[Prediction] = None
    redirect_pending: bool = True
    stopped: bool = False
    # load-use bubbles spent on the instruction in held; charged when it commits
    stalls: int = 0


@dataclass(frozen=True)
class PcCandidates:
    stall: PcPair
    plus2: PcPair
    plus4: PcPair
    pred: Optional[PcPair] = None
    true: Optional[PcPair] = None

    @classmethod
    def around(cls, pc: int, pred: Optional[PcPair] = None, true: Optional[PcPair] = None) -> "PcCandidates":
        return cls(
            stall=(pc, plus2(pc)),
            plus2=(plus2(pc), (pc + 4) & MASK),
            plus4=((pc + 4) & MASK, (pc + 6) & MASK),
            pred=pred,
            true=true,
        )


@dataclass(frozen=True)
class PcControl:
    mispredict: bool = False
    stall: bool = False
    predicted_taken: bool = False
    compressed: bool = False


@dataclass(frozen=True)
class Resolution:
    mispredict: bool
    true_pc: int
    true_pc_2: int


def _twin(name: str, value: Optional[int], twin: Optional[int],
          context: Optional[Dict[str, Any]] = None, address: bool = True) -> None:
    if value is None:
        return
    expected = plus2(value) if address else value + 2
    if twin != expected:
        ctx = {"register": name, "value": value, "twin": twin}
        ctx.update(context or {})
        raise TwinDatapathError(f"{name}_2 is not {name} + 2", "E_TWIN_" + name.upper(), ctx)


def select_next_pc(candidates: PcCandidates, control: PcControl) -> PcPair:
    """Priority: TruePC > stall > PredPC > sequential (+2 compressed, +4 otherwise)."""
    if control.mispredict:
        chosen, name = candidates.true, "TruePC"
    elif control.stall:
        chosen, name = candidates.stall, "PC"
    elif control.predicted_taken:
        chosen, name = candidates.pred, "PredPC"
    elif control.compressed:
        chosen, name = candidates.plus2, "PC+2"
    else:
        chosen, name = candidates.plus4, "PC+4"
    if chosen is None:
        raise TwinDatapathError(f"{name} selected but not supplied", "E_PC_CANDIDATE", {"candidate": name})
    _twin(name, chosen[0], chosen[1])
    return chosen


def hazard_detect(if_inst: DecodedInst, id_inst: Optional[DecodedInst]) -> bool:
    """Load-use: the load in ID writes a register the instruction in IF reads."""
    if id_inst is None or not id_inst.is_load or id_inst.rd == 0:
        return False
    rd = id_inst.rd
    return (reads_rs1(if_inst.op) and if_inst.rs1 == rd) or (reads_rs2(if_inst.op) and if_inst.rs2 == rd)


def compute_taken_pc(base: int, imm: int, imm_2: int, jalr: bool = False) -> PcPair:
    if jalr:
        taken = (base + imm) & MASK & ~1
        return taken, plus2(taken)
    return (base + imm) & MASK, (base + imm_2) & MASK


def resolve_branch(slot: InFlight) -> Resolution:
    """Compare the pc fetched after this instruction with where it really goes."""
    if slot.inst is not None and slot.inst.is_control and slot.branch_taken:
        true_pc, true_pc_2 = slot.taken_pc, slot.taken_pc_2
    else:
        true_pc, true_pc_2 = slot.below_pc, slot.below_pc_2
    return Resolution(slot.pred_next != true_pc, true_pc, true_pc_2)


def check_twins(slot: Optional[InFlight]) -> None:
    if slot is None or not slot.valid:
        return
    ctx = {"pc": slot.pc}
    _twin("IMM", slot.imm, slot.imm_2, ctx, address=False)
    if slot.executed:
        _twin("BelowPC", slot.below_pc, slot.below_pc_2, ctx)
    if slot.branch_taken:
        _twin("TakenPC", slot.taken_pc, slot.taken_pc_2, ctx)


def check_fetch_twins(state: IfState) -> None:
    _twin("PC", state.pc, state.pc2)


def check_redirect(resolution: Resolution) -> None:
    _twin("TruePC", resolution.true_pc, resolution.true_pc_2)
