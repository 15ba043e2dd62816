"""
Stress microbenchmark generators.

Each generator returns the program image together with a manifest describing the
behaviour the pipeline is expected to show on it. All programs start at address 0
and terminate with a store to the EXIT address.
"""
import logging
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Tuple

import yaml

from src.errors import ConfigError
from src.isa.opcodes import BRANCHES, IMM_ALU, Op, REG_ALU, to_signed
from src.isa.program import ProgramBuilder
from src.memsys.image import to_hex_words

logger = logging.getLogger("rvsim.harness.gen")

DATA_BASE = 0x3000
STACK_BASE = DATA_BASE + 0x100
CODE_LIMIT = DATA_BASE - 0x100

# x1 link, x2 stack-like base, x5 loop counter and exit scratch, x9 data base
RESERVED = frozenset({0, 1, 2, 5, 9})
POOL = [r for r in range(32) if r not in RESERVED]
# exit stub: C.LUI + SW
EXIT_STUB = 2


@dataclass
class GeneratedProgram:
    kind: str
    seed: int
    size: int
    payload: bytes
    step_bound: int
    expected: Dict[str, Any] = field(default_factory=dict)

    def manifest(self) -> Dict[str, Any]:
        return {
            "kind": self.kind,
            "seed": self.seed,
            "size": self.size,
            "origin": 0,
            "bytes": len(self.payload),
            "step_bound": self.step_bound,
            "expected": self.expected
        }


def _check_size(kind: str, size: int, minimum: int = 1) -> None:
    if size < minimum:
        raise ConfigError(
            f"size {size} too small for {kind}; at least {minimum} needed to hold the exit stub",
            "E_GEN_SIZE",
            {"kind": kind, "size": size}
        )


def _li_count(value: int) -> int:
    value = to_signed(value)
    if -2048 <= value < 2048:
        return 1
    return 1 if value & 0xFFF == 0 else 2


def gen_fetchmiss(size: int = 1000, seed: int = 0) -> GeneratedProgram:
    """A loop whose taken branch lands on a 32-bit instruction at pc = 2 (mod 4)."""
    _check_size("fetchmiss", size)
    b = ProgramBuilder()
    b.li(8, size)
    b.emit(Op.JAL, rd=0, target="loop")
    if b.pc % 4 == 0:
        b.emit(Op.ADDI, c=True)
    b.label("loop")
    b.emit(Op.ADDI, rd=9, rs1=9, imm=1)
    b.emit(Op.ADDI, rd=8, rs1=8, imm=-1, c=True)
    b.emit(Op.BNE, rs1=8, rs2=0, target="loop")
    b.exit()

    loop = b.labels["loop"]
    # one-shot 32-bit instructions at pc = 2 (mod 4) also cost the naive unit a miss
    straddling = sum(1 for addr, width in b.layout() if width == 4 and addr % 4 == 2 and addr != loop)
    instructions = _li_count(size) + 1 + 3 * size + EXIT_STUB
    return GeneratedProgram(
        kind="fetchmiss",
        seed=seed,
        size=size,
        payload=b.build(),
        step_bound=instructions,
        expected={
            "instructions": instructions,
            "loop_address": loop,
            "fetch_misses": {"buffer": size, "dualpc": 0, "naive": size + straddling},
        },
    )


def gen_bimodal_killer(size: int = 2500, seed: int = 0) -> GeneratedProgram:
    """Three branches whose outcome flips every iteration.

    A per-address two-bit counter cannot follow a period-2 pattern; a predictor
    indexed with global history sees it as a fixed sequence.
    """
    _check_size("bimodal-killer", size)
    b = ProgramBuilder()
    b.li(8, size)
    b.label("loop")
    b.emit(Op.XORI, rd=9, rs1=9, imm=1)
    for k in range(3):
        b.emit(Op.BEQ, rs1=9, rs2=0, target=f"skip{k}")
        b.emit(Op.ADDI, rd=10 + k, rs1=10 + k, imm=1, c=True)
        b.label(f"skip{k}")
        b.emit(Op.ADDI, rd=13, rs1=13, imm=1, c=True)
    b.emit(Op.ADDI, rd=8, rs1=8, imm=-1, c=True)
    b.emit(Op.BNE, rs1=8, rs2=0, target="loop")
    b.exit()

    # x9 toggles to 1 on odd iterations, where the BEQs fall through into the ADDI
    falls_through = (size + 1) // 2
    instructions = _li_count(size) + size * (1 + 3 * 2 + 2) + 3 * falls_through + EXIT_STUB
    return GeneratedProgram(
        kind="bimodal-killer",
        seed=seed,
        size=size,
        payload=b.build(),
        step_bound=instructions,
        expected={
            "instructions": instructions,
            "branches": 4 * size,
            "hit_rate_margin": {"gshare_over_bimodal": 0.20},
        },
    )


def gen_loaduse(size: int = 500, seed: int = 0) -> GeneratedProgram:
    """Loads immediately consumed by the next instruction, two per iteration."""
    _check_size("loaduse", size)
    b = ProgramBuilder()
    b.li(9, DATA_BASE)
    b.li(8, size)
    b.label("loop")
    b.emit(Op.LW, rd=10, rs1=9, imm=0)
    b.emit(Op.ADD, rd=11, rs1=11, rs2=10)
    b.emit(Op.LW, rd=12, rs1=9, imm=4)
    b.emit(Op.ADDI, rd=12, rs1=12, imm=1)
    b.emit(Op.SW, rs1=9, rs2=12, imm=4)
    b.emit(Op.ADDI, rd=8, rs1=8, imm=-1, c=True)
    b.emit(Op.BNE, rs1=8, rs2=0, target="loop")
    b.exit()
    b.org(DATA_BASE)
    b.words([7, 0])

    instructions = _li_count(DATA_BASE) + _li_count(size) + 7 * size + EXIT_STUB
    return GeneratedProgram(
        kind="loaduse",
        seed=seed,
        size=size,
        payload=b.build(),
        step_bound=instructions,
        expected={
            "instructions": instructions,
            "load_use_stalls": {scheme: 2 * size for scheme in ("gshare", "bimodal", "none")},
            "final": {"x11": (7 * size) & 0xFFFFFFFF, "x12": size},
        },
    )


class _RandomProgram:
    """Builds one seeded random program block by block, tracking a step bound."""

    def __init__(self, seed: int):
        self.rng = random.Random(seed)
        self.b = ProgramBuilder()
        self.steps = 0
        self._labels = 0

    def _label(self) -> str:
        self._labels += 1
        return f"L{self._labels}"

    def _reg(self) -> int:
        return self.rng.choice(POOL)

    def _src(self) -> int:
        # reserved registers hold deterministic values, so they may be read
        return self.rng.randrange(32)

    def alu(self) -> int:
        """Emit one ALU instruction and return its static count."""
        rng = self.rng
        kind = rng.random()
        if kind < 0.45:
            op = rng.choice(sorted(IMM_ALU, key=lambda o: o.value))
            if op in (Op.SLLI, Op.SRLI, Op.SRAI):
                imm = rng.randrange(32)
            elif rng.random() < 0.5:
                imm = rng.randint(-32, 31)
            else:
                imm = rng.randint(-2048, 2047)
            self.b.emit(op, rd=self._reg(), rs1=self._src(), imm=imm, c="auto")
        elif kind < 0.9:
            op = rng.choice(sorted(REG_ALU, key=lambda o: o.value))
            rd = self._reg()
            # same rd/rs1 and low registers make the compressed forms reachable
            rs1 = rd if rng.random() < 0.5 else self._src()
            self.b.emit(op, rd=rd, rs1=rs1, rs2=self._src(), c="auto")
        elif kind < 0.95:
            self.b.emit(Op.LUI, rd=self._reg(), imm=rng.randint(-(1 << 19), (1 << 19) - 1) << 12, c="auto")
        else:
            self.b.emit(Op.AUIPC, rd=self._reg(), imm=rng.randint(0, 255) << 12)
        return 1

    def memory(self) -> int:
        rng = self.rng
        base = 2 if rng.random() < 0.4 else 9
        if rng.random() < 0.5:
            op = rng.choice([Op.LB, Op.LH, Op.LW, Op.LBU, Op.LHU])
        else:
            op = rng.choice([Op.SB, Op.SH, Op.SW])
        width = {Op.LB: 1, Op.LBU: 1, Op.SB: 1, Op.LH: 2, Op.LHU: 2, Op.SH: 2}.get(op, 4)
        offset = rng.randrange(0, 256, width)
        if op in (Op.SB, Op.SH, Op.SW):
            self.b.emit(op, rs1=base, rs2=self._src(), imm=offset, c="auto")
        else:
            self.b.emit(op, rd=self._reg(), rs1=base, imm=offset, c="auto")
        return 1

    def straight(self, count: int) -> int:
        emitted = 0
        for _ in range(count):
            emitted += self.memory() if self.rng.random() < 0.25 else self.alu()
        return emitted

    def forward_branch(self) -> None:
        rng = self.rng
        skip = self._label()
        op = rng.choice(sorted(BRANCHES, key=lambda o: o.value))
        rs1, rs2 = self._src(), self._src()
        compressed = False
        if op in (Op.BEQ, Op.BNE) and rng.random() < 0.5:
            rs1, rs2 = rng.randrange(8, 16), 0
            compressed = rs1 not in RESERVED
        self.b.emit(op, rs1=rs1, rs2=rs2, target=skip, c=compressed)
        body = self.straight(rng.randint(1, 8))
        self.b.label(skip)
        self.steps += 1 + body

    def loop(self) -> None:
        rng = self.rng
        trips = rng.randint(1, 8)
        head = self._label()
        self.b.li(5, trips)
        self.b.label(head)
        body = self.straight(rng.randint(1, 6))
        self.b.emit(Op.ADDI, rd=5, rs1=5, imm=-1, c="auto")
        self.b.emit(Op.BNE, rs1=5, rs2=0, target=head)
        self.steps += 1 + trips * (body + 2)

    def jump(self) -> None:
        rng = self.rng
        skip = self._label()
        style = rng.randrange(3)
        if style == 0:
            self.b.emit(Op.JAL, rd=rng.choice([0, 1]), target=skip, c=rng.random() < 0.5)
            jumps = 1
        else:
            base = self._label()
            self.b.label(base)
            self.b.emit(Op.AUIPC, rd=1, imm=0)
            self.b.emit(Op.ADDI, rd=1, rs1=1, target=skip, base=base)
            # C.JR or C.JALR through the computed address
            self.b.emit(Op.JALR, rd=0 if style == 1 else 1, rs1=1, imm=0, c=True)
            jumps = 3
        body = self.straight(rng.randint(1, 4))
        self.b.label(skip)
        self.steps += jumps + body

    def build(self, blocks: int) -> Tuple[bytes, int]:
        rng = self.rng
        self.b.li(9, DATA_BASE)
        self.b.li(2, STACK_BASE)
        self.steps += _li_count(DATA_BASE) + _li_count(STACK_BASE)
        for reg in rng.sample(POOL, 8):
            value = rng.getrandbits(32)
            self.b.li(reg, value)
            self.steps += _li_count(value)

        emitters: List[Callable[[], Any]] = [self.forward_branch, self.loop, self.jump]
        for _ in range(blocks):
            choice = rng.random()
            if choice < 0.45:
                self.steps += self.straight(rng.randint(1, 6))
            else:
                rng.choice(emitters)()
            if self.b.pc >= CODE_LIMIT:
                raise ConfigError(
                    f"random program with {blocks} blocks does not fit below {CODE_LIMIT:#x}",
                    "E_GEN_SIZE",
                    {"blocks": blocks}
                )
        self.b.exit()
        self.steps += EXIT_STUB
        return self.b.build(), self.steps


def gen_rand(size: int = 64, seed: int = 1) -> GeneratedProgram:
    """Seeded mix of compressed and full-width ALU, memory, branch and jump blocks."""
    _check_size("rand", size)
    payload, steps = _RandomProgram(seed).build(size)
    return GeneratedProgram(
        kind="rand",
        seed=seed,
        size=size,
        payload=payload,
        step_bound=steps,
        expected={"exit_code": 0},
    )


GENERATORS: Dict[str, Callable[..., GeneratedProgram]] = {
    "fetchmiss": gen_fetchmiss,
    "bimodal-killer": gen_bimodal_killer,
    "loaduse": gen_loaduse,
    "rand": gen_rand,
}

DEFAULT_SIZES = {"fetchmiss": 1000, "bimodal-killer": 2500, "loaduse": 500, "rand": 64}


def generate(kind: str, seed: int = 1, size: int = None) -> GeneratedProgram:
    if kind not in GENERATORS:
        raise ConfigError(
            f"unknown generator {kind!r}; expected one of {', '.join(GENERATORS)}",
            "E_GEN_KIND",
            {"kind": kind}
        )
    program = GENERATORS[kind](size=DEFAULT_SIZES[kind] if size is None else size, seed=seed)
    logger.info(f"generated {kind} (seed={seed}, size={program.size}): {len(program.payload)} bytes, "
                f"step bound {program.step_bound}")
    return program


def write_program(program: GeneratedProgram, out: str, fmt: str = "bin") -> Tuple[Path, Path]:
    """Write the image (.bin or .hex) and its YAML manifest next to it."""
    path = Path(out)
    if path.suffix.lower() not in (".bin", ".hex"):
        path = path.with_suffix("." + fmt)
    path.parent.mkdir(parents=True, exist_ok=True)
    if path.suffix.lower() == ".hex":
        path.write_text(to_hex_words(program.payload))
        fmt = "hex"
    else:
        path.write_bytes(program.payload)
        fmt = "bin"
    manifest_path = path.with_suffix(".yaml")
    manifest = program.manifest()
    manifest["image"] = path.name
    manifest["format"] = fmt
    with open(manifest_path, "w") as f:
        yaml.safe_dump(manifest, f, sort_keys=False)
    logger.debug(f"wrote {path} and {manifest_path}")
    return path, manifest_path
