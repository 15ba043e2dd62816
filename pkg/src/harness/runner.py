import json
import logging
from dataclasses import dataclass, field
from typing import Any, BinaryIO, Dict, List, Optional

from src.memsys.image import MemoryImage
from src.pipeline.core import CoreConfig, run_core
from src.pipeline.stats import Stats
from src.refmodel import interpreter
from src.refmodel.commit_log import CommitRecord
from src.refmodel.status import ExitStatus

logger = logging.getLogger("rvsim.harness.runner")

ENGINES = ("pipeline", "ref")


@dataclass
class RunOutcome:
    engine: str
    config: str
    program: str
    commits: List[CommitRecord]
    status: ExitStatus
    console: bytes
    stats: Stats
    predictor: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "engine": self.engine,
            "config": self.config,
            "program": self.program,
            "status": self.status.to_dict(),
            "stats": self.stats.to_dict(),
            "predictor": self.predictor
        }


def execute(image: MemoryImage, engine: str = "pipeline", config: Optional[CoreConfig] = None,
            console: Optional[BinaryIO] = None, program: Optional[str] = None) -> RunOutcome:
    """Run one image on either engine and return a uniform outcome."""
    config = config or CoreConfig()
    program = program or image.source
    if engine == "ref":
        result = interpreter.run(
            image,
            max_steps=config.max_cycles,
            imem_bytes=config.imem_bytes,
            dmem_bytes=config.dmem_bytes,
            sp_init=config.sp_init,
            console=console,
        )
        # one instruction per step; no predictor
        stats = Stats(cycles=result.instructions, instructions=result.instructions, predictor_enabled=False)
        outcome = RunOutcome("ref", "ref", program, result.commits, result.status, result.console, stats)
    else:
        result = run_core(image, config, console=console)
        outcome = RunOutcome("pipeline", config.label, program, result.commits, result.status,
                             result.console, result.stats, result.predictor)
    logger.debug(f"outcome: {json.dumps(outcome.to_dict())}")
    return outcome
