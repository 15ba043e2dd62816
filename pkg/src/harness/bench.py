"""
Batch runs of a program suite across a fetch/bpred matrix.

Cells run concurrently on a thread pool, each with its own core; rows are
assembled in (program, matrix) order so the CSV does not depend on scheduling.
"""
import csv
import io
import json
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from statistics import fmean
from typing import Any, Dict, List, Optional

from tabulate import tabulate

from src.errors import ConfigError, ErrorReport, SimError, report_error
from src.harness.config import BenchMatrix
from src.harness.runner import execute
from src.memsys.image import MemoryImage, load_image
from src.monitoring.monitor import BenchMonitor, CellMetrics
from src.pipeline.core import CoreConfig
from src.pipeline.stats import CSV_HEADER, Stats

logger = logging.getLogger("rvsim.harness.bench")

SUITE_SUFFIXES = (".bin", ".hex")
# plausible mean IPC for a scalar 5-stage core on compiled code
IPC_RANGE = (0.5, 1.0)


@dataclass
class BenchRow:
    program: str
    config: str
    fetch: str
    bpred: str
    status: str
    stats: Optional[Stats] = None
    error: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.status in ("exit", "halt") and self.stats is not None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "program": self.program,
            "config": self.config,
            "status": self.status,
            "stats": self.stats.to_dict() if self.stats else None,
            "error": self.error
        }


@dataclass
class DirectionalCheck:
    bpred: str
    dualpc_ipc: float
    buffer_ipc: float

    @property
    def holds(self) -> bool:
        return self.dualpc_ipc > self.buffer_ipc

    @property
    def in_range(self) -> bool:
        return all(IPC_RANGE[0] < ipc < IPC_RANGE[1] for ipc in (self.dualpc_ipc, self.buffer_ipc))


@dataclass
class BenchReport:
    programs: List[str]
    configs: List[str]
    rows: List[BenchRow] = field(default_factory=list)

    def cell(self, program: str, config: str) -> Optional[BenchRow]:
        for row in self.rows:
            if row.program == program and row.config == config:
                return row
        return None

    @property
    def failures(self) -> List[BenchRow]:
        return [row for row in self.rows if not row.ok]

    def mean_ipc(self, config: str) -> Optional[float]:
        values = [row.stats.ipc for row in self.rows if row.config == config and row.ok]
        return fmean(values) if values else None

    def mean_hit_rate(self, config: str) -> Optional[float]:
        values = [row.stats.hit_rate for row in self.rows if row.config == config and row.ok]
        if not values or any(v is None for v in values):
            return None
        return fmean(values)

    def instruction_mismatches(self) -> Dict[str, Dict[str, int]]:
        """Programs whose successful cells disagree on committed instruction count."""
        mismatches = {}
        for program in self.programs:
            counts = {row.config: row.stats.instructions for row in self.rows if row.program == program and row.ok}
            if len(set(counts.values())) > 1:
                mismatches[program] = counts
        return mismatches

    def directional_checks(self) -> List[DirectionalCheck]:
        checks = []
        schemes = list(dict.fromkeys(c.split("/", 1)[1] for c in self.configs))
        for bpred in schemes:
            dual = self.mean_ipc(f"dualpc/{bpred}")
            buf = self.mean_ipc(f"buffer/{bpred}")
            if dual is not None and buf is not None:
                checks.append(DirectionalCheck(bpred, dual, buf))
        return checks

    def csv_text(self) -> str:
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for row in self.rows:
            if row.ok:
                writer.writerow(row.stats.csv_row(row.config, row.program))
        return out.getvalue()

    def write_csv(self, path: str) -> None:
        with open(path, "w", newline="") as f:
            f.write(self.csv_text())

    def ipc_table(self) -> str:
        table = []
        for program in self.programs:
            line = [program]
            for config in self.configs:
                row = self.cell(program, config)
                line.append(row.stats.ipc if row is not None and row.ok else row.status if row else "")
            table.append(line)
        table.append(["mean"] + [self.mean_ipc(c) for c in self.configs])
        return tabulate(table, headers=["program"] + self.configs, tablefmt="github", floatfmt=".4f",
                        missingval="-")

    @property
    def ok(self) -> bool:
        return not self.failures and not self.instruction_mismatches()


def discover_programs(suite: str) -> List[Path]:
    root = Path(suite)
    if not root.is_dir():
        raise ConfigError(f"suite directory not found: {suite}", "E_SUITE_NOT_FOUND", {"suite": suite})
    programs = sorted(p for p in root.iterdir() if p.is_file() and p.suffix.lower() in SUITE_SUFFIXES)
    if not programs:
        raise ConfigError(f"no .bin or .hex programs in {suite}", "E_EMPTY_SUITE", {"suite": suite})
    seen: Dict[str, Path] = {}
    for path in programs:
        if path.stem in seen:
            raise ConfigError(
                f"programs {seen[path.stem].name} and {path.name} share the name {path.stem}",
                "E_DUPLICATE_PROGRAM",
                {"suite": suite, "program": path.stem, "files": [seen[path.stem].name, path.name]}
            )
        seen[path.stem] = path
    return programs


def _run_cell(name: str, image: MemoryImage, cell: CoreConfig, monitor: Optional[BenchMonitor]) -> BenchRow:
    started = time.perf_counter()
    try:
        outcome = execute(image, "pipeline", cell, program=name)
    except SimError as e:
        report_error(ErrorReport(e, "pipeline", name, {"config": cell.label}), logger)
        row = BenchRow(name, cell.label, cell.fetch, cell.bpred, status="error", error=e.message)
    else:
        row = BenchRow(name, cell.label, cell.fetch, cell.bpred, status=outcome.status.status.value,
                       stats=outcome.stats, error=outcome.status.reason if not outcome.status.ok else None)
    if monitor is not None:
        stats = row.stats or Stats()
        monitor.record(CellMetrics(name, cell.label, row.status, stats.cycles, stats.instructions,
                                   time.perf_counter() - started))
    return row


def run_bench(programs: List[Path], matrix: BenchMatrix, jobs: int = 1,
              monitor: Optional[BenchMonitor] = None) -> BenchReport:
    cells = matrix.cells()
    report = BenchReport(programs=[p.stem for p in programs], configs=[c.label for c in cells])
    images: Dict[str, Optional[MemoryImage]] = {}
    load_errors: Dict[str, str] = {}
    for path in programs:
        try:
            images[path.stem] = load_image(str(path))
        except SimError as e:
            report_error(ErrorReport(e, "bench", str(path)), logger)
            load_errors[path.stem] = e.message

    logger.info(f"bench: {len(programs)} programs x {len(cells)} configs on {jobs} workers")
    with ThreadPoolExecutor(max_workers=max(1, jobs)) as pool:
        futures = []
        for name in report.programs:
            for cell in cells:
                if name in load_errors:
                    futures.append(None)
                else:
                    futures.append(pool.submit(_run_cell, name, images[name], cell, monitor))
        index = 0
        for name in report.programs:
            for cell in cells:
                future = futures[index]
                index += 1
                if future is None:
                    report.rows.append(BenchRow(name, cell.label, cell.fetch, cell.bpred,
                                                status="error", error=load_errors[name]))
                else:
                    report.rows.append(future.result())

    for row in report.failures:
        logger.warning(f"cell failed: {json.dumps(row.to_dict())}")
    for program, counts in report.instruction_mismatches().items():
        logger.error(f"instruction counts differ for {program}: {json.dumps(counts)}")
    return report
