import json
import logging
import os
import threading
from dataclasses import dataclass
from datetime import datetime
from typing import Any, Dict, List, Optional

import psutil
from prometheus_client import CollectorRegistry, Counter, Gauge, Histogram, write_to_textfile


@dataclass
class CellMetrics:
    program: str
    config: str
    status: str
    cycles: int
    instructions: int
    wall_seconds: float
    timestamp: str = None

    def __post_init__(self):
        if self.timestamp is None:
            self.timestamp = datetime.now().isoformat()

    @property
    def ipc(self) -> float:
        return self.instructions / self.cycles if self.cycles else 0.0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "program": self.program,
            "config": self.config,
            "status": self.status,
            "cycles": self.cycles,
            "instructions": self.instructions,
            "ipc": self.ipc,
            "wall_seconds": self.wall_seconds,
            "timestamp": self.timestamp
        }


class BenchMonitor:
    """Per-cell bench metrics on a private prometheus registry."""

    def __init__(self, logger: Optional[logging.Logger] = None):
        self.logger = logger or logging.getLogger("rvsim.monitor")
        self.registry = CollectorRegistry()
        self.cells: List[CellMetrics] = []
        self._lock = threading.Lock()
        self._process = psutil.Process(os.getpid())

        self.cells_total = Counter(
            "rvsim_bench_cells", "Bench cells finished, by run status",
            ["status"], registry=self.registry
        )
        self.cell_ipc = Gauge(
            "rvsim_cell_ipc", "Committed instructions per cycle",
            ["program", "config"], registry=self.registry
        )
        self.cell_cycles = Gauge(
            "rvsim_cell_cycles", "Simulated cycles",
            ["program", "config"], registry=self.registry
        )
        self.cell_wall = Histogram(
            "rvsim_cell_wall_seconds", "Host time spent simulating one cell",
            ["config"], registry=self.registry
        )
        self.rss_bytes = Gauge(
            "rvsim_process_rss_bytes", "Resident set size of the simulator process",
            registry=self.registry
        )

    def record(self, metrics: CellMetrics) -> None:
        with self._lock:
            self.cells.append(metrics)
            self.cells_total.labels(status=metrics.status).inc()
            self.cell_ipc.labels(program=metrics.program, config=metrics.config).set(metrics.ipc)
            self.cell_cycles.labels(program=metrics.program, config=metrics.config).set(metrics.cycles)
            self.cell_wall.labels(config=metrics.config).observe(metrics.wall_seconds)
            self.rss_bytes.set(self._process.memory_info().rss)
        self.logger.debug(f"cell metrics: {json.dumps(metrics.to_dict())}")

    def summary(self) -> Dict[str, Any]:
        with self._lock:
            by_status: Dict[str, int] = {}
            for cell in self.cells:
                by_status[cell.status] = by_status.get(cell.status, 0) + 1
            return {
                "cells": len(self.cells),
                "by_status": by_status,
                "wall_seconds": sum(c.wall_seconds for c in self.cells),
                "rss_bytes": self._process.memory_info().rss
            }

    def write_textfile(self, path: str) -> None:
        """Write the registry in node-exporter textfile format."""
        write_to_textfile(path, self.registry)
        self.logger.info(f"metrics written to {path}")
