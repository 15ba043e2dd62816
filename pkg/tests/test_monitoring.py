"""
Tests for the bench metrics monitor
"""
import threading

import pytest

from src.monitoring.monitor import BenchMonitor, CellMetrics


@pytest.fixture
def monitor(logger):
    """Fixture to provide a fresh monitor"""
    return BenchMonitor(logger)


class TestCellMetrics:
    def test_ipc(self):
        """Test the derived IPC"""
        assert CellMetrics("p", "dualpc/gshare", "exit", 200, 150, 0.1).ipc == 0.75

    def test_zero_cycles(self):
        """Test a cell that never ran"""
        metrics = CellMetrics("p", "dualpc/gshare", "error", 0, 0, 0.0)
        assert metrics.ipc == 0.0
        assert metrics.timestamp


class TestBenchMonitor:
    def test_record_and_summary(self, monitor):
        """Test per-status counts in the summary"""
        monitor.record(CellMetrics("a", "dualpc/gshare", "exit", 100, 80, 0.01))
        monitor.record(CellMetrics("a", "buffer/gshare", "exit", 110, 80, 0.02))
        monitor.record(CellMetrics("b", "dualpc/gshare", "fault", 5, 3, 0.01))
        summary = monitor.summary()
        assert summary["cells"] == 3
        assert summary["by_status"] == {"exit": 2, "fault": 1}
        assert summary["wall_seconds"] == pytest.approx(0.04)
        assert summary["rss_bytes"] > 0

    def test_gauges(self, monitor):
        """Test the per-cell IPC gauge"""
        monitor.record(CellMetrics("a", "dualpc/gshare", "exit", 100, 80, 0.01))
        value = monitor.registry.get_sample_value(
            "rvsim_cell_ipc", {"program": "a", "config": "dualpc/gshare"}
        )
        assert value == 0.8

    def test_concurrent_records(self, monitor):
        """Test that records from several threads are all kept"""
        def worker(n):
            for i in range(50):
                monitor.record(CellMetrics(f"p{n}", "dualpc/gshare", "exit", 10, 5, 0.0))

        threads = [threading.Thread(target=worker, args=(n,)) for n in range(4)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert monitor.summary()["cells"] == 200
        assert monitor.registry.get_sample_value("rvsim_bench_cells_total", {"status": "exit"}) == 200

    def test_write_textfile(self, monitor, tmp_path):
        """Test the node-exporter textfile output"""
        monitor.record(CellMetrics("a", "dualpc/gshare", "exit", 100, 80, 0.01))
        path = tmp_path / "bench.prom"
        monitor.write_textfile(str(path))
        text = path.read_text()
        assert 'rvsim_bench_cells_total{status="exit"} 1.0' in text
        assert "rvsim_cell_wall_seconds_bucket" in text
        assert "rvsim_process_rss_bytes" in text
