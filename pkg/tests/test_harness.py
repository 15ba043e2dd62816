"""
Tests for the harness: configuration, log diffing, bench runs, reports and the CLI
"""
import csv
import io

import pytest
import yaml

from src.errors import ConfigError, LogFormatError
from src.harness import cli
from src.harness.bench import BenchReport, BenchRow, DirectionalCheck, discover_programs, run_bench
from src.harness.config import BenchMatrix, RunConfig, build_model, env_defaults
from src.harness.diff import diff_files, diff_lines
from src.harness.gen import gen_fetchmiss, gen_loaduse, write_program
from src.harness.report import REFERENCE_VALUES, render_report
from src.harness.runner import execute
from src.isa.program import ProgramBuilder
from src.memsys.image import MemoryImage
from src.monitoring.monitor import BenchMonitor
from src.pipeline.stats import CSV_HEADER, Stats
from src.refmodel.commit_log import CommitRecord, format_log

from tests.conftest import image_of


def _hello() -> bytes:
    b = ProgramBuilder()
    b.li(10, ord("A"))
    b.putchar(10)
    b.exit()
    return b.build()


@pytest.fixture
def hello_bin(tmp_path):
    path = tmp_path / "hello.bin"
    path.write_bytes(_hello())
    return path


@pytest.fixture
def suite(tmp_path):
    """Fixture to provide a three-program suite directory"""
    root = tmp_path / "suite"
    root.mkdir()
    (root / "hello.bin").write_bytes(_hello())
    write_program(gen_fetchmiss(size=20), str(root / "fetchmiss.bin"))
    write_program(gen_loaduse(size=10), str(root / "loaduse.hex"), fmt="hex")
    return root


class TestConfig:
    def test_defaults(self):
        """Test the default run configuration"""
        config = RunConfig(program="p.bin")
        assert config.label == "dualpc/gshare"
        assert config.core_config().imem_bytes == 64 * 1024

    def test_reference_engine_label(self):
        """Test the label of the reference engine"""
        assert RunConfig(program="p.bin", engine="ref").label == "ref"

    @pytest.mark.parametrize("data", [
        {"program": "p.bin", "fetch": "prefetch"},
        {"program": "p.bin", "imem_kb": 48},
        {"program": "p.bin", "max_cycles": 0},
    ])
    def test_invalid_values(self, data):
        """Test that validation problems become ConfigError"""
        with pytest.raises(ConfigError) as exc:
            build_model(RunConfig, data)
        assert exc.value.error_code == "E_CONFIG"

    def test_matrix_cells(self):
        """Test the cross product of the bench matrix"""
        matrix = BenchMatrix(fetch=["dualpc", "buffer"], bpred=["gshare", "none"])
        assert [c.label for c in matrix.cells()] == [
            "dualpc/gshare", "dualpc/none", "buffer/gshare", "buffer/none"
        ]

    def test_matrix_from_yaml(self, tmp_path):
        """Test loading the matrix from YAML with an override"""
        path = tmp_path / "matrix.yaml"
        path.write_text(yaml.safe_dump({"fetch": ["buffer"], "bpred": ["bimodal"]}))
        matrix = BenchMatrix.from_yaml(str(path), max_cycles=500)
        assert [c.label for c in matrix.cells()] == ["buffer/bimodal"]
        assert matrix.max_cycles == 500

    def test_env_defaults(self, monkeypatch, tmp_path):
        """Test RVSIM_* overrides"""
        monkeypatch.setenv("RVSIM_FETCH", "buffer")
        monkeypatch.setenv("RVSIM_MAX_CYCLES", "1234")
        monkeypatch.setenv("RVSIM_SP_INIT", "yes")
        defaults = env_defaults(str(tmp_path / "absent.env"))
        assert defaults["fetch"] == "buffer"
        assert defaults["max_cycles"] == 1234
        assert defaults["sp_init"] is True

    def test_env_bad_integer(self, monkeypatch, tmp_path):
        """Test a malformed numeric override"""
        monkeypatch.setenv("RVSIM_JOBS", "many")
        with pytest.raises(ConfigError):
            env_defaults(str(tmp_path / "absent.env"))


class TestDiff:
    @staticmethod
    def _records(n, bump_at=None):
        out = []
        for i in range(n):
            regs = [0] * 32
            regs[10] = i + (1 if i == bump_at else 0)
            out.append(CommitRecord(i * 4, 0x13, tuple(regs)))
        return out

    def test_identical(self):
        """Test identical logs"""
        log = format_log(self._records(5)).splitlines(True)
        result = diff_lines(log, log)
        assert result.identical and result.compared == 5

    def test_first_divergence(self):
        """Test the first differing line and field"""
        a = format_log(self._records(5)).splitlines(True)
        b = format_log(self._records(5, bump_at=2)).splitlines(True)
        result = diff_lines(a, b)
        assert not result.identical
        assert result.line == 3 and result.field == "X10"
        assert "X10" in result.report()

    def test_truncated_log(self):
        """Test a length mismatch after the common prefix"""
        a = format_log(self._records(5)).splitlines(True)
        result = diff_lines(a, a[:3])
        assert not result.identical
        assert result.line == 4 and result.field is None
        assert "length mismatch after 3" in result.reason

    def test_malformed_line(self):
        """Test that a malformed line is an error, not a mismatch"""
        a = format_log(self._records(2)).splitlines(True)
        with pytest.raises(LogFormatError):
            diff_lines(a, [a[0], "garbage\n"])

    def test_pipeline_and_reference_logs_match(self, tmp_path, fig2_image):
        """Test the differential method end to end through files"""
        pipe = tmp_path / "pipe.log"
        ref = tmp_path / "ref.log"
        pipe.write_text(format_log(execute(fig2_image, "pipeline").commits))
        ref.write_text(format_log(execute(fig2_image, "ref").commits))
        assert diff_files(str(pipe), str(ref)).identical


class TestRunner:
    def test_reference_engine_outcome(self):
        """Test that the reference engine reports one cycle per instruction and no predictor"""
        outcome = execute(MemoryImage(_hello()), "ref")
        assert outcome.console == b"A"
        assert outcome.stats.cycles == outcome.stats.instructions
        assert outcome.stats.hit_rate is None

    def test_pipeline_outcome(self):
        """Test the pipeline engine through the runner"""
        outcome = execute(MemoryImage(_hello()), "pipeline")
        assert outcome.console == b"A"
        assert outcome.config == "dualpc/gshare"
        assert outcome.stats.fetch_misses == 0


class TestBench:
    def test_discover_programs(self, suite):
        """Test suite discovery in sorted order"""
        names = [p.name for p in discover_programs(str(suite))]
        assert names == ["fetchmiss.bin", "hello.bin", "loaduse.hex"]

    def test_empty_suite(self, tmp_path):
        """Test that an empty suite directory is an error"""
        with pytest.raises(ConfigError):
            discover_programs(str(tmp_path))

    def test_same_name_in_two_formats(self, suite):
        """Test that foo.bin next to foo.hex is rejected instead of merged"""
        write_program(gen_loaduse(size=4), str(suite / "hello.hex"), fmt="hex")
        with pytest.raises(ConfigError) as exc:
            discover_programs(str(suite))
        assert exc.value.error_code == "E_DUPLICATE_PROGRAM"
        assert exc.value.context["files"] == ["hello.bin", "hello.hex"]

    def test_run_bench(self, suite):
        """Test a 3 x 2 matrix"""
        matrix = BenchMatrix(fetch=["dualpc", "buffer"], bpred=["gshare"])
        report = run_bench(discover_programs(str(suite)), matrix, jobs=2)
        assert len(report.rows) == 6
        assert report.ok
        for program in report.programs:
            dual = report.cell(program, "dualpc/gshare").stats
            buf = report.cell(program, "buffer/gshare").stats
            assert dual.instructions == buf.instructions
            assert dual.fetch_misses == 0

    def test_csv_is_deterministic(self, suite):
        """Test byte-identical CSV over repeated runs and worker counts"""
        matrix = BenchMatrix(fetch=["dualpc", "buffer"], bpred=["gshare", "none"])
        programs = discover_programs(str(suite))
        first = run_bench(programs, matrix, jobs=1).csv_text()
        second = run_bench(programs, matrix, jobs=4).csv_text()
        assert first == second
        rows = list(csv.reader(io.StringIO(first)))
        assert rows[0] == CSV_HEADER
        assert len(rows) == 1 + 3 * 4
        assert all(row[7] == "N/A" for row in rows[1:] if row[0].endswith("/none"))

    def test_aggregates_recompute_from_rows(self, suite):
        """Test that the mean IPC equals the arithmetic mean of the CSV rows"""
        matrix = BenchMatrix(fetch=["dualpc"], bpred=["gshare"])
        report = run_bench(discover_programs(str(suite)), matrix)
        rows = list(csv.DictReader(io.StringIO(report.csv_text())))
        ipcs = [float(r["ipc"]) for r in rows]
        assert report.mean_ipc("dualpc/gshare") == pytest.approx(sum(ipcs) / len(ipcs))

    def test_failed_cell_does_not_stop_others(self, suite):
        """Test per-cell failure reporting"""
        (suite / "broken.hex").write_text("not-a-word\n")
        matrix = BenchMatrix(fetch=["dualpc"], bpred=["gshare"])
        report = run_bench(discover_programs(str(suite)), matrix)
        assert len(report.rows) == 4
        failed = [row.program for row in report.failures]
        assert failed == ["broken"]
        assert not report.ok

    def test_instruction_mismatch_detection(self):
        """Test the commit-count equality check"""
        report = BenchReport(programs=["p"], configs=["dualpc/gshare", "buffer/gshare"])
        report.rows = [
            BenchRow("p", "dualpc/gshare", "dualpc", "gshare", "exit", Stats(cycles=10, instructions=8)),
            BenchRow("p", "buffer/gshare", "buffer", "gshare", "exit", Stats(cycles=12, instructions=9)),
        ]
        assert report.instruction_mismatches() == {"p": {"dualpc/gshare": 8, "buffer/gshare": 9}}

    @pytest.mark.parametrize("dual,buf,holds,in_range", [
        (0.857, 0.846, True, True),
        (0.846, 0.857, False, True),
        (1.0, 0.9, True, False),
    ])
    def test_directional_check(self, dual, buf, holds, in_range):
        """Test the dual-PC versus buffer comparison and the IPC window"""
        check = DirectionalCheck("gshare", dual, buf)
        assert check.holds is holds
        assert check.in_range is in_range

    def test_monitor_records_every_cell(self, suite):
        """Test that the bench monitor sees each cell"""
        monitor = BenchMonitor()
        matrix = BenchMatrix(fetch=["dualpc", "buffer"], bpred=["gshare"])
        run_bench(discover_programs(str(suite)), matrix, jobs=2, monitor=monitor)
        assert monitor.summary()["cells"] == 6


class TestReport:
    def test_default_template(self, suite):
        """Test the rendered report content"""
        matrix = BenchMatrix(fetch=["dualpc", "buffer"], bpred=["gshare"])
        report = run_bench(discover_programs(str(suite)), matrix)
        text = render_report(report)
        assert "| program" in text
        assert "Mean IPC dualpc > buffer (gshare)" in text
        for ref in REFERENCE_VALUES:
            assert f"{ref['ipc']:.3f}" in text
        assert "N/A" in text

    def test_custom_template(self, tmp_path):
        """Test rendering from a user template"""
        template = tmp_path / "t.j2"
        template.write_text("{{ programs|length }} programs")
        report = BenchReport(programs=["a", "b"], configs=["dualpc/gshare"])
        assert render_report(report, str(template)).strip() == "2 programs"

    def test_missing_template(self, tmp_path):
        """Test the wrapped template error"""
        report = BenchReport(programs=[], configs=[])
        with pytest.raises(ConfigError):
            render_report(report, str(tmp_path / "absent.j2"))


class TestCli:
    def test_run_reference_engine(self, hello_bin, capsysbinary):
        """Test run --engine ref printing the console"""
        assert cli.main(["run", str(hello_bin), "--engine", "ref"]) == 0
        captured = capsysbinary.readouterr()
        assert b"A" in captured.out
        assert b"status=exit" in captured.err

    def test_run_writes_stats_and_log(self, hello_bin, tmp_path):
        """Test run artifacts"""
        stats = tmp_path / "stats.csv"
        log = tmp_path / "run.log"
        code = cli.main(["run", str(hello_bin), "--fetch", "dualpc", "--bpred", "gshare",
                         "--stats", str(stats), "--log", str(log)])
        assert code == 0
        rows = list(csv.DictReader(stats.open()))
        assert rows[0]["config"] == "dualpc/gshare"
        assert rows[0]["fetch_misses"] == "0"
        assert len(log.read_text().splitlines()) == int(rows[0]["instructions"])

    def test_flags_reach_the_core(self, hello_bin, mocker):
        """Test that machine flags end up in the core configuration"""
        spy = mocker.spy(cli, "execute")
        assert cli.main(["run", str(hello_bin), "--fetch", "naive", "--bpred", "bimodal",
                         "--imem-kb", "16", "--max-cycles", "5000"]) == 0
        engine, config = spy.call_args.args[1], spy.call_args.args[2]
        assert engine == "pipeline"
        assert (config.fetch, config.bpred) == ("naive", "bimodal")
        assert config.imem_bytes == 16 * 1024 and config.max_cycles == 5000

    def test_run_missing_file(self, tmp_path, capsys):
        """Test the usage exit code for a missing program"""
        assert cli.main(["run", str(tmp_path / "missing.bin")]) == 3
        assert "file not found" in capsys.readouterr().err

    def test_run_fault_exit_code(self, tmp_path):
        """Test exit code 1 for an illegal instruction"""
        path = tmp_path / "illegal.bin"
        path.write_bytes(bytes(4))
        assert cli.main(["run", str(path)]) == 1

    def test_bad_flag_is_usage_error(self, hello_bin):
        """Test argparse errors exit with 3"""
        with pytest.raises(SystemExit) as exc:
            cli.main(["run", str(hello_bin), "--imem-kb", "lots"])
        assert exc.value.code == 3

    def test_invalid_fetch_unit(self, hello_bin):
        """Test validation failures exit with 3"""
        assert cli.main(["run", str(hello_bin), "--fetch", "prefetch"]) == 3

    def test_diff_exit_codes(self, tmp_path, capsys):
        """Test diff results 0 and 2"""
        b = ProgramBuilder()
        b.exit()
        image = image_of(b)
        a_log, b_log = tmp_path / "a.log", tmp_path / "b.log"
        a_log.write_text(format_log(execute(image, "pipeline").commits))
        b_log.write_text(format_log(execute(image, "ref").commits))
        assert cli.main(["diff", str(a_log), str(b_log)]) == 0
        b_log.write_text(format_log(execute(MemoryImage(_hello()), "ref").commits))
        assert cli.main(["diff", str(a_log), str(b_log)]) == 2
        assert "line 1" in capsys.readouterr().out

    def test_diff_malformed_log(self, tmp_path):
        """Test that a malformed log is a usage error"""
        bad = tmp_path / "bad.log"
        bad.write_text("nonsense\n")
        assert cli.main(["diff", str(bad), str(bad)]) == 3

    def test_gen_and_bench(self, tmp_path, capsys):
        """Test gen output files and a bench over them"""
        suite = tmp_path / "suite"
        assert cli.main(["gen", "fetchmiss", "--size", "10", "--out", str(suite / "fm.bin")]) == 0
        assert cli.main(["gen", "rand", "--seed", "3", "--size", "8", "--format", "hex",
                         "--out", str(suite / "r3")]) == 0
        manifest = yaml.safe_load((suite / "fm.yaml").read_text())
        assert manifest["expected"]["fetch_misses"]["buffer"] == 10
        assert (suite / "r3.hex").exists()

        csv_path = tmp_path / "bench.csv"
        metrics = tmp_path / "bench.prom"
        code = cli.main(["bench", str(suite), "--fetch", "dualpc,buffer", "--bpred", "gshare",
                         "--stats", str(csv_path), "--metrics-out", str(metrics), "--jobs", "2"])
        assert code == 0
        assert len(csv_path.read_text().splitlines()) == 1 + 2 * 2
        assert "rvsim_bench_cells_total" in metrics.read_text()

    def test_bench_empty_suite(self, tmp_path):
        """Test the usage exit code for an empty suite"""
        assert cli.main(["bench", str(tmp_path)]) == 3

    def test_gen_too_small(self, tmp_path):
        """Test the generator size check"""
        assert cli.main(["gen", "loaduse", "--size", "0", "--out", str(tmp_path / "x.bin")]) == 3
