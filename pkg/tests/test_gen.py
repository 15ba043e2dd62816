"""
Tests for the stress microbenchmark generators
"""
import pytest
import yaml

from src.errors import ConfigError
from src.harness.gen import (
    DEFAULT_SIZES,
    GENERATORS,
    gen_bimodal_killer,
    gen_fetchmiss,
    gen_loaduse,
    gen_rand,
    generate,
    write_program,
)
from src.harness.runner import execute
from src.memsys.image import MemoryImage, load_image
from src.pipeline.core import CoreConfig
from src.refmodel.status import RunStatus

from tests.conftest import FETCH_KINDS, SCHEMES


def _image(program):
    return MemoryImage(program.payload, source=program.kind)


def _pipeline(program, fetch="dualpc", bpred="gshare"):
    return execute(_image(program), "pipeline", CoreConfig(fetch=fetch, bpred=bpred))


class TestFetchMiss:
    @pytest.mark.parametrize("size", [10, 50, 3000])
    def test_loop_lands_on_straddling_instruction(self, size):
        """Test the loop head sits at pc = 2 (mod 4)"""
        program = gen_fetchmiss(size=size)
        assert program.expected["loop_address"] % 4 == 2

    def test_instruction_count_matches_reference(self):
        """Test the manifest count against the reference interpreter"""
        program = gen_fetchmiss(size=50)
        outcome = execute(_image(program), "ref")
        assert outcome.status.status == RunStatus.EXIT
        assert outcome.stats.instructions == program.expected["instructions"]

    @pytest.mark.parametrize("fetch", FETCH_KINDS)
    def test_fetch_misses_per_unit(self, fetch):
        """Test the expected miss count of every fetch unit"""
        program = gen_fetchmiss(size=50)
        outcome = _pipeline(program, fetch=fetch)
        assert outcome.stats.fetch_misses == program.expected["fetch_misses"][fetch]
        assert outcome.stats.instructions == program.expected["instructions"]


class TestBimodalKiller:
    def test_counts(self):
        """Test instruction and branch counts"""
        program = gen_bimodal_killer(size=300)
        outcome = _pipeline(program)
        assert outcome.stats.instructions == program.expected["instructions"]
        assert outcome.stats.branches == program.expected["branches"]

    def test_history_beats_per_address_counters(self):
        """Test the hit-rate margin of gshare over bimodal"""
        program = gen_bimodal_killer(size=300)
        gshare = _pipeline(program, bpred="gshare").stats.hit_rate
        bimodal = _pipeline(program, bpred="bimodal").stats.hit_rate
        assert gshare - bimodal >= program.expected["hit_rate_margin"]["gshare_over_bimodal"]


class TestLoadUse:
    def test_stalls_and_results(self):
        """Test two load-use stalls per iteration and the final register values"""
        program = gen_loaduse(size=40)
        outcome = _pipeline(program, bpred="none")
        assert outcome.stats.load_use_stalls == program.expected["load_use_stalls"]["none"]
        assert outcome.stats.instructions == program.expected["instructions"]
        regs = outcome.commits[-1].regs
        assert regs[11] == program.expected["final"]["x11"]
        assert regs[12] == program.expected["final"]["x12"]

    @pytest.mark.parametrize("bpred", SCHEMES)
    def test_stalls_independent_of_predictor(self, bpred):
        """Test that only committed consumers count, so the loop exit changes nothing"""
        program = gen_loaduse(size=40)
        outcome = _pipeline(program, bpred=bpred)
        assert outcome.stats.load_use_stalls == program.expected["load_use_stalls"][bpred] == 80


class TestRandom:
    def test_same_seed_same_program(self):
        """Test determinism"""
        assert gen_rand(size=32, seed=7).payload == gen_rand(size=32, seed=7).payload

    def test_seeds_differ(self):
        """Test that different seeds give different programs"""
        assert gen_rand(size=32, seed=1).payload != gen_rand(size=32, seed=2).payload

    @pytest.mark.parametrize("seed", [11, 12, 13])
    def test_terminates_within_bound(self, seed):
        """Test that random programs exit cleanly inside their step bound"""
        program = gen_rand(size=48, seed=seed)
        outcome = execute(_image(program), "ref")
        assert outcome.status.status == RunStatus.EXIT
        assert outcome.status.code == 0
        assert outcome.stats.instructions <= program.step_bound

    def test_contains_compressed_instructions(self):
        """Test that the mix includes 16-bit encodings"""
        outcome = execute(_image(gen_rand(size=48, seed=4)), "ref")
        assert any(record.raw & 0x3 != 0x3 for record in outcome.commits)

    def test_too_many_blocks(self):
        """Test the code-size guard"""
        with pytest.raises(ConfigError):
            gen_rand(size=5000, seed=1)


class TestGenerate:
    def test_registry(self):
        """Test that every generator has a default size"""
        assert set(GENERATORS) == set(DEFAULT_SIZES)

    def test_unknown_kind(self):
        """Test unknown generator names"""
        with pytest.raises(ConfigError) as exc:
            generate("cachemiss")
        assert exc.value.error_code == "E_GEN_KIND"

    @pytest.mark.parametrize("kind", sorted(GENERATORS))
    def test_size_zero(self, kind):
        """Test that a size too small for the exit stub is rejected"""
        with pytest.raises(ConfigError) as exc:
            generate(kind, size=0)
        assert exc.value.error_code == "E_GEN_SIZE"

    @pytest.mark.parametrize("fmt", ["bin", "hex"])
    def test_write_program(self, tmp_path, fmt):
        """Test the written image and its manifest"""
        program = generate("loaduse", size=5)
        image_path, manifest_path = write_program(program, str(tmp_path / "out" / "loaduse"), fmt)
        assert image_path.suffix == "." + fmt
        assert load_image(str(image_path)).payload == program.payload
        manifest = yaml.safe_load(manifest_path.read_text())
        assert manifest["kind"] == "loaduse"
        assert manifest["image"] == image_path.name
        assert manifest["format"] == fmt
        assert manifest["expected"]["final"]["x12"] == 5
