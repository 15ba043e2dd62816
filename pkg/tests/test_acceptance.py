"""
Full-size acceptance runs: a thousand random programs against the reference on
every configuration, and the stress generators at their default sizes.

Deselect with: pytest -m "not slow"
"""
import pytest

from src.harness.gen import DEFAULT_SIZES, gen_bimodal_killer, gen_fetchmiss, gen_rand
from src.memsys.image import MemoryImage
from src.pipeline.core import CoreConfig, run_core
from src.refmodel import interpreter
from src.refmodel.commit_log import format_log
from src.refmodel.status import RunStatus

from tests.conftest import FETCH_KINDS, SCHEMES

SEEDS = 1000
BATCH = 100
RAND_SIZE = 20
MAX_COMMITS = 10_000

pytestmark = pytest.mark.slow


def _run(image, fetch, bpred):
    return run_core(image, CoreConfig(fetch=fetch, bpred=bpred))


class TestDifferential:
    @pytest.mark.parametrize("first", range(1, SEEDS + 1, BATCH))
    def test_random_programs_match_reference(self, first):
        """Test byte-identical commit logs for every seed in the batch on all nine configurations"""
        for seed in range(first, first + BATCH):
            program = gen_rand(size=RAND_SIZE, seed=seed)
            image = MemoryImage(program.payload, source=f"rand{seed}")
            ref = interpreter.run(image, max_steps=program.step_bound + 1)
            assert ref.status.status == RunStatus.EXIT, seed
            assert ref.instructions <= MAX_COMMITS, seed
            expected = format_log(ref.commits)
            for fetch in FETCH_KINDS:
                for bpred in SCHEMES:
                    result = _run(image, fetch, bpred)
                    assert result.status.status == RunStatus.EXIT, (seed, fetch, bpred)
                    assert format_log(result.commits) == expected, (seed, fetch, bpred)
                    if fetch == "dualpc":
                        assert result.stats.fetch_misses == 0, (seed, bpred)


class TestFetchMissAtScale:
    @pytest.fixture(scope="class")
    def image(self):
        program = gen_fetchmiss(size=DEFAULT_SIZES["fetchmiss"])
        return MemoryImage(program.payload, source="fetchmiss")

    def test_buffer_misses_once_per_iteration(self, image):
        """Test exactly 1000 misses for the buffered unit and none for dual-PC"""
        buffered = _run(image, "buffer", "gshare")
        dual = _run(image, "dualpc", "gshare")
        assert buffered.stats.fetch_misses == 1000
        assert dual.stats.fetch_misses == 0
        assert buffered.stats.cycles - dual.stats.cycles >= 1000
        assert format_log(buffered.commits) == format_log(dual.commits)

    def test_miss_cost_without_prediction(self, image):
        """Test one extra cycle per miss when every taken branch redirects"""
        buffered = _run(image, "buffer", "none")
        dual = _run(image, "dualpc", "none")
        assert buffered.stats.cycles == dual.stats.cycles + 1000


class TestPredictorOrderingAtScale:
    def test_gshare_beats_bimodal_over_ten_thousand_branches(self):
        """Test the 20 point hit-rate margin on the full-size bimodal-killer"""
        program = gen_bimodal_killer(size=DEFAULT_SIZES["bimodal-killer"])
        image = MemoryImage(program.payload, source="bimodal-killer")
        gshare = _run(image, "dualpc", "gshare").stats
        bimodal = _run(image, "dualpc", "bimodal").stats
        assert gshare.branches >= 10_000
        assert gshare.branches == program.expected["branches"]
        assert gshare.hit_rate - bimodal.hit_rate >= 0.20
