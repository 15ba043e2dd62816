"""
Tests for the gshare/bimodal branch predictor
"""
import pytest

from src.bpred.predictor import BTB_ENTRIES, BranchPredictor, Scheme, btb_index, pht_index
from src.errors import ConfigError


class TestIndexing:
    @pytest.mark.parametrize("pc,ghr,scheme,expected", [
        (0x100, 0, Scheme.GSHARE, 0x80),
        (0x100, 0x80, Scheme.GSHARE, 0x0),
        (0x3FFE, 0x55, Scheme.BIMODAL, 0x1FFF),
    ])
    def test_pht_index(self, pc, ghr, scheme, expected):
        """Test the gshare XOR and the bimodal mask"""
        assert pht_index(pc, ghr, scheme) == expected

    def test_btb_index(self):
        """Test the BTB wraps at its size"""
        assert btb_index(0x100) == 0x80
        assert btb_index(0x100 + 2 * BTB_ENTRIES) == 0x80


class TestPredict:
    def test_initial_state_predicts_not_taken(self):
        """Test that fresh counters sit below the taken threshold"""
        bp = BranchPredictor("gshare")
        for pc in (0, 0x40, 0x1234):
            assert not bp.predict(pc, pc + 4).taken

    def test_training_a_loop_branch(self):
        """Test that repeated taken updates through the predecessor address predict taken"""
        bp = BranchPredictor("bimodal")
        for _ in range(4):
            bp.update(0x10, 0x0C, True, 0x00, prohibit=False, ghr_snapshot=bp.ghr)
        pred = bp.predict(0x0C, 0x10)
        assert pred.taken and pred.target == 0x00 and pred.target_2 == 0x02
        assert pred.for_pc == 0x10

    def test_none_never_predicts_taken(self):
        """Test the disabled scheme"""
        bp = BranchPredictor("none")
        for _ in range(4):
            bp.update(0x10, 0x0C, True, 0x40, prohibit=False, ghr_snapshot=0)
        assert not bp.predict(0x0C, 0x10).taken
        assert not bp.enabled


class TestUpdate:
    def test_prohibited_update_changes_nothing(self):
        """Test that PHT and BTB are untouched when the predecessor is unknown"""
        bp = BranchPredictor("bimodal")
        pht, btb = bp.pht.copy(), bp.btb.copy()
        bp.update(0x10, 0x0C, True, 0x80, prohibit=True, ghr_snapshot=0)
        assert (bp.pht == pht).all() and (bp.btb == btb).all()
        assert bp.stats.prohibited_updates == 1

    def test_history_shifts_even_when_prohibited(self):
        """Test GHR maintenance for conditional branches"""
        bp = BranchPredictor("gshare")
        bp.update(0x10, 0x0C, True, 0x80, prohibit=True, ghr_snapshot=0)
        bp.update(0x10, 0x0C, False, 0x80, prohibit=True, ghr_snapshot=0)
        assert bp.ghr == 0b10

    def test_jumps_do_not_shift_history(self):
        """Test that unconditional jumps leave the GHR alone"""
        bp = BranchPredictor("gshare")
        bp.update(0x10, 0x0C, True, 0x80, prohibit=False, ghr_snapshot=0, conditional=False)
        assert bp.ghr == 0

    def test_counters_saturate(self):
        """Test the two-bit counter bounds"""
        bp = BranchPredictor("bimodal")
        idx = bp.index(0x0C, 0)
        for _ in range(10):
            bp.update(0x10, 0x0C, True, 0x80, prohibit=False, ghr_snapshot=0)
        assert bp.pht[idx] == 3
        for _ in range(10):
            bp.update(0x10, 0x0C, False, 0x80, prohibit=False, ghr_snapshot=0)
        assert bp.pht[idx] == 0
        assert int(bp.pht.max()) <= 3

    def test_history_width_tracks_pht_size(self):
        """Test that the GHR keeps log2(PHT) bits"""
        bp = BranchPredictor("gshare", pht_entries=16)
        for _ in range(8):
            bp.shift_history(True)
        assert bp.ghr == 0xF

    def test_alias_correction_trains_toward_not_taken(self):
        """Test the non-branch alias rule"""
        bp = BranchPredictor("bimodal")
        for _ in range(2):
            bp.update(0x10, 0x0C, True, 0x80, prohibit=False, ghr_snapshot=0)
        bp.correct_alias(0x10, 0x0C, prohibit=False, ghr_snapshot=0)
        assert bp.pht[bp.index(0x0C, 0)] == 2
        assert bp.stats.alias_corrections == 1

    def test_invalid_configuration(self):
        """Test scheme and size validation"""
        with pytest.raises(ConfigError):
            BranchPredictor("tage")
        with pytest.raises(ConfigError):
            BranchPredictor("gshare", pht_entries=1000)
