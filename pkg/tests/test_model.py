import numpy as np
import pytest

from codedcache.model import (
    CachePlan,
    FragmentationPlan,
    SystemConfig,
    VideoLibrary,
    make_fragmentation,
    plan_cache_bits,
    segment_budget_from_ratio,
    zipf_popularity,
)


class TestZipfPopularity:
    def test_uniform_when_flat(self):
        assert np.allclose(zipf_popularity(4, 0.0), [0.25, 0.25, 0.25, 0.25])

    def test_two_files_unit_skew(self):
        p = zipf_popularity(2, 1.0)
        assert p[0] == pytest.approx(2 / 3, abs=1e-15)
        assert p[1] == pytest.approx(1 / 3, abs=1e-15)

    def test_large_library_against_high_precision_sum(self):
        # frozen from an mpmath 40-digit evaluation of sum(j**-0.75, j=1..10000)
        p = zipf_popularity(10000, 0.75)
        assert p[0] == pytest.approx(0.02735288519611331, abs=1e-15)
        assert p.sum() == pytest.approx(1.0, abs=1e-12)

    @pytest.mark.parametrize("skew", [0.0, 0.5, 0.75, 1.2])
    def test_monotone_and_normalized(self, skew):
        p = zipf_popularity(50, skew)
        assert np.all(np.diff(p) <= 0)
        if skew > 0:
            assert np.all(np.diff(p) < 0)
        assert abs(p.sum() - 1.0) <= 1e-12

    def test_empty_library_rejected(self):
        with pytest.raises(ValueError, match="empty library"):
            zipf_popularity(0, 1.0)


class TestMakeFragmentation:
    def test_even_split(self):
        assert make_fragmentation(9, 3) == (3, 3, 3)

    def test_single_fragment(self):
        assert make_fragmentation(10, 1) == (10,)

    def test_oversized_last(self):
        assert make_fragmentation(10, 3) == (3, 3, 4)

    def test_rejects_out_of_range(self):
        for fragments in (0, 11):
            with pytest.raises(ValueError):
                make_fragmentation(10, fragments)

    def test_partition_properties_exhaustive(self):
        for slots in range(1, 13):
            for fragments in range(1, slots + 1):
                sizes = make_fragmentation(slots, fragments)
                assert sum(sizes) == slots
                assert len(sizes) == fragments
                assert max(sizes) == -(-slots // fragments)
                assert min(sizes) == slots // fragments


class TestPlans:
    def test_cache_bits_empty(self):
        assert plan_cache_bits(CachePlan((0, 0)), 8) == 0

    def test_cache_bits_full_file(self):
        # a fully cached file costs one segment per slot at every station
        assert plan_cache_bits(CachePlan((10,)), 64) == 640

    def test_cache_bits_single_fragment(self):
        assert plan_cache_bits(CachePlan((1,)), 64) == 64

    def test_cache_bits_budget_consistency(self):
        plan = CachePlan((3, 2, 0, 5))
        for budget in (9, 10, 11):
            assert (plan_cache_bits(plan, 8) <= budget * 8) == (
                plan.total_segments <= budget
            )

    def test_plan_validation(self):
        with pytest.raises(ValueError):
            CachePlan((1, -1))
        assert CachePlan((1, 0, 2)).cached_indices == (0, 2)

    def test_fragmentation_plan_near_equal(self):
        FragmentationPlan(0, (3, 3, 4))
        with pytest.raises(ValueError):
            FragmentationPlan(0, (2, 4))
        with pytest.raises(ValueError):
            FragmentationPlan(0, ())


class TestVideoLibrary:
    def test_from_zipf(self):
        lib = VideoLibrary.from_zipf(5, 0.8)
        assert len(lib) == 5
        assert not lib.popularity.flags.writeable

    def test_rejects_increasing(self):
        with pytest.raises(ValueError, match="non-increasing"):
            VideoLibrary(np.array([0.3, 0.7]))

    def test_rejects_bad_sum(self):
        with pytest.raises(ValueError, match="sum to 1"):
            VideoLibrary(np.array([0.6, 0.3]))

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError, match="positive"):
            VideoLibrary(np.array([1.0, 0.0]))


class TestSystemConfig:
    def test_derives_file_bits_and_rate(self):
        cfg = SystemConfig(
            sbs_count=20, library_size=100, slots_per_file=10, slot_bits=64,
            max_file_delay=10,
        )
        assert cfg.file_bits == 640
        assert cfg.display_rate == 64

    def test_rejects_inconsistent_file_bits(self):
        with pytest.raises(ValueError, match="file_bits"):
            SystemConfig(
                sbs_count=20, library_size=100, slots_per_file=10, slot_bits=64,
                max_file_delay=10, file_bits=100,
            )

    def test_rejects_rate_mismatch(self):
        with pytest.raises(ValueError, match="display_rate"):
            SystemConfig(
                sbs_count=20, library_size=100, slots_per_file=10, slot_bits=64,
                max_file_delay=10, display_rate=32,
            )

    def test_delay_bounds(self):
        with pytest.raises(ValueError, match="max_file_delay"):
            SystemConfig(
                sbs_count=20, library_size=100, slots_per_file=10, slot_bits=64,
                max_file_delay=11,
            )
        with pytest.raises(ValueError, match="max_avg_delay"):
            SystemConfig(
                sbs_count=20, library_size=100, slots_per_file=10, slot_bits=64,
                max_file_delay=5, max_avg_delay=6.0,
            )

    def test_segment_budget_truncates(self):
        cfg = SystemConfig(
            sbs_count=20, library_size=100, slots_per_file=10, slot_bits=64,
            max_file_delay=10, cache_bits=1000,
        )
        assert cfg.segment_budget == 15


class TestBudgetFromRatio:
    def test_matches_floor(self):
        assert segment_budget_from_ratio(0.1, 10000, 10) == 10000
        assert segment_budget_from_ratio(0.7, 10000, 10) == 70000

    def test_float_artifacts_do_not_lose_segments(self):
        # 0.29 * 100 is 28.999999999999996 in binary
        assert segment_budget_from_ratio(0.29, 10, 10) == 29

    def test_rejects_out_of_range(self):
        for c_hat in (0.0, 1.5, -0.1):
            with pytest.raises(ValueError):
                segment_budget_from_ratio(c_hat, 10, 10)
