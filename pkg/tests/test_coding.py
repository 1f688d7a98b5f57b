from itertools import combinations

import numpy as np
import pytest

from codedcache.coding import (
    CodedSegment,
    CodeSpec,
    decode,
    encode,
    gf_inv,
    gf_mul,
    gf_pow,
)


class TestFieldArithmetic:
    def test_zero_absorbs(self):
        assert gf_mul(0, 0x5C) == 0
        assert gf_mul(0x5C, 0) == 0

    def test_one_is_identity(self):
        assert all(gf_mul(1, x) == x for x in range(256))

    def test_inverse_of_two(self):
        # long multiplication: 2 * 0x8E = 0x11C, reduced by 0x11D leaves 1
        assert gf_mul(0x02, 0x8E) == 0x01
        assert gf_inv(2) == 0x8E

    def test_inverses_round_trip(self):
        for x in range(1, 256):
            assert gf_mul(x, gf_inv(x)) == 1

    def test_distributivity_spot(self):
        rng = np.random.default_rng(0)
        for _ in range(500):
            a, b, c = (int(v) for v in rng.integers(0, 256, size=3))
            assert gf_mul(a, b ^ c) == gf_mul(a, b) ^ gf_mul(a, c)

    def test_associativity_spot(self):
        rng = np.random.default_rng(1)
        for _ in range(500):
            a, b, c = (int(v) for v in rng.integers(0, 256, size=3))
            assert gf_mul(gf_mul(a, b), c) == gf_mul(a, gf_mul(b, c))

    def test_pow_matches_repeated_multiplication(self):
        for base in (2, 3, 0x53):
            acc = 1
            for exponent in range(10):
                assert gf_pow(base, exponent) == acc
                acc = gf_mul(acc, base)

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            gf_mul(256, 1)
        with pytest.raises(ValueError):
            gf_inv(0)


class TestCodeSpec:
    def test_bounds(self):
        CodeSpec(1, 255)
        with pytest.raises(ValueError):
            CodeSpec(0, 4)
        with pytest.raises(ValueError):
            CodeSpec(5, 4)
        with pytest.raises(ValueError):
            CodeSpec(1, 256)

    def test_generator_is_systematic_with_distinct_rows(self):
        for threshold, total in ((1, 3), (3, 7), (5, 12)):
            g = CodeSpec(threshold, total).generator
            assert np.array_equal(g[:, :threshold], np.eye(threshold, dtype=np.uint8))
            rows = {g[i].tobytes() for i in range(threshold)}
            assert len(rows) == threshold

    def test_generator_columns_distinct_beyond_repetition(self):
        # distinct stored segments are what stops a handover from delivering
        # the same parity twice; only the single-source code repeats itself
        for threshold, total in ((2, 6), (3, 9), (4, 10)):
            g = CodeSpec(threshold, total).generator
            columns = {g[:, j].tobytes() for j in range(total)}
            assert len(columns) == total


class TestEncode:
    def test_single_source_repeats(self):
        shares = encode(CodeSpec(1, 3), [b"segmentA"])
        assert [s.payload for s in shares] == [b"segmentA"] * 3
        assert [s.sbs_index for s in shares] == [1, 2, 3]

    def test_share_count_and_width(self):
        segments = [bytes([i] * 8) for i in range(3)]
        shares = encode(CodeSpec(3, 14), segments)
        assert len(shares) == 14
        assert all(len(s.payload) == 8 for s in shares)

    def test_systematic_prefix(self):
        rng = np.random.default_rng(2)
        segments = [rng.bytes(32) for _ in range(4)]
        shares = encode(CodeSpec(4, 9), segments)
        assert [s.payload for s in shares[:4]] == segments

    def test_rejects_bad_inputs(self):
        with pytest.raises(ValueError):
            encode(CodeSpec(2, 4), [b"ab"])
        with pytest.raises(ValueError):
            encode(CodeSpec(2, 4), [b"ab", b"abcd"])
        with pytest.raises(ValueError):
            encode(CodeSpec(2, 4), [b"", b""])


class TestDecode:
    def test_systematic_pass_through(self):
        rng = np.random.default_rng(3)
        segments = [rng.bytes(16) for _ in range(3)]
        shares = encode(CodeSpec(3, 8), segments)
        assert decode(CodeSpec(3, 8), shares[:3]) == segments

    def test_every_subset_reconstructs(self):
        rng = np.random.default_rng(4)
        spec = CodeSpec(3, 6)
        segments = [rng.bytes(16) for _ in range(3)]
        shares = encode(spec, segments)
        subsets = list(combinations(shares, 3))
        assert len(subsets) == 20
        for subset in subsets:
            assert decode(spec, list(subset)) == segments

    def test_share_order_is_irrelevant(self):
        rng = np.random.default_rng(5)
        spec = CodeSpec(4, 9)
        segments = [rng.bytes(8) for _ in range(4)]
        shares = encode(spec, segments)
        subset = [shares[7], shares[2], shares[8], shares[0]]
        assert decode(spec, subset) == segments

    def test_under_collection_is_an_error(self):
        spec = CodeSpec(3, 6)
        shares = encode(spec, [b"aa", b"bb", b"cc"])
        with pytest.raises(ValueError, match="need 3 shares"):
            decode(spec, shares[:2])

    def test_over_collection_and_duplicates_rejected(self):
        spec = CodeSpec(2, 5)
        shares = encode(spec, [b"aa", b"bb"])
        with pytest.raises(ValueError, match="exactly 2"):
            decode(spec, shares[:3])
        with pytest.raises(ValueError, match="distinct"):
            decode(spec, [shares[1], shares[1]])

    def test_coded_segment_validation(self):
        with pytest.raises(ValueError):
            CodedSegment(0, b"x")
