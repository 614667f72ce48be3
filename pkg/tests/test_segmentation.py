import numpy as np
import pytest

from ntdseg.ingest import BarGrid, load_annotation
from ntdseg.segmentation import (
    Segmentation,
    SegmentationConfig,
    autosimilarity_from_features,
    boundaries_to_times,
    make_kernel,
    max_eight_bar_score,
    modified_score,
    penalty,
    raw_score,
    save_segmentation,
    segment,
)


def enumerate_best_total(a, cfg):
    """Exhaustive search over every contiguous partition of the bars."""
    size = a.shape[0]
    c_max8 = max_eight_bar_score(a, cfg.kernel_band)
    best = -np.inf
    for mask in range(2 ** (size - 1)):
        boundaries = [0] + [i + 1 for i in range(size - 1) if mask >> i & 1] + [size]
        lengths = np.diff(boundaries)
        if lengths.max() > cfg.max_segment_bars:
            continue
        total = 0.0
        for s, e in zip(boundaries[:-1], boundaries[1:]):
            total = total + modified_score(a, s, e - 1, cfg, c_max8)
        best = max(best, total)
    return best


def dp_total(a, cfg, seg):
    c_max8 = max_eight_bar_score(a, cfg.kernel_band)
    total = 0.0
    for s, e in zip(seg.bar_boundaries[:-1], seg.bar_boundaries[1:]):
        total = total + modified_score(a, s, e - 1, cfg, c_max8)
    return total


class TestAutosimilarity:
    def test_one_hot_rows_give_identity(self):
        a = autosimilarity_from_features(np.eye(4))
        np.testing.assert_array_equal(a, np.eye(4))

    def test_identical_rows_full_similarity(self):
        feats = np.array([[1.0, 2.0, 3.0], [1.0, 2.0, 3.0]])
        a = autosimilarity_from_features(feats)
        assert a[0, 1] == pytest.approx(1.0)

    def test_matches_pairwise_cosine_oracle(self):
        rng = np.random.default_rng(0)
        feats = rng.random((5, 3))
        a = autosimilarity_from_features(feats)
        for i in range(5):
            for j in range(5):
                expected = feats[i] @ feats[j] / (
                    np.linalg.norm(feats[i]) * np.linalg.norm(feats[j])
                )
                assert a[i, j] == pytest.approx(expected, rel=1e-12)

    def test_symmetry_range_and_diagonal(self):
        rng = np.random.default_rng(1)
        feats = rng.random((8, 4))
        a = autosimilarity_from_features(feats)
        np.testing.assert_allclose(a, a.T, atol=1e-12)
        assert a.min() >= -1e-12 and a.max() <= 1.0 + 1e-12
        np.testing.assert_allclose(np.diag(a), 1.0, rtol=1e-12)

    def test_row_scale_invariance(self):
        rng = np.random.default_rng(2)
        feats = rng.random((6, 4))
        scaled = feats.copy()
        scaled[2] *= 37.5
        np.testing.assert_allclose(
            autosimilarity_from_features(scaled),
            autosimilarity_from_features(feats),
            atol=1e-12,
        )

    def test_zero_rows_stay_zero(self):
        feats = np.array([[0.0, 0.0], [1.0, 0.0]])
        a = autosimilarity_from_features(feats)
        assert a[0, 0] == 0.0 and a[0, 1] == 0.0


class TestKernel:
    def test_size_ten_band_four(self):
        k = make_kernel(10, 4)
        assert k.sum() == 60  # 2 * (9 + 8 + 7 + 6)
        for i in range(10):
            for j in range(10):
                assert k[i, j] == (1.0 if 1 <= abs(i - j) <= 4 else 0.0)

    def test_size_two(self):
        np.testing.assert_array_equal(make_kernel(2, 4), [[0.0, 1.0], [1.0, 0.0]])

    def test_zero_diagonal(self):
        for n in (2, 5, 9):
            for band in (1, 3, 4):
                assert np.all(np.diag(make_kernel(n, band)) == 0.0)


class TestRawScore:
    def test_all_ones_ten_bars(self):
        a = np.ones((10, 10))
        assert raw_score(a, 0, 9, 4) == pytest.approx(6.0)  # 60 ones / 10

    def test_identity_scores_zero(self):
        a = np.eye(12)
        assert raw_score(a, 2, 8, 4) == 0.0

    def test_singleton_segment(self):
        a = np.ones((5, 5))
        assert raw_score(a, 3, 3, 4) == 0.0

    def test_translation_invariance(self):
        rng = np.random.default_rng(3)
        block = rng.random((6, 6))
        block = 0.5 * (block + block.T)
        a = np.zeros((12, 12))
        a[0:6, 0:6] = block
        b = np.zeros((12, 12))
        b[4:10, 4:10] = block
        assert raw_score(a, 0, 5, 4) == raw_score(b, 4, 9, 4)

    def test_out_of_range(self):
        with pytest.raises(IndexError):
            raw_score(np.ones((4, 4)), 1, 4, 4)


class TestPenalty:
    def test_paper_values(self):
        assert penalty(8) == 0.0
        assert penalty(12) == 0.25
        assert penalty(10) == 0.5
        assert penalty(7) == 1.0
        assert penalty(4) == 0.25

    def test_table_up_to_64(self):
        for n in range(1, 65):
            if n == 8:
                expected = 0.0
            elif n % 4 == 0:
                expected = 0.25
            elif n % 2 == 0:
                expected = 0.5
            else:
                expected = 1.0
            assert penalty(n) == expected


class TestModifiedScore:
    def test_eight_bars_no_penalty(self):
        rng = np.random.default_rng(4)
        a = rng.random((12, 12))
        a = 0.5 * (a + a.T)
        cfg = SegmentationConfig(penalty_weight=2.0)
        c_max8 = max_eight_bar_score(a)
        assert modified_score(a, 2, 9, cfg, c_max8) == raw_score(a, 2, 9, 4)

    def test_zero_lambda(self):
        rng = np.random.default_rng(5)
        a = rng.random((10, 10))
        cfg = SegmentationConfig(penalty_weight=0.0)
        for b1, b2 in [(0, 4), (1, 7), (3, 9)]:
            assert modified_score(a, b1, b2, cfg, 3.3) == raw_score(a, b1, b2, 4)

    def test_direct_arithmetic(self):
        # 7-bar segment with known raw score 3.0: only the first
        # off-diagonal is filled, so raw = 2 * 6 * v / 7
        a = np.zeros((7, 7))
        v = 3.0 * 7 / 12
        for i in range(6):
            a[i, i + 1] = a[i + 1, i] = v
        cfg = SegmentationConfig(penalty_weight=1.0)
        got = modified_score(a, 0, 6, cfg, c_max8=2.5)
        assert got == pytest.approx(3.0 - 1.0 * 1.0 * 2.5)


class TestSegment:
    def test_single_block_single_segment(self):
        a = np.ones((6, 6))
        seg = segment(a, SegmentationConfig(penalty_weight=0.0))
        assert seg.bar_boundaries == (0, 6)

    def test_two_perfect_eight_bar_blocks(self):
        # with the length prior active the two free 8-bar segments win;
        # without it the normalized convolution score rewards splitting
        a = np.zeros((16, 16))
        a[:8, :8] = 1.0
        a[8:, 8:] = 1.0
        cfg = SegmentationConfig(penalty_weight=1.0)
        seg = segment(a, cfg)
        assert dp_total(a, cfg, seg) == enumerate_best_total(a, cfg)
        assert seg.bar_boundaries == (0, 8, 16)

    @pytest.mark.parametrize("penalty_weight", [0.0, 0.7, 1.5])
    def test_matches_exhaustive_enumeration(self, penalty_weight):
        rng = np.random.default_rng(6)
        for trial in range(10):
            size = int(rng.integers(2, 11))
            a = rng.random((size, size))
            a = 0.5 * (a + a.T)
            cfg = SegmentationConfig(penalty_weight=penalty_weight)
            seg = segment(a, cfg)
            assert dp_total(a, cfg, seg) == enumerate_best_total(a, cfg)

    def test_respects_max_segment_bars(self):
        a = np.ones((9, 9))
        cfg = SegmentationConfig(penalty_weight=0.0, max_segment_bars=4)
        seg = segment(a, cfg)
        assert max(np.diff(seg.bar_boundaries)) <= 4
        assert dp_total(a, cfg, seg) == enumerate_best_total(a, cfg)

    def test_tie_break_prefers_fewer_segments(self):
        # identity autosimilarity with zero penalty: every partition scores 0
        a = np.eye(6)
        seg = segment(a, SegmentationConfig(penalty_weight=0.0))
        assert seg.bar_boundaries == (0, 6)

    def test_single_bar(self):
        seg = segment(np.ones((1, 1)), SegmentationConfig())
        assert seg.bar_boundaries == (0, 1)


class TestBoundaryTimes:
    def test_maps_to_downbeats(self):
        bars = BarGrid(downbeats=0.5 + 2.0 * np.arange(10, dtype=float))
        seg = Segmentation(bar_boundaries=(0, 4, 9))
        timed = boundaries_to_times(seg, bars)
        assert timed.boundary_times == (0.5, 8.5, 18.5)

    def test_out_of_range(self):
        bars = BarGrid(downbeats=np.array([0.0, 2.0]))
        with pytest.raises(IndexError):
            boundaries_to_times(Segmentation(bar_boundaries=(0, 3)), bars)

    def test_round_trip_through_annotation_file(self, tmp_path):
        path = tmp_path / "seg.txt"
        save_segmentation(path, [0.0, 8.0, 16.0])
        loaded = load_annotation(path)
        assert loaded.boundaries() == [0.0, 8.0, 16.0]
        assert [s[2] for s in loaded.segments] == ["S0", "S1"]
