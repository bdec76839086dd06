import numpy as np
import pytest

from sirpca import imaging, matops
from sirpca.errors import DimensionError, FormatError, InvalidInputError
from sirpca.imaging import FrameStack, MaskStack


def stack(*frames):
    return FrameStack(np.array(frames, dtype=float))


class TestObservation:
    def test_row_major(self):
        M = imaging.frames_to_observation(stack([[1, 2], [3, 4]]))
        np.testing.assert_array_equal(M, [[1], [2], [3], [4]])

    def test_identical_frames_rank_one(self):
        f = np.random.default_rng(0).uniform(0, 255, (4, 5))
        assert matops.rank(imaging.frames_to_observation(stack(f, f, f))) == 1

    def test_round_trip(self):
        fs = FrameStack(np.random.default_rng(0).uniform(0, 255, (6, 3, 5)))
        M = imaging.frames_to_observation(fs)
        np.testing.assert_array_equal(imaging.observation_to_frames(M, 3, 5), fs.frames)
        np.testing.assert_array_equal(imaging.frames_to_observation(FrameStack(imaging.observation_to_frames(M, 3, 5))), M)

    def test_empty(self):
        with pytest.raises(InvalidInputError):
            imaging.frames_to_observation(FrameStack(np.zeros((0, 2, 2))))

    def test_range(self):
        with pytest.raises(InvalidInputError):
            stack([[0, 256]])

    def test_wrong_rows(self):
        with pytest.raises(DimensionError):
            imaging.observation_to_frames(np.zeros((5, 2)), 2, 2)


class TestTileAndMean:
    def test_tile(self):
        img = np.arange(6.0).reshape(2, 3)
        T = imaging.tile_side_info(img, 4)
        assert T.shape == (6, 4)
        for j in range(4):
            np.testing.assert_array_equal(T[:, j], T[:, 0])
        assert imaging.tile_side_info(img, 1).shape == (6, 1)
        assert matops.rank(T) == 1
        assert matops.nuclear_norm(T) == pytest.approx(2 * np.linalg.norm(img))

    def test_tile_count(self):
        with pytest.raises(InvalidInputError):
            imaging.tile_side_info(np.ones((2, 2)), 0)

    def test_mean(self):
        a = np.full((2, 2), 0.0)
        b = np.full((2, 2), 255.0)
        np.testing.assert_array_equal(imaging.mean_frame(stack(a, b)), np.full((2, 2), 127.5))
        np.testing.assert_array_equal(imaging.mean_frame(stack(a)), a)

    def test_mean_permutation_invariant(self):
        f = np.random.default_rng(1).uniform(0, 255, (7, 3, 3))
        a = imaging.mean_frame(FrameStack(f))
        b = imaging.mean_frame(FrameStack(f[::-1]))
        np.testing.assert_allclose(a, b, rtol=1e-14)


class TestForeground:
    def test_equal_is_empty(self):
        M = np.random.default_rng(0).uniform(0, 255, (4, 3))
        fg = imaging.extract_foreground(M, M, 25, 2, 2)
        assert not fg.masks.masks.any() and not fg.residuals.any()

    def test_zero_threshold(self):
        M = np.zeros((4, 1)); L = M.copy(); L[2, 0] = 0.5
        fg = imaging.extract_foreground(M, L, 0, 2, 2)
        np.testing.assert_array_equal(fg.masks.masks[0], [[False, False], [True, False]])

    def test_residual_nonnegative_and_zero_exactly_on_agreement(self):
        g = np.random.default_rng(0)
        M = g.uniform(0, 255, (9, 4)); L = M.copy(); L[::2] += g.normal(size=(5, 4))
        r = imaging.extract_foreground(M, L, 10, 3, 3).residuals
        assert (r >= 0).all()
        np.testing.assert_array_equal(r == 0, imaging.observation_to_frames(M == L, 3, 3).astype(bool))

    def test_shape_mismatch(self):
        with pytest.raises(DimensionError):
            imaging.extract_foreground(np.zeros((4, 2)), np.zeros((4, 3)), 25, 2, 2)


class TestFMeasure:
    def masks(self, *ms):
        return MaskStack(np.array(ms, dtype=bool))

    def test_rules(self):
        t = np.zeros((2, 4), bool); t[0, :2] = True
        e = np.zeros((2, 4), bool)
        half = np.zeros((2, 4), bool); half[0, 0] = True
        other = np.zeros((2, 4), bool); other[1, 3] = True
        scores, mean = imaging.f_measure(self.masks(t, e, half, other, e),
                                         self.masks(t, e, t, t, t))
        np.testing.assert_allclose(scores, [1.0, 1.0, 2 / 3, 0.0, 0.0])
        assert mean == pytest.approx(np.mean([1, 1, 2 / 3, 0, 0]))

    def test_shape(self):
        with pytest.raises(DimensionError):
            imaging.f_measure(MaskStack(np.zeros((1, 2, 2), bool)), MaskStack(np.zeros((2, 2, 2), bool)))

    def test_non_binary(self):
        with pytest.raises(InvalidInputError):
            MaskStack(np.full((1, 2, 2), 3))


class TestPgm:
    def test_round_trip(self, tmp_path):
        img = np.random.default_rng(0).integers(0, 256, (5, 7)).astype(float)
        imaging.write_pgm(tmp_path / "a.pgm", img)
        np.testing.assert_array_equal(imaging.read_pgm(tmp_path / "a.pgm"), img)

    def test_clamps_and_rounds(self):
        data = imaging.pgm_bytes(np.array([[-3.0, 12.6, 300.0]]))
        assert data == b"P5\n3 1\n255\n" + bytes([0, 13, 255])

    def test_header_comments(self, tmp_path):
        p = tmp_path / "c.pgm"
        p.write_bytes(b"P5\n# comment\n2 1\n255\n" + bytes([7, 9]))
        np.testing.assert_array_equal(imaging.read_pgm(p), [[7, 9]])

    @pytest.mark.parametrize("data", [b"P2\n1 1\n255\n0", b"P5\n1 1\n65535\n\0\0", b"P5\n2 2\n255\n\0", b"P5\n2"])
    def test_malformed(self, tmp_path, data):
        p = tmp_path / "bad.pgm"
        p.write_bytes(data)
        with pytest.raises(FormatError, match="bad.pgm"):
            imaging.read_pgm(p)

    def test_lexicographic_order(self, tmp_path):
        for name, v in (("b.pgm", 2), ("a.pgm", 1), ("c.pgm", 3)):
            imaging.write_pgm(tmp_path / name, np.full((2, 2), float(v)))
        fs = imaging.read_frames(tmp_path)
        assert list(fs.frames[:, 0, 0]) == [1, 2, 3]

    def test_size_mismatch(self, tmp_path):
        imaging.write_pgm(tmp_path / "a.pgm", np.zeros((2, 2)))
        imaging.write_pgm(tmp_path / "b.pgm", np.zeros((3, 2)))
        with pytest.raises(FormatError, match="b.pgm"):
            imaging.read_frames(tmp_path)

    def test_missing_dir(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            imaging.read_frames(tmp_path / "nope")


class TestPipeline:
    def test_static_video(self):
        f = np.random.default_rng(0).integers(20, 200, (8, 8)).astype(float)
        fs = FrameStack(np.repeat(f[None], 10, axis=0))
        res = imaging.separate_background(fs, solver="pcp")
        np.testing.assert_allclose(res.background, fs.frames, atol=1e-3)
        assert not res.foreground.masks.masks.any()

    def test_scene_construction(self):
        sc = imaging.moving_square_scene(n_frames=5, seed=1)
        assert sc.frames.frames.shape == (5, 64, 64)
        assert sc.object_masks.masks.sum(axis=(1, 2)).tolist() == [256] * 5
        assert (sc.truth.masks | ~sc.object_masks.masks).all()
        noise = (sc.truth.masks & ~sc.object_masks.masks).mean()
        assert 0.02 <= noise <= 0.05

    def test_pcps_needs_side(self):
        with pytest.raises(InvalidInputError):
            imaging.separate_background(FrameStack(np.zeros((2, 2, 2))), solver="pcps")

    def test_run_and_write(self, tmp_path):
        sc = imaging.moving_square_scene(n_frames=12, height=24, width=24, square=6, seed=2)
        imaging.write_scene(sc, tmp_path / "scene")
        out = tmp_path / "out"
        res = imaging.run_bgsub(tmp_path / "scene" / "frames", tmp_path / "scene" / "background.pgm",
                                "pcps", out_dir=out, truth_dir=tmp_path / "scene" / "truth")
        names = sorted(p.name for p in out.iterdir())
        assert len(names) == 12 * 3 + 1 and "scores.csv" in names
        rows = (out / "scores.csv").read_text().splitlines()
        assert rows[0] == "frame,f1" and len(rows) == 13
        mask = imaging.read_pgm(out / "mask_0000.pgm")
        assert set(np.unique(mask)) <= {0.0, 255.0}
        assert res.mean_f1 > 0.9

    def test_no_truth_no_scores(self, tmp_path):
        sc = imaging.moving_square_scene(n_frames=6, height=16, width=16, square=4)
        imaging.write_scene(sc, tmp_path / "s")
        imaging.run_bgsub(tmp_path / "s" / "frames", out_dir=tmp_path / "o")
        assert not (tmp_path / "o" / "scores.csv").exists()
