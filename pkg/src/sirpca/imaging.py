"""Background subtraction on grayscale frame sequences.

Frames are vectorised row-major and stacked as the columns of the
observation matrix. A static background is (close to) rank one, moving
objects are sparse, so the low-rank part of the decomposition is the
background estimate and ``|M - L|`` highlights the foreground.

Pixel values stay on the 0-255 scale throughout; they are clamped and
rounded only when written to disk.
"""

import math
import os
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DimensionError, FormatError, InvalidInputError
from .solvers import SolverConfig, solve_pcp, solve_pcps
from .staging import StagedOutput

DEFAULT_THRESHOLD = 25.0
VIDEO_KAPPA = 0.5


@dataclass
class FrameStack:
    """Grayscale frames as a ``(count, height, width)`` float array."""

    frames: np.ndarray

    def __post_init__(self):
        f = np.asarray(self.frames, dtype=np.float64)
        if f.ndim != 3:
            raise InvalidInputError(f"frames must be (count, height, width), got shape {f.shape}")
        if not np.all(np.isfinite(f)) or f.min(initial=0) < 0 or f.max(initial=0) > 255:
            raise InvalidInputError("pixel values must lie in [0, 255]")
        self.frames = f

    @property
    def count(self):
        return self.frames.shape[0]

    @property
    def height(self):
        return self.frames.shape[1]

    @property
    def width(self):
        return self.frames.shape[2]

    def __len__(self):
        return self.count

    def head(self, k):
        return FrameStack(self.frames[:k])


@dataclass
class MaskStack:
    masks: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.masks)
        if m.ndim != 3:
            raise InvalidInputError(f"masks must be (count, height, width), got shape {m.shape}")
        if m.dtype != bool:
            if not np.isin(m, (0, 1)).all():
                raise InvalidInputError("masks must be binary")
            m = m.astype(bool)
        self.masks = m

    @property
    def count(self):
        return self.masks.shape[0]

    def __len__(self):
        return self.count

    def head(self, k):
        return MaskStack(self.masks[:k])


def frames_to_observation(fs):
    """``(height*width) x count`` matrix; column ``j`` is frame ``j`` row-major."""
    if fs.count == 0:
        raise InvalidInputError("frame stack is empty")
    return fs.frames.reshape(fs.count, -1).T.copy()


def observation_to_frames(M, height, width):
    M = np.asarray(M, dtype=np.float64)
    if M.ndim != 2 or M.shape[0] != height * width:
        raise DimensionError(f"matrix with {M.shape[0]} rows cannot hold {height}x{width} frames")
    return M.T.reshape(M.shape[1], height, width)


def tile_side_info(image, count):
    """Matrix whose `count` columns are all copies of the vectorised `image`."""
    if count < 1:
        raise InvalidInputError(f"count must be at least 1, got {count}")
    v = np.asarray(image, dtype=np.float64).reshape(-1, 1)
    return np.repeat(v, count, axis=1)


def mean_frame(fs):
    if fs.count == 0:
        raise InvalidInputError("frame stack is empty")
    return fs.frames.mean(axis=0)


@dataclass
class Foreground:
    masks: MaskStack
    residuals: np.ndarray


def extract_foreground(M, L, threshold, height, width):
    """Threshold ``|M - L|`` frame by frame.

    A pixel is foreground iff its residual is strictly above `threshold`.
    """
    M = np.asarray(M, dtype=np.float64)
    L = np.asarray(L, dtype=np.float64)
    if M.shape != L.shape:
        raise DimensionError(f"observation is {M.shape}, background is {L.shape}")
    if not 0 <= threshold <= 255:
        raise InvalidInputError(f"threshold must lie in [0, 255], got {threshold}")
    residual = observation_to_frames(np.abs(M - L), height, width)
    return Foreground(MaskStack(residual > threshold), residual)


def _f1(pred, truth):
    tp = np.count_nonzero(pred & truth)
    n_pred = np.count_nonzero(pred)
    n_true = np.count_nonzero(truth)
    if n_pred == 0 and n_true == 0:
        return 1.0
    if n_pred == 0 or n_true == 0 or tp == 0:
        return 0.0
    precision = tp / n_pred
    recall = tp / n_true
    return 2 * precision * recall / (precision + recall)


def f_measure(pred, truth):
    """Per-frame pixel F1 and its mean.

    F1 is 1 when both masks of a frame are empty, 0 when exactly one is.
    """
    if pred.masks.shape != truth.masks.shape:
        raise DimensionError(f"prediction is {pred.masks.shape}, truth is {truth.masks.shape}")
    scores = np.array([_f1(p, t) for p, t in zip(pred.masks, truth.masks)])
    return scores, float(scores.mean()) if scores.size else math.nan


# ---------------------------------------------------------------- PGM I/O


def _pgm_tokens(data, path):
    """Parse the P5 header; return (width, height, maxval, offset of pixels)."""
    pos = 0
    tokens = []
    while len(tokens) < 4:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if pos >= len(data):
            raise FormatError("truncated PGM header", path)
        if data[pos : pos + 1] == b"#":
            while pos < len(data) and data[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace() and data[pos : pos + 1] != b"#":
            pos += 1
        tokens.append(data[start:pos])
    if tokens[0] != b"P5":
        raise FormatError(f"expected binary PGM magic P5, found {tokens[0]!r}", path)
    try:
        width, height, maxval = (int(t) for t in tokens[1:])
    except ValueError as exc:
        raise FormatError("non-integer PGM header field", path) from exc
    if maxval != 255:
        raise FormatError(f"only maxval 255 is supported, found {maxval}", path)
    if width < 1 or height < 1:
        raise FormatError(f"invalid PGM size {width}x{height}", path)
    return width, height, maxval, pos + 1


def read_pgm(path):
    """Read an 8-bit binary PGM as a float array of shape ``(height, width)``."""
    data = Path(path).read_bytes()
    width, height, _, offset = _pgm_tokens(data, str(path))
    if len(data) - offset < width * height:
        raise FormatError(f"expected {width * height} pixel bytes", str(path))
    pixels = np.frombuffer(data, dtype=np.uint8, count=width * height, offset=offset)
    return pixels.reshape(height, width).astype(np.float64)


def pgm_bytes(image):
    img = np.clip(np.rint(np.asarray(image, dtype=np.float64)), 0, 255).astype(np.uint8)
    h, w = img.shape
    return f"P5\n{w} {h}\n255\n".encode("ascii") + img.tobytes()


def write_pgm(path, image):
    Path(path).write_bytes(pgm_bytes(image))


def _pgm_files(directory):
    d = Path(directory)
    if not d.is_dir():
        raise FileNotFoundError(f"not a directory: {d}")
    files = sorted(p for p in d.iterdir() if p.suffix.lower() == ".pgm" and p.is_file())
    if not files:
        raise FileNotFoundError(f"no .pgm files in {d}")
    return files


def read_frames(directory):
    """Load every ``*.pgm`` in `directory`, in lexicographic filename order."""
    files = _pgm_files(directory)
    frames = [read_pgm(p) for p in files]
    shape = frames[0].shape
    for p, f in zip(files, frames):
        if f.shape != shape:
            raise FormatError(f"frame is {f.shape[1]}x{f.shape[0]}, expected {shape[1]}x{shape[0]}", str(p))
    return FrameStack(np.stack(frames))


def read_masks(directory):
    """Ground-truth masks; any non-zero pixel is foreground."""
    fs = read_frames(directory)
    return MaskStack(fs.frames > 0)


# ------------------------------------------------------------- pipeline


@dataclass
class BgsubResult:
    background: np.ndarray
    foreground: Foreground
    scores: np.ndarray | None
    mean_f1: float | None
    decomposition: object
    elapsed: float


def separate_background(fs, side_image=None, solver="pcp", cfg=None, threshold=DEFAULT_THRESHOLD,
                        truth=None):
    """Decompose a frame stack and extract foreground masks.

    Parameters
    ----------
    fs : FrameStack
    side_image : (height, width) array, optional
        Background photo, tiled to one copy per frame. Required for pcps.
    solver : {"pcp", "pcps"}
    cfg : SolverConfig, optional
        Defaults to ``kappa = 0.5``.
    threshold : float
        Residual level above which a pixel is foreground.
    truth : MaskStack, optional
        When given, per-frame F1 scores are computed.
    """
    cfg = cfg or SolverConfig(kappa=VIDEO_KAPPA)
    M = frames_to_observation(fs)
    start = time.perf_counter()
    if solver == "pcp":
        res = solve_pcp(M, cfg)
    elif solver == "pcps":
        if side_image is None:
            raise InvalidInputError("pcps needs a side-information image")
        side_image = np.asarray(side_image, dtype=np.float64)
        if side_image.shape != (fs.height, fs.width):
            raise DimensionError(
                f"side image is {side_image.shape[1]}x{side_image.shape[0]}, frames are {fs.width}x{fs.height}"
            )
        res = solve_pcps(M, tile_side_info(side_image, fs.count), cfg)
    else:
        raise InvalidInputError(f"unknown solver {solver!r} (expected pcp or pcps)")
    elapsed = time.perf_counter() - start
    fg = extract_foreground(M, res.low_rank, threshold, fs.height, fs.width)
    scores = mean = None
    if truth is not None:
        scores, mean = f_measure(fg.masks, truth)
    background = observation_to_frames(res.low_rank, fs.height, fs.width)
    return BgsubResult(background, fg, scores, mean, res, elapsed)


def write_bgsub_outputs(result, out_dir):
    """Write background, mask and residual images plus optional scores.csv."""
    out_dir = Path(out_dir)
    with StagedOutput(out_dir) as stage:
        for j, bg in enumerate(result.background):
            stage.write_bytes(f"background_{j:04d}.pgm", pgm_bytes(bg))
        for j, m in enumerate(result.foreground.masks.masks):
            stage.write_bytes(f"mask_{j:04d}.pgm", pgm_bytes(m * 255.0))
        for j, r in enumerate(result.foreground.residuals):
            stage.write_bytes(f"residual_{j:04d}.pgm", pgm_bytes(r))
        if result.scores is not None:
            lines = ["frame,f1"] + [f"{j},{float(s)!r}" for j, s in enumerate(result.scores)]
            stage.write_text("scores.csv", "\n".join(lines) + "\n")


def run_bgsub(frames_dir, side=None, solver="pcp", cfg=None, threshold=DEFAULT_THRESHOLD,
              out_dir=None, truth_dir=None):
    """Load frames from disk, separate the background, optionally write outputs.

    `side` is a path to a single PGM background photo (or ``None``).
    """
    if solver == "pcps" and side is None:
        raise InvalidInputError("pcps needs a side-information image")
    fs = read_frames(frames_dir)
    side_image = read_pgm(side) if side is not None else None
    truth = read_masks(truth_dir) if truth_dir is not None else None
    if truth is not None and truth.masks.shape != fs.frames.shape:
        raise DimensionError(
            f"{truth.count} truth masks of {truth.masks.shape[2]}x{truth.masks.shape[1]} "
            f"do not match {fs.count} frames of {fs.width}x{fs.height}"
        )
    result = separate_background(fs, side_image, solver, cfg, threshold, truth)
    if out_dir is not None:
        write_bgsub_outputs(result, out_dir)
    return result


# ------------------------------------------------------- synthetic scenes


@dataclass
class Scene:
    frames: FrameStack
    background: np.ndarray
    truth: MaskStack
    object_masks: MaskStack


def moving_square_scene(n_frames=100, height=64, width=64, square=16, amplitude=100.0, speed=1.0,
                        salt_pepper=0.05, threshold=DEFAULT_THRESHOLD, seed=0):
    """Static textured background with a bright square sliding across it.

    A fraction `salt_pepper` of the pixels in every frame is replaced by 0
    or 255. The ground-truth masks mark every pixel whose value departs
    from the background by more than `threshold`: the square plus the
    visible impulse noise. ``object_masks`` holds the square alone.
    """
    rng = np.random.default_rng(seed)
    yy, xx = np.mgrid[0:height, 0:width]
    background = np.rint(60.0 + 80.0 * xx / width + 20.0 * np.sin(yy / 5.0))
    frames = np.empty((n_frames, height, width))
    objects = np.zeros((n_frames, height, width), dtype=bool)
    y0 = (height - square) // 2
    span = width - square
    for t in range(n_frames):
        x0 = int(round(speed * t)) % span
        objects[t, y0 : y0 + square, x0 : x0 + square] = True
        f = background.copy()
        f[objects[t]] = np.clip(f[objects[t]] + amplitude, 0, 255)
        hit = rng.random((height, width)) < salt_pepper
        f[hit] = np.where(rng.random(hit.sum()) < 0.5, 0.0, 255.0)
        frames[t] = f
    truth = np.abs(frames - background) > threshold
    return Scene(FrameStack(frames), background, MaskStack(truth), MaskStack(objects))


def write_scene(scene, directory):
    """Write frames, truth masks and the background photo as PGM files."""
    directory = Path(directory)
    with StagedOutput(directory) as stage:
        for j, f in enumerate(scene.frames.frames):
            stage.write_bytes(os.path.join("frames", f"frame_{j:04d}.pgm"), pgm_bytes(f))
        for j, m in enumerate(scene.truth.masks):
            stage.write_bytes(os.path.join("truth", f"truth_{j:04d}.pgm"), pgm_bytes(m * 255.0))
        stage.write_bytes("background.pgm", pgm_bytes(scene.background))
