"""Deterministic synthetic sequences for exercising the tracker.

A scenario plans a per-frame ground-truth box plus scene events (occluder
placement, illumination factor, blur width), then renders a textured
target over a structured background and writes binary PGM frames with a
ground-truth box file. Everything derives from the scenario seed, so equal
scenarios render byte-identical sequences.

Kinds: linear (exact line, constant size), fast_motion (a window of
per-frame displacements larger than the default search scale), occlusion
(an occluder covering most of the target for a contiguous window),
illumination (global brightness ramp over a window), blur (horizontal box
blur over a window), scale_change (smooth grow-and-return), clutter
(static distractors textured like the target).
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np

from .geometry import BoundingBox, write_box_file
from .imaging import Frame, pixel_bounds, write_pgm

KINDS = ("linear", "fast_motion", "occlusion", "illumination", "blur",
         "scale_change", "clutter")

# The default per-frame search scale factor the tracker uses; fast_motion
# must out-run it to be "fast".
_SEARCH_FACTOR = 0.3


@dataclass(frozen=True)
class Scenario:
    """One synthetic sequence recipe."""

    kind: str
    frame_count: int = 50
    width: int = 320
    height: int = 240
    target_w: int = 40
    target_h: int = 40
    seed: int = 0
    speed: float = 2.0
    motion_amplitude: float | None = None  # fast_motion; default just above the search scale
    occluder_coverage: float = 0.6
    intensity_ramp: float = 0.45
    blur_width: int = 7
    scale_peak: float = 1.45
    clutter_count: int = 6

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown scenario kind: {self.kind!r}")
        if self.frame_count < 2:
            raise ValueError("need at least 2 frames")
        if self.target_w >= self.width or self.target_h >= self.height:
            raise ValueError("target must fit inside the frame")
        if not 0.0 < self.occluder_coverage <= 1.0:
            raise ValueError("occluder coverage must be in (0, 1]")
        if self.blur_width < 1 or self.blur_width % 2 == 0:
            raise ValueError("blur width must be odd and >= 1")


@dataclass
class FramePlan:
    box: BoundingBox
    occluder: BoundingBox | None = None
    light: float = 1.0
    blur: int = 1


@dataclass
class SequencePlan:
    frames: list[FramePlan]
    background: np.ndarray
    target_texture: np.ndarray
    occluder_texture: np.ndarray | None
    clutter: list[tuple[BoundingBox, np.ndarray]]


def _blocky_texture(rng: np.random.Generator, h: int, w: int,
                    cells: int = 5) -> np.ndarray:
    """Bimodal block pattern with fine noise; informative for Haar."""
    lows = rng.uniform(0.05, 0.35, size=(cells, cells))
    highs = rng.uniform(0.65, 0.95, size=(cells, cells))
    coarse = np.where(rng.random((cells, cells)) < 0.5, highs, lows)
    ry = np.minimum((np.arange(h) * cells) // max(h, 1), cells - 1)
    rx = np.minimum((np.arange(w) * cells) // max(w, 1), cells - 1)
    tex = coarse[np.ix_(ry, rx)] + rng.normal(0.0, 0.03, size=(h, w))
    return np.clip(tex, 0.0, 1.0)


def _smooth(img: np.ndarray, k: int) -> np.ndarray:
    """Separable box filter with edge padding."""
    pad = k // 2
    padded = np.pad(img, pad, mode="edge")
    c = padded.cumsum(0)
    c = np.vstack([np.zeros((1, c.shape[1])), c])
    out = (c[k:, :] - c[:-k, :]) / k
    c = out.cumsum(1)
    c = np.hstack([np.zeros((c.shape[0], 1)), c])
    return (c[:, k:] - c[:, :-k]) / k


def _background(rng: np.random.Generator, h: int, w: int) -> np.ndarray:
    """Static block quilt; windows at different spots look clearly different.

    A near-uniform backdrop makes every background patch a close
    neighbour of every other one, which lets a single bad update flip
    the whole frame's labels at once.  Coarse structure keeps distant
    patches far apart in feature space.
    """
    block = 24
    gh = (h + block - 1) // block
    gw = (w + block - 1) // block
    coarse = rng.uniform(0.15, 0.85, size=(gh, gw))
    ry = np.minimum(np.arange(h) // block, gh - 1)
    rx = np.minimum(np.arange(w) // block, gw - 1)
    quilt = coarse[np.ix_(ry, rx)]
    quilt = _smooth(quilt, 5) + rng.normal(0.0, 0.02, size=(h, w))
    return np.clip(quilt, 0.0, 1.0)


def _safe_span(scn: Scenario, half_w: float, half_h: float) -> tuple[float, float, float, float]:
    """Legal center range (lo_x, hi_x, lo_y, hi_y) keeping the box inside."""
    pad = 2.0
    return (half_w + pad, scn.width - half_w - pad,
            half_h + pad, scn.height - half_h - pad)


def _slow_path(scn: Scenario, rng: np.random.Generator,
               half_w: float, half_h: float, speed: float) -> np.ndarray:
    """Bouncing constant-speed center path, (T, 2), always in the safe span."""
    lo_x, hi_x, lo_y, hi_y = _safe_span(scn, half_w, half_h)
    cx = rng.uniform(lo_x, hi_x)
    cy = rng.uniform(lo_y, hi_y)
    angle = rng.uniform(0, 2 * math.pi)
    vx, vy = speed * math.cos(angle), speed * math.sin(angle)
    path = np.zeros((scn.frame_count, 2))
    for t in range(scn.frame_count):
        path[t] = (cx, cy)
        cx += vx
        cy += vy
        if cx < lo_x:
            cx = 2 * lo_x - cx
            vx = -vx
        elif cx > hi_x:
            cx = 2 * hi_x - cx
            vx = -vx
        if cy < lo_y:
            cy = 2 * lo_y - cy
            vy = -vy
        elif cy > hi_y:
            cy = 2 * hi_y - cy
            vy = -vy
    return path


def build_plan(scenario: Scenario) -> SequencePlan:
    """Expand a scenario into per-frame boxes, events, and textures."""
    scn = scenario
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(scn.seed)))
    background = _background(rng, scn.height, scn.width)
    target_tex = _blocky_texture(rng, scn.target_h * 2, scn.target_w * 2)
    half_w, half_h = scn.target_w / 2.0, scn.target_h / 2.0
    T = scn.frame_count

    sizes = np.full((T, 2), (float(scn.target_w), float(scn.target_h)))
    occluder_tex = None
    occluders: list[BoundingBox | None] = [None] * T
    light = np.ones(T)
    blur = np.ones(T, dtype=int)

    if scn.kind == "linear":
        lo_x, hi_x, lo_y, hi_y = _safe_span(scn, half_w, half_h)
        cx0 = rng.uniform(lo_x, hi_x)
        cy0 = rng.uniform(lo_y, hi_y)
        angle = rng.uniform(0, 2 * math.pi)
        dx, dy = math.cos(angle), math.sin(angle)
        # longest run that stays inside, then cap at the requested speed
        run = np.inf
        if dx > 0:
            run = min(run, (hi_x - cx0) / dx)
        elif dx < 0:
            run = min(run, (lo_x - cx0) / dx)
        if dy > 0:
            run = min(run, (hi_y - cy0) / dy)
        elif dy < 0:
            run = min(run, (lo_y - cy0) / dy)
        step = min(scn.speed, run / (T - 1))
        ts = np.arange(T)[:, None]
        path = np.array([[cx0, cy0]]) + ts * np.array([[dx * step, dy * step]])
    elif scn.kind == "fast_motion":
        # the per-frame jump must exceed the tracker's default search
        # deviation for the run to count as fast motion
        min_needed = _SEARCH_FACTOR * max(scn.target_w, scn.target_h) + 1.0
        amp = scn.motion_amplitude
        if amp is None:
            amp = min_needed
        amp = max(amp, min_needed)
        lo_x, hi_x, lo_y, hi_y = _safe_span(scn, half_w, half_h)
        start = T // 3
        desired = max(4, min(10, T // 6))
        cx = rng.uniform(lo_x, hi_x)
        cy = rng.uniform(lo_y, hi_y)
        angle = rng.uniform(0, 2 * math.pi)
        vx, vy = math.cos(angle), math.sin(angle)
        path = np.zeros((T, 2))
        fast_until = -1
        sign = 1.0
        for t in range(T):
            path[t] = (cx, cy)
            if t == start:
                # straight run along x toward the larger free side, sized so
                # the window never needs a wall bounce
                room_right = hi_x - cx
                room_left = cx - lo_x
                sign = 1.0 if room_right >= room_left else -1.0
                room = max(room_right, room_left)
                if room < amp:
                    amp = max(room / 2.0, 1.0)
                fast_until = start + int(min(desired, room // amp))
            if start <= t < fast_until:
                cx += sign * amp
            else:
                cx += vx
                cy += vy
                if cx < lo_x:
                    cx = 2 * lo_x - cx
                    vx = -vx
                elif cx > hi_x:
                    cx = 2 * hi_x - cx
                    vx = -vx
                if cy < lo_y:
                    cy = 2 * lo_y - cy
                    vy = -vy
                elif cy > hi_y:
                    cy = 2 * hi_y - cy
                    vy = -vy
    elif scn.kind == "scale_change":
        path = _slow_path(scn, rng, half_w * scn.scale_peak, half_h * scn.scale_peak,
                          speed=scn.speed * 0.5)
        s = np.exp(math.log(scn.scale_peak) * np.sin(math.pi * np.arange(T) / (T - 1)))
        sizes = np.stack([scn.target_w * s, scn.target_h * s], axis=1)
    else:
        path = _slow_path(scn, rng, half_w, half_h, speed=scn.speed * 0.75)

    if scn.kind == "occlusion":
        occluder_tex = np.clip(
            0.12 + 0.05 * _blocky_texture(rng, scn.target_h * 2, scn.target_w * 2, cells=3),
            0.0, 1.0)
        start = T // 3
        length = max(6, T // 5)
        ow = scn.target_w + 4.0
        oh = scn.occluder_coverage * scn.target_h
        for t in range(start, min(start + length, T)):
            cx, cy = path[t]
            occluders[t] = BoundingBox(cx - ow / 2.0, cy - oh / 2.0, ow, oh)
    elif scn.kind == "illumination":
        start, end = T // 4, max(T // 4 + 2, 3 * T // 4)
        for t in range(start, min(end, T)):
            u = (t - start) / max(1, (end - 1 - start))
            light[t] = 1.0 + scn.intensity_ramp * math.sin(math.pi * u)
    elif scn.kind == "blur":
        start = T // 3
        length = max(6, T // 4)
        blur[start:min(start + length, T)] = scn.blur_width

    clutter = []
    if scn.kind == "clutter":
        lo_x, hi_x, lo_y, hi_y = _safe_span(scn, half_w, half_h)
        for _ in range(scn.clutter_count):
            w = scn.target_w * rng.uniform(0.8, 1.2)
            h = scn.target_h * rng.uniform(0.8, 1.2)
            cx = rng.uniform(lo_x, hi_x)
            cy = rng.uniform(lo_y, hi_y)
            box = BoundingBox(cx - w / 2.0, cy - h / 2.0, w, h)
            tex = _blocky_texture(rng, int(h) * 2, int(w) * 2)
            clutter.append((box, tex))

    frames = []
    for t in range(T):
        w, h = sizes[t]
        cx, cy = path[t]
        frames.append(FramePlan(
            box=BoundingBox(cx - w / 2.0, cy - h / 2.0, float(w), float(h)),
            occluder=occluders[t],
            light=float(light[t]),
            blur=int(blur[t]),
        ))
    return SequencePlan(frames, background, target_tex, occluder_tex, clutter)


def _paste(img: np.ndarray, box: BoundingBox, tex: np.ndarray) -> None:
    """Nearest-neighbor paste of a texture into a real-valued box."""
    h, w = img.shape
    x0, y0, x1, y1 = pixel_bounds(box, w, h)
    if x1 <= x0 or y1 <= y0:
        return
    th, tw = tex.shape
    py = np.arange(y0, y1)
    px = np.arange(x0, x1)
    v = (py + 0.5 - box.y) / box.h
    u = (px + 0.5 - box.x) / box.w
    rows = np.clip((v * th).astype(int), 0, th - 1)
    cols = np.clip((u * tw).astype(int), 0, tw - 1)
    img[y0:y1, x0:x1] = tex[np.ix_(rows, cols)]


def _box_blur_h(img: np.ndarray, k: int) -> np.ndarray:
    """Horizontal box blur of odd width k with edge clamping."""
    if k <= 1:
        return img
    pad = k // 2
    padded = np.pad(img, ((0, 0), (pad, pad)), mode="edge")
    c = np.hstack([np.zeros((img.shape[0], 1)), padded.cumsum(1)])
    return (c[:, k:] - c[:, :-k]) / k


def render_frame(plan: SequencePlan, index: int) -> Frame:
    """Render one planned frame to a quantized grayscale Frame."""
    fp = plan.frames[index]
    img = plan.background.copy()
    for box, tex in plan.clutter:
        _paste(img, box, tex)
    _paste(img, fp.box, plan.target_texture)
    if fp.occluder is not None:
        _paste(img, fp.occluder, plan.occluder_texture)
    if fp.light != 1.0:
        img = img * fp.light
    if fp.blur > 1:
        img = _box_blur_h(img, fp.blur)
    img = np.clip(img, 0.0, 1.0)
    quantized = np.clip(np.rint(img * 255.0), 0, 255).astype(np.uint8)
    return Frame.from_uint8(quantized)


def generate(scenario: Scenario, out_dir: str) -> tuple[list[str], str]:
    """Render a scenario into out_dir; returns (frame paths, gt path).

    Frames are zero-padded PGM files whose lexicographic order is the
    temporal order; ground truth is one x,y,w,h line per frame.
    """
    plan = build_plan(scenario)
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    for t in range(scenario.frame_count):
        path = os.path.join(out_dir, f"{t + 1:04d}.pgm")
        write_pgm(path, render_frame(plan, t))
        paths.append(path)
    gt_path = os.path.join(out_dir, "groundtruth.txt")
    write_box_file(gt_path, [fp.box for fp in plan.frames])
    return paths, gt_path
