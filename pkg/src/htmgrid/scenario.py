"""Deterministic synthetic mask-stream generator.

Renders rectangular objects moving on simple paths into per-class binary
planes, then layers on the failure modes a real segmentation feed exhibits:
frozen frames (time stops, the same frame is emitted repeatedly), dropped
segments (a run of frames deleted from the output), per-pixel flip noise,
and whole-object single-frame dropouts.

Noise is drawn from per-frame seeded substreams, so deleting or repeating
frames never reshuffles the noise of the frames around them, and the whole
stream is a pure function of the scenario.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError

__all__ = [
    "LinearLoop",
    "Stationary",
    "Scripted",
    "ObjectTrack",
    "FrameRepeat",
    "FrameSkip",
    "NoiseSpec",
    "Scenario",
    "generate",
    "emitted_frame_times",
    "object_position",
]


@dataclass(frozen=True)
class LinearLoop:
    """Constant-velocity path that wraps so the rectangle stays in frame."""

    start: tuple[int, int]
    velocity: tuple[int, int]


@dataclass(frozen=True)
class Stationary:
    position: tuple[int, int]


@dataclass(frozen=True)
class Scripted:
    positions: tuple[tuple[int, int], ...]


@dataclass(frozen=True)
class ObjectTrack:
    shape: tuple[int, int]
    path: LinearLoop | Stationary | Scripted
    class_index: int = 0


@dataclass(frozen=True)
class FrameRepeat:
    """Freeze time: the frame rendered at ``at`` is shown ``duration`` times."""

    at: int
    duration: int


@dataclass(frozen=True)
class FrameSkip:
    """Delete ``count`` frames starting at ``at`` from the emitted stream."""

    at: int
    count: int


@dataclass(frozen=True)
class NoiseSpec:
    pixel_flip_probability: float = 0.0
    object_dropout_probability: float = 0.0


@dataclass(frozen=True)
class Scenario:
    frame_size: tuple[int, int]
    frame_count: int
    objects: tuple[ObjectTrack, ...] = ()
    events: tuple[FrameRepeat | FrameSkip, ...] = ()
    noise: NoiseSpec = field(default_factory=NoiseSpec)
    seed: int = 0
    class_count: int = 1


def object_position(track: ObjectTrack, t: int, frame_size) -> tuple[int, int]:
    """Top-left corner of the object's rectangle at simulation time ``t``."""
    rows, cols = frame_size
    sr, sc = track.shape
    path = track.path
    if isinstance(path, Stationary):
        return path.position
    if isinstance(path, Scripted):
        return path.positions[min(t, len(path.positions) - 1)]
    r_range = rows - sr + 1
    c_range = cols - sc + 1
    r = (path.start[0] + t * path.velocity[0]) % r_range
    c = (path.start[1] + t * path.velocity[1]) % c_range
    return int(r), int(c)


def _validate(scenario: Scenario) -> list[str]:
    out = []
    rows, cols = scenario.frame_size
    if rows <= 0 or cols <= 0:
        out.append(f"frame_size must be positive, got {scenario.frame_size}")
    if scenario.frame_count <= 0:
        out.append(f"frame_count must be positive, got {scenario.frame_count}")
    if scenario.class_count <= 0:
        out.append("class_count must be positive")
    noise = scenario.noise
    if not 0.0 <= noise.pixel_flip_probability < 1.0:
        out.append("pixel_flip_probability must be in [0, 1)")
    if not 0.0 <= noise.object_dropout_probability < 1.0:
        out.append("object_dropout_probability must be in [0, 1)")
    for i, track in enumerate(scenario.objects):
        sr, sc = track.shape
        if sr <= 0 or sc <= 0:
            out.append(f"object {i}: shape must be positive, got {track.shape}")
            continue
        if sr > rows or sc > cols:
            out.append(f"object {i}: shape {track.shape} does not fit the frame")
            continue
        if not 0 <= track.class_index < scenario.class_count:
            out.append(
                f"object {i}: class_index {track.class_index} outside "
                f"[0, {scenario.class_count})"
            )
        if isinstance(track.path, Stationary):
            positions = [track.path.position]
        elif isinstance(track.path, Scripted):
            if not track.path.positions:
                out.append(f"object {i}: scripted path needs at least one position")
                continue
            positions = list(track.path.positions)
        else:
            positions = []  # wrapping keeps a loop in bounds by construction
        for r, c in positions:
            if r < 0 or c < 0 or r + sr > rows or c + sc > cols:
                out.append(
                    f"object {i}: position ({r}, {c}) puts the rectangle out of frame"
                )
    for i, event in enumerate(scenario.events):
        if isinstance(event, FrameRepeat):
            if event.duration < 1:
                out.append(f"event {i}: repeat duration must be >= 1")
            if not 0 <= event.at < scenario.frame_count:
                out.append(f"event {i}: repeat start {event.at} outside the stream")
        elif isinstance(event, FrameSkip):
            if event.count < 1:
                out.append(f"event {i}: skip count must be >= 1")
            if not 0 <= event.at < scenario.frame_count:
                out.append(f"event {i}: skip start {event.at} outside the stream")
            elif event.at + event.count > scenario.frame_count:
                out.append(f"event {i}: skip window exceeds the stream")
        else:
            out.append(f"event {i}: unknown event kind {type(event).__name__}")
    return out


def emitted_frame_times(scenario: Scenario) -> list[int]:
    """Simulation time shown at each emitted frame index, events applied."""
    skip_mask = np.zeros(scenario.frame_count, dtype=bool)
    repeats: dict[int, int] = {}
    for event in scenario.events:
        if isinstance(event, FrameSkip):
            skip_mask[event.at : event.at + event.count] = True
        elif isinstance(event, FrameRepeat):
            repeats[event.at] = repeats.get(event.at, 1) + event.duration - 1
    times: list[int] = []
    for t in range(scenario.frame_count):
        if skip_mask[t]:
            continue
        times.extend([t] * repeats.get(t, 1))
    return times


def _render_sim_frame(scenario: Scenario, t: int) -> list[np.ndarray]:
    noise = scenario.noise
    rng = None
    if noise.object_dropout_probability > 0.0 or noise.pixel_flip_probability > 0.0:
        rng = np.random.default_rng([scenario.seed, t])
    planes = [
        np.zeros(scenario.frame_size, dtype=np.uint8)
        for _ in range(scenario.class_count)
    ]
    for track in scenario.objects:
        if (
            rng is not None
            and noise.object_dropout_probability > 0.0
            and rng.random() < noise.object_dropout_probability
        ):
            continue
        r, c = object_position(track, t, scenario.frame_size)
        sr, sc = track.shape
        planes[track.class_index][r : r + sr, c : c + sc] = 1
    if rng is not None and noise.pixel_flip_probability > 0.0:
        for plane in planes:
            flips = rng.random(plane.shape) < noise.pixel_flip_probability
            np.bitwise_xor(plane, flips.astype(np.uint8), out=plane)
    return planes


def generate(scenario: Scenario) -> list[list[np.ndarray]]:
    """Materialize the emitted frame sequence; each frame is a list of planes."""
    problems = _validate(scenario)
    if problems:
        raise ConfigError("; ".join(problems))
    rendered: dict[int, list[np.ndarray]] = {}
    frames = []
    for t in emitted_frame_times(scenario):
        if t not in rendered:
            rendered[t] = _render_sim_frame(scenario, t)
        frames.append([plane.copy() for plane in rendered[t]])
    return frames
