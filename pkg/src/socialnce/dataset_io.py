"""Plain-text trajectory ingest and export.

Input format: whitespace-delimited lines of (frame, agent_id, x, y), UTF-8,
'#' comment lines and blank lines ignored. Frames are re-indexed to
consecutive integers preserving order, agent ids remapped densely, and a
track with a temporal gap is split into separate agents at the gap (scenes
require contiguous tracks; interpolating across a gap would fabricate data).

Coordinates are written with 9 digits after the decimal point, so a
write/parse round trip moves no position by more than 1e-9 meters.
"""

from __future__ import annotations

from typing import Iterable, TextIO

import numpy as np

from .scene import Scene

__all__ = [
    "parse_trajectory_file",
    "write_trajectory_file",
    "load_scene",
    "save_scene",
]


def _lines(source: str | TextIO | Iterable[str]) -> Iterable[str]:
    if isinstance(source, str):
        return source.splitlines()
    return source


def parse_trajectory_file(source: str | TextIO | Iterable[str],
                          frame_interval: float = 0.4,
                          swap_xy: bool = False,
                          subsample: int = 1) -> Scene:
    """Build a Scene from trajectory text (a string or a line stream).

    swap_xy handles dataset variants with (frame, agent, y, x) columns.
    subsample keeps every k-th distinct frame (rank order) before
    re-indexing, for inputs at a higher rate than the target.
    """
    if subsample < 1:
        raise ValueError(f"subsample must be >= 1, got {subsample}")
    records: dict[tuple[int, int], tuple[float, float]] = {}
    for lineno, raw in enumerate(_lines(source), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tokens = line.split()
        if len(tokens) != 4:
            raise ValueError(
                f"line {lineno}: expected 4 columns, got {len(tokens)}")
        try:
            values = [float(tok) for tok in tokens]
        except ValueError:
            raise ValueError(f"line {lineno}: non-numeric field in {line!r}") from None
        if not all(np.isfinite(values)):
            raise ValueError(f"line {lineno}: non-finite value in {line!r}")
        frame_f, agent_f = values[0], values[1]
        if frame_f != int(frame_f) or agent_f != int(agent_f):
            raise ValueError(
                f"line {lineno}: frame and agent id must be integers, "
                f"got {tokens[0]} {tokens[1]}")
        x, y = (values[3], values[2]) if swap_xy else (values[2], values[3])
        key = (int(frame_f), int(agent_f))
        if key in records:
            raise ValueError(
                f"line {lineno}: duplicate observation for frame {key[0]}, "
                f"agent {key[1]}")
        records[key] = (x, y)
    if not records:
        raise ValueError("no trajectory data found")

    frames = sorted({f for f, _ in records})
    kept = {f: rank for rank, f in enumerate(frames[::subsample])}
    n_frames = len(kept)

    # Tracks sorted by (raw id, segment start) so the canonical Scene does
    # not depend on input line order; gaps start a fresh agent index.
    by_agent: dict[int, list[tuple[int, float, float]]] = {}
    for (frame, agent), (x, y) in records.items():
        if frame in kept:
            by_agent.setdefault(agent, []).append((kept[frame], x, y))
    segments: list[list[tuple[int, float, float]]] = []
    for agent in sorted(by_agent):
        track = sorted(by_agent[agent])
        run: list[tuple[int, float, float]] = [track[0]]
        for item in track[1:]:
            if item[0] == run[-1][0] + 1:
                run.append(item)
            else:
                segments.append(run)
                run = [item]
        segments.append(run)
    if len(segments) < 2:
        raise ValueError(
            f"fewer than 2 agents after parsing (got {len(segments)})")

    xy = np.zeros((n_frames, len(segments), 2))
    present = np.zeros((n_frames, len(segments)), dtype=bool)
    for idx, run in enumerate(segments):
        for rank, x, y in run:
            xy[rank, idx] = (x, y)
            present[rank, idx] = True
    return Scene(xy, present, frame_interval)


def write_trajectory_file(scene: Scene) -> str:
    """Inverse of parse up to frame/agent renumbering."""
    out = []
    for t in range(scene.n_frames):
        for m in np.flatnonzero(scene.present[t]):
            x, y = scene.xy[t, m]
            out.append(f"{t} {m} {x:.9f} {y:.9f}\n")
    return "".join(out)


def load_scene(path: str, frame_interval: float = 0.4, swap_xy: bool = False,
               subsample: int = 1) -> Scene:
    with open(path, encoding="utf-8") as fh:
        return parse_trajectory_file(fh, frame_interval, swap_xy, subsample)


def save_scene(path: str, scene: Scene):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(write_trajectory_file(scene))
