"""Content-popularity heat maps and their quantization into quality levels.

Heat accumulates per (segment, tile) from many viewers' traces; quantization
turns each segment's heat ranking into a per-tile quality assignment under a
bitrate budget. The result is stored on the manifest as its popularity trace.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .geometry import FovSpec, TileGrid, TimedOrientation, tile_visibility
from .manifest import VideoManifest, count_segments

# Feasibility slack for float budget comparisons. Level steps are whole bytes
# (>= 8 bits), so a relative 1e-9 can never flip a genuinely infeasible case.
_BUDGET_EPS = 1e-9


@dataclass
class HeatMap:
    """Accumulated visibility mass per (segment, tile)."""

    grid: TileGrid
    segment_length: float
    heat: np.ndarray = field(repr=False)  # (segments, tiles)

    @property
    def segment_count(self) -> int:
        return self.heat.shape[0]


def build_heat(
    traces: Sequence[Sequence[TimedOrientation]],
    grid: TileGrid,
    fov: FovSpec,
    segment_length: float,
    duration: float,
    samples_per_axis: int = 32,
) -> HeatMap:
    """Sum every sample's visibility map into its segment's heat row.

    A sample at time t lands in segment floor(t / segment_length); samples at
    or past `duration` are ignored. Total heat per segment equals the number
    of samples that fell into it (each visibility map sums to 1).
    """
    segments = count_segments(duration, segment_length)
    heat = np.zeros((segments, grid.tile_count))
    for trace in traces:
        for sample in trace:
            if sample.t < 0 or sample.t >= duration:
                continue
            seg = int(sample.t // segment_length)
            if seg >= segments:
                continue
            heat[seg] += tile_visibility(
                sample.o, fov, grid, samples_per_axis
            ).scores
    return HeatMap(grid=grid, segment_length=segment_length, heat=heat)


def default_budget_bps(manifest: VideoManifest) -> float:
    """Nominal bitrate of ceil(25% of tiles) at top level plus the rest at the
    lowest level."""
    tiles = manifest.grid.tile_count
    k = math.ceil(0.25 * tiles)
    top = manifest.bitrate_factors[-1]
    low = manifest.bitrate_factors[0]
    return manifest.base_bitrate_bps * (k * top + (tiles - k) * low)


def quantize(
    heat: HeatMap, manifest: VideoManifest, budget_bps: float | None = None
) -> np.ndarray:
    """Per segment, assign quality levels by descending heat under the budget.

    Tiles with nonzero heat are walked hottest first (ties by tile index);
    each is raised to the highest level that keeps the whole segment's bits -
    counting every not-yet-visited tile at level 0 - within budget *
    segment_length. Assigned levels never increase along the walk; once a tile
    cannot be raised at all the walk stops. Tiles nobody ever looked at stay
    at level 0 no matter the budget, like invisible tiles under prediction.
    A budget below the all-lowest bitrate yields all level 0, not an error.
    """
    if budget_bps is None:
        budget_bps = default_budget_bps(manifest)
    if heat.heat.shape != (manifest.segment_count, manifest.grid.tile_count):
        raise ValueError(
            f"heat shape {heat.heat.shape} does not match manifest "
            f"({manifest.segment_count} segments x {manifest.grid.tile_count} tiles)"
        )
    q = manifest.quality_count
    tiles = manifest.grid.tile_count
    cap = budget_bps * manifest.segment_length
    cap_slack = cap * (1.0 + _BUDGET_EPS)
    out = np.zeros((manifest.segment_count, tiles), dtype=np.int64)
    for seg in range(manifest.segment_count):
        row = heat.heat[seg]
        order = sorted(
            (t for t in range(tiles) if row[t] > 0), key=lambda t: (-row[t], t)
        )
        base = 8 * manifest.sizes[seg, :, 0].astype(np.int64)
        current = int(base.sum())
        ceiling = q - 1
        for tile in order:
            best = 0
            for level in range(ceiling, 0, -1):
                delta = int(8 * manifest.sizes[seg, tile, level]) - int(base[tile])
                if current + delta <= cap_slack:
                    best = level
                    break
            if best == 0:
                break
            out[seg, tile] = best
            current += int(8 * manifest.sizes[seg, tile, best]) - int(base[tile])
            ceiling = best
    return out


def average_quality_map(popularity: np.ndarray) -> np.ndarray:
    """Mean assigned level per tile across segments (for reporting)."""
    return np.asarray(popularity, dtype=float).mean(axis=0)
