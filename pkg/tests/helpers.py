"""Shared test fixtures and reference oracles.

The oracles here are deliberately naive reimplementations (linear scans,
explicit matrix math) so the package's optimized paths are checked against
independent derivations.
"""

from __future__ import annotations

import numpy as np

from tilesim import manifest as mf
from tilesim.adaptation import select_prediction
from tilesim.geometry import FovSpec, Orientation, TileGrid, tile_visibility
from tilesim.synthetic import constant_gaze


class ScanCache:
    """Reference cache: no heap, no cached occupancy.

    Every eviction recomputes each entry's priority from its own state (the
    aging level stamped at its last access) and scans for the minimum,
    breaking ties by least recent access. The incoming object is in the pool
    during its own eviction round, same as the real cache.
    """

    def __init__(self, capacity: int, policy: str):
        self.capacity = capacity
        self.policy = policy
        self.level = 0.0
        self.clock = 0
        self.entries: dict = {}  # key -> {size, freq, last, stamp}

    def _priority(self, e: dict) -> float:
        if self.policy == "lru":
            return float(e["last"])
        if self.policy == "lfuda":
            return e["stamp"] + e["freq"]
        return e["stamp"] + e["freq"] / e["size"]

    @property
    def occupancy(self) -> int:
        return sum(e["size"] for e in self.entries.values())

    def request(self, key, size: int) -> bool:
        self.clock += 1
        e = self.entries.get(key)
        if e is not None:
            e["freq"] += 1
            e["last"] = self.clock
            e["stamp"] = self.level
            return True
        if size > self.capacity:
            return False
        self.entries[key] = {
            "size": size,
            "freq": 1,
            "last": self.clock,
            "stamp": self.level,
        }
        while self.occupancy > self.capacity:
            victim = min(
                self.entries,
                key=lambda k: (self._priority(self.entries[k]), self.entries[k]["last"]),
            )
            self.level = self._priority(self.entries[victim])
            del self.entries[victim]
        return False


def visibility_oracle(
    o: Orientation, fov: FovSpec, grid: TileGrid, samples: int
) -> np.ndarray:
    """Dense-sampling visibility via explicit rotation matrices.

    Independent derivation: the camera frame is built as Rz(yaw) @ Ry(-pitch)
    and applied to the spherical offsets, instead of the package's
    forward/right/up decomposition.
    """
    y = np.radians(o.yaw)
    p = np.radians(o.pitch)
    rz = np.array(
        [[np.cos(y), -np.sin(y), 0.0], [np.sin(y), np.cos(y), 0.0], [0.0, 0.0, 1.0]]
    )
    ry = np.array(
        [[np.cos(-p), 0.0, np.sin(-p)], [0.0, 1.0, 0.0], [-np.sin(-p), 0.0, np.cos(-p)]]
    )
    rot = rz @ ry
    alpha = np.radians(np.linspace(-fov.h_deg / 2.0, fov.h_deg / 2.0, samples))
    beta = np.radians(np.linspace(-fov.v_deg / 2.0, fov.v_deg / 2.0, samples))
    aa, bb = np.meshgrid(alpha, beta, indexing="ij")
    aa, bb = aa.ravel(), bb.ravel()
    local = np.stack(
        [np.cos(bb) * np.cos(aa), np.cos(bb) * np.sin(aa), np.sin(bb)], axis=0
    )
    dirs = (rot @ local).T
    yaw = np.degrees(np.arctan2(dirs[:, 1], dirs[:, 0]))
    yaw = (yaw + 180.0) % 360.0 - 180.0
    pitch = np.degrees(np.arcsin(np.clip(dirs[:, 2], -1.0, 1.0)))
    i = np.clip(
        np.floor((yaw + 180.0) * grid.cols / 360.0).astype(int), 0, grid.cols - 1
    )
    j = np.clip(
        np.floor((90.0 - pitch) * grid.rows / 180.0).astype(int), 0, grid.rows - 1
    )
    counts = np.bincount(j * grid.cols + i, minlength=grid.tile_count)
    return counts / float(samples * samples)


def staircase_scenario(duration: float, base_bitrate_bps: float = 2e6):
    """A stationary viewer whose popularity trace equals the unconstrained
    prediction assignment, so prediction and popularity request identical
    bytes every segment. Returns (manifest, gaze, staircase, bits/segment).
    """
    m = mf.synthesize(
        "stationary",
        duration=duration,
        segment_length=1.5,
        grid=TileGrid(4, 4),
        base_bitrate_bps=base_bitrate_bps,
    )
    vis = tile_visibility(Orientation(0.0, 0.0), FovSpec(), m.grid, 32)
    stair = select_prediction(m, 0, vis, None)
    m.popularity = np.tile(stair, (m.segment_count, 1))
    gaze = constant_gaze(0.0, 0.0, duration + 1.0, hz=30.0)
    return m, gaze, stair, mf.segment_bits(m, 0, stair)


def record_dicts(metrics) -> list[dict]:
    """Segment records as plain dicts, for exact equality comparison."""
    return [
        {
            "segment": r.segment,
            "policy": r.policy,
            "levels": list(r.levels),
            "bytes_total": r.bytes_total,
            "bytes_from_cache": r.bytes_from_cache,
            "bytes_from_origin": r.bytes_from_origin,
            "download_start": r.download_start,
            "download_end": r.download_end,
            "stall": r.stall,
            "mean_quality": r.mean_quality,
            "estimate_bps": r.estimate_bps,
        }
        for r in metrics.records
    ]
