"""Edge-cache simulator with LRU, LFUDA, and GDSF eviction.

LFUDA and GDSF follow the squid proxy definitions: an aging term L starts at
0 and every eviction sets it to the evicted entry's priority, so long-resident
entries cannot starve newcomers forever. An entry's priority is stamped with
the L current at its last access:

    LRU    priority = logical access clock
    LFUDA  priority = L + frequency
    GDSF   priority = L + frequency / size

Eviction removes the lowest-priority entry, least recently used among ties.
A missed object enters the cache before eviction runs, so a cold newcomer
whose priority is the minimum evicts itself and popular residents survive
(squid purges from the full heap, fresh entries included). Objects larger
than the capacity are never stored.
"""

from __future__ import annotations

import heapq
import random
from dataclasses import dataclass, field
from enum import Enum
from typing import Hashable, Sequence

import numpy as np

from .geometry import FovSpec, TimedOrientation, tile_visibility
from .manifest import VideoManifest, segment_requests
from .prediction import nearest_sample


class EvictionPolicy(str, Enum):
    LRU = "lru"
    LFUDA = "lfuda"
    GDSF = "gdsf"


@dataclass
class CacheStats:
    requests: int = 0
    hits: int = 0
    bytes_requested: int = 0
    bytes_hit: int = 0

    @property
    def hit_rate(self) -> float:
        return self.hits / self.requests if self.requests else 0.0

    @property
    def byte_hit_rate(self) -> float:
        return self.bytes_hit / self.bytes_requested if self.bytes_requested else 0.0


@dataclass
class _Entry:
    size: int
    frequency: int
    last_access: int
    priority: float


class Cache:
    """Byte-capacity cache; request() reports hit/miss and ingests misses."""

    def __init__(self, capacity_bytes: int, policy: EvictionPolicy):
        if capacity_bytes < 0:
            raise ValueError("capacity must be >= 0")
        self.capacity = int(capacity_bytes)
        self.policy = EvictionPolicy(policy)
        self.aging_level = 0.0  # L term; only LFUDA/GDSF read it
        self.occupancy = 0
        self.stats = CacheStats()
        self._entries: dict[Hashable, _Entry] = {}
        self._clock = 0
        # Min-heap of (priority, last_access, seq, key); stale items are
        # skipped when their stamp no longer matches the live entry.
        self._heap: list[tuple[float, int, int, Hashable]] = []
        self._seq = 0

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, key: Hashable) -> bool:
        return key in self._entries

    def _priority(self, frequency: int, size: int, clock: int) -> float:
        if self.policy is EvictionPolicy.LRU:
            return float(clock)
        if self.policy is EvictionPolicy.LFUDA:
            return self.aging_level + frequency
        return self.aging_level + frequency / size

    def _push(self, key: Hashable, entry: _Entry) -> None:
        heapq.heappush(
            self._heap, (entry.priority, entry.last_access, self._seq, key)
        )
        self._seq += 1

    def _evict_one(self) -> None:
        while self._heap:
            priority, last_access, _, key = heapq.heappop(self._heap)
            entry = self._entries.get(key)
            if (
                entry is not None
                and entry.priority == priority
                and entry.last_access == last_access
            ):
                del self._entries[key]
                self.occupancy -= entry.size
                self.aging_level = entry.priority
                return
        raise RuntimeError("eviction requested from an empty cache")

    def request(self, key: Hashable, size: int) -> bool:
        """Look up `key`; on a miss, insert it and evict down to capacity.

        Returns True on a hit. The inserted object takes part in its own
        eviction round, so it may be dropped immediately if its priority is
        the lowest. Misses larger than the whole cache are counted but never
        stored.
        """
        if size <= 0:
            raise ValueError("object size must be positive")
        self._clock += 1
        self.stats.requests += 1
        self.stats.bytes_requested += size
        entry = self._entries.get(key)
        if entry is not None:
            self.stats.hits += 1
            self.stats.bytes_hit += entry.size
            entry.frequency += 1
            entry.last_access = self._clock
            entry.priority = self._priority(entry.frequency, entry.size, self._clock)
            self._push(key, entry)
            return True
        if size > self.capacity:
            return False
        entry = _Entry(
            size=size,
            frequency=1,
            last_access=self._clock,
            priority=self._priority(1, size, self._clock),
        )
        self._entries[key] = entry
        self.occupancy += size
        self._push(key, entry)
        while self.occupancy > self.capacity:
            self._evict_one()
        return False

    def reset_stats(self) -> None:
        """Zero the counters (separates warm-up from measurement)."""
        self.stats = CacheStats()


def quality_bands(scores: np.ndarray, quality_count: int) -> np.ndarray:
    """Warm-up quality mapping for one pose's visibility scores.

    Visible tiles, sorted by descending score (ties by index), are split into
    quality_count - 1 equal rank bands mapping to levels q-1 down to 1;
    zero-visibility tiles get level 0.
    """
    levels = np.zeros(scores.shape[0], dtype=np.int64)
    if quality_count < 2:
        return levels
    visible = sorted(np.flatnonzero(scores > 0).tolist(), key=lambda t: (-scores[t], t))
    count = len(visible)
    for rank, tile in enumerate(visible):
        band = rank * (quality_count - 1) // count
        levels[tile] = (quality_count - 1) - band
    return levels


def viewing_assignments(
    manifest: VideoManifest,
    trace: Sequence[TimedOrientation],
    fov: FovSpec,
    samples_per_axis: int = 32,
) -> np.ndarray:
    """Per-segment warm-up assignments for one viewer (actual poses, no
    prediction): the pose nearest each segment start drives quality_bands."""
    out = np.zeros((manifest.segment_count, manifest.grid.tile_count), dtype=np.int64)
    for seg in range(manifest.segment_count):
        pose = nearest_sample(trace, seg * manifest.segment_length).o
        vis = tile_visibility(pose, fov, manifest.grid, samples_per_axis)
        out[seg] = quality_bands(vis.scores, manifest.quality_count)
    return out


def warm(
    cache: Cache,
    manifest: VideoManifest,
    traces: Sequence[Sequence[TimedOrientation]],
    fov: FovSpec,
    seed: int,
    trace_count: int = 30,
    samples_per_axis: int = 32,
) -> None:
    """Pre-populate a cache by replaying full viewings of random traces.

    A seeded draw picks min(trace_count, len(traces)) traces in random order
    (drawing without replacement doubles as the permutation); each viewing
    requests every tile of every segment at its warm-up quality, segments and
    tiles ascending. Call cache.reset_stats() afterwards to measure cleanly.
    """
    rng = random.Random(seed)
    chosen = rng.sample(list(traces), min(trace_count, len(traces)))
    for trace in chosen:
        assignments = viewing_assignments(manifest, trace, fov, samples_per_axis)
        for seg in range(manifest.segment_count):
            for key, size in segment_requests(manifest, seg, assignments[seg]):
                cache.request(key, size)
