"""Streaming-session simulation and multi-run experiments.

The client downloads one segment ahead of playback: segment k's download
starts when segment k-1 finished downloading or started playing, whichever is
later. Cache-served and origin-served bytes of a segment transfer
concurrently over their own links; the segment is ready at the later of the
two completions. Playback begins when segment 0 is ready (startup delay is
not counted as stalling); a segment arriving after its scheduled playback
start stalls the player and shifts the remaining schedule.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .adaptation import (
    PolicyKind,
    TransitionState,
    select_naive,
    select_popularity,
    select_prediction,
    select_prediction_ba,
    transition_step,
)
from .cachesim import Cache, EvictionPolicy, warm
from .geometry import FovSpec, TimedOrientation, tile_visibility
from .manifest import VideoManifest, naive_segment_bytes, segment_bits, segment_requests
from .netsim import LastSampleEstimator, Link, NetworkTrace
from .prediction import PredictorConfig, fit, nearest_sample, predict, select_window


@dataclass
class SessionConfig:
    manifest: VideoManifest
    viewing_trace: list[TimedOrientation]
    network_trace: NetworkTrace
    policy: PolicyKind
    cache: Cache | None = None
    cache_rate_bps: float = 100e6
    fov: FovSpec = field(default_factory=FovSpec)
    predictor: PredictorConfig = field(default_factory=PredictorConfig)
    samples_per_axis: int = 32
    hysteresis: float = 1.0


@dataclass
class SegmentRecord:
    segment: int
    policy: str  # mechanism that chose the levels (transitions record the delegate)
    levels: tuple[int, ...]
    bytes_total: int
    bytes_from_cache: int
    bytes_from_origin: int
    download_start: float
    download_end: float
    stall: float
    mean_quality: float
    estimate_bps: float | None  # estimate in force when the segment was chosen


@dataclass
class SessionMetrics:
    policy: str
    records: list[SegmentRecord]
    savings: np.ndarray = field(repr=False)  # per segment vs all-top-level
    cache_hit_rate: float | None = None
    cache_byte_hit_rate: float | None = None

    @property
    def total_stall(self) -> float:
        return float(sum(r.stall for r in self.records))

    @property
    def avg_quality(self) -> float:
        return float(np.mean([r.levels for r in self.records]))

    @property
    def total_bytes(self) -> int:
        return int(sum(r.bytes_total for r in self.records))

    def to_dict(self) -> dict:
        return {
            "policy": self.policy,
            "total_stall": self.total_stall,
            "avg_quality": self.avg_quality,
            "total_bytes": self.total_bytes,
            "cache_hit_rate": self.cache_hit_rate,
            "cache_byte_hit_rate": self.cache_byte_hit_rate,
            "savings": [float(s) for s in self.savings],
            "segments": [
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
                for r in self.records
            ],
        }

    def canonical_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))


def savings_vs_naive(metrics: SessionMetrics, naive: SessionMetrics) -> np.ndarray:
    """Per-segment byte savings of one session against a naive session."""
    ours = np.array([r.bytes_total for r in metrics.records], dtype=float)
    theirs = np.array([r.bytes_total for r in naive.records], dtype=float)
    return 1.0 - ours / theirs


def simulate(cfg: SessionConfig) -> SessionMetrics:
    """Run one streaming session; deterministic for identical configs.

    The regression window ends at the playback position reached when each
    segment's download starts, and the pose is predicted at that segment's
    playback start. If the window interval holds no sample (sparse traces),
    the nearest earlier sample is used as a constant fallback.
    """
    m = cfg.manifest
    s = m.segment_length
    if not cfg.viewing_trace:
        raise ValueError("viewing trace is empty")
    span = cfg.viewing_trace[-1].t - cfg.viewing_trace[0].t
    if span < cfg.predictor.timeframe:
        raise ValueError(
            f"viewing trace spans {span:.3f}s, shorter than the "
            f"{cfg.predictor.timeframe:.3f}s regression window"
        )
    if cfg.policy in (PolicyKind.POPULARITY, PolicyKind.TRANSITION) and not m.has_popularity:
        raise ValueError(
            "manifest has no popularity trace; build one first "
            "(tilesim popularity, or popularity.quantize)"
        )
    interval = cfg.predictor.interval if cfg.predictor.interval is not None else s
    estimator = LastSampleEstimator()
    state = TransitionState(hysteresis=cfg.hysteresis)
    origin = Link(cfg.network_trace)
    records: list[SegmentRecord] = []
    savings = np.zeros(m.segment_count)
    sched_prev = 0.0  # wall-clock playback start of the previous segment
    end_prev = 0.0

    for seg in range(m.segment_count):
        dl_start = 0.0 if seg == 0 else max(end_prev, sched_prev)
        target = seg * s
        now = max(0.0, target - interval)
        window = select_window(cfg.viewing_trace, now, cfg.predictor.timeframe)
        if not window:
            window = [nearest_sample(cfg.viewing_trace, now)]
        predicted = predict(fit(window, now), target)
        vis = tile_visibility(predicted, cfg.fov, m.grid, cfg.samples_per_axis)

        estimate = estimator.current()
        budget = estimate.bits_per_second if estimate is not None else None
        active = cfg.policy
        if cfg.policy is PolicyKind.TRANSITION:
            wanted = select_prediction(m, seg, vis, None)
            required = segment_bits(m, seg, wanted) / s
            active = transition_step(state, estimate, required)

        if active is PolicyKind.NAIVE:
            levels = select_naive(m, seg)
        elif active is PolicyKind.PREDICTION:
            levels = select_prediction(m, seg, vis, budget)
        elif active is PolicyKind.POPULARITY:
            levels = select_popularity(m, seg)
        elif active is PolicyKind.PREDICTION_BA:
            levels = select_prediction_ba(m, seg, vis, budget)
        else:
            raise ValueError(f"unknown policy {active}")

        cache_bytes = 0
        origin_bytes = 0
        for key, size in segment_requests(m, seg, levels):
            if cfg.cache is not None and cfg.cache.request(key, size):
                cache_bytes += size
            else:
                origin_bytes += size

        origin_end = origin.transfer_time(dl_start, origin_bytes)
        cache_end = dl_start + cache_bytes * 8.0 / cfg.cache_rate_bps
        dl_end = max(origin_end, cache_end)
        if origin_bytes > 0:
            estimator.update(origin_bytes * 8.0, dl_start, origin_end)

        if seg == 0:
            sched = dl_end  # playback starts when the first segment is ready
            stall = 0.0
        else:
            sched = sched_prev + s
            stall = max(0.0, dl_end - sched)
            sched += stall

        total = cache_bytes + origin_bytes
        savings[seg] = 1.0 - total / naive_segment_bytes(m, seg)
        records.append(
            SegmentRecord(
                segment=seg,
                policy=active.value,
                levels=tuple(int(x) for x in levels),
                bytes_total=total,
                bytes_from_cache=cache_bytes,
                bytes_from_origin=origin_bytes,
                download_start=dl_start,
                download_end=dl_end,
                stall=stall,
                mean_quality=float(np.mean(levels)),
                estimate_bps=(
                    float(estimate.bits_per_second) if estimate is not None else None
                ),
            )
        )
        sched_prev, end_prev = sched, dl_end

    stats = cfg.cache.stats if cfg.cache is not None else None
    return SessionMetrics(
        policy=cfg.policy.value,
        records=records,
        savings=savings,
        cache_hit_rate=stats.hit_rate if stats else None,
        cache_byte_hit_rate=stats.byte_hit_rate if stats else None,
    )


@dataclass
class ExperimentReport:
    policies: list[str]
    iterations: int
    seed: int
    runs: dict[str, list[SessionMetrics]]

    def quality_gain_percent(
        self,
        over: PolicyKind = PolicyKind.PREDICTION_BA,
        of: PolicyKind = PolicyKind.TRANSITION,
    ) -> float | None:
        """Relative mean-quality gain of one policy over another, in percent."""
        if of.value not in self.runs or over.value not in self.runs:
            return None
        ours = float(np.mean([m.avg_quality for m in self.runs[of.value]]))
        base = float(np.mean([m.avg_quality for m in self.runs[over.value]]))
        if base == 0.0:
            return None
        return (ours - base) / base * 100.0


def run_experiment(
    manifest: VideoManifest,
    viewing_traces: list[list[TimedOrientation]],
    network_trace: NetworkTrace,
    policies: list[PolicyKind],
    iterations: int,
    cache_policy: EvictionPolicy | None = None,
    cache_capacity_bytes: int = 0,
    seed: int = 0,
    warm_trace_count: int = 30,
    fov: FovSpec | None = None,
    predictor: PredictorConfig | None = None,
    samples_per_axis: int = 32,
    cache_rate_bps: float = 100e6,
    hysteresis: float = 1.0,
) -> ExperimentReport:
    """Paired multi-run experiment over one or more policies.

    Iteration i uses viewing_traces[i % len] and a warm-up seed derived from
    (seed, i) for every policy, so runs are comparable pairwise across
    policies. Each run gets a freshly warmed cache with counters reset before
    measurement.
    """
    if not viewing_traces:
        raise ValueError("need at least one viewing trace")
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    fov = fov or FovSpec()
    predictor = predictor or PredictorConfig()
    runs: dict[str, list[SessionMetrics]] = {p.value: [] for p in policies}
    for policy in policies:
        for i in range(iterations):
            cache = None
            if cache_policy is not None and cache_capacity_bytes > 0:
                cache = Cache(cache_capacity_bytes, cache_policy)
                warm(
                    cache,
                    manifest,
                    viewing_traces,
                    fov,
                    seed=seed * 100003 + i,
                    trace_count=warm_trace_count,
                    samples_per_axis=samples_per_axis,
                )
                cache.reset_stats()
            cfg = SessionConfig(
                manifest=manifest,
                viewing_trace=viewing_traces[i % len(viewing_traces)],
                network_trace=network_trace,
                policy=policy,
                cache=cache,
                cache_rate_bps=cache_rate_bps,
                fov=fov,
                predictor=predictor,
                samples_per_axis=samples_per_axis,
                hysteresis=hysteresis,
            )
            runs[policy.value].append(simulate(cfg))
    return ExperimentReport(
        policies=[p.value for p in policies],
        iterations=iterations,
        seed=seed,
        runs=runs,
    )


# --- report flattening (shared by the CLI writer and verifier) ---------------

SEGMENT_COLUMNS = [
    "policy",
    "iteration",
    "segment",
    "active",
    "levels",
    "bytes_total",
    "bytes_from_cache",
    "bytes_from_origin",
    "download_start",
    "download_end",
    "stall",
    "mean_quality",
    "estimate_bps",
    "savings",
]


def segment_rows(report: ExperimentReport) -> list[dict]:
    rows = []
    for policy in report.policies:
        for i, metrics in enumerate(report.runs[policy]):
            for seg, r in enumerate(metrics.records):
                rows.append(
                    {
                        "policy": policy,
                        "iteration": i,
                        "segment": r.segment,
                        "active": r.policy,
                        "levels": "|".join(str(x) for x in r.levels),
                        "bytes_total": r.bytes_total,
                        "bytes_from_cache": r.bytes_from_cache,
                        "bytes_from_origin": r.bytes_from_origin,
                        "download_start": r.download_start,
                        "download_end": r.download_end,
                        "stall": r.stall,
                        "mean_quality": r.mean_quality,
                        "estimate_bps": r.estimate_bps,
                        "savings": float(metrics.savings[seg]),
                    }
                )
    return rows


SUMMARY_COLUMNS = [
    "policy",
    "runs",
    "stall_mean",
    "stall_std",
    "quality_mean",
    "quality_std",
    "savings_mean",
]


def policy_summary_rows(rows: list[dict]) -> list[dict]:
    """Per-policy aggregates, computed only from flattened segment rows so a
    verifier can reproduce them from the CSV alone."""
    policies: list[str] = []
    for row in rows:
        if row["policy"] not in policies:
            policies.append(row["policy"])
    out = []
    for policy in policies:
        mine = [r for r in rows if r["policy"] == policy]
        iterations = sorted({r["iteration"] for r in mine})
        stalls = np.array(
            [sum(r["stall"] for r in mine if r["iteration"] == i) for i in iterations]
        )
        quality = np.array(
            [
                np.mean([r["mean_quality"] for r in mine if r["iteration"] == i])
                for i in iterations
            ]
        )
        out.append(
            {
                "policy": policy,
                "runs": len(iterations),
                "stall_mean": float(stalls.mean()),
                "stall_std": float(stalls.std()),
                "quality_mean": float(quality.mean()),
                "quality_std": float(quality.std()),
                "savings_mean": float(np.mean([r["savings"] for r in mine])),
            }
        )
    return out


SHARE_COLUMNS = ["policy", "segment", "popularity_share"]


def popularity_share_rows(rows: list[dict]) -> list[dict]:
    """Fraction of iterations whose active mechanism was popularity, per
    (policy, segment)."""
    out = []
    seen: list[tuple[str, int]] = []
    for row in rows:
        key = (row["policy"], row["segment"])
        if key not in seen:
            seen.append(key)
    for policy, segment in seen:
        mine = [
            r for r in rows if r["policy"] == policy and r["segment"] == segment
        ]
        share = float(
            np.mean([1.0 if r["active"] == "popularity" else 0.0 for r in mine])
        )
        out.append({"policy": policy, "segment": segment, "popularity_share": share})
    return out


ESTIMATE_COLUMNS = ["policy", "segment", "estimate_mean", "estimate_std"]


def estimate_rows(rows: list[dict]) -> list[dict]:
    """Mean/std of the bandwidth-estimate trajectory per (policy, segment),
    over the iterations that had an estimate."""
    out = []
    seen: list[tuple[str, int]] = []
    for row in rows:
        key = (row["policy"], row["segment"])
        if key not in seen:
            seen.append(key)
    for policy, segment in seen:
        values = [
            r["estimate_bps"]
            for r in rows
            if r["policy"] == policy
            and r["segment"] == segment
            and r["estimate_bps"] is not None
        ]
        if values:
            arr = np.array(values, dtype=float)
            mean: float | None = float(arr.mean())
            std: float | None = float(arr.std())
        else:
            mean = std = None
        out.append(
            {
                "policy": policy,
                "segment": segment,
                "estimate_mean": mean,
                "estimate_std": std,
            }
        )
    return out
