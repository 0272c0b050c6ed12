"""Fixed-point lookup-table streaming estimator.

Each quadrature sample is clipped and quantized to one of ``bins`` uniform
bins (mid-rise). A precomputed integer row of scaled log-likelihoods over the
phase grid is then added into int64 accumulators, so the per-sample work is
one table lookup and G integer additions. Floating point is only used when
the table is built and when the accumulators are finalized into a posterior.
"""
from __future__ import annotations

import hashlib
import math
import platform
import time
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .bayes import LOG_2PI, Posterior, log_likelihood
from .errors import CapacityError, InvalidConfigError
from .gaussian import SqueezedThermalProbe, quadrature_variance
from .grid import HALF_PI, PhaseGrid

ACC_MAX = np.iinfo(np.int64).max
DEFAULT_BINS = 4096
DEFAULT_SCALE = 1 << 20
DEFAULT_CLIP_SIGMAS = 6.0
TABLE_FORMAT = "adaphase-lut 1"


@dataclass(frozen=True)
class QuantizerSpec:
    x_min: float
    x_max: float
    bins: int = DEFAULT_BINS
    scale: int = DEFAULT_SCALE

    def __post_init__(self):
        if not self.x_min < self.x_max:
            raise InvalidConfigError(f"empty clipping range [{self.x_min}, {self.x_max}]")
        # bins == 1 is allowed as a degenerate quantizer that discards the data
        if self.bins < 1:
            raise InvalidConfigError(f"bins must be >= 1, got {self.bins}")
        if self.scale < 1 or self.scale & (self.scale - 1):
            raise InvalidConfigError(f"scale must be a power of two >= 1, got {self.scale}")

    @classmethod
    def for_probe(
        cls,
        probe: SqueezedThermalProbe,
        bins: int = DEFAULT_BINS,
        scale: int = DEFAULT_SCALE,
        clip_sigmas: float = DEFAULT_CLIP_SIGMAS,
    ) -> "QuantizerSpec":
        """Symmetric range of ``clip_sigmas`` times the largest quadrature std."""
        half = clip_sigmas * math.sqrt(quadrature_variance(probe, HALF_PI))
        return cls(-half, half, bins, scale)

    @property
    def width(self) -> float:
        return (self.x_max - self.x_min) / self.bins

    def centers(self) -> np.ndarray:
        # midpoint plus odd multiples of the half width: exactly antisymmetric for symmetric ranges
        mid = 0.5 * (self.x_min + self.x_max)
        half = 0.5 * (self.x_max - self.x_min)
        return mid + half * ((2.0 * np.arange(self.bins) + 1.0 - self.bins) / self.bins)

    def quantize(self, x):
        """Bin indices for ``x`` and a mask of samples that fell outside the range."""
        x = np.asarray(x, dtype=float)
        outside = (x < self.x_min) | (x > self.x_max)
        idx = np.clip(np.floor((x - self.x_min) / self.width), 0, self.bins - 1).astype(np.int64)
        return idx, outside


@dataclass(frozen=True)
class LikelihoodTable:
    grid: PhaseGrid
    quantizer: QuantizerSpec
    entries: np.ndarray = field(repr=False)
    probe_tag: tuple[float, float] = (0.0, 0.0)

    @cached_property
    def max_abs_entry(self) -> int:
        return max(int(np.abs(self.entries).max()), 1)

    @cached_property
    def capacity(self) -> int:
        """Largest sample count that can never overflow an int64 accumulator."""
        return ACC_MAX // self.max_abs_entry

    def dequantized(self) -> np.ndarray:
        return self.entries / self.quantizer.scale


def build_table(
    probe: SqueezedThermalProbe,
    grid: PhaseGrid | None = None,
    quantizer: QuantizerSpec | None = None,
    min_capacity: int = 1,
) -> LikelihoodTable:
    """Precompute round(scale * log p(center_b | phi_j)) for every bin and phase.

    Raises CapacityError when the scaled entries leave fewer than
    ``min_capacity`` samples of int64 headroom, or cannot be rounded exactly
    in double precision.
    """
    grid = grid or PhaseGrid()
    quantizer = quantizer or QuantizerSpec.for_probe(probe)
    ll = log_likelihood(quantizer.centers()[:, None], grid.values[None, :], probe)
    scaled = quantizer.scale * ll
    peak = float(np.abs(scaled).max())
    if not np.isfinite(peak) or peak >= 2.0**53:
        raise CapacityError(f"scale {quantizer.scale} too large: entries reach {peak:.3g}")
    entries = np.rint(scaled).astype(np.int64)
    table = LikelihoodTable(grid, quantizer, entries, probe.tag)
    table.entries.setflags(write=False)
    if table.capacity < min_capacity:
        raise CapacityError(
            f"accumulator capacity {table.capacity} below the requested {min_capacity} samples"
        )
    return table


@dataclass
class StreamState:
    accumulators: np.ndarray
    count: int = 0
    saturated: bool = False

    @classmethod
    def empty(cls, table: LikelihoodTable) -> "StreamState":
        return cls(np.zeros(table.grid.points, dtype=np.int64))


def _reserve(state: StreamState, table: LikelihoodTable, n: int):
    if state.accumulators.shape != (table.grid.points,):
        raise InvalidConfigError("stream state and table use different grids")
    if state.count + n > table.capacity:
        raise CapacityError(
            f"{state.count + n} samples exceed the overflow-safe capacity {table.capacity}"
        )


def stream_update(state: StreamState, table: LikelihoodTable, x: float) -> StreamState:
    """Fold one sample into the accumulators (in place; returns ``state``)."""
    _reserve(state, table, 1)
    q = table.quantizer
    b = math.floor((x - q.x_min) / q.width)
    if b < 0 or b >= q.bins:
        b = 0 if b < 0 else q.bins - 1
    if x < q.x_min or x > q.x_max:
        state.saturated = True
    state.accumulators += table.entries[b]
    state.count += 1
    return state


def stream_update_batch(state: StreamState, table: LikelihoodTable, xs) -> StreamState:
    """Same result as calling :func:`stream_update` on every element.

    Integer addition is exact, so adding histogram-count multiples of each row
    gives bit-identical accumulators regardless of sample order.
    """
    xs = np.asarray(xs, dtype=float)
    _reserve(state, table, len(xs))
    idx, outside = table.quantizer.quantize(xs)
    counts = np.bincount(idx, minlength=table.quantizer.bins)
    nz = np.flatnonzero(counts)
    state.accumulators += counts[nz] @ table.entries[nz]
    state.count += len(xs)
    state.saturated = state.saturated or bool(outside.any())
    return state


def finalize(state: StreamState, table: LikelihoodTable) -> Posterior:
    if state.count < 1:
        raise ValueError("cannot finalize a stream with no samples")
    return Posterior.from_log_weights(table.grid, state.accumulators / table.quantizer.scale)


class LutEngine:
    """Adapter so the protocol can run on the fixed-point path."""

    name = "lut"

    def __init__(self, table: LikelihoodTable):
        self.table = table

    @classmethod
    def for_probe(cls, probe, grid=None, **quantizer_kw) -> "LutEngine":
        grid = grid or PhaseGrid()
        return cls(build_table(probe, grid, QuantizerSpec.for_probe(probe, **quantizer_kw)))

    def estimate(self, samples) -> Posterior:
        state = stream_update_batch(StreamState.empty(self.table), self.table, samples)
        return finalize(state, self.table)


def dump_table(table: LikelihoodTable, path) -> None:
    """Write the table as text: ``key value`` header lines, then B rows of G integers."""
    q = table.quantizer
    header = [
        TABLE_FORMAT,
        f"G {table.grid.points}",
        f"B {q.bins}",
        f"scale {q.scale}",
        f"x_min {q.x_min!r}",
        f"x_max {q.x_max!r}",
        f"r {table.probe_tag[0]!r}",
        f"n_th {table.probe_tag[1]!r}",
    ]
    with open(path, "w") as fh:
        fh.write("\n".join(header) + "\n")
        np.savetxt(fh, table.entries, fmt="%d")


def load_table(path) -> LikelihoodTable:
    with open(path) as fh:
        if fh.readline().strip() != TABLE_FORMAT:
            raise ValueError(f"{path}: not a lookup-table dump")
        meta = dict(fh.readline().split() for _ in range(7))
        entries = np.loadtxt(fh, dtype=np.int64, ndmin=2)
    grid = PhaseGrid(int(meta["G"]))
    q = QuantizerSpec(float(meta["x_min"]), float(meta["x_max"]), int(meta["B"]), int(meta["scale"]))
    if entries.shape != (q.bins, grid.points):
        raise ValueError(f"{path}: expected {q.bins}x{grid.points} entries, got {entries.shape}")
    entries.setflags(write=False)
    return LikelihoodTable(grid, q, entries, (float(meta["r"]), float(meta["n_th"])))


def _machine() -> dict:
    return {
        "platform": platform.platform(),
        "machine": platform.machine(),
        "processor": platform.processor(),
        "python": platform.python_version(),
        "numpy": np.__version__,
    }


def bench_throughput(
    table: LikelihoodTable, m: int = 100_000, seed: int = 0, phase: float | None = None
) -> dict:
    """Per-sample update rate of the float and fixed-point paths on identical data.

    Both paths process the same ``m`` samples one at a time. Accuracy fields
    are deterministic; only the timing fields vary between runs.
    """
    if m < 100_000:
        raise ValueError(f"benchmark needs m >= 1e5 samples, got {m}")
    probe = SqueezedThermalProbe(*table.probe_tag)
    if phase is None:
        phase = math.atan(math.exp(-2.0 * probe.r)) if probe.r > 0 else 0.25 * math.pi
    rng = np.random.Generator(np.random.PCG64(seed))
    xs = math.sqrt(quadrature_variance(probe, phase)) * rng.standard_normal(m)
    grid = table.grid

    log_var = np.log(quadrature_variance(probe, grid.values))
    inv_two_var = 0.5 / quadrature_variance(probe, grid.values)
    acc_f = np.zeros(grid.points)
    t0 = time.perf_counter()
    for x in xs:
        acc_f += -0.5 * (LOG_2PI + log_var) - x * x * inv_two_var
    t_float = time.perf_counter() - t0

    state = StreamState.empty(table)
    t0 = time.perf_counter()
    for x in xs:
        stream_update(state, table, x)
    t_lut = time.perf_counter() - t0

    exact = Posterior.from_log_weights(grid, acc_f)
    approx = finalize(state, table)
    q = table.quantizer
    return {
        "G": grid.points,
        "B": q.bins,
        "scale": q.scale,
        "x_min": q.x_min,
        "x_max": q.x_max,
        "m": m,
        "seed": seed,
        "phase": phase,
        "machine": _machine(),
        "float": {"seconds": t_float, "updates_per_s": m / t_float, "latency_s": t_float / m},
        "lut": {"seconds": t_lut, "updates_per_s": m / t_lut, "latency_s": t_lut / m},
        "speedup": t_float / t_lut,
        "accuracy": {
            "exact_map": exact.map_phase,
            "lut_map": approx.map_phase,
            "map_steps_apart": round(abs(exact.map_phase - approx.map_phase) / grid.step),
            "exact_variance": exact.variance,
            "lut_variance": approx.variance,
            "variance_ratio": approx.variance / exact.variance,
            "saturated": state.saturated,
            "accumulator_sha256": hashlib.sha256(state.accumulators.tobytes()).hexdigest(),
        },
    }
