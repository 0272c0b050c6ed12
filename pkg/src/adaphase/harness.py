"""Monte-Carlo sweeps over input phase and sample budget, with file emission.

Seeds: the k-th protocol run of a sweep (ordered by N_tot, then phase, then
repetition) uses ``master_seed XOR k``. Adaptive and non-adaptive runs with
the same k share a seed, so the two modes see paired noise.

Emitted CSV columns are fixed by ``RUN_COLUMNS``, ``PHASE_SUMMARY_COLUMNS``,
``N_SUMMARY_COLUMNS`` and ``BOUNDS_COLUMNS``. Floats are written with
``repr`` so files round-trip exactly and are byte-stable for a given seed.
"""
from __future__ import annotations

import json
import math
import os
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .bayes import ExactEngine
from .errors import InvalidConfigError
from .gaussian import (
    SqueezedThermalProbe,
    bounds_report,
    mean_photons,
    optimal_phase,
    probe_from_db,
    qfi_coherent,
    qfi_pure,
)
from .grid import HALF_PI, PhaseGrid
from .homodyne import RandomStream, derive_seed
from .protocol import DEFAULT_ROUGH_FRACTION, ProtocolConfig, run

PAPER_SQUEEZING_DB = (5.69, 11.83)
DEFAULT_PHASES = tuple(k * math.pi / 14 for k in range(1, 8))
DEFAULT_N_TOT = (1000, 3000, 10000, 30000)
DEFAULT_REPETITIONS = 80
MODES = ("adaptive", "nonadaptive")
ENGINES = ("exact", "lut")

RUN_COLUMNS = (
    "n_tot", "phase_index", "true_phase", "mode", "repetition", "seed",
    "rough_estimate", "feedback_shift", "corrected_phase", "final_stage_estimate",
    "final_estimate", "final_error", "posterior_variance", "clamped", "m_rough", "m_final",
)
BOUND_FIELDS = ("sql", "qcr_coherent", "ocr", "qcr_pure")
PHASE_SUMMARY_COLUMNS = (
    "n_tot", "true_phase", "mode", "repetitions",
    "mean_var", "std_var", "mse", "clamp_rate", *BOUND_FIELDS,
)
N_SUMMARY_COLUMNS = (
    "n_tot", "mode", "n_phases", "repetitions",
    "mean_var", "std_var", "mse", "clamp_rate", *BOUND_FIELDS,
)
BOUNDS_COLUMNS = ("phase", "fisher", "cr_bound")


@dataclass
class SweepSpec:
    probe: SqueezedThermalProbe = field(default_factory=lambda: probe_from_db(*PAPER_SQUEEZING_DB))
    phases: tuple[float, ...] = DEFAULT_PHASES
    n_tot_values: tuple[int, ...] = DEFAULT_N_TOT
    repetitions: int = DEFAULT_REPETITIONS
    rough_fraction: float = DEFAULT_ROUGH_FRACTION
    modes: tuple[str, ...] = MODES
    engine: str = "exact"
    master_seed: int = 0
    grid_points: int = 2048
    workers: int = 1

    def __post_init__(self):
        self.phases = tuple(float(p) for p in self.phases)
        self.n_tot_values = tuple(int(n) for n in self.n_tot_values)
        self.modes = tuple(self.modes)
        if not self.phases or not self.n_tot_values or not self.modes:
            raise InvalidConfigError("phases, n_tot_values and modes must be non-empty")
        if self.repetitions < 2:
            raise InvalidConfigError(f"repetitions must be >= 2, got {self.repetitions}")
        if any(not 0.0 < p <= HALF_PI for p in self.phases):
            raise InvalidConfigError(f"phases must lie in (0, pi/2]: {self.phases}")
        bad = set(self.modes) - set(MODES)
        if bad:
            raise InvalidConfigError(f"unknown modes {sorted(bad)}; expected {MODES}")
        if self.engine not in ENGINES:
            raise InvalidConfigError(f"unknown engine {self.engine!r}; expected one of {ENGINES}")
        if self.workers < 1:
            raise InvalidConfigError("workers must be >= 1")
        optimal_phase(self.probe)
        # validates the budgets up front so no run fails halfway
        for n in self.n_tot_values:
            for mode in self.modes:
                self.protocol_config(n, mode)
        self.grid

    @property
    def grid(self) -> PhaseGrid:
        return PhaseGrid(self.grid_points)

    def protocol_config(self, n_tot: int, mode: str, seed: int = 0) -> ProtocolConfig:
        return ProtocolConfig(
            n_tot=n_tot,
            rough_fraction=self.rough_fraction,
            grid=self.grid,
            adaptive=mode == "adaptive",
            seed=seed,
        )

    def echo(self) -> dict:
        d = asdict(self)
        d["probe"] = {"r": self.probe.r, "n_th": self.probe.n_th}
        d["phases"] = list(self.phases)
        d["n_tot_values"] = list(self.n_tot_values)
        d["modes"] = list(self.modes)
        d.pop("workers")
        return d


@dataclass
class RunSummary:
    n_tot: int
    mode: str
    repetitions: int
    mean_var: float
    std_var: float
    mse: float
    clamp_rate: float
    sql: float
    qcr_coherent: float
    ocr: float
    qcr_pure: float
    true_phase: float | None = None
    n_phases: int = 1

    def row(self, columns) -> dict:
        d = asdict(self)
        return {c: d[c] for c in columns}


def make_engine(spec: SweepSpec):
    if spec.engine == "lut":
        from .lut import LutEngine

        return LutEngine.for_probe(spec.probe, spec.grid)
    return ExactEngine(spec.probe, spec.grid)


def _run_block(args):
    spec, n_idx, p_idx = args
    n_tot = spec.n_tot_values[n_idx]
    phase = spec.phases[p_idx]
    engine = make_engine(spec)
    base = (n_idx * len(spec.phases) + p_idx) * spec.repetitions
    rows = []
    for mode in spec.modes:
        for rep in range(spec.repetitions):
            seed = derive_seed(spec.master_seed, base + rep)
            cfg = spec.protocol_config(n_tot, mode, seed)
            rec = run(spec.probe, phase, cfg, RandomStream(seed), engine)
            row = {"n_tot": n_tot, "phase_index": p_idx, "true_phase": phase, "mode": mode,
                   "repetition": rep, "seed": seed}
            d = rec.as_dict()
            row.update({c: d[c] for c in RUN_COLUMNS if c in d})
            rows.append(row)
    return rows


def run_records(spec: SweepSpec) -> list[dict]:
    """Every protocol run of the sweep, in a fixed order independent of ``workers``."""
    blocks = [(spec, i, j) for i in range(len(spec.n_tot_values)) for j in range(len(spec.phases))]
    if spec.workers > 1:
        with ProcessPoolExecutor(max_workers=spec.workers) as pool:
            results = list(pool.map(_run_block, blocks))
    else:
        results = [_run_block(b) for b in blocks]
    rows = [r for block in results for r in block]
    order = {m: k for k, m in enumerate(spec.modes)}
    rows.sort(key=lambda r: (r["n_tot"], r["phase_index"], order[r["mode"]], r["repetition"]))
    return [{c: r[c] for c in RUN_COLUMNS} for r in rows]


def _stats(rows):
    var = np.array([r["posterior_variance"] for r in rows])
    err = np.array([r["final_error"] for r in rows])
    clamps = sum(bool(r["clamped"]) for r in rows)
    return float(var.mean()), float(var.std(ddof=1)), float(np.mean(err**2)), clamps / len(rows)


def _bounds(spec, n_tot):
    rep = bounds_report(spec.probe, n_tot, spec.grid)
    return {k: getattr(rep, k) for k in BOUND_FIELDS}


def summarize_by_phase(spec: SweepSpec, rows: list[dict]) -> list[RunSummary]:
    out = []
    for n_tot in spec.n_tot_values:
        bounds = _bounds(spec, n_tot)
        for p_idx, phase in enumerate(spec.phases):
            for mode in spec.modes:
                sel = [r for r in rows if r["n_tot"] == n_tot and r["phase_index"] == p_idx and r["mode"] == mode]
                mean_var, std_var, mse, clamp_rate = _stats(sel)
                out.append(RunSummary(n_tot, mode, len(sel), mean_var, std_var, mse, clamp_rate,
                                      true_phase=phase, **bounds))
    return out


def summarize_by_n(spec: SweepSpec, rows: list[dict]) -> list[RunSummary]:
    """Pool all phases at each N_tot.

    ``std_var`` is the per-phase standard deviation over repetitions, averaged
    over phases (the error bar convention of the variance-vs-N figure).
    """
    out = []
    for n_tot in spec.n_tot_values:
        bounds = _bounds(spec, n_tot)
        for mode in spec.modes:
            sel = [r for r in rows if r["n_tot"] == n_tot and r["mode"] == mode]
            mean_var, _, mse, clamp_rate = _stats(sel)
            per_phase = [
                _stats([r for r in sel if r["phase_index"] == p])[1] for p in range(len(spec.phases))
            ]
            out.append(RunSummary(n_tot, mode, spec.repetitions, mean_var, float(np.mean(per_phase)),
                                  mse, clamp_rate, n_phases=len(spec.phases), **bounds))
    return out


def loglog_slope(x, y) -> tuple[float, float]:
    """Least-squares (slope, intercept) of log y against log x."""
    slope, intercept = np.polyfit(np.log(np.asarray(x, float)), np.log(np.asarray(y, float)), 1)
    return float(slope), float(intercept)


def _fmt(v) -> str:
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, float):
        return repr(v)
    return str(v)


def to_csv(rows, columns) -> str:
    lines = [",".join(columns)]
    lines += [",".join(_fmt(r[c]) for c in columns) for r in rows]
    return "\n".join(lines) + "\n"


def write_atomic(files: dict[Path, str]) -> None:
    """Write every file via temp file + rename; nothing is renamed until all are written."""
    staged = []
    try:
        for path, text in files.items():
            path.parent.mkdir(parents=True, exist_ok=True)
            fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
            with os.fdopen(fd, "w", newline="") as fh:
                fh.write(text)
            staged.append((tmp, path))
        for tmp, path in staged:
            os.replace(tmp, path)
    finally:
        for tmp, _ in staged:
            if os.path.exists(tmp):
                os.unlink(tmp)


def _meta(spec: SweepSpec, kind: str, extra: dict | None = None) -> str:
    meta = {
        "kind": kind,
        "version": __version__,
        "numpy": np.__version__,
        "seed_rule": "seed = master_seed XOR run_index; run_index = (n_index*P + phase_index)*R + repetition",
        "mean_photons": mean_photons(spec.probe),
        "optimal_phase": optimal_phase(spec.probe),
        "spec": spec.echo(),
    }
    meta.update(extra or {})
    return json.dumps(meta, indent=2, sort_keys=True) + "\n"


@dataclass
class SweepResult:
    summaries: list[RunSummary]
    runs: list[dict]
    meta: dict
    files: list[Path] = field(default_factory=list)


def sweep_phase(spec: SweepSpec, out_dir=None, prefix: str = "sweep_phase") -> SweepResult:
    """Variance against input phase at a single N_tot."""
    if len(spec.n_tot_values) != 1:
        raise InvalidConfigError("sweep_phase needs exactly one N_tot value")
    runs = run_records(spec)
    summaries = summarize_by_phase(spec, runs)
    meta_text = _meta(spec, "sweep-phase")
    files = {}
    if out_dir is not None:
        out = Path(out_dir)
        files = {
            out / f"{prefix}_runs.csv": to_csv(runs, RUN_COLUMNS),
            out / f"{prefix}_summary.csv": to_csv([s.row(PHASE_SUMMARY_COLUMNS) for s in summaries],
                                                  PHASE_SUMMARY_COLUMNS),
            out / f"{prefix}_meta.json": meta_text,
        }
        write_atomic(files)
    return SweepResult(summaries, runs, json.loads(meta_text), list(files))


def sweep_n(spec: SweepSpec, out_dir=None, prefix: str = "sweep_n") -> SweepResult:
    """Variance against N_tot, pooled over all input phases, with bound curves."""
    runs = run_records(spec)
    summaries = summarize_by_n(spec, runs)
    slopes = {}
    if len(spec.n_tot_values) >= 2:
        for mode in spec.modes:
            sel = [s for s in summaries if s.mode == mode]
            slopes[mode] = loglog_slope([s.n_tot for s in sel], [s.mean_var for s in sel])[0]
    meta_text = _meta(spec, "sweep-n", {"loglog_slope": slopes})
    files = {}
    if out_dir is not None:
        out = Path(out_dir)
        files = {
            out / f"{prefix}_runs.csv": to_csv(runs, RUN_COLUMNS),
            out / f"{prefix}_summary.csv": to_csv([s.row(N_SUMMARY_COLUMNS) for s in summaries],
                                                  N_SUMMARY_COLUMNS),
            out / f"{prefix}_meta.json": meta_text,
        }
        write_atomic(files)
    return SweepResult(summaries, runs, json.loads(meta_text), list(files))


def emit_bounds(probe: SqueezedThermalProbe, n_samples: int, grid: PhaseGrid | None = None,
                out_dir=None, prefix: str = "bounds") -> tuple[str, dict]:
    """Fisher-information curve and scalar bounds, ready for plotting.

    Returns the curve CSV text and a dict of scalars (reference QFI lines,
    optimal phase, variance bounds).
    """
    grid = grid or PhaseGrid()
    rep = bounds_report(probe, n_samples, grid)
    rows = []
    for phi, f in rep.fisher_curve:
        rows.append({"phase": phi, "fisher": f, "cr_bound": 1.0 / (n_samples * f) if f > 0 else math.inf})
    csv_text = to_csv(rows, BOUNDS_COLUMNS)
    scalars = rep.scalars()
    scalars.update({
        "qfi_pure": qfi_pure(probe.r),
        "qfi_coherent": qfi_coherent(rep.mean_n),
        "fisher_peak_grid_phase": max(rep.fisher_curve, key=lambda t: t[1])[0],
    })
    if out_dir is not None:
        out = Path(out_dir)
        write_atomic({
            out / f"{prefix}_curve.csv": csv_text,
            out / f"{prefix}.json": json.dumps(scalars, indent=2, sort_keys=True) + "\n",
        })
    return csv_text, scalars
