"""Closed-form statistics of a single-mode squeezed thermal probe.

Variances are in vacuum-noise units (vacuum quadrature variance = 1), and all
decibel figures are 10*log10 of variance ratios relative to vacuum.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import DegenerateProbeError, InvalidConfigError
from .grid import PhaseGrid


@dataclass(frozen=True)
class SqueezedThermalProbe:
    r: float
    n_th: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.r) and self.r >= 0):
            raise InvalidConfigError(f"squeezing parameter must be >= 0, got {self.r}")
        if not (math.isfinite(self.n_th) and self.n_th >= 0):
            raise InvalidConfigError(f"thermal photon number must be >= 0, got {self.n_th}")

    @property
    def tag(self) -> tuple[float, float]:
        return (self.r, self.n_th)


def quadrature_variance(probe: SqueezedThermalProbe, phi):
    """Homodyne variance at relative phase ``phi``.

    (2 n_th + 1) * (exp(-2r) cos^2 phi + exp(2r) sin^2 phi); scalar or array.
    """
    phi = np.asarray(phi, dtype=float)
    c2 = np.cos(phi) ** 2
    s2 = np.sin(phi) ** 2
    v = (2.0 * probe.n_th + 1.0) * (math.exp(-2.0 * probe.r) * c2 + math.exp(2.0 * probe.r) * s2)
    return v if v.ndim else float(v)


def probe_from_db(squeezed_db: float, antisqueezed_db: float) -> SqueezedThermalProbe:
    """Recover (r, n_th) from measured squeezing / anti-squeezing levels.

    ``squeezed_db`` is the noise reduction below vacuum (positive number),
    ``antisqueezed_db`` the excess above vacuum.
    """
    v_sq = 10.0 ** (-squeezed_db / 10.0)
    v_as = 10.0 ** (antisqueezed_db / 10.0)
    product = v_sq * v_as
    # tolerate round-off for exactly pure inputs such as (6.0206, 6.0206)
    if product < 1.0 - 1e-12:
        raise InvalidConfigError(
            f"uncertainty product {product:.6g} < 1: ({squeezed_db} dB, {antisqueezed_db} dB) is unphysical"
        )
    r = 0.25 * math.log(v_as / v_sq)
    n_th = max(0.0, (math.sqrt(product) - 1.0) / 2.0)
    return SqueezedThermalProbe(r=r, n_th=n_th)


def mean_photons(probe: SqueezedThermalProbe) -> float:
    return probe.n_th + (2.0 * probe.n_th + 1.0) * math.sinh(probe.r) ** 2


def fisher_info(probe: SqueezedThermalProbe, phi):
    """Per-sample homodyne Fisher information about ``phi``.

    For a zero-mean Gaussian the Fisher information is
    (1/2) (d ln sigma^2 / d phi)^2, which gives

        2 sinh^2(2r) sin^2(2 phi) / (exp(-2r) cos^2 phi + exp(2r) sin^2 phi)^2.

    The thermal prefactor cancels in the logarithmic derivative, so the result
    does not depend on ``n_th``.
    """
    phi = np.asarray(phi, dtype=float)
    r = probe.r
    denom = math.exp(-2.0 * r) * np.cos(phi) ** 2 + math.exp(2.0 * r) * np.sin(phi) ** 2
    f = 2.0 * math.sinh(2.0 * r) ** 2 * np.sin(2.0 * phi) ** 2 / denom**2
    return f if f.ndim else float(f)


def optimal_phase(probe: SqueezedThermalProbe) -> float:
    """Phase in (0, pi/2) where the homodyne Fisher information peaks."""
    if probe.r <= 0:
        raise DegenerateProbeError("unsqueezed probe: Fisher information vanishes at every phase")
    return math.atan(math.exp(-2.0 * probe.r))


def qfi_pure(r: float) -> float:
    """Quantum Fisher information of a pure squeezed vacuum, 2 sinh^2(2r)."""
    if r < 0:
        raise InvalidConfigError(f"squeezing parameter must be >= 0, got {r}")
    return 2.0 * math.sinh(2.0 * r) ** 2


def qfi_coherent(mean_n: float) -> float:
    if mean_n < 0:
        raise InvalidConfigError(f"mean photon number must be >= 0, got {mean_n}")
    return 4.0 * mean_n


def pure_equivalent_r(mean_n: float) -> float:
    """Squeezing of the pure squeezed vacuum carrying ``mean_n`` photons."""
    return math.asinh(math.sqrt(mean_n))


@dataclass
class BoundsReport:
    probe: SqueezedThermalProbe
    n_samples: int
    mean_n: float
    optimal_phase: float
    fisher_max: float
    ocr: float
    qcr_pure: float
    qcr_coherent: float
    sql: float
    heisenberg_ref: float
    fisher_curve: list[tuple[float, float]] = field(repr=False)

    def scalars(self) -> dict:
        d = asdict(self)
        d.pop("fisher_curve")
        d["probe"] = {"r": self.probe.r, "n_th": self.probe.n_th}
        return d


def bounds_report(
    probe: SqueezedThermalProbe, n_samples: int, grid: PhaseGrid | None = None
) -> BoundsReport:
    """Fisher curve on ``grid`` plus every variance bound for ``n_samples`` probes.

    ``qcr_pure`` is the pure squeezed vacuum of the same mean energy, i.e.
    1 / (N * 8 <n> (<n> + 1)); ``heisenberg_ref`` is 1 / (N <n>^2).
    """
    if n_samples < 1:
        raise InvalidConfigError(f"n_samples must be >= 1, got {n_samples}")
    grid = grid or PhaseGrid()
    phi_opt = optimal_phase(probe)
    n = mean_photons(probe)
    if n <= 0:
        raise DegenerateProbeError("zero-energy probe: energy-referenced bounds are undefined")
    f_max = fisher_info(probe, phi_opt)
    curve = fisher_info(probe, grid.values)
    return BoundsReport(
        probe=probe,
        n_samples=n_samples,
        mean_n=n,
        optimal_phase=phi_opt,
        fisher_max=f_max,
        ocr=1.0 / (n_samples * f_max),
        qcr_pure=1.0 / (n_samples * qfi_pure(pure_equivalent_r(n))),
        qcr_coherent=1.0 / (n_samples * qfi_coherent(n)),
        sql=1.0 / (2.0 * n_samples * n),
        heisenberg_ref=1.0 / (n_samples * n**2),
        fisher_curve=list(zip(grid.values.tolist(), curve.tolist())),
    )
