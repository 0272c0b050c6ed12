import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from adaphase import (
    DegenerateProbeError,
    InvalidConfigError,
    PhaseGrid,
    SqueezedThermalProbe,
    bounds_report,
    fisher_info,
    mean_photons,
    optimal_phase,
    probe_from_db,
    qfi_coherent,
    qfi_pure,
    quadrature_variance,
)
from oracles import quadrature_fisher, ref_variance

# frozen from tests/oracles.py (quadrature + complex-step score)
FISHER_PI4_R10084 = 1.8632046639673
FISHER_OPT_R10084 = 27.240762996803


r_values = st.floats(0.0, 2.5)
n_values = st.floats(0.0, 5.0)
phases = st.floats(-10.0, 10.0)


def test_vacuum_variance_is_one():
    assert quadrature_variance(SqueezedThermalProbe(0, 0), 0.7) == pytest.approx(1.0, abs=1e-15)


def test_paper_probe_endpoints_match_db(paper_probe):
    assert quadrature_variance(paper_probe, 0.0) == pytest.approx(10 ** (-0.569), rel=1e-12)
    assert quadrature_variance(paper_probe, math.pi / 2) == pytest.approx(10 ** 1.183, rel=1e-12)


def test_rounded_paper_parameters():
    p = SqueezedThermalProbe(1.0084, 0.5139)
    assert quadrature_variance(p, 0.0) == pytest.approx(0.2698, abs=1e-4)
    assert quadrature_variance(p, math.pi / 2) == pytest.approx(15.24, abs=5e-3)


def test_variance_array_broadcast(paper_probe):
    phi = np.linspace(0, 3, 7)
    got = quadrature_variance(paper_probe, phi)
    assert got.shape == (7,)
    np.testing.assert_allclose(got, ref_variance(paper_probe.r, paper_probe.n_th, phi), rtol=1e-14)


@given(r=r_values, n=n_values, phi=phases)
def test_variance_periodic_and_even(r, n, phi):
    p = SqueezedThermalProbe(r, n)
    v = quadrature_variance(p, phi)
    assert v > 0
    assert quadrature_variance(p, -phi) == pytest.approx(v, rel=1e-12)
    assert quadrature_variance(p, phi + math.pi) == pytest.approx(v, rel=1e-9)


@given(r=r_values, n=n_values)
def test_uncertainty_product(r, n):
    p = SqueezedThermalProbe(r, n)
    prod = quadrature_variance(p, 0.0) * quadrature_variance(p, math.pi / 2)
    assert prod == pytest.approx((2 * n + 1) ** 2, rel=1e-12)
    assert prod >= 1 - 1e-12


def test_probe_validation():
    with pytest.raises(InvalidConfigError):
        SqueezedThermalProbe(-0.1, 0)
    with pytest.raises(InvalidConfigError):
        SqueezedThermalProbe(0.1, -1)


class TestProbeFromDb:
    def test_vacuum(self):
        p = probe_from_db(0, 0)
        assert p.r == 0 and p.n_th == 0

    def test_paper(self, paper_probe):
        assert paper_probe.r == pytest.approx(1.0084, abs=2e-4)
        assert paper_probe.n_th == pytest.approx(0.5139, abs=1e-4)

    def test_pure_6db(self, pure6db):
        assert pure6db.r == pytest.approx(math.log(16) / 4, rel=1e-12)
        assert pure6db.r == pytest.approx(0.6931, abs=1e-4)
        assert pure6db.n_th == pytest.approx(0.0, abs=1e-12)

    @given(sq=st.floats(0, 15), extra=st.floats(0, 15))
    def test_round_trip(self, sq, extra):
        anti = sq + extra
        p = probe_from_db(sq, anti)
        assert quadrature_variance(p, 0.0) == pytest.approx(10 ** (-sq / 10), rel=1e-12)
        assert quadrature_variance(p, math.pi / 2) == pytest.approx(10 ** (anti / 10), rel=1e-12)

    def test_rejects_unphysical(self):
        with pytest.raises(InvalidConfigError):
            probe_from_db(6.0, 3.0)


class TestMeanPhotons:
    def test_vacuum_and_thermal(self):
        assert mean_photons(SqueezedThermalProbe(0, 0)) == 0
        assert mean_photons(SqueezedThermalProbe(0, 2)) == 2

    def test_paper_energy(self, paper_probe):
        n = mean_photons(paper_probe)
        # <n> = ((V_sq + V_as)/2 - 1)/2 from the dB pair
        assert n == pytest.approx(((10 ** -0.569 + 10 ** 1.183) / 2 - 1) / 2, rel=1e-12)
        assert n == pytest.approx(3.38, abs=0.005)

    def test_gap_to_reported_energy_is_db_rounding(self):
        # the reported 3.30 +- 0.07 is reachable inside the +-0.005 dB rounding box
        # combined with the quoted +-0.07/+-0.09 dB measurement errors
        lows = [mean_photons(probe_from_db(5.69 + a, 11.83 + b))
                for a in (-0.07, 0.07) for b in (-0.09, 0.09)]
        assert min(lows) < 3.30 + 0.07


class TestFisher:
    def test_zero_at_axes(self, paper_probe):
        assert fisher_info(paper_probe, 0.0) == 0
        assert fisher_info(paper_probe, math.pi / 2) == pytest.approx(0, abs=1e-25)

    def test_pi_over_4(self):
        assert fisher_info(SqueezedThermalProbe(1.0084, 0.5139), math.pi / 4) == pytest.approx(
            FISHER_PI4_R10084, rel=1e-10)

    def test_peak_value(self):
        p = SqueezedThermalProbe(1.0084, 0.0)
        assert fisher_info(p, math.atan(math.exp(-2 * 1.0084))) == pytest.approx(FISHER_OPT_R10084, rel=1e-10)
        assert qfi_pure(1.0084) == pytest.approx(FISHER_OPT_R10084, rel=1e-10)

    @pytest.mark.parametrize("phi", np.linspace(0.05, 1.5, 9))
    @pytest.mark.parametrize("r,n", [(1.0084, 0.5139), (0.3, 0.0), (1.7, 2.0)])
    def test_matches_quadrature_oracle(self, r, n, phi):
        p = SqueezedThermalProbe(r, n)
        assert fisher_info(p, phi) == pytest.approx(quadrature_fisher(r, n, phi), rel=1e-6)

    @given(r=r_values, phi=st.floats(-3, 3))
    def test_symmetries(self, r, phi):
        p = SqueezedThermalProbe(r, 0.0)
        f = fisher_info(p, phi)
        assert fisher_info(p, -phi) == pytest.approx(f, rel=1e-12, abs=1e-300)
        assert fisher_info(p, math.pi - phi) == pytest.approx(f, rel=1e-9, abs=1e-12)

    def test_independent_of_thermal_noise(self, paper_probe):
        phi = np.linspace(0, math.pi / 2, 501)
        ref = fisher_info(SqueezedThermalProbe(paper_probe.r, 0.0), phi)
        rng = np.random.default_rng(7)
        for n in rng.uniform(0, 10, 100):
            np.testing.assert_allclose(fisher_info(SqueezedThermalProbe(paper_probe.r, n), phi),
                                       ref, rtol=1e-12, atol=0)

    @pytest.mark.parametrize("r", [0.2, 0.6931, 1.0085, 1.5])
    def test_grid_max_is_pure_qfi(self, r):
        p = SqueezedThermalProbe(r, 0.3)
        phi = np.linspace(0, math.pi / 2, 10**5)
        f = fisher_info(p, phi)
        j = int(np.argmax(f))
        assert f[j] == pytest.approx(qfi_pure(r), rel=1e-8)
        assert abs(phi[j] - optimal_phase(p)) <= phi[1] - phi[0]

    @given(r=st.floats(0.05, 2.0), phi=st.floats(0.0, math.pi / 2), n=st.integers(1, 10**6))
    def test_cramer_rao_chain(self, r, phi, n):
        p = SqueezedThermalProbe(r, 0.0)
        f = fisher_info(p, phi)
        assert f <= qfi_pure(r) * (1 + 1e-12)


class TestOptimalPhase:
    def test_paper_value(self, paper_probe):
        assert optimal_phase(paper_probe) == pytest.approx(0.132, abs=0.001)
        assert optimal_phase(SqueezedThermalProbe(1.0084)) == pytest.approx(0.1323, abs=1e-4)

    def test_pure_6db(self, pure6db):
        phi = np.linspace(0, math.pi / 2, 10**6)
        brute = phi[np.argmax(fisher_info(pure6db, phi))]
        assert optimal_phase(pure6db) == pytest.approx(math.atan(0.25), rel=1e-10)
        assert optimal_phase(pure6db) == pytest.approx(brute, abs=2e-6)
        assert optimal_phase(pure6db) == pytest.approx(0.2450, abs=1e-4)

    def test_small_r_approaches_pi_over_4(self):
        assert optimal_phase(SqueezedThermalProbe(1e-9)) == pytest.approx(math.pi / 4, abs=1e-8)

    def test_degenerate(self, vacuum):
        with pytest.raises(DegenerateProbeError):
            optimal_phase(vacuum)


class TestQfi:
    def test_pure(self):
        assert qfi_pure(0) == 0
        assert qfi_pure(1.0084) == pytest.approx(27.24, abs=0.01)

    def test_hyperbolic_identity(self):
        rng = np.random.default_rng(1)
        for r in rng.uniform(0, 3, 100):
            n = math.sinh(r) ** 2
            assert 8 * n * (n + 1) == pytest.approx(qfi_pure(r), rel=1e-12)

    def test_coherent(self):
        assert qfi_coherent(0) == 0
        assert qfi_coherent(1) == 4
        assert qfi_coherent(3.30) == pytest.approx(13.2)
        with pytest.raises(InvalidConfigError):
            qfi_coherent(-1)


class TestBoundsReport:
    def test_paper_values(self, paper_probe):
        rep = bounds_report(paper_probe, 10**4)
        n = mean_photons(paper_probe)
        assert rep.sql == pytest.approx(1 / (2e4 * n), rel=1e-12)
        assert rep.sql == pytest.approx(1.48e-5, rel=0.01)
        assert rep.qcr_coherent == pytest.approx(7.4e-6, rel=0.01)
        assert rep.ocr == pytest.approx(3.67e-6, rel=0.01)
        assert rep.qcr_pure == pytest.approx(1 / (1e4 * 8 * n * (n + 1)), rel=1e-12)
        assert rep.qcr_pure == pytest.approx(8.4e-7, rel=0.02)
        assert rep.heisenberg_ref == pytest.approx(1 / (1e4 * n * n), rel=1e-12)

    def test_ordering(self, paper_probe):
        rep = bounds_report(paper_probe, 10**4)
        assert rep.sql > rep.qcr_coherent > rep.ocr > rep.qcr_pure > 0

    def test_curve(self, paper_probe):
        rep = bounds_report(paper_probe, 100, PhaseGrid(101))
        assert len(rep.fisher_curve) == 101
        assert rep.fisher_curve[0][1] == 0
        assert rep.fisher_curve[-1][1] == pytest.approx(0, abs=1e-25)
        assert all(f >= 0 for _, f in rep.fisher_curve)

    def test_halving(self, paper_probe):
        a, b = bounds_report(paper_probe, 1000), bounds_report(paper_probe, 2000)
        for k in ("sql", "qcr_coherent", "ocr", "qcr_pure", "heisenberg_ref"):
            assert getattr(b, k) == pytest.approx(getattr(a, k) / 2, rel=1e-12)

    def test_degenerate(self, vacuum, paper_probe):
        with pytest.raises(DegenerateProbeError):
            bounds_report(vacuum, 1)
        with pytest.raises(InvalidConfigError):
            bounds_report(paper_probe, 0)

    def test_scalars_serializable(self, paper_probe):
        import json

        d = bounds_report(paper_probe, 10).scalars()
        assert json.loads(json.dumps(d))["probe"]["r"] == paper_probe.r
