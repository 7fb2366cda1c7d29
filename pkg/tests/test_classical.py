import math

import numpy as np
import pytest

from bosewells.classical import (DomainError, HarmonicTestModel,
                                 IntegratorOptions, PhaseSpacePoint,
                                 eom_rhs, energy_series, hamiltonian_value,
                                 hessian, integrate_trajectory,
                                 separatrix_energy, separatrix_imbalance)
from bosewells.model import ModelParams, plasma_frequency

FIG1 = ModelParams(2, 100, 10.0, 1.0)     # Lambda = 10
FIG3 = ModelParams(2, 100, 10.0, 10.0)    # Lambda = 100
TRIPLE = ModelParams(3, 30, 10.0, 1.0)


def z2(q, p):
    return PhaseSpacePoint([q], [p])


class TestHamiltonFunction:
    def test_well_bottom(self):
        # j = 0, q = 0: H = -T N
        assert hamiltonian_value(FIG1, z2(0.0, 0.0)) == pytest.approx(-1000.0)

    def test_boundary_value(self):
        # j = N/2: tunneling term vanishes
        assert hamiltonian_value(FIG1, z2(0.3, 50.0)) == \
            pytest.approx(2 * 1.0 * 50.0 ** 2)

    def test_domain_error(self):
        with pytest.raises(DomainError):
            hamiltonian_value(FIG1, z2(0.0, 51.0))
        with pytest.raises(DomainError):
            hamiltonian_value(TRIPLE, PhaseSpacePoint([0, 0], [20.0, 15.0]))

    def test_separatrix(self):
        # hyperbolic point (q = pi, j = 0) fixes the self-trapping energy
        assert separatrix_energy(FIG1) == pytest.approx(
            hamiltonian_value(FIG1, z2(math.pi, 0.0)))
        # Lambda = 100 crossing at q = 0 lies at j = sqrt(99) ~ 10,
        # the displacement of the separatrix-straddling preparation
        jsep = separatrix_imbalance(FIG3)
        assert jsep == pytest.approx(math.sqrt(99))
        assert hamiltonian_value(FIG3, z2(0.0, jsep)) == \
            pytest.approx(separatrix_energy(FIG3))

    def test_triple_well_reduces_to_symmetric_value(self):
        # equal thirds, zero phases: H = 3U(N/3)^2 - 2T(2N/3)
        n = TRIPLE.n_total
        val = hamiltonian_value(TRIPLE, PhaseSpacePoint([0, 0], [n/3, n/3]))
        assert val == pytest.approx(3 * 1.0 * (n/3) ** 2 - 2 * 10.0 * (2*n/3))


class TestEom:
    def test_stable_fixed_point(self):
        dq, dp = eom_rhs(FIG1, z2(0.0, 0.0))
        assert dq[0] == 0.0 and dp[0] == 0.0

    def test_hyperbolic_fixed_point(self):
        dq, dp = eom_rhs(FIG1, z2(math.pi, 0.0))
        assert abs(dq[0]) < 1e-12 and abs(dp[0]) < 1e-12

    def test_linearized_frequency_is_plasma(self):
        h = hessian(FIG1, z2(0.0, 0.0))
        # diag(TN, 4U + 4T/N) at the origin
        assert h[0, 0] == pytest.approx(10.0 * 100)
        assert h[1, 1] == pytest.approx(4 * 1.0 + 4 * 10.0 / 100)
        assert h[0, 1] == 0.0
        omega = math.sqrt(h[0, 0] * h[1, 1])
        assert omega == pytest.approx(plasma_frequency(FIG1))

    def test_boundary_guard(self):
        with pytest.raises(DomainError):
            eom_rhs(FIG1, z2(0.0, 50.0 - 1e-8))

    @pytest.mark.parametrize("model,point", [
        (FIG1, z2(0.7, 21.0)),
        (FIG3, z2(-1.2, 8.0)),
        (TRIPLE, PhaseSpacePoint([0.4, -0.9], [11.0, 6.0])),
        (HarmonicTestModel(1.7), z2(0.3, -0.8)),
    ])
    def test_hessian_matches_finite_differences(self, model, point):
        h = hessian(model, point)
        assert np.allclose(h, h.T)
        d = point.dof
        eps = 1e-6
        for a in range(2 * d):
            zp = np.concatenate([point.q, point.p]).astype(float)
            zm = zp.copy()
            zp[a] += eps
            zm[a] -= eps
            gp = np.concatenate(eom_rhs(model, PhaseSpacePoint(zp[:d], zp[d:])))
            gm = np.concatenate(eom_rhs(model, PhaseSpacePoint(zm[:d], zm[d:])))
            # eom gives (dH/dp, -dH/dq); reorder to gradient rows
            grad_p = np.concatenate([-(gp[d:]), gp[:d]])
            grad_m = np.concatenate([-(gm[d:]), gm[:d]])
            fd = (grad_p - grad_m) / (2 * eps)
            assert np.allclose(fd, h[:, a], rtol=1e-6, atol=1e-6 * (1 + np.abs(h).max()))


class TestTrajectories:
    def test_fixed_point_record(self):
        times = np.linspace(0, 1, 11)
        bare = IntegratorOptions(ordering_correction=False)
        rec = integrate_trajectory(FIG1, z2(0.0, 0.0), times, opts=bare)
        assert rec.status == "alive"
        assert np.allclose(rec.q, 0) and np.allclose(rec.p, 0)
        # S = -H(0,0) t = TN t; monodromy symplectic throughout
        assert np.allclose(rec.action, 1000.0 * times, rtol=1e-10)
        assert np.allclose(rec.det_monodromy(), 1.0, atol=1e-9)
        assert np.allclose(rec.monodromy[0], np.eye(2))
        # with the ordering-corrected radius the action gains T per unit
        # time: S = T (N + 1) t
        rec2 = integrate_trajectory(FIG1, z2(0.0, 0.0), times)
        assert np.allclose(rec2.action, 1010.0 * times, rtol=1e-10)

    def test_energy_and_symplecticity(self):
        times = np.linspace(0, 50 * 2 * np.pi / plasma_frequency(FIG1), 501)
        rec = integrate_trajectory(FIG1, z2(0.4, 21.0), times)
        e = energy_series(FIG1, rec.q, rec.p, ordering_correction=True)
        assert np.max(np.abs(e - e[0])) / abs(e[0]) < 1e-8
        assert np.max(np.abs(rec.det_monodromy() - 1)) < 1e-6

    def test_time_reversal(self):
        times = np.linspace(0, 2.0, 21)
        rec = integrate_trajectory(FIG1, z2(0.8, 17.0), times)
        back = integrate_trajectory(
            FIG1, PhaseSpacePoint(rec.q[-1], -rec.p[-1]), times)
        assert abs(back.q[-1][0] - 0.8) < 1e-6
        assert abs(back.p[-1][0] + 17.0) < 1e-6

    def test_self_trapped_orbits_keep_sign(self):
        # H > 2NT trajectories never cross j = 0
        times = np.linspace(0, 3.0, 301)
        for j0 in (40.0, 44.0):
            z = z2(0.0, j0)
            assert hamiltonian_value(FIG3, z) > 2 * 100 * 10.0
            rec = integrate_trajectory(FIG3, z, times)
            assert rec.status == "alive"
            assert np.all(np.sign(rec.p) == 1.0)

    def test_monodromy_matches_flow_derivative(self):
        times = np.linspace(0, 1.0, 11)
        rec = integrate_trajectory(FIG1, z2(0.5, 12.0), times)
        eps = 1e-6
        for col, dz in [(1, (eps, 0.0)), (0, (0.0, eps))]:
            zp = integrate_trajectory(
                FIG1, z2(0.5 + dz[0], 12.0 + dz[1]), times)
            zm = integrate_trajectory(
                FIG1, z2(0.5 - dz[0], 12.0 - dz[1]), times)
            dq = (zp.q[-1][0] - zm.q[-1][0]) / (2 * eps)
            dp = (zp.p[-1][0] - zm.p[-1][0]) / (2 * eps)
            # block order: row 0 = dp(t)/d(p,q), row 1 = dq(t)/d(p,q)
            assert dp == pytest.approx(rec.monodromy[-1][0, col], rel=1e-4,
                                       abs=1e-6)
            assert dq == pytest.approx(rec.monodromy[-1][1, col], rel=1e-4,
                                       abs=1e-6)

    def test_escape_is_detected_and_frozen(self):
        # U = 0 with q0 = pi/2 has H equal to the boundary energy, so the
        # trajectory runs into the |j| = N/2 chart singularity
        rabi = ModelParams(2, 100, 10.0, 0.0)
        times = np.linspace(0, 0.5, 51)
        rec = integrate_trajectory(rabi, z2(math.pi / 2, 0.0), times)
        assert rec.status == "escaped"
        assert 0 < rec.n_valid < len(times)
        k = rec.n_valid
        assert np.all(rec.p[k:] == rec.p[max(k - 1, 0)])
        assert abs(rec.p[k - 1][0]) > 49.0

    def test_triple_well_conservation(self):
        times = np.linspace(0, 2.0, 201)
        z0 = PhaseSpacePoint([0.3, -0.2], [12.0, 9.0])
        rec = integrate_trajectory(TRIPLE, z0, times)
        assert rec.status == "alive"
        e = energy_series(TRIPLE, rec.q, rec.p, ordering_correction=True)
        assert np.max(np.abs(e - e[0])) / abs(e[0]) < 1e-8
        assert np.max(np.abs(rec.det_monodromy() - 1)) < 1e-6

    def test_harmonic_monodromy_analytic(self):
        omega = 2.0
        times = np.linspace(0, 3.0, 31)
        rec = integrate_trajectory(HarmonicTestModel(omega), z2(0.5, 1.0),
                                   times)
        # dq(t)/dq = cos(wt), dq(t)/dp = sin(wt)/w
        assert np.allclose(rec.monodromy[:, 1, 1], np.cos(omega * times),
                           atol=1e-9)
        assert np.allclose(rec.monodromy[:, 1, 0],
                           np.sin(omega * times) / omega, atol=1e-9)

    def test_unwrapped_coordinates(self):
        # self-trapped orbit: the running phase grows without mod-2pi
        # wrapping (dq/dt ~ 4Uj stays positive and large)
        times = np.linspace(0, 2.0, 201)
        rec = integrate_trajectory(FIG3, z2(0.0, 40.0), times)
        assert rec.q[-1][0] > 100 * np.pi
        assert np.all(np.diff(rec.q[:, 0]) > 0)
