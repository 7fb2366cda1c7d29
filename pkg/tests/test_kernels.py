"""Compiled core vs pure-Python mirror: identical algorithm, and the
accumulation kernels agree with a direct numpy evaluation."""

import numpy as np
import pytest

from bosewells import kernels
from bosewells.kernels import _pure

pytestmark = pytest.mark.skipif(
    not kernels.USING_COMPILED_CORE,
    reason="compiled core not built; nothing to compare")

DWELL_PAR = np.array([1.0, 10.0, 50.0, 0.0, 1e-4])   # radius N/2
TWELL_PAR = np.array([1.0, 10.0, 30.0, 0.0, 3e-5, 0.0])


@pytest.mark.parametrize("system,par,y0", [
    (0, DWELL_PAR, [[0.3, 14.0], [1.2, -22.0], [2.9, 40.0]]),
    (1, TWELL_PAR, [[0.3, -0.4, 12.0, 9.0], [1.0, 0.2, 5.0, 20.0]]),
    (2, np.array([1.3]), [[1.0, 0.5], [-2.0, 3.0]]),
])
@pytest.mark.parametrize("with_stability", [True, False])
def test_core_matches_pure(system, par, y0, with_stability):
    times = np.linspace(0, 1.5, 31)
    y0 = np.asarray(y0, float)
    o1, s1, v1 = kernels.integrate_batch(system, par, y0, times, 1e-10,
                                         1e-10, with_stability)
    o2, s2, v2 = _pure.integrate_batch(system, par, y0, times, 1e-10,
                                       1e-10, with_stability)
    assert np.array_equal(s1, s2)
    assert np.array_equal(v1, v2)
    scale = np.max(np.abs(o2))
    assert np.max(np.abs(o1 - o2)) < 1e-8 * scale


def test_escape_handling_matches():
    # U = 0, q0 = pi/2: energy equals the boundary value, so the orbit
    # reaches the |j| = N/2 singularity and must be cut in both backends
    par = np.array([0.0, 10.0, 50.0, 0.0, 1e-4])
    times = np.linspace(0, 0.5, 21)
    y0 = np.array([[np.pi / 2, 0.0], [0.0, 10.0]])
    o1, s1, v1 = kernels.integrate_batch(0, par, y0, times, 1e-10,
                                         1e-10, True)
    o2, s2, v2 = _pure.integrate_batch(0, par, y0, times, 1e-10,
                                       1e-10, True)
    assert s1[0] == _pure.STATUS_ESCAPED and s1[1] == _pure.STATUS_OK
    assert np.array_equal(s1, s2) and np.array_equal(v1, v2)


def test_out_of_domain_start():
    times = np.linspace(0, 0.1, 5)
    y0 = np.array([[0.0, 60.0]])
    for impl in (kernels, _pure):
        out, status, n_valid = impl.integrate_batch(
            0, DWELL_PAR, y0, times, 1e-10, 1e-10, True)
        assert status[0] == _pure.STATUS_ESCAPED
        assert n_valid[0] == 0


@pytest.mark.parametrize("impl", [kernels, _pure])
def test_accumulate_1d_matches_numpy(impl):
    rng = np.random.default_rng(7)
    n, nt, ng = 5, 4, 41
    gamma = 3.0
    grid = -20.0 + 1.0 * np.arange(ng)
    qs = rng.normal(0, 1, (n, nt))
    ps = rng.normal(0, 5, (n, nt))
    coeff = rng.normal(size=(n, nt)) + 1j * rng.normal(size=(n, nt))
    n_valid = np.array([4, 4, 2, 0, 3], dtype=np.int64)
    psi = np.zeros((nt, ng), dtype=complex)
    impl.accumulate_gaussians_1d(psi, qs, ps, np.ascontiguousarray(coeff),
                                 n_valid, grid[0], 1.0, gamma)
    ref = np.zeros_like(psi)
    for i in range(n):
        for it in range(n_valid[i]):
            ref[it] += (coeff[i, it]
                        * np.exp(-(grid - ps[i, it]) ** 2 / (2 * gamma))
                        * np.exp(-1j * qs[i, it] * grid))
    assert np.max(np.abs(psi - ref)) < 1e-12 * max(1.0, np.max(np.abs(ref)))


@pytest.mark.parametrize("impl", [kernels, _pure])
def test_accumulate_2d_matches_numpy(impl):
    rng = np.random.default_rng(8)
    n, nt, ng = 4, 3, 13
    g1, g2 = 2.0, 5.0
    grid = np.arange(ng, dtype=float)
    q1 = rng.normal(0, 1, (n, nt)); q2 = rng.normal(0, 1, (n, nt))
    p1 = rng.uniform(2, 10, (n, nt)); p2 = rng.uniform(2, 10, (n, nt))
    coeff = rng.normal(size=(n, nt)) + 1j * rng.normal(size=(n, nt))
    n_valid = np.array([3, 1, 3, 2], dtype=np.int64)
    psi = np.zeros((nt, ng, ng), dtype=complex)
    impl.accumulate_gaussians_2d(psi, q1, q2, p1, p2,
                                 np.ascontiguousarray(coeff), n_valid,
                                 0.0, 1.0, g1, 0.0, 1.0, g2)
    ref = np.zeros_like(psi)
    for i in range(n):
        for it in range(n_valid[i]):
            f1 = (np.exp(-(grid - p1[i, it]) ** 2 / (2 * g1))
                  * np.exp(-1j * q1[i, it] * grid))
            f2 = (np.exp(-(grid - p2[i, it]) ** 2 / (2 * g2))
                  * np.exp(-1j * q2[i, it] * grid))
            ref[it] += coeff[i, it] * np.outer(f1, f2)
    assert np.max(np.abs(psi - ref)) < 1e-12 * max(1.0, np.max(np.abs(ref)))


def test_scipy_cross_check():
    """Independent oracle: same trajectory through scipy's RK45."""
    from scipy.integrate import solve_ivp

    def rhs(t, y):
        u, tt, n = 1.0, 10.0, 100.0
        q, p = y
        w = np.sqrt((n / 2) ** 2 - p ** 2)
        return [4 * u * p + 2 * tt * p * np.cos(q) / w,
                -2 * tt * w * np.sin(q)]

    times = np.linspace(0, 2.0, 21)
    y0 = np.array([[0.4, 18.0]])
    out, _, _ = kernels.integrate_batch(0, DWELL_PAR, y0, times, 1e-12,
                                        1e-12, False)
    sol = solve_ivp(rhs, (0, 2.0), [0.4, 18.0], t_eval=times, rtol=1e-11,
                    atol=1e-11, method="RK45")
    # agreement is limited by scipy's own tolerance here
    assert np.max(np.abs(out[0, :, 0] - sol.y[0])) < 5e-7
    assert np.max(np.abs(out[0, :, 1] - sol.y[1])) < 5e-7
