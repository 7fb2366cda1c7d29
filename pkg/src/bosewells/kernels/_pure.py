"""Pure-Python trajectory integrator and Gaussian accumulation kernels.

Reference implementation of the hot loops; the Cython module
``_core.pyx`` mirrors it operation for operation.  Selected at import
time by :mod:`bosewells.kernels` when the compiled core is unavailable.

Systems
-------
0  double well:  H = 2U p^2 - 2T sqrt(R^2 - p^2) cos q + 2 delta p
                 params = [U, T, R, delta, eps_dom]; R is the chart
                 radius (N/2 bare, (N+1)/2 with ordering correction)
1  triple well:  H = U (n1^2 + n2^2 + n3^2) + delta (n1 - n2)
                   - 2T (sqrt((n1+s)(n2+s)) cos(q1 - q2)
                         + sqrt((n2+s)(n3+s)) cos q2)
                 with (p1, p2) = (n1, n2), n3 = N - n1 - n2,
                 q = angles conjugate to (n1, n2);
                 params = [U, T, N, delta, eps_dom, s] with s the
                 ordering shift (0 bare, 1/2 Weyl symbol)
2  harmonic:     H = p^2/2 + omega^2 q^2 / 2,  params = [omega]

The stored state vector is [q (D), p (D), S, Mqq, Mqp, Mpq, Mpp] with
each monodromy block D x D row-major; without stability integration it
is just [q, p].  With stability the output rows carry one extra
trailing entry: the continuously unwrapped argument of the
frozen-Gaussian prefactor determinant

    C = (1/2) (Mpp + Mqq - i G Mqp + i G^-1 Mpq)   (G = diag(gamma)),

updated after every accepted integrator step, where consecutive values
are close enough to unwrap unambiguously.  A phase jump of >= 0.9 pi in
a single accepted step marks the trajectory as branch-lost (the
linearized flow is past numerical trust there).

Trajectory status codes: 0 completed, 1 escaped (left the physical
domain), 2 step-size underflow, 3 prefactor branch lost.
"""

from __future__ import annotations

import math

import numpy as np

STATUS_OK = 0
STATUS_ESCAPED = 1
STATUS_STEPFAIL = 2
STATUS_BRANCH = 3

# Dormand-Prince 5(4) tableau
_C2, _C3, _C4, _C5 = 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0
_A21 = 1.0 / 5.0
_A31, _A32 = 3.0 / 40.0, 9.0 / 40.0
_A41, _A42, _A43 = 44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0
_A51, _A52, _A53, _A54 = (19372.0 / 6561.0, -25360.0 / 2187.0,
                          64448.0 / 6561.0, -212.0 / 729.0)
_A61, _A62, _A63, _A64, _A65 = (9017.0 / 3168.0, -355.0 / 33.0,
                                46732.0 / 5247.0, 49.0 / 176.0,
                                -5103.0 / 18656.0)
_B1, _B3, _B4, _B5, _B6 = (35.0 / 384.0, 500.0 / 1113.0, 125.0 / 192.0,
                           -2187.0 / 6784.0, 11.0 / 84.0)
_E1, _E3, _E4, _E5, _E6, _E7 = (71.0 / 57600.0, -71.0 / 16695.0,
                                71.0 / 1920.0, -17253.0 / 339200.0,
                                22.0 / 525.0, -1.0 / 40.0)


def system_dof(system: int) -> int:
    return 2 if system == 1 else 1


def _in_domain(system: int, params, q, p) -> bool:
    if system == 0:
        eps = params[4]
        return abs(p[0]) <= params[2] - eps
    if system == 1:
        eps = params[4]
        shift = params[5]
        n3 = params[2] - p[0] - p[1]
        return (p[0] + shift >= eps and p[1] + shift >= eps
                and n3 + shift >= eps)
    return True


def _derivs(system: int, params, q, p, want_hess: bool):
    """Value, gradient and (optionally) Hessian blocks of H at (q, p).

    Returns (H, Hq, Hp, Hqq, Hqp, Hpp) with D-vectors / DxD row-major
    tuples; Hessian entries are None when ``want_hess`` is false.
    """
    if system == 0:
        u, t, r, delta = params[0], params[1], params[2], params[3]
        pp = p[0]
        w = math.sqrt(r * r - pp * pp)
        cq = math.cos(q[0])
        sq = math.sin(q[0])
        hval = 2.0 * u * pp * pp - 2.0 * t * w * cq + 2.0 * delta * pp
        hq = (2.0 * t * w * sq,)
        hp = (4.0 * u * pp + 2.0 * t * pp * cq / w + 2.0 * delta,)
        if not want_hess:
            return hval, hq, hp, None, None, None
        hqq = (2.0 * t * w * cq,)
        hqp = (-2.0 * t * pp * sq / w,)
        hpp = (4.0 * u + 2.0 * t * cq * r * r / (w * w * w),)
        return hval, hq, hp, hqq, hqp, hpp

    if system == 1:
        u, t, n, delta = params[0], params[1], params[2], params[3]
        shift = params[5]
        n1, n2 = p[0], p[1]
        n3 = n - n1 - n2
        # the ordering shift enters the hopping roots only; the
        # quadratic diagonal is an exact symbol as it stands
        m1, m2, m3 = n1 + shift, n2 + shift, n3 + shift
        a = math.sqrt(m1 * m2)
        b = math.sqrt(m2 * m3)
        c1 = math.cos(q[0] - q[1])
        s1 = math.sin(q[0] - q[1])
        c2 = math.cos(q[1])
        s2 = math.sin(q[1])
        hval = (u * (n1 * n1 + n2 * n2 + n3 * n3) + delta * (n1 - n2)
                - 2.0 * t * (a * c1 + b * c2))
        hq = (2.0 * t * a * s1,
              -2.0 * t * a * s1 + 2.0 * t * b * s2)
        hp = (2.0 * u * (n1 - n3) + delta - t * c1 * m2 / a + t * c2 * m2 / b,
              2.0 * u * (n2 - n3) - delta - t * c1 * m1 / a
              - t * c2 * (m3 - m2) / b)
        if not want_hess:
            return hval, hq, hp, None, None, None
        a3 = a * a * a
        b3 = b * b * b
        hqq = (2.0 * t * a * c1, -2.0 * t * a * c1,
               -2.0 * t * a * c1, 2.0 * t * a * c1 + 2.0 * t * b * c2)
        # Hqp[i][j] = d^2 H / dq_i dp_j, row-major
        hqp = (t * s1 * m2 / a, t * s1 * m1 / a,
               -t * s1 * m2 / a - t * s2 * m2 / b,
               -t * s1 * m1 / a + t * s2 * (m3 - m2) / b)
        hpp = (4.0 * u + 0.5 * t * c1 * m2 * m2 / a3
               + 0.5 * t * c2 * m2 * m2 / b3,
               2.0 * u - 0.5 * t * c1 / a
               + 0.5 * t * c2 * m2 * (m2 + m3) / b3,
               0.0,  # filled below (symmetric)
               4.0 * u + 0.5 * t * c1 * m1 * m1 / a3 + 2.0 * t * c2 / b
               + 0.5 * t * c2 * (m3 - m2) * (m3 - m2) / b3)
        hpp = (hpp[0], hpp[1], hpp[1], hpp[3])
        return hval, hq, hp, hqq, hqp, hpp

    omega = params[0]
    hval = 0.5 * p[0] * p[0] + 0.5 * omega * omega * q[0] * q[0]
    hq = (omega * omega * q[0],)
    hp = (p[0],)
    if not want_hess:
        return hval, hq, hp, None, None, None
    return hval, hq, hp, (omega * omega,), (0.0,), (1.0,)


def _rhs(system: int, params, y, dydt, dof: int, with_stability: bool) -> bool:
    """Fill dydt; returns False if (q, p) is outside the domain."""
    d = dof
    q = y[:d]
    p = y[d:2 * d]
    if not _in_domain(system, params, q, p):
        return False
    hval, hq, hp, hqq, hqp, hpp = _derivs(system, params, q, p,
                                          with_stability)
    for i in range(d):
        dydt[i] = hp[i]
        dydt[d + i] = -hq[i]
    if not with_stability:
        return True
    # dS/dt = p . dq/dt - H
    ps = 0.0
    for i in range(d):
        ps += p[i] * hp[i]
    dydt[2 * d] = ps - hval
    # monodromy blocks ride behind the action entry
    o = 2 * d + 1
    d2 = d * d
    mqq = y[o:o + d2]
    mqp = y[o + d2:o + 2 * d2]
    mpq = y[o + 2 * d2:o + 3 * d2]
    mpp = y[o + 3 * d2:o + 4 * d2]
    # dMqq = Hpq Mqq + Hpp Mpq ; dMpq = -Hqq Mqq - Hqp Mpq
    # dMqp = Hpq Mqp + Hpp Mpp ; dMpp = -Hqq Mqp - Hqp Mpp
    # with (Hpq)_{ij} = (Hqp)_{ji}
    for i in range(d):
        for j in range(d):
            acc_qq = acc_pq = acc_qp = acc_pp = 0.0
            for k in range(d):
                hpq_ik = hqp[k * d + i]
                hpp_ik = hpp[i * d + k]
                hqq_ik = hqq[i * d + k]
                hqp_ik = hqp[i * d + k]
                acc_qq += hpq_ik * mqq[k * d + j] + hpp_ik * mpq[k * d + j]
                acc_pq += -hqq_ik * mqq[k * d + j] - hqp_ik * mpq[k * d + j]
                acc_qp += hpq_ik * mqp[k * d + j] + hpp_ik * mpp[k * d + j]
                acc_pp += -hqq_ik * mqp[k * d + j] - hqp_ik * mpp[k * d + j]
            dydt[o + i * d + j] = acc_qq
            dydt[o + 2 * d2 + i * d + j] = acc_pq
            dydt[o + d2 + i * d + j] = acc_qp
            dydt[o + 3 * d2 + i * d + j] = acc_pp
    return True


def _error_norm(err, y_old, y_new, rtol, atol, dim) -> float:
    acc = 0.0
    for i in range(dim):
        sc = atol + rtol * max(abs(y_old[i]), abs(y_new[i]))
        r = err[i] / sc
        acc += r * r
    return math.sqrt(acc / dim)


def _det_arg_state(y, d, gamma):
    """(re, im) of the prefactor determinant from the state vector."""
    o = 2 * d + 1
    d2 = d * d
    if d == 1:
        g = gamma[0]
        re = 0.5 * (y[o + 3] + y[o])
        im = 0.5 * (-g * y[o + 1] + y[o + 2] / g)
        return re, im
    s0 = math.sqrt(gamma[0])
    s1 = math.sqrt(gamma[1])
    s = (s0, s1)
    c = [0j] * 4
    for i in range(2):
        for j in range(2):
            c[i * 2 + j] = 0.5 * (
                y[o + 3 * d2 + i * 2 + j] * s[j] / s[i]
                + y[o + i * 2 + j] * s[i] / s[j]
                - 1j * y[o + d2 + i * 2 + j] * s[i] * s[j]
                + 1j * y[o + 2 * d2 + i * 2 + j] / (s[i] * s[j]))
    det = c[0] * c[3] - c[1] * c[2]
    return det.real, det.imag


def integrate_batch(system: int, params: np.ndarray, y0: np.ndarray,
                    times: np.ndarray, rtol: float, atol: float,
                    with_stability: bool, gamma: np.ndarray | None = None):
    """Integrate a batch of trajectories to every point of ``times``.

    Returns (out, status, n_valid): out has shape (n, nt, dim) where dim
    includes the trailing unwrapped prefactor phase when
    ``with_stability``; samples past an escape or failure hold the last
    valid state.  ``gamma`` (per-dof widths) parameterizes the
    prefactor determinant; defaults to ones.
    """
    params = np.asarray(params, dtype=float)
    y0 = np.asarray(y0, dtype=float)
    times = np.asarray(times, dtype=float)
    n = y0.shape[0]
    nt = times.shape[0]
    d = system_dof(system)
    if gamma is None:
        gamma = np.ones(d)
    gamma = np.asarray(gamma, dtype=float)
    dim = 2 * d + 1 + 4 * d * d if with_stability else 2 * d
    ncol = dim + 1 if with_stability else dim
    out = np.zeros((n, nt, ncol))
    status = np.zeros(n, dtype=np.uint8)
    n_valid = np.zeros(n, dtype=np.int64)
    for i in range(n):
        status[i], n_valid[i] = _integrate_one(
            system, params, y0[i], times, rtol, atol, with_stability,
            d, dim, gamma, out[i])
    return out, status, n_valid


def _integrate_one(system, params, z0, times, rtol, atol, with_stability,
                   d, dim, gamma, out) -> tuple[int, int]:
    nt = times.shape[0]
    y = [0.0] * dim
    for i in range(d):
        y[i] = z0[i]
        y[d + i] = z0[d + i]
    if with_stability:
        o = 2 * d + 1
        d2 = d * d
        for i in range(d):
            y[o + i * d + i] = 1.0          # Mqq = I
            y[o + 3 * d2 + i * d + i] = 1.0  # Mpp = I
    phase = 0.0
    arg_prev = 0.0  # determinant starts at +1

    f = [0.0] * dim
    if not _rhs(system, params, y, f, d, with_stability):
        _store(out, 0, y, dim, phase, with_stability)
        _freeze(out, 0, nt)
        return STATUS_ESCAPED, 0
    _store(out, 0, y, dim, phase, with_stability)
    t = times[0]
    t_span = times[nt - 1] - times[0]

    # initial step: Hairer-style d0/d1 heuristic
    d0 = _error_norm(y, y, y, rtol, atol, dim)
    d1 = _error_norm(f, y, y, rtol, atol, dim)
    if d0 > 1e-10 and d1 > 1e-10:
        h = 0.01 * d0 / d1
    else:
        h = 1e-6
    h = min(h, 0.1 * t_span) if t_span > 0 else h

    k2 = [0.0] * dim
    k3 = [0.0] * dim
    k4 = [0.0] * dim
    k5 = [0.0] * dim
    k6 = [0.0] * dim
    k7 = [0.0] * dim
    ytmp = [0.0] * dim
    y5 = [0.0] * dim
    err = [0.0] * dim

    for it in range(1, nt):
        t_target = times[it]
        while t < t_target:
            h_try = h
            clipped = False
            if t + h_try >= t_target:
                h_try = t_target - t
                clipped = True
            if h_try < 1e-13 * max(1.0, abs(t)):
                _freeze(out, it, nt)
                return STATUS_STEPFAIL, it
            ok = True
            # stage 2
            for i in range(dim):
                ytmp[i] = y[i] + h_try * _A21 * f[i]
            ok = _rhs(system, params, ytmp, k2, d, with_stability)
            if ok:
                for i in range(dim):
                    ytmp[i] = y[i] + h_try * (_A31 * f[i] + _A32 * k2[i])
                ok = _rhs(system, params, ytmp, k3, d, with_stability)
            if ok:
                for i in range(dim):
                    ytmp[i] = y[i] + h_try * (_A41 * f[i] + _A42 * k2[i]
                                              + _A43 * k3[i])
                ok = _rhs(system, params, ytmp, k4, d, with_stability)
            if ok:
                for i in range(dim):
                    ytmp[i] = y[i] + h_try * (_A51 * f[i] + _A52 * k2[i]
                                              + _A53 * k3[i] + _A54 * k4[i])
                ok = _rhs(system, params, ytmp, k5, d, with_stability)
            if ok:
                for i in range(dim):
                    ytmp[i] = y[i] + h_try * (_A61 * f[i] + _A62 * k2[i]
                                              + _A63 * k3[i] + _A64 * k4[i]
                                              + _A65 * k5[i])
                ok = _rhs(system, params, ytmp, k6, d, with_stability)
            if ok:
                for i in range(dim):
                    y5[i] = y[i] + h_try * (_B1 * f[i] + _B3 * k3[i]
                                            + _B4 * k4[i] + _B5 * k5[i]
                                            + _B6 * k6[i])
                ok = _rhs(system, params, y5, k7, d, with_stability)
            if not ok:
                # a stage left the physical domain: retry smaller, then escape
                h = 0.5 * h_try
                if h < 1e-13 * max(1.0, abs(t)):
                    _freeze(out, it, nt)
                    return STATUS_ESCAPED, it
                continue
            for i in range(dim):
                err[i] = h_try * (_E1 * f[i] + _E3 * k3[i] + _E4 * k4[i]
                                  + _E5 * k5[i] + _E6 * k6[i] + _E7 * k7[i])
            enorm = _error_norm(err, y, y5, rtol, atol, dim)
            if enorm <= 1.0:
                if with_stability:
                    re, im = _det_arg_state(y5, d, gamma)
                    arg = math.atan2(im, re)
                    dphi = arg - arg_prev
                    dphi -= 2 * math.pi * round(dphi / (2 * math.pi))
                    if abs(dphi) >= 0.9 * math.pi:
                        # near-zero determinant passage: retry with a
                        # finer step to keep the branch unambiguous
                        h = 0.5 * h_try
                        if h < 1e-13 * max(1.0, abs(t)):
                            _freeze(out, it, nt)
                            return STATUS_BRANCH, it
                        continue
                    phase += dphi
                    arg_prev = arg
                t = t_target if clipped else t + h_try
                for i in range(dim):
                    y[i] = y5[i]
                    f[i] = k7[i]
                factor = 10.0 if enorm == 0.0 else min(
                    10.0, max(0.2, 0.9 * enorm ** -0.2))
                if clipped:
                    h = max(h, h_try * factor)
                else:
                    h = h_try * factor
            else:
                h = h_try * max(0.2, 0.9 * enorm ** -0.2)
        _store(out, it, y, dim, phase, with_stability)
    return STATUS_OK, nt


def _store(out, it, y, dim, phase, with_stability):
    out[it, :dim] = y
    if with_stability:
        out[it, dim] = phase


def _freeze(out, start, nt):
    src = max(start - 1, 0)
    for it in range(max(start, 1), nt):
        out[it] = out[src]


def accumulate_gaussians_1d(psi: np.ndarray, qs: np.ndarray, ps: np.ndarray,
                            coeff: np.ndarray, n_valid: np.ndarray,
                            grid0: float, dgrid: float, gamma: float) -> None:
    """psi[it, k] += coeff[i, it] * exp(-(g_k - p)^2 / (2 gamma)) * e^{-i q g_k}

    for every trajectory i and time index it < n_valid[i]; g_k = grid0 +
    k * dgrid.  Gaussian tails beyond exponent 46 are skipped.
    """
    n, nt = qs.shape
    ng = psi.shape[1]
    cut = math.sqrt(92.0 * gamma)
    for i in range(n):
        for it in range(int(n_valid[i])):
            c = coeff[i, it]
            if c == 0:
                continue
            q = qs[i, it]
            p = ps[i, it]
            k_lo = max(0, int(math.ceil((p - cut - grid0) / dgrid)))
            k_hi = min(ng - 1, int(math.floor((p + cut - grid0) / dgrid)))
            if k_hi < k_lo:
                continue
            g = grid0 + k_lo * dgrid
            rot = complex(math.cos(q * g), -math.sin(q * g))
            step = complex(math.cos(q * dgrid), -math.sin(q * dgrid))
            for k in range(k_lo, k_hi + 1):
                dg = g - p
                psi[it, k] += c * math.exp(-dg * dg / (2.0 * gamma)) * rot
                rot *= step
                g += dgrid


def _gauss_factor(q, p, grid0, dgrid, gamma, ng, f):
    """Fill f[k] = exp(-(g_k - p)^2/(2 gamma)) e^{-i q g_k}; return (lo, hi)."""
    cut = math.sqrt(92.0 * gamma)
    k_lo = max(0, int(math.ceil((p - cut - grid0) / dgrid)))
    k_hi = min(ng - 1, int(math.floor((p + cut - grid0) / dgrid)))
    g = grid0 + k_lo * dgrid
    rot = complex(math.cos(q * g), -math.sin(q * g))
    step = complex(math.cos(q * dgrid), -math.sin(q * dgrid))
    for k in range(k_lo, k_hi + 1):
        dg = g - p
        f[k] = math.exp(-dg * dg / (2.0 * gamma)) * rot
        rot *= step
        g += dgrid
    return k_lo, k_hi


def accumulate_gaussians_2d(psi: np.ndarray, q1s: np.ndarray, q2s: np.ndarray,
                            p1s: np.ndarray, p2s: np.ndarray,
                            coeff: np.ndarray, n_valid: np.ndarray,
                            grid0_1: float, dgrid_1: float, gamma1: float,
                            grid0_2: float, dgrid_2: float,
                            gamma2: float) -> None:
    """Two-dimensional product-Gaussian accumulation.

    psi has shape (nt, ng1, ng2); the per-axis factors are built once per
    (trajectory, time) and combined as an outer product.
    """
    n, nt = q1s.shape
    ng1, ng2 = psi.shape[1], psi.shape[2]
    f1 = np.zeros(ng1, dtype=complex)
    f2 = np.zeros(ng2, dtype=complex)
    for i in range(n):
        for it in range(int(n_valid[i])):
            c = coeff[i, it]
            if c == 0:
                continue
            lo1, hi1 = _gauss_factor(q1s[i, it], p1s[i, it], grid0_1,
                                     dgrid_1, gamma1, ng1, f1)
            lo2, hi2 = _gauss_factor(q2s[i, it], p2s[i, it], grid0_2,
                                     dgrid_2, gamma2, ng2, f2)
            if hi1 < lo1 or hi2 < lo2:
                continue
            for k1 in range(lo1, hi1 + 1):
                cf = c * f1[k1]
                for k2 in range(lo2, hi2 + 1):
                    psi[it, k1, k2] += cf * f2[k2]
