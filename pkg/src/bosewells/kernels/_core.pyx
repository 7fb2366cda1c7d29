# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled trajectory integrator and Gaussian accumulation kernels.

Mirror of ``_pure.py``; see that module for the system definitions,
state layout and status codes.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport sqrt, sin, cos, fabs, exp, ceil, floor, pow, atan2, round, M_PI

cnp.import_array()

DEF MAXDIM = 21   # 2*D + 1 + 4*D^2 for D = 2

cdef int STATUS_OK_C = 0
cdef int STATUS_ESCAPED_C = 1
cdef int STATUS_STEPFAIL_C = 2
cdef int STATUS_BRANCH_C = 3

# Dormand-Prince 5(4) tableau
cdef double A21 = 1.0/5.0
cdef double A31 = 3.0/40.0, A32 = 9.0/40.0
cdef double A41 = 44.0/45.0, A42 = -56.0/15.0, A43 = 32.0/9.0
cdef double A51 = 19372.0/6561.0, A52 = -25360.0/2187.0
cdef double A53 = 64448.0/6561.0, A54 = -212.0/729.0
cdef double A61 = 9017.0/3168.0, A62 = -355.0/33.0, A63 = 46732.0/5247.0
cdef double A64 = 49.0/176.0, A65 = -5103.0/18656.0
cdef double B1 = 35.0/384.0, B3 = 500.0/1113.0, B4 = 125.0/192.0
cdef double B5 = -2187.0/6784.0, B6 = 11.0/84.0
cdef double E1 = 71.0/57600.0, E3 = -71.0/16695.0, E4 = 71.0/1920.0
cdef double E5 = -17253.0/339200.0, E6 = 22.0/525.0, E7 = -1.0/40.0


def system_dof(int system):
    return 2 if system == 1 else 1


cdef inline bint _in_domain(int system, const double* par,
                            const double* y, int d) nogil:
    cdef double eps, n3, shift
    if system == 0:
        eps = par[4]
        return fabs(y[1]) <= par[2] - eps
    if system == 1:
        eps = par[4]
        shift = par[5]
        n3 = par[2] - y[2] - y[3]
        return (y[2] + shift >= eps and y[3] + shift >= eps
                and n3 + shift >= eps)
    return True


cdef bint _rhs(int system, const double* par, const double* y,
               double* dydt, int d, bint with_stability) nogil:
    cdef double u, t, n, delta, r, pp, w, cq, sq, hval, shift
    cdef double n1, n2, n3, m1, m2, m3, a, b, c1, s1, c2, s2, a3, b3
    cdef double omega, ps
    cdef double hq[2]
    cdef double hp[2]
    cdef double hqq[4]
    cdef double hqp[4]
    cdef double hpp[4]
    cdef int i, j, k, o, d2
    cdef double acc_qq, acc_pq, acc_qp, acc_pp

    if not _in_domain(system, par, y, d):
        return False

    if system == 0:
        u = par[0]; t = par[1]; r = par[2]; delta = par[3]
        pp = y[1]
        w = sqrt(r * r - pp * pp)
        cq = cos(y[0]); sq = sin(y[0])
        hval = 2.0 * u * pp * pp - 2.0 * t * w * cq + 2.0 * delta * pp
        hq[0] = 2.0 * t * w * sq
        hp[0] = 4.0 * u * pp + 2.0 * t * pp * cq / w + 2.0 * delta
        if with_stability:
            hqq[0] = 2.0 * t * w * cq
            hqp[0] = -2.0 * t * pp * sq / w
            hpp[0] = 4.0 * u + 2.0 * t * cq * r * r / (w * w * w)
    elif system == 1:
        u = par[0]; t = par[1]; n = par[2]; delta = par[3]
        shift = par[5]
        n1 = y[2]; n2 = y[3]
        n3 = n - n1 - n2
        # ordering shift enters the hopping roots only
        m1 = n1 + shift; m2 = n2 + shift; m3 = n3 + shift
        a = sqrt(m1 * m2); b = sqrt(m2 * m3)
        c1 = cos(y[0] - y[1]); s1 = sin(y[0] - y[1])
        c2 = cos(y[1]); s2 = sin(y[1])
        hval = (u * (n1 * n1 + n2 * n2 + n3 * n3) + delta * (n1 - n2)
                - 2.0 * t * (a * c1 + b * c2))
        hq[0] = 2.0 * t * a * s1
        hq[1] = -2.0 * t * a * s1 + 2.0 * t * b * s2
        hp[0] = 2.0 * u * (n1 - n3) + delta - t * c1 * m2 / a + t * c2 * m2 / b
        hp[1] = (2.0 * u * (n2 - n3) - delta - t * c1 * m1 / a
                 - t * c2 * (m3 - m2) / b)
        if with_stability:
            a3 = a * a * a
            b3 = b * b * b
            hqq[0] = 2.0 * t * a * c1
            hqq[1] = -2.0 * t * a * c1
            hqq[2] = -2.0 * t * a * c1
            hqq[3] = 2.0 * t * a * c1 + 2.0 * t * b * c2
            hqp[0] = t * s1 * m2 / a
            hqp[1] = t * s1 * m1 / a
            hqp[2] = -t * s1 * m2 / a - t * s2 * m2 / b
            hqp[3] = -t * s1 * m1 / a + t * s2 * (m3 - m2) / b
            hpp[0] = (4.0 * u + 0.5 * t * c1 * m2 * m2 / a3
                      + 0.5 * t * c2 * m2 * m2 / b3)
            hpp[1] = (2.0 * u - 0.5 * t * c1 / a
                      + 0.5 * t * c2 * m2 * (m2 + m3) / b3)
            hpp[2] = hpp[1]
            hpp[3] = (4.0 * u + 0.5 * t * c1 * m1 * m1 / a3 + 2.0 * t * c2 / b
                      + 0.5 * t * c2 * (m3 - m2) * (m3 - m2) / b3)
    else:
        omega = par[0]
        hval = 0.5 * y[1] * y[1] + 0.5 * omega * omega * y[0] * y[0]
        hq[0] = omega * omega * y[0]
        hp[0] = y[1]
        if with_stability:
            hqq[0] = omega * omega
            hqp[0] = 0.0
            hpp[0] = 1.0

    for i in range(d):
        dydt[i] = hp[i]
        dydt[d + i] = -hq[i]
    if not with_stability:
        return True
    ps = 0.0
    for i in range(d):
        ps += y[d + i] * hp[i]
    dydt[2 * d] = ps - hval
    o = 2 * d + 1
    d2 = d * d
    for i in range(d):
        for j in range(d):
            acc_qq = 0.0; acc_pq = 0.0; acc_qp = 0.0; acc_pp = 0.0
            for k in range(d):
                acc_qq += (hqp[k * d + i] * y[o + k * d + j]
                           + hpp[i * d + k] * y[o + 2 * d2 + k * d + j])
                acc_pq += (-hqq[i * d + k] * y[o + k * d + j]
                           - hqp[i * d + k] * y[o + 2 * d2 + k * d + j])
                acc_qp += (hqp[k * d + i] * y[o + d2 + k * d + j]
                           + hpp[i * d + k] * y[o + 3 * d2 + k * d + j])
                acc_pp += (-hqq[i * d + k] * y[o + d2 + k * d + j]
                           - hqp[i * d + k] * y[o + 3 * d2 + k * d + j])
            dydt[o + i * d + j] = acc_qq
            dydt[o + 2 * d2 + i * d + j] = acc_pq
            dydt[o + d2 + i * d + j] = acc_qp
            dydt[o + 3 * d2 + i * d + j] = acc_pp
    return True


cdef inline void _det_arg_state(const double* y, int d,
                                const double* gamma,
                                double* re_out, double* im_out) nogil:
    # prefactor determinant C = (Mpp + Mqq - i G Mqp + i G^-1 Mpq) / 2
    cdef int o = 2 * d + 1
    cdef int d2 = d * d
    cdef double g, s0, s1, si, sj
    cdef double cre[4]
    cdef double cim[4]
    cdef int i, j
    if d == 1:
        g = gamma[0]
        re_out[0] = 0.5 * (y[o + 3] + y[o])
        im_out[0] = 0.5 * (-g * y[o + 1] + y[o + 2] / g)
        return
    s0 = sqrt(gamma[0]); s1 = sqrt(gamma[1])
    for i in range(2):
        si = s0 if i == 0 else s1
        for j in range(2):
            sj = s0 if j == 0 else s1
            cre[i * 2 + j] = 0.5 * (y[o + 3 * d2 + i * 2 + j] * sj / si
                                    + y[o + i * 2 + j] * si / sj)
            cim[i * 2 + j] = 0.5 * (-y[o + d2 + i * 2 + j] * si * sj
                                    + y[o + 2 * d2 + i * 2 + j] / (si * sj))
    re_out[0] = (cre[0] * cre[3] - cim[0] * cim[3]
                 - cre[1] * cre[2] + cim[1] * cim[2])
    im_out[0] = (cre[0] * cim[3] + cim[0] * cre[3]
                 - cre[1] * cim[2] - cim[1] * cre[2])


cdef inline double _error_norm(const double* err, const double* y_old,
                               const double* y_new, double rtol, double atol,
                               int dim) nogil:
    cdef double acc = 0.0, sc, r, m
    cdef int i
    for i in range(dim):
        m = fabs(y_old[i])
        if fabs(y_new[i]) > m:
            m = fabs(y_new[i])
        sc = atol + rtol * m
        r = err[i] / sc
        acc += r * r
    return sqrt(acc / dim)


cdef int _integrate_one(int system, const double* par, const double* z0,
                        const double* times, int nt, double rtol, double atol,
                        bint with_stability, int d, int dim, int ncol,
                        const double* gamma,
                        double* out, long* n_valid_out) nogil:
    cdef double y[MAXDIM]
    cdef double f[MAXDIM]
    cdef double k2[MAXDIM]
    cdef double k3[MAXDIM]
    cdef double k4[MAXDIM]
    cdef double k5[MAXDIM]
    cdef double k6[MAXDIM]
    cdef double k7[MAXDIM]
    cdef double ytmp[MAXDIM]
    cdef double y5[MAXDIM]
    cdef double err[MAXDIM]
    cdef int i, it, d2, o
    cdef double t, t_span, t_target, d0, d1, h, h_try, enorm, factor
    cdef double phase = 0.0, arg_prev = 0.0, arg, dphi, dre, dim_
    cdef double det_re, det_im
    cdef bint ok, clipped

    for i in range(dim):
        y[i] = 0.0
    for i in range(d):
        y[i] = z0[i]
        y[d + i] = z0[d + i]
    if with_stability:
        o = 2 * d + 1
        d2 = d * d
        for i in range(d):
            y[o + i * d + i] = 1.0
            y[o + 3 * d2 + i * d + i] = 1.0

    if not _rhs(system, par, y, f, d, with_stability):
        for i in range(dim):
            out[i] = y[i]
        if with_stability:
            out[dim] = phase
        _freeze(out, 0, nt, ncol)
        n_valid_out[0] = 0
        return STATUS_ESCAPED_C
    for i in range(dim):
        out[i] = y[i]
    if with_stability:
        out[dim] = phase
    t = times[0]
    t_span = times[nt - 1] - times[0]

    d0 = _error_norm(y, y, y, rtol, atol, dim)
    d1 = _error_norm(f, y, y, rtol, atol, dim)
    if d0 > 1e-10 and d1 > 1e-10:
        h = 0.01 * d0 / d1
    else:
        h = 1e-6
    if t_span > 0 and h > 0.1 * t_span:
        h = 0.1 * t_span

    for it in range(1, nt):
        t_target = times[it]
        while t < t_target:
            h_try = h
            clipped = False
            if t + h_try >= t_target:
                h_try = t_target - t
                clipped = True
            if h_try < 1e-13 * (1.0 if fabs(t) < 1.0 else fabs(t)):
                _freeze(out, it, nt, ncol)
                n_valid_out[0] = it
                return STATUS_STEPFAIL_C
            for i in range(dim):
                ytmp[i] = y[i] + h_try * A21 * f[i]
            ok = _rhs(system, par, ytmp, k2, d, with_stability)
            if ok:
                for i in range(dim):
                    ytmp[i] = y[i] + h_try * (A31 * f[i] + A32 * k2[i])
                ok = _rhs(system, par, ytmp, k3, d, with_stability)
            if ok:
                for i in range(dim):
                    ytmp[i] = y[i] + h_try * (A41 * f[i] + A42 * k2[i]
                                              + A43 * k3[i])
                ok = _rhs(system, par, ytmp, k4, d, with_stability)
            if ok:
                for i in range(dim):
                    ytmp[i] = y[i] + h_try * (A51 * f[i] + A52 * k2[i]
                                              + A53 * k3[i] + A54 * k4[i])
                ok = _rhs(system, par, ytmp, k5, d, with_stability)
            if ok:
                for i in range(dim):
                    ytmp[i] = y[i] + h_try * (A61 * f[i] + A62 * k2[i]
                                              + A63 * k3[i] + A64 * k4[i]
                                              + A65 * k5[i])
                ok = _rhs(system, par, ytmp, k6, d, with_stability)
            if ok:
                for i in range(dim):
                    y5[i] = y[i] + h_try * (B1 * f[i] + B3 * k3[i]
                                            + B4 * k4[i] + B5 * k5[i]
                                            + B6 * k6[i])
                ok = _rhs(system, par, y5, k7, d, with_stability)
            if not ok:
                h = 0.5 * h_try
                if h < 1e-13 * (1.0 if fabs(t) < 1.0 else fabs(t)):
                    _freeze(out, it, nt, ncol)
                    n_valid_out[0] = it
                    return STATUS_ESCAPED_C
                continue
            for i in range(dim):
                err[i] = h_try * (E1 * f[i] + E3 * k3[i] + E4 * k4[i]
                                  + E5 * k5[i] + E6 * k6[i] + E7 * k7[i])
            enorm = _error_norm(err, y, y5, rtol, atol, dim)
            if enorm <= 1.0:
                if with_stability:
                    _det_arg_state(y5, d, gamma, &det_re, &det_im)
                    arg = atan2(det_im, det_re)
                    dphi = arg - arg_prev
                    dphi -= 2.0 * M_PI * round(dphi / (2.0 * M_PI))
                    if fabs(dphi) >= 0.9 * M_PI:
                        # near-zero determinant passage: retry with a
                        # finer step to keep the branch unambiguous
                        h = 0.5 * h_try
                        if h < 1e-13 * (1.0 if fabs(t) < 1.0 else fabs(t)):
                            _freeze(out, it, nt, ncol)
                            n_valid_out[0] = it
                            return STATUS_BRANCH_C
                        continue
                    phase += dphi
                    arg_prev = arg
                t = t_target if clipped else t + h_try
                for i in range(dim):
                    y[i] = y5[i]
                    f[i] = k7[i]
                if enorm == 0.0:
                    factor = 10.0
                else:
                    factor = 0.9 * pow(enorm, -0.2)
                    if factor > 10.0:
                        factor = 10.0
                    elif factor < 0.2:
                        factor = 0.2
                if clipped:
                    if h_try * factor > h:
                        h = h_try * factor
                else:
                    h = h_try * factor
            else:
                factor = 0.9 * pow(enorm, -0.2)
                if factor < 0.2:
                    factor = 0.2
                h = h_try * factor
        for i in range(dim):
            out[it * ncol + i] = y[i]
        if with_stability:
            out[it * ncol + dim] = phase
    n_valid_out[0] = nt
    return STATUS_OK_C


cdef void _freeze(double* out, int start, int nt, int dim) nogil:
    cdef int src = start - 1 if start > 0 else 0
    cdef int it, i
    cdef int first = start if start > 1 else 1
    for it in range(first, nt):
        for i in range(dim):
            out[it * dim + i] = out[src * dim + i]


def integrate_batch(int system, cnp.ndarray[cnp.float64_t, ndim=1] params,
                    cnp.ndarray[cnp.float64_t, ndim=2] y0,
                    cnp.ndarray[cnp.float64_t, ndim=1] times,
                    double rtol, double atol, bint with_stability,
                    gamma=None):
    """Integrate a batch of trajectories to every point of ``times``.

    Returns (out, status, n_valid); see the pure-Python mirror for the
    semantics (including the trailing unwrapped prefactor phase column
    when ``with_stability``).
    """
    cdef int d = 2 if system == 1 else 1
    cdef int dim = 2 * d + 1 + 4 * d * d if with_stability else 2 * d
    cdef int ncol = dim + 1 if with_stability else dim
    cdef Py_ssize_t n = y0.shape[0]
    cdef Py_ssize_t nt = times.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] gamma_arr
    if gamma is None:
        gamma_arr = np.ones(d)
    else:
        gamma_arr = np.ascontiguousarray(gamma, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=3] out = np.zeros((n, nt, ncol))
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] status = np.zeros(n, dtype=np.uint8)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] n_valid = np.zeros(n, dtype=np.int64)
    cdef double* par = <double*> cnp.PyArray_DATA(params)
    cdef double* tptr = <double*> cnp.PyArray_DATA(times)
    cdef double* y0ptr = <double*> cnp.PyArray_DATA(y0)
    cdef double* outptr = <double*> cnp.PyArray_DATA(out)
    cdef double* gptr = <double*> cnp.PyArray_DATA(gamma_arr)
    cdef long* nvptr = <long*> cnp.PyArray_DATA(n_valid)
    cdef Py_ssize_t i
    cdef long nv
    with nogil:
        for i in range(n):
            status[i] = <cnp.uint8_t> _integrate_one(
                system, par, y0ptr + i * 2 * d, tptr, <int> nt, rtol, atol,
                with_stability, d, dim, ncol, gptr,
                outptr + i * nt * ncol, nvptr + i)
    return out, status, n_valid


def accumulate_gaussians_1d(cnp.ndarray[cnp.complex128_t, ndim=2] psi,
                            cnp.ndarray[cnp.float64_t, ndim=2] qs,
                            cnp.ndarray[cnp.float64_t, ndim=2] ps,
                            cnp.ndarray[cnp.complex128_t, ndim=2] coeff,
                            cnp.ndarray[cnp.int64_t, ndim=1] n_valid,
                            double grid0, double dgrid, double gamma):
    cdef Py_ssize_t n = qs.shape[0]
    cdef Py_ssize_t nt = qs.shape[1]
    cdef Py_ssize_t ng = psi.shape[1]
    cdef double cut = sqrt(92.0 * gamma)
    cdef Py_ssize_t i, it, k, k_lo, k_hi
    cdef double q, p, g, dg, re, im, rre, rim, sre, sim, gv, tmp
    cdef double complex c
    with nogil:
        for i in range(n):
            for it in range(n_valid[i]):
                c = coeff[i, it]
                if c.real == 0 and c.imag == 0:
                    continue
                q = qs[i, it]
                p = ps[i, it]
                k_lo = <Py_ssize_t> ceil((p - cut - grid0) / dgrid)
                k_hi = <Py_ssize_t> floor((p + cut - grid0) / dgrid)
                if k_lo < 0:
                    k_lo = 0
                if k_hi > ng - 1:
                    k_hi = ng - 1
                if k_hi < k_lo:
                    continue
                g = grid0 + k_lo * dgrid
                rre = cos(q * g); rim = -sin(q * g)
                sre = cos(q * dgrid); sim = -sin(q * dgrid)
                for k in range(k_lo, k_hi + 1):
                    dg = g - p
                    gv = exp(-dg * dg / (2.0 * gamma))
                    re = gv * rre
                    im = gv * rim
                    psi[it, k] += c * (re + 1j * im)
                    tmp = rre * sre - rim * sim
                    rim = rre * sim + rim * sre
                    rre = tmp
                    g += dgrid


cdef inline void _gauss_factor(double q, double p, double grid0, double dgrid,
                               double gamma, Py_ssize_t ng,
                               double complex* f,
                               Py_ssize_t* lo, Py_ssize_t* hi) nogil:
    cdef double cut = sqrt(92.0 * gamma)
    cdef Py_ssize_t k_lo = <Py_ssize_t> ceil((p - cut - grid0) / dgrid)
    cdef Py_ssize_t k_hi = <Py_ssize_t> floor((p + cut - grid0) / dgrid)
    cdef Py_ssize_t k
    cdef double g, dg, gv, rre, rim, sre, sim, tmp
    if k_lo < 0:
        k_lo = 0
    if k_hi > ng - 1:
        k_hi = ng - 1
    lo[0] = k_lo
    hi[0] = k_hi
    if k_hi < k_lo:
        return
    g = grid0 + k_lo * dgrid
    rre = cos(q * g); rim = -sin(q * g)
    sre = cos(q * dgrid); sim = -sin(q * dgrid)
    for k in range(k_lo, k_hi + 1):
        dg = g - p
        gv = exp(-dg * dg / (2.0 * gamma))
        f[k] = gv * rre + 1j * gv * rim
        tmp = rre * sre - rim * sim
        rim = rre * sim + rim * sre
        rre = tmp
        g += dgrid


def accumulate_gaussians_2d(cnp.ndarray[cnp.complex128_t, ndim=3] psi,
                            cnp.ndarray[cnp.float64_t, ndim=2] q1s,
                            cnp.ndarray[cnp.float64_t, ndim=2] q2s,
                            cnp.ndarray[cnp.float64_t, ndim=2] p1s,
                            cnp.ndarray[cnp.float64_t, ndim=2] p2s,
                            cnp.ndarray[cnp.complex128_t, ndim=2] coeff,
                            cnp.ndarray[cnp.int64_t, ndim=1] n_valid,
                            double grid0_1, double dgrid_1, double gamma1,
                            double grid0_2, double dgrid_2, double gamma2):
    cdef Py_ssize_t n = q1s.shape[0]
    cdef Py_ssize_t nt = q1s.shape[1]
    cdef Py_ssize_t ng1 = psi.shape[1]
    cdef Py_ssize_t ng2 = psi.shape[2]
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] f1_arr = np.zeros(ng1, dtype=complex)
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] f2_arr = np.zeros(ng2, dtype=complex)
    cdef double complex* f1 = <double complex*> cnp.PyArray_DATA(f1_arr)
    cdef double complex* f2 = <double complex*> cnp.PyArray_DATA(f2_arr)
    cdef Py_ssize_t i, it, k1, k2, lo1, hi1, lo2, hi2
    cdef double complex c, cf
    with nogil:
        for i in range(n):
            for it in range(n_valid[i]):
                c = coeff[i, it]
                if c.real == 0 and c.imag == 0:
                    continue
                _gauss_factor(q1s[i, it], p1s[i, it], grid0_1, dgrid_1,
                              gamma1, ng1, f1, &lo1, &hi1)
                _gauss_factor(q2s[i, it], p2s[i, it], grid0_2, dgrid_2,
                              gamma2, ng2, f2, &lo2, &hi2)
                if hi1 < lo1 or hi2 < lo2:
                    continue
                for k1 in range(lo1, hi1 + 1):
                    cf = c * f1[k1]
                    for k2 in range(lo2, hi2 + 1):
                        psi[it, k1, k2] += cf * f2[k2]
