# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels; operation-for-operation mirror of ``_purepy``."""

from libc.math cimport sqrt, exp, expm1, log1p, sinh, cosh, pow, fabs, copysign, isfinite, NAN, INFINITY, M_PI

import numpy as np
cimport numpy as cnp

from mnlab import _tableau

cnp.import_array()

cdef enum:
    NS = 12

cdef double CA[NS][NS]
cdef double CB[NS]
cdef double CE3[NS + 1]
cdef double CE5[NS + 1]

cdef int _i, _j
for _i in range(NS):
    CB[_i] = _tableau.B[_i]
    for _j in range(NS):
        CA[_i][_j] = _tableau.A[_i][_j]
for _i in range(NS + 1):
    CE3[_i] = _tableau.E3[_i]
    CE5[_i] = _tableau.E5[_i]

cdef double TAU_MAX = 3.5
cdef int MIN_LEVEL = 3
cdef long MAX_STEPS = 1000000
cdef double EPS = 2.220446049250313e-16


cdef inline double _node(double t, double d, double T, double lo, double a0, double a2,
                         double ap, double q0, double p, double n0, double n1, double kpow) noexcept nogil:
    cdef double t2 = t * t
    cdef double one_m_s2, w, s, sp, q, den
    if t2 < 0.5:
        one_m_s2 = t2 * (2.0 - t2)
        w = -expm1((p + 1.0) * log1p(-t2))
    else:
        s = lo + d * (2.0 * T - d)
        sp = pow(s, p + 1.0)
        w = 1.0 - sp
        q = q0 - a2 * s * s - ap * sp
        if not q > 0.0:
            return NAN
        if kpow == 0.5:
            den = sqrt(q)
        else:
            den = q * sqrt(q)
        return 2.0 * t * (n0 + n1 * w) / den
    q = a0 + a2 * one_m_s2 + ap * w
    if not q > 0.0:
        return NAN
    if kpow == 0.5:
        den = sqrt(q)
    else:
        den = q * sqrt(q)
    return 2.0 * t * (n0 + n1 * w) / den


cdef int _timemap(double lo, double a0, double a2, double ap, double q0, double p, double n0,
                  double n1, double kpow, double abs_tol, double rel_tol, int max_levels,
                  double* value, double* error, int* level_out) noexcept nogil:
    cdef double T = sqrt(1.0 - lo)
    cdef double half_pi = 0.5 * M_PI
    cdef double total = 0.0, prev = NAN, err = INFINITY, step = 1.0
    cdef double acc, tau, z, e, d, t, ch, wt, g
    cdef int level, k, kmax
    for level in range(max_levels + 1):
        kmax = <int>(TAU_MAX / step)
        acc = 0.0
        for k in range(-kmax, kmax + 1):
            if level > 0 and (k % 2) == 0:
                continue
            tau = k * step
            z = half_pi * sinh(tau)
            if z > 0.0:
                e = exp(-2.0 * z)
                d = T * e / (1.0 + e)
                t = T / (1.0 + e)
            else:
                e = exp(2.0 * z)
                t = T * e / (1.0 + e)
                d = T / (1.0 + e)
            if t <= 0.0 or d <= 0.0:
                continue
            ch = cosh(z)
            wt = T * half_pi * cosh(tau) / (2.0 * ch * ch)
            g = _node(t, d, T, lo, a0, a2, ap, q0, p, n0, n1, kpow)
            if not isfinite(g):
                value[0] = NAN
                error[0] = t
                level_out[0] = level
                return 2
            acc += wt * g
        if level == 0:
            total = acc * step
        else:
            total = 0.5 * total + acc * step
        if level >= 1:
            err = fabs(total - prev)
            if level >= MIN_LEVEL and err <= max(abs_tol, rel_tol * fabs(total)):
                value[0] = total
                error[0] = err
                level_out[0] = level
                return 0
        prev = total
        step *= 0.5
    value[0] = total
    error[0] = err
    level_out[0] = max_levels
    return 1


def timemap_integral(double lo, double a0, double a2, double ap, double q0, double p, double n0,
                     double n1, double kpow, double abs_tol, double rel_tol, int max_levels):
    cdef double value = 0.0, error = 0.0
    cdef int level = 0, status
    with nogil:
        status = _timemap(lo, a0, a2, ap, q0, p, n0, n1, kpow, abs_tol, rel_tol, max_levels,
                          &value, &error, &level)
    return value, error, level, status


cdef inline void _rhs(double u, double v, double lam, double p, double* du, double* dv) noexcept nogil:
    cdef double nl
    if p == 3.0:
        nl = u * u * u
    else:
        nl = copysign(pow(fabs(u), p), u)
    du[0] = v
    dv[0] = -lam * u - nl


cdef inline void _energy_terms(double u, double v, double lam, double p,
                               double* e, double* sc) noexcept nogil:
    cdef double kin = 0.5 * v * v
    cdef double pot = 0.5 * lam * u * u
    cdef double nl = pow(fabs(u), p + 1.0) / (p + 1.0)
    e[0] = kin + pot + nl
    sc[0] = max(kin, max(fabs(pot), nl))


cdef inline double _hval(double th, double hh, double u0, double v0, double u1, double v1) noexcept nogil:
    cdef double h00 = (1 + 2 * th) * (1 - th) * (1 - th)
    cdef double h10 = th * (1 - th) * (1 - th)
    cdef double h01 = th * th * (3 - 2 * th)
    cdef double h11 = th * th * (th - 1)
    return h00 * u0 + h10 * hh * v0 + h01 * u1 + h11 * hh * v1


cdef double _hermite_zero(double x0, double u0, double v0, double x1, double u1, double v1) noexcept nogil:
    cdef double hh = x1 - x0
    cdef double lo = 0.0, hi = 1.0, mid
    cdef int it
    for it in range(60):
        mid = 0.5 * (lo + hi)
        if _hval(mid, hh, u0, v0, u1, v1) > 0.0:
            lo = mid
        else:
            hi = mid
    return x0 + hi * hh


cdef int _flow(double* state, double x0, double x1, double lam, double p, double rtol,
               double atol, double max_step, const double* sx, Py_ssize_t ns, double* out,
               long* counts, double* diag, int stop_at_zero) noexcept nogil:
    # state: [u, v] in/out; counts: [accepted, rejected]; diag: [zero_x, drift, escale]
    cdef double u = state[0], v = state[1]
    cdef double direction = 1.0 if x1 >= x0 else -1.0
    cdef double x = x0
    cdef double E0, escale, drift = 0.0, zero_x = NAN, e_now, sc
    cdef long n_acc = 0, n_rej = 0
    cdef Py_ssize_t si = 0
    cdef double fu, fv, gu, gv, su, sv, d0, d1, d2, h0, h1, abs_h, span
    cdef double target, dist, h_prop, h_used, hs, du, dv, bu, bv, un, vn
    cdef double scu, scv, e5u, e5v, e3u, e3v, n5, n3, err, xn, factor
    cdef double ku[NS + 1]
    cdef double kv[NS + 1]
    cdef int s, j, clipped, status = 0

    _energy_terms(u, v, lam, p, &E0, &escale)
    while si < ns and sx[si] == x0:
        out[2 * si] = u
        out[2 * si + 1] = v
        si += 1
    if x1 == x0:
        diag[0] = zero_x
        diag[1] = 0.0
        diag[2] = escale
        counts[0] = 0
        counts[1] = 0
        return 0

    _rhs(u, v, lam, p, &fu, &fv)
    span = fabs(x1 - x0)
    su = atol + fabs(u) * rtol
    sv = atol + fabs(v) * rtol
    d0 = sqrt(0.5 * ((u / su) * (u / su) + (v / sv) * (v / sv)))
    d1 = sqrt(0.5 * ((fu / su) * (fu / su) + (fv / sv) * (fv / sv)))
    if d0 < 1e-5 or d1 < 1e-5:
        h0 = 1e-6
    else:
        h0 = 0.01 * d0 / d1
    h0 = min(h0, span)
    _rhs(u + direction * h0 * fu, v + direction * h0 * fv, lam, p, &gu, &gv)
    d2 = sqrt(0.5 * (((gu - fu) / su) * ((gu - fu) / su) + ((gv - fv) / sv) * ((gv - fv) / sv))) / h0
    if d1 <= 1e-15 and d2 <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = pow(0.01 / max(d1, d2), 1.0 / 8.0)
    abs_h = min(min(100.0 * h0, h1), min(span, max_step))

    while True:
        target = sx[si] if si < ns else x1
        dist = fabs(target - x)
        h_prop = min(abs_h, max_step)
        clipped = h_prop >= dist
        h_used = dist if clipped else h_prop
        hs = direction * h_used

        ku[0] = fu
        kv[0] = fv
        for s in range(1, NS):
            du = 0.0
            dv = 0.0
            for j in range(s):
                du += CA[s][j] * ku[j]
                dv += CA[s][j] * kv[j]
            _rhs(u + hs * du, v + hs * dv, lam, p, &ku[s], &kv[s])
        bu = 0.0
        bv = 0.0
        for j in range(NS):
            bu += CB[j] * ku[j]
            bv += CB[j] * kv[j]
        un = u + hs * bu
        vn = v + hs * bv
        _rhs(un, vn, lam, p, &ku[NS], &kv[NS])

        scu = atol + max(fabs(u), fabs(un)) * rtol
        scv = atol + max(fabs(v), fabs(vn)) * rtol
        e5u = 0.0
        e5v = 0.0
        e3u = 0.0
        e3v = 0.0
        for j in range(NS + 1):
            e5u += CE5[j] * ku[j]
            e5v += CE5[j] * kv[j]
            e3u += CE3[j] * ku[j]
            e3v += CE3[j] * kv[j]
        n5 = (e5u / scu) * (e5u / scu) + (e5v / scv) * (e5v / scv)
        n3 = (e3u / scu) * (e3u / scu) + (e3v / scv) * (e3v / scv)
        if n5 == 0.0 and n3 == 0.0:
            err = 0.0
        else:
            err = h_used * n5 / sqrt((n5 + 0.01 * n3) * 2.0)

        if err <= 1.0:
            xn = target if clipped else x + hs
            if u > 0.0 and un <= 0.0 and zero_x != zero_x:
                zero_x = _hermite_zero(x, u, v, xn, un, vn)
                if stop_at_zero:
                    u = un
                    v = vn
                    n_acc += 1
                    break
            x = xn
            u = un
            v = vn
            fu = ku[NS]
            fv = kv[NS]
            n_acc += 1
            _energy_terms(u, v, lam, p, &e_now, &sc)
            if sc > escale:
                escale = sc
            if fabs(e_now - E0) > drift:
                drift = fabs(e_now - E0)
            if err == 0.0:
                factor = 10.0
            else:
                factor = min(10.0, 0.9 * pow(err, -1.0 / 8.0))
            if clipped:
                abs_h = max(h_prop, h_used * factor)
            else:
                abs_h = h_used * factor
            if clipped:
                if si < ns:
                    out[2 * si] = u
                    out[2 * si + 1] = v
                    si += 1
                    while si < ns and sx[si] == x:
                        out[2 * si] = u
                        out[2 * si + 1] = v
                        si += 1
                    if x == x1 and si >= ns:
                        break
                else:
                    break
            if n_acc >= MAX_STEPS:
                status = 4
                break
        else:
            n_rej += 1
            abs_h = h_used * max(0.2, 0.9 * pow(err, -1.0 / 8.0))
            if abs_h < 10.0 * EPS * max(fabs(x), 1e-300):
                status = 3
                break
    state[0] = u
    state[1] = v
    counts[0] = n_acc
    counts[1] = n_rej
    diag[0] = zero_x
    diag[1] = drift
    diag[2] = escale
    return status


def integrate_nonlinear(double u, double v, double x0, double x1, double lam, double p,
                        double rtol, double atol, double max_step, sample_x=None,
                        bint stop_at_zero=False):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] sx
    if not (rtol > 0.0 and atol > 0.0 and max_step > 0.0):
        raise ValueError("rtol, atol and max_step must be positive")
    if sample_x is None:
        sx = np.empty(0)
    else:
        sx = np.ascontiguousarray(sample_x, dtype=np.float64)
    cdef Py_ssize_t ns = sx.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.empty((ns, 2))
    cdef double state[2]
    cdef long counts[2]
    cdef double diag[3]
    cdef int status
    cdef const double* sxp = <const double*>sx.data
    cdef double* outp = <double*>out.data
    state[0] = u
    state[1] = v
    with nogil:
        status = _flow(state, x0, x1, lam, p, rtol, atol, max_step, sxp, ns, outp,
                       counts, diag, stop_at_zero)
    return (state[0], state[1], counts[0], counts[1], diag[0], diag[1], diag[2], out, status)
