"""Pure-Python kernels.

This module mirrors ``_kernels.pyx`` operation for operation and is used
whenever the compiled extension is unavailable or ``MNLAB_PURE_PYTHON=1``.

Both kernels return plain tuples with a trailing integer status so that the
compiled version can run without the GIL and let the caller raise.
"""

from __future__ import annotations

import math

import numpy as np

from ._tableau import A, B, E3, E5, N_STAGES

STATUS_OK = 0
STATUS_NOT_CONVERGED = 1
STATUS_BAD_INTEGRAND = 2
STATUS_STEP_COLLAPSE = 3
STATUS_STEP_BUDGET = 4

TAU_MAX = 3.5
MIN_LEVEL = 3
MAX_STEPS = 1_000_000
_EPS = 2.220446049250313e-16


def _node(t, d, T, lo, a0, a2, ap, q0, p, n0, n1, kpow):
    t2 = t * t
    if t2 < 0.5:
        one_m_s2 = t2 * (2.0 - t2)
        w = -math.expm1((p + 1.0) * math.log1p(-t2))
    else:
        s = lo + d * (2.0 * T - d)
        sp = s ** (p + 1.0)
        w = 1.0 - sp
        q = q0 - a2 * s * s - ap * sp
        if not q > 0.0:
            return math.nan
        den = math.sqrt(q) if kpow == 0.5 else q * math.sqrt(q)
        return 2.0 * t * (n0 + n1 * w) / den
    q = a0 + a2 * one_m_s2 + ap * w
    if not q > 0.0:
        return math.nan
    if kpow == 0.5:
        den = math.sqrt(q)
    else:
        den = q * math.sqrt(q)
    return 2.0 * t * (n0 + n1 * w) / den


def timemap_integral(lo, a0, a2, ap, q0, p, n0, n1, kpow, abs_tol, rel_tol, max_levels):
    """Tanh-sinh evaluation of ``int_lo^1 (n0 + n1 w) / Q**kpow ds``.

    With ``w = 1 - s**(p+1)`` and ``Q = a0 + a2 (1 - s**2) + ap w``, after the
    substitution ``s = 1 - t**2``. ``q0`` must equal ``Q(0) = a0 + a2 + ap``;
    it is used for small ``s`` so callers can pass it free of cancellation.
    Returns ``(value, error, level, status)``.
    """
    T = math.sqrt(1.0 - lo)
    half_pi = 0.5 * math.pi
    total = 0.0
    prev = math.nan
    err = math.inf
    step = 1.0
    for level in range(max_levels + 1):
        kmax = int(TAU_MAX / step)
        acc = 0.0
        for k in range(-kmax, kmax + 1):
            if level > 0 and k % 2 == 0:
                continue
            tau = k * step
            z = half_pi * math.sinh(tau)
            if z > 0.0:
                e = math.exp(-2.0 * z)
                d = T * e / (1.0 + e)
                t = T / (1.0 + e)
            else:
                e = math.exp(2.0 * z)
                t = T * e / (1.0 + e)
                d = T / (1.0 + e)
            if t <= 0.0 or d <= 0.0:
                continue
            ch = math.cosh(z)
            wt = T * half_pi * math.cosh(tau) / (2.0 * ch * ch)
            g = _node(t, d, T, lo, a0, a2, ap, q0, p, n0, n1, kpow)
            if not math.isfinite(g):
                return math.nan, t, level, STATUS_BAD_INTEGRAND
            acc += wt * g
        if level == 0:
            total = acc * step
        else:
            total = 0.5 * total + acc * step
        if level >= 1:
            err = abs(total - prev)
            if level >= MIN_LEVEL and err <= max(abs_tol, rel_tol * abs(total)):
                return total, err, level, STATUS_OK
        prev = total
        step *= 0.5
    return total, err, max_levels, STATUS_NOT_CONVERGED


def _rhs(u, v, lam, p):
    if p == 3.0:
        nl = u * u * u
    else:
        nl = math.copysign(abs(u) ** p, u)
    return v, -lam * u - nl


def _energy_terms(u, v, lam, p):
    kin = 0.5 * v * v
    pot = 0.5 * lam * u * u
    nl = abs(u) ** (p + 1.0) / (p + 1.0)
    return kin + pot + nl, max(kin, abs(pot), nl)


def _hermite_zero(x0, u0, v0, x1, u1, v1):
    hh = x1 - x0

    def val(th):
        h00 = (1 + 2 * th) * (1 - th) ** 2
        h10 = th * (1 - th) ** 2
        h01 = th * th * (3 - 2 * th)
        h11 = th * th * (th - 1)
        return h00 * u0 + h10 * hh * v0 + h01 * u1 + h11 * hh * v1

    lo, hi = 0.0, 1.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if val(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return x0 + hi * hh


def integrate_nonlinear(u, v, x0, x1, lam, p, rtol, atol, max_step, sample_x=None,
                        stop_at_zero=False):
    """Adaptive DOP853 flow of ``u' = v, v' = -lam u - |u|**(p-1) u``.

    Integrates from ``x0`` to ``x1`` (either direction). Steps are clipped to
    land exactly on every entry of ``sample_x``, which must be monotone in the
    direction of travel and lie within the closed interval. With
    ``stop_at_zero`` the flow returns at the end of the step where ``u`` first
    falls to zero.

    Returns ``(u, v, n_accepted, n_rejected, zero_x, drift, escale, samples,
    status)`` where ``drift`` is the largest energy deviation seen at step
    ends and ``escale`` the largest energy term magnitude.
    """
    if not (rtol > 0.0 and atol > 0.0 and max_step > 0.0):
        raise ValueError("rtol, atol and max_step must be positive")
    if sample_x is None:
        sample_x = np.empty(0)
    sample_x = np.asarray(sample_x, dtype=float)
    ns = sample_x.shape[0]
    out = np.empty((ns, 2))
    direction = 1.0 if x1 >= x0 else -1.0
    x = x0
    E0, escale = _energy_terms(u, v, lam, p)
    drift = 0.0
    zero_x = math.nan
    n_acc = 0
    n_rej = 0
    si = 0
    while si < ns and sample_x[si] == x0:
        out[si, 0] = u
        out[si, 1] = v
        si += 1
    if x1 == x0:
        return u, v, 0, 0, zero_x, 0.0, escale, out, STATUS_OK

    fu, fv = _rhs(u, v, lam, p)
    span = abs(x1 - x0)
    # initial step, Hairer-Norsett-Wanner heuristic
    su = atol + abs(u) * rtol
    sv = atol + abs(v) * rtol
    d0 = math.sqrt(0.5 * ((u / su) ** 2 + (v / sv) ** 2))
    d1 = math.sqrt(0.5 * ((fu / su) ** 2 + (fv / sv) ** 2))
    h0 = 1e-6 if (d0 < 1e-5 or d1 < 1e-5) else 0.01 * d0 / d1
    h0 = min(h0, span)
    gu, gv = _rhs(u + direction * h0 * fu, v + direction * h0 * fv, lam, p)
    d2 = math.sqrt(0.5 * (((gu - fu) / su) ** 2 + ((gv - fv) / sv) ** 2)) / h0
    if d1 <= 1e-15 and d2 <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1.0 / 8.0)
    abs_h = min(100.0 * h0, h1, span, max_step)

    ku = [0.0] * (N_STAGES + 1)
    kv = [0.0] * (N_STAGES + 1)
    while True:
        target = sample_x[si] if si < ns else x1
        dist = abs(target - x)
        h_prop = min(abs_h, max_step)
        clipped = h_prop >= dist
        h_used = dist if clipped else h_prop
        hs = direction * h_used

        ku[0] = fu
        kv[0] = fv
        for s in range(1, N_STAGES):
            row = A[s]
            du = 0.0
            dv = 0.0
            for j in range(s):
                du += row[j] * ku[j]
                dv += row[j] * kv[j]
            ku[s], kv[s] = _rhs(u + hs * du, v + hs * dv, lam, p)
        bu = 0.0
        bv = 0.0
        for j in range(N_STAGES):
            bu += B[j] * ku[j]
            bv += B[j] * kv[j]
        un = u + hs * bu
        vn = v + hs * bv
        ku[N_STAGES], kv[N_STAGES] = _rhs(un, vn, lam, p)

        scu = atol + max(abs(u), abs(un)) * rtol
        scv = atol + max(abs(v), abs(vn)) * rtol
        e5u = e5v = e3u = e3v = 0.0
        for j in range(N_STAGES + 1):
            e5u += E5[j] * ku[j]
            e5v += E5[j] * kv[j]
            e3u += E3[j] * ku[j]
            e3v += E3[j] * kv[j]
        n5 = (e5u / scu) ** 2 + (e5v / scv) ** 2
        n3 = (e3u / scu) ** 2 + (e3v / scv) ** 2
        if n5 == 0.0 and n3 == 0.0:
            err = 0.0
        else:
            err = h_used * n5 / math.sqrt((n5 + 0.01 * n3) * 2.0)

        if err <= 1.0:
            xn = target if clipped else x + hs
            if u > 0.0 and un <= 0.0 and zero_x != zero_x:
                zero_x = _hermite_zero(x, u, v, xn, un, vn)
                if stop_at_zero:
                    return un, vn, n_acc + 1, n_rej, zero_x, drift, escale, out, STATUS_OK
            x = xn
            u = un
            v = vn
            fu = ku[N_STAGES]
            fv = kv[N_STAGES]
            n_acc += 1
            e_now, sc = _energy_terms(u, v, lam, p)
            if sc > escale:
                escale = sc
            if abs(e_now - E0) > drift:
                drift = abs(e_now - E0)
            factor = 10.0 if err == 0.0 else min(10.0, 0.9 * err ** (-1.0 / 8.0))
            abs_h = max(h_prop, h_used * factor) if clipped else h_used * factor
            if clipped:
                if si < ns:
                    out[si, 0] = u
                    out[si, 1] = v
                    si += 1
                    while si < ns and sample_x[si] == x:
                        out[si, 0] = u
                        out[si, 1] = v
                        si += 1
                    if x == x1 and si >= ns:
                        break
                else:
                    break
            if n_acc >= MAX_STEPS:
                return u, v, n_acc, n_rej, zero_x, drift, escale, out, STATUS_STEP_BUDGET
        else:
            n_rej += 1
            abs_h = h_used * max(0.2, 0.9 * err ** (-1.0 / 8.0))
            if abs_h < 10.0 * _EPS * max(abs(x), 1e-300):
                return u, v, n_acc, n_rej, zero_x, drift, escale, out, STATUS_STEP_COLLAPSE
    return u, v, n_acc, n_rej, zero_x, drift, escale, out, STATUS_OK
