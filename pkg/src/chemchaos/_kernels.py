"""Compiled Dormand-Prince 5(4) kernel for polynomial vector fields.

The state may be augmented with the variational matrix (row-major N x N,
``dPhi/dt = J(x) Phi``) and one scalar accumulating the Jacobian trace, so a
single adaptive integration advances the base solution, its tangent flow and
the divergence integral with shared step control.
"""

from __future__ import annotations

import numpy as np

try:
    from numba import njit
except ImportError:  # pragma: no cover - exercised only without numba
    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]
        return lambda f: f

# Butcher tableau
C2, C3, C4, C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
A21 = 1 / 5
A31, A32 = 3 / 40, 9 / 40
A41, A42, A43 = 44 / 45, -56 / 15, 32 / 9
A51, A52, A53, A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
A61, A62, A63, A64, A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
B1, B3, B4, B5, B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
# difference between 5th- and 4th-order weights
E1, E3, E4, E5, E6, E7 = 71 / 57600, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40

# continuous extension: y(t + th h) = y + h * sum_i k_i * (P[i] . (th, th^2, th^3, th^4))
DENSE_P = np.array([
    [1.0, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432],
    [0.0, 0.0, 0.0, 0.0],
    [0.0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799],
    [0.0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072],
    [0.0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632],
    [0.0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844],
    [0.0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
])

# PI step-size control
SAFETY = 0.9
BETA = 0.04
EXPO1 = 0.2 - 0.75 * BETA
FAC_MIN = 0.2
FAC_MAX = 10.0

DONE, STEP_UNDERFLOW, DIVERGED, MAX_STEPS, NON_FINITE = 0, 2, 3, 4, 5
STATUS_TEXT = {
    DONE: "completed",
    STEP_UNDERFLOW: "step size underflow",
    DIVERGED: "state norm exceeded divergence threshold",
    MAX_STEPS: "maximum number of steps reached",
    NON_FINITE: "non-finite state",
}


@njit(cache=True, nogil=True)
def poly_rhs(y, n, mode, teq, tcoef, texp, jrow, jcol, jcoef, jexp, J, out):
    """mode 0: base field only; 1: with variational matrix; 2: with matrix and trace."""
    for i in range(out.shape[0]):
        out[i] = 0.0
    for k in range(teq.shape[0]):
        v = tcoef[k]
        for j in range(n):
            e = texp[k, j]
            for _ in range(e):
                v *= y[j]
        out[teq[k]] += v
    if mode == 0:
        return
    for i in range(n):
        for j in range(n):
            J[i, j] = 0.0
    for k in range(jrow.shape[0]):
        v = jcoef[k]
        for j in range(n):
            e = jexp[k, j]
            for _ in range(e):
                v *= y[j]
        J[jrow[k], jcol[k]] += v
    for i in range(n):
        for j in range(n):
            acc = 0.0
            for m in range(n):
                acc += J[i, m] * y[n + m * n + j]
            out[n + i * n + j] = acc
    if mode == 2:
        tr = 0.0
        for i in range(n):
            tr += J[i, i]
        out[n + n * n] = tr


@njit(cache=True, nogil=True)
def _err_norm(y, ynew, err, center, n_ctl, rtol, atol):
    """Max over components of |err| / (atol + rtol * scale).

    For the first ``n_ctl`` components the scale is the smaller of the
    offset magnitude and the absolute magnitude ``|center + y|``.
    """
    e = 0.0
    for i in range(y.shape[0]):
        s = max(abs(y[i]), abs(ynew[i]))
        if i < n_ctl:
            sa = max(abs(center[i] + y[i]), abs(center[i] + ynew[i]))
            if sa < s:
                s = sa
        r = abs(err[i]) / (atol + rtol * s)
        if r > e:
            e = r
    return e


@njit(cache=True, nogil=True)
def initial_step(t, y, f0, t_end, n, mode, center, rtol, atol,
                 teq, tcoef, texp, jrow, jcol, jcoef, jexp, J, work, f1):
    """Starting step size following Hairer, Norsett and Wanner (II.4)."""
    dim = y.shape[0]
    d0 = 0.0
    d1 = 0.0
    for i in range(dim):
        sc = atol + rtol * abs(y[i])
        d0 = max(d0, abs(y[i]) / sc)
        d1 = max(d1, abs(f0[i]) / sc)
    if d0 < 1e-5 or d1 < 1e-5:
        h0 = 1e-6
    else:
        h0 = 0.01 * d0 / d1
    h0 = min(h0, t_end - t)
    for i in range(dim):
        work[i] = y[i] + h0 * f0[i]
    poly_rhs(work, n, mode, teq, tcoef, texp, jrow, jcol, jcoef, jexp, J, f1)
    d2 = 0.0
    for i in range(dim):
        sc = atol + rtol * abs(y[i])
        d2 = max(d2, abs(f1[i] - f0[i]) / sc)
    d2 /= h0
    if d1 <= 1e-15 and d2 <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    return min(100 * h0, h1, t_end - t)


@njit(cache=True, nogil=True)
def dopri_run(y, t, t_end, h, n, mode, center, rtol, atol, diverge,
              teq, tcoef, texp, jrow, jcol, jcoef, jexp,
              t_eval, k_eval, out, ymin, max_steps, stats):
    """Advance ``y`` (in place) from ``t`` towards ``t_end``.

    Dense samples at ``t_eval[k_eval:]`` are written to ``out`` rows starting
    at ``k_eval``.  ``ymin`` tracks the componentwise minimum of
    ``center + y`` over accepted step endpoints for the first ``n`` entries.
    ``stats`` accumulates [accepted, rejected, rhs evaluations].

    Returns (status, t, h, k_eval).
    """
    dim = y.shape[0]
    J = np.empty((n, n))
    k1 = np.empty(dim)
    k2 = np.empty(dim)
    k3 = np.empty(dim)
    k4 = np.empty(dim)
    k5 = np.empty(dim)
    k6 = np.empty(dim)
    k7 = np.empty(dim)
    ytmp = np.empty(dim)
    ynew = np.empty(dim)
    err = np.empty(dim)
    P = DENSE_P
    poly_rhs(y, n, mode, teq, tcoef, texp, jrow, jcol, jcoef, jexp, J, k1)
    stats[2] += 1
    n_eval = t_eval.shape[0]
    while k_eval < n_eval and t_eval[k_eval] <= t:
        for i in range(dim):
            out[k_eval, i] = y[i]
        k_eval += 1
    if h <= 0.0:
        h = initial_step(t, y, k1, t_end, n, mode, center, rtol, atol,
                         teq, tcoef, texp, jrow, jcol, jcoef, jexp, J, ytmp, k2)
        stats[2] += 1
    facold = 1e-4
    last_rejected = False
    nonfinite = False
    steps = 0
    while t < t_end:
        if steps >= max_steps:
            return MAX_STEPS, t, h, k_eval
        hmin = 16.0 * 2.220446049250313e-16 * max(abs(t), 1.0)
        if h < hmin:
            return (NON_FINITE if nonfinite else STEP_UNDERFLOW), t, h, k_eval
        last = False
        h_proposed = h
        if t + h >= t_end:
            h = t_end - t
            last = True
        for i in range(dim):
            ytmp[i] = y[i] + h * A21 * k1[i]
        poly_rhs(ytmp, n, mode, teq, tcoef, texp, jrow, jcol, jcoef, jexp, J, k2)
        for i in range(dim):
            ytmp[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i])
        poly_rhs(ytmp, n, mode, teq, tcoef, texp, jrow, jcol, jcoef, jexp, J, k3)
        for i in range(dim):
            ytmp[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i])
        poly_rhs(ytmp, n, mode, teq, tcoef, texp, jrow, jcol, jcoef, jexp, J, k4)
        for i in range(dim):
            ytmp[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i])
        poly_rhs(ytmp, n, mode, teq, tcoef, texp, jrow, jcol, jcoef, jexp, J, k5)
        for i in range(dim):
            ytmp[i] = y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i])
        poly_rhs(ytmp, n, mode, teq, tcoef, texp, jrow, jcol, jcoef, jexp, J, k6)
        for i in range(dim):
            ynew[i] = y[i] + h * (B1 * k1[i] + B3 * k3[i] + B4 * k4[i] + B5 * k5[i] + B6 * k6[i])
        poly_rhs(ynew, n, mode, teq, tcoef, texp, jrow, jcol, jcoef, jexp, J, k7)
        stats[2] += 6
        for i in range(dim):
            err[i] = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i])
        finite = True
        for i in range(dim):
            if not np.isfinite(ynew[i]) or not np.isfinite(err[i]):
                finite = False
                break
        if not finite:
            # treat as a failed step first; persistent failure ends in underflow
            h *= FAC_MIN
            nonfinite = True
            last_rejected = True
            stats[1] += 1
            steps += 1
            continue
        nonfinite = False
        e = _err_norm(y, ynew, err, center, n, rtol, atol)
        fac11 = e ** EXPO1
        if e <= 1.0:
            fac = fac11 / facold ** BETA
            fac = min(1.0 / FAC_MIN, max(1.0 / FAC_MAX, fac / SAFETY))
            hnew = h / fac
            if last_rejected:
                hnew = min(hnew, h)
            elif last:
                # a step shortened to hit t_end says nothing about the next one
                hnew = max(hnew, h_proposed)
            facold = max(e, 1e-4)
            t_new = t_end if last else t + h
            # dense samples inside (t, t_new]
            while k_eval < n_eval and t_eval[k_eval] <= t_new:
                th = (t_eval[k_eval] - t) / h
                th2 = th * th
                th3 = th2 * th
                th4 = th3 * th
                for i in range(dim):
                    q = 0.0
                    q += k1[i] * (P[0, 0] * th + P[0, 1] * th2 + P[0, 2] * th3 + P[0, 3] * th4)
                    q += k3[i] * (P[2, 0] * th + P[2, 1] * th2 + P[2, 2] * th3 + P[2, 3] * th4)
                    q += k4[i] * (P[3, 0] * th + P[3, 1] * th2 + P[3, 2] * th3 + P[3, 3] * th4)
                    q += k5[i] * (P[4, 0] * th + P[4, 1] * th2 + P[4, 2] * th3 + P[4, 3] * th4)
                    q += k6[i] * (P[5, 0] * th + P[5, 1] * th2 + P[5, 2] * th3 + P[5, 3] * th4)
                    q += k7[i] * (P[6, 0] * th + P[6, 1] * th2 + P[6, 2] * th3 + P[6, 3] * th4)
                    out[k_eval, i] = y[i] + h * q
                k_eval += 1
            norm = 0.0
            for i in range(dim):
                y[i] = ynew[i]
                k1[i] = k7[i]
            for i in range(n):
                v = center[i] + y[i]
                if v < ymin[i]:
                    ymin[i] = v
                if abs(v) > norm:
                    norm = abs(v)
            t = t_new
            h = hnew
            steps += 1
            stats[0] += 1
            last_rejected = False
            if norm > diverge:
                return DIVERGED, t, h, k_eval
        else:
            h = h / min(1.0 / FAC_MIN, fac11 / SAFETY)
            last_rejected = True
            steps += 1
            stats[1] += 1
    return DONE, t, h, k_eval


@njit(cache=True, nogil=True)
def fixed_step_run(y, t, t_end, nsteps, n, teq, tcoef, texp, jrow, jcol, jcoef, jexp):
    """Plain 5th-order Dormand-Prince steps of equal size (order verification)."""
    dim = y.shape[0]
    J = np.empty((n, n))
    k1 = np.empty(dim)
    k2 = np.empty(dim)
    k3 = np.empty(dim)
    k4 = np.empty(dim)
    k5 = np.empty(dim)
    k6 = np.empty(dim)
    ytmp = np.empty(dim)
    h = (t_end - t) / nsteps
    for _ in range(nsteps):
        poly_rhs(y, n, 0, teq, tcoef, texp, jrow, jcol, jcoef, jexp, J, k1)
        for i in range(dim):
            ytmp[i] = y[i] + h * A21 * k1[i]
        poly_rhs(ytmp, n, 0, teq, tcoef, texp, jrow, jcol, jcoef, jexp, J, k2)
        for i in range(dim):
            ytmp[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i])
        poly_rhs(ytmp, n, 0, teq, tcoef, texp, jrow, jcol, jcoef, jexp, J, k3)
        for i in range(dim):
            ytmp[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i])
        poly_rhs(ytmp, n, 0, teq, tcoef, texp, jrow, jcol, jcoef, jexp, J, k4)
        for i in range(dim):
            ytmp[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i])
        poly_rhs(ytmp, n, 0, teq, tcoef, texp, jrow, jcol, jcoef, jexp, J, k5)
        for i in range(dim):
            ytmp[i] = y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i])
        poly_rhs(ytmp, n, 0, teq, tcoef, texp, jrow, jcol, jcoef, jexp, J, k6)
        for i in range(dim):
            y[i] = y[i] + h * (B1 * k1[i] + B3 * k3[i] + B4 * k4[i] + B5 * k5[i] + B6 * k6[i])
        t += h
    return y
