"""Finite-time Lyapunov exponents by the discrete QR method.

The state and its tangent flow are integrated together over windows of length
``tau``.  At the end of each window the tangent matrix is QR-factorised
(``R_ii >= 0``), ``ln R_ii`` is accumulated and ``Q`` seeds the next window.
An extra component integrates the Jacobian trace, giving the time-averaged
divergence for the sum-of-exponents identity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import _kernels as K
from .polysys import AffineMap, PolySystem, apply_affine, evaluate_jacobian
from .sim import DEFAULT_ATOL, DEFAULT_MAX_STEPS, DEFAULT_RTOL, DIVERGENCE_NORM, _tables, centered_compiled, integrate


class LceError(RuntimeError):
    pass


@dataclass
class LceSeries:
    times: np.ndarray
    lambdas: np.ndarray  # (m, N), each row descending
    tau: float
    accumulated_logs: np.ndarray  # (m, N), each row descending
    trace_integral: np.ndarray  # (m,), integral of div f from 0 to times[k]
    final_state: np.ndarray
    event: str | None = None
    meta: dict = field(default_factory=dict)

    @property
    def final(self) -> np.ndarray:
        return self.lambdas[-1]

    @property
    def mean_divergence(self) -> float:
        """Time average of the Jacobian trace along the trajectory."""
        return float(self.trace_integral[-1] / self.times[-1])

    def summary(self) -> str:
        lam = self.final
        k_zero = int(np.argmin(np.abs(lam)))
        parts = [f"t={self.times[-1]:.17g}"]
        parts += [f"lambda{i + 1}={v:.17g}" for i, v in enumerate(lam)]
        parts.append(f"sum={lam.sum():.17g}")
        parts.append(f"mean_divergence={self.mean_divergence:.17g}")
        parts.append(f"positive={int((lam > 0).sum())}")
        parts.append(f"nearest_zero=lambda{k_zero + 1}")
        parts.append("dissipative=" + ("yes" if lam.sum() < 0 else "no"))
        if self.event:
            parts.append(f"event={self.event}")
        return "# summary " + " ".join(parts)


def default_tau(s: PolySystem, x0: Sequence[float]) -> float:
    """``0.5 / (1 + rho / 10)`` with ``rho`` the spectral radius of the Jacobian at ``x0``.

    The spectral radius, unlike a matrix norm, is unchanged by the diagonal
    rescalings used to build chemical images, so a system and its image get
    comparable windows.
    """
    J = evaluate_jacobian(s, x0)
    rho = float(np.max(np.abs(np.linalg.eigvals(J)))) if np.all(np.isfinite(J)) else 0.0
    return 0.5 / (1.0 + rho / 10.0)


def lce_qr(s: PolySystem, x0: Sequence[float], t_end: float, tau: float | None = None, *,
           rtol: float = DEFAULT_RTOL, atol: float = DEFAULT_ATOL, transient: float = 0.0,
           recenter: bool = True, w0: np.ndarray | None = None,
           diverge: float = DIVERGENCE_NORM) -> LceSeries:
    """Lyapunov exponents ``lambda_i(m tau)`` for ``m = 1 .. ceil(t_end / tau)``.

    ``transient`` time units are integrated first (base system only) and the
    exponents are measured from the state reached.  ``w0`` is the initial
    orthonormal frame (identity by default).
    """
    n = s.dim
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (n,):
        raise ValueError(f"initial condition must have length {n}")
    if t_end <= 0:
        raise ValueError("t_end must be positive")
    if transient > 0:
        pre = integrate(s, x0, transient, samples=2, rtol=rtol, atol=atol, recenter=recenter, diverge=diverge)
        if pre.truncated:
            raise LceError(f"base trajectory failed during the transient: {pre.event}")
        x0 = pre.final
    if tau is None:
        tau = default_tau(s, x0)
    if tau <= 0:
        raise ValueError("tau must be positive")
    m = int(math.ceil(t_end / tau - 1e-9))
    cs, center = centered_compiled(s, x0, recenter)
    tables = _tables(cs)
    Q = np.eye(n) if w0 is None else np.linalg.qr(np.asarray(w0, dtype=float))[0]
    y = np.empty(n + n * n + 1)
    y[:n] = x0 - center
    logs = np.zeros(n)
    trace = 0.0
    times = np.empty(m)
    lam_rows = np.empty((m, n))
    log_rows = np.empty((m, n))
    trace_rows = np.empty(m)
    no_eval = np.empty(0)
    no_out = np.empty((0, y.size))
    ymin = np.full(n, np.inf)
    stats = np.zeros(3, dtype=np.int64)
    h = 0.0
    event = None
    done = 0
    for k in range(m):
        t_start = k * tau
        y[n:n + n * n] = Q.reshape(-1)
        y[-1] = 0.0
        status, _t, h, _ = K.dopri_run(y, t_start, (k + 1) * tau, h, n, 2, center, rtol, atol, diverge,
                                       *tables, no_eval, 0, no_out, ymin, DEFAULT_MAX_STEPS, stats)
        if status != K.DONE:
            event = f"{K.STATUS_TEXT[status]} in window {k + 1} (t = {_t:.17g})"
            break
        Phi = y[n:n + n * n].reshape(n, n)
        Q, R = np.linalg.qr(Phi)
        signs = np.sign(np.diag(R))
        signs[signs == 0] = 1.0
        Q = Q * signs
        diag = np.diag(R) * signs
        if np.any(diag <= 0) or not np.all(np.isfinite(diag)):
            raise LceError(f"tangent frame collapsed (R_ii = 0) in window {k + 1} "
                           f"[{t_start:.17g}, {(k + 1) * tau:.17g}]")
        logs += np.log(diag)
        trace += y[-1]
        t = (k + 1) * tau
        times[k] = t
        ordered = np.sort(logs)[::-1]
        log_rows[k] = ordered
        lam_rows[k] = ordered / t
        trace_rows[k] = trace
        done = k + 1
    if done == 0:
        raise LceError(f"no complete window: {event}")
    meta = {"rtol": rtol, "atol": atol, "transient": transient, "accepted_steps": int(stats[0]),
            "rejected_steps": int(stats[1]), "rhs_evaluations": int(stats[2]), "windows": done,
            "start_state": x0}
    return LceSeries(times[:done], lam_rows[:done], float(tau), log_rows[:done], trace_rows[:done],
                     y[:n] + center, event, meta)


def lce_discrepancy(a: LceSeries, b: LceSeries) -> float:
    """max_i |lambda_i - lambda'_i| between the end points of two series."""
    return float(np.max(np.abs(a.final - b.final)))


def lce_invariance_check(s: PolySystem, a: AffineMap, x0: Sequence[float], t_end: float,
                         tau: float | None = None, **opts) -> float:
    """Exponents of ``s`` from ``x0`` versus those of its image under ``a`` from ``a(x0)``."""
    x0 = np.asarray(x0, dtype=float)
    if tau is None:
        tau = default_tau(s, x0)
    first = lce_qr(s, x0, t_end, tau, **opts)
    image = apply_affine(s, a)
    second = lce_qr(image, np.asarray(a(list(x0)), dtype=float), t_end, tau, **opts)
    return lce_discrepancy(first, second)
