"""Trajectories, equilibria and positivity monitoring for polynomial systems.

Chemical images of chaotic systems typically live at huge offsets (states of
order 1e5 to 1e9) while the dynamics happen on an O(1)-relative scale.  To
avoid catastrophic cancellation, integration runs in offset coordinates
``d = x - c`` where ``c`` is the initial state taken as an exact rational and
the system is translated exactly before being converted to floats.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy.stats import qmc

from . import _kernels as K
from .polysys import AffineMap, CompiledSystem, PolySystem, apply_affine

DEFAULT_RTOL = 1e-9
DEFAULT_ATOL = 1e-12
DEFAULT_TRANSIENT = 100.0
DIVERGENCE_NORM = 1e12
DEFAULT_MAX_STEPS = 200_000_000


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    meta: dict = field(default_factory=dict)
    event: str | None = None

    @property
    def truncated(self) -> bool:
        return self.event is not None

    @property
    def final(self) -> np.ndarray:
        return self.meta.get("final_state", self.states[-1])

    @property
    def step_min(self) -> np.ndarray:
        """Componentwise minimum over every accepted step endpoint."""
        return self.meta["step_min"]


@dataclass
class Equilibrium:
    point: np.ndarray
    jacobian_eigenvalues: np.ndarray
    stable: bool
    residual: float
    relative_residual: float


def exact_point(x: Sequence[float]) -> tuple[Fraction, ...]:
    """The exact binary value of each float as a rational."""
    return tuple(Fraction(float(v)) for v in x)


@lru_cache(maxsize=256)
def _shifted(s: PolySystem, center: tuple[Fraction, ...]) -> CompiledSystem:
    if all(c == 0 for c in center):
        return s.compiled
    moved = apply_affine(s, AffineMap.translation(tuple(-c for c in center)))
    return moved.compiled


def centered_compiled(s: PolySystem, x0: Sequence[float], recenter: bool = True):
    """Compiled system in offset coordinates around ``x0``, and the offset."""
    center = exact_point(x0) if recenter else (Fraction(0),) * s.dim
    return _shifted(s, center), np.array([float(c) for c in center])


def _tables(cs: CompiledSystem):
    return (cs.term_eq, cs.term_coef, cs.term_exp, cs.jac_row, cs.jac_col, cs.jac_coef, cs.jac_exp)


def integrate(s: PolySystem, x0: Sequence[float], t_end: float, *, samples: int | None = 1001,
              t_eval: Sequence[float] | None = None, t0: float = 0.0,
              rtol: float = DEFAULT_RTOL, atol: float = DEFAULT_ATOL, recenter: bool = True,
              diverge: float = DIVERGENCE_NORM, max_steps: int = DEFAULT_MAX_STEPS) -> Trajectory:
    """Adaptive Dormand-Prince 5(4) integration with dense output.

    Output times are ``t_eval`` if given, else ``samples`` equally spaced
    points on ``[t0, t_end]``.  On divergence, step underflow or non-finite
    states the trajectory is truncated and ``event`` says why.
    """
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (s.dim,):
        raise ValueError(f"initial condition must have length {s.dim}")
    if not np.all(np.isfinite(x0)):
        raise ValueError("initial condition must be finite")
    if not t_end > t0:
        raise ValueError("t_end must exceed t0")
    if rtol <= 0 or atol <= 0:
        raise ValueError("tolerances must be positive")
    if t_eval is None:
        if samples is None or samples < 2:
            raise ValueError("need at least two samples")
        t_eval = np.linspace(t0, t_end, samples)
    t_eval = np.asarray(t_eval, dtype=float)
    if t_eval.ndim != 1 or np.any(np.diff(t_eval) <= 0) or t_eval[0] < t0 or t_eval[-1] > t_end:
        raise ValueError("t_eval must be strictly increasing inside [t0, t_end]")
    cs, center = centered_compiled(s, x0, recenter)
    y = x0 - center
    out = np.empty((len(t_eval), s.dim))
    ymin = x0.copy()
    stats = np.zeros(3, dtype=np.int64)
    status, t, h, k = K.dopri_run(y, float(t0), float(t_end), 0.0, s.dim, 0, center, rtol, atol, diverge,
                                  *_tables(cs), t_eval, 0, out, ymin, max_steps, stats)
    states = out[:k] + center
    meta = {
        "method": "Dormand-Prince 5(4), PI control",
        "rtol": rtol, "atol": atol, "recentered": bool(recenter),
        "accepted_steps": int(stats[0]), "rejected_steps": int(stats[1]), "rhs_evaluations": int(stats[2]),
        "status": K.STATUS_TEXT[status], "t_final": t, "final_state": y + center, "step_min": ymin,
        "last_step": h,
    }
    event = None if status == K.DONE else f"{K.STATUS_TEXT[status]} at t = {t:.17g}"
    times = t_eval[:k]
    if event is not None:
        times = np.append(times, t)
        states = np.vstack([states, y + center])
    return Trajectory(times, states, meta, event)


def integrate_fixed(s: PolySystem, x0: Sequence[float], t_end: float, nsteps: int) -> np.ndarray:
    """Equal-step 5th-order Dormand-Prince integration (no error control)."""
    cs = s.compiled
    y = np.array(x0, dtype=float)
    return K.fixed_step_run(y, 0.0, float(t_end), int(nsteps), s.dim, *_tables(cs))


def monitor_positivity(traj: Trajectory, slack: float | None = None):
    """First sample with a component below ``-slack``: (time, index, value), else None."""
    if slack is None:
        slack = traj.meta.get("atol", DEFAULT_ATOL)
    bad = np.nonzero(traj.states < -slack)
    if bad[0].size == 0:
        return None
    row = int(bad[0].min())
    col = int(np.argmin(traj.states[row]))
    return float(traj.times[row]), col, float(traj.states[row, col])


# -- equilibria --------------------------------------------------------------

def _exact_residual(s: PolySystem, p: Sequence[float]) -> tuple[float, float]:
    """Exact ``||f(p)||_2`` at the float point ``p``, and its size relative to the term magnitudes.

    The scale is the largest equation-wise sum of ``|term|``, floored at the
    largest coefficient so that roots near the origin are not judged against
    vanishing terms.
    """
    q = exact_point(p)
    vals = []
    mags = []
    for poly in s.polys:
        total = Fraction(0)
        mag = Fraction(0)
        for e, c in poly.items():
            term = c
            for qj, k in zip(q, e):
                if k:
                    term *= qj ** k
            total += term
            mag += abs(term)
        vals.append(float(total))
        mags.append(float(mag))
    res = float(np.linalg.norm(vals))
    coef = max((float(abs(c)) for poly in s.polys for _e, c in poly.items()), default=1.0)
    scale = max(max(mags), coef, np.finfo(float).tiny)
    return res, res / scale


def _newton(cs: CompiledSystem, d: np.ndarray, width: np.ndarray, max_iter: int):
    f = cs.f(d)
    fn = np.linalg.norm(f)
    for _ in range(max_iter):
        J = cs.jac(d) * width  # columns in normalised units
        try:
            du = np.linalg.lstsq(J, -f, rcond=None)[0]
        except np.linalg.LinAlgError:
            return d, False
        step = du * width
        lam = 1.0
        while True:
            trial = d + lam * step
            ft = cs.f(trial)
            ftn = np.linalg.norm(ft)
            if np.isfinite(ftn) and ftn <= (1 - 1e-4 * lam) * fn:
                break
            lam *= 0.5
            if lam < 1e-10:
                # no further decrease possible: converged only if already at the noise floor
                return d, bool(np.max(np.abs(du)) < 1e-8)
        d, f, fn = trial, ft, ftn
        if np.max(np.abs(lam * du)) < 1e-15 or fn == 0.0:
            return d, True
    return d, bool(np.max(np.abs(lam * du)) < 1e-9)


def _close(p: np.ndarray, q: np.ndarray, rel: float) -> bool:
    return np.linalg.norm(p - q) <= rel * max(np.linalg.norm(p), np.linalg.norm(q), 1.0)


def find_equilibria(s: PolySystem, box: Sequence[Sequence[float]], n_starts: int = 64, *,
                    seed: int = 0, max_iter: int = 60, dedupe: float = 1e-8,
                    max_relative_residual: float = 1e-10) -> list[Equilibrium]:
    """Damped Newton from scrambled Sobol seeds in ``box`` = [(lo, hi), ...].

    ``relative_residual`` is ``||f||`` over the term-magnitude scale of
    ``_exact_residual``; candidates above ``max_relative_residual`` are dropped.

    Each candidate is polished in coordinates centred exactly on it, so the
    reported point is accurate even at large offsets; residuals are evaluated
    exactly at the float point.
    """
    box = np.asarray(box, dtype=float)
    if box.shape != (s.dim, 2) or np.any(box[:, 1] <= box[:, 0]) or not np.all(np.isfinite(box)):
        raise ValueError(f"box must be {s.dim} finite (lo, hi) pairs with lo < hi")
    lo, hi = box[:, 0], box[:, 1]
    mid = (lo + hi) / 2
    width = (hi - lo) / 2
    cs, center = centered_compiled(s, mid)
    sampler = qmc.Sobol(d=s.dim, scramble=True, seed=seed)
    m = int(np.ceil(np.log2(max(n_starts, 2))))
    seeds = sampler.random_base2(m)[:n_starts]
    candidates: list[np.ndarray] = []
    for u in seeds:
        d0 = (2 * u - 1) * width + (mid - center)
        d, ok = _newton(cs, d0, width, max_iter)
        x = center + d
        if not ok or not np.all(np.isfinite(x)):
            continue
        if np.any(x < lo - 1e-9 * width) or np.any(x > hi + 1e-9 * width):
            continue
        if not any(_close(x, c, 1e-6) for c in candidates):
            candidates.append(x)
    found: list[Equilibrium] = []
    for x in candidates:
        for _ in range(2):
            local, c2 = centered_compiled(s, x)
            d, _ok = _newton(local, np.zeros(s.dim), np.maximum(np.abs(x), 1.0), 4)
            x = c2 + d
        res, rel = _exact_residual(s, x)
        if rel > max_relative_residual:
            continue
        if any(_close(x, e.point, dedupe) for e in found):
            continue
        J = _exact_jacobian(s, x)
        eig = np.linalg.eigvals(J)
        found.append(Equilibrium(x, eig, bool(np.all(eig.real < 0)), res, rel))
    found.sort(key=lambda e: tuple(e.point))
    return found


def _exact_jacobian(s: PolySystem, p: Sequence[float]) -> np.ndarray:
    q = exact_point(p)
    n = s.dim
    J = np.empty((n, n))
    for i, poly in enumerate(s.polys):
        for j in range(n):
            J[i, j] = float(poly.diff(j)(q))
    return J
