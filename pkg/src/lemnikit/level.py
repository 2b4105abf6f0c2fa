"""Level curves |P(z)| = t and the change of arg P along them."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from . import kernels
from .errors import (
    ArgumentJumpTooLarge,
    CriticalLevelTooClose,
    MonotonicityViolation,
    SeedNotFound,
    TraceOverflow,
)
from .poly import Polynomial, evaluate, find_roots, proper_critical_points, value_and_derivative

TRACE_TOL = 1e-10
CRITICAL_GAP = 1e-4
ARG_STEP = 2 * math.pi / 320
CURVATURE_TURN = 0.1
MAX_POINTS = 200_000
N_RAY_ATTEMPTS = 8


@dataclass(frozen=True)
class LevelCurve:
    level: float
    points: np.ndarray
    closed: bool
    argument_increment: float
    enclosed_zero_count: int

    def __len__(self):
        return self.points.shape[0]

    @property
    def winding(self) -> float:
        return self.argument_increment / (2 * math.pi)

    def contains(self, z) -> np.ndarray:
        """Point-in-polygon test against the closed sample polygon."""
        z = np.atleast_1d(np.asarray(z, dtype=np.complex128))
        return kernels.inside(z.real.copy(), z.imag.copy(), self.points.real.copy(), self.points.imag.copy())

    def max_gap(self) -> float:
        p = self.points
        return float(np.max(np.abs(np.diff(np.append(p, p[0])))))

    def to_json(self) -> dict:
        return {
            "level": self.level,
            "closed": self.closed,
            "argument_increment": self.argument_increment,
            "enclosed_zero_count": self.enclosed_zero_count,
            "points": [[z.real, z.imag] for z in self.points.tolist()],
        }


def _length_scale(P: Polynomial, a: complex, t: float) -> float:
    loc = find_roots(P).locations
    spread = float(np.max(np.abs(loc - a)))
    return max(spread, (t / abs(P.coeffs[-1])) ** (1.0 / P.degree))


def seed_on_level(P: Polynomial, a: complex, t: float, n_rays: int = N_RAY_ATTEMPTS) -> complex:
    """First point where a ray leaving the zero ``a`` reaches |P| = t.

    Everything before that point lies in {|P| < t}, so the seed is on the
    boundary of the component of the lemniscate that contains ``a``.
    """
    if not (t > 0 and math.isfinite(t)):
        raise ValueError("level must be positive and finite")
    L = _length_scale(P, a, t)
    h_max, h_min = L / 64.0, L * 1e-9
    for k in range(n_rays):
        e = complex(math.cos(2 * math.pi * k / n_rays), math.sin(2 * math.pi * k / n_rays))
        x = 0.0
        fx = abs(evaluate(P, a)) - t
        for _ in range(100_000):
            p, dp = value_and_derivative(P, a + x * e)
            slope = abs(dp)
            h = h_max if slope == 0 else min(h_max, max(h_min, 0.5 * (t - abs(p)) / slope))
            xn = x + h
            fn = abs(evaluate(P, a + xn * e)) - t
            if fn > 0:
                def f(s):
                    return abs(evaluate(P, a + s * e)) - t
                s = brentq(f, x, xn, xtol=1e-15 * L, rtol=4 * np.finfo(float).eps, maxiter=200)
                z = a + s * e
                if abs(abs(evaluate(P, z)) - t) <= TRACE_TOL * t:
                    return z
                break
            x, fx = xn, fn
    raise SeedNotFound(f"no crossing of |P| = {t} found from {a}")


def _polish(P: Polynomial, z: complex, t: float) -> complex:
    for _ in range(20):
        p, dp = value_and_derivative(P, z)
        f = math.log(abs(p)) - math.log(t)
        if abs(f) <= 1e-14:
            break
        g = (dp / p).conjugate()
        z = z - f * g / abs(g) ** 2
    return z


def check_level(P: Polynomial, t: float, gap: float = CRITICAL_GAP):
    for cp in proper_critical_points(P):
        if abs(cp.critical_value - t) <= gap * t:
            raise CriticalLevelTooClose(
                f"level {t} is within {gap:g}·t of the critical value {cp.critical_value} at {cp.location}"
            )


def trace_level_curve(
    P: Polynomial,
    seed: complex,
    t: float,
    *,
    max_step: float | None = None,
    arg_step: float = ARG_STEP,
    critical_gap: float = CRITICAL_GAP,
    max_points: int = MAX_POINTS,
) -> LevelCurve:
    """Closed curve of |P| = t through ``seed``, traversed counterclockwise."""
    if abs(abs(evaluate(P, seed)) - t) > 1e-6 * t:
        raise ValueError("seed is not on the requested level")
    check_level(P, t, critical_gap)
    seed = _polish(P, complex(seed), t)
    if max_step is None:
        p, dp = value_and_derivative(P, seed)
        # 0.05 of a diameter estimate; exact for z**n
        max_step = 0.05 * 2 * P.degree * abs(p / dp)
    pts, count, status = kernels.trace(
        P.array, seed, float(t), float(max_step), float(arg_step), CURVATURE_TURN,
        1e-9 * max_step, 1e-13, int(max_points),
    )
    if status == kernels.CRITICAL_TOO_CLOSE:
        raise CriticalLevelTooClose(f"step size collapsed while tracing |P| = {t} (saddle nearby)")
    if status == kernels.OVERFLOW:
        raise TraceOverflow(f"curve |P| = {t} needs more than {max_points} points")
    points = pts[:count].copy()
    points.setflags(write=False)
    inc = _increment(P, points)
    return LevelCurve(float(t), points, True, inc, int(round(inc / (2 * math.pi))))


def _increment(P: Polynomial, points: np.ndarray) -> float:
    vals = evaluate(P, points)
    ratio = np.roll(vals, -1) / vals
    d = np.angle(ratio)
    worst = float(np.max(np.abs(d)))
    if worst > math.pi / 2:
        raise ArgumentJumpTooLarge(f"arg P jumps by {worst:.3f} rad between samples; refine the curve")
    return float(np.sum(d))


def argument_increment(P: Polynomial, curve: LevelCurve) -> float:
    """Total change of arg P around the closed sample polygon of ``curve``."""
    if not curve.closed:
        raise ValueError("argument increment needs a closed curve")
    return _increment(P, curve.points)


def monotonicity_sweep(P: Polynomial, a: complex, levels, **trace_kw) -> list:
    """(t, N_t) for ascending levels, N_t the zeros enclosed by the curve of
    level t around ``a``. Raises if N_t ever decreases."""
    levels = [float(t) for t in levels]
    if any(t1 >= t2 for t1, t2 in zip(levels, levels[1:])):
        raise ValueError("levels must be strictly ascending")
    out = []
    for t in levels:
        check_level(P, t, trace_kw.get("critical_gap", CRITICAL_GAP))
        curve = trace_level_curve(P, seed_on_level(P, a, t), t, **trace_kw)
        if out and curve.enclosed_zero_count < out[-1][1]:
            raise MonotonicityViolation(
                f"N_t dropped from {out[-1][1]} to {curve.enclosed_zero_count} between t={out[-1][0]} and t={t}"
            )
        out.append((t, curve.enclosed_zero_count))
    return out
