"""Checks of |(z-a)P'(z)/P(z)| <= n on critical-point-free lemniscate
components, of the polar-derivative sign, and of the inverse-branch bound."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .kernels import horner3
from .errors import ContinuationDiverged, CriticalPointHit, LemniscateError
from .level import LevelCurve, seed_on_level, trace_level_curve
from .poly import Polynomial, bound_value, evaluate, polar_derivative, value_and_derivative
from .topology import Component, MergeTree, _descent_index

VERIFY_TOL = 1e-9
POSITIVITY_TOL = 1e-12
CONTINUATION_TOL = 1e-12


class Verdict(str, enum.Enum):
    HOLDS = "HOLDS"
    VIOLATED = "VIOLATED"
    INAPPLICABLE = "INAPPLICABLE"


@dataclass(frozen=True)
class SamplingPlan:
    sublevels: int = 5  # boundary curves at tau, tau/2, ..., tau/2**(sublevels-1)
    min_boundary_per_curve: int = 256
    interior: int = 1000
    seed: int = 0
    probes: tuple = ()  # extra points, kept when they lie in the component


@dataclass(frozen=True)
class BoundReport:
    component_id: int
    level: float
    n: int
    anchor: complex
    eligible: bool
    sample_z: np.ndarray
    sample_value: np.ndarray
    sample_kind: tuple  # "boundary" / "interior" / "probe" per sample
    verdict: Verdict
    curves: tuple = field(default=(), repr=False)

    @property
    def max_bound(self) -> float:
        return float(self.sample_value.max())

    @property
    def argmax_z(self) -> complex:
        return complex(self.sample_z[int(np.argmax(self.sample_value))])

    @property
    def slack(self) -> float:
        return self.n - self.max_bound

    def count(self, kind: str) -> int:
        return sum(k == kind for k in self.sample_kind)

    def to_json(self, verbose: bool = False) -> dict:
        z = self.argmax_z
        out = {
            "component": self.component_id,
            "level": self.level,
            "n": self.n,
            "anchor": [self.anchor.real, self.anchor.imag],
            "eligible": self.eligible,
            "verdict": self.verdict.value,
            "max_bound": self.max_bound,
            "argmax_z": [z.real, z.imag],
            "slack": self.slack,
            "boundary_samples": self.count("boundary"),
            "interior_samples": self.count("interior"),
            "probes": [
                {"z": [w.real, w.imag], "bound_value": float(v)}
                for w, v, k in zip(self.sample_z.tolist(), self.sample_value.tolist(), self.sample_kind)
                if k == "probe"
            ],
        }
        if verbose:
            out["samples"] = [
                {"z": [w.real, w.imag], "bound_value": v, "kind": k}
                for w, v, k in zip(self.sample_z.tolist(), self.sample_value.tolist(), self.sample_kind)
            ]
        return out


def _interior_samples(P, curve: LevelCurve, a: complex, count: int, rng) -> np.ndarray:
    pts = curve.points
    lo = complex(pts.real.min(), pts.imag.min())
    hi = complex(pts.real.max(), pts.imag.max())
    got = []
    total = 0
    for _ in range(1000):
        x = rng.uniform(lo.real, hi.real, 4096)
        y = rng.uniform(lo.imag, hi.imag, 4096)
        z = x + 1j * y
        keep = curve.contains(z) & (np.abs(evaluate(P, z)) < curve.level) & (z != a)
        got.append(z[keep])
        total += int(keep.sum())
        if total >= count:
            break
    return np.concatenate(got)[:count]


def verify_theorem(P: Polynomial, component: Component, plan: SamplingPlan = SamplingPlan(),
                   verify_tol: float = VERIFY_TOL) -> BoundReport:
    """Sample |(z-a)P'/P| over a component with a = its anchor zero.

    Eligible components get boundary curves at geometric sublevels plus
    interior points. Ineligible ones only get the boundary at tau (plus
    probes): the hypothesis fails there and the samples document by how much.
    """
    a = component.anchor_zero
    tau = component.level
    n = P.degree
    arg_step = 2 * math.pi / max(320, plan.min_boundary_per_curve)
    zs, kinds, curves = [], [], []
    levels = [tau / 2**j for j in range(plan.sublevels)] if component.eligible else [tau]
    for t in levels:
        curve = trace_level_curve(P, seed_on_level(P, a, t), t, arg_step=arg_step)
        if component.eligible and curve.enclosed_zero_count != component.multiplicity:
            raise LemniscateError(
                f"curve at level {t} encloses {curve.enclosed_zero_count} zeros, component has {component.multiplicity}"
            )
        curves.append(curve)
        zs.append(curve.points)
        kinds += ["boundary"] * len(curve)
    if component.eligible and plan.interior:
        rng = np.random.default_rng(plan.seed)
        inner = _interior_samples(P, curves[0], a, plan.interior, rng)
        zs.append(inner)
        kinds += ["interior"] * inner.shape[0]
    for w in plan.probes:
        w = complex(w)
        if w == a or abs(evaluate(P, w)) > tau * (1 + 1e-9):
            continue
        if _descent_index(P, w) in component.zero_indices:
            zs.append(np.array([w]))
            kinds.append("probe")
    z = np.concatenate(zs)
    values = np.asarray(bound_value(P, a, z), dtype=float)
    if not component.eligible:
        verdict = Verdict.INAPPLICABLE
    elif values.max() <= n * (1 + verify_tol):
        verdict = Verdict.HOLDS
    else:
        verdict = Verdict.VIOLATED
    z.setflags(write=False)
    values.setflags(write=False)
    return BoundReport(component.id, tau, n, a, component.eligible, z, values, tuple(kinds), verdict, tuple(curves))


class CorollaryCheck(NamedTuple):
    applicable: bool
    re_polar: float
    holds: bool


def verify_corollary(P: Polynomial, component: Component, z: complex,
                     positivity_tol: float = POSITIVITY_TOL, verify_tol: float = VERIFY_TOL) -> CorollaryCheck:
    """Re[n P(z) - (z-a) P'(z)] >= 0 where P(z) > 0 on an eligible component."""
    p = evaluate(P, z)
    positive = p.real > 0 and abs(p.imag) <= positivity_tol * abs(p)
    applicable = bool(component.eligible and positive)
    re_polar = polar_derivative(P, component.anchor_zero, z).real
    holds = (not applicable) or re_polar >= -verify_tol * P.degree * abs(p)
    return CorollaryCheck(applicable, float(re_polar), bool(holds))


# ----------------------------------------------------------------------------
# inverse branch


@dataclass(frozen=True)
class InverseBranchPath:
    a: complex
    direction: complex
    w_samples: np.ndarray
    f_values: np.ndarray
    derivative_values: np.ndarray

    def ratios(self) -> np.ndarray:
        """|w f'(w) / (f(w) - a)| at every sample."""
        return np.abs(self.w_samples * self.derivative_values / (self.f_values - self.a))

    def to_json(self) -> dict:
        return {
            "a": [self.a.real, self.a.imag],
            "direction": [self.direction.real, self.direction.imag],
            "w": [[w.real, w.imag] for w in self.w_samples.tolist()],
            "f": [[f.real, f.imag] for f in self.f_values.tolist()],
            "ratio": self.ratios().tolist(),
        }


def continue_inverse_branch(P: Polynomial, a: complex, direction: complex, radius_steps: int,
                            radius: float = 1.0, derivative_floor: float = 1e-10) -> InverseBranchPath:
    """Branch f of P^{-1} with f(0) = a, continued along w = s·radius·direction.

    Integrates df/dw = 1/P'(f) with a second-order predictor and re-projects
    onto P(f) = w by Newton after each step. Samples at s = k/(steps+1).
    """
    direction = complex(direction) / abs(direction) * radius
    floor = derivative_floor * P.scale
    _, d0 = value_and_derivative(P, a)
    if abs(d0) < floor:
        raise CriticalPointHit(f"{a} is a multiple zero; no single-valued branch starts there")
    s_samples = np.arange(1, radius_steps + 1) / (radius_steps + 1)
    z, s = complex(a), 0.0
    fs, ds = [], []
    for target in s_samples:
        while s < target:
            p, dp, ddp = _p012(P, z)
            if abs(dp) < floor:
                raise CriticalPointHit(f"P' vanishes near {z}; the branch cannot be continued")
            # keep each step well inside the distance to the nearest critical point
            room = 0.05 * abs(dp / ddp) if ddp != 0 else math.inf
            ds_max = min(target - s, room * abs(dp) / radius)
            for _ in range(40):
                s_new = min(target, s + ds_max)
                if s_new <= s:
                    raise CriticalPointHit(f"steps collapse near {z}: the path runs into a critical point")
                w_new = s_new * direction
                dw = w_new - p
                zn = z + dw / dp - 0.5 * ddp / dp**3 * dw * dw
                zn, ok = _newton_to(P, zn, w_new)
                if ok and abs(zn - z) <= 4 * abs(dw / dp) + 1e-300:
                    break
                ds_max *= 0.5
            else:
                raise ContinuationDiverged(f"continuation stalled at w = {s * direction}")
            z, s = zn, s_new
        _, dp = value_and_derivative(P, z)
        fs.append(z)
        ds.append(1.0 / dp)
    f = np.array(fs)
    if f.shape[0] > 1 and np.min(np.abs(np.diff(f))) <= CONTINUATION_TOL * max(1.0, abs(a)):
        raise ContinuationDiverged("branch samples collide; the continuation is not injective")
    return InverseBranchPath(complex(a), direction / radius, s_samples * direction, f, np.array(ds))


def _p012(P, z):
    p, dp, ddp = horner3(P.array, complex(z))
    return complex(p), complex(dp), complex(ddp)


def _newton_to(P, z, w):
    bound = 8 * (P.degree + 1) * np.finfo(float).eps * P.magnitude_bound(z)
    for _ in range(12):
        p, dp = value_and_derivative(P, z)
        r = p - w
        if abs(r) <= CONTINUATION_TOL * max(abs(w), 1e-300) + bound:
            return z, True
        if dp == 0:
            break
        z = z - r / dp
    return z, False


def verify_inverse_bound(path: InverseBranchPath, n: int, verify_tol: float = VERIFY_TOL):
    """(min |w f'(w)/(f(w)-a)|, whether it is >= 1/n)."""
    m = float(path.ratios().min())
    return m, m >= 1.0 / n - verify_tol


def eligible_limit(tree: MergeTree, zero_index: int) -> float:
    """Level at which the component of a zero first absorbs a saddle."""
    levels = [ev.level for ev in tree.merge_events if any(zero_index in g for g in ev.groups)]
    return min(levels) if levels else math.inf
