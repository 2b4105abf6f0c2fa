"""Merge tree of the sublevel sets {|P| <= t} and the components at a level.

Sublevel components only change at Proper critical values, where a saddle of
|P| joins the components sitting in its valleys. The zeros feeding each
valley are found by following the steepest descent of |P| out of the saddle.
"""
from __future__ import annotations

import cmath
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import FlowStalled, LevelAtCriticalValue
from .poly import (
    CriticalPoint,
    Polynomial,
    RootSet,
    derivative,
    evaluate,
    find_roots,
    proper_critical_points,
)

log = logging.getLogger(__name__)

SADDLE_OFFSET = 1e-4
CRITICAL_GAP = 1e-4
BOUNDARY_TOL = 1e-9
DESCENT_TOL = 1e-12
DESCENT_MAX_STEPS = 20_000


@dataclass(frozen=True)
class MergeEvent:
    level: float
    groups: tuple  # tuple of tuples of zero indices, one per joined cluster
    saddle: complex


@dataclass(frozen=True)
class Saddle:
    point: CriticalPoint
    reached: tuple  # zero indices reached from each valley


@dataclass(frozen=True)
class MergeTree:
    zeros: RootSet
    merge_events: tuple
    critical_levels: tuple
    saddles: tuple = field(default=())

    def clusters_at(self, level: float) -> list:
        """Zero-index clusters of the sublevel set just below/above ``level``."""
        uf = _UnionFind(len(self.zeros))
        for ev in self.merge_events:
            if ev.level < level:
                for g in ev.groups[1:]:
                    uf.union(ev.groups[0][0], g[0])
        return uf.groups()

    def to_json(self) -> dict:
        return {
            "critical_levels": [("inf" if math.isinf(t) else t) for t in self.critical_levels],
            "merge_events": [
                {"level": ev.level, "groups": [list(g) for g in ev.groups], "saddle": [ev.saddle.real, ev.saddle.imag]}
                for ev in self.merge_events
            ],
            "zeros": self.zeros.to_json(),
        }


@dataclass(frozen=True)
class Component:
    id: int
    level: float
    zero_indices: tuple
    zero_members: tuple  # ((location, multiplicity), ...)
    proper_criticals_inside: tuple
    eligible: bool
    anchor_zero: complex

    @property
    def multiplicity(self) -> int:
        return sum(m for _, m in self.zero_members)

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "level": self.level,
            "zeros": [{"location": [z.real, z.imag], "multiplicity": m} for z, m in self.zero_members],
            "proper_criticals_inside": [cp.to_json() for cp in self.proper_criticals_inside],
            "eligible": self.eligible,
            "anchor_zero": [self.anchor_zero.real, self.anchor_zero.imag],
        }


class _UnionFind:
    def __init__(self, n):
        self.parent = list(range(n))

    def find(self, i):
        while self.parent[i] != i:
            self.parent[i] = self.parent[self.parent[i]]
            i = self.parent[i]
        return i

    def union(self, i, j):
        ri, rj = self.find(i), self.find(j)
        if ri == rj:
            return False
        lo, hi = min(ri, rj), max(ri, rj)
        self.parent[hi] = lo
        return True

    def groups(self):
        out = {}
        for i in range(len(self.parent)):
            out.setdefault(self.find(i), []).append(i)
        return [tuple(g) for _, g in sorted(out.items())]


def _capture_radii(P: Polynomial) -> np.ndarray:
    roots = find_roots(P).locations
    others = [cp.location for cp in proper_critical_points(P)]
    radii = np.empty(roots.shape[0])
    for j, r in enumerate(roots):
        d = [abs(r - q) for k, q in enumerate(roots) if k != j] + [abs(r - q) for q in others]
        radii[j] = 0.25 * min(d) if d else np.inf
    return radii


def _descent_index(P: Polynomial, start: complex) -> int:
    roots = find_roots(P)
    loc = roots.locations
    if evaluate(P, start) == 0:
        return int(np.argmin(np.abs(loc - start)))
    spread = float(np.max(np.abs(loc - start)))
    idx, z, status = kernels.descent(
        P.array, complex(start), loc, _capture_radii(P), 0.1 * max(spread, 1e-12),
        DESCENT_TOL, DESCENT_MAX_STEPS,
    )
    if status != kernels.OK:
        raise FlowStalled(f"steepest descent from {start} stalled at {z}")
    return int(idx)


def descent_flow(P: Polynomial, start: complex) -> complex:
    """The zero of P reached by steepest descent of |P| from ``start``."""
    return complex(find_roots(P).locations[_descent_index(P, start)])


def _valley_directions(P: Polynomial, cp: CriticalPoint) -> list:
    """Unit directions of steepest descent of |P| out of the saddle ``cp``.

    Near a saddle of order k, P(z) ~ P(z0) + c (z - z0)^(k+1), and |P| falls
    fastest where c (z - z0)^(k+1) / P(z0) is negative real.
    """
    k = cp.multiplicity
    d = P
    for _ in range(k + 1):
        d = derivative(d)
    c = evaluate(d, cp.location) / math.factorial(k + 1)
    p0 = evaluate(P, cp.location)
    if abs(c) > 0:
        base = cmath.phase(-p0 / c) / (k + 1)
        return [cmath.exp(1j * (base + 2 * math.pi * j / (k + 1))) for j in range(k + 1)]
    return []


def _compass_valleys(P: Polynomial, z0: complex, eps: float) -> list:
    ang = np.linspace(0, 2 * np.pi, 64, endpoint=False)
    dirs = np.exp(1j * ang)
    vals = np.abs(evaluate(P, z0 + eps * dirs))
    mins = [i for i in range(64) if vals[i] < vals[i - 1] and vals[i] <= vals[(i + 1) % 64]]
    return [complex(dirs[i]) for i in mins]


def build_merge_tree(P: Polynomial, saddle_offset: float = SADDLE_OFFSET) -> MergeTree:
    roots = find_roots(P)
    loc = roots.locations
    proper = sorted(proper_critical_points(P), key=lambda cp: (cp.critical_value, cp.location.real, cp.location.imag))
    saddles = []
    for cp in proper:
        others = [abs(cp.location - r) for r in loc] + [
            abs(cp.location - q.location) for q in proper if q is not cp
        ]
        # |P| drops by ~(eps/scale)^(k+1) relative; keep that far above rounding
        eps = min(others) * saddle_offset ** (2.0 / (cp.multiplicity + 1))
        dirs = _valley_directions(P, cp)
        p0 = abs(evaluate(P, cp.location))
        if not dirs or any(abs(evaluate(P, cp.location + eps * d)) >= p0 for d in dirs):
            dirs = _compass_valleys(P, cp.location, eps)
        reached = tuple(_descent_index(P, cp.location + eps * d) for d in dirs)
        saddles.append(Saddle(cp, reached))

    uf = _UnionFind(len(roots))
    events = []
    for s in saddles:
        reps = sorted({uf.find(i) for i in s.reached})
        if len(reps) < 2:
            log.warning("saddle at %s (level %.6g) joins no new clusters", s.point.location, s.point.critical_value)
            continue
        current = {uf.find(g[0]): g for g in uf.groups()}
        groups = tuple(current[r] for r in reps)
        for r in reps[1:]:
            uf.union(reps[0], r)
        events.append(MergeEvent(s.point.critical_value, groups, s.point.location))

    levels = sorted({cp.critical_value for cp in proper})
    return MergeTree(roots, tuple(events), (0.0, *levels, math.inf), tuple(saddles))


def components_at_level(tree: MergeTree, P: Polynomial, tau: float, critical_gap: float = CRITICAL_GAP) -> list:
    """Components of {|P| <= tau}, each with its zeros and inner saddles."""
    for t in tree.critical_levels[1:-1]:
        if abs(t - tau) <= critical_gap * tau:
            raise LevelAtCriticalValue(f"level {tau} is within {critical_gap:g}·tau of critical value {t}")
    comps = []
    for cid, group in enumerate(tree.clusters_at(tau)):
        members = tuple(tree.zeros.roots[i] for i in group)
        inside = tuple(
            s.point for s in tree.saddles
            if s.point.critical_value < tau and any(i in group for i in s.reached)
        )
        eligible = not inside
        best = max(range(len(group)), key=lambda k: (members[k][1], -k))
        comps.append(Component(cid, float(tau), group, members, inside, eligible, complex(members[best][0])))
    return comps


def locate_point(tree: MergeTree, P: Polynomial, z: complex, tau: float, boundary_tol: float = BOUNDARY_TOL):
    """Component of {|P| <= tau} holding z, or None when z lies outside.

    The lemniscate is closed, so points with |P(z)| within ``boundary_tol``
    of tau count as inside.
    """
    v = abs(evaluate(P, z))
    if v > tau * (1 + boundary_tol):
        return None
    idx = _descent_index(P, z)
    for comp in components_at_level(tree, P, tau):
        if idx in comp.zero_indices:
            return comp
    raise AssertionError("descent reached a zero outside every component")
