"""Polynomials with complex coefficients: evaluation, roots, critical points,
and the two pointwise quantities used by the bound checks."""
from __future__ import annotations

import enum
import functools
import json
import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from . import kernels
from .errors import DivisionNearZero, NonConvergence

MAX_DEGREE = 64
CLUSTER_TOL = 1e-6
CLASSIFICATION_TOL = 1e-9
RESIDUAL_TOL = 1e-8
EVAL_TOL = 8.0  # multiples of the rounding-error bound of Horner's rule
EPS = np.finfo(float).eps


@dataclass(frozen=True)
class Polynomial:
    """P(z) = sum(coeffs[k] * z**k). Trailing zero coefficients are trimmed."""

    coeffs: tuple
    # only derivative() of a linear polynomial builds a constant
    _allow_constant: bool = field(default=False, repr=False, compare=False)

    def __post_init__(self):
        cs = [complex(c) for c in self.coeffs]
        while len(cs) > 1 and cs[-1] == 0:
            cs.pop()
        if len(cs) < 2 and not (self._allow_constant and cs and cs[0] != 0):
            raise ValueError("polynomial must have degree >= 1")
        if len(cs) - 1 > MAX_DEGREE:
            raise ValueError(f"degree {len(cs) - 1} exceeds the supported maximum {MAX_DEGREE}")
        if not all(math.isfinite(c.real) and math.isfinite(c.imag) for c in cs):
            raise ValueError("coefficients must be finite")
        object.__setattr__(self, "coeffs", tuple(cs))

    @classmethod
    def from_roots(cls, roots: Iterable[complex], lead: complex = 1.0) -> "Polynomial":
        c = np.array([lead], dtype=np.complex128)
        for r in roots:
            c = np.convolve(c, np.array([-r, 1.0], dtype=np.complex128))
        return cls(tuple(c))

    @classmethod
    def monomial(cls, n: int, c: complex = 1.0) -> "Polynomial":
        return cls((0,) * n + (c,))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @functools.cached_property
    def array(self) -> np.ndarray:
        return np.array(self.coeffs, dtype=np.complex128)

    @functools.cached_property
    def scale(self) -> float:
        return float(np.max(np.abs(self.array)))

    def __call__(self, z):
        return evaluate(self, z)

    def derivative(self) -> "Polynomial":
        return derivative(self)

    def scaled(self, factor: complex) -> "Polynomial":
        return Polynomial(tuple(factor * c for c in self.coeffs))

    def magnitude_bound(self, z):
        """sum |c_k| |z|^k, the scale against which rounding in P(z) is measured."""
        r = np.abs(np.asarray(z))
        b = np.full(r.shape, abs(self.coeffs[-1]))
        for c in reversed(self.coeffs[:-1]):
            b = b * r + abs(c)
        return b if b.ndim else float(b)

    def to_json(self) -> dict:
        return {"coeffs": [[c.real, c.imag] for c in self.coeffs]}

    @classmethod
    def from_json(cls, obj) -> "Polynomial":
        if isinstance(obj, (str, bytes)):
            obj = json.loads(obj)
        if not isinstance(obj, dict) or "coeffs" not in obj:
            raise ValueError('polynomial JSON needs a "coeffs" list')
        raw = obj["coeffs"]
        if not isinstance(raw, list) or not raw:
            raise ValueError("coefficient list is empty")
        cs = []
        for item in raw:
            if isinstance(item, (int, float)) and not isinstance(item, bool):
                cs.append(complex(item))
            elif isinstance(item, list) and len(item) == 2:
                cs.append(complex(float(item[0]), float(item[1])))
            else:
                raise ValueError(f"bad coefficient entry {item!r}")
        if all(c == 0 for c in cs):
            raise ValueError("all coefficients are zero")
        return cls(tuple(cs))

    def __repr__(self):
        return f"Polynomial(degree={self.degree}, coeffs={list(self.coeffs)})"


def evaluate(P: Polynomial, z):
    """P(z) by Horner's rule; z may be a scalar or an array."""
    if np.ndim(z) == 0:
        c = P.coeffs
        acc = c[-1]
        zz = complex(z)
        for a in reversed(c[:-1]):
            acc = acc * zz + a
        return acc
    p, _ = kernels.horner_array(P.array, z)
    return p


def derivative(P: Polynomial) -> Polynomial:
    """Coefficient k of the result is (k+1) times coefficient k+1 of P."""
    c = P.coeffs
    if len(c) < 2:
        raise ValueError("cannot differentiate a constant")
    return Polynomial(tuple(k * c[k] for k in range(1, len(c))), _allow_constant=True)


def value_and_derivative(P: Polynomial, z):
    if np.ndim(z) == 0:
        p, dp = kernels.horner2(P.array, complex(z))
        return complex(p), complex(dp)
    return kernels.horner_array(P.array, z)


# ----------------------------------------------------------------------------
# roots


@dataclass(frozen=True)
class RootSet:
    """Distinct zeros with multiplicities, sorted by (real, imag)."""

    roots: tuple  # ((location, multiplicity), ...)

    @property
    def locations(self) -> np.ndarray:
        return np.array([r for r, _ in self.roots], dtype=np.complex128)

    @property
    def multiplicities(self) -> np.ndarray:
        return np.array([m for _, m in self.roots], dtype=int)

    @property
    def total(self) -> int:
        return sum(m for _, m in self.roots)

    def __len__(self):
        return len(self.roots)

    def __iter__(self):
        return iter(self.roots)

    def index_of(self, z: complex, tol: float = 1e-6) -> int:
        d = np.abs(self.locations - z)
        k = int(np.argmin(d))
        if d[k] > tol * max(1.0, abs(z)):
            raise KeyError(f"{z} is not a zero of the polynomial")
        return k

    def to_json(self) -> list:
        return [{"location": [z.real, z.imag], "multiplicity": m} for z, m in self.roots]


def _aberth(c: np.ndarray, max_iters: int) -> np.ndarray:
    n = c.shape[0] - 1
    # start on the circle whose radius is the geometric mean of the root moduli
    radius = abs(c[0] / c[n]) ** (1.0 / n)
    z = radius * np.exp(2j * np.pi * (np.arange(n) + 0.25) / n + 0.4j)
    active = np.ones(n, dtype=bool)
    absc = np.abs(c)
    for _ in range(max_iters):
        p, dp = kernels.horner_array(c, z)
        r = np.abs(z)
        bound = np.polyval(absc[::-1], r)
        done = np.abs(p) <= 4.0 * (n + 1) * EPS * bound
        active &= ~done
        if not active.any():
            return z
        diff = z[:, None] - z[None, :]
        np.fill_diagonal(diff, 1.0)
        inv = 1.0 / diff
        np.fill_diagonal(inv, 0.0)
        s = inv.sum(axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = p / dp
            w = ratio / (1.0 - ratio * s)
        w = np.where(np.isfinite(w), w, 0.0)
        z = np.where(active, z - w, z)
    raise NonConvergence(f"Aberth iteration did not converge in {max_iters} iterations")


def _roundoff_radius(P: Polynomial, center: complex, m: int) -> float:
    """Radius within which roundoff scatters the members of an m-fold root."""
    deriv = P
    for _ in range(min(m, P.degree)):
        deriv = derivative(deriv)
    top = abs(evaluate(deriv, center)) / math.factorial(m)
    if top == 0.0:
        return 0.0
    b = P.magnitude_bound(center)
    return 2.0 * (16.0 * EPS * b / top) ** (1.0 / m)


def _cluster(P: Polynomial, z: np.ndarray, cluster_tol: float) -> list:
    groups = [[complex(v)] for v in z]
    while len(groups) > 1:
        centers = np.array([np.mean(g) for g in groups])
        d = np.abs(centers[:, None] - centers[None, :])
        np.fill_diagonal(d, np.inf)
        i, j = np.unravel_index(np.argmin(d), d.shape)
        merged = groups[i] + groups[j]
        c = complex(np.mean(merged))
        spread = max(abs(v - c) for v in merged)
        limit = max(cluster_tol * max(1.0, abs(c)), _roundoff_radius(P, c, len(merged)))
        if spread > limit:
            break
        groups = [g for k, g in enumerate(groups) if k not in (i, j)] + [merged]
    return groups


def _refine_multiple(P: Polynomial, center: complex, m: int) -> complex:
    """Newton on the (m-1)-th derivative, where an m-fold root is simple."""
    q = P
    for _ in range(m - 1):
        q = derivative(q)
    if q.degree < 1:
        return center
    z = center
    f0 = abs(evaluate(q, z))
    for _ in range(3):
        f, df = value_and_derivative(q, z)
        if df == 0:
            break
        zn = z - f / df
        fn = abs(evaluate(q, zn))
        if not fn < f0 or abs(zn - z) > 1e-3 * max(1.0, abs(z)):
            break
        z, f0 = zn, fn
    return z


@functools.lru_cache(maxsize=512)
def find_roots(P: Polynomial, cluster_tol: float = CLUSTER_TOL, max_iters: int = 500) -> RootSet:
    """Zeros of P with multiplicities (Aberth-Ehrlich plus clustering)."""
    c = P.array
    k0 = 0
    while c[k0] == 0:
        k0 += 1
    found = []
    if k0:
        found.append((0j, k0))
    rest = c[k0:]
    if rest.shape[0] > 1:
        Q = Polynomial(tuple(rest))
        z = _aberth(rest, max_iters)
        for g in _cluster(Q, z, cluster_tol):
            m = len(g)
            center = _refine_multiple(Q, complex(np.mean(g)), m)
            found.append((center, m))
    found.sort(key=lambda rm: (rm[0].real, rm[0].imag))
    rs = RootSet(tuple(found))
    for loc, _ in rs:
        if abs(evaluate(P, loc)) > RESIDUAL_TOL * P.scale * max(1.0, abs(loc)) ** P.degree:
            raise NonConvergence(f"root {loc} has residual {abs(evaluate(P, loc)):.3e}")
    return rs


# ----------------------------------------------------------------------------
# critical points


class CriticalKind(str, enum.Enum):
    ZERO_COINCIDENT = "ZeroCoincident"
    PROPER = "Proper"


@dataclass(frozen=True)
class CriticalPoint:
    location: complex
    critical_value: float
    kind: CriticalKind
    multiplicity: int = 1

    @property
    def proper(self) -> bool:
        return self.kind is CriticalKind.PROPER

    def to_json(self) -> dict:
        return {
            "location": [self.location.real, self.location.imag],
            "critical_value": self.critical_value,
            "kind": self.kind.value,
            "multiplicity": self.multiplicity,
        }


@functools.lru_cache(maxsize=512)
def critical_points(P: Polynomial, classification_tol: float = CLASSIFICATION_TOL) -> tuple:
    """Zeros of P', each tagged Proper (P != 0 there) or ZeroCoincident."""
    if P.degree < 2:
        return ()
    out = []
    for loc, m in find_roots(derivative(P)):
        val = abs(evaluate(P, loc))
        if val > classification_tol * P.magnitude_bound(loc):
            out.append(CriticalPoint(loc, val, CriticalKind.PROPER, m))
        else:
            out.append(CriticalPoint(loc, 0.0, CriticalKind.ZERO_COINCIDENT, m))
    return tuple(out)


def proper_critical_points(P: Polynomial) -> list:
    return [cp for cp in critical_points(P) if cp.proper]


# ----------------------------------------------------------------------------
# pointwise quantities


def _check_nonzero(P: Polynomial, z, p):
    bound = EVAL_TOL * (P.degree + 1) * EPS * P.magnitude_bound(z)
    if np.any(np.abs(p) <= bound):
        raise DivisionNearZero("P(z) is numerically zero; the bound expression is undefined there")


def bound_value(P: Polynomial, a: complex, z):
    """|(z - a) P'(z) / P(z)|, scalar or vectorized over z."""
    p, dp = value_and_derivative(P, z)
    _check_nonzero(P, z, p)
    out = np.abs((np.asarray(z) - a) * dp / p)
    return float(out) if np.ndim(out) == 0 else out


def polar_derivative(P: Polynomial, a: complex, z):
    """n P(z) - (z - a) P'(z) with n the degree of P."""
    p, dp = value_and_derivative(P, z)
    out = P.degree * p - (np.asarray(z) - a) * dp
    return complex(out) if np.ndim(out) == 0 else out


def root_separation(roots: RootSet) -> np.ndarray:
    """Distance from each distinct zero to the nearest other one (inf if alone)."""
    loc = roots.locations
    if loc.shape[0] < 2:
        return np.full(loc.shape, np.inf)
    d = np.abs(loc[:, None] - loc[None, :])
    np.fill_diagonal(d, np.inf)
    return d.min(axis=1)
