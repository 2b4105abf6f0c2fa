"""Finite-difference condenser capacities.

A condenser is a pair of disjoint closed plates. Its capacity is the
Dirichlet energy of the potential that is 0 on the first plate and 1 on the
second. Plates are rasterized on one of two frames:

* ``Box``: a Cartesian cell grid;
* ``LogPolar``: cells uniform in (log|z-c|, arg(z-c)), i.e. the image of a
  Cartesian grid under exp. The map is conformal, so the 5-point energy keeps
  the same form, while tiny disks around ``c`` and far-away boundaries are
  cheap to resolve.

A cell belongs to a plate when its centre lies in the region. Segments and
rays are rasterized as digital lines: every cell whose square they cross.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import InvalidCondenser, SolverNotConverged

RESIDUAL_TOL = 1e-10
MAX_SWEEPS = 200_000
RASTER_TOL = 1e-9  # relative to the local cell width
MIN_PUNCTURE_CELLS = 3.0


def _cplx(v) -> complex:
    if isinstance(v, (list, tuple)):
        if len(v) != 2:
            raise InvalidCondenser(f"expected [re, im], got {v!r}")
        return complex(float(v[0]), float(v[1]))
    if isinstance(v, (int, float, complex)) and not isinstance(v, bool):
        return complex(v)
    raise InvalidCondenser(f"expected a number or [re, im], got {v!r}")


def _pair(z: complex) -> list:
    return [z.real, z.imag]


# ----------------------------------------------------------------------------
# plate primitives


@dataclass(frozen=True)
class Disk:
    center: complex
    radius: float
    kind = "disk"

    def mask(self, z, w):
        return np.abs(z - self.center) <= self.radius + RASTER_TOL * w

    def to_json(self):
        return {"type": self.kind, "center": _pair(self.center), "radius": self.radius}


@dataclass(frozen=True)
class Exterior:
    """{|z - center| >= radius}."""
    center: complex
    radius: float
    kind = "exterior"
    unbounded = True

    def mask(self, z, w):
        return np.abs(z - self.center) >= self.radius - RASTER_TOL * w

    def to_json(self):
        return {"type": self.kind, "center": _pair(self.center), "radius": self.radius}


def _line_mask(z, w, start, e, t_max):
    rel = (z - start) * e.conjugate()
    t, s = rel.real, rel.imag
    # half-extent of an axis-aligned cell square measured across the line
    reach = 0.5 * w * (abs(e.real) + abs(e.imag)) * (1 + RASTER_TOL)
    return (np.abs(s) <= reach) & (t >= -RASTER_TOL * w) & (t <= t_max + RASTER_TOL * w)


@dataclass(frozen=True)
class Segment:
    start: complex
    end: complex
    kind = "segment"

    def mask(self, z, w):
        d = self.end - self.start
        return _line_mask(z, w, self.start, d / abs(d), abs(d))

    def to_json(self):
        return {"type": self.kind, "start": _pair(self.start), "end": _pair(self.end)}


@dataclass(frozen=True)
class Ray:
    start: complex
    direction: complex
    kind = "ray"
    unbounded = True

    def mask(self, z, w):
        return _line_mask(z, w, self.start, self.direction / abs(self.direction), math.inf)

    def to_json(self):
        return {"type": self.kind, "start": _pair(self.start), "direction": _pair(self.direction)}


@dataclass(frozen=True)
class HalfPlane:
    """Points on the side of the line through ``point`` that ``normal`` faces."""
    point: complex
    normal: complex
    kind = "half_plane"
    unbounded = True

    def mask(self, z, w):
        return ((z - self.point) * self.normal.conjugate()).real / abs(self.normal) >= -RASTER_TOL * w

    def to_json(self):
        return {"type": self.kind, "point": _pair(self.point), "normal": _pair(self.normal)}


@dataclass(frozen=True)
class StripComplement:
    """Points at distance >= half_width from the line through ``point``."""
    point: complex
    direction: complex
    half_width: float
    kind = "strip_complement"
    unbounded = True

    def mask(self, z, w):
        e = self.direction / abs(self.direction)
        return np.abs(((z - self.point) * e.conjugate()).imag) >= self.half_width - RASTER_TOL * w

    def to_json(self):
        return {"type": self.kind, "point": _pair(self.point), "direction": _pair(self.direction),
                "half_width": self.half_width}


_PRIMITIVES = {
    "disk": (Disk, ("center", "radius")),
    "exterior": (Exterior, ("center", "radius")),
    "segment": (Segment, ("start", "end")),
    "ray": (Ray, ("start", "direction")),
    "half_plane": (HalfPlane, ("point", "normal")),
    "strip_complement": (StripComplement, ("point", "direction", "half_width")),
}
_REAL_FIELDS = {"radius", "half_width"}


def primitive_from_json(obj):
    if not isinstance(obj, dict) or obj.get("type") not in _PRIMITIVES:
        raise InvalidCondenser(f"unknown plate primitive {obj!r}")
    cls, names = _PRIMITIVES[obj["type"]]
    try:
        args = [float(obj[k]) if k in _REAL_FIELDS else _cplx(obj[k]) for k in names]
    except KeyError as exc:
        raise InvalidCondenser(f"{obj['type']} needs field {exc.args[0]!r}") from None
    except (TypeError, ValueError) as exc:
        raise InvalidCondenser(str(exc)) from None
    prim = cls(*args)
    _check_primitive(prim)
    return prim


def _check_primitive(p):
    if isinstance(p, (Disk, Exterior)) and not p.radius > 0:
        raise InvalidCondenser(f"{p.kind} radius must be positive")
    if isinstance(p, StripComplement) and not p.half_width > 0:
        raise InvalidCondenser("strip half-width must be positive")
    if isinstance(p, Segment) and p.start == p.end:
        raise InvalidCondenser("segment endpoints coincide")
    if isinstance(p, Ray) and p.direction == 0:
        raise InvalidCondenser("ray direction is zero")
    if isinstance(p, HalfPlane) and p.normal == 0:
        raise InvalidCondenser("half-plane normal is zero")
    if isinstance(p, StripComplement) and p.direction == 0:
        raise InvalidCondenser("strip direction is zero")


# ----------------------------------------------------------------------------
# frames


@dataclass(frozen=True)
class Grid:
    z: np.ndarray  # cell centres
    width: np.ndarray  # local cell width in the z-plane
    periodic: bool  # second axis wraps around
    outer: np.ndarray  # cells on the truncation boundary


@dataclass(frozen=True)
class Box:
    xmin: float
    xmax: float
    ymin: float
    ymax: float
    kind = "box"

    def shape(self, n: int):
        w, h = self.xmax - self.xmin, self.ymax - self.ymin
        if w >= h:
            return n, max(2, int(round(n * h / w)))
        return max(2, int(round(n * w / h))), n

    def grid(self, n: int) -> Grid:
        nx, ny = self.shape(n)
        hx = (self.xmax - self.xmin) / nx
        hy = (self.ymax - self.ymin) / ny
        x = self.xmin + (np.arange(nx) + 0.5) * hx
        y = self.ymin + (np.arange(ny) + 0.5) * hy
        z = x[:, None] + 1j * y[None, :]
        outer = np.zeros((nx, ny), dtype=bool)
        outer[0, :] = outer[-1, :] = outer[:, 0] = outer[:, -1] = True
        return Grid(z, np.full(z.shape, max(hx, hy)), False, outer)

    def local_width(self, z, n: int) -> float:
        nx, ny = self.shape(n)
        return max((self.xmax - self.xmin) / nx, (self.ymax - self.ymin) / ny)

    def to_json(self):
        return {"type": self.kind, "xmin": self.xmin, "xmax": self.xmax, "ymin": self.ymin, "ymax": self.ymax}


@dataclass(frozen=True)
class LogPolar:
    """Cells centred at center + exp(log r_min + i h + 1j (theta0 + j h)),
    h = 2 pi / n. The circle |z - center| = r_min is a row of cell centres,
    as is the ray arg(z - center) = theta0."""
    center: complex
    r_min: float
    r_max: float
    theta0: float = 0.0
    kind = "logpolar"

    def shape(self, n: int):
        h = 2 * math.pi / n
        return int(round(math.log(self.r_max / self.r_min) / h)) + 1, n

    def grid(self, n: int) -> Grid:
        h = 2 * math.pi / n
        m, _ = self.shape(n)
        xi = math.log(self.r_min) + h * np.arange(m)
        eta = self.theta0 + h * np.arange(n)
        rad = np.exp(xi)[:, None]
        z = self.center + rad * np.exp(1j * eta)[None, :]
        outer = np.zeros(z.shape, dtype=bool)
        outer[-1, :] = True
        return Grid(z, np.broadcast_to(rad * h, z.shape).copy(), True, outer)

    def local_width(self, z, n: int) -> float:
        return abs(z - self.center) * 2 * math.pi / n

    def to_json(self):
        return {"type": self.kind, "center": _pair(self.center), "r_min": self.r_min,
                "r_max": self.r_max, "theta0": self.theta0}


def frame_from_json(obj):
    if not isinstance(obj, dict):
        raise InvalidCondenser("frame must be an object")
    try:
        if obj.get("type") == "box":
            f = Box(float(obj["xmin"]), float(obj["xmax"]), float(obj["ymin"]), float(obj["ymax"]))
            if not (f.xmax > f.xmin and f.ymax > f.ymin):
                raise InvalidCondenser("empty box")
            return f
        if obj.get("type") == "logpolar":
            f = LogPolar(_cplx(obj["center"]), float(obj["r_min"]), float(obj["r_max"]),
                         float(obj.get("theta0", 0.0)))
            if not 0 < f.r_min < f.r_max:
                raise InvalidCondenser("log-polar frame needs 0 < r_min < r_max")
            return f
    except KeyError as exc:
        raise InvalidCondenser(f"frame needs field {exc.args[0]!r}") from None
    except (TypeError, ValueError) as exc:
        raise InvalidCondenser(str(exc)) from None
    raise InvalidCondenser(f"unknown frame {obj.get('type')!r}")


# ----------------------------------------------------------------------------
# condenser


@dataclass(frozen=True)
class CondenserSpec:
    plate0: tuple
    plate1: tuple
    frame: object
    puncture_sites: tuple = ()  # where puncture_convergence adds rho-disks

    @property
    def unbounded(self) -> bool:
        return any(getattr(p, "unbounded", False) for p in self.plate0)

    def rasterize(self, n: int):
        g = self.frame.grid(n)
        m0 = np.zeros(g.z.shape, dtype=bool)
        m1 = np.zeros(g.z.shape, dtype=bool)
        for p in self.plate0:
            m0 |= p.mask(g.z, g.width)
        for p in self.plate1:
            m1 |= p.mask(g.z, g.width)
        if np.any(m0 & m1):
            raise InvalidCondenser("plates overlap")
        if not m1.any():
            raise InvalidCondenser(f"plate1 covers no cell at grid {n}")
        if self.unbounded:
            m0 |= g.outer & ~m1
        if not m0.any():
            raise InvalidCondenser(f"plate0 covers no cell at grid {n}")
        return g, m0, m1

    def validate(self, n: int = 128) -> "CondenserSpec":
        if not self.plate0 or not self.plate1:
            raise InvalidCondenser("both plates need at least one region")
        for p in (*self.plate0, *self.plate1):
            _check_primitive(p)
        self.rasterize(n)
        return self

    def to_json(self) -> dict:
        out = {
            "frame": self.frame.to_json(),
            "plate0": [p.to_json() for p in self.plate0],
            "plate1": [p.to_json() for p in self.plate1],
        }
        if self.puncture_sites:
            out["puncture_sites"] = [_pair(s) for s in self.puncture_sites]
        return out

    @classmethod
    def from_json(cls, obj) -> "CondenserSpec":
        if not isinstance(obj, dict):
            raise InvalidCondenser("condenser spec must be an object")
        for key in ("frame", "plate0", "plate1"):
            if key not in obj:
                raise InvalidCondenser(f"missing {key!r}")
        if not isinstance(obj["plate0"], list) or not isinstance(obj["plate1"], list):
            raise InvalidCondenser("plates must be lists of regions")
        return cls(
            tuple(primitive_from_json(p) for p in obj["plate0"]),
            tuple(primitive_from_json(p) for p in obj["plate1"]),
            frame_from_json(obj["frame"]),
            tuple(_cplx(s) for s in obj.get("puncture_sites", ())),
        )


@dataclass(frozen=True)
class Potential:
    u: np.ndarray
    grid: Grid
    sweeps: int
    residual: float

    @property
    def energy(self) -> float:
        return kernels.dirichlet_energy(self.u, self.grid.periodic)


@dataclass(frozen=True)
class CapacityEstimate:
    value: float
    grid_size: int
    energy: float
    refinement_history: tuple  # ((grid_size, energy), ...)
    extrapolated: bool = False

    @property
    def richardson_correction(self) -> float:
        return self.value - self.energy

    def to_json(self) -> dict:
        return {
            "value": self.value,
            "grid_size": self.grid_size,
            "energy": self.energy,
            "extrapolated": self.extrapolated,
            "refinement_history": [[n, v] for n, v in self.refinement_history],
        }


def optimal_omega(shape, periodic: bool) -> float:
    """Over-relaxation factor 2 / (1 + sqrt(1 - rho_J^2)) from the Jacobi
    spectral radius of the Dirichlet grid of this shape."""
    nx, ny = shape
    rho = 0.5 * (math.cos(math.pi / nx) + (1.0 if periodic else math.cos(math.pi / ny)))
    return 2.0 / (1.0 + math.sqrt(1.0 - rho * rho))


def _neighbor_count(shape, periodic):
    nx, ny = shape
    nb = np.full(shape, 4.0)
    nb[0, :] -= 1
    nb[-1, :] -= 1
    if not periodic:
        nb[:, 0] -= 1
        nb[:, -1] -= 1
    return nb


def solve_potential(spec: CondenserSpec, grid_size: int, *, omega: float | None = None,
                    residual_tol: float = RESIDUAL_TOL, max_sweeps: int = MAX_SWEEPS,
                    initial: np.ndarray | None = None) -> Potential:
    """Discrete potential: 0 on plate0, 1 on plate1, 5-point harmonic elsewhere.

    Free cells on the frame edge see only their existing neighbours
    (reflecting boundary). When plate0 is unbounded the outer edge of the
    frame is held at 0 instead.
    """
    g, m0, m1 = spec.rasterize(grid_size)
    fixed = m0 | m1
    u = np.zeros(g.z.shape) if initial is None else np.array(initial, dtype=float)
    if u.shape != g.z.shape:
        raise ValueError("initial guess has the wrong shape")
    u[m0] = 0.0
    u[m1] = 1.0
    if omega is None:
        omega = optimal_omega(u.shape, g.periodic)
    sweeps, resid = kernels.sor(u, fixed, _neighbor_count(u.shape, g.periodic), g.periodic,
                                float(omega), float(residual_tol), int(max_sweeps))
    if sweeps < 0:
        raise SolverNotConverged(f"SOR residual {resid:.3g} after {max_sweeps} sweeps at grid {grid_size}")
    return Potential(u, g, int(sweeps), float(resid))


def _prolong(u_coarse: np.ndarray, shape) -> np.ndarray:
    """Nearest-cell upsampling of a coarse solution as an initial guess."""
    ci = np.minimum((np.arange(shape[0]) * u_coarse.shape[0]) // shape[0], u_coarse.shape[0] - 1)
    cj = np.minimum((np.arange(shape[1]) * u_coarse.shape[1]) // shape[1], u_coarse.shape[1] - 1)
    return u_coarse[np.ix_(ci, cj)]


def capacity(spec: CondenserSpec, refinement=(256, 512), **solver_kw) -> CapacityEstimate:
    """Energy on each grid; with two or more grids the value is the order-1
    Richardson extrapolation over the two finest (cell width halving)."""
    sizes = sorted(int(n) for n in refinement)
    if not sizes:
        raise ValueError("need at least one grid size")
    history = []
    prev = None
    for n in sizes:
        init = None
        if prev is not None:
            init = _prolong(prev, spec.frame.shape(n))
        pot = solve_potential(spec, n, initial=init, **solver_kw)
        prev = pot.u
        history.append((n, pot.energy))
    e_f = history[-1][1]
    if len(history) < 2:
        return CapacityEstimate(e_f, sizes[-1], e_f, tuple(history))
    (n_c, e_c), (n_f, _) = history[-2], history[-1]
    ratio = n_f / n_c
    value = e_f + (e_f - e_c) / (ratio - 1.0)
    return CapacityEstimate(value, n_f, e_f, tuple(history), True)


# ----------------------------------------------------------------------------
# the C(r) family and its asymptotics


def c_r_spec(a: complex, z0: complex, r: float, r_max_factor: float = 1e3, sites=()) -> CondenserSpec:
    """Plates: the ray from ``a`` pointing away from ``z0``, and the disk
    |z - z0| <= r. Log-polar frame around z0 aligned with the ray."""
    a, z0 = complex(a), complex(z0)
    d = abs(a - z0)
    if not 0 < r < d:
        raise InvalidCondenser("need 0 < r < |a - z0|")
    theta = cmath.phase(a - z0)
    frame = LogPolar(z0, r, r_max_factor * d, theta)
    return CondenserSpec((Ray(a, (a - z0) / d),), (Disk(z0, r),), frame, tuple(complex(s) for s in sites))


def asymptotic_cap_C(r: float, a: complex, z0: complex) -> float:
    """-2 pi / log r - 2 pi log(4|a - z0|) / log(r)^2."""
    d = abs(complex(a) - complex(z0))
    if not 0 < r < d:
        raise ValueError("need 0 < r < |a - z0|")
    L = math.log(r)
    return -2 * math.pi / L - 2 * math.pi * math.log(4 * d) / L**2


def slit_capacity(r: float, a: complex, z0: complex) -> float:
    """2 pi / log(4|a - z0| / r): the disk-vs-slit capacity with the plate
    replaced by its conformal-radius circle. Both asymptotic terms agree with
    asymptotic_cap_C; the remainder is O(1/log(r)^3)."""
    d = abs(complex(a) - complex(z0))
    return 2 * math.pi / math.log(4 * d / r)


def asymptotic_cap_strip(r: float, n: int, ratio: float) -> float:
    """-2 pi / log(r ratio) - 2 pi log(4n) / log(r ratio)^2."""
    x = r * ratio
    if not 0 < x < 1:
        raise ValueError("need 0 < r * ratio < 1")
    L = math.log(x)
    return -2 * math.pi / L - 2 * math.pi * math.log(4 * n) / L**2


def strip_map(z, n: int):
    """F(z) = 2n log((1+z)/(1-z)): unit disk onto {|Im w| < pi n}, F(0) = 0."""
    z = np.asarray(z, dtype=complex)
    return 2 * n * np.log((1 + z) / (1 - z))


def strip_map_derivative(z, n: int):
    z = np.asarray(z, dtype=complex)
    return 4 * n / (1 - z * z)


# ----------------------------------------------------------------------------
# punctures


@dataclass(frozen=True)
class PunctureStudy:
    rhos: tuple
    estimates: tuple
    reference: CapacityEstimate

    @property
    def deviations(self) -> list:
        return [e.value - self.reference.value for e in self.estimates]

    def __iter__(self):
        return iter(self.estimates)

    def __len__(self):
        return len(self.estimates)

    def to_json(self) -> dict:
        return {
            "reference": self.reference.to_json(),
            "sequence": [
                {"rho": rho, "estimate": e.to_json(), "deviation": dev}
                for rho, e, dev in zip(self.rhos, self.estimates, self.deviations)
            ],
        }


def punctured(base: CondenserSpec, rho: float) -> CondenserSpec:
    """C(r, rho): plate0 gains rho-disks at the puncture sites and {|z| >= 1/rho}."""
    extra = tuple(Disk(s, rho) for s in base.puncture_sites) + (Exterior(0j, 1.0 / rho),)
    return CondenserSpec(base.plate0 + extra, base.plate1, base.frame, base.puncture_sites)


def puncture_convergence(base: CondenserSpec, rhos, grid_size: int = 256, **solver_kw) -> PunctureStudy:
    """Capacities of C(r, rho) for a decreasing rho sequence on one grid.

    All solves share the grid, so the punctured plates are nested exactly
    and the sequence is monotone up to the solver tolerance.
    """
    rhos = [float(x) for x in rhos]
    if any(x <= 0 for x in rhos) or any(x2 >= x1 for x1, x2 in zip(rhos, rhos[1:])):
        raise ValueError("rho sequence must be positive and strictly decreasing")
    for rho in rhos:
        for s in base.puncture_sites:
            w = base.frame.local_width(s, grid_size)
            if rho < MIN_PUNCTURE_CELLS * w:
                raise InvalidCondenser(
                    f"rho = {rho:g} is below {MIN_PUNCTURE_CELLS:g} cell widths ({w:.3g}) at {s}"
                )
    ref = capacity(base, (grid_size,), **solver_kw)
    ests = tuple(capacity(punctured(base, rho), (grid_size,), **solver_kw) for rho in rhos)
    return PunctureStudy(tuple(rhos), ests, ref)
