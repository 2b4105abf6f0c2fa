"""Numeric inner loops.

Every kernel here is written in the subset of Python that numba compiles in
nopython mode. The ``*_py`` names are the plain interpreted (or vectorized
numpy) versions, the ``*_jit`` names are the compiled ones, and the bare names
are whichever of the two ``LEMNIKIT_NUMBA`` selects.
"""
import math
import types

import numpy as np

from ._jit import njit, pick

# status codes shared by the marching kernels
OK = 0
CRITICAL_TOO_CLOSE = 1
OVERFLOW = 2
STALLED = 3


def _horner2_py(c, z):
    n = c.shape[0] - 1
    p = c[n]
    dp = 0j
    for k in range(n - 1, -1, -1):
        dp = dp * z + p
        p = p * z + c[k]
    return p, dp


def _horner3_py(c, z):
    n = c.shape[0] - 1
    p = c[n]
    dp = 0j
    ddp = 0j
    for k in range(n - 1, -1, -1):
        ddp = ddp * z + dp
        dp = dp * z + p
        p = p * z + c[k]
    return p, dp, 2.0 * ddp


def _absbound_py(c, r):
    """Rounding scale of Horner's rule at |z| = r: 8 (n+1) eps sum |c_k| r^k."""
    n = c.shape[0] - 1
    b = abs(c[n])
    for k in range(n - 1, -1, -1):
        b = b * r + abs(c[k])
    return 8.0 * (n + 1) * 2.220446049250313e-16 * b


_absbound_jit = njit(_absbound_py)
_horner2_jit = njit(_horner2_py)
_horner3_jit = njit(_horner3_py)

# The kernels below call these three by global name. Compiled kernels need the
# compiled helpers there (and numba can then cache them); the interpreted
# copies are rebound to the plain versions by _interpreted().
_horner2 = _horner2_jit or _horner2_py
_horner3 = _horner3_jit or _horner3_py
_absbound = _absbound_jit or _absbound_py

horner2 = pick(_horner2_jit, _horner2_py)
horner3 = pick(_horner3_jit, _horner3_py)


def _interpreted(fn):
    """Copy of ``fn`` whose helper globals point at the interpreted helpers."""
    g = dict(fn.__globals__, _horner2=_horner2_py, _horner3=_horner3_py, _absbound=_absbound_py)
    return types.FunctionType(fn.__code__, g, fn.__name__, fn.__defaults__, fn.__closure__)


def horner_array(c, z):
    """P(z) and P'(z) for an array of points (vectorized Horner)."""
    z = np.asarray(z, dtype=np.complex128)
    n = c.shape[0] - 1
    p = np.full(z.shape, c[n], dtype=np.complex128)
    dp = np.zeros(z.shape, dtype=np.complex128)
    for k in range(n - 1, -1, -1):
        dp = dp * z + p
        p = p * z + c[k]
    return p, dp


# ----------------------------------------------------------------------------
# level-curve tracing


def _trace_impl(c, seed, level, max_step, arg_step, curv_factor, min_step, tol, max_points):
    """March counterclockwise along |P| = level from ``seed``.

    Returns (points, count, status). Predictor is second order in the arg P
    parametrisation (dz/dθ = i/q, d²z/dθ² = q'/q³ with q = P'/P); corrector is
    Newton on log|P| along the gradient.
    """
    pts = np.empty(max_points, dtype=np.complex128)
    log_level = math.log(level)
    z = seed
    pts[0] = z
    count = 1
    p, dp, ddp = _horner3(c, z)
    theta = 0.0
    h = max_step
    shrink_next = False
    while True:
        q = dp / p
        aq = abs(q)
        if aq == 0.0:
            return pts, count, CRITICAL_TOO_CLOSE
        qp = (ddp * p - dp * dp) / (p * p)
        hmax = min(max_step, arg_step / aq)
        kappa = abs(qp) / aq
        if kappa > 0.0:
            hmax = min(hmax, curv_factor / kappa)
        h = min(2.0 * h, hmax)
        if shrink_next:
            h = 0.5 * h
            shrink_next = False
        # loop closure: seed reachable within one admissible step
        if count > 2 and theta > math.pi and abs(z - seed) <= min(2.0 * h, hmax):
            return pts, count, OK
        while True:
            if h < min_step:
                return pts, count, CRITICAL_TOO_CLOSE
            dtheta = h * aq
            zn = z + (1j / q) * dtheta + 0.5 * (qp / (q * q * q)) * dtheta * dtheta
            it = 0
            good = False
            while it < 8:
                pn, dpn = _horner2(c, zn)
                apn = abs(pn)
                if apn == 0.0 or dpn == 0:
                    break
                f = math.log(apn) - log_level
                if abs(f) <= max(tol, _absbound(c, abs(zn)) / apn):
                    good = True
                    break
                g = (dpn / pn).conjugate()
                zn = zn - f * g / (g.real * g.real + g.imag * g.imag)
                it += 1
            if good and abs(zn - z) <= 1.5 * h:
                break
            h = 0.5 * h
        if it > 3:
            shrink_next = True
        pn, dpn, ddpn = _horner3(c, zn)
        r = pn / p
        theta += math.atan2(r.imag, r.real)
        z = zn
        p = pn
        dp = dpn
        ddp = ddpn
        if count >= max_points:
            return pts, count, OVERFLOW
        pts[count] = z
        count += 1


trace_py = _interpreted(_trace_impl)
trace_jit = njit(_trace_impl) if _horner2_jit else None
trace = pick(trace_jit, trace_py)


# ----------------------------------------------------------------------------
# descent along constant-argument lines (gradient lines of |P|)


def _descent_impl(c, start, roots, capture, max_disp, tol, max_steps):
    """Follow the steepest-descent line of |P| from ``start`` down to a zero.

    The descent lines of |P| are the curves where arg P is constant, so the
    path is continued as z(s) = P^{-1}(s·P(start)), s decreasing to 0, with a
    Newton corrector at each s. Stops once z falls inside the capture disk of
    one of ``roots``; returns (index, z, status).
    """
    z = start
    p, dp, ddp = _horner3(c, z)
    w0 = p
    s = 1.0
    for step in range(max_steps):
        for j in range(roots.shape[0]):
            if abs(z - roots[j]) <= capture[j]:
                return j, z, OK
        if dp == 0:
            return -1, z, STALLED
        disp_cap = max_disp
        if ddp != 0:
            disp_cap = min(disp_cap, 0.1 * abs(dp / ddp))
        delta = min(0.5, disp_cap * abs(dp / p))
        accepted = False
        while delta > 1e-15:
            s_new = s * (1.0 - delta)
            w_new = s_new * w0
            zn = z + (w_new - p) / dp
            ok = False
            for it in range(8):
                pn, dpn = _horner2(c, zn)
                res = pn - w_new
                if abs(res) <= tol * abs(w_new) + _absbound(c, abs(zn)):
                    ok = True
                    break
                if dpn == 0:
                    break
                zn = zn - res / dpn
            if ok and abs(zn - z) <= 2.0 * disp_cap + 1e-300:
                accepted = True
                break
            delta = 0.5 * delta
        if not accepted:
            return -1, z, STALLED
        z = zn
        s = s_new
        p, dp, ddp = _horner3(c, z)
    return -1, z, STALLED


descent_py = _interpreted(_descent_impl)
descent_jit = njit(_descent_impl) if _horner2_jit else None
descent = pick(descent_jit, descent_py)


# ----------------------------------------------------------------------------
# point in polygon (crossing number)


def _inside_impl(px, py, vx, vy):
    m = px.shape[0]
    nv = vx.shape[0]
    out = np.zeros(m, dtype=np.bool_)
    for k in range(m):
        x = px[k]
        y = py[k]
        inside = False
        j = nv - 1
        for i in range(nv):
            yi = vy[i]
            yj = vy[j]
            if (yi > y) != (yj > y):
                xc = vx[i] + (y - yi) * (vx[j] - vx[i]) / (yj - yi)
                if x < xc:
                    inside = not inside
            j = i
        out[k] = inside
    return out


def _inside_numpy(px, py, vx, vy):
    out = np.zeros(px.shape[0], dtype=np.bool_)
    vxj = np.roll(vx, 1)
    vyj = np.roll(vy, 1)
    for i in range(vx.shape[0]):
        yi, yj, xi, xj = vy[i], vyj[i], vx[i], vxj[i]
        crosses = (yi > py) != (yj > py)
        if not crosses.any():
            continue
        with np.errstate(divide="ignore", invalid="ignore"):
            xc = xi + (py - yi) * (xj - xi) / (yj - yi)
        out ^= crosses & (px < xc)
    return out


inside_py = _inside_numpy
inside_jit = njit(_inside_impl)
inside = pick(inside_jit, inside_py)


# ----------------------------------------------------------------------------
# red-black SOR for the 5-point Laplacian


def _sor_impl(u, fixed, nbcount, periodic, omega, tol, max_sweeps):
    """In-place red-black SOR. Returns (sweeps, last max residual); sweeps = -1
    when ``max_sweeps`` ran out."""
    nx, ny = u.shape
    resid = 0.0
    for sweep in range(max_sweeps):
        resid = 0.0
        for color in range(2):
            for i in range(nx):
                inner_row = 0 < i < nx - 1
                for j in range((i + color) % 2, ny, 2):
                    if fixed[i, j]:
                        continue
                    if inner_row and 0 < j < ny - 1:
                        r = 0.25 * (u[i - 1, j] + u[i + 1, j] + u[i, j - 1] + u[i, j + 1]) - u[i, j]
                    else:
                        s = 0.0
                        if i > 0:
                            s += u[i - 1, j]
                        if i < nx - 1:
                            s += u[i + 1, j]
                        if j > 0:
                            s += u[i, j - 1]
                        elif periodic:
                            s += u[i, ny - 1]
                        if j < ny - 1:
                            s += u[i, j + 1]
                        elif periodic:
                            s += u[i, 0]
                        r = s / nbcount[i, j] - u[i, j]
                    u[i, j] += omega * r
                    if abs(r) > resid:
                        resid = abs(r)
        if resid < tol:
            return sweep + 1, resid
    return -1, resid


def _neighbor_sum(u, periodic):
    s = np.zeros_like(u)
    s[1:, :] += u[:-1, :]
    s[:-1, :] += u[1:, :]
    s[:, 1:] += u[:, :-1]
    if periodic:
        s[:, 0] += u[:, -1]
    s[:, :-1] += u[:, 1:]
    if periodic:
        s[:, -1] += u[:, 0]
    return s


def _sor_numpy(u, fixed, nbcount, periodic, omega, tol, max_sweeps):
    nx, ny = u.shape
    ii, jj = np.indices((nx, ny))
    free = ~fixed
    masks = [free & ((ii + jj) % 2 == color) for color in range(2)]
    resid = 0.0
    for sweep in range(max_sweeps):
        resid = 0.0
        for mask in masks:
            r = _neighbor_sum(u, periodic) / nbcount - u
            r = np.where(mask, r, 0.0)
            u += omega * r
            resid = max(resid, float(np.abs(r).max()))
        if resid < tol:
            return sweep + 1, resid
    return -1, resid


sor_py = _sor_numpy
sor_jit = njit(_sor_impl)
sor = pick(sor_jit, sor_py)


def dirichlet_energy(u, periodic):
    """Sum of squared differences over grid edges (the discrete Dirichlet
    integral; the mesh width cancels for the 5-point stencil)."""
    e = float(np.sum(np.diff(u, axis=0) ** 2) + np.sum(np.diff(u, axis=1) ** 2))
    if periodic:
        e += float(np.sum((u[:, 0] - u[:, -1]) ** 2))
    return e
