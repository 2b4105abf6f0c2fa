"""``lemnikit`` command line: analyze, trace, inverse, capacity, report.

Exit codes: 0 success, 1 a checked bound failed on an eligible component,
2 unreadable input or bad options, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .bounds import (
    SamplingPlan,
    Verdict,
    continue_inverse_branch,
    verify_corollary,
    verify_theorem,
)
from .capacity import (
    CondenserSpec,
    asymptotic_cap_C,
    asymptotic_cap_strip,
    c_r_spec,
    capacity,
    puncture_convergence,
    slit_capacity,
)
from .errors import InvalidCondenser, LemniscateError
from .level import seed_on_level, trace_level_curve
from .poly import (
    Polynomial,
    bound_value,
    critical_points,
    evaluate,
    find_roots,
    proper_critical_points,
    value_and_derivative,
)
from .svg import Figure
from .topology import build_merge_tree, components_at_level, _descent_index

SCHEMA = "lemnikit/1"
EXIT_OK, EXIT_VIOLATION, EXIT_PARSE, EXIT_NUMERIC = 0, 1, 2, 3

log = logging.getLogger("lemnikit")


class InputError(Exception):
    """Bad input file or option; exit code 2."""


@dataclasses.dataclass
class AnalysisConfig:
    verify_tol: float = 1e-9
    residual_tol: float = 1e-10
    critical_gap: float = 1e-4
    sublevels: int = 5
    boundary_samples: int = 256
    interior_samples: int = 1000
    inverse_steps: int = 16
    inverse_directions: int = 64
    capacity_r: float = 1e-2  # plate radius relative to |a - z0|
    grid: tuple = (128, 256)
    seed: int = 0

    def __post_init__(self):
        for name in ("verify_tol", "residual_tol", "critical_gap", "capacity_r"):
            if not getattr(self, name) > 0:
                raise InputError(f"{name} must be positive")
        for name in ("sublevels", "boundary_samples", "inverse_steps", "inverse_directions"):
            if getattr(self, name) < 1:
                raise InputError(f"{name} must be at least 1")
        if self.interior_samples < 0:
            raise InputError("interior_samples must be nonnegative")
        if not self.grid or any(n < 8 for n in self.grid):
            raise InputError("grid sizes must be at least 8")

    def to_json(self) -> dict:
        out = dataclasses.asdict(self)
        out["grid"] = list(self.grid)
        return out


def _parse_value(name: str, raw: str):
    kind = {f.name: f.type for f in dataclasses.fields(AnalysisConfig)}.get(name)
    if kind is None:
        raise InputError(f"unknown config key {name!r}")
    try:
        if kind == "tuple":
            return tuple(int(x) for x in str(raw).replace(",", " ").split())
        if kind == "int":
            return int(raw)
        return float(raw)
    except ValueError:
        raise InputError(f"bad value {raw!r} for {name}") from None


def load_config(path: str | None, overrides: dict) -> AnalysisConfig:
    values = {}
    if path:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise InputError(f"cannot read config: {exc}") from None
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise InputError(f"{path}:{lineno}: expected key = value")
            key, raw = (s.strip() for s in line.split("=", 1))
            values[key] = _parse_value(key, raw)
    for key, raw in overrides.items():
        if raw is not None:
            values[key] = _parse_value(key, raw) if isinstance(raw, str) else raw
    return AnalysisConfig(**values)


def _read_json(path: str):
    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path} is not valid JSON: {exc}") from None


def load_polynomial(path: str) -> Polynomial:
    """{"coeffs": [c0, c1, ...]} in ascending powers, or {"roots": [...], "lead": c}.
    Complex numbers are written as [re, im]."""
    obj = _read_json(path)
    try:
        if isinstance(obj, dict) and "roots" in obj and "coeffs" not in obj:
            roots = [complex(*r) if isinstance(r, list) else complex(r) for r in obj["roots"]]
            lead = obj.get("lead", 1.0)
            lead = complex(*lead) if isinstance(lead, list) else complex(lead)
            return Polynomial.from_roots(roots, lead)
        return Polynomial.from_json(obj)
    except (TypeError, ValueError) as exc:
        raise InputError(f"bad polynomial in {path}: {exc}") from None


def _complex_arg(text: str) -> complex:
    try:
        return complex(text.replace(" ", "").replace("i", "j"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a complex number: {text!r}") from None


def _levels_arg(text: str) -> list:
    try:
        levels = [float(x) for x in text.replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad level list: {text!r}") from None
    if not levels or any(not t > 0 for t in levels):
        raise argparse.ArgumentTypeError("levels must be positive")
    return levels


def _pair(z) -> list:
    z = complex(z)
    return [z.real, z.imag]


def _document(command: str, P: Polynomial | None, cfg: AnalysisConfig, **body) -> dict:
    doc = {"schema": SCHEMA, "version": __version__, "command": command}
    if P is not None:
        doc["polynomial"] = {"degree": P.degree, **P.to_json()}
    doc["config"] = cfg.to_json()
    doc.update(body)
    return doc


def dumps(doc: dict) -> str:
    return json.dumps(doc, indent=2, allow_nan=False) + "\n"


# ----------------------------------------------------------------------------
# pipelines


def _level_probes(P: Polynomial, tau: float) -> list:
    """Solutions of P(z) = tau: the boundary points where P is positive."""
    shifted = Polynomial(tuple(c - tau if k == 0 else c for k, c in enumerate(P.coeffs)))
    return [complex(z) for z in find_roots(shifted).locations]


def analyze(P: Polynomial, tau: float, cfg: AnalysisConfig, probes=(), verbose: bool = False) -> tuple:
    """Returns (document, exit status, figure)."""
    roots = find_roots(P)
    tree = build_merge_tree(P)
    comps = components_at_level(tree, P, tau, cfg.critical_gap)
    probes = tuple(dict.fromkeys([complex(p) for p in probes] + _level_probes(P, tau)))
    fig = Figure(roots.locations, title=f"|P| = {tau:g}")
    for cp in proper_critical_points(P):
        fig.cross(cp.location)
    out_comps, violated = [], 0
    for comp in comps:
        plan = SamplingPlan(cfg.sublevels, cfg.boundary_samples, cfg.interior_samples, cfg.seed, probes)
        rep = verify_theorem(P, comp, plan, cfg.verify_tol)
        if rep.verdict is Verdict.VIOLATED:
            violated += 1
        entry = comp.to_json()
        entry["bound"] = rep.to_json(verbose=verbose)
        corollary = []
        if comp.eligible:
            for z in probes:
                if _in_component(P, comp, z, tau):
                    chk = verify_corollary(P, comp, z, verify_tol=cfg.verify_tol)
                    corollary.append({"z": _pair(z), "applicable": chk.applicable,
                                      "re_polar": chk.re_polar, "holds": chk.holds})
                    violated += not chk.holds
        entry["corollary"] = corollary
        out_comps.append(entry)
        fig.polyline(rep.curves[0].points, label=tau)
        fig.heat(rep.sample_z, rep.sample_value, P.degree)
    for z in roots.locations:
        fig.dot(z)
    summary = {
        "components": len(comps),
        "eligible": sum(c.eligible for c in comps),
        "holds": sum(c["bound"]["verdict"] == "HOLDS" for c in out_comps),
        "violated": sum(c["bound"]["verdict"] == "VIOLATED" for c in out_comps),
        "inapplicable": sum(c["bound"]["verdict"] == "INAPPLICABLE" for c in out_comps),
    }
    doc = {
        "tau": tau,
        "roots": roots.to_json(),
        "critical_points": [cp.to_json() for cp in critical_points(P)],
        "merge_tree": tree.to_json(),
        "components": out_comps,
        "summary": summary,
    }
    return doc, (EXIT_VIOLATION if violated else EXIT_OK), fig


def _in_component(P, comp, z, tau) -> bool:
    if abs(evaluate(P, z)) > tau * (1 + 1e-9) or z == comp.anchor_zero:
        return False
    return _descent_index(P, z) in comp.zero_indices


def trace(P: Polynomial, levels, cfg: AnalysisConfig) -> tuple:
    roots = find_roots(P)
    tree = build_merge_tree(P)
    fig = Figure(roots.locations, title="level curves")
    for cp in proper_critical_points(P):
        fig.cross(cp.location)
    curves = []
    for t in levels:
        for comp in components_at_level(tree, P, t, cfg.critical_gap):
            curve = trace_level_curve(P, seed_on_level(P, comp.anchor_zero, t), t, critical_gap=cfg.critical_gap)
            entry = curve.to_json()
            entry["component_zeros"] = list(comp.zero_indices)
            curves.append(entry)
            fig.polyline(curve.points, label=t)
    for z in roots.locations:
        fig.dot(z)
    doc = {
        "levels": list(levels),
        "roots": roots.to_json(),
        "curves": curves,
        "argument_increments": [c["argument_increment"] for c in curves],
    }
    return doc, EXIT_OK, fig


def inverse(P: Polynomial, tau: float, cfg: AnalysisConfig) -> tuple:
    """Branches of P^{-1} from every simple zero whose tau-component is eligible,
    continued along rays of the disk |w| < tau."""
    tree = build_merge_tree(P)
    n = P.degree
    results, failed = [], 0
    for comp in components_at_level(tree, P, tau, cfg.critical_gap):
        if not comp.eligible or comp.multiplicity != 1:
            continue
        a = comp.anchor_zero
        ratios, recip = [], 0.0
        for k in range(cfg.inverse_directions):
            e = complex(math.cos(2 * math.pi * k / cfg.inverse_directions),
                        math.sin(2 * math.pi * k / cfg.inverse_directions))
            path = continue_inverse_branch(P, a, e, cfg.inverse_steps, radius=tau)
            r = path.ratios()
            ratios.append(r)
            bv = bound_value(P, a, path.f_values)
            recip = max(recip, float(np.max(np.abs(bv * r - 1.0))))
        m = float(np.min(np.concatenate(ratios)))
        ok = bool(m >= 1.0 / n - cfg.verify_tol)
        failed += not ok
        results.append({"zero": _pair(a), "samples": int(sum(len(r) for r in ratios)),
                        "min_ratio": m, "lower_bound": 1.0 / n, "holds": ok,
                        "reciprocal_identity_error": recip})
    return {"tau": tau, "branches": results}, (EXIT_VIOLATION if failed else EXIT_OK), None


def _capacity_spec_doc(obj, cfg: AnalysisConfig) -> dict:
    if isinstance(obj, dict) and "c_r" in obj:
        fam = obj["c_r"]
        try:
            a, z0 = _json_complex(fam["a"]), _json_complex(fam["z0"])
            rs = fam["r"] if isinstance(fam["r"], list) else [fam["r"]]
            rs = [float(r) for r in rs]
            factor = float(fam.get("r_max_factor", 1e3))
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"bad c_r family: {exc}") from None
        rows = []
        for r in rs:
            est = capacity(c_r_spec(a, z0, r, factor), cfg.grid, residual_tol=cfg.residual_tol)
            asym = asymptotic_cap_C(r, a, z0)
            L = math.log(r)
            second = 2 * math.pi * math.log(4 * abs(a - z0)) / L**2
            rows.append({"r": r, "numeric": est.to_json(), "asymptotic": asym,
                         "second_term": second, "slit_reference": slit_capacity(r, a, z0),
                         "difference": est.value - asym})
        return {"family": "c_r", "a": _pair(a), "z0": _pair(z0), "table": rows}
    spec = CondenserSpec.from_json(obj).validate()
    est = capacity(spec, cfg.grid, residual_tol=cfg.residual_tol)
    return {"spec": spec.to_json(), "estimate": est.to_json()}


def _json_complex(v) -> complex:
    return complex(*v) if isinstance(v, list) else complex(v)


def report(P: Polynomial, tau: float, cfg: AnalysisConfig, probes=()) -> tuple:
    an, status, fig = analyze(P, tau, cfg, probes)
    levels = [tau / 2**j for j in range(cfg.sublevels)][::-1]
    tr, _, _ = trace(P, [t for t in levels if _clear(P, t, cfg)], cfg)
    inv, s_inv, _ = inverse(P, tau, cfg)
    cap = _capacity_study(P, tau, cfg)
    status = max(status, s_inv, cap.pop("_status", EXIT_OK))
    doc = {"analysis": an, "trace": tr, "inverse": inv, "capacity": cap}
    return doc, status, fig


def _clear(P, t, cfg) -> bool:
    return all(abs(cp.critical_value - t) > cfg.critical_gap * t for cp in proper_critical_points(P))


def _capacity_study(P: Polynomial, tau: float, cfg: AnalysisConfig) -> dict:
    """cap C(r) against its slit-plane asymptotics and the strip lower bound,
    for the first eligible component at level tau."""
    tree = build_merge_tree(P)
    comp = next((c for c in components_at_level(tree, P, tau, cfg.critical_gap) if c.eligible), None)
    if comp is None:
        return {"skipped": "no eligible component"}
    a = comp.anchor_zero
    z0 = seed_on_level(P, a, tau / 2)
    d = abs(a - z0)
    r = cfg.capacity_r * d
    p, dp = value_and_derivative(P, z0)
    ratio = abs(dp / p)
    est = capacity(c_r_spec(a, z0, r), cfg.grid, residual_tol=cfg.residual_tol)
    budget = 2 * abs(est.richardson_correction)
    strip = asymptotic_cap_strip(r, P.degree, ratio) if r * ratio < 1 else None
    holds = strip is None or est.value >= strip - budget
    sites = (a, *[cp.location for cp in proper_critical_points(P)])
    base = c_r_spec(a, z0, r, sites=sites)
    study = puncture_convergence(base, _rho_sequence(base, cfg), cfg.grid[0], residual_tol=cfg.residual_tol)
    devs = study.deviations
    return {
        "a": _pair(a), "z0": _pair(z0), "r": r,
        "numeric": est.to_json(),
        "asymptotic_C": asymptotic_cap_C(r, a, z0),
        "slit_reference": slit_capacity(r, a, z0),
        "strip_asymptotic": strip,
        "grid_error_budget": budget,
        "capacity_comparison_holds": holds,
        "puncture": study.to_json(),
        "puncture_monotone": all(x >= y for x, y in zip(devs, devs[1:])),
        "_status": EXIT_OK if holds else EXIT_VIOLATION,
    }


def _rho_sequence(spec: CondenserSpec, cfg: AnalysisConfig) -> list:
    n = cfg.grid[0]
    floor = max(4 * spec.frame.local_width(s, n) for s in spec.puncture_sites)
    d = abs(spec.puncture_sites[0] - spec.frame.center)
    # largest puncture must stay clear of the second plate
    top = 0.4 * d
    out = []
    rho = top
    while rho >= floor and len(out) < 4:
        out.append(rho)
        rho /= 2
    return out


# ----------------------------------------------------------------------------
# argument handling


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="lemnikit", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"lemnikit {__version__}")
    sub = ap.add_subparsers(dest="verb", required=True)

    def common(p):
        p.add_argument("--config", help="key = value file; flags override it")
        p.add_argument("--seed", type=int)
        p.add_argument("--out", help="directory for <verb>.json and <verb>.svg (default: JSON to stdout)")
        p.add_argument("--verbose", action="store_true")
        p.add_argument("--grid", help="capacity grid sizes, e.g. 128,256")

    for verb in ("analyze", "report"):
        p = sub.add_parser(verb)
        p.add_argument("poly")
        p.add_argument("--tau", type=float, default=1.0)
        p.add_argument("--probe", type=_complex_arg, action="append", default=[],
                       help="extra sample point, e.g. 2 or 0.5+1i; repeatable")
        common(p)
    p = sub.add_parser("trace")
    p.add_argument("poly")
    p.add_argument("--levels", type=_levels_arg, required=True)
    common(p)
    p = sub.add_parser("inverse")
    p.add_argument("poly")
    p.add_argument("--tau", type=float, default=1.0)
    common(p)
    p = sub.add_parser("capacity")
    p.add_argument("spec")
    common(p)
    return ap


def _emit(doc: dict, fig, verb: str, out: str | None):
    text = dumps(doc)
    if out is None:
        sys.stdout.write(text)
        return
    d = Path(out)
    d.mkdir(parents=True, exist_ok=True)
    (d / f"{verb}.json").write_text(text)
    if fig is not None:
        (d / f"{verb}.svg").write_text(fig.render())


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config, {"seed": args.seed, "grid": args.grid})
        if args.verb in ("analyze", "report", "inverse") and not args.tau > 0:
            raise InputError("--tau must be positive")
        if args.verb == "capacity":
            body = _capacity_spec_doc(_read_json(args.spec), cfg)
            doc, status, fig = _document("capacity", None, cfg, **body), EXIT_OK, None
        else:
            P = load_polynomial(args.poly)
            if args.verb == "analyze":
                body, status, fig = analyze(P, args.tau, cfg, args.probe, args.verbose)
            elif args.verb == "report":
                body, status, fig = report(P, args.tau, cfg, args.probe)
            elif args.verb == "trace":
                body, status, fig = trace(P, args.levels, cfg)
            else:
                body, status, fig = inverse(P, args.tau, cfg)
            doc = _document(args.verb, P, cfg, **body)
        doc["exit_status"] = status
        _emit(doc, fig, args.verb, args.out)
        return status
    except (InputError, InvalidCondenser) as exc:
        print(f"lemnikit: error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except LemniscateError as exc:
        print(f"lemnikit: numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
