"""``flowembed`` command line: params, tile, phi, flow and verify-all.

Reports are JSON with sorted keys and no clock readings, so a fixed seed
gives byte-identical output.  Timings go to stderr.  Exit status is 0 when
every check passes, 1 when a check fails and 2 on configuration errors
(with a JSON error object on stderr).
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import SCHEMA_VERSION
from .errors import FlowEmbedError
from .flows import (DiscreteSystem, ProductExtension, SolenoidFlow, TorusFlow, conjugacy_roundtrip,
                    first_return, first_return_generic, flow_boundary_probe, parse_system, return_orbit_length,
                    solenoid_return_system)
from .generators import periodic_marker, random_b_signal, random_marker
from .phi import (equivariance_defect, locate_zeros, make_phi, perturb_step, phi_eval, sample_real,
                  shift_rigidity_margin, spectral_support_report)
from .theta import EmbeddingParams, build_params, load_params, validate_params
from .tiling import build_tiling, check_geometry, load_marker

CONFIG_ERRORS = (OSError, ValueError, KeyError, TypeError)


def jsonable(obj):
    """Recursively convert numpy, complex, Fraction and non-finite values."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [jsonable(float(obj.real)), jsonable(float(obj.imag))]
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else str(x)
    return obj


def dumps(report: dict) -> str:
    return json.dumps(jsonable(report), sort_keys=True, indent=2) + "\n"


def emit(report: dict, out) -> None:
    text = dumps(report)
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _tick(label: str, t0: float) -> None:
    print(f"[flowembed] {label}: {time.perf_counter() - t0:.2f} s", file=sys.stderr)


# -- params -------------------------------------------------------------------


def cmd_params(args) -> dict:
    p = build_params(args.a, args.delta, args.L, args.M, args.M1, args.c)
    rep = {"params": p.to_json()}
    if args.validate:
        val = validate_params(p)
        rep["validation"] = val
        rep["passed"] = val["passed"]
    return rep


def _params(args) -> EmbeddingParams:
    return load_params(args.params) if args.params else build_params()


# -- tile ---------------------------------------------------------------------


def _marker_from_args(args):
    if args.marker:
        return load_marker(args.marker)
    window = tuple(args.window)
    if args.random is not None:
        return random_marker(args.random, window, args.M, args.M1)
    if args.periodic is not None:
        return periodic_marker(args.periodic, window, args.M, args.M1)
    raise ValueError("tile needs --marker, --random SEED or --periodic PERIOD")


def cmd_tile(args) -> dict:
    marker = _marker_from_args(args)
    if args.save_marker:
        Path(args.save_marker).write_text(dumps(marker.to_json()))
    til = build_tiling(marker, exact=not args.float)
    rep = {"marker": marker.to_json(), "tiling": til.to_json()}
    if args.report:
        geo = check_geometry(til, marker, args.c)
        rep["report"] = geo
        rep["passed"] = geo["passed"]
    if args.plot:
        from .plots import plot_tiling

        plot_tiling(til, args.plot)
    return rep


# -- phi ----------------------------------------------------------------------


def _phi_inputs(args, second: bool = False):
    if not args.marker:
        raise ValueError("phi needs --marker")
    p = _params(args)
    m = load_marker(args.marker)
    p = p.with_markers(m.M, m.M1) if (m.M, m.M1) != (p.M, p.M1) else p
    phi = make_phi(m, p)
    if not second:
        return p, phi, None
    if not args.marker2:
        raise ValueError(f"phi {args.action} needs --marker2")
    return p, phi, make_phi(load_marker(args.marker2), p)


def _re_range(phi, args, default_half: float = 50.0):
    lo, hi = phi.complex_domain()
    if args.re_range:
        return tuple(args.re_range)
    mid = 0.5 * (lo + hi)
    return (max(lo, mid - default_half), min(hi, mid + default_half))


def cmd_phi(args) -> dict:
    action = args.action
    p, phi, phi2 = _phi_inputs(args, second=action == "rigidity")
    base = {"action": action, "params": p.to_json(), "real_domain": phi.real_domain(),
            "complex_domain": phi.complex_domain()}
    if action == "eval":
        lo, hi = _re_range(phi, args)
        xs = np.linspace(lo, hi, args.nx)
        ys = np.linspace(-1.0, 1.0, args.ny)
        X, Y = np.meshgrid(xs, ys)
        vals = phi_eval(phi, (X + 1j * Y).ravel()).reshape(X.shape)
        rng = np.random.default_rng(args.seed)
        probe = rng.uniform(lo + 3, hi - 3, 50) + 1j * rng.uniform(-1, 1, 50)
        eqv = max(equivariance_defect(phi, k, probe) for k in (1, 2, 3))
        sup_real = float(np.abs(phi_eval(phi, xs.astype(complex))).max())
        base.update(
            grid={"x": xs, "y": ys},
            values=[[[v.real, v.imag] for v in row] for row in vals],
            sup_real=sup_real,
            equivariance_defect=eqv,
            checks={"sup_le_K1": sup_real <= p.K1 + 2e-9, "equivariance": eqv < 1e-8},
        )
        if args.plot:
            from .plots import plot_phi_modulus

            plot_phi_modulus(phi, args.plot, (lo, hi))
    elif action == "zeros":
        lo, hi = _re_range(phi, args)
        zs = locate_zeros(phi, (lo, hi))
        disks = [vars(d) for d in zs.disks]
        base.update(
            re_range=[lo, hi],
            disks=disks,
            off_disk=zs.off_disk,
            checks={
                "winding_one": all(d.winding == 1 for d in zs.disks),
                "zeros_in_disks": all(d.zero is not None and abs(d.zero - d.centre) <= p.r1 for d in zs.disks),
                "off_disk_modulus": bool(zs.off_disk["passed"]),
            },
        )
    elif action == "rigidity":
        (margin, arg), (rs, sups) = shift_rigidity_margin(phi, phi2, args.r_step, tuple(args.window),
                                                           with_curve=True)
        base.update(margin=margin, argmin_r=arg, checks={"margin_positive": margin > 0},
                    curve={"r": rs, "sup": sups} if args.curve else None)
        if args.plot:
            from .plots import plot_rigidity

            plot_rigidity(rs, sups, args.plot, 2 * p.r1)
    elif action == "spectrum":
        rep = spectral_support_report(phi, args.window_radius)
        base.update(spectrum=rep, checks={"leakage": rep["leakage"] < 1e-2})
        if args.plot:
            from .plots import plot_spectrum

            plot_spectrum(sample_real(phi, args.window_radius, 0.25, rep["centre"]), args.plot, rep["band"])
    elif action == "perturb":
        f = random_b_signal(args.seed, p.a, 40.0, 0.25)
        second = None
        if args.marker2:
            second = (random_b_signal(args.seed + 1, p.a, 40.0, 0.25), make_phi(load_marker(args.marker2), p))
        _, rep = perturb_step(f, phi, second)
        checks = {"distance_below_delta": rep["distance_ok"], "recovery": rep["recovery_error"] < 1e-9}
        if second is not None:
            checks["rigidity_margin_positive"] = rep["rigidity_margin"] > 0
        base.update(perturbation=rep, checks=checks)
    base["passed"] = all(base["checks"].values())
    return base


# -- flow ---------------------------------------------------------------------


def _section(flow, args):
    if isinstance(flow, (SolenoidFlow, ProductExtension)):
        return flow.section(args.section)
    if isinstance(flow, TorusFlow):
        return flow.section(clipped=args.clipped)
    return flow.section()


def _discrete_system(desc: str) -> DiscreteSystem:
    kind, _, rest = desc.partition(":")
    if kind == "solenoid":
        return solenoid_return_system(int(rest or 4), 1, 1)
    if kind == "product":
        depth, _, k = rest.partition(":")
        return solenoid_return_system(int(depth or 4), 1, int(k or 5))
    if kind == "suspension":
        return DiscreteSystem.from_json(json.loads(Path(rest).read_text()))
    raise ValueError(f"suspend-embed needs a discrete base, got {desc!r}")


def cmd_flow(args) -> dict:
    action = args.action
    rep = {"action": action, "system": args.system, "seed": args.seed}
    if action == "suspend-embed":
        from .verify import suspension_checks

        checks = suspension_checks(_discrete_system(args.system), args.seed, args.samples)
        rep.update(checks=checks, passed=all(c["passed"] for c in checks.values()))
        return rep
    flow = parse_system(args.system)
    rng = np.random.default_rng(args.seed)
    if action == "simulate":
        p = flow.random_point(rng)
        ts = np.arange(0.0, args.t_max + args.dt / 2, args.dt)
        path = Path(args.csv) if args.csv else Path(args.out or "trajectory").with_suffix(".csv")
        law = 0.0
        q = p
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t"] + [f"c{j}" for j in range(len(flow.coords(p)))])
            for i, t in enumerate(ts):
                direct = flow.flow(p, float(t))
                if i:
                    q = flow.flow(q, args.dt)
                    law = max(law, flow.distance(q, direct))
                w.writerow([f"{t:.17g}"] + [f"{c:.17g}" for c in flow.coords(direct)])
        rep.update(start=flow.coords(p), steps=len(ts), csv=str(path), flow_law_defect=law,
                   checks={"flow_law": law < 1e-9})
    elif action == "return":
        sec = _section(flow, args)
        s = sec.sample(rng)
        rt, nxt = first_return(s, sec, flow, args.t_max)
        gen_t, _ = first_return_generic(flow, sec, s, args.t_max)
        rep.update(section=sec.section_id, start=flow.coords(s), return_time=rt, return_point=flow.coords(nxt),
                   generic_return_time=gen_t, checks={"generic_agrees": abs(gen_t - rt) < 1e-9})
        if args.orbit:
            rep["orbit_length"] = return_orbit_length(s, sec, flow)
    elif action == "conjugacy":
        sec = _section(flow, args)
        res = conjugacy_roundtrip(flow, sec, args.samples, seed=args.seed)
        rep.update(conjugacy=res, checks={"roundtrip": res["passed"]})
    elif action == "boundary":
        sec = _section(flow, args)
        gamma = args.gamma if args.gamma is not None else sec.eta / 2
        res = flow_boundary_probe(flow, sec, gamma, args.probes, eps=args.eps, seed=args.seed)
        rep.update(probe=res, checks={"all_interior": res["passed"]})
    rep["passed"] = all(rep["checks"].values())
    return rep


# -- verify-all ---------------------------------------------------------------


def _verify_plots(seed: int, directory: Path) -> list[str]:
    from . import plots
    from .verify import DEFAULTS, PHI_WINDOW, default_params, phi_markers

    directory.mkdir(parents=True, exist_ok=True)
    p = default_params()
    til = build_tiling(random_marker(seed * 1000, (0, 600), DEFAULTS["M"], DEFAULTS["M1"]))
    out = [plots.plot_tiling(til, directory / "tiling.png", (100, 500))]
    phi = make_phi(phi_markers(seed, 1)[0], p)
    out.append(plots.plot_phi_modulus(phi, directory / "phi_modulus.png", (-60.0, 60.0)))
    rep = spectral_support_report(phi, 200.0)
    out.append(plots.plot_spectrum(sample_real(phi, 200.0, 0.25, rep["centre"]), directory / "spectrum.png",
                                   rep["band"]))
    mx = random_marker(seed * 100 + 10, PHI_WINDOW, DEFAULTS["M"], DEFAULTS["M1"])
    my = random_marker(seed * 100 + 11, PHI_WINDOW, DEFAULTS["M"], DEFAULTS["M1"])
    _, (rs, sups) = shift_rigidity_margin(make_phi(mx, p), make_phi(my, p), with_curve=True)
    out.append(plots.plot_rigidity(rs, sups, directory / "rigidity.png", 2 * p.r1))
    return [str(x) for x in out]


def cmd_verify(args) -> dict:
    from .verify import SUITES

    chosen = sorted({int(s) for s in args.suites.split(",")}) if args.suites else sorted(SUITES)
    unknown = [s for s in chosen if s not in SUITES]
    if unknown:
        raise ValueError(f"unknown suites {unknown}")
    golden = json.loads(Path(args.golden).read_text()) if args.golden else None
    results = []
    for s in chosen:
        t0 = time.perf_counter()
        rep = SUITES[s](args.seed, golden=golden) if s == 4 else SUITES[s](args.seed)
        _tick(f"suite {s} ({rep['name']}) {'PASS' if rep['passed'] else 'FAIL'}", t0)
        results.append(rep)
    report = {"seed": args.seed, "suites": results, "passed": all(r["passed"] for r in results)}
    if args.plot:
        t0 = time.perf_counter()
        report["plots"] = _verify_plots(args.seed, Path(args.plot))
        _tick("plots", t0)
    return report


# -- parser -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="flowembed", description=__doc__.split("\n")[0])
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("params", help="select and validate the embedding constants")
    sp.add_argument("--a", type=float, default=2.0)
    sp.add_argument("--delta", type=float, default=0.8)
    sp.add_argument("--L", type=float, default=10.0)
    sp.add_argument("--M", type=int, default=10)
    sp.add_argument("--M1", type=int, default=25)
    sp.add_argument("--c", type=float, default=1.02)
    sp.add_argument("--validate", action="store_true")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_params)

    sp = sub.add_parser("tile", help="Voronoi interval tiling of a marker window")
    src = sp.add_mutually_exclusive_group()
    src.add_argument("--marker", help="marker JSON")
    src.add_argument("--random", type=int, metavar="SEED", help="seeded random marker")
    src.add_argument("--periodic", type=int, metavar="PERIOD", help="value 1 every PERIOD")
    sp.add_argument("--window", type=int, nargs=2, default=(0, 600), metavar=("LO", "HI"))
    sp.add_argument("--M", type=int, default=10)
    sp.add_argument("--M1", type=int, default=25)
    sp.add_argument("--c", type=float, default=1.02)
    sp.add_argument("--float", action="store_true", help="floating point instead of exact arithmetic")
    sp.add_argument("--report", action="store_true", help="add the cell geometry checks")
    sp.add_argument("--save-marker")
    sp.add_argument("--plot")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_tile)

    sp = sub.add_parser("phi", help="evaluate and check the zero-placing map")
    sp.add_argument("action", choices=["eval", "zeros", "rigidity", "spectrum", "perturb"])
    sp.add_argument("--params", help="params JSON (default: built-in defaults)")
    sp.add_argument("--marker")
    sp.add_argument("--marker2")
    sp.add_argument("--re-range", type=float, nargs=2)
    sp.add_argument("--nx", type=int, default=201)
    sp.add_argument("--ny", type=int, default=21)
    sp.add_argument("--r-step", type=float, default=1e-3)
    sp.add_argument("--window", type=float, nargs=2, default=(-50.0, 50.0))
    sp.add_argument("--window-radius", type=float, default=200.0)
    sp.add_argument("--curve", action="store_true", help="include the rigidity curve")
    sp.add_argument("--seed", type=int, default=7)
    sp.add_argument("--plot")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_phi)

    sp = sub.add_parser("flow", help="flows, cross-sections and the suspension embedding")
    sp.add_argument("action", choices=["simulate", "return", "conjugacy", "boundary", "suspend-embed"])
    sp.add_argument("--system", default="solenoid:4", help="solenoid:N | product:N:k | suspension:FILE | torus")
    sp.add_argument("--section", type=int, default=2)
    sp.add_argument("--clipped", action="store_true", help="torus: use the clipped half-section")
    sp.add_argument("--seed", type=int, default=7)
    sp.add_argument("--t-max", type=float, default=100.0)
    sp.add_argument("--dt", type=float, default=0.5)
    sp.add_argument("--csv")
    sp.add_argument("--samples", type=int, default=100)
    sp.add_argument("--probes", type=int, default=100)
    sp.add_argument("--gamma", type=float)
    sp.add_argument("--eps", type=float)
    sp.add_argument("--orbit", action="store_true", help="also count the return orbit length")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_flow)

    sp = sub.add_parser("verify-all", help="run the acceptance suites")
    sp.add_argument("--seed", type=int, default=7)
    sp.add_argument("--suites", help="comma-separated suite numbers (default: all)")
    sp.add_argument("--golden", help="rigidity margins JSON for the regression lock")
    sp.add_argument("--plot", metavar="DIR")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_verify)
    return ap


def _fail(code: int, exc: BaseException) -> int:
    err = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
    for attr in ("offending", "step"):
        if hasattr(exc, attr):
            err[attr] = getattr(exc, attr)
    sys.stderr.write(json.dumps(jsonable(err), sort_keys=True) + "\n")
    return code


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    t0 = time.perf_counter()
    try:
        report = args.func(args)
    except CONFIG_ERRORS as exc:
        return _fail(2, exc)
    except FlowEmbedError as exc:
        return _fail(1, exc)
    report["schema_version"] = SCHEMA_VERSION
    report["command"] = args.command
    emit(report, args.out)
    _tick(args.command, t0)
    return 0 if report.get("passed", True) else 1


if __name__ == "__main__":
    sys.exit(main())
