"""Command-line entry point: ``residue-index <experiment> [options]``.

Exit codes: 0 success, 1 a numerical agreement check failed, 2 bad input.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import sys

import numpy as np

from . import io as rio
from .circle import (
    CircleSymbol,
    NotStabilized,
    VanishingSymbol,
    estimate_order,
    quantize,
    random_nonvanishing,
    toeplitz,
    toeplitz_symbol,
)
from .cone import (
    PathDisagreement,
    b_regularize,
    boundary_residue,
    conic_zeta_poles,
    heat_expansion_model,
)
from .numerics import FitTermSpec, IllConditionedFit, fit_log_expansion
from .radul import (
    INDEX_CALIBRATION,
    MethodDisagreement,
    boundary_cocycle_direct,
    generalized_radul,
    index_pairing_toeplitz,
)
from .zeta import PoleOrderError, circle_model, cm_remainder, higher_residue, mellin_map, partie_finie

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2

DEFAULTS = {
    "noether": {"u": "exp(i t)", "truncation": 256, "tolerance": 1e-6, "random": 0, "degree": 3},
    "zeta": {"r": 2.0, "window": [-4, 4], "tolerance": 1e-12},
    "heat-fit": {"terms": [[0.0, 0], [0.0, 1], [0.0, 2]], "samples": None, "tolerance": 1e-12,
                 "max_condition": 1e12},
    "b-residue": {"tolerance": 1e-8},
    "cone-traces": {"tolerance": 1e-12},
    "radul": {"u0": "exp(-i t)", "u1": "exp(i t)", "truncation": 256, "p_max": 2, "tolerance": 1e-6},
    "cm-check": {"u": "2 + cos(t) + exp(2 i t)", "truncation": 512, "z": [1.0, 0.0], "N": [1, 2, 3, 4],
                 "tolerance": 0.9},
}


def _c(x) -> list[float]:
    return rio.complex_to_json(x)


def _resolve(args) -> dict:
    config = dict(DEFAULTS[args.command])
    if args.config:
        loaded = rio.load_json(args.config)
        if not isinstance(loaded, dict):
            raise rio.InputError("config must be a JSON object")
        config.update(loaded)
    for key in ("truncation", "tolerance", "seed", "u", "samples", "u0", "u1"):
        v = getattr(args, key, None)
        if v is not None:
            config[key] = v
    config.setdefault("seed", 0)
    config["experiment"] = args.command
    config["format"] = args.format
    tol = config.get("tolerance")
    if tol is not None and not (isinstance(tol, (int, float)) and tol > 0):
        raise rio.InputError("tolerance must be positive")
    return config


# --------------------------------------------------------------------------
# experiments: each returns (report, csv_rows or None, passed)
# --------------------------------------------------------------------------


def run_noether(cfg: dict):
    N = int(cfg["truncation"])
    rng = np.random.default_rng(int(cfg["seed"]))
    specs = [("u", rio.parse_u_spec(cfg["u"]))] if cfg.get("u") else []
    for i in range(int(cfg.get("random", 0))):
        specs.append((f"random[{i}]", random_nonvanishing(rng, int(cfg.get("degree", 3)))))
    results, rows, passed = [], [], True
    for label, u in specs:
        if not u.is_nowhere_vanishing():
            raise rio.InputError(f"{label}: u vanishes on the circle")
        try:
            pairing = index_pairing_toeplitz(u, N, tol=1e-4)
        except MethodDisagreement as exc:
            results.append({"label": label, "error": str(exc)})
            passed = False
            continue
        vals = pairing.values()
        agree = all(abs(v + pairing.winding) <= cfg["tolerance"] for v in vals)
        passed &= agree
        results.append({
            "label": label,
            "u": rio.trig_to_json(u),
            "winding": pairing.winding,
            "kernel_count": _c(vals[0]),
            "symbolic": _c(vals[1]),
            "spectral_direct": _c(vals[2]),
            "calibration": INDEX_CALIBRATION,
            "stabilized_trace": _c(pairing.spectral_direct.details["raw_trace"]),
            "direct_truncation": pairing.spectral_direct.details["N"],
            "agree": agree,
        })
        rows.append((label, pairing.winding, vals[0].real, vals[1].real, vals[2].real))
    report = {"results": results, "passed": passed}
    return report, (["label", "winding", "kernel_count", "symbolic", "spectral_direct"], rows), passed


def _zeta_report(zs, cfg):
    window = tuple(cfg.get("window", [-4, 4]))
    L = zs.laurent(0.0, window)
    poles = zs.poles()
    report = {
        "laurent_at_0": rio.laurent_to_json(L),
        "poles": [{"location": p.location + 0.0, "order": p.order, "leading": _c(p.leading)} for p in poles],
        "higher_residues": {str(p): _c(higher_residue(zs, p)) for p in (1, 2, 3)},
        "partie_finie": _c(partie_finie(zs)),
    }
    rows = [(p.location + 0.0, p.order, abs(p.leading)) for p in poles]
    return report, (["re(z)", "order", "|leading|"], rows)


def run_zeta(cfg: dict):
    if "heat_expansion" in cfg:
        h = rio.heat_expansion_from_json(cfg["heat_expansion"])
    elif "terms" in cfg:
        h = rio.heat_expansion_from_json(cfg)
    else:
        raise rio.InputError("zeta needs a heat expansion (field 'heat_expansion' or 'terms')")
    r = float(cfg.get("r", 2.0))
    if r <= 0:
        raise rio.InputError("r must be positive")
    report, table = _zeta_report(mellin_map(h, r), cfg)
    report["heat_expansion"] = rio.heat_expansion_to_json(h)
    return report, table, True


def run_heat_fit(cfg: dict):
    if not cfg.get("samples"):
        raise rio.InputError("heat-fit needs a samples CSV (--samples)")
    t, v = rio.read_samples_csv(cfg["samples"])
    try:
        spec = FitTermSpec(tuple((float(a), int(j)) for a, j in cfg["terms"]))
    except (TypeError, ValueError) as exc:
        if isinstance(exc, IllConditionedFit):
            raise
        raise rio.InputError(f"bad fit terms: {exc}") from None
    fit = fit_log_expansion(t, v, spec, float(cfg["max_condition"]))
    coeffs = [{"alpha": a, "logpow": j, "coeff": _c(c)} for (a, j), c in zip(spec.terms, fit.coefficients)]
    report = {"coefficients": coeffs, "residual": fit.residual, "condition": fit.condition}
    if (0.0, 2) in spec.terms:
        report["tr_partial_sigma"] = _c(fit.coefficient(0.0, 2) / -0.25)
    rows = [(a, j, complex(c).real, complex(c).imag) for (a, j), c in zip(spec.terms, fit.coefficients)]
    return report, (["alpha", "logpow", "re", "im"], rows), True


def run_b_residue(cfg: dict):
    u = rio.bdensity_from_json(cfg.get("density", cfg))
    try:
        L = b_regularize(u, "laurent_window", (-1, 2), tol=float(cfg["tolerance"]))
        passed = True
    except PathDisagreement:
        L, passed = None, False
    report = {
        "residue_partial_fractions": _c(L[-1]) if L is not None else None,
        "residue_boundary_formula": _c(boundary_residue(u)),
        "laurent_at_0": rio.laurent_to_json(L) if L is not None else None,
        "tr_sigma": _c(L[0]) if L is not None else None,
        "passed": passed,
    }
    rows = [(k, c.real, c.imag) for k, c in L.as_dict().items()] if L is not None else []
    return report, (["k", "re", "im"], rows), passed


def run_cone_suite(cfg: dict):
    spec = rio.cone_spec_from_json(cfg.get("spec", cfg))
    h = heat_expansion_model(spec)
    try:
        rep = conic_zeta_poles(h)
        passed, poles = True, rep.rows()
    except PoleOrderError as exc:
        passed, poles = False, []
        cfg = dict(cfg, failure=str(exc))
    report = {
        "spec": rio.cone_spec_to_json(spec),
        "heat_expansion": rio.heat_expansion_to_json(h),
        "log_coefficient": _c(h.coefficient(0.0, 1)),
        "log2_coefficient": _c(h.coefficient(0.0, 2)),
        "poles": [{"re": z, "order": o, "abs_leading": a} for z, o, a in poles],
        "order_at_zero_ok": passed,
        "passed": passed,
    }
    return report, (["re(z)", "order", "|leading|"], poles), passed


def run_radul(cfg: dict):
    u0, u1 = rio.parse_u_spec(cfg["u0"]), rio.parse_u_spec(cfg["u1"])
    N = int(cfg["truncation"])
    a0, a1 = toeplitz_symbol(u0), toeplitz_symbol(u1)
    sym = generalized_radul(a0, a1, int(cfg["p_max"]))
    work = max(N, 4 * max(u0.degree, u1.degree) + 16)
    raw = boundary_cocycle_direct(toeplitz(u0, work, check=False), toeplitz(u1, work, check=False))
    direct = INDEX_CALIBRATION * raw
    passed = abs(sym.value - direct) <= cfg["tolerance"]
    report = {
        "symbolic": _c(sym.value),
        "breakdown": {str(p): _c(c) for p, c in sym.breakdown},
        "spectral_direct": _c(direct),
        "raw_trace": _c(raw),
        "calibration": INDEX_CALIBRATION,
        "passed": passed,
    }
    rows = [(p, complex(c).real, complex(c).imag) for p, c in sym.breakdown]
    return report, (["p", "re", "im"], rows), passed


def run_cm_check(cfg: dict):
    u = rio.parse_u_spec(cfg["u"])
    M = int(cfg["truncation"])
    z = rio.complex_from_json(cfg["z"])
    Q = quantize(CircleSymbol.multiplication(u), M)
    model = circle_model(M)
    orders = [estimate_order(cm_remainder(Q, model, z, int(n))) for n in cfg["N"]]
    drops = [a - b for a, b in zip(orders, orders[1:])]
    at_zero = float(np.abs(cm_remainder(Q, model, 0.0, int(cfg["N"][0])).matrix).max())
    passed = all(d >= cfg["tolerance"] for d in drops) and at_zero == 0.0
    report = {"orders": orders, "drops": drops, "max_abs_at_z0": at_zero, "passed": passed}
    rows = list(zip(cfg["N"], orders))
    return report, (["N", "order"], rows), passed


RUNNERS = {
    "noether": run_noether,
    "zeta": run_zeta,
    "heat-fit": run_heat_fit,
    "b-residue": run_b_residue,
    "cone-traces": run_cone_suite,
    "radul": run_radul,
    "cm-check": run_cm_check,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="residue-index", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    for name in RUNNERS:
        s = sub.add_parser(name)
        s.add_argument("--config", help="JSON file with experiment parameters")
        s.add_argument("--out", help="output path (default: stdout)")
        s.add_argument("--format", choices=("json", "csv"), default="json")
        s.add_argument("--truncation", type=int)
        s.add_argument("--seed", type=int)
        s.add_argument("--tolerance", type=float)
        if name in ("noether", "cm-check"):
            s.add_argument("--u", help='symbol, e.g. "exp(i t)" or "(2 + exp(i t)) exp(-2 i t)"')
        if name == "radul":
            s.add_argument("--u0")
            s.add_argument("--u1")
        if name == "heat-fit":
            s.add_argument("--samples", help="CSV with columns t,value")
    return p


def _emit(args, cfg, report, table):
    if args.format == "csv":
        header, rows = table
        text = rio.csv_text(header, rows)
    else:
        text = rio.dumps({"config": cfg, "report": report})
    if args.out:
        rio.atomic_write(args.out, text)
        meta = {"created": _dt.datetime.now(_dt.timezone.utc).isoformat(), "output": args.out}
        rio.atomic_write(args.out + ".meta.json", rio.dumps(meta))
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _resolve(args)
        report, table, passed = RUNNERS[args.command](cfg)
    except (rio.InputError, VanishingSymbol, IllConditionedFit, KeyError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (NotStabilized, MethodDisagreement, PathDisagreement) as exc:
        print(f"failed: {exc}", file=sys.stderr)
        return EXIT_FAIL
    _emit(args, cfg, report, table)
    return EXIT_OK if passed else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
