"""Command line interface: ``torus-blocks block|specfn|verify ...``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time

import numpy as np

from . import closedform, dotsenko, gmc, nekrasov, specfn, zamo
from .hypergeom import HGFParams, hyp2f1
from .report import VerifyReport, emit, fmt_complex
from .specfn import BlockParams, ModularParam

# built-in defaults; a config file and then explicit flags override them
DEFAULTS = {
    "gamma": 1.0, "P": 0.7, "alpha": 0.4, "q": 0.1, "order": 12, "N": 1,
    "samples": 200_000, "seed": 0, "modes": 512, "grid": 4096, "format": "json",
    "tol": None, "out": None, "extract": None, "quad_points": 40,
    "u": 0.3, "z": 1.0, "A": 0.5, "B": 0.25, "C": 1.5, "w": 0.5, "chi": None,
    "deriv": 0, "timing": True,
}
NUMERIC = {"gamma": float, "P": complex, "alpha": float, "q": float, "order": int, "N": int,
           "samples": int, "seed": int, "modes": int, "grid": int, "tol": float, "extract": int,
           "quad_points": int, "u": complex, "z": complex, "A": complex, "B": complex,
           "C": complex, "w": complex, "chi": float, "deriv": int}


class CheckFailed(Exception):
    pass


def read_config(path: str) -> dict:
    """key = value lines; '#' starts a comment."""
    out = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key = value")
            key, val = (s.strip() for s in line.split("=", 1))
            key = key.lstrip("-").replace("-", "_")
            if key not in DEFAULTS:
                raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
            out[key] = val
    return out


def _coerce(key, val):
    if val is None or key not in NUMERIC:
        return val
    if key == "timing" or isinstance(val, bool):
        return val
    conv = NUMERIC[key]
    if conv is complex:
        z = complex(str(val).replace(" ", "").replace("i", "j"))
        return z.real if z.imag == 0 else z
    return conv(val)


def resolve(ns: argparse.Namespace) -> dict:
    opts = dict(DEFAULTS)
    if ns.config:
        opts.update(read_config(ns.config))
    for key in DEFAULTS:
        val = getattr(ns, key, None)
        if val is not None:
            opts[key] = val
    if isinstance(opts["timing"], str):
        opts["timing"] = opts["timing"].lower() not in ("0", "false", "no", "off")
    return {k: _coerce(k, v) for k, v in opts.items()}


def _add_common(p: argparse.ArgumentParser, *names):
    flag_opts = {
        "gamma": dict(type=float, help="coupling gamma in (0, 2)"),
        "P": dict(type=str, help="momentum (complex allowed, e.g. 2.9j)"),
        "alpha": dict(type=float, help="insertion weight"),
        "q": dict(type=float, help="nome q"),
        "order": dict(type=int, help="series truncation order in q"),
        "N": dict(type=int, help="number of integration points, alpha = -N gamma"),
        "samples": dict(type=int, help="Monte Carlo samples"),
        "seed": dict(type=int, help="Monte Carlo seed"),
        "modes": dict(type=int, help="Fourier modes of the field"),
        "grid": dict(type=int, help="grid points (MC) or alpha-grid size (shift0)"),
        "extract": dict(type=int, help="extract q-coefficients up to this order"),
        "u": dict(type=str, help="argument u"),
        "z": dict(type=str, help="argument z"),
        "A": dict(type=str), "B": dict(type=str), "C": dict(type=str), "w": dict(type=str),
        "chi": dict(type=float, help="gamma/2 or 2/gamma"),
        "deriv": dict(type=int, help="derivative order"),
    }
    for name in names:
        p.add_argument(f"--{name}", dest=name, default=None, **flag_opts[name])
    p.add_argument("--format", choices=("json", "csv"), default=None)
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--out", default=None, help="write output to this file")
    p.add_argument("--config", default=None, help="key = value file; flags override it")
    p.add_argument("--no-timing", dest="timing", action="store_false", default=None,
                   help="report runtime_ms = 0 so repeated runs are byte-identical")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="torus-blocks", description="Toric one-point Virasoro blocks by four routes.")
    sub = parser.add_subparsers(dest="command", required=True)

    block = sub.add_parser("block", help="compute the block by one route").add_subparsers(dest="route", required=True)
    for route in ("nekrasov", "zamo"):
        _add_common(block.add_parser(route), "gamma", "P", "alpha", "order", "q")
    _add_common(block.add_parser("gmc"), "gamma", "P", "alpha", "q", "samples", "seed", "modes", "grid")
    _add_common(block.add_parser("df"), "gamma", "N", "P", "q", "extract")

    sf = sub.add_parser("specfn", help="evaluate a special function").add_subparsers(dest="fn", required=True)
    _add_common(sf.add_parser("theta"), "u", "q", "deriv")
    _add_common(sf.add_parser("eta"), "q")
    _add_common(sf.add_parser("wp"), "u", "q")
    _add_common(sf.add_parser("dgamma"), "z", "gamma")
    _add_common(sf.add_parser("hyp2f1"), "A", "B", "C", "w")
    _add_common(sf.add_parser("reflection"), "alpha", "chi", "P", "gamma")

    ver = sub.add_parser("verify", help="cross-check two routes").add_subparsers(dest="check", required=True)
    _add_common(ver.add_parser("series"), "gamma", "P", "alpha", "order")
    _add_common(ver.add_parser("shift0"), "gamma", "P", "grid")
    _add_common(ver.add_parser("gmc"), "gamma", "P", "alpha", "q", "samples", "seed", "modes", "grid", "order")
    _add_common(ver.add_parser("df"), "gamma", "N", "P", "q", "samples", "seed")
    _add_common(ver.add_parser("momentum"), "gamma", "N", "q")
    _add_common(ver.add_parser("all"), "gamma", "P", "alpha", "q", "samples", "seed", "order")
    return parser


# ---------------------------------------------------------------------------
# output helpers

def _cx(z):
    z = complex(z)
    return [z.real, z.imag]


def _dump(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _series_out(series, config, fmt):
    if fmt == "csv":
        lines = ["n,re,im"] + [f"{n},{c.real:.17g},{c.imag:.17g}" for n, c in enumerate(series.coeffs)]
        return "\n".join(lines) + "\n"
    return _dump({"coefficients": [_cx(c) for c in series.coeffs], "config": {k: config[k] for k in sorted(config)}})


def _value_out(fields: dict, config, fmt):
    config = {k: config[k] for k in sorted(config)}
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(list(fields) + ["config"])
        w.writerow([fmt_complex(v) if isinstance(v, complex) else repr(v) for v in fields.values()]
                   + [json.dumps(config)])
        return buf.getvalue()
    body = {k: (_cx(v) if isinstance(v, complex) else v) for k, v in fields.items()}
    body["config"] = config
    return _dump(body)


def _echo(opts, *keys):
    out = {}
    for k in sorted(keys):
        v = opts[k]
        out[k] = _cx(v) if isinstance(v, complex) else v
    return out


def _mc(opts) -> gmc.MCConfig:
    return gmc.MCConfig(samples=opts["samples"], seed=opts["seed"], N_modes=opts["modes"], grid_points=opts["grid"])


def _params(opts) -> BlockParams:
    return BlockParams(opts["gamma"], opts["P"], opts["alpha"])


# ---------------------------------------------------------------------------
# block

def cmd_block(route, opts):
    fmt = opts["format"]
    if route in ("nekrasov", "zamo"):
        fn = nekrasov.block_series if route == "nekrasov" else zamo.recursion_series
        series = fn(_params(opts), opts["order"])
        return _series_out(series, dict(_echo(opts, "gamma", "P", "alpha", "order"), route=route), fmt), True
    if route == "gmc":
        value, err = gmc.estimate_G(_params(opts), opts["q"], _mc(opts))
        cfg = dict(_echo(opts, "gamma", "P", "alpha", "q"), **_mc(opts).echo())
        return _value_out({"value": complex(value), "stderr": err}, cfg, fmt), True
    cfg = dotsenko.DFConfig(opts["N"], opts["quad_points"])
    echo = _echo(opts, "gamma", "N", "P", "q", "quad_points")
    if opts["extract"] is not None:
        K = opts["extract"]
        ex = dotsenko.df_coefficients(cfg, opts["gamma"], opts["P"], max(K, 16))
        echo.update(condition=ex.condition, eta_weight=ex.eta_weight, extract=K, fit_degree=max(K, 16))
        return _series_out(ex.series.truncate(K), echo, fmt), True
    res = dotsenko.df_A_q_result(cfg, opts["gamma"], opts["P"], opts["q"])
    return _value_out({"value": complex(res.value), "error": res.error}, echo, fmt), True


# ---------------------------------------------------------------------------
# specfn

def cmd_specfn(fn, opts):
    echo_keys = {"theta": ("u", "q", "deriv"), "eta": ("q",), "wp": ("u", "q"), "dgamma": ("z", "gamma"),
                 "hyp2f1": ("A", "B", "C", "w"), "reflection": ("alpha", "chi", "P", "gamma")}[fn]
    if fn == "theta":
        val = specfn.jacobi_theta(opts["u"], ModularParam.from_q(opts["q"]), opts["deriv"])
    elif fn == "eta":
        val = specfn.eta(ModularParam.from_q(opts["q"]))
    elif fn == "wp":
        val = specfn.weierstrass_p(opts["u"], ModularParam.from_q(opts["q"]))
    elif fn == "dgamma":
        val = specfn.double_gamma(opts["z"], opts["gamma"])
    elif fn == "hyp2f1":
        val = hyp2f1(HGFParams(opts["A"], opts["B"], opts["C"]), opts["w"])
    else:
        chi = opts["chi"] if opts["chi"] is not None else opts["gamma"] / 2
        opts = dict(opts, chi=chi)
        val = specfn.reflection_coeff(opts["alpha"], chi, opts["P"], opts["gamma"])
    return _value_out({"value": complex(np.asarray(val).item())}, dict(_echo(opts, *echo_keys), function=fn),
                      opts["format"]), True


# ---------------------------------------------------------------------------
# verify

def _timed(fn):
    t0 = time.perf_counter()
    out = fn()
    return out, int(round(1000 * (time.perf_counter() - t0)))


def check_series(opts):
    p = _params(opts)
    K = opts["order"]
    tol = opts["tol"] if opts["tol"] is not None else 1e-9
    (a, b), ms = _timed(lambda: (nekrasov.block_series(p, K), zamo.recursion_series(p, K)))
    res = max(abs(a[k] - b[k]) / max(abs(b[k]), 1e-300) for k in range(0, K + 1, 2))
    return [VerifyReport("series", "nekrasov", "zamo", a[K - K % 2], b[K - K % 2], res, tol, ms,
                         _echo(opts, "gamma", "P", "alpha", "order"))]


def shift_alpha_grid(gamma: float, chi: float, count: int) -> np.ndarray:
    """Points strictly inside (-4/gamma + chi, Q - chi), where both shifted A_0 are regular."""
    Q = gamma / 2 + 2 / gamma
    lo, hi = -4 / gamma + chi, Q - chi
    pad = 0.05 * (hi - lo)
    return np.linspace(lo + pad, hi - pad, count)


def check_shift0(opts):
    g = opts["gamma"]
    count = opts["grid"] if opts["grid"] != DEFAULTS["grid"] else 20
    tol = opts["tol"] if opts["tol"] is not None else 1e-10
    reports = []
    for chi in (g / 2, 2 / g):
        label = "gamma/2" if chi == g / 2 else "2/gamma"

        def worst():
            best = (0.0, 0j, 0j, None)
            for a in shift_alpha_grid(g, chi, count):
                p = BlockParams(g, opts["P"], float(a))
                lhs = closedform.a0_closed(p.replace(alpha=a - chi))
                rhs = closedform.y0(a, chi, p) * closedform.a0_closed(p.replace(alpha=a + chi))
                r = abs(lhs - rhs) / abs(lhs)
                if r >= best[0]:
                    best = (r, lhs, rhs, float(a))
            return best

        (r, lhs, rhs, a_worst), ms = _timed(worst)
        echo = dict(_echo(opts, "gamma", "P"), chi=label, grid=count, worst_alpha=a_worst)
        reports.append(VerifyReport(f"shift0[chi={label}]", "A0(alpha-chi)", "Y0*A0(alpha+chi)", lhs, rhs, r, tol, ms, echo))

        a_mid = float(np.median(shift_alpha_grid(g, chi, 3)))
        p = BlockParams(g, opts["P"], a_mid)
        (ra, y), ms = _timed(lambda: (closedform.assembled_ratio(p, chi), closedform.y0(a_mid, chi, p)))
        reports.append(VerifyReport(f"assembled-ratio[chi={label}]", "W/Gamma/eta ratio", "Y0", ra, y,
                                    abs(ra - y) / abs(y), tol, ms, dict(_echo(opts, "gamma", "P"), chi=label, alpha=a_mid)))
    return reports


def check_gmc(opts):
    p = _params(opts)
    K = max(opts["order"], 20) if opts["order"] == DEFAULTS["order"] else opts["order"]
    tol = opts["tol"] if opts["tol"] is not None else 3.0
    cfg = _mc(opts)

    def run():
        v, e = gmc.estimate_G(p, opts["q"], cfg)
        return v, e, nekrasov.block_series(p, K)(opts["q"])

    (v, e, s), ms = _timed(run)
    z = abs(v - s) / e if e > 0 else abs(v - s)
    echo = dict(_echo(opts, "gamma", "P", "alpha", "q"), series_order=K, stderr=e, **cfg.echo())
    return [VerifyReport("gmc-vs-series", "gmc", "nekrasov", v, s, z, tol, ms, echo)]


def check_df(opts):
    g = opts["gamma"]
    N = opts["N"]
    P = opts["P"]
    reports = []
    cfg = dotsenko.DFConfig(N, opts["quad_points"])
    if N == 1:
        mc = gmc.MCConfig(samples=min(opts["samples"], 20_000), seed=opts["seed"])
        for q in (0.1, 0.2):
            def run():
                d = dotsenko.df_A_q(cfg, g, P, q)
                return d, gmc.estimate_A_q(BlockParams(g, P, -N * g), q, mc)
            (d, (v, e)), ms = _timed(run)
            echo = dict(_echo(opts, "gamma", "N", "P"), q=q, stderr=e, **mc.echo())
            reports.append(VerifyReport(f"df-vs-gmc[q={q}]", "df", "gmc", d, v, abs(d - v) / e,
                                        opts["tol"] if opts["tol"] is not None else 3.0, ms, echo))
    top, tol = (6, 1e-4) if N == 1 else (4, 1e-3)
    if opts["tol"] is not None:
        tol = opts["tol"]

    def extract():
        ex = dotsenko.df_coefficients(cfg, g, P)
        return ex, nekrasov.instanton_series(BlockParams(g, P, -N * g), top)

    (ex, Z), ms = _timed(extract)
    errs = [abs(ex.series[k] - Z[k]) / max(1.0, abs(Z[k])) for k in range(top + 1)]
    k = int(np.argmax(errs))
    echo = dict(_echo(opts, "gamma", "N", "P"), through=top, worst_order=k, condition=ex.condition, eta_weight=ex.eta_weight)
    reports.append(VerifyReport("df-coefficients", "df-extracted", "nekrasov", ex.series[k], Z[k], errs[k], tol, ms, echo))
    return reports


def check_momentum(opts):
    g = opts["gamma"]
    N = opts["N"]
    q = opts["q"]
    tol = opts["tol"]
    cfg = dotsenko.DFConfig(N, opts["quad_points"])
    reports = [dotsenko.verify_momentum_shift(cfg, g, 1, 1, q, tol if tol is not None else 1e-6)]
    P11 = zamo.p_mn(1, 1, g)
    (zero, ref), ms = _timed(lambda: (closedform.a0_integer_N(N, g, P11), closedform.a0_integer_N(N, g, 0.5)))
    reports.append(VerifyReport("a0-zero[P11]", "a0_integer_N(P11)", "0", zero, 0j, abs(zero) / abs(ref),
                                tol if tol is not None else 1e-10, ms, dict(_echo(opts, "gamma", "N"), reference_P=0.5)))
    (num, pred), ms = _timed(lambda: (closedform.numeric_residue_inv_a0(N, g, 1, 1),
                                      closedform.residue_inv_a0(N, g, 1, 1)))
    reports.append(VerifyReport("residue[1/A0 at P11]", "contour", "formula", num, pred, abs(num - pred) / abs(pred),
                                tol if tol is not None else 1e-6, ms, _echo(opts, "gamma", "N")))
    return reports


CHECKS = {"series": check_series, "shift0": check_shift0, "gmc": check_gmc, "df": check_df, "momentum": check_momentum}


def cmd_verify(check, opts):
    if check == "all":
        reports = []
        reports += check_series(opts)
        reports += check_shift0(dict(opts, grid=20))
        reports += check_gmc(dict(opts, grid=DEFAULTS["grid"]))
        for N in (1, 2):
            reports += check_df(dict(opts, N=N, gamma=0.8, P=0.5))
        reports += check_momentum(dict(opts, gamma=0.8, N=1, q=0.2))
    else:
        if check == "momentum" and opts["q"] == DEFAULTS["q"]:
            opts = dict(opts, q=0.2)
        reports = CHECKS[check](opts)
    if not opts["timing"]:
        for r in reports:
            r.runtime_ms = 0
    return emit(reports, opts["format"]), all(r.passed for r in reports)


def run(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        opts = resolve(ns)
        if ns.command == "block":
            text, ok = cmd_block(ns.route, opts)
        elif ns.command == "specfn":
            text, ok = cmd_specfn(ns.fn, opts)
        else:
            text, ok = cmd_verify(ns.check, opts)
    except (ValueError, ZeroDivisionError, ArithmeticError, NotImplementedError) as exc:
        print(f"torus-blocks: error: {exc}", file=sys.stderr)
        return 2 if isinstance(exc, ValueError) else 1
    if opts["out"]:
        with open(opts["out"], "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0 if ok else 1


def main():
    sys.exit(run())
