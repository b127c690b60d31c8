"""Batch front end: validate nodes, evaluate frames, run LFTs, factorize
densities, verify the entropy inequality, and run hypothesis diagnostics.

Exit codes: 0 all checks pass, 2 a hypothesis/inequality/validation check
failed, 1 usage or parse error.  Complex numbers on the command line use the
``a+bi`` syntax; files use [re, im] pairs.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import backends, io
from .conformal import CircleGrid, MoebiusMap, extract_density
from .entropy import growth_diagnostics, smirnov_diagnostics, verify_inequality
from .errors import ConfigParse, SNodeLabError
from .frame import check_j_inequality, eval_frame, kernel_identity_residual
from .lft import (
    HerglotzEval,
    check_herglotz,
    check_pair,
    equality_pair,
    estimate_gamma_theta,
    eval_phi,
    identity_pair,
)
from .snode import spectrum_report, validate_node
from .specfact import outer_certificate, szego_check, wilson_factorize

EXIT_PASS = 0
EXIT_USAGE = 1
EXIT_FAIL = 2


def _complex_list(text):
    return [io.parse_complex(tok) for tok in str(text).split(",") if tok.strip()]


def _resolve_pair(spec_text, node, moebius):
    if spec_text is None:
        raise ConfigParse("this command needs --pair")
    if os.path.exists(spec_text):
        return io.load_pair(spec_text, moebius=moebius)
    if spec_text == "identity":
        return identity_pair(node.p)
    if spec_text.startswith("equality:"):
        lam = io.parse_complex(spec_text.split(":", 1)[1])
        return equality_pair(node, lam)
    raise ConfigParse(
        f"pair {spec_text!r}: not a file, 'identity', or 'equality:<z>'"
    )


def _common(sub):
    sub.add_argument("--node", required=True, help="node JSON file")
    sub.add_argument("--z0", default="i", help="Moebius map center (default i)")
    sub.add_argument("--grid", type=int, default=4096, help="circle grid size (power of two)")
    sub.add_argument("--out", default=None, help="report file (default: stdout)")
    sub.add_argument("--format", choices=("json", "csv"), default="json")


def build_parser():
    ap = argparse.ArgumentParser(prog="snodelab", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    for name, helptext in (
        ("validate", "node invariants and resolvent hypothesis classification"),
        ("frame", "frame samples and J-inequality checks at given points"),
        ("lft", "Herglotz transform values and representation estimates"),
        ("factorize", "density extraction, Szegő screen, outer factorization"),
        ("entropy", "entropy inequality verification"),
        ("diagnose", "Smirnov-class and resolvent-growth hypothesis diagnostics"),
    ):
        sp = sub.add_parser(name, help=helptext)
        _common(sp)
        if name in ("frame", "lft", "entropy"):
            sp.add_argument("--z", required=True, help="comma-separated points a+bi")
        if name in ("lft", "factorize", "entropy"):
            sp.add_argument("--pair", required=True,
                            help="pair JSON file, 'identity', or 'equality:<z>'")
        if name in ("validate", "diagnose"):
            sp.add_argument("--r0", type=float, default=0.5,
                            help="inner radius of the growth regions")
    return ap


def _cmd_validate(args, node, moebius, grid):
    report = validate_node(node)
    spec = spectrum_report(node, r0=args.r0)
    io.emit_report({"validation": report, "spectrum": spec}, args.out)
    return EXIT_PASS if report.passed else EXIT_FAIL


def _cmd_frame(args, node, moebius, grid):
    zs = _complex_list(args.z)
    samples, jreports, residuals = [], [], []
    ok = True
    for z in zs:
        s = eval_frame(node, z)
        samples.append(s)
        if not s.is_pole and z.imag != 0:
            jr = check_j_inequality(node, z)
            jreports.append(jr)
            ok &= jr.passed
            residuals.append({"z": z, "kernel_identity": kernel_identity_residual(node, z, z)})
    payload = {"samples": samples, "j_reports": jreports, "kernel_residuals": residuals}
    io.emit_report(payload, args.out)
    return EXIT_PASS if ok else EXIT_FAIL


def _cmd_lft(args, node, moebius, grid):
    zs = _complex_list(args.z)
    pair = _resolve_pair(args.pair, node, moebius)
    rng = np.random.default_rng(0)
    samples = rng.uniform(-2, 2, 40) + 1j * rng.uniform(0.1, 2.0, 40)
    pr = check_pair(pair, samples)
    h = HerglotzEval(node=node, pair=pair)
    values = {str(z): eval_phi(node, pair, z) for z in zs}
    hmin = check_herglotz(h, zs)
    gamma, theta = estimate_gamma_theta(h)
    payload = {
        "pair_report": pr,
        "phi": values,
        "herglotz_min": hmin,
        "gamma": gamma,
        "theta": theta,
    }
    io.emit_report(payload, args.out)
    return EXIT_PASS if (pr.passed and hmin >= -1e-10) else EXIT_FAIL


def _cmd_factorize(args, node, moebius, grid):
    pair = _resolve_pair(args.pair, node, moebius)
    h = HerglotzEval(node=node, pair=pair)
    density = extract_density(h, grid, moebius)
    szego = szego_check(density)
    if not szego.passed:
        io.emit_report({"szego": szego}, args.out)
        return EXIT_FAIL
    factor = wilson_factorize(density)
    cert = outer_certificate(factor)
    if args.format == "csv":
        io.emit_report(density, args.out, "csv")
    else:
        payload = {
            "szego": szego,
            "certificate": cert,
            "factor": {
                "p": factor.p,
                "N": grid.N,
                "z0": complex(moebius.z0),
                "zero_order": factor.zero_order,
                "recon_residual": factor.recon_residual,
                "iterations": factor.iterations,
                "coeffs": list(factor.coeffs),
            },
        }
        io.emit_report(payload, args.out)
    return EXIT_PASS if cert.passed else EXIT_FAIL


def _cmd_entropy(args, node, moebius, grid):
    zs = _complex_list(args.z)
    bad = [z for z in zs if z.imag <= 0]
    if bad:
        raise ConfigParse(f"entropy points must lie in the upper half-plane, got {bad}")
    pair = _resolve_pair(args.pair, node, moebius)
    run = verify_inequality(node, pair, zs, grid=grid, moebius=moebius)
    if args.format == "csv":
        io.emit_report(run.reports, args.out, "csv")
    else:
        payload = {
            "reports": run.reports,
            "szego": run.szego,
            "boundary_residual": run.boundary_residual,
            "hypothesis_warnings": list(run.hypothesis_warnings),
            "passed": run.passed,
        }
        io.emit_report(payload, args.out)
    return EXIT_PASS if run.passed else EXIT_FAIL


def _cmd_diagnose(args, node, moebius, grid):
    payload = {}
    ok = True
    try:
        sm = smirnov_diagnostics(node, moebius, grid=grid)
        payload["smirnov"] = sm
        ok &= sm.passed
    except SNodeLabError as exc:
        payload["smirnov"] = {"error": type(exc).__name__, "message": str(exc)}
        ok = False
    try:
        gr = growth_diagnostics(node, r0=args.r0)
        payload["growth"] = gr
        ok &= gr.passed
        if args.format == "csv":
            io.emit_report(gr, args.out, "csv")
            return EXIT_PASS if ok else EXIT_FAIL
    except SNodeLabError as exc:
        payload["growth"] = {"error": type(exc).__name__, "message": str(exc)}
        ok = False
    io.emit_report(payload, args.out)
    return EXIT_PASS if ok else EXIT_FAIL


_COMMANDS = {
    "validate": _cmd_validate,
    "frame": _cmd_frame,
    "lft": _cmd_lft,
    "factorize": _cmd_factorize,
    "entropy": _cmd_entropy,
    "diagnose": _cmd_diagnose,
}


def main(argv=None):
    threads = os.environ.get("SNODE_THREADS")
    if threads and backends.HAS_NUMBA:
        import numba

        numba.set_num_threads(max(1, int(threads)))

    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_PASS

    try:
        if not 256 <= args.grid <= 65536:
            raise ConfigParse(f"grid size must lie in [256, 65536], got {args.grid}")
        node = io.load_node(args.node)
        moebius = MoebiusMap(io.parse_complex(args.z0))
        grid = CircleGrid(args.grid)
    except (ConfigParse, OSError, ValueError, SNodeLabError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    try:
        return _COMMANDS[args.command](args, node, moebius, grid)
    except ConfigParse as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SNodeLabError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
