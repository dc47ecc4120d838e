"""Command-line entry point.

    resodyn [--config PATH] [--out PATH] [--threads N] SUBCOMMAND ...
    resodyn --describe-output [SUBCOMMAND]

CSV goes to ``--out`` (or stdout) with every number printed to 17 significant
digits.  When ``--out`` is given, a ``<out>.meta.json`` sidecar records the
resolved configuration, tolerances, dropped-remainder notes and the version.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .bath import bath_functions, delta_table
from .config import SweepSpec, RunConfig, load_config_dict, parse_model_config
from .dynamics import (DephasingPropagator, PerturbativePropagator, default_time_grid,
                       manifold_distance)
from .errors import ComputeError, ConfigError, ResodynError
from .resonances import effective_operator, perturbative_table, resonances_numeric, t_matrix
from .spin_boson import DROPPED_REMAINDERS, gamma_star, sweep_row

EXIT_CONFIG = 2
EXIT_COMPUTE = 3
EXIT_CHECK_FAILED = 1

COLUMNS = {
    "resonances": {
        "a": "first label of the resonance (0-based level index in the G basis)",
        "b": "second label of the resonance",
        "re_eps": "real part of the numerically computed resonance eps_ab",
        "im_eps": "imaginary part of eps_ab (a decay rate, >= 0)",
        "re_approx": "real part of the perturbative value (eta_ab off the diagonal, 2i(sigma^2/lambda^2) xi_a on it)",
        "im_approx": "imaginary part of the perturbative value",
        "re_lam2_delta": "real part of lambda^2 delta_ab, the sigma = 0 parent",
        "im_lam2_delta": "imaginary part of lambda^2 delta_ab",
    },
    "dynamics": {
        "t": "time",
        "re_rho_A_B": "real part of the tracked reduced density matrix entry (A, B) in the G basis",
        "im_rho_A_B": "imaginary part of the tracked entry (A, B)",
        "manifold_distance": "trace norm of the off-diagonal part of rho_t (distance to diagonal states)",
    },
    "spinboson": {
        "gamma": "sigma / lambda^2",
        "re_w3": "real part of w3", "im_w3": "imaginary part of w3",
        "re_w4": "real part of w4", "im_w4": "imaginary part of w4",
        "re_r": "real part of the eigenvector parameter r (NaN at the critical point)",
        "im_r": "imaginary part of r (NaN at the critical point)",
        "regime": "overlapping (gamma < gamma_star), critical, or isolated",
    },
    "sweep": {
        "<parameter>": "value of the swept parameter (sigma, lambda, gamma or beta)",
        "re_eps_A_B": "real part of the labelled resonance (A, B)",
        "im_eps_A_B": "imaginary part of the labelled resonance (A, B)",
        "status": "ok, or the error class when the point could not be computed (then values are NaN)",
    },
    "oracle-validate": {
        "passed": "JSON boolean: every check within tolerance",
        "checks[].name": "identifier of the cross-check",
        "checks[].max_error": "largest discrepancy found (relative where the check says so)",
        "checks[].tolerance": "acceptance threshold",
        "checks[].passed": "max_error <= tolerance",
        "checks[].seconds": "wall time of the check",
        "checks[].detail": "free-text context",
    },
}


def fmt(x):
    if isinstance(x, (str, bool)) or x is None:
        return str(x)
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def _write_csv(header, rows, out):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    text = buf.getvalue()
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _write_meta(out, mode, model, extra):
    if out is None:
        return
    meta = {
        "software": "resodyn",
        "version": __version__,
        "subcommand": mode,
        "config": model.raw,
        "tolerances": {"quadrature": model.raw.get("quadrature", {}), "collision": 1e-12},
    }
    meta.update(extra)
    Path(str(out) + ".meta.json").write_text(json.dumps(meta, indent=2, sort_keys=True, default=str))


def resolve_threads(flag):
    if flag is not None:
        n = flag
    else:
        env = os.environ.get("RESODYN_THREADS")
        try:
            n = int(env) if env else 1
        except ValueError:
            raise ConfigError("RESODYN_THREADS", f"expected an integer, got {env!r}") from None
    if n < 1:
        raise ConfigError("threads", "must be >= 1")
    return n


def _pmap(fn, items, threads):
    if threads == 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


# ------------------------------------------------------------------ commands

def cmd_resonances(model, run):
    bf = bath_functions(model.form_factor, model.bath, model.quadrature)
    spec, cp = model.spec, model.coupling
    spectrum = resonances_numeric(effective_operator(spec, bf, cp))
    tm = t_matrix(spec, bf)
    try:
        approx = perturbative_table(spec, bf, cp, tm)
        note = ""
    except ResodynError as exc:
        approx = np.full(spec.dim ** 2, np.nan + 1j * np.nan)
        note = f"perturbative values unavailable: {exc}"
    d = (cp.lam ** 2 * delta_table(spec, bf)).ravel()
    rows = []
    for i, (a, b) in enumerate(spectrum.labels):
        e = spectrum.eigenvalues[i]
        rows.append([a, b, e.real, e.imag, approx[i].real, approx[i].imag, d[i].real, d[i].imag])
    _write_csv(list(COLUMNS["resonances"]), rows, run.output_path)
    _write_meta(run.output_path, "resonances", model, {
        "xi0": bf.xi0, "inner_1_over_k": bf.inner_1_over_k, "t_spectrum": tm.xi.tolist(),
        "dropped_remainders": "effective operator truncated at sigma L_S + lambda^2 diag(delta); "
                              "perturbative values carry O(sigma^3) and O(sigma^2/|lambda|) errors",
        "note": note})
    return 0


def cmd_dynamics(model, run):
    bf = bath_functions(model.form_factor, model.bath, model.quadrature)
    spec, cp = model.spec, model.coupling
    if model.rho0 is None:
        raise ConfigError("dynamics.rho0", "missing")
    rho0 = model.rho0
    n = spec.dim
    elements = model.elements or [(a, b) for a in range(n) for b in range(a, n)]
    spectrum = resonances_numeric(effective_operator(spec, bf, cp))
    if model.t_max is not None:
        ts = np.concatenate([[0.0], np.geomspace(model.t_max * 1e-3, model.t_max, model.points - 1)])
    else:
        ts = default_time_grid(spectrum, model.points)
    if cp.sigma == 0:
        prop = DephasingPropagator(spec, bf, cp.lam)
        gam = _pmap(lambda t: (float(bf.gamma(t)), float(bf.s(t))), ts, run.threads)
        states = [prop.evolve(rho0, t, gs) for t, gs in zip(ts, gam)]
        method = "exact dephasing (sigma = 0)"
    else:
        prop = PerturbativePropagator(spec, spectrum, t_matrix(spec, bf), cp)
        states = [prop.evolve(rho0, t) for t in ts]
        method = "leading-order resonance expansion"
    header = ["t"]
    for a, b in elements:
        header += [f"re_rho_{a}_{b}", f"im_rho_{a}_{b}"]
    header.append("manifold_distance")
    rows = []
    for t, st in zip(ts, states):
        row = [t]
        for a, b in elements:
            row += [st[a, b].real, st[a, b].imag]
        row.append(manifold_distance(st))
        rows.append(row)
    _write_csv(header, rows, run.output_path)
    _write_meta(run.output_path, "dynamics", model, {
        "method": method,
        "dropped_remainders": "" if cp.sigma == 0 else "O(lambda) + O_lambda(sigma) terms dropped; "
                                                       "output need not be positive"})
    return 0


def cmd_spinboson(model, run):
    lam = model.coupling.lam
    if model.xi0 is not None:
        xi0 = model.xi0
    else:
        xi0 = bath_functions(model.form_factor, model.bath, model.quadrature).xi0
        if xi0 <= 0:
            raise ConfigError("bath.form_factor.p", "spin-boson analytics need xi0 > 0 (p = -1/2)")
    gammas = run.sweep.values() if run.sweep is not None else [model.coupling.gamma]
    rows = _pmap(lambda g: sweep_row(float(g), lam, xi0), list(gammas), run.threads)
    header = list(COLUMNS["spinboson"])
    _write_csv(header, [[r[k] for k in header] for r in rows], run.output_path)
    _write_meta(run.output_path, "spinboson", model, {
        "xi0": xi0, "lambda": lam, "gamma_star": gamma_star(xi0),
        "dropped_remainders": DROPPED_REMAINDERS})
    return 0


def _sweep_point(model, bf_cache, param, value):
    from .model import BathParams

    spec, cp = model.spec, model.coupling
    bath = model.bath
    if param == "sigma":
        cp = cp.replace(sigma=value)
    elif param == "lambda":
        cp = cp.replace(lam=value)
    elif param == "gamma":
        cp = cp.replace(sigma=value * cp.lam ** 2)
    elif param == "beta":
        bath = BathParams(value)
    try:
        bf = bf_cache if param != "beta" else bath_functions(model.form_factor, bath, model.quadrature)
        return resonances_numeric(effective_operator(spec, bf, cp)).eigenvalues, "ok"
    except ResodynError as exc:
        return np.full(spec.dim ** 2, np.nan + 1j * np.nan), type(exc).__name__


def cmd_sweep(model, run):
    sweep = run.sweep or model.sweep
    if sweep is None:
        raise ConfigError("sweep", "missing: give a sweep section or 'sweep PARAM MIN..MAX SCALE POINTS'")
    bf = None
    if sweep.parameter != "beta":
        bf = bath_functions(model.form_factor, model.bath, model.quadrature)
    values = [float(v) for v in sweep.values()]
    results = _pmap(lambda v: _sweep_point(model, bf, sweep.parameter, v), values, run.threads)
    n = model.spec.dim
    header = [sweep.parameter]
    for a in range(n):
        for b in range(n):
            header += [f"re_eps_{a}_{b}", f"im_eps_{a}_{b}"]
    header.append("status")
    rows = []
    for v, (eps, status) in zip(values, results):
        row = [v]
        for e in eps:
            row += [e.real, e.imag]
        rows.append(row + [status])
    _write_csv(header, rows, run.output_path)
    _write_meta(run.output_path, "sweep", model, {
        "sweep": {"parameter": sweep.parameter, "min": sweep.min, "max": sweep.max,
                  "points": sweep.points, "scale": sweep.scale},
        "dropped_remainders": "effective operator truncated at sigma L_S + lambda^2 diag(delta)"})
    return 0


def cmd_oracle_validate(model, run):
    from .validation import validate_all

    report = validate_all(model)
    report["version"] = __version__
    text = json.dumps(report, indent=2)
    if run.output_path is None:
        sys.stdout.write(text + "\n")
    else:
        Path(run.output_path).write_text(text + "\n")
    return 0 if report["passed"] else EXIT_CHECK_FAILED


COMMANDS = {
    "resonances": cmd_resonances,
    "dynamics": cmd_dynamics,
    "spinboson": cmd_spinboson,
    "sweep": cmd_sweep,
    "oracle-validate": cmd_oracle_validate,
}


def describe(mode=None):
    modes = [mode] if mode else list(COLUMNS)
    lines = []
    for m in modes:
        lines.append(f"[{m}]")
        for col, doc in COLUMNS[m].items():
            lines.append(f"  {col}: {doc}")
    return "\n".join(lines) + "\n"


def build_parser():
    p = argparse.ArgumentParser(prog="resodyn", description="Resonances and reduced dynamics "
                                "of an N-level system coupled to a thermal boson bath.")
    p.add_argument("--config", type=Path, help="YAML or JSON run configuration")
    p.add_argument("--out", type=Path, help="output file (default: stdout)")
    p.add_argument("--threads", type=int, help="worker threads (default: $RESODYN_THREADS or 1)")
    p.add_argument("--describe-output", action="store_true",
                   help="document the output columns of a subcommand and exit")
    p.add_argument("--version", action="version", version=f"resodyn {__version__}")
    sub = p.add_subparsers(dest="mode")
    sub.add_parser("resonances", help="labelled resonances with perturbative comparisons")
    sub.add_parser("dynamics", help="reduced density matrix trace")
    sb = sub.add_parser("spinboson", help="closed-form spin-boson eigenvalues, optionally swept")
    sb.add_argument("action", nargs="?", choices=["sweep"])
    sb.add_argument("words", nargs="*", metavar="gamma MIN..MAX SCALE POINTS")
    sw = sub.add_parser("sweep", help="resonance spectrum along a parameter sweep")
    sw.add_argument("words", nargs="*", metavar="PARAM MIN..MAX SCALE POINTS")
    sub.add_parser("oracle-validate", help="run the brute-force cross-check suite (JSON report)")
    orc = sub.add_parser("oracle", help="same as oracle-validate when followed by 'validate'")
    orc.add_argument("action", choices=["validate"])
    return p


def _sweep_from_words(words, key, allowed):
    if not words:
        return None
    if len(words) != 4:
        raise ConfigError(f"{key}.range", "expected PARAM MIN..MAX SCALE POINTS")
    param, rng, scale, points = words
    if param not in allowed:
        raise ConfigError(f"{key}.parameter", f"must be one of {allowed}, got {param!r}")
    return SweepSpec.parse(param, rng, scale, points, key=key)


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.mode == "oracle":
        args.mode = "oracle-validate"
    if args.describe_output:
        sys.stdout.write(describe(args.mode))
        return 0
    if args.mode is None:
        parser.print_usage(sys.stderr)
        return EXIT_CONFIG
    try:
        sweep = None
        if args.mode == "spinboson":
            if args.action == "sweep" and not args.words:
                raise ConfigError("spinboson.range", "expected gamma MIN..MAX SCALE POINTS")
            sweep = _sweep_from_words(args.words, "spinboson", ("gamma",))
        elif args.mode == "sweep":
            from .config import SWEEP_PARAMETERS
            sweep = _sweep_from_words(args.words, "sweep", SWEEP_PARAMETERS)
        run = RunConfig(mode=args.mode, input_path=args.config, output_path=args.out,
                        sweep=sweep, threads=resolve_threads(args.threads))
        model = parse_model_config(load_config_dict(args.config))
    except ConfigError as exc:
        print(f"resodyn: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return COMMANDS[args.mode](model, run)
    except ConfigError as exc:
        print(f"resodyn: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ResodynError as exc:
        err = ComputeError(f"{args.mode} failed: {type(exc).__name__}: {exc}")
        print(f"resodyn: {err}", file=sys.stderr)
        return EXIT_COMPUTE


if __name__ == "__main__":
    sys.exit(main())
