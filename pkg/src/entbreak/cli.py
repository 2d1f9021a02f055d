"""Command-line front end.

Exit codes: 0 success / valid certificate, 1 certificate failure or
counterexample, 2 usage or input error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import io, scenarios
from . import tolerances as tol
from .channels import phase_damping_family
from .exceptions import (
    CertificateFailure,
    EntbreakError,
    InvalidState,
    NoSignChange,
    NotConverged,
    UnknownStateRef,
)

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3

DEFAULTS = {
    "grid_points": 101,
    "seed": 42,
    "t": 1.0 / 3.0,
    "trials": 1000,
    "search_grid": 16,
    "count": 21,
    "format": None,
    "output": None,
    "tolerances": {},
}

FAMILIES = {"phase-damping": phase_damping_family}


class UsageError(EntbreakError):
    pass


# --------------------------------------------------------------------------
# configuration
# --------------------------------------------------------------------------


def _load_config(path):
    if path is None:
        return {}
    try:
        cfg = io.load_json(path)
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    if not isinstance(cfg, dict):
        raise UsageError("config file must hold a JSON object")
    unknown = set(cfg) - set(DEFAULTS)
    if unknown:
        raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
    return cfg


def _env_seed():
    raw = os.environ.get("ENTBREAK_SEED")
    if raw is None or raw == "":
        return None
    try:
        seed = int(raw)
    except ValueError:
        raise UsageError(f"ENTBREAK_SEED must be an integer, got {raw!r}") from None
    return seed


def resolve(args, key, flag=None):
    """CLI flag > config file > (env for seed) > default."""
    value = getattr(args, flag or key, None)
    if value is not None:
        return value
    if key in args.config_data:
        return args.config_data[key]
    if key == "seed":
        env = _env_seed()
        if env is not None:
            return env
    return DEFAULTS[key]


def _tolerance(args, name, default):
    return float(args.config_data.get("tolerances", {}).get(name, default))


def _check_seed(seed):
    seed = int(seed)
    if not 0 <= seed < 2**64:
        raise UsageError("seed must be an unsigned 64-bit integer")
    return seed


# --------------------------------------------------------------------------
# helpers
# --------------------------------------------------------------------------


def load_state(ref):
    """Built-in name, or a path to a state JSON file."""
    path = Path(ref)
    if ref.endswith(".json") or path.is_file():
        try:
            return io.state_from_json(io.load_json(path))
        except OSError as exc:
            raise UnknownStateRef(f"cannot read state file {ref}: {exc}") from None
    return scenarios.builtin_state(ref)


def _emit(args, text):
    out = args.output if args.output is not None else args.config_data.get("output")
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    return out


def _csv_text(header, rows):
    from io import StringIO

    buf = StringIO()
    io.write_csv(buf, header, rows)
    return buf.getvalue()


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------


def cmd_reproduce(args):
    if args.figure != "fig2":
        raise UsageError(f"unknown figure {args.figure!r}")
    t = float(resolve(args, "t"))
    grid = int(resolve(args, "grid_points", "grid"))
    if grid < 2:
        raise UsageError("--grid must be >= 2")
    data = scenarios.fig2_data(t, grid)
    header = ["lambda", "N_rho1_out", "N_rho2_out", "N_rho3_out"]
    rows = zip(data["lambda"], data["N_rho1_out"], data["N_rho2_out"], data["N_rho3_out"])
    out = _emit(args, _csv_text(header, rows))
    companion = {
        "command": "reproduce fig2",
        "seed": _check_seed(resolve(args, "seed")),
        "t": t,
        "grid_points": grid,
        "lambda_1": data["lambda_1"],
        "lambda_1_closed_form": data["lambda_1_closed_form"],
        "lambda_1_error": data["lambda_1_error"],
        "closed_form_residuals": data["closed_form_residuals"],
        "columns": header,
    }
    if out not in (None, "-"):
        io.write_json(Path(out).with_suffix(".json"), companion)
    return EXIT_OK


def cmd_solve(args):
    seed = _check_seed(resolve(args, "seed"))
    if args.target == "lambda-sep":
        if args.state is None:
            raise UsageError("solve lambda-sep needs --state")
        rho = load_state(args.state)
        family = FAMILIES[args.family]()
        try:
            res = scenarios.solve_lambda_sep(
                family, rho, threshold=_tolerance(args, "psd", tol.TOL_PSD),
                tol_root=_tolerance(args, "root", tol.TOL_ROOT))
        except NoSignChange as exc:
            report = {"target": "lambda-sep", "state": args.state, "family": args.family,
                      "seed": seed, "error": "NoSignChange", "message": str(exc),
                      "endpoints": [{"lambda": k, "min_pt_eigenvalue": v[0], "verdict": v[1]}
                                    for k, v in sorted(exc.endpoints.items())]}
            _emit(args, io.dumps(report))
            return EXIT_NUMERIC
        report = {"target": "lambda-sep", "state": args.state, "family": args.family, "seed": seed,
                  "value": res.value, "residual": res.residual, "iterations": res.iterations,
                  "bracket": list(res.bracket)}
    else:
        res = scenarios.solve_t_threshold(tol_root=_tolerance(args, "root", tol.TOL_ROOT))
        report = {"target": "t-threshold", "seed": seed, "value": res.value,
                  "residual": res.residual, "iterations": res.iterations,
                  "bracket": list(res.bracket), "g_rho2_in": scenarios.g_rho2_in()}
    _emit(args, io.dumps(report))
    return EXIT_OK


def _build_chain(steps):
    chain = []
    for i, step in enumerate(steps):
        kind = step.get("type")
        if kind == "local_unitary":
            chain.append(scenarios.LocalUnitaryStep(io.pairs_to_matrix(step["u"], what=f"chain[{i}].u"),
                                                    step.get("side", "A")))
        elif kind == "replace_with_00":
            chain.append(scenarios.ReplaceWith00Step(float(step["epsilon"])))
        elif kind == "local_filter":
            filt = io.channel_from_json(step["filter"])
            corr = tuple((io.pairs_to_matrix(a), io.pairs_to_matrix(b)) for a, b in step["corrections"])
            chain.append(scenarios.LocalFilterStep(filt, corr, step.get("side", "A")))
        else:
            raise UsageError(f"chain[{i}]: step type {kind!r} is not an allowed LOCC primitive")
    return chain


def _instance_state(obj):
    return load_state(obj) if isinstance(obj, str) else io.state_from_json(obj)


def cmd_certify(args):
    seed = _check_seed(resolve(args, "seed"))
    t = float(resolve(args, "t"))
    if args.kind == "seb":
        if args.instance:
            inst = io.load_json(args.instance)
            try:
                channel = io.channel_from_json(inst["channel"])
                w1 = _instance_state(inst["omega1"])
                w2 = _instance_state(inst["omega2"])
                chain = _build_chain(inst.get("chain", []))
            except KeyError as exc:
                raise UsageError(f"instance file missing key {exc}") from None
            window = None
            source = str(args.instance)
            side = inst.get("side", "A")
        else:
            lam = float(args.lam) if args.lam is not None else scenarios.LAMBDA_1
            channel, w1, w2, chain = scenarios.reference_instance(t, lam)
            window = scenarios.strict_window(t)
            source = "builtin"
            side = "A"
        cert = scenarios.certify_selective_breaking(channel, w1, w2, chain, side,
                                                    strict_window=window, raise_on_failure=False)
    else:
        count = int(resolve(args, "count"))
        if args.instance:
            inst = io.load_json(args.instance)
            channel = io.channel_from_json(inst["channel"])
            w1 = _instance_state(inst["omega1"])
            ts = [float(x) for x in inst["t_sequence"]]
            undo = io.pairs_to_matrix(inst["undo_unitary"]) if "undo_unitary" in inst else None
            source = str(args.instance)
        else:
            lam = float(args.lam) if args.lam is not None else scenarios.LAMBDA_1
            channel, w1 = scenarios.phase_damping(lam), scenarios.rho2_in()
            ts = scenarios.geometric_sequence(t, count)
            undo = None
            source = "builtin"
        cert = scenarios.certify_strong_selective_breaking(channel, w1, ts, undo, raise_on_failure=False)
    report = cert.to_dict()
    report.update({"seed": seed, "instance": source, "channel": io.channel_to_json(channel)})
    _emit(args, io.dumps(report))
    return EXIT_OK if cert.valid else EXIT_FAIL


def cmd_scan_nogo(args):
    trials = int(resolve(args, "trials"))
    if trials < 1:
        raise UsageError("--trials must be >= 1")
    seed = _check_seed(resolve(args, "seed"))
    report = scenarios.pure_state_nogo_scan(trials, seed)
    _emit(args, io.dumps(report))
    return EXIT_FAIL if report["counterexamples"] else EXIT_OK


def cmd_search(args):
    rho = load_state(args.state)
    family = FAMILIES[args.family]()
    n = int(resolve(args, "search_grid", "grid"))
    if n < 1:
        raise UsageError("--grid must be >= 1")
    records = scenarios.orbit_search(rho, family, n)
    fmt = resolve(args, "format") or "csv"
    if not records:
        print(f"note: NoSignChange for {args.state} under {args.family}; no records", file=sys.stderr)
    if fmt == "json":
        report = {
            "state": args.state, "family": args.family, "grid": n,
            "seed": _check_seed(resolve(args, "seed")),
            "lambda_sep_base": records[0].lambda_sep_base if records else None,
            "records": [{"index": r.seed, "theta": r.theta, "phi": r.phi, "psi": r.psi,
                         "lambda_sep": r.lambda_sep, "gap": r.gap, "candidate": r.candidate}
                        for r in records],
        }
        _emit(args, io.dumps(report))
    else:
        rows = ((r.theta, r.phi, r.psi, r.lambda_sep, r.gap) for r in records)
        _emit(args, _csv_text(["theta", "phi", "psi", "lambda_sep", "gap"], rows))
    return EXIT_OK


# --------------------------------------------------------------------------
# parser
# --------------------------------------------------------------------------


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file (flags override it)")
    common.add_argument("-o", "--output", help="output path ('-' for stdout)")
    common.add_argument("--seed", type=int, help="RNG seed (default: $ENTBREAK_SEED or 42)")

    p = argparse.ArgumentParser(prog="entbreak", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("reproduce", parents=[common], help="regenerate figure data as CSV")
    r.add_argument("figure", choices=["fig2"])
    r.add_argument("--t", type=float, help="mixing weight of the third curve (0 < t < 2/3)")
    r.add_argument("--grid", type=int, help="number of lambda grid points")
    r.set_defaults(func=cmd_reproduce)

    s = sub.add_parser("solve", parents=[common], help="critical constants")
    s.add_argument("target", choices=["lambda-sep", "t-threshold"])
    s.add_argument("--state", help="built-in state name or state JSON file")
    s.add_argument("--family", choices=sorted(FAMILIES), default="phase-damping")
    s.set_defaults(func=cmd_solve)

    c = sub.add_parser("certify", parents=[common], help="selective entanglement breaking certificates")
    c.add_argument("kind", choices=["seb", "strong-seb"])
    c.add_argument("--instance", help="instance JSON file (default: built-in two-qubit instance)")
    c.add_argument("--t", type=float, help="t of the comparison state (seb) or first t of the sequence")
    c.add_argument("--lambda", dest="lam", type=float, help="phase damping strength (default lambda_1)")
    c.add_argument("--count", type=int, help="number of sequence samples for strong-seb")
    c.set_defaults(func=cmd_certify)

    n = sub.add_parser("scan-nogo", parents=[common], help="random pure-state no-go check")
    n.add_argument("--trials", type=int)
    n.set_defaults(func=cmd_scan_nogo)

    q = sub.add_parser("search", parents=[common], help="unitary-orbit search for lambda_sep changes")
    q.add_argument("--state", required=True)
    q.add_argument("--family", choices=sorted(FAMILIES), default="phase-damping")
    q.add_argument("--grid", type=int, help="points per Euler angle (grid^3 unitaries)")
    q.add_argument("--format", choices=["csv", "json"])
    q.set_defaults(func=cmd_search)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.config_data = _load_config(args.config)
        return args.func(args)
    except UsageError as exc:
        print(f"entbreak: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CertificateFailure as exc:
        print(f"entbreak: certificate failed: {exc.piece}", file=sys.stderr)
        return EXIT_FAIL
    except (NoSignChange, NotConverged) as exc:
        print(f"entbreak: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (UnknownStateRef, InvalidState, ValueError, OSError) as exc:
        print(f"entbreak: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
