"""Command-line entry point: ``conrec <subcommand> [flags]``.

Exit codes: 0 success, 1 runtime failure, 2 configuration error.
"""

import argparse
import json
import logging
import math
import os
import sys

from . import bounds
from .errors import ConfigError, ConrecError
from .harness import (
    config_from_mapping,
    demo_1d,
    radial_checks,
    run_coverage_sweep,
    run_mse_sweep,
    write_csv,
)
from .sphere import gamma_ratio_constant

log = logging.getLogger("conrec")


def _int_list(s):
    return [int(v) for v in s.replace(" ", "").split(",") if v]


def _float_list(s):
    return [float(v) for v in s.replace(" ", "").split(",") if v]


def _common(p):
    p.add_argument("--config", help="JSON file with flag values (flags given here override it)")
    p.add_argument("--seed", type=int, help="master seed (default: $RECON_SEED or 0)")
    p.add_argument("--out", help="output CSV path (default: stdout)")
    p.add_argument("--workers", type=int, help="worker processes")
    p.add_argument("--delta", type=float, help="noise bound")
    p.add_argument("--d", type=int, help="dimension")


def build_parser():
    ap = argparse.ArgumentParser(prog="conrec", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("mse-sweep", help="worst-case and estimator MSE versus N")
    _common(p)
    p.add_argument("--n-list", type=_int_list)
    p.add_argument("--trials", type=int)
    p.add_argument("--law", help="uniform | cap:THETA0 | file:PATH")
    p.add_argument("--estimators", type=lambda s: tuple(s.split(",")))
    p.add_argument("--enum-cap", type=int)

    p = sub.add_parser("coverage", help="non-coverage probability of random caps")
    _common(p)
    p.add_argument("--n-list", type=_int_list)
    p.add_argument("--trials", type=int)
    p.add_argument("--theta", type=_float_list, help="comma-separated cap radii")
    p.add_argument("--net-eps", type=float)

    p = sub.add_parser("bounds", help="print every closed-form quantity for (d, N, delta)")
    _common(p)
    p.add_argument("--n", type=int)

    p = sub.add_parser("demo-1d", help="one-dimensional exact MSE check")
    _common(p)
    p.add_argument("--n", type=int)
    p.add_argument("--trials", type=int)

    p = sub.add_parser("radial", help="survival curve of the radial extent")
    _common(p)
    p.add_argument("--n", type=int)
    p.add_argument("--trials", type=int)
    return ap


_DEFAULTS = {
    "mse-sweep": {"d": 3, "n_list": [16, 24, 32], "trials": 1000, "delta": 1.0, "law": "uniform",
                  "workers": 1, "out": None, "estimators": None, "enum_cap": None},
    "coverage": {"d": 2, "n_list": [5], "trials": 10000, "theta": [math.pi / 2], "net_eps": 0.05,
                 "delta": None, "workers": 1, "out": None},
    "bounds": {"d": 3, "n": 100, "delta": 1.0, "workers": 1, "out": None},
    "demo-1d": {"n": 10, "trials": 200000, "delta": 1.0, "d": 1, "workers": 1, "out": None},
    "radial": {"d": 3, "n": 15, "trials": 100000, "delta": 1.0, "workers": 1, "out": None},
}


def resolve(args):
    """Merge defaults, the JSON config file and explicit flags (in that order)."""
    cmd = args.command
    opts = dict(_DEFAULTS[cmd])
    opts["seed"] = None
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                doc = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError("config", str(exc)) from None
        if not isinstance(doc, dict):
            raise ConfigError("config", "must be a flat JSON object")
        for k, v in doc.items():
            key = k.replace("-", "_")
            if key not in opts:
                raise ConfigError(k, f"unknown key for {cmd}")
            opts[key] = v
    for k in list(opts):
        v = getattr(args, k, None)
        if v is not None:
            opts[k] = v
    if opts["seed"] is None:
        env = os.environ.get("RECON_SEED")
        try:
            opts["seed"] = int(env) if env else 0
        except ValueError:
            raise ConfigError("seed", f"RECON_SEED={env!r} is not an integer") from None
    return opts


def _open_out(path):
    if path is None:
        return sys.stdout, False
    return open(path, "w", encoding="utf-8", newline="\n"), True


def cmd_mse_sweep(o):
    mapping = {k: o[k] for k in ("d", "n_list", "trials", "delta", "law", "seed", "workers", "out")}
    if o.get("estimators"):
        mapping["estimators"] = tuple(o["estimators"])
    if o.get("enum_cap"):
        mapping["enum_cap"] = o["enum_cap"]
    cfg = config_from_mapping(mapping).validate()
    rows = run_mse_sweep(cfg)
    fh, close = _open_out(cfg.out)
    try:
        write_csv(rows, fh, cfg.to_json())
    finally:
        if close:
            fh.close()
    if all(r.skipped for r in rows):
        log.error("every row exceeded the vertex-enumeration cap")
        return 1
    return 0


def cmd_coverage(o):
    for key in ("d", "trials"):
        if not isinstance(o[key], int) or o[key] < 1:
            raise ConfigError(key, f"must be a positive integer, got {o[key]!r}")
    if o["d"] < 2:
        raise ConfigError("d", "coverage needs d >= 2")
    if not o["net_eps"] > 0:
        raise ConfigError("net_eps", "must be positive")
    thetas = o["theta"] if isinstance(o["theta"], list) else [o["theta"]]
    for th in thetas:
        if not 0.0 < th <= math.pi / 2:
            raise ConfigError("theta", f"each radius must lie in (0, pi/2], got {th!r}")
    rows = run_coverage_sweep(o["d"], thetas, o["n_list"], o["trials"], o["net_eps"], o["seed"])
    cfg = json.dumps({"command": "coverage", "d": o["d"], "theta": thetas, "n_list": o["n_list"],
                      "trials": o["trials"], "net_eps": o["net_eps"], "seed": o["seed"]},
                     sort_keys=True, separators=(",", ":"))
    fh, close = _open_out(o["out"])
    try:
        write_csv(rows, fh, cfg)
    finally:
        if close:
            fh.close()
    return 0


def bounds_table(d, N, delta):
    """Rows ``(name, value)`` of every closed-form quantity that is defined at (d, N, delta)."""
    rows = [("d", d), ("N", N), ("delta", delta)]

    def add(name, fn):
        try:
            rows.append((name, fn()))
        except ConrecError as exc:
            rows.append((name, f"n/a ({exc})"))

    if d == 1:
        add("1d endpoint MSE 8d^2/((N+1)(N+2))", lambda: bounds.one_dim_mse_exact(N, delta)[0])
        add("1d worst MSE 14d^2/((N+1)(N+2))", lambda: bounds.one_dim_mse_exact(N, delta)[1])
        return rows
    add("C_d", lambda: gamma_ratio_constant(d))
    add("radial MSE leading term", lambda: bounds.theorem_radial_mse(N, d, delta).leading)
    add("radial MSE interval low", lambda: bounds.theorem_radial_mse(N, d, delta).lower)
    add("radial MSE interval high", lambda: bounds.theorem_radial_mse(N, d, delta).upper)
    add("general radial lower bound 8d^2/((N+1)(N+2))", lambda: bounds.general_radial_lower_bound(N, delta))
    add("lower-limit constant lim N^2 E|R_N|^2", lambda: bounds.mse_lower_limit(d, delta))
    add("weak lower-limit constant pi d^2 (d-1)", lambda: bounds.mse_lower_limit_weak(d, delta))
    add("lower limit / N^2", lambda: bounds.mse_lower_limit(d, delta) / N ** 2)
    add("uniform upper bound leading term", lambda: bounds.mse_upper_uniform_terms(N, d, delta)[0])
    add("uniform upper bound tail term", lambda: bounds.mse_upper_uniform_terms(N, d, delta)[1])
    add("uniform upper bound", lambda: bounds.mse_upper_uniform(N, d, delta))
    add("admissibility alpha (uniform)", lambda: bounds.uniform_admissibility(d).alpha)
    add("general upper bound (uniform params)",
        lambda: bounds.mse_upper_general(N, d, delta, bounds.uniform_admissibility(d)))
    add("radial survival at lambda=delta", lambda: bounds.radial_survival(delta, N, d, delta))
    add("linear tight-frame floor d^2 sigma^2/N", lambda: d * d * delta * delta / 3.0 / N)
    add("BCL hemisphere term", lambda: bounds.bcl_hemisphere_term(N, d))
    add("BCL bound at theta=arccos(1/sqrt d)",
        lambda: bounds.bcl_noncoverage_bound(N, d, math.acos(1 / math.sqrt(d))))
    add("simple non-coverage bound", lambda: bounds.simple_noncoverage_bound(N, d))
    return rows


def cmd_bounds(o):
    d, N, delta = o["d"], o["n"], o["delta"]
    if not isinstance(d, int) or d < 1:
        raise ConfigError("d", f"must be a positive integer, got {d!r}")
    if not isinstance(N, int) or N < 1:
        raise ConfigError("n", f"must be a positive integer, got {N!r}")
    if not delta > 0:
        raise ConfigError("delta", "must be positive")
    fh, close = _open_out(o["out"])
    try:
        for name, val in bounds_table(d, N, delta):
            text = format(val, ".10g") if isinstance(val, float) else str(val)
            fh.write(f"{name:<48s} {text}\n")
    finally:
        if close:
            fh.close()
    return 0


def _print_checks(checks, out):
    for c in checks:
        out.write(c.line() + "\n")
    return 0 if all(c.passed for c in checks) else 1


def cmd_demo_1d(o):
    if not isinstance(o["n"], int) or o["n"] < 1:
        raise ConfigError("n", "must be a positive integer")
    if not isinstance(o["trials"], int) or o["trials"] < 2:
        raise ConfigError("trials", "must be an integer >= 2")
    checks = demo_1d(o["n"], o["trials"], o["delta"], o["seed"])
    return _print_checks(checks, sys.stdout)


def cmd_radial(o):
    if not isinstance(o["d"], int) or o["d"] < 2:
        raise ConfigError("d", "radial check needs d >= 2")
    if not isinstance(o["n"], int) or o["n"] < 1:
        raise ConfigError("n", "must be a positive integer")
    if not isinstance(o["trials"], int) or o["trials"] < 2:
        raise ConfigError("trials", "must be an integer >= 2")
    checks = radial_checks(o["d"], o["n"], o["trials"], o["delta"], o["seed"])
    return _print_checks(checks, sys.stdout)


COMMANDS = {
    "mse-sweep": cmd_mse_sweep,
    "coverage": cmd_coverage,
    "bounds": cmd_bounds,
    "demo-1d": cmd_demo_1d,
    "radial": cmd_radial,
}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        opts = resolve(args)
        return COMMANDS[args.command](opts)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (ConrecError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
