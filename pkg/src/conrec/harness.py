"""Seeded Monte-Carlo sweeps, CSV output and power-law fitting.

Randomness for trial ``t`` of row ``r`` always comes from ``stream(seed, r, t)``
(or, for the vectorised law checks, from fixed-size blocks keyed by
``(seed, r, block)``), so output depends only on the configuration and seed,
never on the number of workers.
"""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
import json
import logging
import math

import numpy as np

from . import bounds
from .coverage import coverage_noncover_mc
from .errors import ConfigError, DomainError, RankDeficiencyError
from .estimators import (
    ENUMERATION_CAP,
    canonical_dual,
    consistent_estimate,
    consistent_estimate_batch,
    linear_estimate,
    linear_estimate_batch,
    rg_estimate,
    worst_case_error_exact,
)
from .measurement import (
    UniformCap,
    UniformSphere,
    draw_instance,
    error_polytope,
    load_direction_file,
    radial_extent,
    radial_extent_batch,
)
from .rng import block_ranges, stream
from .sphere import sample_uniform_direction, sample_uniform_directions

log = logging.getLogger(__name__)

ESTIMATORS = ("consistent", "rg", "linear")
CERT_TOL = 1e-9


# ---------------------------------------------------------------------------
# configuration


def parse_law(text, d):
    """``uniform`` | ``cap:THETA0`` | ``file:PATH`` -> direction law."""
    if text == "uniform":
        return UniformSphere()
    if text.startswith("cap:"):
        try:
            theta0 = float(text[4:])
        except ValueError:
            raise ConfigError("law", f"cannot parse cap radius in {text!r}") from None
        center = np.zeros(d)
        center[0] = 1.0
        return UniformCap(center, theta0)
    if text.startswith("file:"):
        return load_direction_file(text[5:])
    raise ConfigError("law", f"unknown direction law {text!r}")


@dataclass
class SweepConfig:
    d: int
    n_list: list
    trials: int = 1000
    delta: float = 1.0
    law: str = "uniform"
    seed: int = 0
    estimators: tuple = ESTIMATORS
    enum_cap: int = ENUMERATION_CAP
    out: str = None
    workers: int = 1
    signal_norm: float = 1.0

    def validate(self):
        if not isinstance(self.d, int) or self.d < 1:
            raise ConfigError("d", f"must be a positive integer, got {self.d!r}")
        ns = list(self.n_list)
        if not ns:
            raise ConfigError("n_list", "must not be empty")
        if any(b <= a for a, b in zip(ns, ns[1:])):
            raise ConfigError("n_list", f"must be strictly increasing, got {ns}")
        if ns[0] < self.d:
            raise ConfigError("n_list", f"every N must be >= d={self.d}, got {ns[0]}")
        if not isinstance(self.trials, int) or self.trials < 100:
            raise ConfigError("trials", f"must be an integer >= 100, got {self.trials!r}")
        if not self.delta > 0:
            raise ConfigError("delta", f"must be positive, got {self.delta!r}")
        bad = set(self.estimators) - set(ESTIMATORS)
        if bad:
            raise ConfigError("estimators", f"unknown estimators {sorted(bad)}")
        if self.workers < 1:
            raise ConfigError("workers", f"must be >= 1, got {self.workers!r}")
        if not 0 <= int(self.seed) < 2 ** 64:
            raise ConfigError("seed", "must fit in 64 bits")
        self.law_object()
        return self

    def law_object(self):
        return parse_law(self.law, self.d)

    def to_json(self):
        """Configuration that determines the results (worker count and output path excluded)."""
        doc = asdict(self)
        del doc["workers"], doc["out"]
        doc["n_list"] = list(self.n_list)
        doc["estimators"] = list(self.estimators)
        return json.dumps(doc, sort_keys=True, separators=(",", ":"))


# ---------------------------------------------------------------------------
# MSE sweep


@dataclass
class SweepRow:
    d: int
    N: int
    trials: int
    W2_mean: float = math.nan
    W2_se: float = math.nan
    R2_mean: float = math.nan
    R2_se: float = math.nan
    mse_consistent: float = math.nan
    mse_consistent_se: float = math.nan
    mse_rg: float = math.nan
    mse_rg_se: float = math.nan
    mse_linear: float = math.nan
    mse_linear_se: float = math.nan
    consistent_failures: int = 0
    signal_infeasible: int = 0
    dominance_violations: int = 0
    radial_leading: float = math.nan
    radial_low: float = math.nan
    radial_high: float = math.nan
    upper_uniform: float = math.nan
    upper_general: float = math.nan
    lower_limit_over_N2: float = math.nan
    linear_floor: float = math.nan
    one_dim_endpoint: float = math.nan
    one_dim_worst: float = math.nan
    seed: int = 0
    skipped: str = ""


def theory_columns(d, N, delta, law):
    """Closed-form columns of a sweep row; a pure function of (d, N, delta, law)."""
    cols = {"linear_floor": d * d * (delta * delta / 3.0) / N}
    if d == 1:
        cols["one_dim_endpoint"], cols["one_dim_worst"] = bounds.one_dim_mse_exact(N, delta)
        return cols
    uniform = isinstance(law, UniformSphere)
    if uniform:
        if N >= 3:
            rad = bounds.theorem_radial_mse(N, d, delta)
            cols["radial_leading"] = rad.leading
            cols["radial_low"] = rad.lower
            cols["radial_high"] = rad.upper
        cols["lower_limit_over_N2"] = bounds.mse_lower_limit(d, delta) / N ** 2
        if N >= d + 2:
            cols["upper_uniform"] = bounds.mse_upper_uniform(N, d, delta)
        params = bounds.uniform_admissibility(d)
    elif isinstance(law, UniformCap):
        params = bounds.cap_law_admissibility(d, law.theta0)
    else:
        params = None
    if params is not None and N >= (d + 2) / params.s:
        cols["upper_general"] = bounds.mse_upper_general(N, d, delta, params)
    return cols


def _mean_se(a):
    a = np.asarray(a, dtype=float)
    if a.size == 0:
        return math.nan, math.nan
    se = float(a.std(ddof=1) / math.sqrt(a.size)) if a.size > 1 else math.nan
    return float(a.mean()), se


def _run_trial(cfg, law, row, N, t):
    rng = stream(cfg.seed, row, t)
    d = cfg.d
    x = cfg.signal_norm * sample_uniform_direction(d, rng)
    inst = draw_instance(x, N, cfg.delta, law, rng)
    slabs = error_polytope(inst)
    psi = np.zeros(d)
    psi[0] = 1.0
    out = {"R2": radial_extent(slabs, psi) ** 2,
           "W2": worst_case_error_exact(slabs, cap=cfg.enum_cap).value ** 2}
    out["signal_ok"] = bool(np.all(np.abs(inst.phi @ inst.signal - inst.values) <= inst.delta))
    try:
        dual = canonical_dual(inst.phi)
    except RankDeficiencyError:
        dual = None
    if "linear" in cfg.estimators and dual is not None:
        out["linear"] = float(np.sum((linear_estimate(inst, dual) - x) ** 2))
    if "consistent" in cfg.estimators:
        x0 = linear_estimate(inst, dual) if dual is not None else np.zeros(d)
        rep = consistent_estimate(inst, x0=x0, tol=CERT_TOL)
        err = float(np.linalg.norm(rep.estimate - x))
        out["consistent"] = err ** 2
        out["consistent_ok"] = rep.consistent
        out["dominated"] = err <= math.sqrt(out["W2"]) + 1e-7
    if "rg" in cfg.estimators:
        out["rg"] = float(np.sum((rg_estimate(inst, np.zeros(d)).estimate - x) ** 2))
    return out


def _run_block(args):
    cfg, row, N, start, stop = args
    law = cfg.law_object()
    return [_run_trial(cfg, law, row, N, t) for t in range(start, stop)]


SWEEP_BLOCK = 50


def run_mse_sweep(config, on_row=None):
    """Run every (N, trial) of ``config``; return one ``SweepRow`` per N.

    Rows whose vertex enumeration would exceed ``config.enum_cap`` are
    returned with ``skipped`` set and no empirical columns.
    """
    cfg = config.validate()
    law = cfg.law_object()
    tasks = []
    rows = []
    for row, N in enumerate(cfg.n_list):
        r = SweepRow(cfg.d, N, cfg.trials, seed=int(cfg.seed))
        for k, v in theory_columns(cfg.d, N, cfg.delta, law).items():
            setattr(r, k, v)
        if cfg.d > 8 or math.comb(2 * N, cfg.d) > cfg.enum_cap:
            r.skipped = "capacity"
            log.warning("row N=%d skipped: C(2N, d) exceeds the enumeration cap", N)
        else:
            tasks.extend((cfg, row, N, a, b) for _, a, b in block_ranges(cfg.trials, SWEEP_BLOCK))
        rows.append(r)
    if cfg.workers == 1 or len(tasks) <= 1:
        results = [_run_block(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=cfg.workers) as ex:
            results = list(ex.map(_run_block, tasks, chunksize=1))
    per_row = {}
    for (_, row, _, _, _), res in zip(tasks, results):
        per_row.setdefault(row, []).extend(res)
    for row, trials in per_row.items():
        _fill_row(rows[row], trials)
    if on_row:
        for r in rows:
            on_row(r)
    return rows


def _fill_row(r, trials):
    col = lambda k: [t[k] for t in trials if k in t]  # noqa: E731
    r.W2_mean, r.W2_se = _mean_se(col("W2"))
    r.R2_mean, r.R2_se = _mean_se(col("R2"))
    for name in ESTIMATORS:
        vals = col(name)
        if vals:
            m, se = _mean_se(vals)
            setattr(r, f"mse_{name}", m)
            setattr(r, f"mse_{name}_se", se)
    r.consistent_failures = sum(1 for ok in col("consistent_ok") if not ok)
    r.signal_infeasible = sum(1 for ok in col("signal_ok") if not ok)
    r.dominance_violations = sum(1 for ok in col("dominated") if not ok)


# ---------------------------------------------------------------------------
# CSV


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def write_csv(rows, fh, config_json):
    """Write ``# config: {...}``, a header and one line per row (LF endings)."""
    fh.write(f"# config: {config_json}\n")
    if not rows:
        return
    recs = [asdict(r) if not isinstance(r, dict) else r for r in rows]
    keys = list(recs[0].keys())
    fh.write(",".join(keys) + "\n")
    for rec in recs:
        fh.write(",".join(_fmt(rec[k]) for k in keys) + "\n")


def read_csv(path):
    """Parse a CSV written by ``write_csv``; returns ``(config_dict, rows)``."""
    with open(path, encoding="utf-8") as fh:
        first = fh.readline()
        cfg = json.loads(first.split(":", 1)[1])
        header = fh.readline().strip().split(",")
        rows = [dict(zip(header, line.rstrip("\n").split(","))) for line in fh if line.strip()]
    return cfg, rows


# ---------------------------------------------------------------------------
# coverage sweep


def run_coverage_sweep(d, theta_list, n_list, trials, net_eps=0.05, seed=0):
    rows = []
    row = 0
    for theta in theta_list:
        if not 0.0 < theta <= 0.5 * math.pi:
            raise DomainError(f"theta must lie in (0, pi/2], got {theta!r}")
        for N in n_list:
            est = coverage_noncover_mc(N, d, theta, trials, net_eps=net_eps, seed=seed, row=row)
            rec = {
                "d": d, "N": N, "theta": theta, "trials": trials,
                "noncover_count": est.noncover_count, "cover_count": est.cover_count,
                "indeterminate_count": est.indeterminate_count,
                "estimate": est.point_estimate, "std_error": est.std_error,
                "upper_estimate": est.upper_estimate,
                "bcl_bound": math.nan, "simple_bound": math.nan, "seed": seed,
            }
            if theta < 0.5 * math.pi and N >= d:
                rec["bcl_bound"] = bounds.bcl_noncoverage_bound(N, d, theta)
            if theta >= math.acos(1.0 / math.sqrt(d)) and theta < 0.5 * math.pi and N >= bounds.PBOUND_SLOPE * d:
                rec["simple_bound"] = bounds.simple_noncoverage_bound(N, d)
            rows.append(rec)
            row += 1
    return rows


# ---------------------------------------------------------------------------
# fitting


def fit_power_law(points):
    """Least-squares line through ``(ln N, ln mse)``; returns ``(slope, intercept, ssr)``."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[0] < 3:
        raise ValueError("need at least 3 (N, mse) points")
    if np.any(pts <= 0):
        raise ValueError("N and mse must be positive")
    X = np.column_stack([np.log(pts[:, 0]), np.ones(len(pts))])
    y = np.log(pts[:, 1])
    coef, *_ = np.linalg.lstsq(X, y, rcond=None)
    resid = y - X @ coef
    return float(coef[0]), float(coef[1]), float(resid @ resid)


# ---------------------------------------------------------------------------
# vectorised law checks

LAW_BLOCK = 20000


@dataclass
class LawCheck:
    name: str
    empirical: float
    std_error: float
    expected_low: float
    expected_high: float
    sigmas: float = 3.0

    @property
    def passed(self):
        return (self.expected_low - self.sigmas * self.std_error
                <= self.empirical
                <= self.expected_high + self.sigmas * self.std_error)

    def line(self):
        if self.expected_low == self.expected_high:
            want = f"{self.expected_low:.7g}"
        else:
            want = f"[{self.expected_low:.7g}, {self.expected_high:.7g}]"
        return (f"{'PASS' if self.passed else 'FAIL'}  {self.name}: empirical {self.empirical:.7g} "
                f"+- {self.std_error:.2g} (SE), expected {want}")


def demo_1d(N, trials, delta=1.0, seed=0):
    """Consistent reconstruction on the line: empirical endpoint and worst-case MSE."""
    end = []
    worst = []
    for b, a, z in block_ranges(trials, LAW_BLOCK):
        rng = stream(seed, 0, b)
        eps = rng.uniform(-delta, delta, size=(z - a, N))
        # x = 0, so q_n = eps_n
        A = eps.max(axis=1) - delta
        B = eps.min(axis=1) + delta
        end.append(A * A)
        worst.append(np.maximum(np.abs(A), np.abs(B)) ** 2)
    e_m, e_se = _mean_se(np.concatenate(end))
    w_m, w_se = _mean_se(np.concatenate(worst))
    exact_end, exact_worst = bounds.one_dim_mse_exact(N, delta)
    return [LawCheck("E|x - A_N|^2", e_m, e_se, exact_end, exact_end),
            LawCheck("E|w_N|^2", w_m, w_se, exact_worst, exact_worst)]


def draw_uniform_batch(d, N, n, delta, rng):
    """``n`` stacked instances with uniform directions, zero signal: returns ``(phi, noise)``."""
    phi = sample_uniform_directions(d, n * N, rng).reshape(n, N, d)
    noise = rng.uniform(-delta, delta, size=(n, N))
    return phi, noise


@dataclass
class RadialStats:
    R: np.ndarray
    consistent_checked: int = 0
    consistent_failures: int = 0
    signal_failures: int = 0


def radial_samples(d, N, trials, delta=1.0, seed=0, with_consistent=False, row=0):
    """R_N(e_1) for ``trials`` uniform instances; optionally certify consistent estimates.

    With ``with_consistent`` every instance is also reconstructed by cyclic
    projections (warm-started at the linear estimate) and the result is
    checked against the residual bound at tolerance 1e-9.
    """
    psi = np.zeros(d)
    psi[0] = 1.0
    out = []
    stats = RadialStats(None)
    for b, a, z in block_ranges(trials, LAW_BLOCK):
        rng = stream(seed, row, b)
        phi, noise = draw_uniform_batch(d, N, z - a, delta, rng)
        out.append(radial_extent_batch(phi, noise, delta, psi))
        if with_consistent:
            x = sample_uniform_directions(d, z - a, rng)
            q = np.einsum("tnj,tj->tn", phi, x) + noise
            stats.signal_failures += int(np.sum(np.abs(np.einsum("tnj,tj->tn", phi, x) - q) > delta))
            x0 = linear_estimate_batch(phi, q)
            est, _, res = consistent_estimate_batch(phi, q, delta, x0, tol=CERT_TOL)
            check = np.abs(np.einsum("tnj,tj->tn", phi, est) - q).max(axis=1)
            stats.consistent_checked += z - a
            stats.consistent_failures += int(np.sum(check > delta + CERT_TOL))
    stats.R = np.concatenate(out)
    return stats


def radial_checks(d, N, trials, delta=1.0, seed=0, lambdas=None):
    """Survival probabilities Pr[R_N > lam] and E|R_N|^2 against their closed forms."""
    R = radial_samples(d, N, trials, delta, seed).R
    lambdas = [delta * k / 4 for k in range(1, 9)] if lambdas is None else lambdas
    checks = []
    for lam in lambdas:
        p = float(np.mean(R > lam))
        exact = bounds.radial_survival(lam, N, d, delta)
        se = math.sqrt(max(exact * (1 - exact), 1e-300) / trials)
        checks.append(LawCheck(f"Pr[R_N > {lam:g}]", p, se, exact, exact))
    if N >= 3:
        m, se = _mean_se(R ** 2)
        rad = bounds.theorem_radial_mse(N, d, delta)
        checks.append(LawCheck("E|R_N|^2", m, se, rad.lower, rad.upper))
    return checks


def config_from_mapping(mapping):
    """Build a ``SweepConfig`` from a flat dict, rejecting unknown keys."""
    allowed = {f for f in SweepConfig.__dataclass_fields__}
    unknown = set(mapping) - allowed
    if unknown:
        raise ConfigError(sorted(unknown)[0], "unknown configuration key")
    return SweepConfig(**mapping)
