"""Command-line driver: analytic curves, oracle verification sweeps,
Monte Carlo outage runs, and throughput runs, all emitting CSV.

Subcommands
-----------
curve       closed-form (d1, d2) along a parameter sweep, per scheme
verify      randomized analytic-vs-oracle agreement report
simulate    Monte Carlo outage curves plus a diversity-slope summary
throughput  Monte Carlo renewal-time and throughput-ratio table

A flat key=value config file (# comments allowed) can preload any flag;
explicit flags win.  Exit codes: 0 success, 1 validation error,
2 verification failure.
"""

from __future__ import annotations

import argparse
import csv
import math
import sys

import numpy as np

from . import analytic
from .analytic import COOP_SCHEMES, SchemeId, scheme_dmt
from .core import ParameterError, SystemParams, validate
from .regions import (
    OracleConfig,
    oracle_d1_hk,
    oracle_min_exponent,
    oracle_min_exponent_coop,
    region_o11_hk,
    region_o12_hk,
    region_o1_coop,
    region_o2_coop,
    region_o3_coop,
    region_o11_dd,
    region_o12_dd,
    region_rx1_cmo,
    region_rx2_cmo,
    region_rx2_hk,
    _min_rx2,
    _min_rx1,
    _region_rx1_tian1,
)
from .simulator import SimConfig, estimate_outage, estimate_throughput, fit_loglog_slope, PointEstimate

RATE_SWEEP_FLOOR = 1e-3  # curve sweeps never touch exact-zero rates
SWEEP_VARS = ("r1", "r2", "beta", "b", "t2")
VERIFY_SCHEMES = ("hk", "cmo", "tian", "hk-keep", "coop-cmo", "coop-tian", "coop-dd")


class _Parser(argparse.ArgumentParser):
    # usage problems are validation errors: exit 1, keep 2 for verify failures
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ParameterError(message)


def _fmt(x) -> str:
    if isinstance(x, float):
        return f"{x:.12g}"
    return str(x)


def _parse_triplet(text: str, what: str) -> list[float]:
    parts = text.split(":")
    if len(parts) == 1:
        return [float(parts[0])]
    if len(parts) != 3:
        raise ParameterError(f"{what} expects LO:HI:STEP, got {text!r}")
    lo, hi, step = (float(v) for v in parts)
    if hi < lo:
        raise ParameterError(f"{what}: HI must be >= LO")
    if hi == lo:
        return [lo]
    if step <= 0:
        raise ParameterError(f"{what}: STEP must be > 0")
    n = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return [lo + k * step for k in range(n)]


def _parse_sweep(text: str):
    parts = text.split(":")
    if len(parts) != 4:
        raise ParameterError(f"--sweep expects VAR:LO:HI:STEP, got {text!r}")
    var = parts[0]
    if var not in SWEEP_VARS:
        raise ParameterError(f"sweep variable must be one of {SWEEP_VARS}")
    values = _parse_triplet(":".join(parts[1:]), "--sweep")
    if var in ("r1", "r2"):
        values = [max(v, RATE_SWEEP_FLOOR) for v in values]
    return var, values


def _parse_schemes(text: str) -> list[SchemeId]:
    out = [_parse_single_scheme(tok.strip()) for tok in text.split(",")]
    if not out:
        raise ParameterError("at least one scheme is required")
    return out


def _parse_single_scheme(text: str) -> SchemeId:
    try:
        return SchemeId(text)
    except ValueError:
        valid = ", ".join(s.value for s in SchemeId)
        raise ParameterError(f"unknown scheme {text!r}; valid schemes: {valid}")


def _load_config(path: str) -> dict:
    cfg = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ParameterError(f"{path}:{lineno}: expected key=value")
            key, val = (s.strip() for s in line.split("=", 1))
            cfg[key.replace("-", "_")] = val
    return cfg


def _merge_config(args: argparse.Namespace):
    """Fill flags the user left at their default from the config file."""
    if not getattr(args, "config", None):
        return
    file_cfg = _load_config(args.config)
    for key, raw in file_cfg.items():
        if not hasattr(args, key):
            raise ParameterError(f"unknown config key {key!r}")
        if key in args._explicit:
            continue
        current = getattr(args, key)
        if isinstance(current, bool):
            setattr(args, key, raw.lower() in ("1", "true", "yes"))
        elif isinstance(current, int) and not isinstance(current, bool):
            setattr(args, key, int(raw))
        elif isinstance(current, float):
            setattr(args, key, float(raw))
        else:
            setattr(args, key, raw)


def _system_params(args) -> SystemParams:
    return validate(SystemParams(r1=args.r1, r2=args.r2, t2=args.t2,
                                 b=args.b, beta=args.beta, L=args.L))


# ---------------------------------------------------------------------------
# curve
# ---------------------------------------------------------------------------

def cmd_curve(args) -> int:
    schemes = _parse_schemes(args.scheme)
    var, values = _parse_sweep(args.sweep)
    base = _system_params(args)
    for s in schemes:
        if s in COOP_SCHEMES and args.L != 2:
            raise ParameterError("cooperative schemes require L=2")

    rows = []
    for s in schemes:
        for v in values:
            p = validate(SystemParams(**{**_fields(base), var: v}))
            res = scheme_dmt(s, p)
            branch = "|".join(f"{fid}:{br}" for fid, br, _ in res.branch_trace)
            rows.append([s.value, p.L, p.r1, p.r2, p.t2, p.b, p.beta,
                         res.d1, res.d2, "analytic", branch])

    _write_csv(args.out,
               ["scheme", "L", "r1", "r2", "t2", "b", "beta", "d1", "d2",
                "source", "branch"],
               rows)
    print(f"wrote {len(rows)} rows to {args.out}")
    return 0


def _fields(p: SystemParams) -> dict:
    return {"r1": p.r1, "r2": p.r2, "t2": p.t2, "b": p.b, "beta": p.beta, "L": p.L}


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------

def sample_params(rng: np.random.Generator, scheme: SchemeId,
                  rate_floor: float = 1e-3) -> SystemParams:
    """Random operating point for verification sweeps.

    Rates in [0.05, 0.95], beta in [0.2, 2], b in [0, 0.5], t2 <= r2 with
    the private rate kept above the oracle's floor; L in 1..4 for
    non-cooperative schemes, 2 under cooperation.
    """
    r1 = float(rng.uniform(0.05, 0.95))
    r2 = float(rng.uniform(0.05, 0.95))
    beta = float(rng.uniform(0.2, 2.0))
    if scheme in COOP_SCHEMES:
        return SystemParams(r1=r1, r2=r2, t2=0.0, b=0.0, beta=beta, L=2)
    L = int(rng.integers(1, 5))
    if scheme in (SchemeId.TIAN, SchemeId.CMO):
        return SystemParams(r1=r1, r2=r2, t2=0.0, b=0.0, beta=beta, L=L)
    t2 = float(rng.uniform(0.0, r2))
    t2 = min(t2, r2 - rate_floor)  # keep the private stream's rate active
    t2 = max(t2, 0.0)
    b = float(rng.uniform(0.0, 0.5))
    return SystemParams(r1=r1, r2=r2, t2=t2, b=b, beta=beta, L=L)


def _verify_checks(scheme: SchemeId, p: SystemParams, cfg: OracleConfig):
    """Yield (check name, analytic value, oracle value) pairs."""
    r1, r2, beta = p.r1, p.r2, p.beta
    if scheme is SchemeId.HK:
        yield "d1_hk", analytic.d1_hk(p), oracle_d1_hk(p, cfg)
        yield "d2_hk", analytic.d2_hk(p), _min_rx2(region_rx2_hk(p), cfg)
    elif scheme is SchemeId.CMO:
        yield "d1_cmo", analytic.d1_cmo(p), _min_rx1(region_rx1_cmo(p), cfg)
        yield "d2_cmo", analytic.d2_cmo(p), _min_rx2(region_rx2_cmo(p), cfg)
    elif scheme is SchemeId.TIAN:
        yield "d1_tian_general", analytic.d1_tian_general(p), oracle_d1_hk(p, cfg)
        # the single-term closed form equals its ACK-at-round-1 region pair
        first_term = min(_min_rx1(region_o11_hk(p, 1), cfg),
                         _min_rx1(region_o12_hk(p, 1), cfg))
        yield "d1_tian", analytic.d1_tian(p), first_term
        yield "d2_tian", analytic.d2_tian(p), _min_rx2(region_rx2_cmo(p), cfg)
    elif scheme is SchemeId.HK_KEEP:
        keep = min(_min_rx1(region_o11_hk(p, p.L), cfg),
                   _min_rx1(region_o12_hk(p, p.L), cfg))
        yield "d1_hk_keep", analytic.d1_hk_keep(p), keep
    elif scheme is SchemeId.COOP_CMO:
        yield "d11c_cmo2", analytic.d11c_cmo2(r1, beta), \
            oracle_min_exponent_coop(region_o1_coop(r1, beta), cfg)
        yield "d12c_cmo2", analytic.d12c_cmo2(r1, r2, beta), \
            oracle_min_exponent_coop(region_o2_coop(r1, r2, beta), cfg)
        yield "d2c_cmo2", analytic.d2c_cmo2(r1, r2, beta), \
            _coop_rx2_oracle(p, cfg, dynamic=False, tian=False)
    elif scheme is SchemeId.COOP_TIAN:
        yield "d1c_tian2", analytic.d1c_tian2(r1, beta), \
            oracle_min_exponent_coop(region_o3_coop(r1, beta), cfg)
        yield "d2c_tian2", analytic.d2c_tian2(r1, r2, beta), \
            _coop_rx2_oracle(p, cfg, dynamic=False, tian=True)
    elif scheme is SchemeId.COOP_DD:
        yield "d11c_dd2", analytic.d11c_cmo2(r1, beta), \
            oracle_min_exponent_coop(region_o11_dd(r1, beta), cfg)
        yield "d12c_dd2", analytic.d12c_dd2(r1, r2, beta), \
            oracle_min_exponent_coop(region_o12_dd(r1, r2, beta), cfg)
        yield "d2c_dd2", analytic.d2c_dd2(r1, r2, beta), \
            _coop_rx2_oracle(p, cfg, dynamic=True, tian=False)
    else:
        raise ParameterError(f"scheme {scheme.value} has no verify checks")


def _coop_rx2_oracle(p: SystemParams, cfg: OracleConfig, dynamic: bool,
                     tian: bool) -> float:
    """RX2 exponent under cooperation, assembled from region minima only.

    Mirrors the dominant error-event split: either RX1 ACKed round 1 and
    TX2's own retransmission still failed, or RX1 NACKed (TX2 relayed) and
    RX2's single round was already in outage.
    """
    one = SystemParams(r1=p.r1, r2=p.r2, beta=p.beta, L=1)
    rx1_cmo1 = _min_rx1(region_rx1_cmo(one, rounds=1), cfg)
    rx1_tian1 = _min_rx1(_region_rx1_tian1(p.r1, p.beta), cfg)
    if dynamic:
        rx1_round1 = max(rx1_cmo1, rx1_tian1)
    else:
        rx1_round1 = rx1_tian1 if tian else rx1_cmo1
    rx2_one = _min_rx2(region_rx2_cmo(one, rounds=1), cfg)
    two = SystemParams(r1=p.r1, r2=p.r2, beta=p.beta, L=2)
    rx2_two = _min_rx2(region_rx2_cmo(two, rounds=2), cfg)
    return min(rx1_round1 + rx2_one, rx2_two)


def cmd_verify(args) -> int:
    cfg = OracleConfig()
    tol = args.tol
    rng = np.random.default_rng(args.seed)
    schemes = _parse_schemes(args.scheme) if args.scheme else \
        [SchemeId(s) for s in VERIFY_SCHEMES]

    if args.samples == 0:
        print("warning: samples=0, vacuous pass")
        return 0

    rows = []
    failed = False
    for scheme in schemes:
        worst = 0.0
        worst_desc = ""
        for _ in range(args.samples):
            p = sample_params(rng, scheme, cfg.rate_floor)
            for name, ana, orc in _verify_checks(scheme, p, cfg):
                gap = abs(ana - orc)
                if gap > worst:
                    worst = gap
                    worst_desc = f"{name}@{_fields(p)}"
        status = "ok" if worst <= tol else "FAIL"
        failed |= status == "FAIL"
        rows.append([scheme.value, args.samples, worst, tol, status])
        print(f"scheme={scheme.value:10s} samples={args.samples} "
              f"max|analytic-oracle|={worst:.3e} tol={tol:g} {status}"
              + (f"  worst: {worst_desc}" if status == "FAIL" else ""))

    if args.out:
        _write_csv(args.out,
                   ["scheme", "samples", "max_abs_gap", "tol", "status"], rows)
    return 2 if failed else 0


# ---------------------------------------------------------------------------
# simulate / throughput
# ---------------------------------------------------------------------------

def cmd_simulate(args) -> int:
    scheme = _parse_single_scheme(args.scheme)
    p = _system_params(args)
    grid = _parse_triplet(args.rho_db, "--rho-db")
    sim = SimConfig(rho_db_grid=tuple(grid), trials=args.trials, T=args.T,
                    seed=args.seed, scheme=scheme).check()

    pts1, pts2 = [], []
    rows = []
    for k, db in enumerate(grid):
        rho = 10.0 ** (db / 10.0)
        est = estimate_outage(scheme, p, rho, sim.trials, sim.seed,
                              stream=k, T=sim.T)
        pts1.append(PointEstimate(db, est.p_out1, *est.ci1))
        pts2.append(PointEstimate(db, est.p_out2, *est.ci2))
        rows.append(["point", scheme.value, db,
                     est.p_out1, (est.ci1[1] - est.ci1[0]) / 2.0,
                     est.p_out2, (est.ci2[1] - est.ci2[0]) / 2.0,
                     sim.trials, "", "", "", "", "", ""])

    slope1, se1, dropped1 = fit_loglog_slope(pts1)
    slope2, se2, dropped2 = fit_loglog_slope(pts2)
    for dropped, rx in ((dropped1, "RX1"), (dropped2, "RX2")):
        if dropped:
            print(f"note: {rx} zero-outage points dropped from fit: {dropped}")
    res = scheme_dmt(scheme, p)

    def cell(x):
        return "" if x is None or not math.isfinite(x) else x

    rows.append(["summary", scheme.value, "", "", "", "", "", "",
                 cell(slope1), cell(se1), cell(slope2), cell(se2),
                 res.d1, res.d2])

    _write_csv(args.out,
               ["row", "scheme", "rho_db", "p_out1", "ci1", "p_out2", "ci2",
                "trials", "slope1", "stderr1", "slope2", "stderr2",
                "analytic_d1", "analytic_d2"],
               rows)
    print(f"wrote {len(rows)} rows to {args.out}")
    return 0


def cmd_throughput(args) -> int:
    scheme = _parse_single_scheme(args.scheme)
    p = _system_params(args)
    grid = _parse_triplet(args.rho_db, "--rho-db")
    SimConfig(rho_db_grid=tuple(grid), trials=args.trials, T=args.T,
              seed=args.seed, scheme=scheme).check()

    rows = []
    for k, db in enumerate(grid):
        rho = 10.0 ** (db / 10.0)
        est = estimate_throughput(scheme, p, rho, args.trials, args.seed,
                                  stream=k, T=args.T)
        rows.append([scheme.value, db, est.eta1, est.eta2,
                     est.ratio1, est.ratio2, est.mean_zeta])

    _write_csv(args.out,
               ["scheme", "rho_db", "eta1", "eta2", "ratio1", "ratio2",
                "mean_zeta"],
               rows)
    print(f"wrote {len(rows)} rows to {args.out}")
    return 0


# ---------------------------------------------------------------------------
# plumbing
# ---------------------------------------------------------------------------

def _write_csv(path: str, header: list[str], rows: list[list]):
    if not path:
        raise ParameterError("--out PATH is required")
    try:
        fh = open(path, "w", encoding="utf-8", newline="")
    except OSError as exc:
        raise ParameterError(f"cannot write {path}: {exc}")
    with fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(c) for c in row])


class _TrackExplicit(argparse.Action):
    # remembers which flags the user actually passed, so the config file
    # only fills the rest (subparsers build fresh namespaces, hence setdefault)
    def __call__(self, parser, namespace, values, option_string=None):
        setattr(namespace, self.dest, values)
        if not hasattr(namespace, "_explicit"):
            namespace._explicit = set()
        namespace._explicit.add(self.dest)


def _add_common(sp, *, sim: bool):
    sp.add_argument("--L", type=int, default=1, action=_TrackExplicit)
    sp.add_argument("--r1", type=float, default=0.5, action=_TrackExplicit)
    sp.add_argument("--r2", type=float, default=0.5, action=_TrackExplicit)
    sp.add_argument("--t2", type=float, default=0.0, action=_TrackExplicit)
    sp.add_argument("--b", type=float, default=0.0, action=_TrackExplicit)
    sp.add_argument("--beta", type=float, default=1.0, action=_TrackExplicit)
    sp.add_argument("--config", default=None, action=_TrackExplicit)
    sp.add_argument("--out", default=None, action=_TrackExplicit)
    if sim:
        sp.add_argument("--rho-db", dest="rho_db", default="10:40:5",
                        action=_TrackExplicit)
        sp.add_argument("--trials", type=int, default=10000, action=_TrackExplicit)
        sp.add_argument("--seed", type=int, default=0, action=_TrackExplicit)
        sp.add_argument("--T", type=int, default=1000, action=_TrackExplicit)


def build_parser() -> _Parser:
    parser = _Parser(prog="zicarq",
                     description="ARQ diversity tradeoff toolkit for the "
                                 "Z-interference channel")
    sub = parser.add_subparsers(dest="command", required=True)

    c = sub.add_parser("curve", help="closed-form DMT curves to CSV")
    c.add_argument("--scheme", default="hk,cmo,tian", action=_TrackExplicit)
    c.add_argument("--sweep", default="r1:0:1:0.01", action=_TrackExplicit)
    _add_common(c, sim=False)
    c.set_defaults(func=cmd_curve)

    v = sub.add_parser("verify", help="analytic vs oracle agreement sweep")
    v.add_argument("--scheme", default=None, action=_TrackExplicit)
    v.add_argument("--samples", type=int, default=500, action=_TrackExplicit)
    v.add_argument("--seed", type=int, default=7, action=_TrackExplicit)
    v.add_argument("--tol", type=float, default=2e-3, action=_TrackExplicit)
    v.add_argument("--config", default=None, action=_TrackExplicit)
    v.add_argument("--out", default=None, action=_TrackExplicit)
    v.set_defaults(func=cmd_verify)

    s = sub.add_parser("simulate", help="Monte Carlo outage curves")
    s.add_argument("--scheme", default="cmo", action=_TrackExplicit)
    _add_common(s, sim=True)
    s.set_defaults(func=cmd_simulate)

    t = sub.add_parser("throughput", help="Monte Carlo throughput table")
    t.add_argument("--scheme", default="cmo", action=_TrackExplicit)
    _add_common(t, sim=True)
    t.set_defaults(func=cmd_throughput)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        namespace = argparse.Namespace(_explicit=set())
        args = parser.parse_args(argv, namespace=namespace)
        _merge_config(args)
        return args.func(args)
    except ParameterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
