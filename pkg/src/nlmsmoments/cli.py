"""
Command-line driver.

    nlms-ms {predict,simulate,compare,moments,stability} [--config PATH]
            [--out PATH] [--db] [--seed N] [--runs N] [--dump-config]

Exit codes: 0 success, 1 invalid input, 2 numerical conditioning failure,
3 acceptance threshold missed (``compare`` and ``moments``).
"""
from __future__ import annotations

import argparse
import contextlib
import csv
import io
import math
import sys

import numpy as np

from . import __version__
from .config import bundled_config_path, load_config
from .eigmoments import derived_moments
from .errors import ConditioningError, NLMSMomentsError, SimulationError, ValidationError
from .mc_oracle import estimate_moment_set
from .predictor import learning_curve, stability, steady_state
from .simulator import RngSeedPolicy, monte_carlo

__all__ = ["main", "build_parser", "CSV_HEADER", "CSV_SCHEMA_VERSION"]

EXIT_OK, EXIT_INVALID, EXIT_CONDITIONING, EXIT_THRESHOLD = 0, 1, 2, 3

CSV_SCHEMA_VERSION = 1
CSV_HEADER = (
    "mu",
    "iter",
    "emse_theory",
    "msd_theory",
    "mse_theory",
    "emse_sim",
    "emse_sim_se",
    "msd_sim",
    "msd_sim_se",
    "mse_sim",
    "mse_sim_se",
)
KINDS = ("emse", "msd", "mse")

STEADY_GAP_DB = 0.5
TRANSIENT_GAP_DB = 1.0
TRANSIENT_WINDOW = 500
MOMENT_Z_LIMIT = 4.0


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="experiment config (default: bundled fig1.json)")
    common.add_argument("--out", metavar="PATH", help="output file (default: stdout)")
    common.add_argument("--db", action="store_true", help="write curve values in dB (10 log10)")
    common.add_argument("--seed", type=int, metavar="N", help="master seed, overriding the config")
    common.add_argument("--runs", type=int, metavar="N", help="Monte-Carlo runs, overriding the config")
    common.add_argument("--dump-config", action="store_true", help="print the effective config and exit")
    parser = _Parser(prog="nlms-ms", description="Mean-square analysis of NLMS under colored complex Gaussian input.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND", parser_class=_Parser)
    helps = {
        "predict": "theoretical learning curves, steady state and stability",
        "simulate": "Monte-Carlo learning curves",
        "compare": "theory against simulation, with pass/fail summary",
        "moments": "closed-form moments against the sampling oracle",
        "stability": "step-size bounds and rho(F) over a step-size grid",
    }
    for name, text in helps.items():
        sub.add_parser(name, parents=[common], help=text, description=text)
    return parser


# ---------------------------------------------------------------- output helpers


def _fmt(x):
    return "" if x is None else repr(float(x))


def _to_db(value, se=None):
    with np.errstate(divide="ignore", invalid="ignore"):
        if se is None:
            return 10.0 * np.log10(value)
        # first-order half-width in dB
        return 10.0 / math.log(10.0) * np.asarray(se) / np.asarray(value)


class _Table:
    """Column-oriented rows for one step size."""

    def __init__(self, mu, n):
        self.mu = mu
        self.n = n
        self.cols = {}
        self.summary = None

    def put(self, name, values):
        self.cols[name] = np.asarray(values, dtype=float)

    def rows(self, db):
        names = CSV_HEADER[2:]
        cols = {}
        for name in names:
            if name not in self.cols:
                continue
            v = self.cols[name]
            if db:
                v = _to_db(self.cols[name[:-3]], v) if name.endswith("_se") else _to_db(v)
            cols[name] = v
        for i in range(self.n):
            yield [_fmt(self.mu), str(i)] + [_fmt(cols[c][i]) if c in cols else "" for c in names]
        if self.summary is not None:
            label, values = self.summary
            vals = dict(values)
            if db:
                vals = {
                    c: (_to_db(vals[c[:-3]], v) if c.endswith("_se") else _to_db(v))
                    for c, v in vals.items()
                    if v is not None
                }
            yield [_fmt(self.mu), label] + [_fmt(vals.get(c)) for c in names]


def _write_csv(tables, db, out):
    w = csv.writer(out, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for t in tables:
        for row in t.rows(db):
            w.writerow(row)


@contextlib.contextmanager
def _open_out(path, stdout):
    if path is None:
        yield stdout
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            yield fh


# ---------------------------------------------------------------- commands


def _theory(sc, n, table, report):
    for kind in KINDS:
        table.put(f"{kind}_theory", learning_curve(sc, n, kind).values)
    st = stability(sc)
    if st.stable:
        vals = {f"{k}_theory": steady_state(sc, k) for k in KINDS}
        label = "steady"
    else:
        vals, label = {}, "unstable"
    report.append(
        f"mu={sc.mu:g}: rho(F)={st.rho_F:.6g}, mean bound={st.mean_bound:.6g}, "
        f"mean-square bound={st.meansq_bound:.6g} -> {'stable' if st.stable else 'unstable'}"
    )
    if st.stable:
        report.append(
            f"  steady state: emse={vals['emse_theory']:.6g} msd={vals['msd_theory']:.6g} "
            f"mse={vals['mse_theory']:.6g}"
        )
    return label, vals


def _simulation(cfg, sc, table):
    mc = monte_carlo(sc, cfg.iterations, cfg.runs, RngSeedPolicy(cfg.master_seed))
    vals = {}
    for kind in KINDS:
        curve = mc.curve(kind)
        table.put(f"{kind}_sim", curve.values)
        table.put(f"{kind}_sim_se", curve.std_error)
        if cfg.iterations:
            tail = mc.steady_state(kind)
            vals[f"{kind}_sim"] = tail.mean
            vals[f"{kind}_sim_se"] = tail.std_error
    if cfg.iterations and not np.all(np.isfinite(mc.mse.values)):
        raise SimulationError(f"simulation diverged at mu = {sc.mu}")
    return mc, vals


def _curves(cfg, theory, sim, out, db):
    report = []
    tables = []
    failures = []
    for sc in cfg.scenarios():
        t = _Table(sc.mu, cfg.iterations)
        vals, label = {}, "steady"
        if theory:
            label, v = _theory(sc, cfg.iterations, t, report)
            vals.update(v)
        if sim:
            mc, v = _simulation(cfg, sc, t)
            vals.update(v)
            if theory:
                failures += _compare_summary(sc, t, mc, vals, label, report)
        if cfg.iterations:
            t.summary = (label, vals)
        tables.append(t)
    _write_csv(tables, db, out)
    return report, failures


def _compare_summary(sc, table, mc, vals, label, report):
    n = table.n
    if n == 0:
        report.append(f"mu={sc.mu:g}: no iterations, nothing to compare")
        return []
    theory = table.cols["mse_theory"]
    sim = table.cols["mse_sim"]
    with np.errstate(divide="ignore", invalid="ignore"):
        gap = np.abs(10 * np.log10(sim) - 10 * np.log10(theory))
    window = min(TRANSIENT_WINDOW, n)
    transient = float(np.mean(gap[:window]))
    max_gap = float(np.max(gap))
    if label != "steady":
        report.append(f"  compare: unstable step size, no steady state; max gap {max_gap:.4g} dB -> FAIL")
        return [sc.mu]
    steady = abs(10 * math.log10(vals["mse_sim"]) - 10 * math.log10(vals["mse_theory"]))
    ok = steady <= STEADY_GAP_DB and transient <= TRANSIENT_GAP_DB
    tail = mc.steady_state("mse")
    report.append(
        f"  compare: steady-state gap {steady:.4f} dB (limit {STEADY_GAP_DB}), "
        f"transient gap {transient:.4f} dB over {window} iterations (limit {TRANSIENT_GAP_DB}), "
        f"max per-iteration gap {max_gap:.4f} dB, tail drift z={tail.slope_z:.2f} -> {'PASS' if ok else 'FAIL'}"
    )
    return [] if ok else [sc.mu]


def _moments_report(cfg):
    sc = cfg.scenarios()[0]
    s = sc.spectrum
    ms = derived_moments(s)
    oracle = estimate_moment_set(s, cfg.oracle_samples, cfg.master_seed)
    M = s.M
    lines = [
        f"spectrum: {' '.join(f'{v:.6g}' for v in s.values)}",
        f"oracle: {cfg.oracle_samples} samples, seed {cfg.master_seed}",
        f"{'quantity':<24}{'index':>8}{'closed_form':>16}{'oracle':>16}{'std_error':>13}{'z':>9}",
    ]
    worst = 0.0

    def row(name, idx, ref, est, se):
        nonlocal worst
        z = (ref - est) / se if se > 0 else 0.0
        worst = max(worst, abs(z))
        lines.append(f"{name:<24}{idx:>8}{ref:>16.9g}{est:>16.9g}{se:>13.3g}{z:>9.2f}")

    def family(name, ref, est):
        for k in range(M):
            row(name, str(k), ref[k], est.value[k], est.std_error[k])

    def pairs(name, ref, est):
        for k in range(M):
            for l in range(k + 1, M):
                row(name, f"{k},{l}", ref[k, l], est.value[k, l], est.std_error[k, l])

    family("E[s_k]", ms.mean_sk, oracle.mean_sk)
    family("E[s_k^2]", ms.second_sk, oracle.second_sk)
    pairs("E[s_kkbar^2]", ms.second_skkbar, oracle.second_skkbar)
    row("E[r^2]", "-", ms.second_r, oracle.second_r.value, oracle.second_r.std_error)
    family("E[z_k^2]", ms.second_zk, oracle.second_zk)
    pairs("E[|u_k u_l|^2/Y^2]", ms.cross_fourth, oracle.cross_fourth)
    pairs("  via s-moments", ms.cross_fourth, oracle.cross_fourth_combined)
    family("E[|u_k|^2/Y^2]", ms.self_weighted, oracle.self_weighted)
    family("  via z,s,r moments", ms.self_weighted, oracle.self_weighted_combined)
    ws = oracle.weighted_mean_sum
    row("sum lambda_k s_k", "-", 1.0, ws.value, ws.std_error)
    ok = worst <= MOMENT_Z_LIMIT
    lines.append(f"max |z| = {worst:.3f} (limit {MOMENT_Z_LIMIT}) -> {'PASS' if ok else 'FAIL'}")
    return "\n".join(lines) + "\n", ok


def _stability_report(cfg):
    base = cfg.scenarios()[0]
    st = stability(base)
    grid = cfg.stability_mu_grid
    if grid is None:
        grid = sorted(set(cfg.mu) | {f * st.meansq_bound for f in (0.25, 0.5, 0.75, 1.0, 1.25, 1.5)})
    lines = [
        f"spectrum: {' '.join(f'{v:.6g}' for v in base.spectrum.values)}",
        f"mean stability bound:        mu < {st.mean_bound:.9g}",
        f"mean-square stability bound: mu < {st.meansq_bound:.9g}",
        f"{'mu':>12}{'rho(F)':>16}  status",
    ]
    for mu in grid:
        r = stability(base.replace(mu=mu))
        lines.append(f"{mu:>12.6g}{r.rho_F:>16.9f}  {'stable' if r.stable else 'unstable'}")
    return "\n".join(lines) + "\n"


def _run(args, stdout, stderr):
    path = args.config if args.config is not None else bundled_config_path()
    cfg = load_config(path)
    if args.runs is not None and args.runs < 1:
        raise ValidationError("--runs must be at least 1")
    if args.seed is not None and args.seed < 0:
        raise ValidationError("--seed must be nonnegative")
    cfg = cfg.with_overrides(master_seed=args.seed, runs=args.runs)
    out_path = args.out if args.out is not None else cfg.output_path
    if args.dump_config:
        with _open_out(out_path, stdout) as out:
            out.write(cfg.dumps())
        return EXIT_OK
    cmd = args.command
    # the side report goes wherever the primary output does not
    side = stdout if out_path is not None else stderr
    if cmd in ("predict", "simulate", "compare"):
        buf = io.StringIO()
        report, failures = _curves(cfg, cmd != "simulate", cmd != "predict", buf, args.db)
        with _open_out(out_path, stdout) as out:
            out.write(buf.getvalue())
        if report:
            side.write("\n".join(report) + "\n")
        return EXIT_THRESHOLD if failures else EXIT_OK
    if cmd == "moments":
        text, ok = _moments_report(cfg)
        with _open_out(out_path, stdout) as out:
            out.write(text)
        return EXIT_OK if ok else EXIT_THRESHOLD
    text = _stability_report(cfg)
    with _open_out(out_path, stdout) as out:
        out.write(text)
    return EXIT_OK


def main(argv=None, stdout=None, stderr=None):
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    args = build_parser().parse_args(argv)
    try:
        return _run(args, stdout, stderr)
    except ValidationError as exc:
        stderr.write(f"nlms-ms: invalid input: {exc}\n")
        return EXIT_INVALID
    except (ConditioningError, SimulationError) as exc:
        stderr.write(f"nlms-ms: numerical failure: {exc}\n")
        return EXIT_CONDITIONING
    except NLMSMomentsError as exc:
        stderr.write(f"nlms-ms: {exc}\n")
        return EXIT_INVALID
    except OSError as exc:
        stderr.write(f"nlms-ms: cannot write output: {exc}\n")
        return EXIT_INVALID


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
