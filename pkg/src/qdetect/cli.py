"""Batch command-line front end.

Subcommands reproduce the numerical study and run the verification suites:

    table1      delay table: Monte Carlo vs the two closed forms
    bayes-limit small-p limit extrapolation vs the competing predictions
    equalizer   conditional delay profile over change times k = 1..10
    props       invariant suite (martingale, optional stopping, identities)
    oracles     closed forms vs quadrature and Monte Carlo oracles

Exit codes: 0 success, 2 invariant failure, 3 inconclusive statistics,
4 configuration error.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from . import __version__, bayes, formulas, headstart, montecarlo as mc
from .errors import ConfigurationError, QDetectError
from .headstart import HeadStartLaw

EXIT_OK = 0
EXIT_INVARIANT = 2
EXIT_INCONCLUSIVE = 3
EXIT_CONFIG = 4

DEFAULT_A_GRID = [1.5, 1.6, 1.7, 1.8, 1.9, 1.98]
DEFAULT_P_GRID = [0.02, 0.01, 0.005]
DEFAULT_REPS = 10**6
DEFAULT_SEED = 12345
DEFAULT_C_STAR = 0.1

TRUNCATION_EXIT_LEVEL = 1e-4


@dataclass
class Table:
    """A rendered result table with regeneration metadata in its header."""

    meta: dict
    columns: List[str]
    rows: List[list] = field(default_factory=list)
    notes: List[str] = field(default_factory=list)

    def _fmt(self, v) -> str:
        if isinstance(v, float):
            return f"{v:.4f}"
        return str(v)

    def header_lines(self) -> List[str]:
        meta = " ".join(f"{k}={v}" for k, v in self.meta.items())
        return [f"# qdetect {__version__} {meta}"]

    def to_csv(self) -> str:
        lines = self.header_lines()
        lines.append(",".join(self.columns))
        for row in self.rows:
            lines.append(",".join(self._fmt(v) for v in row))
        lines.extend(f"# {n}" for n in self.notes)
        return "\n".join(lines) + "\n"

    def to_markdown(self) -> str:
        lines = self.header_lines()
        lines.append("| " + " | ".join(self.columns) + " |")
        lines.append("|" + "|".join("---" for _ in self.columns) + "|")
        for row in self.rows:
            lines.append("| " + " | ".join(self._fmt(v) for v in row) + " |")
        lines.extend(n for n in self.notes)
        return "\n".join(lines) + "\n"

    def render(self, fmt: str) -> str:
        return self.to_csv() if fmt == "csv" else self.to_markdown()


def _emit(text: str, out: Optional[str]) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)


def _meta(args, command: str) -> dict:
    return {"command": command, "seed": args.seed, "reps": args.reps}


def cmd_table1(args) -> int:
    table = Table(meta=_meta(args, "table1"),
                  columns=["A", "mc", "mc_se", "eq14", "eq14_se", "eq13"])
    worst_truncation = 0.0
    for a in args.a_grid:
        law = HeadStartLaw.yakir(a)
        e1 = mc.estimate_e1_delay(a, law, args.reps, args.seed, args.workers)
        cross = mc.estimate_cross_term(a, law, args.reps, args.seed, args.workers)
        p0 = headstart.p0_exact(a)
        mu0 = headstart.mu0_exact(a)
        eq14 = formulas.mei_e1(p0, mu0, cross.mean)
        eq14_se = p0 * cross.stderr
        eq13 = formulas.yakir_e1(p0, mu0)
        table.rows.append([a, e1.mean, e1.stderr, eq14, eq14_se, eq13])
        worst_truncation = max(worst_truncation, e1.truncation_fraction)
    _emit(table.render(args.format), args.out)
    if worst_truncation > TRUNCATION_EXIT_LEVEL:
        print(f"truncation fraction {worst_truncation:.2e} exceeds "
              f"{TRUNCATION_EXIT_LEVEL:.0e}", file=sys.stderr)
        return EXIT_INVARIANT
    return EXIT_OK


def _limit_predictions(a: float, law: HeadStartLaw, c_star: float, reps: int,
                       seed: int, workers: int):
    """Closed-form limit predictions fed by measured SR expectations."""
    e1 = mc.estimate_e1_delay(a, law, reps, seed, workers)
    cross = mc.estimate_cross_term(a, law, reps, seed, workers)
    arl = mc.estimate_arl_false(a, law, reps, seed, workers)
    e_r0 = headstart.yakir_mean(a) if law.kind is headstart.LawKind.YAKIR_UNIFORM_PRODUCT \
        else float(np.mean(law.sample(np.random.default_rng(seed), 10**5)))
    eq4 = formulas.c_limit_eq4(e_r0, e1.mean, arl.mean, cross.mean, c_star)
    eq3 = formulas.c_limit_eq3(e_r0, e1.mean, arl.mean, c_star)
    # first-order error propagation through the closed forms
    eq4_se = math.sqrt(((1.0 - c_star * e1.mean) * arl.stderr) ** 2
                       + (c_star * cross.stderr) ** 2
                       + (c_star * (1.0 + arl.mean) * e1.stderr) ** 2)
    s = e_r0 + 1.0 + arl.mean
    eq3_se = math.sqrt(((1.0 - c_star * e1.mean) * arl.stderr) ** 2
                       + (c_star * s * e1.stderr) ** 2)
    return e1, cross, arl, e_r0, eq3, eq3_se, eq4, eq4_se


def cmd_bayes_limit(args) -> int:
    a = args.a_grid[0]
    law = HeadStartLaw.yakir(a)
    e1, cross, arl, e_r0, eq3, eq3_se, eq4, eq4_se = _limit_predictions(
        a, law, args.c_star, args.reps, args.seed, args.workers)
    diag = bayes.limit_diagnostic(a, law, args.c_star, args.p_grid, args.reps,
                                  args.seed, args.workers)
    verdict = bayes.compare_limit(diag, eq3, eq4, eq3_se, eq4_se)
    table = Table(meta={**_meta(args, "bayes-limit"), "A": a,
                        "c_star": args.c_star},
                  columns=["p", "reps", "ratio", "ratio_se"])
    for row in diag.rows:
        table.rows.append([row.p, row.reps, row.ratio, row.stderr])
    table.notes.append(
        f"intercept={diag.intercept:.4f} intercept_se={diag.intercept_se:.4f}")
    if diag.single_point:
        table.notes.append("warning: single grid point, extrapolation disabled")
    table.notes.append(f"eq3={eq3:.4f} eq3_se={eq3_se:.4f} z={verdict.z_eq3:.2f}")
    table.notes.append(f"eq4={eq4:.4f} eq4_se={eq4_se:.4f} z={verdict.z_eq4:.2f}")
    table.notes.append(f"verdict={verdict.verdict}")
    _emit(table.render(args.format), args.out)
    if verdict.verdict == "inconclusive":
        return EXIT_INCONCLUSIVE
    return EXIT_OK


def cmd_equalizer(args) -> int:
    a = args.a_grid[0]
    law = HeadStartLaw.yakir(a)
    profile = mc.delay_profile(a, law, 10, args.reps, args.seed, args.workers)
    table = Table(meta={**_meta(args, "equalizer"), "A": a},
                  columns=["k", "delay", "delay_se", "rejected", "flag"])
    base = profile.entries.get(1)
    for k in range(1, 11):
        if k in profile.entries:
            e = profile.entries[k]
            flagged = 0
            if base is not None and k > 1:
                gap = abs(e.mean - base.mean)
                if gap > 5.0 * math.hypot(e.stderr, base.stderr):
                    flagged = 1
            table.rows.append([k, e.mean, e.stderr, e.rejected, flagged])
        else:
            table.rows.append([k, "missing", "missing",
                               profile.undefined.get(k, args.reps), 0])
    _emit(table.render(args.format), args.out)
    return EXIT_OK


def _run_checks(checks) -> tuple[List[str], bool]:
    lines = []
    all_ok = True
    for name, ok, detail in checks:
        lines.append(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
        all_ok = all_ok and ok
    return lines, all_ok


def _oracle_checks(a_grid, reps, seed):
    checks = []
    for a in a_grid:
        law = HeadStartLaw.yakir(a)
        rng = np.random.default_rng(np.random.SeedSequence([seed, int(a * 1000)]))
        oracle = headstart.functionals_oracle(law, a, reps, rng)
        p0 = headstart.p0_exact(a)
        mu0 = headstart.mu0_exact(a)
        checks.append((
            f"p0-quadrature A={a}",
            abs(p0 - headstart.p0_quadrature(a)) <= 1e-10,
            f"exact={p0:.12f} quad={headstart.p0_quadrature(a):.12f}"))
        checks.append((
            f"mu0-quadrature A={a}",
            abs(mu0 - headstart.mu0_quadrature(a)) <= 1e-10,
            f"exact={mu0:.12f} quad={headstart.mu0_quadrature(a):.12f}"))
        checks.append((
            f"p0-oracle A={a}",
            abs(p0 - oracle["p0_hat"]) <= 4.0 * oracle["p0_se"],
            f"exact={p0:.6f} hat={oracle['p0_hat']:.6f} se={oracle['p0_se']:.6f}"))
        checks.append((
            f"mu0-oracle A={a}",
            abs(mu0 - oracle["mu0_hat"]) <= 4.0 * oracle["mu0_se"],
            f"exact={mu0:.6f} hat={oracle['mu0_hat']:.6f} se={oracle['mu0_se']:.6f}"))
        checks.append((
            f"mean-oracle A={a}",
            abs(headstart.yakir_mean(a) - oracle["mean_hat"]) <= 4.0 * oracle["mean_se"],
            f"exact={headstart.yakir_mean(a):.6f} hat={oracle['mean_hat']:.6f}"))
        erratum_gap = abs(headstart.p0_erratum(a) - oracle["p0_hat"])
        checks.append((
            f"erratum-rejected A={a}",
            erratum_gap > 20.0 * oracle["p0_se"],
            f"|erratum-hat|={erratum_gap:.4f} (20 SE = {20 * oracle['p0_se']:.4f})"))
    return checks


def cmd_oracles(args) -> int:
    checks = _oracle_checks(args.a_grid, args.reps, args.seed)
    lines, ok = _run_checks(checks)
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK if ok else EXIT_INVARIANT


def _props_checks(args):
    a = args.a_grid[0]
    law = HeadStartLaw.yakir(a)
    reps = min(args.reps, 200_000)
    checks = []

    # martingale drift under no change: E R_n = E R_0 + n
    rng = np.random.default_rng(np.random.SeedSequence([args.seed, 1]))
    n_paths, horizon = 50_000, 20
    r = np.zeros(n_paths)
    ok = True
    worst = 0.0
    for n in range(1, horizon + 1):
        lr = 2.0 * np.exp(-(-np.log(rng.random(n_paths))))
        r = (1.0 + r) * lr
        se = r.std(ddof=1) / math.sqrt(n_paths)
        z = abs(r.mean() - n) / se
        worst = max(worst, z)
        ok = ok and z <= 4.0
    checks.append(("martingale-drift", ok, f"max |z| over n<=20: {worst:.2f}"))

    # optional stopping: E(final - r0) = E n_stop under the no-change law
    n_stop, r0, final, trunc = mc.sr_replications(a, law, None, reps,
                                                  args.seed, args.workers)
    diff = (final - r0) - n_stop
    se = diff.std(ddof=1) / math.sqrt(diff.size)
    z = abs(diff.mean()) / se
    checks.append(("optional-stopping", z <= 4.0 and int(trunc.sum()) == 0,
                   f"|z|={z:.2f} truncated={int(trunc.sum())}"))

    # per-sample risk identity: cond - c*dp == cond*(1 - c*dp), bitwise
    config = bayes.BayesConfig(p=0.01, c=args.c_star, A=a, law=law)
    _, br0, bnu, bn, _ = bayes._risk_sums(config, min(reps, 100_000),
                                          args.seed, args.workers,
                                          tag="props-eq5", collect="arrays")
    cond = (bn >= bnu - 1).astype(float)
    dp = np.maximum(0, bn - bnu + 1).astype(float)
    lhs = cond - args.c_star * dp
    rhs = cond * (1.0 - args.c_star * dp)
    checks.append(("risk-identity-exact", bool(np.array_equal(lhs, rhs)),
                   "per-sample decomposition is bitwise exact"))

    # coupling round trip to machine precision
    rng2 = np.random.default_rng(np.random.SeedSequence([args.seed, 2]))
    ps = rng2.uniform(1e-4, 0.99, 200)
    r0s = rng2.uniform(0.0, 50.0, 200)
    back = np.array([bayes.implied_headstart(p, bayes.couple_pi0(p, r))
                     for p, r in zip(ps, r0s)])
    err = np.max(np.abs(back - r0s))
    checks.append(("pi0-round-trip", err <= 1e-9, f"max error {err:.2e}"))

    # symbolic difference of the two limit formulas
    rng3 = np.random.default_rng(np.random.SeedSequence([args.seed, 3]))
    ok = True
    worst = 0.0
    for _ in range(200):
        e_r0, e1d, arl, cr, cs = rng3.uniform(0.01, 5.0, 5)
        lhs = formulas.c_limit_eq3(e_r0, e1d, arl, cs) \
            - formulas.c_limit_eq4(e_r0, e1d, arl, cr, cs)
        rhs = cs * (cr - e1d * e_r0)
        scale = max(1.0, abs(lhs), abs(rhs))
        worst = max(worst, abs(lhs - rhs) / scale)
        ok = ok and abs(lhs - rhs) <= 1e-12 * scale
    checks.append(("eq3-eq4-difference", ok, f"max rel error {worst:.2e}"))
    return checks


def cmd_props(args) -> int:
    checks = _props_checks(args) + _oracle_checks(args.a_grid[:1],
                                                  min(args.reps, 200_000),
                                                  args.seed)
    lines, ok = _run_checks(checks)
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK if ok else EXIT_INVARIANT


def _float_list(text: str) -> List[float]:
    return [float(tok) for tok in text.split(",") if tok.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qdetect", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("command",
                        choices=["table1", "bayes-limit", "equalizer",
                                 "props", "oracles"])
    parser.add_argument("--a-grid", type=_float_list,
                        default=DEFAULT_A_GRID,
                        help="comma-separated thresholds in (0, 2)")
    parser.add_argument("--reps", type=int, default=DEFAULT_REPS)
    parser.add_argument("--seed", type=int,
                        default=int(os.environ.get("QDETECT_SEED", DEFAULT_SEED)))
    parser.add_argument("--c-star", type=float, default=DEFAULT_C_STAR)
    parser.add_argument("--p-grid", type=_float_list, default=DEFAULT_P_GRID)
    parser.add_argument("--workers", type=int, default=1)
    parser.add_argument("--format", choices=["csv", "md"], default="csv")
    parser.add_argument("--out", default=None, metavar="PATH")
    return parser


def _validate_args(args) -> None:
    if args.reps < 1:
        raise ConfigurationError(f"reps must be >= 1, got {args.reps}")
    if args.workers < 1:
        raise ConfigurationError(f"workers must be >= 1, got {args.workers}")
    if not args.a_grid:
        raise ConfigurationError("a_grid must be nonempty")
    for a in args.a_grid:
        if not (0.0 < a < 2.0):
            raise ConfigurationError(
                f"thresholds must lie in (0, 2) for the product head-start law, got {a}")
    if args.c_star < 0:
        raise ConfigurationError(f"c_star must be nonnegative, got {args.c_star}")
    if not args.p_grid:
        raise ConfigurationError("p_grid must be nonempty")


_COMMANDS = {
    "table1": cmd_table1,
    "bayes-limit": cmd_bayes_limit,
    "equalizer": cmd_equalizer,
    "props": cmd_props,
    "oracles": cmd_oracles,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        _validate_args(args)
        return _COMMANDS[args.command](args)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except QDetectError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
