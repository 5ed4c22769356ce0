"""Command-line runner: ``counts``, ``verify``, ``simulate`` and ``report``.

Exit codes: 0 success, 1 a check failed, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import combinatorics as comb
from .config import ExperimentConfig, load_config
from .disorder import ConfigurationError, UnsupportedOperation, local_limit_check, rademacher
from .empirical import SampleSizeError, replicate_engine, spin_glass_identities
from .hermite import gram_matrix
from .landscapes import EnumerationRefused, SpinGlass
from .landscapes.brw import BranchingWalk, PopulationCapExceeded
from .rng import RngStream
from .stats import LimitLaw, brw_w_bank, column_report, ks_distance

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
COUNTS_MAX_N = 8
# brute-force oracles stay under ~10^4 configurations
ORACLE_MAX_N = {"assignment": 6, "hamiltonian": 7, "spanning_tree": 6}


class UsageError(Exception):
    pass


# -- counts ------------------------------------------------------------------------

def counts_rows(n_max: int):
    """``(label, closed form, oracle)`` for every identity up to ``n_max``."""
    rows = []
    for n in range(1, n_max + 1):
        rows.append((f"assignment fixed-point Σk² n={n}", comb.fixed_point_square_sum(n),
                     comb.fixed_point_square_sum_oracle(n)))
    for kind, lo in (("assignment", 1), ("hamiltonian", 3), ("spanning_tree", 3)):
        for n in range(lo, min(n_max, ORACLE_MAX_N[kind]) + 1):
            rows.append((f"{kind} Σr² n={n}", comb.overlap_square_sum(kind, n),
                         comb.overlap_square_sum_oracle(kind, n, limit=10**4)))
    for n in range(3, min(n_max, ORACLE_MAX_N["spanning_tree"]) + 1):
        for rel in comb.EdgeRelation:
            if rel is comb.EdgeRelation.DISJOINT and n < 4:
                continue
            rows.append((f"hamiltonian pairs({rel.value}) n={n}", comb.hp_pair_count(n, rel),
                         comb.pair_count_oracle("hamiltonian", n, rel)))
            rows.append((f"spanning_tree pairs({rel.value}) n={n}", comb.st_pair_count(n, rel),
                         comb.pair_count_oracle("spanning_tree", n, rel)))
            rows.append((f"spanning_tree determinant({rel.value}) n={n}",
                         comb.st_pair_count_from_determinant(n, rel), comb.st_pair_count(n, rel)))
    for n in range(2, n_max + 1):
        rows.append((f"edge census n={n}", comb.edge_pair_census(n), comb.edge_pair_census_oracle(n)))
    return rows


def cmd_counts(n_max: int, out=None) -> int:
    out = out or sys.stdout
    if n_max < 1:
        raise UsageError("--n-max must be >= 1")
    if n_max > COUNTS_MAX_N:
        raise UsageError(f"--n-max {n_max} is beyond the brute-force oracles (max {COUNTS_MAX_N})")
    failed = None
    for label, closed, oracle in counts_rows(n_max):
        ok = closed == oracle
        print(f"{label}: {closed} {'=' if ok else '!='} {oracle}", file=out)
        if not ok and failed is None:
            failed = label
    if failed:
        print(f"FAIL: {failed}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


# -- verify --------------------------------------------------------------------------

def _suite_spin_glass(cfg: ExperimentConfig, seed: int):
    details = []
    for n in cfg.n_list or (10,):
        model = cfg.model(n)
        if not isinstance(model, SpinGlass):
            raise ConfigurationError("spin_glass_identities needs a spin_glass model")
        worst_sum = worst_rel = 0.0
        for i in range(cfg.verify_replicates):
            field = model.new_field(cfg.disorder, RngStream(seed, i).child("disorder"))
            ident = spin_glass_identities(model, model.couplings(field))
            worst_sum = max(worst_sum, abs(ident.sum_energy))
            worst_rel = max(worst_rel, ident.square_relative_error)
        details.append({"model": model.describe(), "max_abs_sum": worst_sum, "max_rel_square": worst_rel,
                        "passed": worst_sum < 1e-10 and worst_rel < 1e-9})
    return all(d["passed"] for d in details), details


def _suite_hermite(cfg, seed):
    err = float(np.max(np.abs(gram_matrix(12) - np.eye(13))))
    return err < 1e-10, {"max_abs_error": err}


def _suite_combinatorics(cfg, seed):
    bad = [label for label, a, b in counts_rows(6) if a != b]
    return not bad, {"mismatches": bad}


def _suite_local_limit(cfg, seed):
    d100 = local_limit_check(rademacher(), 100)
    d400 = local_limit_check(rademacher(), 400)
    return d400 < d100 < 1e-2, {"n100": d100, "n400": d400}


def _suite_limit_ks(cfg: ExperimentConfig, seed: int):
    """KS of each nonzero-multiplier column against the limit marginal, with the
    multiplier scaled by ``multiplier_scale`` (values other than 1 are negative controls)."""
    details = []
    for n in cfg.n_list:
        model = cfg.model(n)
        matrix = replicate_engine(model, cfg.disorder, cfg.verify_replicates, cfg.samples, cfg.grid,
                                  cfg.centering, seed)
        law = _law_for(model, cfg, seed)
        worst = 0.0
        for j, z in enumerate(matrix.grid):
            cdf = law.marginal_cdf(z)
            if float(law.multipliers([z])[0]) == 0.0 or cdf is None:
                continue
            # comparing column / s with the true marginal is KS against the law scaled by s
            worst = max(worst, ks_distance(matrix.values[:, j] / cfg.multiplier_scale, cdf))
        details.append({"model": model.describe(), "max_ks": worst, "passed": worst <= cfg.ks_threshold})
    return all(d["passed"] for d in details), details


SUITES = {
    "spin_glass_identities": _suite_spin_glass,
    "hermite_orthonormality": _suite_hermite,
    "combinatorics": _suite_combinatorics,
    "local_limit": _suite_local_limit,
    "limit_ks": _suite_limit_ks,
}


def cmd_verify(cfg: ExperimentConfig, out_dir: Path, out=None) -> int:
    out = out or sys.stdout
    seed = cfg.require_seed()
    suites = cfg.suites or ("hermite_orthonormality", "combinatorics", "local_limit")
    verdict = {"schema": 1, "seed": seed, "suites": {}}
    all_ok = True
    for name in suites:
        ok, details = SUITES[name](cfg, seed)
        verdict["suites"][name] = {"passed": bool(ok), "details": details}
        print(f"{'PASS' if ok else 'FAIL'} {name}", file=out)
        all_ok &= bool(ok)
    verdict["passed"] = all_ok
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "verify.json").write_text(json.dumps(verdict, indent=2, sort_keys=True, default=float) + "\n")
    return EXIT_OK if all_ok else EXIT_FAIL


# -- simulate / report ------------------------------------------------------------

def _law_for(model, cfg: ExperimentConfig, seed: int) -> LimitLaw:
    bank = None
    if isinstance(model, BranchingWalk):
        bank = brw_w_bank(model.offspring, cfg.disorder, cfg.wbank_draws, cfg.wbank_depth, seed)
    return LimitLaw.for_model(model, cfg.disorder, bank=bank)


def _stem(model, n: int) -> str:
    return f"{model.kind}_n{n}"


def cmd_simulate(cfg: ExperimentConfig, out_dir: Path, threads: int | None, out=None) -> int:
    out = out or sys.stdout
    seed = cfg.require_seed()
    if not cfg.n_list:
        raise ConfigurationError("[model] needs n or n_list")
    out_dir.mkdir(parents=True, exist_ok=True)
    for n in cfg.n_list:
        model = cfg.model(n)
        matrix = replicate_engine(model, cfg.disorder, cfg.replicates, cfg.samples, cfg.grid,
                                  cfg.centering, seed, threads)
        stem = _stem(model, n)
        if "csv" in cfg.formats:
            matrix.to_csv(out_dir / f"{stem}.csv")
        if "json" in cfg.formats:
            law = _law_for(model, cfg, seed)
            summary = matrix.summary(law)
            summary["report"] = column_report(matrix, law)
            (out_dir / f"{stem}.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
        print(f"wrote {out_dir / stem}.*", file=out)
    return EXIT_OK


def cmd_report(out_dir: Path, out=None) -> int:
    out = out or sys.stdout
    files = sorted(out_dir.glob("*.json"))
    files = [f for f in files if f.name != "verify.json"]
    if not files:
        raise UsageError(f"no simulation summaries in {out_dir}")
    print(f"{'model':<34} {'R':>5} {'z':>6} {'variance':>10} {'limit':>10} {'ks':>7}", file=out)
    for path in files:
        data = json.loads(path.read_text())
        rep = data.get("report", {})
        for j, z in enumerate(data["z"]):
            ks = rep.get("ks", [None] * len(data["z"]))[j]
            lim = rep.get("limit_variance", [float("nan")] * len(data["z"]))[j]
            ks_text = "-" if ks is None else f"{ks:.4f}"
            print(f"{data['model']:<34} {data['replicates']:>5} {z:>6.2f} {data['variance'][j]:>10.5f} "
                  f"{lim:>10.5f} {ks_text:>7}", file=out)
        corr = rep.get("rank_one_correlation")
        if corr is not None:
            a, b = rep["correlation_pair"]
            print(f"{data['model']:<34} corr(z={a:g}, z={b:g}) = {corr:.4f}", file=out)
    return EXIT_OK


# -- entry point ---------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="experiment config file")
    common.add_argument("--seed", type=int, help="override the config seed")
    common.add_argument("--threads", type=int, help="worker threads (env LANDSCAPE_CLT_THREADS)")
    common.add_argument("--out", type=Path, help="output directory (overrides [output] directory)")

    parser = argparse.ArgumentParser(prog="landscape-clt", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    counts = sub.add_parser("counts", parents=[common], help="closed-form counts vs brute force")
    counts.add_argument("--n-max", type=int, default=6)
    sub.add_parser("verify", parents=[common], help="run identity and distribution checks")
    sub.add_parser("simulate", parents=[common], help="write process matrices and summaries")
    sub.add_parser("report", parents=[common], help="tabulate simulation summaries")
    return parser


def _load(args) -> ExperimentConfig:
    if args.config is None:
        raise UsageError("--config is required")
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg.seed = args.seed
    return cfg


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        if args.threads is not None and args.threads < 1:
            raise UsageError("--threads must be >= 1")
        if args.command == "counts":
            return cmd_counts(args.n_max)
        if args.command == "report":
            if args.out is None and args.config is None:
                raise UsageError("report needs --out or --config")
            out_dir = args.out if args.out is not None else load_config(args.config).output_dir
            return cmd_report(out_dir)
        cfg = _load(args)
        out_dir = args.out if args.out is not None else cfg.output_dir
        if args.command == "verify":
            return cmd_verify(cfg, out_dir)
        return cmd_simulate(cfg, out_dir, args.threads)
    except (UsageError, ConfigurationError, SampleSizeError, EnumerationRefused,
            UnsupportedOperation, PopulationCapExceeded) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
