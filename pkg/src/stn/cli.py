"""Command-line front end: ingestion -> estimation -> selection -> graphs -> exports.

Subcommands:
  reconstruct   estimate the network from a CSV panel and write all artifacts
  synth-eval    generate synthetic panels with known structure and score recovery
  importance    compute the shock-importance scale toward the risk parameter

Every run writes a manifest.json sufficient to reproduce its outputs
byte-identically. Diagnostics go to stderr; artifacts only to --out.
Exit codes: 0 success, 1 data/module error, 2 bad flags.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import os
import statistics
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .graph import compact_graph, export_adjacency, export_dot, extended_graph, is_acyclic, risk_out_edges
from .importance import Normalization, importance_to_csv, scale_from_coefficients
from .model import check_coefficients, default_mask, set_pd_self_lag
from .panel import apply_logit, build_design, load_csv, standardize
from .selection import FoldScheme, cross_validate, cv_to_csv, make_folds
from .solver import SolverConfig, coefficients_to_json, fit
from .synth import SynthSpec, edge_metrics, generate

_SCHEMES = {"kfold": FoldScheme.KFOLD_CONTIGUOUS, "rolling": FoldScheme.ROLLING_ORIGIN}


def thread_cap() -> int:
    """Parallelism cap from STN_THREADS (0 = auto); execution is sequential either way."""
    raw = os.environ.get("STN_THREADS", "0")
    try:
        cap = int(raw)
    except ValueError:
        print(f"stn: ignoring non-integer STN_THREADS={raw!r}", file=sys.stderr)
        return 0
    if cap < 0:
        print(f"stn: ignoring negative STN_THREADS={cap}", file=sys.stderr)
        return 0
    return cap


def _write(path: Path, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _sha256(path: str) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        digest.update(fh.read())
    return digest.hexdigest()


def _add_solver_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--penalty", choices=("lasso", "enet"), default="enet")
    sub.add_argument("--alpha", type=float, default=0.5, help="elastic-net mixing in (0, 1]")
    sub.add_argument("--lambda", dest="lambda_", default="cv", help="penalty value, or 'cv'")
    sub.add_argument("--folds", type=int, default=5)
    sub.add_argument("--scheme", choices=tuple(_SCHEMES), default="kfold")
    sub.add_argument("--n-lambdas", type=int, default=50)
    sub.add_argument("--lambda-min-ratio", type=float, default=1e-3)
    sub.add_argument("--scoring", choices=("all", "risk"), default="all")
    sub.add_argument("--tol", type=float, default=1e-7)
    sub.add_argument("--max-sweeps", type=int, default=10000)
    sub.add_argument("--allow-pd-self-lag", action="store_true")
    sub.add_argument("--out", required=True, help="output directory")


def _add_input_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--input", help="CSV panel (header row; first column = period label)")
    sub.add_argument("--risk", help="name of the risk-parameter column")
    sub.add_argument("--logit", action="store_true", help="apply the logit to the risk series")


def _validate_solver_flags(parser: argparse.ArgumentParser, args) -> None:
    if not (0.0 < args.alpha <= 1.0):
        parser.error(f"--alpha must be in (0, 1], got {args.alpha}")
    if args.lambda_ != "cv":
        try:
            value = float(args.lambda_)
        except ValueError:
            parser.error(f"--lambda must be a number or 'cv', got {args.lambda_!r}")
        if value < 0:
            parser.error("--lambda must be nonnegative")
    if args.folds < 2:
        parser.error("--folds must be at least 2")
    if args.n_lambdas < 2:
        parser.error("--n-lambdas must be at least 2")
    if not (0.0 < args.lambda_min_ratio < 1.0):
        parser.error("--lambda-min-ratio must be in (0, 1)")
    if args.tol <= 0:
        parser.error("--tol must be positive")
    if args.max_sweeps < 1:
        parser.error("--max-sweeps must be positive")


def _effective_alpha(args) -> float:
    return 1.0 if args.penalty == "lasso" else args.alpha


def _select_lambda(design, mask, alpha, args):
    """Returns (lambda, cv_result or None, plan or None)."""
    if args.lambda_ != "cv":
        return float(args.lambda_), None, None
    plan = make_folds(design.Te, args.folds, _SCHEMES[args.scheme])
    result = cross_validate(
        design,
        mask,
        [alpha],
        args.n_lambdas,
        args.lambda_min_ratio,
        plan,
        scoring=args.scoring,
        tol=args.tol,
        max_sweeps=args.max_sweeps,
    )
    return result.best_lambda, result, plan


def _manifest(command: str, args, extra: dict) -> str:
    payload = {
        "command": command,
        "artifact_version": __version__,
        "solver": {"tol": args.tol, "max_sweeps": args.max_sweeps, "standardize": True},
        "penalty": getattr(args, "penalty", None),
        "alpha": _effective_alpha(args),
        "lambda_request": args.lambda_,
        "cv": None
        if args.lambda_ != "cv"
        else {
            "scheme": args.scheme,
            "k": args.folds,
            "n_lambdas": args.n_lambdas,
            "lambda_min_ratio": args.lambda_min_ratio,
            "scoring": args.scoring,
        },
        "allow_pd_self_lag": args.allow_pd_self_lag,
    }
    payload.update(extra)
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def _load_panel(args):
    panel = load_csv(args.input, args.risk)
    if args.logit:
        panel = apply_logit(panel)
    return panel


def _mask_for(p: int, args):
    mask = default_mask(p)
    if args.allow_pd_self_lag:
        mask = set_pd_self_lag(mask, True)
    return mask


def _apply_manifest_overrides(parser, args) -> None:
    manifest = json.loads(Path(args.from_manifest).read_text(encoding="utf-8"))
    if manifest.get("command") != "reconstruct":
        parser.error("--from-manifest expects a reconstruct manifest")
    args.input = manifest["input_path"]
    args.risk = manifest["risk_variable"]
    args.logit = manifest["logit"]
    args.penalty = manifest["penalty"]
    args.allow_pd_self_lag = manifest["allow_pd_self_lag"]
    args.lambda_ = manifest["lambda_request"]
    args.alpha = manifest["alpha"]
    args.tol = manifest["solver"]["tol"]
    args.max_sweeps = manifest["solver"]["max_sweeps"]
    if manifest["cv"] is not None:
        args.scheme = manifest["cv"]["scheme"]
        args.folds = manifest["cv"]["k"]
        args.n_lambdas = manifest["cv"]["n_lambdas"]
        args.lambda_min_ratio = manifest["cv"]["lambda_min_ratio"]
        args.scoring = manifest["cv"]["scoring"]


def cmd_reconstruct(parser: argparse.ArgumentParser, args) -> int:
    if args.from_manifest:
        _apply_manifest_overrides(parser, args)
    if not args.input or not args.risk:
        parser.error("--input and --risk are required")
    _validate_solver_flags(parser, args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    panel = _load_panel(args)
    panel_std, _, _ = standardize(panel)
    design = build_design(panel_std)
    mask = _mask_for(panel.p, args)
    alpha = _effective_alpha(args)
    lam, cv_result, _ = _select_lambda(design, mask, alpha, args)
    config = SolverConfig(
        alpha=alpha, lambda_=lam, tol=args.tol, max_sweeps=args.max_sweeps, standardize=True
    )
    coeffs, report = fit(design, mask, config)
    if not report.converged:
        print("stn: solver hit max_sweeps before converging", file=sys.stderr)
    violations = check_coefficients(coeffs, mask)
    if violations:
        raise RuntimeError(f"structural constraint violated: {violations[:3]}")

    extended = extended_graph(coeffs, panel.names)
    compact = compact_graph(extended)
    for kind, graph in (("extended", extended), ("compact", compact)):
        acyclic, witness = is_acyclic(graph)
        if not acyclic:
            labels = " -> ".join(graph.nodes[v].label for v in witness)
            print(f"stn: {kind} graph contains a cycle: {labels}", file=sys.stderr)
    leaks = risk_out_edges(compact)
    if leaks:
        print(f"stn: risk parameter has outgoing edges: {sorted(leaks)}", file=sys.stderr)

    scale = scale_from_coefficients(coeffs, panel.names, Normalization.UNIT_MAX)
    if scale.degenerate:
        print("stn: all importance scores are zero at this penalty", file=sys.stderr)

    _write(
        out / "coefficients.json",
        coefficients_to_json(
            coeffs, panel.names, lam, alpha, report.objective_value, report.kkt_residual
        ),
    )
    _write(out / "extended.dot", export_dot(extended))
    _write(out / "compact.dot", export_dot(compact))
    _write(out / "adjacency_extended.csv", export_adjacency(extended)[1])
    _write(out / "adjacency_compact.csv", export_adjacency(compact)[1])
    _write(out / "importance.csv", importance_to_csv(scale))
    if cv_result is not None:
        _write(out / "cv.csv", cv_to_csv(cv_result))
    _write(
        out / "manifest.json",
        _manifest(
            "reconstruct",
            args,
            {
                "input_path": args.input,
                "input_sha256": _sha256(args.input),
                "risk_variable": args.risk,
                "logit": args.logit,
                "panel_standardized": True,
                "mask": {"p": mask.p, "n_frozen": mask.n_frozen},
                "lambda": lam,
                "lambda_selection": "cv_min" if cv_result is not None else "fixed",
                "seed": None,
            },
        ),
    )
    return 0


def cmd_importance(parser: argparse.ArgumentParser, args) -> int:
    if not args.input or not args.risk:
        parser.error("--input and --risk are required")
    _validate_solver_flags(parser, args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    panel = _load_panel(args)
    panel_std, _, _ = standardize(panel)
    design = build_design(panel_std)
    mask = _mask_for(panel.p, args)
    alpha = _effective_alpha(args)
    lam, cv_result, _ = _select_lambda(design, mask, alpha, args)
    config = SolverConfig(
        alpha=alpha, lambda_=lam, tol=args.tol, max_sweeps=args.max_sweeps, standardize=True
    )
    coeffs, _ = fit(design, mask, config)
    scale = scale_from_coefficients(coeffs, panel.names, Normalization(args.normalize))
    if scale.degenerate or all(e.score == 0.0 for e in scale.entries):
        print("stn: all importance scores are zero at this penalty", file=sys.stderr)
    _write(out / "importance.csv", importance_to_csv(scale))
    _write(
        out / "manifest.json",
        _manifest(
            "importance",
            args,
            {
                "input_path": args.input,
                "input_sha256": _sha256(args.input),
                "risk_variable": args.risk,
                "logit": args.logit,
                "normalize": args.normalize,
                "mask": {"p": mask.p, "n_frozen": mask.n_frozen},
                "lambda": lam,
                "lambda_selection": "cv_min" if cv_result is not None else "fixed",
                "seed": None,
            },
        ),
    )
    return 0


def cmd_synth_eval(parser: argparse.ArgumentParser, args) -> int:
    if args.p < 2:
        parser.error("--p must be at least 2")
    if args.T < 3:
        parser.error("--T must be at least 3")
    if not (0.0 <= args.density <= 1.0):
        parser.error("--density must be in [0, 1]")
    if args.noise < 0:
        parser.error("--noise must be nonnegative")
    if args.replicates < 1:
        parser.error("--replicates must be at least 1")
    if not (0.0 < args.coef_low <= args.coef_high):
        parser.error("need 0 < --coef-low <= --coef-high")
    _validate_solver_flags(parser, args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    seeds = np.random.SeedSequence(args.seed).generate_state(args.replicates)
    arms = [("lasso", 1.0), ("enet", args.alpha)]
    rows = []
    for r, child_seed in enumerate(seeds):
        spec = SynthSpec(
            p=args.p,
            T=args.T,
            edge_density=args.density,
            coef_low=args.coef_low,
            coef_high=args.coef_high,
            noise_sd=args.noise,
            seed=int(child_seed),
        )
        panel, truth = generate(spec)
        panel_std, _, _ = standardize(panel)
        design = build_design(panel_std)
        mask = _mask_for(args.p, args)
        for penalty, alpha in arms:
            lam, _, _ = _select_lambda(design, mask, alpha, args)
            config = SolverConfig(
                alpha=alpha, lambda_=lam, tol=args.tol, max_sweeps=args.max_sweeps
            )
            estimate, _ = fit(design, mask, config)
            m = edge_metrics(truth, estimate)
            rows.append(
                {
                    "replicate": r,
                    "penalty": penalty,
                    "alpha": alpha,
                    "lambda": lam,
                    "tp_psi": m.psi.true_positive,
                    "fp_psi": m.psi.false_positive,
                    "fn_psi": m.psi.false_negative,
                    "tp_phi": m.phi.true_positive,
                    "fp_phi": m.phi.false_positive,
                    "fn_phi": m.phi.false_negative,
                    "tp": m.combined.true_positive,
                    "fp": m.combined.false_positive,
                    "fn": m.combined.false_negative,
                    "precision": m.precision,
                    "recall": m.recall,
                    "f1": m.f1,
                    "sign_agreement": m.sign_agreement,
                }
            )

    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(rows[0].keys()), lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in row.items()})
    _write(out / "recovery_replicates.csv", buf.getvalue())

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(
        [
            "penalty",
            "mean_precision",
            "sd_precision",
            "mean_recall",
            "sd_recall",
            "mean_f1",
            "sd_f1",
            "median_f1",
            "median_recall",
        ]
    )
    for penalty, _ in arms:
        sub = [row for row in rows if row["penalty"] == penalty]
        cols = {name: [row[name] for row in sub] for name in ("precision", "recall", "f1")}
        sd = (lambda v: statistics.stdev(v) if len(v) > 1 else 0.0)
        writer.writerow(
            [
                penalty,
                repr(statistics.fmean(cols["precision"])),
                repr(sd(cols["precision"])),
                repr(statistics.fmean(cols["recall"])),
                repr(sd(cols["recall"])),
                repr(statistics.fmean(cols["f1"])),
                repr(sd(cols["f1"])),
                repr(statistics.median(cols["f1"])),
                repr(statistics.median(cols["recall"])),
            ]
        )
    _write(out / "recovery_summary.csv", buf.getvalue())
    _write(
        out / "manifest.json",
        _manifest(
            "synth-eval",
            args,
            {
                "p": args.p,
                "T": args.T,
                "density": args.density,
                "noise": args.noise,
                "coef_low": args.coef_low,
                "coef_high": args.coef_high,
                "replicates": args.replicates,
                "seed": args.seed,
            },
        ),
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stn", description="Sparse causal network reconstruction for stress testing"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    rec = sub.add_parser("reconstruct", help="estimate the network and write all artifacts")
    _add_input_flags(rec)
    _add_solver_flags(rec)
    rec.add_argument("--from-manifest", help="re-run the settings stored in a manifest.json")

    imp = sub.add_parser("importance", help="shock-importance scale toward the risk parameter")
    _add_input_flags(imp)
    _add_solver_flags(imp)
    imp.add_argument("--normalize", choices=("raw", "unitmax", "unitsum"), default="unitmax")

    synth = sub.add_parser("synth-eval", help="score support recovery on synthetic panels")
    synth.add_argument("--p", type=int, required=True)
    synth.add_argument("--T", type=int, required=True)
    synth.add_argument("--density", type=float, default=0.15)
    synth.add_argument("--noise", type=float, default=0.1)
    synth.add_argument("--coef-low", type=float, default=0.4)
    synth.add_argument("--coef-high", type=float, default=0.8)
    synth.add_argument("--seed", type=int, default=0)
    synth.add_argument("--replicates", type=int, default=1)
    _add_solver_flags(synth)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    thread_cap()
    handlers = {
        "reconstruct": cmd_reconstruct,
        "importance": cmd_importance,
        "synth-eval": cmd_synth_eval,
    }
    try:
        return handlers[args.command](parser, args)
    except (ValueError, OSError, RuntimeError) as exc:
        print(f"stn: {exc}", file=sys.stderr)
        return 1


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
