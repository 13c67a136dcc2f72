"""Command-line front end.

Subcommands: separate (unmix recorded channels), bench (seeded trial
protocol), inspect (structure of the assembled Newton operator), mix
(generate mixed test data).  Report paths write delimited output plus a
rendered PNG figure, and every output directory receives a run manifest.

Exit codes: 0 success, 2 unreadable or malformed input, 3 optimizer failure.
"""

import argparse
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import __version__
from .costs import CostEvaluation, make_neg_kurtosis, make_neg_kurtosis_squared
from .dataio import (
    DataFormatError,
    RunManifest,
    read_channels_csv,
    read_matrix_csv,
    read_wav,
    write_channels_csv,
    write_manifest,
    write_matrix_csv,
    write_trace_jsonl,
    write_wav,
)
from .ica import amari_index, make_mixing, make_sources, run_ica
from .newton import assemble, sparsity_report
from .optimizer import (
    FAILURE_TERMINATIONS,
    LEVENBERG_MARQUARDT,
    MAX_ITER,
    PURE_NEWTON,
    OptimizerConfig,
    run,
)
from .plots import (
    save_bench_figure,
    save_sparsity_figure,
    save_stepnorm_figure,
    save_trace_figure,
)

MODE_ALIASES = {
    "lm": LEVENBERG_MARQUARDT,
    "newton": PURE_NEWTON,
    "pure-newton": PURE_NEWTON,
}

COST_FACTORIES = {
    "kurtosis": make_neg_kurtosis,
    "kurtosis2": make_neg_kurtosis_squared,
}

BENCH_KINDS = ("uniform", "laplace", "twopoint")


def worker_count(trials: int) -> int:
    """Thread cap for fan-out work, taken from ORTHNEWTON_THREADS."""
    raw = os.environ.get("ORTHNEWTON_THREADS", "1")
    try:
        cap = int(raw)
    except ValueError:
        raise DataFormatError(f"ORTHNEWTON_THREADS must be an integer, got {raw!r}")
    return max(1, min(trials, cap))


def add_common_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--cost", choices=sorted(COST_FACTORIES), default="kurtosis2",
                        help="marginal contrast family (default: kurtosis2)")
    parser.add_argument("--mode", choices=sorted(MODE_ALIASES), default="lm",
                        help="update rule (default: lm)")
    parser.add_argument("--lambda0", type=float, default=50.0,
                        help="initial damping (default: 50)")
    parser.add_argument("--alpha", type=float, default=10.0,
                        help="damping escalation factor (default: 10)")
    parser.add_argument("--lambda-max", type=float, default=1e12,
                        help="damping ceiling; exceeding it fails the run "
                             "(default: 1e12)")
    parser.add_argument("--max-iter", type=int, default=200,
                        help="outer iteration cap (default: 200)")
    parser.add_argument("--tol-step", type=float, default=1e-10,
                        help="step-norm stopping tolerance (default: 1e-10)")
    parser.add_argument("--tol-cost", type=float, default=1e-12,
                        help="cost-change stopping tolerance (default: 1e-12)")
    parser.add_argument("--seed", type=int, default=0,
                        help="base seed for all randomness (default: 0)")
    parser.add_argument("--out", default=".",
                        help="output file or directory (default: current directory)")


def config_from_args(args) -> OptimizerConfig:
    return OptimizerConfig(
        mode=MODE_ALIASES[args.mode],
        lambda0=args.lambda0,
        alpha=args.alpha,
        lambda_min=min(1e-12, args.lambda0),
        lambda_max=args.lambda_max,
        max_iter=args.max_iter,
        tol_step=args.tol_step,
        tol_cost=args.tol_cost,
        seed=args.seed,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="orthnewton",
        description="Damped Newton updates on the orthogonal group for "
                    "kurtosis-contrast source separation.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_sep = sub.add_parser("separate", help="unmix recorded channels")
    p_sep.add_argument("--input", nargs="+", required=True,
                       help="one channel CSV, or one WAV file per channel")
    p_sep.add_argument("--mixing-file", help="ground-truth mixing matrix CSV")
    p_sep.add_argument("--mixing-seed", type=int,
                       help="seed that generated the ground-truth mixing")
    add_common_flags(p_sep)
    p_sep.set_defaults(func=cmd_separate)

    p_bench = sub.add_parser("bench", help="seeded three-source trial protocol")
    p_bench.add_argument("--trials", type=int, default=20)
    p_bench.add_argument("--samples", type=int, default=10000)
    p_bench.add_argument("--fixed-iters", type=int, default=None,
                         help="disable tolerances and run exactly this many iterations")
    p_bench.add_argument("--near-solution", action="store_true",
                         help="emit the step-norm decay of a Newton run started "
                              "near the optimum")
    add_common_flags(p_bench)
    p_bench.set_defaults(func=cmd_bench)

    p_inspect = sub.add_parser("inspect", help="structure of the assembled operator")
    p_inspect.add_argument("--n", type=int, required=True, help="channel count")
    add_common_flags(p_inspect)
    p_inspect.set_defaults(func=cmd_inspect)

    p_mix = sub.add_parser("mix", help="generate mixed test data")
    p_mix.add_argument("--synthetic",
                       help="comma-separated source kinds, e.g. uniform,laplace,twopoint")
    p_mix.add_argument("--sources", nargs="+", help="WAV files, one source per file")
    p_mix.add_argument("--samples", type=int, default=10000)
    add_common_flags(p_mix)
    p_mix.set_defaults(func=cmd_mix)

    return parser


def load_channels(paths) -> tuple[np.ndarray, list[str], int | None]:
    """Load one CSV or a set of WAV files into an (n, t) matrix."""
    paths = [Path(p) for p in paths]
    if len(paths) == 1 and paths[0].suffix.lower() == ".csv":
        x, names = read_channels_csv(paths[0])
        return x, names, None
    if all(p.suffix.lower() == ".wav" for p in paths):
        rows, rate = [], None
        for p in paths:
            data, r = read_wav(p)
            if rate is None:
                rate = r
            elif r != rate:
                raise DataFormatError(f"{p}: sample rate {r} differs from {rate}")
            rows.append(data)
        lengths = {len(row) for row in rows}
        if len(lengths) != 1:
            raise DataFormatError(f"WAV inputs differ in length: {sorted(lengths)}")
        return np.vstack(rows), [p.stem for p in paths], rate
    raise DataFormatError("inputs must be a single CSV or a set of WAV files")


def cmd_separate(args) -> int:
    x, names, rate = load_channels(args.input)
    n = x.shape[0]
    mixing = None
    if args.mixing_file is not None:
        mixing = read_matrix_csv(args.mixing_file)
        if mixing.shape != (n, n):
            raise DataFormatError(
                f"{args.mixing_file}: mixing matrix shape {mixing.shape} "
                f"does not match {n} channels")
    elif args.mixing_seed is not None:
        mixing = make_mixing(n, args.mixing_seed).a

    config = config_from_args(args)
    cost = COST_FACTORIES[args.cost]()
    result, report = run_ica(x, cost, config=config, mixing=mixing)

    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    outputs = []

    unmixed_csv = outdir / "unmixed.csv"
    write_channels_csv(unmixed_csv, result.y_final,
                       names=[f"out{i + 1}" for i in range(n)])
    outputs.append(str(unmixed_csv))
    if rate is not None:
        peak = max(np.abs(result.y_final).max(), 1e-12)
        for i in range(n):
            wav_path = outdir / f"unmixed_ch{i + 1}.wav"
            write_wav(wav_path, result.y_final[i] / peak * 0.99, rate=rate)
            outputs.append(str(wav_path))

    trace_path = outdir / "trace.jsonl"
    write_trace_jsonl(trace_path, result.trace)
    outputs.append(str(trace_path))
    if result.trace:
        outputs.append(save_trace_figure(outdir / "trace.png", result.trace))

    summary = {
        "termination": result.termination,
        "iterations": len(result.trace),
        "final_cost": result.trace[-1].f if result.trace else None,
    }
    if report is not None:
        summary.update({
            "crosstalk_mean_percent": report.mean_percent,
            "crosstalk_per_channel": report.per_channel.tolist(),
            "permutation": report.permutation.tolist(),
            "is_permutation": report.is_permutation,
            "amari_index": amari_index(report.g),
        })
    report_path = outdir / "report.json"
    _write_json(report_path, summary)
    outputs.append(str(report_path))

    manifest = RunManifest(
        command="separate",
        argv=_argv_list(args),
        config=asdict(config),
        inputs=[str(p) for p in args.input],
        seeds={"seed": args.seed, "mixing_seed": args.mixing_seed},
        outputs=outputs,
        version=__version__,
    )
    write_manifest(outdir / "manifest.json", manifest)

    print(f"separate: {result.termination} after {len(result.trace)} iterations")
    if result.trace:
        print(f"separate: final cost {result.trace[-1].f:.12g}")
    if report is not None:
        print(f"separate: mean crosstalk {report.mean_percent:.4f}%")
    return 3 if result.termination in FAILURE_TERMINATIONS else 0


def bench_trial(k: int, base_seed: int, samples: int, config, cost):
    """One seeded trial of the three-source protocol."""
    sources = make_sources(BENCH_KINDS, samples, seed=[base_seed, k, 0])
    mixing = make_mixing(len(BENCH_KINDS), seed=[base_seed, k, 1])
    x = mixing.a @ sources
    started = time.perf_counter()
    result, report = run_ica(x, cost, config=config, mixing=mixing)
    elapsed = time.perf_counter() - started
    return {
        "trial": k,
        "crosstalk_mean_percent": report.mean_percent,
        "iterations": len(result.trace),
        "termination": result.termination,
        "wall_seconds": elapsed,
        "monotone": all(b.f <= a.f for a, b in zip(result.trace, result.trace[1:])),
    }


def cmd_bench(args) -> int:
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    config = config_from_args(args)
    cost = COST_FACTORIES[args.cost]()
    outputs = []

    if args.near_solution:
        norms = near_solution_stepnorms(args.seed, args.samples, cost)
        steps_path = outdir / "stepnorms.csv"
        with open(steps_path, "w", encoding="utf-8") as fh:
            fh.write("iteration,step_norm\n")
            for t, v in enumerate(norms):
                fh.write(f"{t},{v:.17g}\n")
        outputs.append(str(steps_path))
        outputs.append(save_stepnorm_figure(outdir / "stepnorms.png", norms))
        print("bench: near-solution step norms:",
              " ".join(f"{v:.3e}" for v in norms))
    else:
        if args.fixed_iters is not None:
            config = OptimizerConfig(
                mode=config.mode, lambda0=config.lambda0, alpha=config.alpha,
                lambda_min=config.lambda_min, lambda_max=config.lambda_max,
                max_iter=args.fixed_iters, tol_step=0.0, tol_cost=0.0,
                seed=config.seed)
        workers = worker_count(args.trials)
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                rows = list(pool.map(
                    lambda k: bench_trial(k, args.seed, args.samples, config, cost),
                    range(args.trials)))
        else:
            rows = [bench_trial(k, args.seed, args.samples, config, cost)
                    for k in range(args.trials)]
        rows.sort(key=lambda row: row["trial"])

        trials_path = outdir / "trials.csv"
        with open(trials_path, "w", encoding="utf-8") as fh:
            fh.write("trial,crosstalk_mean_percent,iterations,termination,"
                     "wall_seconds\n")
            for row in rows:
                fh.write(f"{row['trial']},{row['crosstalk_mean_percent']:.17g},"
                         f"{row['iterations']},{row['termination']},"
                         f"{row['wall_seconds']:.6f}\n")
        outputs.append(str(trials_path))

        talk = [row["crosstalk_mean_percent"] for row in rows]
        converged = sum(row["termination"] not in (MAX_ITER,) + FAILURE_TERMINATIONS
                        for row in rows)
        summary = {
            "trials": args.trials,
            "samples": args.samples,
            "crosstalk_mean_percent": float(np.mean(talk)),
            "crosstalk_median_percent": float(np.median(talk)),
            "converged": converged,
            "failed": sum(row["termination"] in FAILURE_TERMINATIONS for row in rows),
            "total_wall_seconds": float(sum(row["wall_seconds"] for row in rows)),
        }
        _write_json(outdir / "summary.json", summary)
        outputs.append(str(outdir / "summary.json"))
        outputs.append(save_bench_figure(outdir / "bench.png", talk))
        print(f"bench: {args.trials} trials, mean crosstalk "
              f"{summary['crosstalk_mean_percent']:.4f}%, median "
              f"{summary['crosstalk_median_percent']:.4f}%, "
              f"{converged} converged, {summary['failed']} failed, "
              f"{summary['total_wall_seconds']:.2f}s total")
        if rows and all(row["termination"] in FAILURE_TERMINATIONS for row in rows):
            return 3

    manifest = RunManifest(
        command="bench",
        argv=_argv_list(args),
        config=asdict(config),
        inputs=[],
        seeds={"seed": args.seed},
        outputs=outputs,
        version=__version__,
        extra={"trials": args.trials, "samples": args.samples,
               "kinds": list(BENCH_KINDS)},
    )
    write_manifest(outdir / "manifest.json", manifest)
    return 0


def near_solution_stepnorms(seed: int, samples: int, cost) -> list[float]:
    """Step norms of a pure Newton run started a small rotation away from a
    converged unmixing solution."""
    sources = make_sources(BENCH_KINDS, samples, seed=[seed, 0, 0])
    mixing = make_mixing(len(BENCH_KINDS), seed=[seed, 0, 1])
    from .ica import prewhiten
    from .operators import expm_skew, skew_from_coords

    x_white, _ = prewhiten(mixing.a @ sources)
    settle = run(cost, x_white, config=OptimizerConfig())
    rng = np.random.default_rng([seed, 0, 2])
    n = x_white.shape[0]
    coords = rng.standard_normal(n * (n - 1) // 2)
    coords *= 0.03 / np.linalg.norm(coords)
    c0 = expm_skew(skew_from_coords(coords, n)) @ settle.c_final
    newton = run(cost, x_white, c0=c0,
                 config=OptimizerConfig(mode=PURE_NEWTON, tol_step=1e-14,
                                        max_iter=12))
    return [rec.step_norm for rec in newton.trace]


def cmd_inspect(args) -> int:
    if args.n < 2:
        raise DataFormatError("inspect needs --n of at least 2")
    rng = np.random.default_rng(args.seed)
    n = args.n
    r = rng.standard_normal((n, n))
    u = np.empty((n, n, n))
    for i in range(n):
        s = rng.standard_normal((n, n))
        u[i] = 0.5 * (s + s.T)
    system = assemble(CostEvaluation(f=0.0, r=r, u=u), 0.0)
    report = sparsity_report(system)

    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    rows, cols = np.nonzero(system.m_full)
    coords_path = outdir / "sparsity_coords.csv"
    with open(coords_path, "w", encoding="utf-8") as fh:
        fh.write("row,col\n")
        for rr, cc in zip(rows, cols):
            fh.write(f"{rr},{cc}\n")
    fig_path = save_sparsity_figure(
        outdir / "sparsity.png", rows, cols, n * n,
        title=f"assembled operator, n={n}")

    manifest = RunManifest(
        command="inspect",
        argv=_argv_list(args),
        config={"n": n},
        inputs=[],
        seeds={"seed": args.seed},
        outputs=[str(coords_path), fig_path],
        version=__version__,
    )
    write_manifest(outdir / "manifest.json", manifest)

    print(f"inspect: n={report.n}, antisymmetric block {report.antisym_size}x"
          f"{report.antisym_size}, identity block {report.sym_size}x{report.sym_size}")
    print(f"inspect: off-diagonal nonzeros {report.nnz_offdiag} "
          f"(bound {report.bound})")
    print(f"inspect: coordinates written to {coords_path}")
    return 0


def cmd_mix(args) -> int:
    if bool(args.synthetic) == bool(args.sources):
        raise DataFormatError("mix needs exactly one of --synthetic or --sources")

    rate = None
    if args.synthetic:
        kinds = [k.strip() for k in args.synthetic.split(",") if k.strip()]
        try:
            sources = make_sources(kinds, args.samples, seed=[args.seed, 1])
        except ValueError as exc:
            raise DataFormatError(str(exc)) from None
        names = kinds
    else:
        sources, names, rate = load_channels(args.sources)
    n = sources.shape[0]

    mixing = make_mixing(n, args.seed)
    mixed = mixing.a @ sources

    out = Path(args.out)
    if out.suffix.lower() == ".csv":
        outdir = out.parent if str(out.parent) else Path(".")
        outdir.mkdir(parents=True, exist_ok=True)
        mixed_paths = [out]
        write_channels_csv(out, mixed, names=[f"ch{i + 1}" for i in range(n)])
        mixing_path = out.with_name(out.stem + "_mixing.csv")
        manifest_path = out.with_name(out.stem + "_manifest.json")
    else:
        outdir = out
        outdir.mkdir(parents=True, exist_ok=True)
        mixing_path = outdir / "mixing_matrix.csv"
        manifest_path = outdir / "manifest.json"
        if rate is not None:
            scale = max(np.abs(mixed).max() / 0.99, 1.0)
            mixed_paths = []
            for i in range(n):
                p = outdir / f"mixed_ch{i + 1}.wav"
                write_wav(p, mixed[i] / scale, rate=rate)
                mixed_paths.append(p)
        else:
            mixed_paths = [outdir / "mixed.csv"]
            write_channels_csv(mixed_paths[0], mixed,
                               names=[f"ch{i + 1}" for i in range(n)])

    write_matrix_csv(mixing_path, mixing.a)
    manifest = RunManifest(
        command="mix",
        argv=_argv_list(args),
        config={"samples": args.samples, "kinds": names},
        inputs=[str(p) for p in (args.sources or [])],
        seeds={"seed": args.seed, "mixing_seed": args.seed,
               "source_seed": [args.seed, 1]},
        outputs=[str(p) for p in mixed_paths] + [str(mixing_path)],
        version=__version__,
    )
    write_manifest(manifest_path, manifest)
    print(f"mix: wrote {', '.join(str(p) for p in mixed_paths)}")
    print(f"mix: mixing matrix in {mixing_path}")
    return 0


def _write_json(path, payload) -> None:
    import json

    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _argv_list(args) -> list[str]:
    return [f"{k}={v!r}" for k, v in sorted(vars(args).items()) if k != "func"]


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (DataFormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def script_entry() -> None:
    sys.exit(main())
