"""Command-line interface: solve / bench / validate / gen / kernel-bench."""

import argparse
import os
import sys
from pathlib import Path

from . import bench as bench_mod
from . import kernel_bench
from .fgm import FGMConfig, fgm_solve, universal_fw_solve
from .gm import GMConfig, gm_solve
from .mirror_prox import MPConfig, mirror_prox_solve, saddle_solve
from .model import SaddleModel
from .problems import make_instance, save_instance, verify_saved_instance


def _parse_value(text):
    low = text.lower()
    if low in ("true", "false"):
        return low == "true"
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def _params(pairs):
    out = {}
    for pair in pairs or []:
        if "=" not in pair:
            raise SystemExit(f"bad --param {pair!r}, expected key=value")
        k, v = pair.split("=", 1)
        out[k] = _parse_value(v)
    return out


def _default_outdir():
    return Path(os.environ.get("MODELPROX_OUTPUT_DIR", "."))


def _cmd_solve(args):
    inst = make_instance(args.problem, **_params(args.param))
    out = _default_outdir() / (args.out or f"{args.problem}__{args.solver}__trace.csv")
    if args.solver == "gm":
        config = GMConfig(L0=args.L0, max_iterations=args.max_iter,
                          v0_bound=args.v0_bound,
                          target_epsilon=args.epsilon if args.v0_bound else None)
        run = gm_solve(inst.model, inst.setup, inst.Q, inst.start, config)
        run.to_csv(out)
        print(f"gm: {run.iterations} iterations, best f_delta = "
              f"{run.f_delta_history[run.best_index]:.9g}, trace -> {out}")
    elif args.solver == "fgm":
        config = FGMConfig(L0=args.L0, mu=args.mu, max_iterations=args.max_iter)
        run = fgm_solve(inst.model, inst.setup, inst.Q, inst.start, config)
        run.to_csv(out)
        print(f"fgm: {run.iterations} iterations, final f_delta = "
              f"{run.f_delta_history[-1]:.9g}, trace -> {out}")
    elif args.solver == "fw":
        run = universal_fw_solve(inst.model, inst.Q, inst.setup, inst.start,
                                 args.epsilon, L0=args.L0,
                                 max_iterations=args.max_iter)
        run.to_csv(out)
        print(f"fw: {run.iterations} iterations, certified gap "
              f"{run.extras['certified_gap']:.3e}, trace -> {out}")
    else:
        config = MPConfig(epsilon=args.epsilon, L0=args.L0,
                          divergence_bound=inst.divergence_bound,
                          max_iterations=args.max_iter)
        if isinstance(inst.model, SaddleModel):
            run = saddle_solve(inst.model, inst.setup, inst.Q, config,
                               z0=inst.start)
            extra = f", duality gap {run.gap_estimate:.3e}" \
                    f" ({'exact' if run.gap_exact else 'estimate'})"
        else:
            run = mirror_prox_solve(inst.model, inst.setup, inst.Q, config,
                                    z0=inst.start)
            extra = ""
        run.to_csv(out)
        print(f"mirror-prox: {run.iterations} iterations, S_N = {run.S_N:.6g}"
              f"{extra}, trace -> {out}")
    return 0


def _cmd_bench(args):
    spec = bench_mod.load_spec(args.spec, output_dir=args.output_dir,
                               no_timing=args.no_timing or None,
                               iteration_cap=args.iteration_cap)
    if args.output_dir is None and "MODELPROX_OUTPUT_DIR" in os.environ:
        spec.output_dir = Path(os.environ["MODELPROX_OUTPUT_DIR"]) / spec.output_dir
    report = bench_mod.run_bench(spec)
    for kind in ("iterations_vs_eps", "time_vs_eps", "convergence"):
        bench_mod.emit_plot_data(report, kind)
    n_ok = sum(1 for a in report.acceptance if a["passed"])
    print(f"bench {spec.name}: {len(report.rows)} rows, "
          f"{n_ok}/{len(report.acceptance)} registered acceptance rows pass")
    return 0 if report.acceptance_passed else 1


def _cmd_validate(args):
    inst = make_instance(args.problem, **_params(args.param))
    report = inst.validate(samples=args.samples, rng_seed=args.seed)
    print(report.to_json())
    return 0 if report.passed else 1


def _cmd_gen(args):
    inst = make_instance(args.problem, **_params(args.param))
    outdir = _default_outdir() / (args.out or f"{args.problem}-instance")
    manifest = save_instance(inst, outdir)
    ok = verify_saved_instance(outdir)
    print(f"wrote {manifest} (regeneration check: {'ok' if ok else 'FAILED'})")
    return 0 if ok else 1


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="modelprox",
        description="Adaptive model-based first-order solvers and benchmarks",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="run one solver on one instance")
    p.add_argument("--problem", required=True)
    p.add_argument("--param", action="append", metavar="KEY=VALUE")
    p.add_argument("--solver", default="gm",
                   choices=["gm", "fgm", "mirror-prox", "fw"])
    p.add_argument("--L0", type=float, default=1.0)
    p.add_argument("--mu", type=float, default=0.0)
    p.add_argument("--epsilon", type=float, default=1e-2)
    p.add_argument("--max-iter", type=int, default=1000)
    p.add_argument("--v0-bound", type=float, default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("bench", help="run a TOML bench spec")
    p.add_argument("spec")
    p.add_argument("--output-dir", default=None)
    p.add_argument("--no-timing", action="store_true")
    p.add_argument("--iteration-cap", type=int, default=None)
    p.set_defaults(func=_cmd_bench)

    p = sub.add_parser("validate", help="model validity report for an instance")
    p.add_argument("--problem", required=True)
    p.add_argument("--param", action="append", metavar="KEY=VALUE")
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--seed", type=int, default=42)
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("gen", help="write an instance manifest + data blobs")
    p.add_argument("--problem", required=True)
    p.add_argument("--param", action="append", metavar="KEY=VALUE")
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_gen)

    p = sub.add_parser("kernel-bench",
                       help="time the jitted kernels against pure numpy")
    p.add_argument("--repeats", type=int, default=5)
    p.add_argument("--size", type=int, default=100)
    p.set_defaults(func=lambda a: kernel_bench.run(repeats=a.repeats, size=a.size))

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
