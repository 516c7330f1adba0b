"""Command-line front end.

Subcommands map onto the library one to one:

* ``run``           - execute an experiment config (``harness.run_experiment``)
* ``analyze``       - assumption report plus Condorcet/total-order subset sweep
* ``bounds``        - regret-bound curves as CSV over a log-spaced time grid
* ``verify-lemmas`` - posterior tail-lemma sweeps, pass/fail table
* ``gen-matrix``    - write a planted or cyclic preference matrix

Exit codes: 0 success, 1 usage or invalid input, 2 verification failure,
3 I/O failure.
"""

from __future__ import annotations

import argparse
import math
import sys

import numpy as np

from .bounds import (
    BoundParams,
    expected_regret_bound,
    gaps_from_deltas,
    high_prob_regret_curve,
)
from .errors import DuelbandError, VerificationFailure
from .harness import emit_plot_data, load_config, resolve_matrix, run_experiment
from .posterior import verify_beta_estimate, verify_envelope, verify_tail_shrinkage
from .preference import (
    analyze_assumptions,
    beat_relation,
    condorcet_subset_probability,
    gaps,
    generate_cycle,
    generate_planted,
    load_matrix,
    save_matrix,
    total_ordering_probability_mc,
)

__all__ = ["main"]


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse defaults to exit code 2 on bad flags; we reserve 2 for
    verification failures, so usage problems surface as exceptions and
    main() turns them into exit 1."""

    def error(self, message):
        raise _UsageError(f"{self.prog}: {message}")


def _build_parser() -> _Parser:
    parser = _Parser(prog="duelband",
                     description="Dueling-bandit simulation and bound checking")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute an experiment config")
    p_run.add_argument("config", help="JSON experiment config")
    p_run.add_argument("--plot-data", action="store_true",
                       help="also write regret.csv/accuracy.csv to the "
                            "config's output_dir")
    p_run.add_argument("--bound-delta", type=float, default=None,
                       help="overlay theory curves at this confidence "
                            "(implies --plot-data)")
    p_run.set_defaults(func=_cmd_run)

    p_an = sub.add_parser("analyze",
                          help="assumption report and subset-probability sweep")
    p_an.add_argument("matrix", help="matrix file (CSV or JSON)")
    p_an.add_argument("--mc-samples", type=int, default=10000,
                      help="samples for the total-order Monte Carlo column")
    p_an.add_argument("--seed", type=int, default=0)
    p_an.add_argument("--out", default=None,
                      help="write the sweep CSV here instead of stdout")
    p_an.set_defaults(func=_cmd_analyze)

    p_b = sub.add_parser("bounds", help="regret-bound curves as CSV")
    p_b.add_argument("--alpha", type=float, required=True)
    p_b.add_argument("--delta", type=float, default=0.05,
                     help="confidence for the high-probability curve")
    src = p_b.add_mutually_exclusive_group(required=True)
    src.add_argument("--matrix", help="take gaps from this matrix file")
    src.add_argument("--gaps", help="comma-separated gap list, winner's 0 "
                                    "included, e.g. 0,0.1,0.2")
    p_b.add_argument("--t-min", type=int, default=10)
    p_b.add_argument("--t-max", type=int, default=100_000)
    p_b.add_argument("--points", type=int, default=20)
    p_b.add_argument("--out", default=None,
                     help="write CSV here instead of stdout")
    p_b.set_defaults(func=_cmd_bounds)

    p_v = sub.add_parser("verify-lemmas",
                         help="run the posterior tail-lemma sweeps")
    p_v.add_argument("--n-max", type=int, default=50,
                     help="sample-size ceiling for the identity sweep")
    p_v.add_argument("--envelope-n-max", type=int, default=200,
                     help="sample-size ceiling for shrinkage and envelope")
    p_v.add_argument("--tol", type=float, default=1e-12,
                     help="equality tolerance for the identity sweep")
    p_v.add_argument("--rel-margin", type=float, default=1e-13,
                     help="required relative shrinkage per extra sample")
    p_v.add_argument("--log-slack", type=float, default=1e-9,
                     help="log-space slack for the envelope comparisons")
    p_v.set_defaults(func=_cmd_verify)

    p_g = sub.add_parser("gen-matrix", help="write a synthetic matrix")
    g_sub = p_g.add_subparsers(dest="kind", required=True)
    g_pl = g_sub.add_parser("planted", help="arm 0 beats everyone")
    g_pl.add_argument("--k", type=int, required=True)
    g_pl.add_argument("--delta-min", type=float, required=True)
    g_pl.add_argument("--delta-max", type=float, required=True)
    g_pl.add_argument("--seed", type=int, default=0)
    g_pl.add_argument("--out", required=True,
                      help="output path; .json for JSON, anything else CSV")
    g_pl.set_defaults(func=_cmd_gen_planted)
    g_cy = g_sub.add_parser("cycle", help="rotational cycle at p=0.6")
    g_cy.add_argument("--k", type=int, required=True)
    g_cy.add_argument("--out", required=True)
    g_cy.set_defaults(func=_cmd_gen_cycle)

    return parser


def _cmd_run(args) -> int:
    cfg = load_config(args.config)
    agg = run_experiment(cfg)
    last = agg.ts.size - 1
    print(f"runs={agg.runs} horizon={int(agg.ts[last])} winner={agg.winner}")
    print(f"final mean regret {agg.mean_regret[last]:.4f} "
          f"(min {agg.min_regret[last]:.4f}, max {agg.max_regret[last]:.4f})")
    print(f"final accuracy {agg.accuracy[last]:.4f}")
    if agg.violated_runs is not None:
        print(f"coverage violations in {agg.violated_runs}/{agg.runs} runs")

    if args.plot_data or args.bound_delta is not None:
        if cfg.output_dir is None:
            raise _UsageError("duelband run: --plot-data needs an "
                              "'output_dir' in the config")
        overlays = {}
        if args.bound_delta is not None:
            if cfg.algorithm != "rucb":
                raise _UsageError("duelband run: bound overlays apply to "
                                  "the rucb algorithm only")
            g = gaps(resolve_matrix(cfg))
            params = BoundParams(alpha=cfg.alpha, k=g.delta.size,
                                 delta=args.bound_delta, gaps=g)
            overlays["high_prob_bound"] = high_prob_regret_curve(params, agg.ts)
            if cfg.alpha > 1.0:
                overlays["expected_bound"] = expected_regret_bound(params, agg.ts)
        regret_path, accuracy_path = emit_plot_data(agg, overlays,
                                                    cfg.output_dir)
        print(f"plot data: {regret_path} {accuracy_path}")
    return 0


def _cmd_analyze(args) -> int:
    m = load_matrix(args.matrix)
    rep = analyze_assumptions(m)
    print(f"arms: {m.k}")
    print(f"condorcet winner: {rep.condorcet if rep.condorcet is not None else 'none'}")
    print(f"borda winner: {rep.borda}")
    if rep.total_ordering_holds:
        print(f"total ordering: yes ({' > '.join(str(a) for a in rep.total_order)})")
    else:
        print("total ordering: no")
    gamma = f"{rep.gamma:.6g}" if rep.gamma is not None else "n/a (no total ordering)"
    print(f"relaxed stochastic transitivity factor gamma: {gamma}")
    print(f"strong stochastic transitivity: "
          f"{'yes' if rep.strong_transitivity_holds else 'no'}")

    b = beat_relation(m)
    lines = ["subset_size,condorcet_probability,total_order_probability_mc"]
    for size in range(1, m.k + 1):
        pc = condorcet_subset_probability(b, size)
        pt = total_ordering_probability_mc(b, size, samples=args.mc_samples,
                                           seed=args.seed)
        lines.append(f"{size},{pc!r},{pt!r}")
    text = "\n".join(lines) + "\n"
    if args.out is not None:
        with open(args.out, "w") as fh:
            fh.write(text)
        print(f"sweep written to {args.out}")
    else:
        print(text, end="")
    return 0


def _cmd_bounds(args) -> int:
    if args.matrix is not None:
        g = gaps(load_matrix(args.matrix))
    else:
        try:
            deltas = [float(x) for x in args.gaps.split(",")]
        except ValueError:
            raise _UsageError(f"duelband bounds: could not parse --gaps "
                              f"{args.gaps!r}")
        g = gaps_from_deltas(deltas)
    params = BoundParams(alpha=args.alpha, k=g.delta.size, delta=args.delta,
                         gaps=g)
    if args.t_min < 1 or args.t_max < args.t_min:
        raise _UsageError("duelband bounds: need 1 <= t-min <= t-max")
    if args.points < 1:
        raise _UsageError("duelband bounds: need at least one grid point")
    grid = np.logspace(math.log10(args.t_min), math.log10(args.t_max),
                       args.points)
    ts = sorted({min(max(int(round(float(x))), args.t_min), args.t_max)
                 for x in grid})

    with_expected = params.alpha > 1.0
    header = "t,high_prob_bound" + (",expected_bound" if with_expected else "")
    lines = [header]
    for t in ts:
        row = f"{t},{float(high_prob_regret_curve(params, t))!r}"
        if with_expected:
            row += f",{float(expected_regret_bound(params, t))!r}"
        lines.append(row)
    text = "\n".join(lines) + "\n"
    if args.out is not None:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        print(text, end="")
    return 0


def _cmd_verify(args) -> int:
    sweeps = [
        lambda: verify_beta_estimate(n_max=args.n_max, tol=args.tol),
        lambda: verify_tail_shrinkage(n_max=args.envelope_n_max,
                                      rel_margin=args.rel_margin),
        lambda: verify_envelope(n_max=args.envelope_n_max,
                                log_slack=args.log_slack),
    ]
    failed = False
    print(f"{'lemma':<28} {'status':<6} {'cases':>6}  detail")
    for sweep in sweeps:
        try:
            rep = sweep()
        except VerificationFailure as e:
            failed = True
            witness = ", ".join(f"{k}={v!r}" for k, v in e.witness.items())
            print(f"{e.name:<28} {'FAIL':<6} {'-':>6}  {witness}")
            continue
        detail = f"max deviation {rep.max_deviation:.3e}"
        if math.isfinite(rep.min_margin):
            detail += f", min margin {rep.min_margin:.3e}"
        if rep.worst is not None:
            detail += f", worst at {rep.worst}"
        print(f"{rep.name:<28} {'PASS':<6} {rep.cases:>6}  {detail}")
    return 2 if failed else 0


def _cmd_gen_planted(args) -> int:
    m = generate_planted(args.k, args.delta_min, args.delta_max, seed=args.seed)
    save_matrix(m, args.out)
    print(f"planted {args.k}-arm matrix written to {args.out}")
    return 0


def _cmd_gen_cycle(args) -> int:
    m = generate_cycle(args.k)
    save_matrix(m, args.out)
    print(f"cyclic {args.k}-arm matrix written to {args.out}")
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as e:
        print(str(e), file=sys.stderr)
        return 1
    except SystemExit as e:  # --help and friends
        return int(e.code or 0)
    try:
        return args.func(args)
    except _UsageError as e:
        print(str(e), file=sys.stderr)
        return 1
    except VerificationFailure as e:
        print(f"verification failure: {e}", file=sys.stderr)
        return 2
    except DuelbandError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except OSError as e:
        print(f"i/o error: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
