"""Command-line front door.

Subcommands: equilibria, stability, turing-scan, critical-size, simulate,
continue, diagram.  Every run writes a manifest with the fully resolved
configuration and a hash; each output file references that hash, and
identical configurations produce bitwise-identical outputs.

Exit codes: 0 success, 2 partial results (some branch failed), 64 usage
error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .continuation import (ContinuationOptions, Problem, REFERENCE_EVENT_VALUES,
                           continue_branch, full_diagram, _seed_from_homogeneous)
from .errors import InvalidArgumentError
from .grid import GridSpec
from .integrate import IntegratorOptions, integrate
from .model import homogeneous_equilibria
from .params import ModelParams
from .presets import DEFAULT_WINDOW, initial_condition
from .stability import (critical_domain_size, homogeneous_stability,
                        turing_roots)
from .symmetry import classify

USAGE_ERROR = 64
PARTIAL_ERROR = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(USAGE_ERROR)


def _manifest(command: str, config: dict, out_dir: Path) -> str:
    """Write the run manifest; returns its configuration hash."""
    doc = {"command": command, "config": config, "version": __version__}
    digest = hashlib.sha256(
        json.dumps(doc, sort_keys=True).encode()).hexdigest()[:16]
    doc["manifest_hash"] = digest
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "manifest.json", "w", encoding="utf-8") as fh:
        json.dump(doc, fh, sort_keys=True, indent=1)
    return digest


def _write_csv(path: Path, header: str, rows, manifest_hash: str):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# manifest: {manifest_hash}\n")
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(repr(v) if isinstance(v, float) else str(v)
                              for v in row) + "\n")


def _write_json(path: Path, doc: dict, manifest_hash: str):
    doc = dict(doc)
    doc["manifest_hash"] = manifest_hash
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, sort_keys=True, indent=1)


def _load_params(args) -> ModelParams:
    if args.params:
        return ModelParams.load(args.params)
    return ModelParams()


def _add_common(sub):
    sub.add_argument("--params", help="JSON file with parameter overrides")
    sub.add_argument("--grid-n", type=int, default=40,
                     help="number of grid intervals (default 40)")
    sub.add_argument("--out", default="out", help="output directory")
    sub.add_argument("--seed", type=int, default=0, help="noise seed")


def cmd_equilibria(args) -> int:
    params = _load_params(args)
    cfg = {"p_min": args.p_min, "p_max": args.p_max, "steps": args.steps,
           "n_max": args.n_max, "params": params.to_dict()}
    out = Path(args.out)
    digest = _manifest("equilibria", cfg, out)
    rows = []
    for p in np.linspace(args.p_min, args.p_max, args.steps):
        for st in homogeneous_equilibria(float(p), params):
            try:
                rep = homogeneous_stability(st, float(p), params, n_max=args.n_max)
                stable = rep.stable
            except InvalidArgumentError:
                stable = ""
            rows.append((float(p), st.branch_tag, st.B, st.W, st.T, stable))
    _write_csv(out / "equilibria.csv", "p,branch_tag,B,W,T,stable_at_L",
               rows, digest)
    print(f"wrote {out / 'equilibria.csv'} ({len(rows)} rows)")
    return 0


def cmd_stability(args) -> int:
    params = _load_params(args)
    tag = {"upper": "upper", "lower": "lower", "bare": "bare_soil"}[args.branch]
    states = [st for st in homogeneous_equilibria(args.p, params)
              if st.branch_tag == tag]
    if not states:
        print(f"no {args.branch} equilibrium at p={args.p}", file=sys.stderr)
        return PARTIAL_ERROR
    cfg = {"p": args.p, "branch": args.branch, "n_max": args.n_max,
           "params": params.to_dict()}
    out = Path(args.out)
    digest = _manifest("stability", cfg, out)
    rep = homogeneous_stability(states[0], args.p, params, n_max=args.n_max)
    _write_json(out / "stability.json", rep.to_dict(), digest)
    verdict = "stable" if rep.stable else f"unstable (first mode n={rep.first_violating_mode})"
    print(f"{args.branch} branch at p={args.p}: {verdict}")
    return 0


def cmd_turing_scan(args) -> int:
    params = _load_params(args)
    cfg = {"L": args.L, "n_max": args.n_max, "params": params.to_dict()}
    out = Path(args.out)
    digest = _manifest("turing-scan", cfg, out)
    rows = []
    for L in args.L:
        for n in range(1, args.n_max + 1):
            roots = turing_roots(n, L, params)
            if roots:
                for root in roots:
                    rows.append((L, n, root.p_c, int(root.onset)))
            else:
                rows.append((L, n, "", 0))
    _write_csv(out / "turing_scan.csv", "L,n,p_c,onset_flag", rows, digest)
    print(f"wrote {out / 'turing_scan.csv'}")
    return 0


def cmd_critical_size(args) -> int:
    params = _load_params(args)
    cfg = {"params": params.to_dict()}
    out = Path(args.out)
    digest = _manifest("critical-size", cfg, out)
    lstar = critical_domain_size(params)
    _write_json(out / "critical_size.json", {"L_star": lstar}, digest)
    print(f"L* = {lstar}" if lstar is not None else "no critical size in bracket")
    return 0


def cmd_simulate(args) -> int:
    params = _load_params(args)
    grid = GridSpec(L=params.L, N=args.grid_n)
    window = tuple(args.window) if args.window else DEFAULT_WINDOW
    cfg = {"preset": args.preset, "p": args.p, "t_end": args.t_end,
           "rel_tol": args.rel_tol, "abs_tol": args.abs_tol,
           "snapshot_every": args.snapshot_every, "window": list(window),
           "noise": args.noise, "seed": args.seed, "grid_n": args.grid_n,
           "params": params.to_dict()}
    out = Path(args.out)
    digest = _manifest("simulate", cfg, out)
    U0 = initial_condition(args.preset, args.p, grid, params, window=window,
                           noise=args.noise, seed=args.seed)
    opts = IntegratorOptions(rel_tol=args.rel_tol, abs_tol=args.abs_tol,
                             t_end=args.t_end, store_every=args.snapshot_every)
    traj = integrate(U0, args.p, opts, params)
    for i, (t, state) in enumerate(zip(traj.times, traj.states)):
        path = out / f"snapshot_{i:04d}.csv"
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(f"# manifest: {digest}\n# t: {t!r}\n")
            fh.write(state.to_csv())
    rep = classify(traj.final)
    _write_json(out / "run.json", {
        "times": traj.times,
        "termination": traj.termination,
        "n_steps": traj.n_steps,
        "final_shape": rep.profile_shape,
        "final_symmetry_defect": rep.defect,
        "final_classification": rep.classification,
    }, digest)
    print(f"termination={traj.termination} after {traj.n_steps} steps; "
          f"final profile: {rep.profile_shape}")
    return 0


def cmd_continue(args) -> int:
    params = _load_params(args)
    grid = GridSpec(L=params.L, N=args.grid_n)
    problem = Problem(params, grid)
    cfg = {"branch_seed": args.branch_seed, "p_start": args.p_start,
           "direction": args.direction, "grid_n": args.grid_n,
           "params": params.to_dict()}
    out = Path(args.out)
    digest = _manifest("continue", cfg, out)
    tag = "bare_soil" if args.branch_seed == "bare" else "upper"
    seed = _seed_from_homogeneous(problem, tag, args.p_start)
    kind = "turing_onset" if args.branch_seed == "vegetated" else "branch_point"
    branch = continue_branch(problem, seed, direction=args.direction,
                             opts=ContinuationOptions(),
                             provenance=args.branch_seed,
                             branch_point_kind=kind)
    rows = [(pt.p, pt.measures["mean_B"], pt.measures["max_B"],
             pt.measures["l2_B"], pt.n_unstable) for pt in branch.points]
    _write_csv(out / "branch.csv", "p,mean_B,max_B,l2_B,n_unstable", rows, digest)
    _write_json(out / "events.json",
                {"events": [e.to_dict() for e in branch.events],
                 "termination": branch.termination}, digest)
    print(f"{len(branch.points)} points, {len(branch.events)} events, "
          f"termination={branch.termination}")
    return 0


def cmd_diagram(args) -> int:
    params = _load_params(args)
    cfg = {"grid_n": args.grid_n, "params": params.to_dict()}
    out = Path(args.out)
    digest = _manifest("diagram", cfg, out)
    result = full_diagram(params, ContinuationOptions(), N=args.grid_n)
    for br in result.branches:
        rows = [(pt.p, pt.measures["mean_B"], pt.measures["max_B"],
                 pt.measures["l2_B"], pt.n_unstable) for pt in br.points]
        _write_csv(out / f"branch_{br.label}.csv",
                   "p,mean_B,max_B,l2_B,n_unstable", rows, digest)
    _write_json(out / "events.json", {
        "events": [e.to_dict() for e in result.events],
        "failures": result.failures,
        "fold_p": result.fold_p,
    }, digest)
    lines = ["label  kind          p_detected  p_reference  |deviation|"]
    by_label = result.events_by_label()
    for label, ref in REFERENCE_EVENT_VALUES.items():
        ev = by_label.get(label)
        if ev is None:
            lines.append(f"{label:5s}  (not detected)          {ref:>11.2f}")
        else:
            lines.append(f"{label:5s}  {ev.kind:12s}  {ev.p_refined:10.6f}  "
                         f"{ref:>11.2f}  {abs(ev.p_refined - ref):11.6f}")
    for ev in result.events:
        if not ev.label:
            lines.append(f"       {ev.kind:12s}  {ev.p_refined:10.6f}  "
                         f"(unlabeled, branch {ev.branch_label})")
    report = "\n".join(lines) + "\n"
    with open(out / "report.txt", "w", encoding="utf-8") as fh:
        fh.write(f"# manifest: {digest}\n{report}")
    print(report, end="")
    if result.failures:
        print(f"{len(result.failures)} branch failure(s); partial results written",
              file=sys.stderr)
        return PARTIAL_ERROR
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="vegpatterns",
                     description="Vegetation pattern analysis toolkit")
    subs = parser.add_subparsers(dest="command", required=True)

    sp = subs.add_parser("equilibria", help="homogeneous branches over a p range")
    _add_common(sp)
    sp.add_argument("--p-min", type=float, default=0.0)
    sp.add_argument("--p-max", type=float, default=2.0)
    sp.add_argument("--steps", type=int, default=201)
    sp.add_argument("--n-max", type=int, default=64)
    sp.set_defaults(func=cmd_equilibria)

    sp = subs.add_parser("stability", help="mode-wise stability report")
    _add_common(sp)
    sp.add_argument("--p", type=float, required=True)
    sp.add_argument("--branch", choices=("upper", "lower", "bare"), default="upper")
    sp.add_argument("--n-max", type=int, default=64)
    sp.set_defaults(func=cmd_stability)

    sp = subs.add_parser("turing-scan", help="pattern-onset roots per mode")
    _add_common(sp)
    sp.add_argument("--L", type=float, nargs="+", default=None,
                    help="domain length(s); defaults to the parameter L")
    sp.add_argument("--n-max", type=int, default=8)
    sp.set_defaults(func=cmd_turing_scan)

    sp = subs.add_parser("critical-size", help="domain size where onsets vanish")
    _add_common(sp)
    sp.set_defaults(func=cmd_critical_size)

    sp = subs.add_parser("simulate", help="time integration from a preset")
    _add_common(sp)
    sp.add_argument("--preset", required=True,
                    help="bare | homogeneous | bump-up | bump-down | "
                         "bell-perturb-left | bell-perturb-right | file:<path>")
    sp.add_argument("--p", type=float, required=True)
    sp.add_argument("--t-end", type=float, default=1e5)
    sp.add_argument("--rel-tol", type=float, default=1e-6)
    sp.add_argument("--abs-tol", type=float, default=1e-6)
    sp.add_argument("--snapshot-every", type=int, default=50)
    sp.add_argument("--window", type=float, nargs=2, default=None,
                    help="perturbation window in x (default 3.8 4.2)")
    sp.add_argument("--noise", type=float, default=0.0)
    sp.set_defaults(func=cmd_simulate)

    sp = subs.add_parser("continue", help="trace one homogeneous-seeded branch")
    _add_common(sp)
    sp.add_argument("--branch-seed", choices=("bare", "vegetated"),
                    default="vegetated")
    sp.add_argument("--p-start", type=float, default=2.0)
    sp.add_argument("--direction", type=int, choices=(-1, 1), default=-1)
    sp.set_defaults(func=cmd_continue)

    sp = subs.add_parser("diagram", help="full bifurcation diagram")
    _add_common(sp)
    sp.set_defaults(func=cmd_diagram)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "L", "sentinel") is None:
        args.L = [_load_params(args).L]
    try:
        return args.func(args)
    except InvalidArgumentError as exc:
        print(f"vegpatterns: {exc}", file=sys.stderr)
        return USAGE_ERROR


if __name__ == "__main__":
    sys.exit(main())
