"""Command-line interface: sample, estimate, verify, xp, bench."""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .circuits import named_prep, parse_circuit
from .ensemble import NoiseModel, read_snapshots, write_snapshots
from .experiments import (
    XP_NAMES,
    ExperimentConfig,
    bench_postprocessing,
    run_experiment,
    run_verify,
    write_rows,
)
from .pauli import PauliString
from .shadow import ShadowDataset, StabObservable, aggregate, sample_dataset
from .sigma import write_class_table

PREP_CHOICES = ["ghz-star", "ghz-canonical", "cluster-1d", "plus-product", "random-stabilizer"]


def _noise_from_args(args) -> NoiseModel:
    if args.noise == "noiseless" or args.pe == 0.0:
        return NoiseModel.noiseless()
    return NoiseModel(args.noise, args.pe)


def _prep_gates(name: str, n: int, seed: int, path=None):
    if path:
        with open(path) as fh:
            return parse_circuit(fh.read())
    rng = np.random.default_rng(seed) if name == "random-stabilizer" else None
    return named_prep(name, n, rng)


def _cmd_sample(args) -> int:
    noise = _noise_from_args(args)
    prep = _prep_gates(args.prep, args.n, args.seed, args.prep_file)
    n_diag = max(1, args.shots // (args.split + 1))
    ds = sample_dataset(
        prep, args.n, noise, args.shots - n_diag, n_diag, args.seed, prep_name=args.prep
    )
    write_snapshots(args.out, ds.offdiag + ds.diag, args.n, noise, args.seed, args.prep)
    print(f"wrote {args.shots} snapshots to {args.out}")
    return 0


def _cmd_estimate(args) -> int:
    header, snaps = read_snapshots(args.infile)
    n = header["n"]
    noise = NoiseModel.from_json(header["noise"])
    ds = ShadowDataset(
        [s for s in snaps if s.kind == "offdiag"],
        [s for s in snaps if s.kind == "diag"],
        meta=header,
    )
    if args.obs_pauli:
        obs = PauliString.from_label(args.obs_pauli)
        obs_name = args.obs_pauli
    else:
        obs = StabObservable(_prep_gates(args.obs, n, header.get("seed", 0), args.obs_file), n)
        obs_name = args.obs if not args.obs_file else args.obs_file
    est = aggregate(ds, obs, noise, mode=args.mode, mom_group_size=args.mom_group)
    record = est.to_json(obs_name, noise, len(ds.offdiag), len(ds.diag))
    text = json.dumps(record, sort_keys=True)
    if args.json_out:
        with open(args.json_out, "w") as fh:
            fh.write(text + "\n")
    print(text)
    return 0


def _cmd_verify(args) -> int:
    if args.suite == "sigma" and args.dump:
        write_class_table(args.dump, args.dump_n, NoiseModel.zz(args.dump_pe))
        print(f"wrote coefficient table to {args.dump}")
    reports = run_verify(args.suite)
    ok = True
    for rep in reports:
        print(rep.println())
        if args.verbose:
            for line in rep.lines:
                print("   ", line)
        ok = ok and rep.passed
    return 0 if ok else 1


def _cmd_xp(args) -> int:
    if args.config:
        cfg = ExperimentConfig.from_json(args.config)
        if args.out:
            cfg.out = args.out
        rows = run_experiment(cfg)
    else:
        fn = XP_NAMES[args.name]
        kwargs = {"seed": args.seed, "out": args.out}
        if args.name in ("bias-vs-pe", "variance-slope"):
            kwargs["shots"] = args.shots
            if args.n:
                kwargs["n"] = args.n
            if args.paper_scale and args.name == "bias-vs-pe":
                kwargs["n"] = 45
        rows = fn(**kwargs)
    for row in rows:
        print(
            f"{row.experiment} n={row.n} pe={row.p_e} {row.mode}: "
            f"{row.estimate:.4f} +- {row.stderr:.4f} (var {row.variance:.4g}, "
            f"ng {row.ng_mean:.2f}, {row.time_ms:.1f} ms)"
        )
    return 0


def _cmd_bench(args) -> int:
    ns = [int(x) for x in args.ns.split(",")] if "," in args.ns else None
    if ns is None:
        lo, hi, step = (int(x) for x in args.ns.split(":"))
        ns = list(range(lo, hi + 1, step))
    rows = bench_postprocessing(ns, args.trials, args.seed)
    if args.out:
        write_rows(args.out, rows)
    for row in rows:
        print(f"n={row.n}: {row.time_ms:.3f} ms/snapshot, mean group {row.ng_mean:.2f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="phaseshadow")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", help="generate and store snapshots")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--prep", choices=PREP_CHOICES, default="ghz-star")
    p.add_argument("--prep-file", default=None)
    p.add_argument("--noise", choices=["noiseless", "zz", "extended"], default="noiseless")
    p.add_argument("--pe", type=float, default=0.0)
    p.add_argument("--shots", type=int, required=True)
    p.add_argument("--split", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_sample)

    p = sub.add_parser("estimate", help="estimate an observable from a store")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--obs", choices=PREP_CHOICES, default="ghz-star")
    p.add_argument("--obs-file", default=None)
    p.add_argument("--obs-pauli", default=None)
    p.add_argument("--mode", choices=["plain", "robust"], default="robust")
    p.add_argument("--mom-group", type=int, default=None)
    p.add_argument("--json-out", default=None)
    p.set_defaults(fn=_cmd_estimate)

    p = sub.add_parser("verify", help="run a named oracle suite")
    p.add_argument("suite")
    p.add_argument("--verbose", action="store_true")
    p.add_argument("--dump", default=None, help="write the sigma class table CSV here")
    p.add_argument("--dump-n", type=int, default=16)
    p.add_argument("--dump-pe", type=float, default=0.01)
    p.set_defaults(fn=_cmd_verify)

    p = sub.add_parser("xp", help="run a named experiment")
    p.add_argument("name", nargs="?", choices=sorted(XP_NAMES), default="bias-vs-pe")
    p.add_argument("--config", default=None, help="JSON experiment config")
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--shots", type=int, default=50_000)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--paper-scale", action="store_true")
    p.add_argument("--out", default=None)
    p.set_defaults(fn=_cmd_xp)

    p = sub.add_parser("bench", help="benchmarks")
    p.add_argument("what", choices=["postproc"])
    p.add_argument("--ns", default="15:65:10", help="lo:hi:step or comma list")
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.set_defaults(fn=_cmd_bench)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
