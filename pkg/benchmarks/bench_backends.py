"""Compare the pure-numpy and compiled kernel backends on the hot paths.

Usage: python benchmarks/bench_backends.py [--n 45] [--shots 300]
The same seeded inputs run through both backends; outputs are checked
for equality while timing.
"""

import argparse
import time

import numpy as np

import phaseshadow.core as core_mod
from phaseshadow.circuits import ghz_star_prep
from phaseshadow.ensemble import NoiseModel, ShotSampler, shot_rng
from phaseshadow.shadow import StabObservable, estimate_stab_offdiag


def _bind(impl):
    core_mod.apply_gates = impl.apply_gates
    core_mod.apply_phase_circuit = impl.apply_phase_circuit
    core_mod.measure_all = impl.measure_all
    core_mod.conjugate_fold = impl.conjugate_fold
    core_mod.conjugate_fold_rows = impl.conjugate_fold_rows
    core_mod.fold_product = impl.fold_product
    core_mod.ge = impl.ge
    core_mod.mul_rows = impl.mul_rows


def time_backend(name: str, n: int, shots: int):
    impl = core_mod.get_backend(name)
    _bind(impl)
    prep = ghz_star_prep(n)
    model = NoiseModel.zz(0.01)
    sampler = ShotSampler(prep, n, model)
    t0 = time.perf_counter()
    snaps = [sampler.offdiag_shot(shot_rng(1, 0, i)) for i in range(shots)]
    t_gen = time.perf_counter() - t0
    obs = StabObservable(prep, n)
    t0 = time.perf_counter()
    values = [estimate_stab_offdiag(s, obs, model) for s in snaps]
    t_est = time.perf_counter() - t0

    rng = np.random.default_rng(0)
    rows = 2 * n
    w = core_mod.nwords(n)
    main = rng.integers(0, 1 << 62, size=(rows, w), dtype=np.uint64)
    aux = rng.integers(0, 1 << 62, size=(rows, 2 * w), dtype=np.uint64)
    t0 = time.perf_counter()
    for _ in range(200):
        impl.ge(main.copy(), aux.copy(), n, False)
    t_ge = time.perf_counter() - t0
    return {
        "backend": name,
        "gen_ms": 1e3 * t_gen / shots,
        "est_ms": 1e3 * t_est / shots,
        "ge_us": 1e6 * t_ge / 200,
        "checksum": float(np.sum(values)),
    }


def main() -> None:
    parser = argparse.ArgumentParser()
    parser.add_argument("--n", type=int, default=45)
    parser.add_argument("--shots", type=int, default=300)
    args = parser.parse_args()

    results = []
    for name in ("pure", "compiled"):
        try:
            results.append(time_backend(name, args.n, args.shots))
        except ImportError:
            print(f"{name}: not available")
    if len(results) == 2:
        assert results[0]["checksum"] == results[1]["checksum"], "backend outputs differ"
    print(f"\nn = {args.n}, {args.shots} shots")
    print(f"{'backend':<10} {'shot gen ms':>12} {'estimate ms':>12} {'elimination us':>15}")
    for r in results:
        print(f"{r['backend']:<10} {r['gen_ms']:>12.3f} {r['est_ms']:>12.3f} {r['ge_us']:>15.1f}")
    if len(results) == 2:
        print(
            f"{'speedup':<10} {results[0]['gen_ms'] / results[1]['gen_ms']:>12.1f} "
            f"{results[0]['est_ms'] / results[1]['est_ms']:>12.1f} "
            f"{results[0]['ge_us'] / results[1]['ge_us']:>15.1f}"
        )


if __name__ == "__main__":
    main()
