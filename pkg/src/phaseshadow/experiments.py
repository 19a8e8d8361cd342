"""Experiment runner: reproduces the figure-style studies as CSV rows
(bias vs error rate, variance vs size and rate, post-processing timing,
shared-group statistics) plus the named verification suites that front
the dense oracle checks.

Rows are deterministic given the seed (timings excluded); every grid
point draws from its own substream so dropping a point changes nothing
else.
"""

from __future__ import annotations

import csv
import json
import math
import os
import time
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from . import oracle
from .circuits import GateOp, named_prep, parse_circuit
from .ensemble import (
    NoiseModel,
    PhaseCircuit,
    ShotSampler,
    Snapshot,
    angle_to_pe,
    sample_phase_circuit,
    shot_rng,
    to_tableau,
)
from .pauli import PauliString
from .shadow import (
    ShadowDataset,
    StabObservable,
    _mean,
    _variance,
    estimate_stab_diag,
    estimate_stab_offdiag,
    estimate_stab_offdiag_with_rank,
    sample_dataset,
)
from .sigma import sigma_class_value
from .tableau import StabState

CSV_SCHEMA = "phaseshadow-csv/1"
CSV_COLUMNS = [
    "experiment",
    "n",
    "p_e",
    "mode",
    "N",
    "estimate",
    "stderr",
    "variance",
    "ng_mean",
    "time_ms",
    "seed",
]


def worker_count() -> int:
    return max(1, int(os.environ.get("PHASESHADOW_WORKERS", "1")))


@dataclass
class ResultRow:
    experiment: str
    n: int
    p_e: float
    mode: str
    N: int
    estimate: float
    stderr: float
    variance: float
    ng_mean: float
    time_ms: float
    seed: int

    def as_list(self) -> list:
        return [
            self.experiment,
            self.n,
            repr(self.p_e),
            self.mode,
            self.N,
            repr(self.estimate),
            repr(self.stderr),
            repr(self.variance),
            repr(self.ng_mean),
            f"{self.time_ms:.3f}",
            self.seed,
        ]


def write_rows(path, rows: Sequence[ResultRow]) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(f"# {CSV_SCHEMA}\n")
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for row in rows:
            writer.writerow(row.as_list())


@dataclass
class ExperimentConfig:
    name: str
    prep: str = "ghz-star"
    prep_file: Optional[str] = None
    n_values: tuple[int, ...] = (10,)
    pe_values: tuple[float, ...] = (0.0,)
    noise_kind: str = "zz"
    shots: int = 2000
    split: int = 3
    modes: tuple[str, ...] = ("robust", "plain")
    seed: int = 0
    mom_group: Optional[int] = None
    out: Optional[str] = None

    def __post_init__(self):
        if not self.n_values or not self.pe_values:
            raise ValueError("empty grid")
        if self.shots < 1:
            raise ValueError("need at least one shot")
        if self.split < 1:
            raise ValueError("split ratio must be >= 1")
        for mode in self.modes:
            if mode not in ("plain", "robust"):
                raise ValueError(f"unknown mode {mode!r}")

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        with open(path) as fh:
            data = json.load(fh)
        for key in ("n_values", "pe_values", "modes"):
            if key in data:
                data[key] = tuple(data[key])
        return cls(**data)

    def prep_gates(self, n: int) -> list[GateOp]:
        if self.prep == "circuit-file":
            if not self.prep_file:
                raise ValueError("circuit-file prep needs prep_file")
            with open(self.prep_file) as fh:
                return parse_circuit(fh.read())
        if self.prep == "random-stabilizer":
            return named_prep(self.prep, n, np.random.default_rng(self.seed))
        return named_prep(self.prep, n)


def _split_counts(shots: int, split: int) -> tuple[int, int]:
    n_diag = max(1, shots // (split + 1))
    return shots - n_diag, n_diag


def _estimate_with_stats(ds: ShadowDataset, obs: StabObservable, model: NoiseModel, mode: str):
    """Aggregate and return (estimate, stderr, offdiag variance,
    mean group size, post-processing milliseconds)."""
    t0 = time.perf_counter()
    vals = []
    sizes = []
    for snap in ds.offdiag:
        v, n_g = estimate_stab_offdiag_with_rank(snap, obs, model, mode)
        vals.append(v)
        sizes.append(float(1 << n_g))
    dvals = [estimate_stab_diag(snap, obs) for snap in ds.diag]
    elapsed_ms = (time.perf_counter() - t0) * 1000.0
    var_f = _variance(vals)
    var = var_f / len(vals) + (_variance(dvals) / len(dvals) if dvals else 0.0)
    estimate = _mean(vals) + _mean(dvals)
    return estimate, math.sqrt(var), var_f, _mean(sizes), elapsed_ms


def run_experiment(cfg: ExperimentConfig) -> list[ResultRow]:
    """One row per (n, p_e, mode) grid point; deterministic given seed."""
    rows = []
    grid = [(n, pe) for n in cfg.n_values for pe in cfg.pe_values]
    for grid_index, (n, pe) in enumerate(grid):
        model = NoiseModel(cfg.noise_kind, pe) if pe else NoiseModel.noiseless()
        prep = cfg.prep_gates(n)
        obs = StabObservable(prep, n)
        n_f, n_d = _split_counts(cfg.shots, cfg.split)
        ds = sample_dataset(
            prep, n, model, n_f, n_d, cfg.seed, stream=grid_index, prep_name=cfg.prep
        )
        for mode in cfg.modes:
            est, stderr, var_f, ng_mean, ms = _estimate_with_stats(ds, obs, model, mode)
            rows.append(
                ResultRow(cfg.name, n, pe, mode, cfg.shots, est, stderr, var_f, ng_mean, ms, cfg.seed)
            )
    if cfg.out:
        write_rows(cfg.out, rows)
    return rows


def bench_postprocessing(
    n_values: Sequence[int], trials: int, seed: int = 0, prep: str = "ghz-star"
) -> list[ResultRow]:
    """Mean per-snapshot post-processing time and group size per n.

    Snapshot generation is excluded from the timing; the claim under
    test concerns only the estimator.
    """
    rows = []
    for idx, n in enumerate(n_values):
        gates = named_prep(prep, n)
        obs = StabObservable(gates, n)
        model = NoiseModel.noiseless()
        sampler = ShotSampler(gates, n, model)
        snaps = [sampler.offdiag_shot(shot_rng(seed, idx, i)) for i in range(trials)]
        t0 = time.perf_counter()
        vals = []
        sizes = []
        for snap in snaps:
            v, n_g = estimate_stab_offdiag_with_rank(snap, obs, model, "robust")
            vals.append(v)
            sizes.append(float(1 << n_g))
        per_snap_ms = (time.perf_counter() - t0) * 1000.0 / trials
        rows.append(
            ResultRow(
                "postproc-timing", n, 0.0, "robust", trials,
                _mean(vals), math.sqrt(_variance(vals) / trials) if trials > 1 else 0.0,
                _variance(vals), _mean(sizes), per_snap_ms, seed,
            )
        )
    return rows


def shared_group_stats(n_values: Sequence[int], samples: int, seed: int = 0,
                       prep: str = "ghz-star") -> dict[int, float]:
    """Sample mean of the shared-group size over random circuits."""
    out = {}
    for idx, n in enumerate(n_values):
        obs = StabObservable(named_prep(prep, n), n)
        total = 0.0
        for i in range(samples):
            rng = shot_rng(seed, idx, i)
            c = sample_phase_circuit(n, rng)
            snap = Snapshot.offdiag(c, 0)
            _, n_g = estimate_stab_offdiag_with_rank(snap, obs, NoiseModel.noiseless(), "plain")
            total += float(1 << n_g)
        out[n] = total / samples
    return out


# ------------------------------------------------- local-basis baseline


def pauli_baseline_variance(n: int, shots: int, seed: int = 0) -> ResultRow:
    """Single-shot variance of the graph-GHZ fidelity estimator under
    independent per-qubit X/Y/Z-basis measurements with the standard
    local inverse weighting."""
    if n > 10:
        raise ValueError("local baseline capped at n = 10")
    gates = named_prep("ghz-star", n)
    state = StabState.from_circuit(gates, n)
    group = [PauliString.identity(n)]
    for i in range(n):
        gen = state.stabilizer(i)
        group += [  # grow the group one generator at a time
            _mul(gen, p) for p in group
        ]
    basis_gates = {
        "X": [GateOp("H", (0,))],
        "Y": [GateOp("SDG", (0,)), GateOp("H", (0,))],
        "Z": [],
    }
    letters = np.array(["X", "Y", "Z"])
    vals = []
    t0 = time.perf_counter()
    for i in range(shots):
        rng = shot_rng(seed, 0, i)
        bases = letters[rng.integers(0, 3, size=n)]
        rotated = state
        for q, basis in enumerate(bases):
            for g in basis_gates[basis]:
                rotated = rotated.apply_gate(GateOp(g.kind, (q,)))
        outcome = rotated.measure_all(rng)
        est = 0.0
        for p in group:
            factor = 1.0
            for q in range(n):
                xq, zq = (p.x >> q) & 1, (p.z >> q) & 1
                if not xq and not zq:
                    continue
                site = "Y" if xq and zq else ("X" if xq else "Z")
                if site != bases[q]:
                    factor = 0.0
                    break
                factor *= 3.0 * (-1.0 if outcome[q] else 1.0)
            if factor:
                # sign of the element relative to its I/X/Y/Z letters
                rel = (p.phase - (p.x & p.z).bit_count()) & 3
                est += factor if rel == 0 else -factor
        vals.append(est / (1 << n))
    ms = (time.perf_counter() - t0) * 1000.0
    return ResultRow(
        "variance-vs-n", n, 0.0, "pauli-local", shots,
        _mean(vals), math.sqrt(_variance(vals) / shots), _variance(vals), 0.0, ms, seed,
    )


def _mul(p, q):
    from .pauli import multiply

    return multiply(p, q)


def phase_shadow_variance(n: int, shots: int, seed: int = 0) -> ResultRow:
    """Single-shot variance of the noiseless phase-shadow estimator for
    the graph-GHZ fidelity."""
    gates = named_prep("ghz-star", n)
    obs = StabObservable(gates, n)
    model = NoiseModel.noiseless()
    ds = sample_dataset(gates, n, model, shots, 1, seed, stream=1, prep_name="ghz-star")
    t0 = time.perf_counter()
    vals = [estimate_stab_offdiag(s, obs, model) for s in ds.offdiag]
    ms = (time.perf_counter() - t0) * 1000.0
    return ResultRow(
        "variance-vs-n", n, 0.0, "ps-plain", shots,
        _mean(vals), math.sqrt(_variance(vals) / shots), _variance(vals), 0.0, ms, seed,
    )


def fit_slope(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Least-squares slope of ys against xs."""
    xbar = _mean(list(xs))
    ybar = _mean(list(ys))
    num = math.fsum((x - xbar) * (y - ybar) for x, y in zip(xs, ys))
    den = math.fsum((x - xbar) ** 2 for x in xs)
    return num / den


def variance_slope(rows: Sequence[ResultRow]) -> float:
    """Slope of log variance against error rate from experiment rows."""
    pts = [(r.p_e, math.log(r.variance)) for r in rows if r.mode == "robust"]
    return fit_slope([p for p, _ in pts], [v for _, v in pts])


# ------------------------------------------------------- verify suites


@dataclass
class VerifyReport:
    name: str
    passed: bool
    max_dev: float
    lines: list[str] = field(default_factory=list)

    def println(self) -> str:
        status = "pass" if self.passed else "FAIL"
        return f"{status} {self.name}: max deviation {self.max_dev:.3e}"


def verify_moments() -> VerifyReport:
    """Enumerated moments equal the scaled permutation unions."""
    worst = 0.0
    lines = []
    for n, m in [(1, 2), (2, 2), (3, 2), (4, 2), (1, 3), (2, 3), (3, 3)]:
        got = oracle.moment_exact(n, m).entries
        want = oracle.union_permutation_operator(n, m).entries / (1 << (m * n))
        dev = float(np.abs(got - want).max())
        worst = max(worst, dev)
        lines.append(f"n={n} m={m}: max dev {dev:.3e}")
    return VerifyReport("moments", worst < 1e-12, worst, lines)


def verify_noisy_moment() -> VerifyReport:
    """Enumerated noisy moments match the closed form and the
    coefficient decomposition, for both error models."""
    worst = 0.0
    lines = []
    for kind in ("zz", "extended"):
        for n in (2, 3):
            for pe in (0.0, 0.05, 0.2):
                model = NoiseModel(kind, pe)
                got = oracle.noisy_moment2_exact(n, model)
                closed = oracle.noisy_moment2_closed_form(n, model)
                dev = float(np.abs(got.entries - closed.entries).max())
                for x in range(1 << n):
                    for z in range(1 << n):
                        p = PauliString(n, x, z, 0)
                        coeff = oracle.pauli_coefficient(got, p)
                        n3 = x.bit_count()
                        n2 = (z & ~x).bit_count()
                        want = sigma_class_value(n - n2 - n3, n2, n3, model)
                        dev = max(dev, abs(coeff - want))
                worst = max(worst, dev)
                lines.append(f"{kind} n={n} pe={pe}: max dev {dev:.3e}")
    return VerifyReport("noisymoment", worst < 1e-10, worst, lines)


def verify_sigma(max_n: int = 64) -> VerifyReport:
    """Special values across all classes plus the approximation check."""
    worst = 0.0
    lines = []
    for n in range(1, max_n + 1):
        for n3 in range(n + 1):
            for n2 in range(n - n3 + 1):
                n1 = n - n2 - n3
                if n3 >= 1:
                    dev = abs(sigma_class_value(n1, n2, n3, NoiseModel.zz(0.0)) - 1.0)
                elif n2 >= 1:
                    dev = abs(sigma_class_value(n1, n2, n3, NoiseModel.zz(0.37)))
                else:
                    dev = abs(sigma_class_value(n1, n2, n3, NoiseModel.zz(0.37)) - 2.0**n)
                worst = max(worst, dev)
    lines.append(f"special values through n={max_n}: max dev {worst:.3e}")
    from .sigma import SigmaQuery, sigma_approx, sigma_exact
    from .pauli import PauliClass

    q = SigmaQuery(PauliClass(5, 5, 10), NoiseModel.zz(1e-3))
    rel = abs(sigma_approx(q) - sigma_exact(q)) / sigma_exact(q)
    lines.append(f"low-order approximation rel dev {rel:.3e}")
    passed = worst == 0.0 and rel < 0.01
    return VerifyReport("sigma", passed, max(worst, rel), lines)


def verify_postproc(per_n: int = 1000, seed: int = 0) -> VerifyReport:
    """Fast group-restricted estimator equals the full Pauli sum, and
    the group rank matches brute-force intersection, at n = 2..6."""
    worst = 0.0
    lines = []
    count_bad = 0
    for n in range(2, 7):
        rng = np.random.default_rng(seed + n)
        model = NoiseModel.zz(0.05)
        for i in range(per_n):
            from .circuits import random_stabilizer_prep

            prep = random_stabilizer_prep(n, rng)
            obs = StabObservable(prep, n)
            c = sample_phase_circuit(n, rng)
            snap = Snapshot.offdiag(c, int(rng.integers(1 << n)))
            fast, n_g = estimate_stab_offdiag_with_rank(snap, obs, model)
            brute = oracle.brute_offdiag_estimator(snap, obs, model)
            worst = max(worst, abs(fast - brute))
            if (1 << n_g) != oracle.shared_group_size(c.to_array(), prep):
                count_bad += 1
        lines.append(f"n={n}: {per_n} instances, max dev so far {worst:.3e}")
    passed = worst < 1e-12 and count_bad == 0
    lines.append(f"group-size mismatches: {count_bad}")
    return VerifyReport("postproc", passed, worst, lines)


def verify_unbiased() -> VerifyReport:
    """Exhaustive robust-estimator expectations at n = 3."""
    worst = 0.0
    bias_ok = True
    lines = []
    n = 3
    rng = np.random.default_rng(99)
    from .circuits import random_stabilizer_prep

    preps = {
        "ghz-star": named_prep("ghz-star", n),
        "plus-product": named_prep("plus-product", n),
    }
    for k in range(5):
        preps[f"random-{k}"] = random_stabilizer_prep(n, rng)
    for pe in (0.05, 0.2):
        model = NoiseModel.zz(pe)
        for name, prep in preps.items():
            obs = StabObservable(prep, n)
            got = oracle.exact_estimator_expectation(prep, obs, model, "robust")
            dev = abs(got - 1.0)
            worst = max(worst, dev)
            plain = oracle.exact_estimator_expectation(prep, obs, model, "plain")
            if abs(plain - 1.0) <= 1e-3:
                bias_ok = False
            lines.append(f"pe={pe} {name}: robust dev {dev:.2e}, plain {plain:.4f}")
    return VerifyReport("unbiased", worst < 1e-9 and bias_ok, worst, lines)


def verify_noise() -> VerifyReport:
    """Averaged rotation channel equals the flip channel."""
    analytic = oracle.gaussian_channel_equivalence(0.1)
    mc = oracle.gaussian_channel_equivalence(0.1, samples=1_000_000, seed=9)
    pe_dev = abs(angle_to_pe(0.04) - 0.0099007)
    lines = [
        f"analytic distance {analytic:.3e}",
        f"monte carlo distance {mc:.3e}",
        f"rate conversion dev {pe_dev:.3e}",
    ]
    passed = analytic < 1e-12 and mc < 1e-3 and pe_dev < 1e-7
    return VerifyReport("noise", passed, max(analytic, mc, pe_dev), lines)


def verify_shots(draws: int = 20000) -> VerifyReport:
    """Shot simulator matches dense outcome distributions at n = 3."""
    n = 3
    prep = named_prep("ghz-star", n)
    a = np.array([[1, 1, 0], [1, 0, 1], [0, 1, 1]])
    c = PhaseCircuit.from_array(a)
    worst = 0.0
    lines = []
    for model in (NoiseModel.noiseless(), NoiseModel.zz(0.1), NoiseModel.extended(0.2)):
        probs = oracle.dense_noisy_born(prep, a, model)
        sampler = ShotSampler(prep, n, model)
        counts = np.zeros(1 << n)
        for i in range(draws):
            rng = shot_rng(17, 0, i)
            from .ensemble import simulate_shot

            counts[simulate_shot(prep, c, model, rng).outcome.bits] += 1
        tv = 0.5 * float(np.abs(counts / draws - probs).sum())
        worst = max(worst, tv)
        lines.append(f"{model.kind}: TV {tv:.4f}")
    return VerifyReport("shots", worst < 0.02, worst, lines)


VERIFY_SUITES: dict[str, Callable[[], VerifyReport]] = {
    "moments": verify_moments,
    "noisymoment": verify_noisy_moment,
    "sigma": verify_sigma,
    "postproc": verify_postproc,
    "unbiased": verify_unbiased,
    "noise": verify_noise,
    "shots": verify_shots,
}


def run_verify(name: str) -> list[VerifyReport]:
    if name == "all":
        return [fn() for fn in VERIFY_SUITES.values()]
    if name not in VERIFY_SUITES:
        raise ValueError(f"unknown suite {name!r}; choose from {sorted(VERIFY_SUITES)} or all")
    return [VERIFY_SUITES[name]()]


# ------------------------------------------------------ named experiments


def xp_bias_vs_pe(n: int = 10, shots: int = 50_000, seed: int = 1,
                  pe_values: Sequence[float] = (0.0, 0.0025, 0.005, 0.0075, 0.01),
                  out: Optional[str] = None) -> list[ResultRow]:
    cfg = ExperimentConfig(
        name="bias-vs-pe",
        prep="ghz-star",
        n_values=(n,),
        pe_values=tuple(pe_values),
        shots=shots,
        seed=seed,
        out=out,
    )
    return run_experiment(cfg)


def xp_variance_slope(n: int = 16, shots: int = 50_000, seed: int = 2,
                      pe_values: Sequence[float] = (0.0, 0.002, 0.004, 0.006, 0.008, 0.01),
                      out: Optional[str] = None) -> list[ResultRow]:
    cfg = ExperimentConfig(
        name="variance-slope",
        prep="ghz-star",
        n_values=(n,),
        pe_values=tuple(pe_values),
        shots=shots,
        modes=("robust",),
        seed=seed,
        out=out,
    )
    return run_experiment(cfg)


def xp_variance_vs_n(n_values: Sequence[int] = (2, 4, 6, 8), shots: int = 20_000,
                     seed: int = 3, out: Optional[str] = None) -> list[ResultRow]:
    rows = []
    for n in n_values:
        rows.append(pauli_baseline_variance(n, shots, seed))
        rows.append(phase_shadow_variance(n, shots, seed))
    if out:
        write_rows(out, rows)
    return rows


def xp_timing(n_values: Sequence[int] = tuple(range(15, 70, 5)), trials: int = 300,
              seed: int = 4, out: Optional[str] = None) -> list[ResultRow]:
    rows = bench_postprocessing(n_values, trials, seed)
    if out:
        write_rows(out, rows)
    return rows


XP_NAMES = {
    "bias-vs-pe": xp_bias_vs_pe,
    "variance-slope": xp_variance_slope,
    "variance-vs-n": xp_variance_vs_n,
    "timing": xp_timing,
}
