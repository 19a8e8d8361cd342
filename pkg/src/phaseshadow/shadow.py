"""Estimators: single-snapshot Pauli and stabilizer-state estimates,
the shared-stabilizer-group search, and dataset aggregation.

The off-diagonal estimator for a stabilizer-state observable sums
sigma**-1 <b|U P U'|b> <0|V P V'|0> over the shared phaseless group of
the snapshot circuit and the observable. Shared elements are found from
the left null space of the X-part of the conjugated Z-generator rows,
with row-combination tracking; the second factor is +1 by construction
because each element is built as an exact signed stabilizer of the
observable.
"""

from __future__ import annotations

import math
import statistics
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from . import core
from .bitlin import BitVec, int_to_words, words_to_int
from .circuits import GateOp, named_prep
from .ensemble import NoiseModel, PhaseCircuit, ShotSampler, Snapshot, shot_rng
from .pauli import PauliString, classify, is_ztype
from .sigma import (
    SIGMA_MIN,
    SigmaThresholdError,
    ZTypePauliError,
    sigma_approx_sites,
    sigma_class_value,
)
from .tableau import CliffordTableau, StabState

_U64 = np.uint64

DEFAULT_SPLIT = 3  # offdiag : diag shot ratio


class StabObservable:
    """Stabilizer-state observable defined by a preparation circuit.

    The prep list builds the state from |0...0>; its Z-generator
    conjugation images are cached since every snapshot reuses them.
    """

    def __init__(self, prep: Sequence[GateOp], n: int):
        self.prep = list(prep)
        self.n = n
        tab = CliffordTableau.from_circuit(self.prep, n)
        self._zimg_x = tab._x[n:].copy()
        self._zimg_z = tab._z[n:].copy()
        self._zimg_ph = tab._ph[n:].copy()
        self._zimg = [
            PauliString(n, words_to_int(self._zimg_x[i]), words_to_int(self._zimg_z[i]),
                        int(self._zimg_ph[i]))
            for i in range(n)
        ]
        self.state = StabState.from_circuit(self.prep, n)

    @classmethod
    def from_named(cls, name: str, n: int, rng=None) -> "StabObservable":
        return cls(named_prep(name, n, rng), n)

    def diag_value(self, b: BitVec) -> float:
        """<b|Psi|b> through a stabilizer overlap."""
        return float(self.state.overlap_sq(StabState.basis_state(b)))

    def offdiag_norm_sq(self) -> float:
        """Squared Frobenius norm of the off-diagonal part,
        1 - sum_b <b|Psi|b>**2, by exact enumeration (capped)."""
        if self.n > 20:
            raise ValueError("diagonal enumeration capped at n = 20")
        total = 0.0
        for b in range(1 << self.n):
            total += self.diag_value(BitVec(self.n, b)) ** 2
        return 1.0 - total


@dataclass(frozen=True)
class SharedGroupBasis:
    """Basis exponent vectors a with [U V' Z**a V U'] of Z type."""

    a_basis: tuple[BitVec, ...]

    @property
    def n_g(self) -> int:
        return len(self.a_basis)


@dataclass(frozen=True)
class Estimate:
    value: float
    stderr: float
    n_used: int
    mode: str
    parts: tuple[float, float]

    def to_json(self, observable: str, model: NoiseModel, n_offdiag: int, n_diag: int) -> dict:
        return {
            "observable": observable,
            "mode": self.mode,
            "value": self.value,
            "stderr": self.stderr,
            "n_offdiag": n_offdiag,
            "n_diag": n_diag,
            "model": model.to_json(),
        }


@dataclass
class ShadowDataset:
    offdiag: list[Snapshot]
    diag: list[Snapshot]
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if any(s.kind != "offdiag" for s in self.offdiag):
            raise ValueError("offdiag list contains a diag snapshot")
        if any(s.kind != "diag" for s in self.diag):
            raise ValueError("diag list contains an offdiag snapshot")


def _shot_chunk(args):
    prep, n, noise, seed, stream, kind, lo, hi = args
    sampler = ShotSampler(prep, n, noise)
    if kind == "offdiag":
        return [sampler.offdiag_shot(shot_rng(seed, stream, i)) for i in range(lo, hi)]
    return [sampler.diag_shot(shot_rng(seed, stream, i)) for i in range(lo, hi)]


def _sample_kind(prep, n, noise, seed, stream, kind, count, workers: int):
    if workers <= 1 or count < 4 * workers:
        return _shot_chunk((prep, n, noise, seed, stream, kind, 0, count))
    from concurrent.futures import ProcessPoolExecutor

    step = -(-count // workers)
    jobs = [
        (prep, n, noise, seed, stream, kind, lo, min(lo + step, count))
        for lo in range(0, count, step)
    ]
    out = []
    with ProcessPoolExecutor(max_workers=workers) as pool:
        for chunk in pool.map(_shot_chunk, jobs):
            out.extend(chunk)
    return out


def sample_dataset(
    prep: Sequence[GateOp],
    n: int,
    noise: NoiseModel,
    n_offdiag: int,
    n_diag: int,
    seed: int,
    stream: int = 0,
    prep_name: str = "custom",
) -> ShadowDataset:
    """Generate a dataset with one counter-based substream per shot.

    Substreams are keyed by (seed, stream, shot index), so the result
    is identical for any worker count (PHASESHADOW_WORKERS).
    """
    import os

    workers = max(1, int(os.environ.get("PHASESHADOW_WORKERS", "1")))
    off = _sample_kind(prep, n, noise, seed, 2 * stream, "offdiag", n_offdiag, workers)
    diag = _sample_kind(prep, n, noise, seed, 2 * stream + 1, "diag", n_diag, workers)
    return ShadowDataset(
        off, diag, {"n": n, "noise": noise.to_json(), "seed": seed, "prep": prep_name}
    )


# ------------------------------------------------------------ internals


def _sigma_guard(n1: int, n2: int, n3: int, model: NoiseModel, px: int, pz: int, n: int) -> float:
    if model.kind == "zz_het":
        value = sigma_approx_sites(PauliString(n, px, pz, 0), model)
    else:
        value = sigma_class_value(n1, n2, n3, model)
    if value < SIGMA_MIN:
        raise SigmaThresholdError(
            f"coefficient {value:.3e} below inversion threshold {SIGMA_MIN:.0e}"
        )
    return value


def _sigma_lookup(p: PauliString, model: NoiseModel, mode: str) -> float:
    if mode == "plain":
        return 1.0
    if model.kind == "zz_het":
        value = sigma_approx_sites(p, model)
    else:
        c = classify(p)
        value = sigma_class_value(c.n1, c.n2, c.n3, model)
    if value < SIGMA_MIN:
        raise SigmaThresholdError(
            f"coefficient {value:.3e} below inversion threshold {SIGMA_MIN:.0e}"
        )
    return value


_IDENT_WORDS_CACHE: dict[int, np.ndarray] = {}


def _identity_words(n: int) -> np.ndarray:
    cached = _IDENT_WORDS_CACHE.get(n)
    if cached is None:
        w = core.nwords(n)
        cached = np.zeros((n, w), dtype=_U64)
        for i in range(n):
            cached[i, i >> 6] = _U64(1) << _U64(i & 63)
        _IDENT_WORDS_CACHE[n] = cached
    return cached


def _shared_rows(ut: CliffordTableau, obs: StabObservable):
    """Conjugate the observable's Z-generator images through the
    snapshot unitary and eliminate on their X parts.

    Returns (rank, aux, wx, wz, wph): rows rank..n-1 of aux hold
    [image Z-part | combination vector] for the shared group, and the
    w-arrays are the signed conjugated rows before elimination.
    """
    n = obs.n
    w = core.nwords(n)
    wx = np.empty((n, w), dtype=_U64)
    wz = np.empty((n, w), dtype=_U64)
    wph = np.empty(n, dtype=np.uint8)
    core.conjugate_fold_rows(
        ut._x, ut._z, ut._ph, n, obs._zimg_x, obs._zimg_z, obs._zimg_ph, wx, wz, wph
    )
    main = wx.copy()
    aux = np.empty((n, 2 * w), dtype=_U64)
    aux[:, :w] = wz
    aux[:, w:] = _identity_words(n)
    rank, _ = core.ge(main, aux, n, False)
    return rank, aux, wx, wz, wph


def shared_group_basis(u: CliffordTableau, v: CliffordTableau) -> SharedGroupBasis:
    """Basis of the exponent space of shared phaseless stabilizers.

    u and v are the conjugation tableaus of the two Cliffords; the
    basis vectors a satisfy that conjugating Z**a first by the adjoint
    of v and then by u lands in the Z-type set.
    """
    if u.n != v.n:
        raise ValueError("size mismatch")
    n = u.n
    v_inv = v.invert()
    obs = StabObservable.__new__(StabObservable)
    obs.n = n
    obs._zimg_x = v_inv._x[n:].copy()
    obs._zimg_z = v_inv._z[n:].copy()
    obs._zimg_ph = v_inv._ph[n:].copy()
    rank, aux, _, _, _ = _shared_rows(u, obs)
    w = core.nwords(n)
    basis = tuple(BitVec(n, words_to_int(aux[r, w:])) for r in range(rank, n))
    return SharedGroupBasis(basis)


def _snapshot_tableau(s: Snapshot) -> CliffordTableau:
    from .tableau import _identity_rows

    n = s.circuit.n
    x, z, ph = _identity_rows(n)
    core.apply_gates(x, z, ph, s.circuit.encoded_ops())
    return CliffordTableau(n, x, z, ph)


def _offdiag_group_sum(
    s: Snapshot, obs: StabObservable, model: NoiseModel, mode: str
) -> tuple[float, int]:
    """Value of the group-restricted inverted sum, plus the group rank."""
    n = obs.n
    ut = _snapshot_tableau(s)
    rank, aux, wx, wz, wph = _shared_rows(ut, obs)
    n_g = n - rank
    if n_g == 0:
        return 0.0, 0
    if n_g > 26:
        raise RuntimeError(f"shared group rank {n_g} too large to enumerate")
    w = core.nwords(n)
    basis_p: list[tuple[int, int, int]] = []
    basis_w: list[tuple[int, int, int]] = []
    for r in range(rank, n):
        combo = aux[r, w:]
        px, pz, pp = core.fold_product(obs._zimg_x, obs._zimg_z, obs._zimg_ph, combo)
        mx, mz, mp = core.fold_product(wx, wz, wph, combo)
        # the eliminated row is the same element reached through the
        # other route: the image under the snapshot unitary is Z-type
        # with exactly the tracked Z-part
        mzi = words_to_int(mz)
        assert words_to_int(mx) == 0 and mzi == words_to_int(aux[r, :w])
        basis_p.append((words_to_int(px), words_to_int(pz), pp))
        basis_w.append((0, mzi, mp))
    b = s.outcome.bits
    total = 0.0
    px = pz = pp = 0
    mz = mp = 0
    for k in range(1, 1 << n_g):
        j = (k & -k).bit_length() - 1
        bx, bz, bp = basis_p[j]
        pp = (pp + bp + 2 * (pz & bx).bit_count()) & 3
        px ^= bx
        pz ^= bz
        _, bz, bp = basis_w[j]
        mp = (mp + bp) & 3
        mz ^= bz
        if px == 0:
            continue  # Z-type shared elements (identity included) are skipped
        if mode == "plain":
            sig = 1.0
        else:
            n3 = px.bit_count()
            n2 = (pz & ~px).bit_count()
            sig = _sigma_guard(n - n2 - n3, n2, n3, model, px, pz, n)
        assert mp % 2 == 0
        sign = 1.0 if mp == 0 else -1.0
        if (mz & b).bit_count() & 1:
            sign = -sign
        total += sign / sig
    return total, n_g


# ------------------------------------------------------------ estimators


def estimate_pauli(s: Snapshot, q: PauliString, model: NoiseModel, mode: str = "robust") -> float:
    """Single-snapshot estimate of a non-Z-type Pauli expectation."""
    if s.kind != "offdiag":
        raise ValueError("Pauli estimation needs an offdiag snapshot")
    if is_ztype(q):
        raise ZTypePauliError("Z-type Paulis are estimated from diag shots")
    ut = _snapshot_tableau(s)
    img = ut.conjugate(q)
    sig = _sigma_lookup(q, model, mode)
    if img.x != 0:
        return 0.0
    assert img.phase % 2 == 0
    sign = 1.0 if img.phase == 0 else -1.0
    if (img.z & s.outcome.bits).bit_count() & 1:
        sign = -sign
    return (2**q.n) * sign / sig


def estimate_stab_offdiag(
    s: Snapshot, obs: StabObservable, model: NoiseModel, mode: str = "robust"
) -> float:
    """Single-snapshot estimate of tr(Psi rho_f) via the shared group."""
    if s.kind != "offdiag":
        raise ValueError("off-diagonal estimation needs an offdiag snapshot")
    value, _ = _offdiag_group_sum(s, obs, model, mode)
    return value


def estimate_stab_offdiag_with_rank(
    s: Snapshot, obs: StabObservable, model: NoiseModel, mode: str = "robust"
) -> tuple[float, int]:
    if s.kind != "offdiag":
        raise ValueError("off-diagonal estimation needs an offdiag snapshot")
    return _offdiag_group_sum(s, obs, model, mode)


def estimate_stab_diag(s: Snapshot, obs: StabObservable) -> float:
    """<b|Psi|b> for one computational-basis record."""
    if s.kind != "diag":
        raise ValueError("diagonal estimation needs a diag snapshot")
    return obs.diag_value(s.outcome)


def plain_offdiag_reference(s: Snapshot, obs: StabObservable) -> float:
    """Noiseless-form estimate 2**n <b|U Psi U'|b> - 1 via one overlap.

    Used as a cross-check identity against the group sum: the two agree
    after adding back the Z-type shared contributions.
    """
    n = obs.n
    phi = StabState.basis_state(s.outcome).apply_circuit(
        [g for g in reversed(_inverse_gates(s.circuit.gates()))]
    )
    return (2**n) * float(obs.state.overlap_sq(phi)) - 1.0


def _inverse_gates(gates: Sequence[GateOp]) -> list[GateOp]:
    swap = {"S": "SDG", "SDG": "S"}
    return [GateOp(swap.get(g.kind, g.kind), g.qubits) for g in gates]


def _mean(values: Sequence[float]) -> float:
    return math.fsum(values) / len(values) if values else 0.0


def _variance(values: Sequence[float]) -> float:
    if len(values) < 2:
        return 0.0
    mu = _mean(values)
    return math.fsum((v - mu) ** 2 for v in values) / (len(values) - 1)


def _median_of_means(values: Sequence[float], group_size: int) -> float:
    groups = [
        _mean(values[i : i + group_size]) for i in range(0, len(values), group_size)
    ]
    return statistics.median(groups)


Observable = Union[StabObservable, PauliString]


def aggregate(
    ds: ShadowDataset,
    obs: Observable,
    model: NoiseModel,
    mode: str = "robust",
    mom_group_size: Optional[int] = None,
) -> Estimate:
    """Combine per-snapshot estimates into value and standard error.

    The value is the mean of the off-diagonal estimators plus the mean
    of the diagonal estimators; the variance contributions combine as
    Var_f/N_f + Var_d/N_d. An optional median-of-means group size
    robustifies the off-diagonal part.
    """
    if mode not in ("plain", "robust"):
        raise ValueError(mode)
    if isinstance(obs, PauliString):
        if obs.is_identity():
            raise ValueError("identity observable is trivially 1")
        if is_ztype(obs):
            if not ds.diag:
                raise ValueError("Z-type Pauli needs diag snapshots")
            vals = [
                1.0 - 2.0 * ((obs.z & s.outcome.bits).bit_count() & 1) for s in ds.diag
            ]
            value = _mean(vals)
            stderr = math.sqrt(_variance(vals) / len(vals))
            return Estimate(value, stderr, len(vals), mode, (0.0, value))
        if not ds.offdiag:
            raise ValueError("non-Z-type Pauli needs offdiag snapshots")
        off_vals = [estimate_pauli(s, obs, model, mode) for s in ds.offdiag]
        dvals: list[float] = []
    else:
        if not ds.offdiag or not ds.diag:
            raise ValueError("stabilizer observables need both snapshot kinds")
        off_vals = [estimate_stab_offdiag(s, obs, model, mode) for s in ds.offdiag]
        dvals = [estimate_stab_diag(s, obs) for s in ds.diag]
    if mom_group_size:
        off_part = _median_of_means(off_vals, mom_group_size)
    else:
        off_part = _mean(off_vals)
    diag_part = _mean(dvals)
    var = _variance(off_vals) / len(off_vals) if off_vals else 0.0
    if dvals:
        var += _variance(dvals) / len(dvals)
    return Estimate(
        off_part + diag_part,
        math.sqrt(var),
        len(off_vals) + len(dvals),
        mode,
        (off_part, diag_part),
    )
