"""Channel-inversion coefficients of the noisy measurement channel.

The coefficient depends on a Pauli only through its site-type counts
(n1 identity, n2 Z, n3 X-or-Y sites), so values are memoized per class.
Z-type Paulis (n3 = 0) collapse analytically: the weights degenerate to
1 and the alternating binomial sum vanishes unless n2 = 0, where it is
2**n (the identity). The general double sum is evaluated with exact
summation of float terms; a cancellation detector reruns suspicious
sums in exact rational arithmetic.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

from .ensemble import NoiseModel
from .pauli import PauliClass, PauliString, classify, is_ztype

SIGMA_MIN = 1e-6
_CANCEL_GUARD = 1e-9


class ZTypePauliError(ValueError):
    """Raised when an inversion weight is requested for a Z-type Pauli."""


class SigmaThresholdError(ArithmeticError):
    """Raised when a required coefficient is too close to zero to invert."""


@dataclass(frozen=True)
class SigmaQuery:
    cls: PauliClass
    model: NoiseModel


def _terms(n1: int, n2: int, n3: int, extra_keep_exp: int):
    """Signed exact-binomial terms of the double sum as
    (sign, coefficient, survival exponent, error exponent);
    extra_keep_exp adds a class-constant exponent to the survival part.
    """
    for s in range(n1 + n2 + 1):
        for t in range(max(0, s - n1), min(s, n2) + 1):
            coeff = math.comb(n1, s - t) * math.comb(n2, t)
            sign = -1 if t & 1 else 1
            keep_exp = (n1 + n2 - s) * n3 + extra_keep_exp
            err_exp = s * n3
            yield sign, coeff, keep_exp, err_exp


def _sum_float(n1, n2, n3, base_keep: float, base_err: float, extra: int) -> tuple[float, float]:
    terms = []
    peak = 0.0
    for sign, coeff, ke, ee in _terms(n1, n2, n3, extra):
        val = sign * coeff * base_keep**ke * base_err**ee
        terms.append(val)
        peak = max(peak, abs(val))
    return math.fsum(terms), peak


def _sum_exact(n1, n2, n3, base_keep: float, base_err: float, extra: int) -> Fraction:
    keep = Fraction(base_keep)
    err = Fraction(base_err)
    total = Fraction(0)
    for sign, coeff, ke, ee in _terms(n1, n2, n3, extra):
        total += sign * coeff * keep**ke * err**ee
    return total


def _double_sum(n1, n2, n3, base_keep, base_err, extra) -> float:
    if n3 == 0:
        # weights collapse to 1; the alternating binomial sum cancels
        return 0.0 if n2 else float(2**n1)
    total, peak = _sum_float(n1, n2, n3, base_keep, base_err, extra)
    if peak > 0.0 and abs(total) < _CANCEL_GUARD * peak:
        total = float(_sum_exact(n1, n2, n3, base_keep, base_err, extra))
    return total


def sigma_exact(q: SigmaQuery) -> float:
    """Exact coefficient for the ZZ-error model (or its noiseless limit)."""
    if q.model.kind not in ("zz", "noiseless"):
        raise ValueError("sigma_exact expects the zz model")
    c = q.cls
    return _double_sum(c.n1, c.n2, c.n3, 1.0 - q.model.pe, q.model.pe, 0)


def sigma_extended(q: SigmaQuery) -> float:
    """Exact coefficient for the extended ZI/IZ/ZZ error model."""
    if q.model.kind != "extended":
        raise ValueError("sigma_extended expects the extended model")
    c = q.cls
    half = q.model.pe / 2.0
    extra = c.n3 * (c.n3 - 1) // 2
    return _double_sum(c.n1, c.n2, c.n3, 1.0 - half, half, extra)


def sigma_approx(q: SigmaQuery) -> float:
    """Leading-order approximation (1 - pe)**(n3 (n - n3))."""
    if q.model.kind not in ("zz", "noiseless"):
        raise ValueError("sigma_approx expects the zz model")
    c = q.cls
    return (1.0 - q.model.pe) ** (c.n3 * (c.n - c.n3))


def sigma_approx_sites(p: PauliString, model: NoiseModel) -> float:
    """Heterogeneous-rate approximation; needs the concrete site split."""
    if model.kind != "zz_het":
        raise ValueError("site-resolved approximation is for zz_het")
    xy_sites = [q for q in range(p.n) if (p.x >> q) & 1]
    other = [q for q in range(p.n) if not (p.x >> q) & 1]
    out = 1.0
    for s in other:
        for t in xy_sites:
            out *= 1.0 - model.rate(s, t)
    return out


def sigma_class_value(n1: int, n2: int, n3: int, model: NoiseModel) -> float:
    """Memoized per-class dispatch used by the estimators."""
    key = (model.kind, model.pe, n1, n2, n3)
    cached = _CLASS_CACHE.get(key)
    if cached is not None:
        return cached
    cls = PauliClass(n1, n2, n3)
    if model.kind == "noiseless":
        value = _double_sum(n1, n2, n3, 1.0, 0.0, 0)
    elif model.kind == "zz":
        value = sigma_exact(SigmaQuery(cls, model))
    elif model.kind == "extended":
        value = sigma_extended(SigmaQuery(cls, model))
    else:
        raise ValueError("per-class values are undefined for zz_het")
    _CLASS_CACHE[key] = value
    return value


_CLASS_CACHE: dict = {}


def sigma_for(p: PauliString, model: NoiseModel) -> float:
    """Coefficient of a concrete Pauli; rejects the Z-type set."""
    if is_ztype(p):
        raise ZTypePauliError("inversion weight undefined for Z-type Paulis")
    if model.kind == "zz_het":
        return sigma_approx_sites(p, model)
    c = classify(p)
    return sigma_class_value(c.n1, c.n2, c.n3, model)


def require_invertible(value: float) -> float:
    if value < SIGMA_MIN:
        raise SigmaThresholdError(
            f"coefficient {value:.3e} below inversion threshold {SIGMA_MIN:.0e}"
        )
    return value


def class_table(n: int, model: NoiseModel) -> Iterable[tuple[int, int, int, float]]:
    """All (n1, n2, n3, value) rows for the given qubit count."""
    for n3 in range(n + 1):
        for n2 in range(n - n3 + 1):
            n1 = n - n2 - n3
            yield n1, n2, n3, sigma_class_value(n1, n2, n3, model)


def write_class_table(path, n: int, model: NoiseModel) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["n1", "n2", "n3", "sigma"])
        for row in class_table(n, model):
            writer.writerow([row[0], row[1], row[2], repr(row[3])])
