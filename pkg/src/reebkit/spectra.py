"""Action spectra, tau_k and higher systolic ratios of Besse contact forms.

Everything is exact.  A Besse model is Seifert data together with the common
period ``T`` of its regular orbits; the singular orbit with multiplicity
``alpha`` has minimal period ``T/alpha``.
"""

from __future__ import annotations

import enum
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from math import gcd

from .errors import (
    NonCoprime,
    NonNegativeEulerNumber,
    NonPositiveVolume,
    SmoothSphereCase,
    Unbounded,
    Unordered,
)
from .seifert import (
    SeifertInvariants,
    besse_volume,
    euler_number,
    k0_index,
    rational_from_json,
    rational_to_json,
    validate_invariants,
)


class Count(enum.Enum):
    INFINITE = "inf"

    def __repr__(self):
        return "INFINITE"


INFINITE = Count.INFINITE


@dataclass(frozen=True)
class PeriodMultiset:
    """Sorted ``(minimal_period, count)`` entries; count is an int or INFINITE."""

    entries: tuple

    def __init__(self, entries):
        ents = tuple(sorted(((p, c) for p, c in entries), key=lambda e: e[0]))
        for p, c in ents:
            if not p > 0:
                raise ValueError(f"periods must be positive, got {p}")
            if c is not INFINITE and (int(c) != c or c <= 0):
                raise ValueError(f"counts must be positive integers or INFINITE, got {c}")
        periods = [p for p, _ in ents]
        if len(set(periods)) != len(periods):
            raise ValueError("periods must be strictly increasing")
        if sum(c is INFINITE for _, c in ents) > 1:
            raise ValueError("at most one INFINITE entry")
        object.__setattr__(self, "entries", ents)

    def to_json(self):
        out = []
        for p, c in self.entries:
            period = rational_to_json(p) if isinstance(p, (int, Fraction)) else float(p)
            out.append({"period": period, "count": "inf" if c is INFINITE else int(c)})
        return out

    @classmethod
    def from_json(cls, obj):
        ents = []
        for e in obj:
            p = e["period"]
            p = rational_from_json(p) if isinstance(p, dict) else float(p)
            c = INFINITE if e["count"] == "inf" else int(e["count"])
            ents.append((p, c))
        return cls(ents)


@dataclass(frozen=True)
class BesseModel:
    invariants: SeifertInvariants
    common_period: Fraction

    def __post_init__(self):
        validate_invariants(self.invariants)
        T = Fraction(self.common_period)
        object.__setattr__(self, "common_period", T)
        if T <= 0:
            raise ValueError(f"common period must be positive, got {T}")
        e = euler_number(self.invariants)
        if e >= 0:
            raise NonNegativeEulerNumber(f"Besse models need e < 0, got {e}")

    @property
    def euler(self) -> Fraction:
        return euler_number(self.invariants)

    @property
    def k0(self) -> int:
        return k0_index(self.invariants)

    @property
    def volume(self) -> Fraction:
        return besse_volume(self.euler, self.common_period)


def period_multiset(model: BesseModel) -> PeriodMultiset:
    T = model.common_period
    counts = Counter(T / a for a in model.invariants.alphas if a > 1)
    return PeriodMultiset(list(counts.items()) + [(T, INFINITE)])


def tau_k(ms: PeriodMultiset, k: int):
    """Smallest ``tau`` such that at least ``k`` closed orbits (with iterates) have period <= tau.

    Only the values ``m*period`` with ``m <= k`` can be the infimum, so the
    counting function is evaluated on that finite grid.  Works for exact
    rationals and for floats alike.
    """
    if k < 1:
        raise ValueError(f"k must be positive, got {k}")
    if not ms.entries:
        raise ValueError("empty period multiset")
    candidates = []
    for period, count in ms.entries:
        if count is INFINITE:
            candidates.append((period, k))
        else:
            candidates.extend((m * period, count) for m in range(1, k + 1))
    candidates.sort(key=lambda c: c[0])
    total = 0
    for value, count in candidates:
        total += count
        if total >= k:
            return value
    raise Unbounded(f"only {total} orbits in the multiset, fewer than k={k}")


def rho_k(ms: PeriodMultiset, volume, k: int):
    if not volume > 0:
        raise NonPositiveVolume(f"volume must be positive, got {volume}")
    t = tau_k(ms, k)
    if isinstance(t, (int, Fraction)) and isinstance(volume, (int, Fraction)):
        return Fraction(t) ** 2 / Fraction(volume)
    return float(t) ** 2 / float(volume)


def ellipsoid_pairs(p: int, q: int):
    if p > q:
        raise Unordered(f"need p <= q, got ({p}, {q})")
    if p < 1 or gcd(p, q) != 1:
        raise NonCoprime(f"need coprime positive (p, q), got ({p}, {q})")
    # beta1 * p + beta2 * q = 1 with 0 <= beta1 < q
    beta1 = pow(p, -1, q) if q > 1 else 0
    beta2 = (1 - beta1 * p) // q
    return [(q, beta1), (p, beta2)]


def ellipsoid_model(p: int, q: int) -> BesseModel:
    """Boundary of the ellipsoid E(p, q); Reeb orbits on the axes have periods p and q."""
    return BesseModel(SeifertInvariants(0, ellipsoid_pairs(p, q)), Fraction(p * q))


def spindle_multiplicity(m: int, n: int) -> int:
    s = m + n
    return s if s % 2 else s // 2


def spindle_model(m: int, n: int) -> BesseModel:
    """Geodesic flow of the spindle orbifold S^2(m, n) lifted to L(m+n, 1).

    Both singular orbits have multiplicity ``a`` and period 1 (the equator),
    regular orbits have period ``a``.  The pairs are chosen so that
    ``|H_1| = a**2 * |e| = m + n``.
    """
    if m < 1 or n < 1:
        raise ValueError(f"orders must be positive, got ({m}, {n})")
    if m + n <= 2:
        raise SmoothSphereCase(f"m + n = {m + n} <= 2: the round sphere has no singular orbits")
    a = spindle_multiplicity(m, n)
    pairs = [(a, 2), (a, -1)] if (m + n) % 2 else [(a, 1), (a, 1)]
    return BesseModel(SeifertInvariants(0, pairs), Fraction(a))


def diophantine_maximizers(k: int):
    """Coprime ``p <= q`` with ``p + q - 1 = k``: the ellipsoids with ``k0 = k``."""
    return [(p, k + 1 - p) for p in range(1, (k + 1) // 2 + 1) if gcd(p, k + 1 - p) == 1]


def spectrum_table(model: BesseModel, kmax: int):
    """Rows ``(k, tau_k, rho_k)`` for ``k = 1..kmax``."""
    ms = period_multiset(model)
    vol = model.volume
    return [(k, tau_k(ms, k), rho_k(ms, vol, k)) for k in range(1, kmax + 1)]
