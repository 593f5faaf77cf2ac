"""Exact arithmetic on Seifert invariants of Besse Reeb flows.

All quantities are integers or :class:`fractions.Fraction`; nothing here
touches floating point.  A Seifert fibration is described by a genus and a
list of coprime pairs ``(alpha_j, beta_j)``; the functions below compute its
Euler number, the stabilisation index ``k0``, canonical Bezout duals and the
integer data of a global surface of section bounded by one chosen fiber.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from math import gcd, lcm

from .errors import (
    InternalConsistencyFailure,
    InvalidInvariants,
    NonCoprimeInput,
    NonCoprimePair,
    NonNegativeEuler,
    NonNegativeEulerNumber,
    NonPositivePeriod,
    ZeroAlphaPair,
)

Rational = Fraction

TRIVIAL_PAIR = (1, 0)


def rational_to_json(x) -> dict:
    x = Fraction(x)
    return {"num": x.numerator, "den": x.denominator}


def rational_from_json(obj) -> Fraction:
    den = int(obj["den"])
    if den <= 0:
        raise ValueError(f"denominator must be positive, got {den}")
    return Fraction(int(obj["num"]), den)


def format_rational(x) -> str:
    """Render as ``num/den`` (always with a denominator, never as a float)."""
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


@dataclass(frozen=True)
class SeifertInvariants:
    genus: int
    pairs: tuple

    def __init__(self, genus=0, pairs=()):
        object.__setattr__(self, "genus", int(genus))
        object.__setattr__(self, "pairs", tuple((int(a), int(b)) for a, b in pairs))

    @property
    def alphas(self):
        return [a for a, _ in self.pairs]

    def to_json(self) -> dict:
        return {"genus": self.genus, "pairs": [list(p) for p in self.pairs]}

    @classmethod
    def from_json(cls, obj):
        if isinstance(obj, str):
            obj = json.loads(obj)
        return cls(obj.get("genus", 0), [tuple(p) for p in obj["pairs"]])

    def padded(self):
        """Copy with a trivial pair appended when there is only one pair."""
        if len(self.pairs) >= 2:
            return self
        return SeifertInvariants(self.genus, self.pairs + (TRIVIAL_PAIR,))


@dataclass(frozen=True)
class DualPair:
    alpha_prime: int
    beta_prime: int


@dataclass(frozen=True)
class SosData:
    """Integer data of the surface of section bounded by the chosen fiber.

    ``alpha`` is the number of times a regular fiber crosses the section,
    ``b`` the number of boundary components and ``(p0, q0)`` the slope of
    each boundary collar around the chosen fiber.
    """

    alpha: int
    beta: int
    p: int
    q: int
    b: int
    p0: int
    q0: int

    def to_json(self) -> dict:
        return {k: getattr(self, k) for k in ("alpha", "beta", "p", "q", "b", "p0", "q0")}


def validate_invariants(inv: SeifertInvariants) -> SeifertInvariants:
    if inv.genus < 0:
        raise InvalidInvariants(f"genus must be non-negative, got {inv.genus}")
    if not inv.pairs:
        raise InvalidInvariants("at least one Seifert pair is required")
    for j, (a, b) in enumerate(inv.pairs):
        if a <= 0:
            raise ZeroAlphaPair(j, (a, b))
        # gcd(a, 0) = a, so a zero beta with a > 1 lands here as well
        if gcd(a, abs(b)) != 1:
            raise NonCoprimePair(j, (a, b))
    return inv


def euler_number(inv: SeifertInvariants) -> Fraction:
    validate_invariants(inv)
    return -sum((Fraction(b, a) for a, b in inv.pairs), Fraction(0))


def dual_pair(alpha: int, beta: int) -> DualPair:
    """Canonical solution of ``alpha*beta' - beta*alpha' = 1`` with ``0 <= alpha' < alpha``."""
    if alpha <= 0:
        raise NonCoprimeInput(f"alpha must be positive, got {alpha}")
    if gcd(alpha, abs(beta)) != 1:
        raise NonCoprimeInput(f"gcd({alpha}, {beta}) != 1")
    # beta * alpha' = -1 (mod alpha)
    alpha_p = (-pow(beta, -1, alpha)) % alpha if alpha > 1 else 0
    num = 1 + beta * alpha_p
    beta_p, rem = divmod(num, alpha)
    if rem:
        raise InternalConsistencyFailure(f"dual pair of ({alpha}, {beta}) not integral")
    return DualPair(alpha_p, beta_p)


def k0_index(inv: SeifertInvariants) -> int:
    validate_invariants(inv)
    singular = [a for a in inv.alphas if a > 1]
    return sum(singular) - len(singular) + 1


def besse_volume(e, T) -> Fraction:
    """Contact volume ``-T**2 * e`` of a Besse form with common period ``T``."""
    e, T = Fraction(e), Fraction(T)
    if e >= 0:
        raise NonNegativeEuler(f"Euler number must be negative, got {e}")
    if T <= 0:
        raise NonPositivePeriod(f"common period must be positive, got {T}")
    return -T * T * e


def _reorder(inv: SeifertInvariants, orbit_index: int):
    validate_invariants(inv)
    pairs = list(inv.pairs)
    if not 0 <= orbit_index < len(pairs):
        raise IndexError(f"orbit index {orbit_index} out of range for {len(pairs)} pairs")
    first = pairs.pop(orbit_index)
    rest = pairs or [TRIVIAL_PAIR]
    return first, rest


def sos_data(inv: SeifertInvariants, orbit_index: int = 0) -> SosData:
    e = euler_number(inv)
    if e >= 0:
        raise NonNegativeEulerNumber(f"Euler number must be negative, got {e}")
    (a1, b1), rest = _reorder(inv, orbit_index)
    d1 = dual_pair(a1, b1)

    alpha = reduce(lcm, (a for a, _ in rest))
    beta_frac = sum((Fraction(b, a) for a, b in rest), Fraction(0)) * alpha
    if beta_frac.denominator != 1:
        raise InternalConsistencyFailure(f"beta = {beta_frac} is not an integer")
    beta = beta_frac.numerator

    p = b1 * alpha + a1 * beta
    q = -d1.beta_prime * alpha - d1.alpha_prime * beta
    b = gcd(p, abs(q))
    if p <= 0 or b <= 0:
        raise InternalConsistencyFailure(f"p = {p} must be positive")
    data = SosData(alpha, beta, p, q, b, p // b, q // b)
    _check_sos(data, e, a1, d1)
    return data


def _check_sos(d: SosData, e: Fraction, a1: int, d1: DualPair):
    if d.p != -e * a1 * d.alpha:
        raise InternalConsistencyFailure(f"p = {d.p} differs from -e*alpha_1*alpha")
    if gcd(d.p0, abs(d.q0)) != 1 or d.p0 * d.b != d.p or d.q0 * d.b != d.q:
        raise InternalConsistencyFailure(f"bad reduction of ({d.p}, {d.q})")
    if not Fraction(d.q0, d.p0) < Fraction(-d1.alpha_prime, a1):
        raise InternalConsistencyFailure(f"transversality fails: {d.q0}/{d.p0} >= -{d1.alpha_prime}/{a1}")
    if Fraction(d.alpha) != -Fraction(d.b * d.p0) / (e * a1):
        raise InternalConsistencyFailure("alpha != -b*p0/(e*alpha_1)")
    # inverse relations of the (p, q) change of basis
    if -d.alpha != a1 * d.q + d1.alpha_prime * d.p:
        raise InternalConsistencyFailure("inverse relation for alpha fails")


def connectivity_certificate(inv: SeifertInvariants, orbit_index: int = 0) -> int:
    """Check that the constructed section is connected; returns the gcd (always 1).

    The gcd involves only the pairs other than the binding one, so the sign
    of the Euler number plays no role here.
    """
    _, rest = _reorder(inv, orbit_index)
    alpha = reduce(lcm, (a for a, _ in rest))
    terms = [alpha] + [b * (alpha // a) for a, b in rest]
    g = reduce(gcd, (abs(t) for t in terms))
    if g != 1:
        raise InternalConsistencyFailure(f"section disconnected: gcd{tuple(terms)} = {g}")
    return g


def parse_pairs(text: str) -> SeifertInvariants:
    """Parse the colon-separated grammar ``2,1:3,1`` into genus-0 invariants."""
    pairs = []
    for chunk in text.split(":"):
        parts = chunk.split(",")
        if len(parts) != 2:
            raise ValueError(f"malformed Seifert pair {chunk!r}")
        pairs.append((int(parts[0]), int(parts[1])))
    return SeifertInvariants(0, pairs)
