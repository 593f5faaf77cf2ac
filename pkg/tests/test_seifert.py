from fractions import Fraction
from math import gcd

import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from reebkit.errors import (InvalidInvariants, NonCoprimeInput, NonCoprimePair, NonNegativeEuler,
                            NonNegativeEulerNumber, ZeroAlphaPair)
from reebkit.seifert import (SeifertInvariants, besse_volume, connectivity_certificate, dual_pair,
                             euler_number, format_rational, k0_index, parse_pairs, rational_from_json,
                             rational_to_json, sos_data, validate_invariants)

from oracles import dual_pair_bruteforce, euler_by_common_denominator


@st.composite
def seifert_pair(draw, max_alpha=12):
    a = draw(st.integers(1, max_alpha))
    if a == 1:
        b = draw(st.integers(-3, 6))
    else:
        b = draw(st.integers(-2 * a, 4 * a).filter(lambda b: b != 0 and gcd(a, abs(b)) == 1))
    return a, b


@st.composite
def negative_euler_invariants(draw):
    pairs = draw(st.lists(seifert_pair(), min_size=1, max_size=5))
    inv = SeifertInvariants(0, pairs)
    assume(euler_number(inv) < 0)
    return inv


# -- validation ----------------------------------------------------------------

def test_validate_examples():
    assert validate_invariants(SeifertInvariants(0, [(2, 1), (3, 1)]))
    assert validate_invariants(SeifertInvariants(0, [(1, 0)]))
    with pytest.raises(NonCoprimePair) as exc:
        validate_invariants(SeifertInvariants(0, [(4, 2)]))
    assert exc.value.index == 0


def test_validate_rejects_bad_alpha_and_zero_beta():
    with pytest.raises(ZeroAlphaPair):
        validate_invariants(SeifertInvariants(0, [(2, 1), (0, 1)]))
    with pytest.raises(NonCoprimePair):
        validate_invariants(SeifertInvariants(0, [(3, 0)]))
    with pytest.raises(InvalidInvariants):
        validate_invariants(SeifertInvariants(0, []))


# -- euler number --------------------------------------------------------------

@pytest.mark.parametrize("pairs, e", [
    ([(2, 1), (3, 1)], Fraction(-5, 6)),
    ([(1, 0), (1, 0)], Fraction(0)),
    ([(3, 2), (2, -1)], Fraction(-1, 6)),
])
def test_euler_examples(pairs, e):
    assert euler_number(SeifertInvariants(0, pairs)) == e


@given(st.lists(seifert_pair(), min_size=1, max_size=6), st.randoms())
def test_euler_permutation_invariant_and_matches_oracle(pairs, rnd):
    inv = SeifertInvariants(0, pairs)
    shuffled = list(pairs)
    rnd.shuffle(shuffled)
    e = euler_number(inv)
    assert e == euler_number(SeifertInvariants(0, shuffled))
    assert e == euler_by_common_denominator(pairs)


# -- dual pair ------------------------------------------------------------------

@pytest.mark.parametrize("pair, dual", [((1, 0), (0, 1)), ((2, 1), (1, 1)), ((3, 2), (1, 1))])
def test_dual_pair_examples(pair, dual):
    d = dual_pair(*pair)
    assert (d.alpha_prime, d.beta_prime) == dual


@settings(max_examples=1000)
@given(st.integers(1, 10 ** 6), st.integers(-10 ** 6, 10 ** 6))
def test_dual_pair_determinant(alpha, beta):
    assume(gcd(alpha, abs(beta)) == 1)
    d = dual_pair(alpha, beta)
    assert alpha * d.beta_prime - beta * d.alpha_prime == 1
    assert 0 <= d.alpha_prime < alpha


@given(st.integers(1, 60), st.integers(-60, 60))
def test_dual_pair_matches_exhaustive_search(alpha, beta):
    assume(gcd(alpha, abs(beta)) == 1)
    d = dual_pair(alpha, beta)
    assert (d.alpha_prime, d.beta_prime) == dual_pair_bruteforce(alpha, beta)


def test_dual_pair_rejects_noncoprime():
    with pytest.raises(NonCoprimeInput):
        dual_pair(4, 2)


# -- k0 and volume -----------------------------------------------------------------

def test_k0_examples():
    assert k0_index(SeifertInvariants(0, [(2, 1), (3, 1)])) == 4
    assert k0_index(SeifertInvariants(0, [(1, 0)])) == 1
    for k in range(1, 9):
        # E(1, k): one singular orbit of multiplicity k
        assert k0_index(SeifertInvariants(0, [(k, 1), (1, 0)] if k > 1 else [(1, 0)])) == k


@given(st.lists(seifert_pair(), min_size=1, max_size=5), st.integers(1, 4))
def test_k0_ignores_trivial_pairs(pairs, n):
    inv = SeifertInvariants(0, pairs)
    padded = SeifertInvariants(0, list(pairs) + [(1, 0)] * n)
    assert k0_index(inv) == k0_index(padded)


@pytest.mark.parametrize("e, T, vol", [
    (Fraction(-5, 6), 1, Fraction(5, 6)),
    (Fraction(-1), 1, Fraction(1)),
    (Fraction(-1, 6), 6, Fraction(6)),
])
def test_besse_volume_examples(e, T, vol):
    assert besse_volume(e, T) == vol


def test_besse_volume_rejects_nonnegative_euler():
    with pytest.raises(NonNegativeEuler):
        besse_volume(Fraction(0), 1)


# -- surface of section data ---------------------------------------------------------

def test_sos_examples():
    d = sos_data(SeifertInvariants(0, [(2, 1), (3, 1)]), 0)
    assert d.to_json() == {"alpha": 3, "beta": 1, "p": 5, "q": -4, "b": 1, "p0": 5, "q0": -4}
    d = sos_data(SeifertInvariants(0, [(3, 2), (2, -1)]), 0)
    assert d.to_json() == {"alpha": 2, "beta": -1, "p": 1, "q": -1, "b": 1, "p0": 1, "q0": -1}
    with pytest.raises(NonNegativeEulerNumber):
        sos_data(SeifertInvariants(0, [(1, 0), (1, 0)]), 0)


@settings(max_examples=300)
@given(negative_euler_invariants(), st.data())
def test_sos_identities(inv, data):
    j = data.draw(st.integers(0, len(inv.pairs) - 1))
    e = euler_number(inv)
    a1, b1 = inv.pairs[j]
    d = sos_data(inv, j)
    dp = dual_pair(a1, b1)
    assert d.alpha * e * a1 == -d.b * d.p0
    assert Fraction(d.q0, d.p0) < Fraction(-dp.alpha_prime, a1)
    assert gcd(d.p0, abs(d.q0)) == 1 and d.b * d.p0 == d.p
    assert connectivity_certificate(inv, j) == 1


@pytest.mark.parametrize("pairs", [[(2, 1), (3, 1)], [(1, 0), (5, 1)], [(1, 0)], [(1, 1)]])
def test_connectivity_examples(pairs):
    assert connectivity_certificate(SeifertInvariants(0, pairs), 0) == 1


# -- parsing and serialisation -----------------------------------------------------------

def test_parse_pairs():
    assert parse_pairs("2,1:3,1").pairs == ((2, 1), (3, 1))
    with pytest.raises(ValueError):
        parse_pairs("2,1:3")


@given(st.lists(seifert_pair(), min_size=1, max_size=4), st.integers(0, 3))
def test_invariants_json_roundtrip(pairs, genus):
    inv = SeifertInvariants(genus, pairs)
    assert SeifertInvariants.from_json(inv.to_json()) == inv


@given(st.fractions())
def test_rational_roundtrip(x):
    assert rational_from_json(rational_to_json(x)) == x
    num, den = format_rational(x).split("/")
    assert Fraction(int(num), int(den)) == x
