import cmath
import math
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from gaussweyl.characters import (
    AdditiveCharacter, LimitCharacter, MultCharacter, eval_mult, pth_root, pth_root_limit,
    pullback_index, realize, roots_mu, roots_of_unity, roots_over_k, to_limit, tower_index,
)
from gaussweyl.field_tower import get_tower, make_field


def test_roots_of_unity_exact_points_and_read_only():
    w = roots_of_unity(12)
    assert w[0] == 1 and w[6] == -1 and w[3] == 1j and w[9] == -1j
    with pytest.raises(ValueError):
        w[1] = 0


def test_limit_character_reduces_and_round_trips():
    xi = LimitCharacter(6, 8)
    assert (xi.u, xi.v) == (3, 4)
    assert str(xi) == "3/4"
    assert LimitCharacter.parse(" -1 / 4 ") == LimitCharacter(3, 4)
    assert LimitCharacter(5, 5).is_trivial
    with pytest.raises(ValueError):
        LimitCharacter.parse("1/")


def test_limit_character_index_at_levels():
    xi = LimitCharacter(1, 4)
    assert xi.index_at(5) == 1
    assert xi.index_at(5, 2) == 6
    with pytest.raises(ValueError):
        xi.index_at(7)


def test_mult_character_text_round_trip():
    chi = MultCharacter(3, 2, 11)
    assert str(chi) == "3 mod 8"
    assert MultCharacter.parse(str(chi), 3) == chi
    assert chi.order == 8 and MultCharacter(3, 2, 4).order == 2


def test_realize_and_to_limit_are_inverse():
    for e in range(24):
        chi = MultCharacter(5, 2, e)
        assert realize(to_limit(chi), 5, 2) == chi


def test_pullback_index_matches_composition_with_norm():
    tower = get_tower(3, 1, 2)
    k1, k2 = tower.level(1), tower.level(2)
    for e in range(k1.n_units):
        up = pullback_index(e, 3, 1, 2)
        for x in k2.elements()[1:]:
            direct = eval_mult(MultCharacter(3, 1, e), k1, tower.restrict(k2.norm_to_level(x, 1), 2, 1))
            assert abs(eval_mult(MultCharacter(3, 2, up), k2, x) - direct) < 1e-12


def test_additive_character_is_a_homomorphism():
    ctx = make_field(3, 1, 2)
    psi = AdditiveCharacter(ctx, ctx.from_code(4))
    for x in ctx.elements():
        for y in ctx.elements()[:5]:
            assert abs(psi(ctx.add(x, y)) - psi(x) * psi(y)) < 1e-12


def test_roots_mu_examples():
    # square roots of the trivial character over p = 5: 0 and 1/2
    assert roots_mu(LimitCharacter.trivial(), 2, 5) == [LimitCharacter(0, 1), LimitCharacter(1, 2)]
    # mu divisible by p: only the prime-to-p roots survive
    assert roots_mu(LimitCharacter.trivial(), 3, 3) == [LimitCharacter(0, 1)]


@given(st.integers(0, 50), st.sampled_from([1, 2, 4, 8, 3, 6]), st.integers(1, 12), st.sampled_from([5, 7, 11]))
def test_roots_mu_are_exactly_the_prime_to_p_roots(u, v, mu, p):
    if v % p == 0:
        return
    eta = LimitCharacter(u, v)
    roots = roots_mu(eta, mu, p)
    assert all(xi**mu == eta and xi.v % p for xi in roots)
    mu_prime = mu
    while mu_prime % p == 0:
        mu_prime //= p
    assert len(roots) == mu_prime
    assert roots == sorted(roots)


@given(st.integers(0, 100), st.integers(1, 12), st.sampled_from([5, 7, 9, 13, 25]))
def test_roots_over_k(e, d, q):
    n = q - 1
    brute = sorted(y for y in range(n) if (d * y - e) % n == 0)
    assert roots_over_k(e % n, d, q) == brute


@given(st.integers(1, 23))
def test_pth_root(e):
    chi = MultCharacter(5, 2, e)
    assert pth_root(chi, 5) ** 5 == chi
    xi = to_limit(chi)
    assert pth_root_limit(xi, 5) ** 5 == xi


def test_pth_root_rejects_denominator_divisible_by_p():
    with pytest.raises(ValueError):
        pth_root_limit(LimitCharacter(1, 5), 5)


@pytest.mark.parametrize("p,f,m", [(3, 1, 1), (3, 1, 2), (5, 1, 2), (3, 2, 2), (2, 2, 3), (7, 1, 2), (5, 1, 3)])
def test_tower_index_realizes_the_canonical_character(p, f, m):
    """The level-m index of eta is eta composed with the norm, so on an element
    y of the base field it takes the value eta(y)^m."""
    tower = get_tower(p, f, m)
    base = tower.base_ctx
    q = p**f
    ctx = tower.level(m)
    for u in range(q - 1):
        eta = LimitCharacter(u, q - 1)
        idx = tower_index(eta, tower, m)
        for x in base.elements()[1:]:
            expected = cmath.exp(2j * math.pi * float(Fraction(m * u * base.dlog(x), q - 1)))
            image = tower.embed(tower.from_base(x), 1, m)
            assert abs(eval_mult(MultCharacter(q, m, idx), ctx, image) - expected) < 1e-12
