import itertools

import pytest
from hypothesis import given
from hypothesis import strategies as st

from gaussweyl.field_tower import (
    FieldConfigError, FieldCtx, FieldParams, Tower, get_tower, is_irreducible, make_field,
    smallest_irreducible, split_prime_power,
)


def brute_irreducible(poly, p):
    """No monic factor of degree <= deg/2, by trial division over all candidates."""
    deg = len(poly) - 1
    for d in range(1, deg // 2 + 1):
        for tail in itertools.product(range(p), repeat=d):
            div = list(tail) + [1]
            rem = list(poly)
            while len(rem) >= len(div):
                lead = rem[-1]
                shift = len(rem) - len(div)
                for j, c in enumerate(div):
                    rem[shift + j] = (rem[shift + j] - lead * c) % p
                rem.pop()
            if not any(rem):
                return False
    return True


@pytest.mark.parametrize("p,deg", [(2, 2), (2, 3), (2, 4), (3, 2), (3, 3), (5, 2)])
def test_irreducibility_matches_trial_division(p, deg):
    for tail in itertools.product(range(p), repeat=deg):
        poly = list(tail) + [1]
        assert is_irreducible(poly, p) == brute_irreducible(poly, p)


def test_smallest_irreducible_examples():
    assert tuple(smallest_irreducible(3, 2)) == (1, 0, 1)
    assert tuple(smallest_irreducible(2, 2)) == (1, 1, 1)


def test_prime_field_generator():
    ctx = make_field(5, 1, 1)
    assert ctx.generator == (2,)
    assert [ctx.exp(k) for k in range(4)] == [(1,), (2,), (4,), (3,)]


def test_f9_modulus_and_generator():
    ctx = make_field(3, 1, 2)
    assert ctx.modulus == (1, 0, 1)
    assert ctx.generator == (1, 1)


def test_norm_of_top_generator_is_lower_generator():
    tower = Tower(5, 1, 2)
    top, low = tower.level(2), tower.level(1)
    norm = top.norm_to_level(top.generator, 1)
    assert tower.restrict(norm, 2, 1) == low.generator


@pytest.mark.parametrize("p,f,top", [(2, 1, 6), (3, 1, 4), (5, 1, 2), (2, 2, 3)])
def test_embedding_is_a_ring_homomorphism(p, f, top):
    tower = get_tower(p, f, top)
    for m in (d for d in range(1, top + 1) if top % d == 0):
        src = tower.level(m)
        elems = src.elements()[:12]
        for x, y in itertools.product(elems, repeat=2):
            ex, ey = tower.embed(x, m, top), tower.embed(y, m, top)
            dst = tower.level(top)
            assert tower.embed(src.add(x, y), m, top) == dst.add(ex, ey)
            assert tower.embed(src.mul(x, y), m, top) == dst.mul(ex, ey)
            assert tower.restrict(ex, top, m) == x


def test_base_identification_is_multiplicative():
    tower = get_tower(3, 2, 2)
    base = tower.base_ctx
    k = tower.level(1)
    for x, y in itertools.product(base.elements(), repeat=2):
        assert tower.from_base(base.mul(x, y)) == k.mul(tower.from_base(x), tower.from_base(y))
        assert tower.from_base(base.add(x, y)) == k.add(tower.from_base(x), tower.from_base(y))


def test_bsgs_agrees_with_tables():
    with_tables = make_field(3, 1, 5)
    params = FieldParams(3, 1, 5)
    bare = FieldCtx(params, with_tables.modulus, with_tables.generator, table_budget=0)
    assert bare.log_table is None
    for k in range(0, with_tables.n_units, 7):
        x = with_tables.exp(k)
        assert bare.dlog(x) == k
        assert bare.exp(k) == x


def test_trace_is_additive_and_lands_in_prime_field():
    ctx = make_field(2, 1, 5)
    elems = ctx.elements()
    for x, y in itertools.product(elems[:8], elems[:8]):
        assert ctx.trace_to_prime(ctx.add(x, y)) == (ctx.trace_to_prime(x) + ctx.trace_to_prime(y)) % 2
    assert ctx.trace_to_prime(ctx.one) == 5 % 2


@pytest.mark.parametrize("bad", [(4, 1, 1), (1, 1, 1), (6, 1, 2)])
def test_rejects_nonprime_characteristic(bad):
    with pytest.raises(FieldConfigError):
        make_field(*bad)


def test_rejects_level_not_dividing_top():
    with pytest.raises(FieldConfigError):
        get_tower(3, 1, 4).level(3)


def test_split_prime_power():
    assert split_prime_power(125) == (5, 3)
    assert split_prime_power(7) == (7, 1)
    with pytest.raises(FieldConfigError):
        split_prime_power(12)


field_params = st.sampled_from([(2, 1, 4), (3, 1, 3), (5, 1, 2), (7, 1, 1), (2, 3, 1)])


@given(field_params, st.data())
def test_field_axioms(params, data):
    ctx = make_field(*params)
    elem = st.integers(0, ctx.order - 1).map(ctx.from_code)
    x, y, z = data.draw(elem), data.draw(elem), data.draw(elem)
    assert ctx.mul(x, ctx.add(y, z)) == ctx.add(ctx.mul(x, y), ctx.mul(x, z))
    assert ctx.mul(ctx.mul(x, y), z) == ctx.mul(x, ctx.mul(y, z))
    if any(x):
        assert ctx.mul(x, ctx.inv(x)) == ctx.one
        assert ctx.exp(ctx.dlog(x)) == x
    assert ctx.pow(x, ctx.order) == x


@given(st.sampled_from([(2, 1, 6), (3, 1, 4), (2, 2, 2)]), st.integers(0, 10**6))
def test_norm_is_multiplicative_and_lands_in_subfield(params, k):
    tower = get_tower(*params)
    top = tower.level(params[2])
    x = top.exp(k)
    y = top.exp(3 * k + 1)
    nx, ny = top.norm_to_level(x, 1), top.norm_to_level(y, 1)
    assert top.norm_to_level(top.mul(x, y), 1) == top.mul(nx, ny)
    tower.restrict(nx, params[2], 1)
