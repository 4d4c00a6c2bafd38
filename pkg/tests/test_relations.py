import json
from collections import Counter

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gaussweyl.characters import LimitCharacter
from gaussweyl.relations import (
    Decomposition, GaussMonomial, InH, Move, MonomialParseError, NotInH, combine,
    constancy_variance, decompose, expand_move, format_monomial, numeric_crosscheck,
    parse_monomial, product_of_moves, random_monomial, random_moves, smallest_level,
    verify_decomposition,
)

ONE = LimitCharacter.trivial()
HALF = LimitCharacter(1, 2)
FIELDS = [(5, 1), (7, 1), (3, 2), (13, 1)]


def mono(p, f, r, terms):
    return GaussMonomial(p, f, r, terms)


def r_example():
    return mono(5, 1, 1, {(ONE, (2,)): 1, (ONE, (1,)): -1, (HALF, (1,)): -1})


def test_expand_examples():
    assert expand_move(Move("P", ONE, (1,)), 5, 1).terms == {(ONE, (-1,)): 1, (ONE, (1,)): 1}
    assert expand_move(Move("Q", ONE, (1,)), 5, 1).terms == {(ONE, (1,)): 1, (ONE, (5,)): -1}
    assert expand_move(Move("R", ONE, (1,), 2), 5, 1) == r_example() ** -1
    assert len(expand_move(Move("R", LimitCharacter(1, 4), (1, 1), 4), 5, 1)) == 5


def test_expand_rejects_bad_moves():
    with pytest.raises(ValueError):
        expand_move(Move("R", ONE, (1,), 3), 5, 1)
    with pytest.raises(ValueError):
        expand_move(Move("Q", LimitCharacter(1, 3), (1,)), 5, 1)
    with pytest.raises(ValueError):
        Move("S", ONE, (1,))
    with pytest.raises(ValueError):
        Move("P", ONE, (0,))


def test_combine_normal_form():
    x = r_example()
    assert len(combine(x * x**-1)) == 0
    assert combine(x) == x
    assert combine(combine(x)) == combine(x)


def multiset_product(monomials):
    """Independent accounting with a Counter of (eta fraction, a) keys."""
    total = Counter()
    for x in monomials:
        for (eta, a), e in x.terms.items():
            total[(eta.value, a)] += e
    return {k: v for k, v in total.items() if v}


@given(st.integers(0, 2**32 - 1), st.sampled_from(FIELDS), st.integers(1, 2))
def test_combine_matches_multiset_accounting(seed, field, r):
    rng = np.random.default_rng(seed)
    parts = [expand_move(mv, *field) for mv in random_moves(rng, *field, r)]
    x = product_of_moves([], *field, r)
    for part in parts:
        x = x * part
    assert {(eta.value, a): e for (eta, a), e in x.terms.items()} == multiset_product(parts)


def test_decompose_empty():
    res = decompose(mono(5, 1, 1, {}))
    assert isinstance(res, InH) and res.decomposition.moves == []


def test_single_gauss_sum_is_not_a_relation():
    res = decompose(mono(5, 1, 1, {(ONE, (1,)): 1}))
    assert isinstance(res, NotInH)
    assert res.witness["kind"] == "independent"
    assert res.witness["certificate"]["groups"][0]["rank"] == 1


def test_r_example_uses_one_move():
    res = decompose(r_example())
    assert isinstance(res, InH)
    assert res.decomposition.moves == [Move("R", ONE, (1,), 2, -1)]
    assert verify_decomposition(r_example(), res.decomposition)


def test_tampered_certificate_fails():
    dec = decompose(r_example()).decomposition
    bad = Decomposition(dec.p, dec.f, dec.r, [Move("R", ONE, (1,), 2, -2)])
    assert not verify_decomposition(r_example(), bad)
    assert not verify_decomposition(r_example(), Decomposition(7, 1, 1, dec.moves))


@pytest.mark.parametrize("eta,a", [(ONE, (1,)), (LimitCharacter(1, 4), (2,)), (HALF, (1, 3))])
def test_frobenius_fixed_point(eta, a):
    x = expand_move(Move("Q", eta, a), 5, 1)
    res = decompose(x)
    assert isinstance(res, InH)
    assert [mv.kind for mv in res.decomposition.moves] == ["Q"]
    assert verify_decomposition(x, res.decomposition)


@given(st.integers(0, 2**32 - 1), st.sampled_from(FIELDS), st.integers(1, 2))
def test_random_relation_products_decompose(seed, field, r):
    rng = np.random.default_rng(seed)
    x = product_of_moves(random_moves(rng, *field, r), *field, r)
    res = decompose(x)
    assert isinstance(res, InH)
    assert verify_decomposition(x, res.decomposition)
    mus = res.decomposition.mu_sequence
    assert all(b <= a for a, b in zip(mus, mus[1:]))


def test_mu_strictly_decreases_on_reduction_steps():
    x = mono(7, 1, 1, {(ONE, (6,)): 1, (ONE, (1,)): -1})
    res = decompose(x)
    mus = res.mu_sequence if isinstance(res, NotInH) else res.decomposition.mu_sequence
    assert mus == sorted(mus, reverse=True) and len(set(mus)) == len(mus)


def test_crosscheck_generators():
    p_move = Move("P", ONE, (1,))
    x = expand_move(p_move, 5, 1)
    dec = Decomposition(5, 1, 1, [p_move])
    assert dec.t_exponents() == {-1: [1]}
    assert abs(dec.d_value() - 5) < 1e-12
    for m in (1, 2, 3):
        assert numeric_crosscheck(x, dec, m).deviation < 1e-8
    q_move = Move("Q", LimitCharacter(1, 4), (1,))
    dec = Decomposition(5, 1, 1, [q_move])
    assert dec.d_value() == 1 and dec.t_exponents() == {}
    assert numeric_crosscheck(expand_move(q_move, 5, 1), dec, 2).deviation < 1e-8


def test_crosscheck_r_example_and_sampling():
    dec = decompose(r_example()).decomposition
    for m in (1, 2):
        assert numeric_crosscheck(r_example(), dec, m).deviation < 1e-8
    a = numeric_crosscheck(r_example(), dec, 3, sample_size=50, seed=4)
    b = numeric_crosscheck(r_example(), dec, 3, sample_size=50, seed=4)
    assert a == b and a.deviation < 1e-8


def test_crosscheck_exhausted_sample():
    p_move = Move("P", ONE, (2,))
    x = expand_move(p_move, 3, 1)
    with pytest.raises(ValueError):
        numeric_crosscheck(x, Decomposition(3, 1, 1, [p_move]), 1)


def test_not_in_h_is_not_constant():
    x = mono(5, 1, 1, {(ONE, (1,)): 1})
    m = smallest_level(x)
    assert m == 3
    assert constancy_variance(x, m) > 0.5


# text formats


def test_parse_and_format_round_trip():
    text = "[eta=0/1; a=(2); exp=1] * [eta=0/1; a=(1); exp=-1] * [eta=1/2; a=(1); exp=-1]"
    x = parse_monomial(text, 5, 1)
    assert x == r_example()
    assert parse_monomial(format_monomial(x), 5, 1) == x
    assert len(parse_monomial("1", 5, 1, r=2)) == 0


@pytest.mark.parametrize("text,pos", [
    ("[eta=0/1; a=(2); exp=1] + [eta=0/1; a=(1); exp=-1]", 24),
    ("[eta=1/3; a=(1); exp=1]", 5),
    ("[eta=0/1; a=(1,2); exp=1] * [eta=0/1; a=(1); exp=1]", 41),
    ("eta=0/1", 0),
    ("[eta=0/1; a=(0); exp=1]", 13),
])
def test_parse_errors_report_position(text, pos):
    with pytest.raises(MonomialParseError) as info:
        parse_monomial(text, 5, 1)
    assert info.value.position == pos


def test_json_round_trip():
    rng = np.random.default_rng(3)
    x = product_of_moves(random_moves(rng, 7, 1, 2), 7, 1, 2)
    dec = decompose(x).decomposition
    data = json.loads(json.dumps(dec.to_json()))
    again = Decomposition.from_json(data, 7, 1)
    assert again.moves == dec.moves
    assert verify_decomposition(x, again)


def test_random_monomial_is_nonempty():
    rng = np.random.default_rng(0)
    for field in FIELDS:
        assert len(random_monomial(rng, *field, 2)) > 0
