from __future__ import annotations

import itertools
import random

import pytest

from services.freeprod import (
    CyclicFactor,
    FreeProduct,
    FreeProductError,
    NFWord,
    are_conjugate,
    conjugate_into_cyclic_subgroup_family,
    conjugate_into_factor,
    conjugate_to_power,
    cyclically_reduce,
    enumerate_reduced_words,
    inverse,
    multiply,
    oracle_conjugate_search,
    reduce,
    rotate,
)


def _w(group: FreeProduct, text: str) -> NFWord:
    return group.parse_word(text)


def _check_conjugator(w1: NFWord, w2: NFWord, conjugator: NFWord) -> None:
    assert conjugator * w1 * ~conjugator == w2


def test_group_parse_and_format() -> None:
    group = FreeProduct.parse("Z3*Z5*Z")
    assert group.names == ("c1", "c2", "c3")
    assert [factor.order for factor in group.factors] == [3, 5, 0]
    assert group.format() == "Z3*Z5*Z"
    named = FreeProduct.parse("d1=Z*a1=Z")
    assert named.names == ("d1", "a1")
    assert named.format() == "d1=Z*a1=Z"


def test_factor_order_one_rejected() -> None:
    with pytest.raises(FreeProductError):
        CyclicFactor("c", 1)
    with pytest.raises(FreeProductError):
        FreeProduct.parse("Z3*Q5")


def test_reduce_examples() -> None:
    z2z3 = FreeProduct.of_orders(2, 3)
    assert reduce(z2z3, [(0, 1), (0, 1)]).is_identity
    z3z3 = FreeProduct.of_orders(3, 3)
    assert reduce(z3z3, [(0, 1), (1, 1), (1, 2)]).letters == ((0, 1),)
    z3z5 = FreeProduct.of_orders(3, 5)
    assert reduce(z3z5, [(0, 1), (1, 2), (1, 4), (0, 2)]).letters == ((0, 1), (1, 1), (0, 2))


def test_reduce_rejects_invalid_index() -> None:
    with pytest.raises(FreeProductError):
        reduce(FreeProduct.of_orders(2, 3), [(2, 1)])


def test_reduce_is_idempotent_and_nonempty_words_survive() -> None:
    group = FreeProduct.of_orders(3, 5, 0)
    for word in enumerate_reduced_words(group, 3, 2):
        again = reduce(group, word.letters)
        assert again == word
        assert again.is_identity == (len(word) == 0)


def test_nfword_rejects_non_canonical_letters() -> None:
    group = FreeProduct.of_orders(3, 5)
    with pytest.raises(FreeProductError):
        NFWord(group, ((0, 4),))
    with pytest.raises(FreeProductError):
        NFWord(group, ((0, 1), (0, 1)))


def test_multiply_and_inverse_examples() -> None:
    z2 = FreeProduct.of_orders(2, 3)
    c = _w(z2, "c1^1")
    assert multiply(c, _w(z2, "c1^-1")).is_identity
    assert multiply(z2.identity, c) == c
    z3z3 = FreeProduct.of_orders(3, 3)
    assert multiply(_w(z3z3, "c1^1.c2^1"), _w(z3z3, "c2^1.c1^1")).format() == "c1^1.c2^2.c1^1"
    z3z5 = FreeProduct.of_orders(3, 5)
    assert inverse(z3z5.identity).is_identity
    assert inverse(_w(z3z5, "c1^1")).format() == "c1^2"
    word = _w(z3z5, "c1^1.c2^1")
    assert inverse(word).format() == "c2^4.c1^2"
    assert (word * ~word).is_identity


def test_multiply_group_mismatch() -> None:
    with pytest.raises(FreeProductError):
        multiply(FreeProduct.of_orders(2, 3).identity, FreeProduct.of_orders(3, 5).identity)


def test_multiply_is_associative_on_samples() -> None:
    group = FreeProduct.of_orders(2, 3, 0)
    rng = random.Random(7)
    words = list(enumerate_reduced_words(group, 3, 1))
    for _ in range(200):
        a, b, c = (rng.choice(words) for _ in range(3))
        assert (a * b) * c == a * (b * c)


def test_cyclically_reduce_examples() -> None:
    group = FreeProduct.of_orders(3, 5)
    cw, conjugator = cyclically_reduce(_w(group, "c1^1.c2^1.c1^2"))
    assert cw.letters == ((1, 1),)
    assert conjugator.format() == "c1^1"
    cw, conjugator = cyclically_reduce(group.identity)
    assert cw.letters == ()
    assert conjugator.is_identity
    cw, conjugator = cyclically_reduce(_w(group, "c1^1.c2^3"))
    assert cw.letters == ((0, 1), (1, 3))
    assert conjugator.is_identity


def test_cyclically_reduce_reconstructs_word() -> None:
    group = FreeProduct.of_orders(2, 3, 0)
    for word in enumerate_reduced_words(group, 5, 1):
        cw, conjugator = cyclically_reduce(word)
        assert conjugator * cw.as_word() * ~conjugator == word
        if len(cw) >= 2:
            assert cw.letters[0].factor_index != cw.letters[-1].factor_index


def test_two_curves_classes_distinct() -> None:
    for orders in ((3, 3, 3), (2, 3, 5)):
        group = FreeProduct.of_orders(*orders)
        assert not are_conjugate(_w(group, "c1^1.c2^2.c3^1"), _w(group, "c1^1.c2^1.c3^1.c2^1"))


@pytest.mark.parametrize("alpha,beta", list(itertools.product((3, 4, 5), repeat=2)))
def test_figure_eight_classes_distinct(alpha: int, beta: int) -> None:
    group = FreeProduct.of_orders(alpha, beta)
    first = _w(group, "c1^1.c2^1.c1^-1.c2^-1")
    second = _w(group, "c1^1.c2^-1.c1^-1.c2^1")
    assert not are_conjugate(first, second)


def test_figure_eight_collapses_for_order_two() -> None:
    group = FreeProduct.of_orders(2, 2)
    first = _w(group, "c1^1.c2^1.c1^-1.c2^-1")
    second = _w(group, "c1^1.c2^-1.c1^-1.c2^1")
    assert first == second == _w(group, "c1^1.c2^1.c1^1.c2^1")
    assert are_conjugate(first, second)


def test_connected_sum_classes_distinct() -> None:
    group = FreeProduct.parse("g1=Z*g2=Z")
    assert not are_conjugate(_w(group, "g1^1.g2^1.g1^1.g2^1"), _w(group, "g2^2.g1^2"))


def test_nonorientable_figure_eight_classes_distinct() -> None:
    group = FreeProduct.parse("d1=Z*a1=Z")
    assert not are_conjugate(_w(group, "d1^1.a1^2.d1^-1.a1^-2"), _w(group, "d1^1.a1^-2.d1^-1.a1^2"))


def test_conjugate_pairs_carry_conjugators() -> None:
    group = FreeProduct.of_orders(3, 5)
    rng = random.Random(11)
    words = list(enumerate_reduced_words(group, 4))
    for _ in range(150):
        w, u = rng.choice(words), rng.choice(words)
        target = u * w * ~u
        result = are_conjugate(w, target)
        assert result
        _check_conjugator(w, target, result.conjugator)


def test_rotation_invariance() -> None:
    group = FreeProduct.of_orders(2, 3, 0)
    for word in enumerate_reduced_words(group, 4, 1):
        cw, _ = cyclically_reduce(word)
        core = cw.as_word()
        for k in range(max(1, len(core))):
            rotated = rotate(core, k)
            result = are_conjugate(core, rotated)
            assert result
            _check_conjugator(core, rotated, result.conjugator)


def test_identity_only_conjugate_to_itself() -> None:
    group = FreeProduct.of_orders(2, 3)
    assert are_conjugate(group.identity, group.identity)
    assert not are_conjugate(group.identity, _w(group, "c1^1"))


def test_conjugate_to_power_examples() -> None:
    free = FreeProduct.parse("d1=Z*a1=Z")
    assert conjugate_to_power(_w(free, "d1^1.a1^2.d1^-1.a1^-2"), _w(free, "a1^1")) is None
    z3z5 = FreeProduct.of_orders(3, 5)
    base = _w(z3z5, "c1^1.c2^1")
    assert conjugate_to_power(base ** 2, base) == 2
    assert conjugate_to_power(~base, base) == -1
    dd = FreeProduct.parse("d1=Z*d2=Z")
    assert conjugate_to_power(_w(dd, "d1^1.d2^1.d1^-1.d2^-1"), _w(dd, "d1^1.d2^1")) is None
    assert conjugate_to_power(_w(dd, "d1^1.d2^1.d1^-1.d2^-1"), _w(dd, "d1^1")) is None


def test_conjugate_to_power_identity_conventions() -> None:
    group = FreeProduct.of_orders(3, 5)
    assert conjugate_to_power(group.identity, group.identity) == 1
    assert conjugate_to_power(_w(group, "c1^1"), group.identity) is None
    assert conjugate_to_power(group.identity, _w(group, "c1^1")) == 0


def test_conjugate_to_power_single_letter_bases() -> None:
    group = FreeProduct.parse("x=Z6*y=Z")
    assert conjugate_to_power(_w(group, "y^1.x^4.y^-1"), _w(group, "x^2")) == -1
    assert conjugate_to_power(_w(group, "y^-6"), _w(group, "y^2")) == -3
    assert conjugate_to_power(_w(group, "y^5"), _w(group, "y^2")) is None
    assert conjugate_to_power(_w(group, "x^1"), _w(group, "x^2")) is None


def test_conjugate_to_power_matches_brute_force_scan() -> None:
    group = FreeProduct.of_orders(2, 3, 0)
    words = [w for w in enumerate_reduced_words(group, 3, 1) if not w.is_identity]
    rng = random.Random(3)
    for _ in range(200):
        w, base = rng.choice(words), rng.choice(words)
        found = conjugate_to_power(w, base)
        scan = [s for s in range(-10, 11) if s != 0 and are_conjugate(w, base ** s)]
        if found is None:
            assert scan == []
        else:
            assert are_conjugate(w, base ** found)
            assert scan


def test_subgroup_family_examples() -> None:
    group = FreeProduct.of_orders(3, 3, 3)
    w = _w(group, "c1^1.c2^1.c3^1.c2^1")
    boundary = ~_w(group, "c1^1.c2^1.c3^1")
    assert conjugate_into_cyclic_subgroup_family(w, [boundary, group.identity]) is None
    z3z5 = FreeProduct.of_orders(3, 5)
    base = _w(z3z5, "c1^1.c2^1")
    assert conjugate_into_cyclic_subgroup_family(base ** 3, [_w(z3z5, "c1^1"), base]) == (base, 3)
    assert conjugate_into_cyclic_subgroup_family(base, []) is None
    three = FreeProduct.of_orders(2, 3, 5)
    odd = _w(three, "c1^1.c2^1.c3^1")
    assert conjugate_into_cyclic_subgroup_family(odd, [_w(three, "c1^1.c2^1"), _w(three, "c2^1.c3^2")]) is None


def test_case_exclusions_from_boundary_arguments() -> None:
    free = FreeProduct.parse("d1=Z*d2=Z")
    commutator = _w(free, "d1^1.d2^1.d1^-1.d2^-1")
    bases = [_w(free, "d1^1"), _w(free, "d2^1"), _w(free, "d1^1.d2^1")]
    assert conjugate_into_cyclic_subgroup_family(commutator, bases) is None
    z3z5 = FreeProduct.of_orders(3, 5)
    assert conjugate_to_power(_w(z3z5, "c1^1.c2^1.c1^-1.c2^-1"), _w(z3z5, "c1^1.c2^1")) is None


def test_conjugate_into_factor() -> None:
    group = FreeProduct.parse("G1=Z*G2=Z")
    assert conjugate_into_factor(_w(group, "G1^2.G2^1")) is None
    assert conjugate_into_factor(_w(group, "G2^1.G1^3.G2^-1")) == 0
    assert conjugate_into_factor(group.identity) == 0


def test_enumeration_order_is_length_then_lexicographic() -> None:
    group = FreeProduct.of_orders(2, 3)
    words = list(enumerate_reduced_words(group, 3))
    keys = [(len(w), w.letters) for w in words]
    assert keys == sorted(keys)
    assert len(set(words)) == len(words)


def _agreement(w1: NFWord, w2: NFWord, bound: int = 12) -> None:
    result = are_conjugate(w1, w2)
    found = oracle_conjugate_search(w1, w2, bound)
    assert bool(result) == (found is not None), (w1.format(), w2.format())
    if result:
        _check_conjugator(w1, w2, result.conjugator)
        _check_conjugator(w1, w2, found)


def _conjugated_pairs(group: FreeProduct, rng: random.Random, count: int) -> list[tuple[NFWord, NFWord]]:
    words = list(enumerate_reduced_words(group, 6))
    short = [word for word in words if len(word) <= 3]
    pairs: list[tuple[NFWord, NFWord]] = []
    while len(pairs) < count:
        w1, u = rng.choice(words), rng.choice(short)
        w2 = u * w1 * ~u
        if len(w2) <= 6:
            pairs.append((w1, w2))
    return pairs


def test_oracle_agreement_z2_z3_exhaustive() -> None:
    group = FreeProduct.of_orders(2, 3)
    words = list(enumerate_reduced_words(group, 6))
    assert len(words) == 50
    for w1, w2 in itertools.product(words, repeat=2):
        _agreement(w1, w2)


def test_oracle_agreement_z3_z5_samples() -> None:
    group = FreeProduct.of_orders(3, 5)
    rng = random.Random(23)
    for w1, w2 in _conjugated_pairs(group, rng, 40):
        _agreement(w1, w2)
    short = list(enumerate_reduced_words(group, 3))
    for _ in range(40):
        w1, w2 = rng.choice(short), rng.choice(short)
        _agreement(w1, w2, len(w1) + len(w2))


def test_oracle_agreement_z_z2_samples() -> None:
    group = FreeProduct.of_orders(0, 2)
    rng = random.Random(29)
    for w1, w2 in _conjugated_pairs(group, rng, 40):
        _agreement(w1, w2)
    words = list(enumerate_reduced_words(group, 6))
    for _ in range(30):
        _agreement(rng.choice(words), rng.choice(words))


def test_oracle_finds_nothing_for_the_two_sided_pair_at_the_default_bound() -> None:
    group = FreeProduct.of_orders(3, 5)
    first = _w(group, "c1^1.c2^1.c1^-1.c2^-1")
    second = _w(group, "c1^1.c2^-1.c1^-1.c2^1")
    assert not are_conjugate(first, second)
    assert oracle_conjugate_search(first, second, 12) is None


def test_enumeration_is_lazy() -> None:
    group = FreeProduct.of_orders(3, 5)
    words = enumerate_reduced_words(group, 40)
    assert [next(words) for _ in range(3)] == [group.identity, _w(group, "c1^1"), _w(group, "c1^2")]


def test_oracle_negative_cases() -> None:
    group = FreeProduct.of_orders(3, 5)
    assert oracle_conjugate_search(group.identity, _w(group, "c1^1"), 6) is None
    first = _w(group, "c1^1.c2^1.c1^-1.c2^-1")
    second = _w(group, "c1^1.c2^-1.c1^-1.c2^1")
    assert oracle_conjugate_search(first, second, 8) is None


def test_oracle_rejects_negative_bound() -> None:
    group = FreeProduct.of_orders(3, 5)
    with pytest.raises(FreeProductError):
        oracle_conjugate_search(group.identity, group.identity, -1)
