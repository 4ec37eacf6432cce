import itertools
import math
import warnings

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from compensation import (
    Diamond,
    FactorCode,
    FactorType,
    InvalidArgument,
    Minimality,
    MPWOrder,
    PreconditionViolation,
    RequiresIrreducible,
    ShiftSpace,
    SubshiftApprox,
    apply_code,
    as_word,
    classify_factor,
    enumerate_words,
    fiber_count,
    find_diamond,
    find_swap_pair,
    is_irreducible,
    is_mpw_minimal,
    mpw_forbidden,
    relative_entropy_profile,
)


def class_key(code, w):
    return (len(w), w[0], w[-1], tuple(apply_code(code, w)))


def brute_minimal(space, code, order, n):
    """Minimal words of length n by sorting each (endpoints, image) class."""
    rank = {s: i for i, s in enumerate(order.symbols)}
    classes = {}
    for w in enumerate_words(space, n):
        classes.setdefault(class_key(code, w), []).append(tuple(w))
    return {min(ws, key=lambda w: [rank[s] for s in w]) for ws in classes.values()}


def brute_diamond_length(space, code, max_len):
    for n in range(2, max_len + 1):
        seen = {}
        for w in enumerate_words(space, n):
            key = class_key(code, w)
            if key in seen:
                return n
            seen[key] = w
    return None


@st.composite
def systems(draw):
    k = draw(st.integers(2, 4))
    alphabet = "abcd"[:k]
    pairs = [(s, t) for s in alphabet for t in alphabet]
    keep = draw(st.lists(st.booleans(), min_size=len(pairs), max_size=len(pairs)))
    # a Hamiltonian cycle keeps the space irreducible
    cycle = [(alphabet[i], alphabet[(i + 1) % k]) for i in range(k)]
    chosen = frozenset([p for p, b in zip(pairs, keep) if b] + cycle)
    labels = draw(st.lists(st.sampled_from("xy"), min_size=k, max_size=k))
    perm = draw(st.permutations(alphabet))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        space = ShiftSpace(alphabet, chosen)
    return space, FactorCode(dict(zip(alphabet, labels))), MPWOrder(tuple(perm))


class TestDiamond:
    def test_validation(self):
        with pytest.raises(InvalidArgument):
            Diamond(as_word("ab"), as_word("ab"))
        with pytest.raises(InvalidArgument):
            Diamond(as_word("ab"), as_word("bb"))

    def test_identity_has_none(self, full2, golden):
        assert find_diamond(full2, FactorCode.identity(full2), 10) is None
        assert find_diamond(golden, FactorCode.identity(golden), 10) is None

    def test_e1_shortest_has_length_three(self, e1):
        space, code, _ = e1
        d = find_diamond(space, code, 5)
        assert len(d) == 3
        assert apply_code(code, d.u) == apply_code(code, d.v)
        # among shortest diamonds the returned one is lexicographically first
        assert (str(d.u), str(d.v)) == ("aaa", "aba")

    @settings(max_examples=50, deadline=None)
    @given(systems())
    def test_length_matches_brute_force(self, system):
        space, code, _ = system
        d = find_diamond(space, code, 6)
        expected = brute_diamond_length(space, code, 6)
        assert (None if d is None else len(d)) == expected
        if d is not None:
            assert space.is_allowed(d.u) and space.is_allowed(d.v)
            assert class_key(code, d.u) == class_key(code, d.v)


class TestClassify:
    def test_examples(self, e1, full2):
        space, code, _ = e1
        assert classify_factor(space, code) is FactorType.INFINITE_TO_ONE
        assert classify_factor(full2, FactorCode.identity(full2)) is FactorType.FINITE_TO_ONE
        assert classify_factor(full2, FactorCode({"0": "0", "1": "0"})) is FactorType.INFINITE_TO_ONE

    def test_reducible_rejected(self):
        space = ShiftSpace("ab", frozenset([("a", "a"), ("b", "b")]))
        with pytest.raises(RequiresIrreducible):
            classify_factor(space, FactorCode.identity(space))

    @staticmethod
    def max_fibers(space, code, n_max=8):
        out = []
        for n in range(1, n_max + 1):
            images = {tuple(apply_code(code, w)) for w in enumerate_words(space, n)}
            out.append(max(fiber_count(space, code, y) for y in images))
        return out

    @settings(max_examples=40, deadline=None)
    @given(systems())
    def test_finite_to_one_fibers_bounded(self, system):
        space, code, _ = system
        if classify_factor(space, code) is FactorType.FINITE_TO_ONE:
            assert max(self.max_fibers(space, code)) <= space.size ** 2

    def test_infinite_to_one_fibers_grow(self, e1, full2, even_edges):
        cases = [e1[:2], (full2, FactorCode({"0": "0", "1": "0"})), even_edges]
        for space, code in cases:
            if classify_factor(space, code) is FactorType.INFINITE_TO_ONE:
                m = self.max_fibers(space, code)
                assert all(b > a for a, b in zip(m, m[1:]))


class TestMinimality:
    def test_examples(self, e1):
        space, code, order = e1
        assert not is_mpw_minimal(space, code, order, "aba")
        assert is_mpw_minimal(space, code, order, "aaa")
        for s in "abc":
            assert is_mpw_minimal(space, code, order, s)

    def test_disallowed_word(self, golden):
        with pytest.raises(InvalidArgument):
            is_mpw_minimal(golden, FactorCode.identity(golden), MPWOrder(("0", "1")), "11")

    @settings(max_examples=60, deadline=None)
    @given(systems(), st.integers(1, 6))
    def test_matches_brute_force(self, system, n):
        space, code, order = system
        expected = brute_minimal(space, code, order, n)
        got = {tuple(w) for w in enumerate_words(space, n) if is_mpw_minimal(space, code, order, w)}
        assert got == expected

    @settings(max_examples=30, deadline=None)
    @given(systems(), st.integers(3, 6))
    def test_exactly_one_minimal_per_class(self, system, n):
        space, code, order = system
        counts = {}
        for w in enumerate_words(space, n):
            key = class_key(code, w)
            counts[key] = counts.get(key, 0) + is_mpw_minimal(space, code, order, w)
        assert set(counts.values()) == {1}

    def test_lexmin_and_class_words(self, e1):
        space, code, order = e1
        m = Minimality(space, code, order)
        w = space.encode("cbbac")
        cls = m.class_words(w)
        assert len(cls) == 8
        assert m.lexmin(w) == min(cls, key=lambda v: [int(m.rank[i]) for i in v])

    def test_reach_is_nondecreasing(self, e1):
        space, code, order = e1
        m = Minimality(space, code, order)
        w = space.encode("abcabbacbbbca")
        r = m.reach(w)
        assert all(b >= a for a, b in zip(r, r[1:]))
        for i, j in enumerate(r):
            assert m.is_minimal(w[i:j + 1])
            if j + 1 < len(w):
                assert not m.is_minimal(w[i:j + 2])


class TestForbidden:
    def test_e1_length_three(self, e1):
        space, code, order = e1
        words = [str(w) for w in mpw_forbidden(space, code, order, 3)]
        assert words == sorted(x + "b" + y for x in "abc" for y in "abc")

    def test_e1_length_four_adds_nothing(self, e1):
        space, code, order = e1
        assert mpw_forbidden(space, code, order, 4) == mpw_forbidden(space, code, order, 3)

    def test_identity_empty(self, golden):
        code = FactorCode.identity(golden)
        assert mpw_forbidden(golden, code, MPWOrder(("0", "1")), 5) == []

    def test_short_length_rejected(self, e1):
        with pytest.raises(InvalidArgument):
            mpw_forbidden(*e1, 2)

    @settings(max_examples=30, deadline=None)
    @given(systems())
    def test_minimal_words_avoid_list_and_are_injective(self, system):
        space, code, order = system
        L = 5
        z = SubshiftApprox(space, mpw_forbidden(space, code, order, L))
        for n in range(1, L + 1):
            minimal = [w for w in enumerate_words(space, n) if is_mpw_minimal(space, code, order, w)]
            assert all(z.avoids(w) for w in minimal)
            keys = [class_key(code, w) for w in minimal]
            assert len(keys) == len(set(keys))


class TestFiberCount:
    def test_examples(self, e1):
        space, code, _ = e1
        assert fiber_count(space, code, "00") == 4
        assert fiber_count(space, code, "11") == 1
        assert fiber_count(space, code, "0101") == 4

    def test_unknown_label_gives_zero(self, e1):
        space, code, _ = e1
        assert fiber_count(space, code, "02") == 0

    def test_not_in_language(self, golden):
        code = FactorCode.identity(golden)
        assert fiber_count(golden, code, "11") == 0

    def test_exact_for_long_words(self, e1):
        space, code, _ = e1
        assert fiber_count(space, code, "0" * 80) == 2 ** 80

    @settings(max_examples=30, deadline=None)
    @given(systems(), st.integers(1, 6))
    def test_matches_enumeration(self, system, n):
        space, code, _ = system
        counts = {}
        for w in enumerate_words(space, n):
            y = tuple(apply_code(code, w))
            counts[y] = counts.get(y, 0) + 1
        for y, c in counts.items():
            assert fiber_count(space, code, y) == c


class TestRelativeEntropyProfile:
    @pytest.mark.parametrize("n", [1, 5, 20])
    def test_e1_zeros(self, e1, n):
        space, code, _ = e1
        assert relative_entropy_profile(space, code, "0" * n) == pytest.approx(math.log(2))
        assert relative_entropy_profile(space, code, "1" * n) == 0.0

    def test_half_zeros(self, e1):
        space, code, _ = e1
        assert relative_entropy_profile(space, code, "01" * 10) == pytest.approx(0.5 * math.log(2))

    def test_empty_rejected(self, e1):
        with pytest.raises(InvalidArgument):
            relative_entropy_profile(e1[0], e1[1], "")

    def test_range(self, e1):
        space, code, _ = e1
        for w in enumerate_words(ShiftSpace.full("01"), 6):
            v = relative_entropy_profile(space, code, w)
            assert 0.0 <= v <= math.log(3)


class TestSwapPair:
    def test_forbid_b(self, e1):
        space, code, _ = e1
        pair = find_swap_pair(space, code, SubshiftApprox(space, [as_word("b")]), 5, 4)
        assert (str(pair.u), str(pair.v)) == ("aaa", "aba")
        assert pair.verified_length == 4

    def test_forbid_a(self, e1):
        space, code, _ = e1
        pair = find_swap_pair(space, code, SubshiftApprox(space, [as_word("a")]), 5, 4)
        assert (str(pair.u), str(pair.v)) == ("bbb", "bab")

    def test_not_proper(self, e1):
        space, code, _ = e1
        with pytest.raises(PreconditionViolation):
            find_swap_pair(space, code, SubshiftApprox(space, []), 5, 3)

    def test_output_conditions(self, e1):
        space, code, order = e1
        z = SubshiftApprox(space, mpw_forbidden(space, code, order, 3))
        pair = find_swap_pair(space, code, z, 6, 4)
        assert z.avoids(pair.u) and not z.avoids(pair.v)
        assert class_key(code, pair.u) == class_key(code, pair.v)
        # condition (4): v occurs exactly once in s v t for short contexts s, t from Z
        words = [space.decode(w) for n in range(1, 4) for w in z.words(n)]
        for s, t in itertools.product(words, repeat=2):
            full = s + pair.v + t
            if not space.is_allowed(full) or not z.avoids(s + pair.u + t):
                continue
            text = str(full)
            hits = [i for i in range(len(text)) if text.startswith(str(pair.v), i)]
            assert hits == [len(s)]


def test_irreducibility_of_generated_systems():
    # sanity check on the strategy used above
    space = ShiftSpace("abc", frozenset([("a", "b"), ("b", "c"), ("c", "a")]))
    assert is_irreducible(space)
