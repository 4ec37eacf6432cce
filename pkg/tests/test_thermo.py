import math
import warnings

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from compensation import (
    FactorCode,
    InvalidArgument,
    MarkovMeasure,
    ShiftSpace,
    rng_stream,
    sofic_presentation,
)
from compensation.thermo import (
    DiniVerdict,
    Potential,
    VariationSequence,
    compensation_check,
    dini_potential,
    equilibrium_markov,
    g_value,
    integrate,
    label_space,
    markov_entropy,
    pair_sum,
    parse_grid,
    p_dini_report,
    perron,
    phi_family,
    pressure_sft,
    pressure_sofic,
    pushforward_entropy_bracket,
    relative_entropy_bracket,
    relative_pressure_bound,
    select_t,
    tail_integral,
    tail_model,
    tangent_bound,
    variation,
    variation_sequence,
)

PHI = (1 + math.sqrt(5)) / 2
FULL2 = ShiftSpace.full("01")
GOLDEN = ShiftSpace.from_forbidden_pairs("01", ["11"])
FULL3 = ShiftSpace.full("abc")
E1_CODE = FactorCode({"a": "0", "b": "0", "c": "1"})


@st.composite
def potentials(draw, space=FULL2, max_k=3):
    k = draw(st.integers(1, max_k))
    n = len(Potential.constant(space, 0.0, k).values)
    vals = draw(st.lists(st.floats(-3, 3), min_size=n, max_size=n))
    return Potential(space, k, vals)


def brute_pressure(f):
    """Spectral radius of the transfer matrix on 2-blocks, built from the table by hand."""
    g = f.extend(3, 0) if f.k < 3 else f
    table = g.table()
    blocks = [a + b for a in "01" for b in "01"]
    m = np.zeros((4, 4))
    for i, u in enumerate(blocks):
        for j, v in enumerate(blocks):
            if u[1] == v[0]:
                m[i, j] = math.exp(table[u + v[1]])
    return math.log(max(abs(np.linalg.eigvals(m))))


class TestPerron:
    def test_matches_eigvals(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            a = rng.random((6, 6)) * (rng.random((6, 6)) < 0.6) + np.eye(6, k=1) + np.eye(6, k=-5)
            res = perron(a)
            assert res.value == pytest.approx(max(abs(np.linalg.eigvals(a))), rel=1e-11)
            assert res.lower <= res.value <= res.upper
            assert np.allclose(a @ res.right, res.value * res.right)
            assert np.allclose(res.left @ a, res.value * res.left)
            assert res.left @ res.right == pytest.approx(1.0)

    def test_periodic_matrix(self):
        # irreducible but not primitive; the unit shift handles it
        res = perron([[0, 1], [1, 0]])
        assert res.value == pytest.approx(1.0)

    @pytest.mark.parametrize("a", [[[1, 0], [0, 1]], [[0, 0], [0, 0]], [[1, -1], [1, 1]], [[1, 2]]])
    def test_rejects(self, a):
        with pytest.raises(InvalidArgument):
            perron(a)


class TestPotential:
    def test_table_roundtrip(self):
        f = Potential.from_table(GOLDEN, 2, {"00": 1.0, "01": -0.5, "10": 0.25})
        g = Potential.from_json(GOLDEN, f.to_json())
        assert np.array_equal(f.values, g.values)
        assert f("01") == -0.5

    def test_missing_word(self):
        with pytest.raises(InvalidArgument, match="10"):
            Potential.from_table(GOLDEN, 2, {"00": 1.0, "01": -0.5})
        f = Potential.from_table(GOLDEN, 2, {"00": 1.0}, default=2.0)
        assert f("10") == 2.0

    def test_extend_and_add(self):
        f = Potential.symbol(FULL2, {"1": 1.0})
        g = Potential.from_table(FULL2, 2, {"00": 0, "01": 0, "10": 5, "11": 5}, offset=1)
        h = f + g
        # g reads x[-1], f reads x[0]
        assert (h.k, h.offset) == (2, 1)
        assert h("10") == 5.0 and h("01") == 1.0 and h("11") == 6.0

    def test_compose(self):
        phi = Potential.symbol(label_space(E1_CODE), {"0": 1.0, "1": -1.0})
        f = phi.compose(E1_CODE, FULL3)
        assert [f(s) for s in "abc"] == [1.0, 1.0, -1.0]

    def test_rejects_nonfinite(self):
        with pytest.raises(InvalidArgument):
            Potential(FULL2, 1, [0.0, math.inf])


class TestPressure:
    def test_closed_forms(self):
        assert pressure_sft(FULL2, Potential.constant(FULL2)) == pytest.approx(math.log(2), abs=1e-12)
        assert pressure_sft(GOLDEN, Potential.constant(GOLDEN)) == pytest.approx(math.log(PHI), abs=1e-12)
        f = Potential.symbol(FULL2, {"0": 0.3, "1": -1.2})
        assert pressure_sft(FULL2, f) == pytest.approx(math.log(math.exp(0.3) + math.exp(-1.2)), abs=1e-12)

    @settings(max_examples=25, deadline=None)
    @given(potentials())
    def test_matches_partition_function(self, f):
        assert pressure_sft(FULL2, f) == pytest.approx(brute_pressure(f), abs=1e-11)

    @settings(max_examples=50, deadline=None)
    @given(potentials(), st.floats(-5, 5))
    def test_constant_shift(self, f, c):
        assert pressure_sft(FULL2, f + c) == pytest.approx(pressure_sft(FULL2, f) + c, abs=1e-10)

    @settings(max_examples=50, deadline=None)
    @given(potentials(), st.floats(-3, 3), st.floats(-3, 3))
    def test_coboundary_invariance(self, f, g0, g1):
        g = {"0": g0, "1": g1}
        cob = Potential.from_function(FULL2, 2, lambda w: g[w[1]] - g[w[0]])
        assert pressure_sft(FULL2, f + cob) == pytest.approx(pressure_sft(FULL2, f), abs=1e-10)

    @settings(max_examples=30, deadline=None)
    @given(potentials(max_k=2), st.integers(0, 2))
    def test_window_independence(self, f, pad):
        g = f.extend(f.k + pad + 1, pad)
        assert pressure_sft(FULL2, g) == pytest.approx(pressure_sft(FULL2, f), abs=1e-10)

    @settings(max_examples=30, deadline=None)
    @given(potentials(), potentials(), st.floats(0, 1))
    def test_convexity(self, f, g, s):
        mix = f * s + g * (1 - s)
        assert pressure_sft(FULL2, mix) <= s * pressure_sft(FULL2, f) + (1 - s) * pressure_sft(FULL2, g) + 1e-10

    @settings(max_examples=30, deadline=None)
    @given(potentials(space=GOLDEN), st.lists(st.floats(0, 2), min_size=5, max_size=5))
    def test_monotone(self, f, bumps):
        g = f + Potential(GOLDEN, 3, bumps)
        assert pressure_sft(GOLDEN, f) <= pressure_sft(GOLDEN, g) + 1e-12

    def test_sofic_even_shift(self, even_edges):
        space, code = even_edges
        pres = sofic_presentation(space, code)
        assert pressure_sofic(pres, Potential.constant(label_space(code))) == pytest.approx(math.log(PHI))

    def test_sofic_full_image(self):
        pres = sofic_presentation(FULL3, E1_CODE)
        ys = label_space(E1_CODE)
        phi = Potential(ys, 2, [0.1, -0.4, 0.7, 0.2])
        assert pressure_sofic(pres, phi) == pytest.approx(pressure_sft(ys, phi), abs=1e-12)


class TestEquilibrium:
    def test_bernoulli(self):
        m = equilibrium_markov(FULL2, Potential.symbol(FULL2, {"0": 0.0, "1": math.log(3)}))
        assert np.allclose(m.transition, [[0.25, 0.75], [0.25, 0.75]])

    def test_parry(self):
        m = equilibrium_markov(GOLDEN, Potential.constant(GOLDEN))
        assert m.stationary[1] == pytest.approx(1 / (PHI ** 2 + 1))
        assert markov_entropy(m) == pytest.approx(math.log(PHI))

    @settings(max_examples=40, deadline=None)
    @given(potentials())
    def test_variational_identity(self, f):
        m = equilibrium_markov(FULL2, f)
        assert markov_entropy(m) + integrate(m, f) == pytest.approx(pressure_sft(FULL2, f), abs=1e-9)

    @settings(max_examples=40, deadline=None)
    @given(potentials(space=GOLDEN), st.integers(0, 2**32 - 1))
    def test_variational_inequality(self, f, seed):
        m = MarkovMeasure.random(GOLDEN, np.random.default_rng(seed))
        assert markov_entropy(m) + integrate(m, f) <= pressure_sft(GOLDEN, f) + 1e-10


class TestEntropyBracket:
    def test_iid_image_is_exact(self):
        m = MarkovMeasure.from_weights(FULL3, {"a": 1, "b": 1, "c": 1})
        lo, hi = pushforward_entropy_bracket(m, E1_CODE, 3)
        h = -(2 / 3) * math.log(2 / 3) - (1 / 3) * math.log(1 / 3)
        assert lo == pytest.approx(h) and hi == pytest.approx(h)
        rel = relative_entropy_bracket(m, E1_CODE, 3)
        assert rel.lower == pytest.approx(2 / 3 * math.log(2))

    def test_monotone_in_n(self):
        space, code = ShiftSpace.full("abc"), FactorCode({"a": "0", "b": "0", "c": "1"})
        m = MarkovMeasure.random(space, rng_stream(5, "bracket"))
        brackets = [pushforward_entropy_bracket(m, code, n) for n in range(1, 9)]
        for a, b in zip(brackets, brackets[1:]):
            assert b.upper <= a.upper + 1e-12
            assert b.lower >= a.lower - 1e-12
            assert b.lower <= b.upper
        assert brackets[-1].width < brackets[0].width

    def test_even_shift_image_of_parry(self, even_edges):
        space, code = even_edges
        m = equilibrium_markov(space, Potential.constant(space))
        b = pushforward_entropy_bracket(m, code, 14)
        # the edge presentation is conjugate to the image here, so no entropy is lost
        assert b.lower <= math.log(PHI) + 1e-12 <= b.upper + 2e-12
        assert b.width < 1e-3

    def test_identity_code(self):
        code = FactorCode.identity(GOLDEN)
        m = MarkovMeasure.random(GOLDEN, rng_stream(2, "identity"))
        b = pushforward_entropy_bracket(m, code, 1)
        assert b.lower == pytest.approx(markov_entropy(m)) and b.upper == pytest.approx(markov_entropy(m))
        rel = relative_entropy_bracket(m, code, 3)
        assert abs(rel.lower) < 1e-12 and abs(rel.upper) < 1e-12

    def test_injective_on_ac(self):
        m = MarkovMeasure.random(FULL3, rng_stream(3, "ac"), support="ac")
        rel = relative_entropy_bracket(m, E1_CODE, 4)
        assert abs(rel.lower) < 1e-9 and abs(rel.upper) < 1e-9

    def test_rejects_n0(self):
        m = MarkovMeasure.from_weights(FULL3, {"a": 1})
        with pytest.raises(InvalidArgument):
            pushforward_entropy_bracket(m, E1_CODE, 0)


class TestCompensation:
    def test_zero_gap_is_entropy_difference(self):
        rep = compensation_check(FULL3, E1_CODE, Potential.constant(FULL3),
                                 family=[("0", Potential.constant(label_space(E1_CODE)))])
        assert rep.max_gap == pytest.approx(math.log(3) - math.log(2))
        assert not rep.passed

    def test_fiber_weight_compensates(self):
        f = Potential.symbol(FULL3, {"a": -math.log(2), "b": -math.log(2)})
        rep = compensation_check(FULL3, E1_CODE, f)
        assert rep.passed and rep.max_gap < 1e-12
        assert len(rep.gaps) == 5 ** 2 + 5 ** 4 + 50
        assert rep.to_json(include_gaps=False)["pass"] is True

    def test_family_guards(self):
        with pytest.raises(InvalidArgument, match="coarsen"):
            phi_family(E1_CODE, grid=np.linspace(0, 1, 20))
        with pytest.raises(InvalidArgument):
            compensation_check(FULL3, E1_CODE, Potential.constant(FULL3), family=[])

    def test_parse_grid(self):
        assert np.allclose(parse_grid("-1:1:3"), [-1, 0, 1])
        assert np.allclose(parse_grid("0.5,2"), [0.5, 2])
        with pytest.raises(InvalidArgument):
            parse_grid("1:2")

    def test_relative_bound_nonpositive_for_compensation(self):
        f = Potential.symbol(FULL3, {"a": -math.log(2), "b": -math.log(2)})
        rng = rng_stream(1, "rel")
        for _ in range(10):
            m = MarkovMeasure.random(FULL3, rng)
            assert relative_pressure_bound(m, E1_CODE, f) <= 1e-9


class TestTangentBound:
    def test_examples(self):
        assert tangent_bound([0.5, 0.5], [1, 1]) == pytest.approx((math.log(2), math.log(2)))
        assert tangent_bound([1, 0], [math.e, math.e]) == pytest.approx((1.0, math.log(2 * math.e)))
        lhs, rhs = tangent_bound([0.9, 0.1], [0.5, 0.5])
        assert lhs == pytest.approx(-0.368064, abs=1e-6)
        assert lhs == pytest.approx(0.9 * math.log(0.5 / 0.9) + 0.1 * math.log(5))
        assert rhs == 0.0

    @given(st.lists(st.tuples(st.floats(0, 1), st.floats(1e-3, 10)), min_size=1, max_size=12))
    def test_inequality(self, pairs):
        p = np.array([x for x, _ in pairs])
        if p.sum() <= 0:
            return
        p = p / p.sum()
        lhs, rhs = tangent_bound(p, [a for _, a in pairs])
        assert lhs <= rhs + 1e-12

    @given(st.lists(st.floats(1e-3, 10), min_size=1, max_size=12), st.floats(0.1, 10))
    def test_equality_when_proportional(self, a, scale):
        p = np.array(a) / sum(a)
        lhs, rhs = tangent_bound(p, np.array(a) * scale)
        assert lhs == pytest.approx(rhs, abs=1e-12)

    def test_rejects(self):
        with pytest.raises(InvalidArgument):
            tangent_bound([0.5, 0.6], [1, 1])
        with pytest.raises(InvalidArgument):
            tangent_bound([1.0], [0.0])


class TestSelectT:
    @pytest.mark.parametrize("t", [2.5, 4.0, 7.3, 30.0])
    def test_pair_sum_matches_direct_series(self, t):
        mpmath.mp.dps = 30
        expected = mpmath.zeta(t - 1) - mpmath.zeta(t)
        assert pair_sum(t) == pytest.approx(float(expected), rel=1e-10)
        if t > 4:
            direct = mpmath.nsum(lambda n: (n - 1) * n ** -t, [2, mpmath.inf])
            assert pair_sum(t) == pytest.approx(float(direct), rel=1e-10)
        assert pair_sum(t, "1") == pytest.approx(float(mpmath.zeta(t) - 1), rel=1e-10)

    def test_divergent_range(self):
        assert pair_sum(2.0) == math.inf and pair_sum(1.0, "1") == math.inf

    def test_d1_t4(self):
        assert math.log(pair_sum(4.0)) == pytest.approx(math.log(float(mpmath.zeta(3) - mpmath.zeta(4))))

    def test_e1(self):
        sel = select_t(FULL3, E1_CODE, 0.1)
        assert sel.certified and sel.bound <= -0.1
        assert 5.3 < float(sel) < 5.4
        prev = sel.t / 1.01
        assert math.log(27 * pair_sum(prev)) > -0.1

    def test_monotone_in_epsilon(self):
        ts = [select_t(FULL3, E1_CODE, e).t for e in (0.05, 0.1, 0.2, 1.0)]
        assert ts == sorted(ts)

    def test_uncertified(self):
        sel = select_t(FULL3, E1_CODE, 100.0)
        assert not sel.certified and sel.t == 64.0


class TestDini:
    T = 3.0

    def test_g_range(self):
        vals = [g_value(n, self.T) for n in range(200)]
        assert min(vals) == pytest.approx(-self.T * math.log(3) / 3)
        assert all(v < 0 for v in vals)

    @pytest.fixture(scope="class")
    @classmethod
    def f3(cls):
        from compensation import MPWOrder
        return dini_potential(FULL3, E1_CODE, MPWOrder(("a", "b", "c")), cls.T, 3)

    def test_values_follow_distance_to_b(self, f3):
        assert f3("aaabaaa") == pytest.approx(g_value(0, self.T))
        assert f3("aabaaaa") == pytest.approx(g_value(1, self.T))
        assert f3("aaaaaaa") == 0.0
        assert f3("baaaaaa") == 0.0

    def test_variations_equal_minorant(self, f3):
        v = variation_sequence(f3, 10)
        assert len(v.values) == 2
        for n, x in enumerate(v.values):
            assert x == pytest.approx(tail_model(n + 1, self.T))
        assert v.tail_t == self.T and v.lower_t == self.T

    @pytest.mark.parametrize("p,verdict", [(1.0, DiniVerdict.DIVERGENT), (1.1, DiniVerdict.CONVERGENT),
                                           (2.0, DiniVerdict.CONVERGENT)])
    def test_verdicts(self, f3, p, verdict):
        assert p_dini_report(variation_sequence(f3, 10), p).verdict is verdict

    def test_locally_constant_is_complete(self):
        f = Potential(FULL2, 3, np.arange(8.0), offset=1)
        v = variation_sequence(f, 5)
        assert v.complete and v.values[-1] == 0.0
        assert variation(f, 0) > 0
        assert p_dini_report(v, 1.0).verdict is DiniVerdict.CONVERGENT

    def test_zero_sequence_converges(self):
        rep = p_dini_report(VariationSequence((0.0, 0.0, 0.0)), 1.0)
        assert rep.verdict is DiniVerdict.CONVERGENT and rep.partial_sum == 0.0

    @pytest.mark.parametrize("p,verdict", [(1.0, DiniVerdict.DIVERGENT), (1.5, DiniVerdict.CONVERGENT)])
    def test_model_sequence(self, p, verdict):
        v = VariationSequence(tuple(tail_model(n, 1.0) for n in range(1, 20)), tail_t=1.0, lower_t=1.0)
        assert p_dini_report(v, p).verdict is verdict

    def test_t1_below_envelope(self):
        from compensation import MPWOrder
        f = dini_potential(FULL3, E1_CODE, MPWOrder(("a", "b", "c")), 1.0, 3)
        v = variation_sequence(f, 5)
        # var_0 = log(3)/3 since |g| peaks at n = 1; from n = 1 on the plain envelope applies
        assert v.values[0] == pytest.approx(math.log(3) / 3)
        assert all(x <= math.log(n + 2) / (n + 2) + 1e-12 for n, x in enumerate(v.values) if n >= 1)

    def test_undetermined_without_model(self):
        v = VariationSequence((1.0, 0.5))
        assert p_dini_report(v, 2.0).verdict is DiniVerdict.UNDETERMINED

    def test_validation(self):
        with pytest.raises(InvalidArgument):
            VariationSequence((0.5, 1.0))
        with pytest.raises(InvalidArgument):
            p_dini_report(VariationSequence((1.0,)), 0.5)

    @pytest.mark.parametrize("N,t,p", [(1, 3.0, 1.1), (2, 5.356, 1.5), (10, 1.0, 2.0), (3, 2.0, 3.7)])
    def test_tail_integral_vs_quadrature(self, N, t, p):
        mpmath.mp.dps = 30
        # in u = log(x + 2) the integrand is t^p u^p exp(-(p - 1) u)
        precise = mpmath.quad(lambda u: t ** p * u ** p * mpmath.exp(-(p - 1) * u),
                              [math.log(N + 2), mpmath.inf])
        assert tail_integral(N, t, p) == pytest.approx(float(precise), rel=1e-9)
        if p >= 1.5:
            expected, _ = quad(lambda x: (t * math.log(x + 2) / (x + 2)) ** p, N, math.inf, limit=500)
            assert tail_integral(N, t, p) == pytest.approx(expected, rel=1e-6)

    def test_envelope_warning(self):
        f = Potential(FULL2, 5, np.arange(32.0) * 10, offset=2, tail_t=0.01)
        with warnings.catch_warnings(record=True) as w:
            warnings.simplefilter("always")
            v = variation_sequence(f, 3)
        assert v.tail_t is None and any("tail model" in str(x.message) for x in w)
