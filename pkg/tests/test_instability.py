import math

import numpy as np
import pytest

from phasestab import frames as fr
from phasestab import instability as ins
from phasestab import stability as st
from phasestab.hilbert import quotient_distance

# 30-digit reference values of the m = 1, 2 gaps (independent series summation)
GAP1 = 0.401185405729054703
GAP2 = 0.0759371990503150567

SINC = fr.SincFrame()
ONB = fr.OrthonormalBasisFrame()


@pytest.fixture(scope="module")
def riesz():
    return st.default_riesz(0.1, 6, seed=0)


class TestLemma:
    @pytest.mark.parametrize("N", [1, 4, 9])
    def test_onb(self, N):
        lem = ins.lemma_search(ONB, 0.01, N)
        assert (lem.k, lem.m) == (N + 1, N + 2)
        assert lem.head_sum == 0.0 and lem.tail_bound == 0.0

    def test_sinc_direct(self):
        eps, N = 0.01, 8
        lem = ins.lemma_search(SINC, eps, N)
        assert lem.k > N and lem.m > lem.k
        assert lem.certified_sum < eps
        # independent head: sum over n <= N of sinc^2 at label differences
        jk = SINC.label(lem.k)
        head = sum(np.sinc((jk - SINC.label(n)) / 4) ** 2 for n in range(1, N + 1))
        assert head == pytest.approx(lem.head_sum, rel=1e-9, abs=1e-15)
        # and a brute-force tail over a long finite range stays below the bound
        lo, hi = SINC.covered_labels(lem.m)
        j = np.arange(hi + 1, hi + 200000)
        jl = np.arange(lo - 200000, lo)
        part = np.sum(np.sinc((j - jk) / 4) ** 2) + np.sum(np.sinc((jl - jk) / 4) ** 2)
        assert part <= lem.tail_bound

    @pytest.mark.parametrize("eps", [1e-1, 1e-2, 1e-3, 1e-4])
    @pytest.mark.parametrize("name", ["onb", "sinc", "riesz"])
    def test_all(self, name, eps, riesz):
        gen = {"onb": ONB, "sinc": SINC, "riesz": riesz}[name]
        lem = ins.lemma_search(gen, eps, 4)
        assert 4 < lem.k < lem.m and lem.certified_sum < eps

    def test_errors(self):
        with pytest.raises(ValueError):
            ins.lemma_search(ONB, 0.0, 3)
        with pytest.raises(ValueError):
            ins.lemma_search(ONB, 0.1, 0)
        with pytest.raises(RuntimeError):
            ins.lemma_search(SINC, 1e-6, 4, budget=50)


class TestWitness:
    @pytest.mark.parametrize("delta", [1e-1, 1e-2, 1e-3])
    @pytest.mark.parametrize("N", [4, 8])
    @pytest.mark.parametrize("name", ["onb", "sinc", "riesz"])
    def test_matrix(self, name, delta, N, riesz):
        gen = {"onb": ONB, "sinc": SINC, "riesz": riesz}[name]
        w = ins.build_witness(gen, delta, N)
        assert w.certified and w.gap_bound <= delta
        assert w.distance == pytest.approx(2.0, abs=1e-9)
        assert w.k > N

    def test_onb_explicit(self):
        w = ins.build_witness(ONB, 0.01, 3)
        lo, _ = w.window
        f, g = w.f, w.g
        # f = e_4 + e_l, g = e_4 - e_l with l in 1..3: identical moduli everywhere off e_l,
        # and on the support of psi the measurements of phi_1..phi_3 see only psi
        assert np.count_nonzero(np.abs(np.abs(f) - np.abs(g)) > 1e-12) == 0
        assert w.gap_value == 0.0

    def test_riesz_direct(self, riesz):
        w = ins.build_witness(riesz, 0.01, 4)
        lo, hi = w.window
        F = riesz.truncate(riesz.width, lo, hi)
        gap = np.linalg.norm(np.abs(fr.analysis(F, w.f)) - np.abs(fr.analysis(F, w.g)))
        assert gap <= w.gap_value + 1e-12
        assert quotient_distance(w.f, w.g, "real") == pytest.approx(2.0, abs=1e-9)

    def test_sinc_direct(self):
        # f = u + psi, psi = (e_l0 - t u)/nu; recompute the gap with np.sinc over a label window
        delta = 0.1
        w = ins.build_witness(SINC, delta, 4)
        jk = int(SINC.label(w.k))
        jb = 4 * w.psi_ref
        t = np.sinc((jb - jk) / 4)
        nu = math.sqrt(1 - t * t)

        def direct(lo, hi):
            n = np.arange(lo, hi + 1)
            z1 = np.sinc((n - jk) / 4)
            z2 = (np.sinc((n - jb) / 4) - t * z1) / nu
            return math.sqrt(math.fsum((np.abs(z1 + z2) - np.abs(z1 - z2)) ** 2))

        half = int(math.ceil(16 * 128 / (math.pi**2 * delta**2))) + 16
        assert direct(jk - half, jb + half) == pytest.approx(w.gap_value, rel=1e-9)
        assert direct(jk - 4 * half, jb + 4 * half) <= w.gap_bound

    def test_bad_delta(self):
        with pytest.raises(ValueError):
            ins.build_witness(ONB, 0.0, 3)


class TestSincPair:
    def test_small(self):
        assert ins.sinc_pair(1).dist_sq == 8
        assert ins.sinc_pair(2).dist_sq == 24
        assert ins.sinc_pair(1).f == {-8: 1, -4: 1, 4: 1, 8: 1}

    def test_identity(self):
        for m in range(1, 31):
            assert ins.sinc_pair(m).dist_sq == 4 * math.comb(2 * m, m)

    def test_ex1(self):
        # f_1 = s_1(x + 1) + s_1(x - 2) as functions: compare with the binomial sum
        x = np.linspace(-7.3, 7.9, 41)
        lhs = np.array([ins.s_k_eval(1, v + 1) + ins.s_k_eval(1, v - 2) for v in x])
        rhs = ins.sinc_eval(ins.sinc_pair(1).f, x)
        assert np.allclose(lhs, rhs, atol=1e-12)

    @pytest.mark.parametrize("m", [1, 2, 3, 5])
    def test_closed_form_gap(self, m):
        pair = ins.sinc_pair(m)
        x = np.array([0.25, 0.5, -0.75, 3.25, -11.5, 40.75])
        direct = (np.abs(ins.sinc_eval(pair.f, x)) - np.abs(ins.sinc_eval(pair.g, x))) ** 2
        assert np.allclose(ins.gap_term_closed(m, x), direct, rtol=1e-7, atol=1e-14)

    def test_errors(self):
        with pytest.raises(ValueError):
            ins.sinc_pair(0)


class TestSincGap:
    def test_reference(self):
        g1, t1 = ins.sinc_gap(1)
        g2, t2 = ins.sinc_gap(2)
        assert g1 == pytest.approx(GAP1, rel=1e-11)
        assert g2 == pytest.approx(GAP2, rel=1e-11)
        assert t1 <= 1e-12 * g1 * g1

    def test_bounds(self):
        for m in range(1, 9):
            g, t = ins.sinc_gap(m)
            assert g * g + t <= ins.gap_upper_bound_sq(m)
            assert ins.sinc_pair(m).dist / math.sqrt(g * g + t) >= ins.ratio_lower_bound(m)
        assert math.sqrt(ins.gap_upper_bound_sq(1)) == pytest.approx(0.9003163161571061)

    def test_cross_check(self):
        for m in (1, 2, 4, 6):
            ins.sinc_gap(m, cross_check=96 * m)

    def test_exact_terms(self):
        assert ins.direct_gap_term(1, 4) == 0.0
        assert ins.direct_gap_term(1, 1) == pytest.approx(float(ins.gap_term_closed(1, 0.25)), rel=1e-12)

    def test_window_monotone(self):
        g_small, t_small = ins.sinc_gap(2, window=64, rel_tail=1.0)
        g_big, t_big = ins.sinc_gap(2, window=1024, rel_tail=1.0)
        assert g_small <= g_big
        assert t_big <= t_small
        assert g_big * g_big <= g_small * g_small + t_small

    def test_explicit_window(self):
        with pytest.raises(ValueError):
            ins.sinc_gap(3, window=5)
        with pytest.raises(ValueError):
            ins.sinc_gap(1, window=4)  # tail too large for the default relative target

    def test_tail_bound_dominates(self):
        for m in (1, 3):
            w = 16 * m
            x = np.concatenate([np.arange(w + 1, 10**6) + o for o in (0.25, 0.5, -0.25)])
            brute = 2 * np.sum(ins.gap_term_closed(m, x))
            assert brute <= ins.gap_tail_bound(m, w)


class TestSk:
    def test_values(self):
        assert ins.s_k_eval(2, -1.0) == 2.0
        assert ins.s_k_eval(1, 0.5) == pytest.approx(4 / (3 * math.pi), rel=1e-14)
        assert ins.s_k_eval(0, 0.0) == 1.0
        with pytest.raises(ValueError):
            ins.s_k_eval(-1, 0.3)

    def test_recursion(self):
        xs = np.linspace(-9.7, 9.3, 100)
        for k in range(1, 6):
            for x in xs:
                assert ins.s_k_eval(k, x) == pytest.approx(ins.s_k_eval(k - 1, x) + ins.s_k_eval(k - 1, x + 1), abs=1e-12)

    def test_near_pole(self):
        assert ins.s_k_eval(3, -1 + 1e-10) == pytest.approx(3.0, abs=1e-8)


class TestGrowth:
    def test_table(self):
        rows = ins.growth_table(4)
        assert [r.m for r in rows] == [1, 2, 3, 4]
        assert rows[-1].log2_incr is None
        for r in rows[:-1]:
            assert 3.0 < r.log2_incr < 3.3
        assert rows[0].gap == pytest.approx(GAP1, rel=1e-11)

    def test_too_small(self):
        with pytest.raises(ValueError):
            ins.growth_table(1)
