from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from hypercascade.errors import AmplitudeOverflow, DuplicateOccupancy, PatternArity
from hypercascade.state import (
    HALF_ROOT,
    ONE,
    Amplitude,
    FreqTag,
    Photon,
    PhotonState,
    Pol,
    TimeBin,
    add_term,
    canonicalize,
    photon,
    product_state,
    states_equal,
    tensor_factor_check,
)


class TestPolarizationAndTags:
    def test_flip_is_involution(self):
        for p in Pol:
            assert p.flip().flip() is p
        assert Pol.H.flip() is Pol.V

    def test_freq_children_are_fresh(self):
        root = FreqTag(0)
        s, i = root.children()
        assert s != i and s.depth == i.depth == 1
        assert root.is_pump and not s.is_pump
        assert s.children()[0].path == (0, 0)


class TestCanonicalize:
    def test_sorts_by_mode(self):
        term = canonicalize([photon("V", "b_2"), photon("H", "a_1")])
        assert term == (photon("H", "a_1"), photon("V", "b_2"))

    def test_idempotent(self):
        term = canonicalize([photon("H", "a_1"), photon("V", "b_2")])
        assert canonicalize(term) == term

    def test_duplicate_rejected(self):
        with pytest.raises(DuplicateOccupancy):
            canonicalize([photon("H", "a_1"), photon("H", "a_1")])

    def test_same_mode_different_freq_allowed(self):
        s, i = FreqTag(0).children()
        term = canonicalize([photon("H", "a", freq=s), photon("H", "a", freq=i)])
        assert len(term) == 2

    def test_timebin_orders_within_mode(self):
        term = canonicalize([photon("H", "a", "t_2"), photon("H", "a", "t_1")])
        assert [p.timebin for p in term] == [TimeBin.T1, TimeBin.T2]

    @given(st.permutations([("H", "a_1"), ("V", "a_2"), ("H", "c_1"), ("V", "d_2"), ("V", "b")]))
    def test_permutation_invariant(self, order):
        ref = canonicalize(photon(p, m) for p, m in sorted(order))
        assert canonicalize(photon(p, m) for p, m in order) == ref


class TestAmplitude:
    def test_weight_and_float(self):
        a = Amplitude(-1, 3)
        assert a.weight == Fraction(1, 8)
        assert float(a) == pytest.approx(-(2 ** -1.5))

    def test_render(self):
        assert Amplitude(1, 2).render() == "+(1/√2)^2"
        assert Amplitude(-1, 1).render() == "-(1/√2)^1"
        assert Amplitude(1, 2).pretty() == "1/2"
        assert Amplitude(1, 1).pretty() == "1/√2"
        assert Amplitude(1, 3).pretty() == "1/(2√2)"

    def test_negative_power_rejected(self):
        with pytest.raises(AmplitudeOverflow):
            Amplitude(1, -1)

    def test_product(self):
        assert HALF_ROOT * HALF_ROOT == Amplitude(1, 2)
        assert (-HALF_ROOT) * HALF_ROOT == Amplitude(-1, 2)


class TestAddTerm:
    term = (photon("H", "a_1"),)

    def test_cancellation_removes_entry(self):
        s = add_term(PhotonState(), self.term, HALF_ROOT)
        s = add_term(s, self.term, -HALF_ROOT)
        assert len(s) == 0

    def test_doubling_overflows(self):
        s = add_term(PhotonState(), self.term, HALF_ROOT)
        with pytest.raises(AmplitudeOverflow):
            add_term(s, self.term, HALF_ROOT)

    def test_empty_plus_term(self):
        s = add_term(PhotonState(), self.term, ONE)
        assert s[self.term] == ONE

    def test_two_halves_make_one_over_root2(self):
        # 1/2 + 1/2 = 1 exactly: amplitudes combine in Q(√2), not by float
        s = add_term(PhotonState(), self.term, Amplitude(1, 2))
        s = add_term(s, self.term, Amplitude(1, 2))
        assert s[self.term] == ONE

    def test_unequal_magnitudes_leave_the_ring(self):
        s = add_term(PhotonState(), self.term, ONE)
        with pytest.raises(AmplitudeOverflow):
            add_term(s, self.term, HALF_ROOT)


class TestStatesEqual:
    def _ghz(self):
        return product_state(["HVH", "VHV"], ["c_2", "c_1", "b_2"], ["d_2", "d_1", "a_2"])

    def test_self(self):
        s = self._ghz()
        assert states_equal(s, s)

    def test_global_sign(self):
        s = self._ghz()
        assert states_equal(s, -s)
        assert not states_equal(s, -s, up_to_global_phase=False)

    def test_relative_sign_differs(self):
        t1 = (photon("H", "a"),)
        t2 = (photon("V", "a"),)
        plus = PhotonState.from_terms([(t1, HALF_ROOT), (t2, HALF_ROOT)])
        minus = PhotonState.from_terms([(t1, HALF_ROOT), (t2, -HALF_ROOT)])
        assert not states_equal(plus, minus)

    def test_three_vs_four_photon(self):
        four = product_state(["HVVH", "VHHV"], ["d_4", "d_3", "d_2", "d_1"], ["c_4", "c_3", "c_2", "c_1"])
        assert not states_equal(self._ghz(), four)

    def test_norm(self):
        assert self._ghz().norm_squared() == 1


class TestTensorFactorCheck:
    def test_pol_spatial(self):
        s = product_state(["HVH", "VHV"], ["c_2", "c_1", "b_2"], ["d_2", "d_1", "a_2"])
        assert tensor_factor_check(s, ["HVH", "VHV"], ["c_2", "c_1", "b_2"], ["d_2", "d_1", "a_2"])
        assert not tensor_factor_check(s, ["HVV", "VHH"], ["c_2", "c_1", "b_2"], ["d_2", "d_1", "a_2"])

    def test_time_bin(self):
        slots = lambda tb: [("b_1", tb), ("a_1", tb), ("b", tb)]
        s = product_state(["HVH", "VHV"], slots("t_1"), slots("t_2"))
        assert tensor_factor_check(s, ["HVH", "VHV"], slots("t_1"), slots("t_2"))

    def test_single_term_is_not_a_product(self):
        s = PhotonState.single(photon("H", "c_2"), photon("V", "c_1"), photon("H", "b_2"))
        assert not tensor_factor_check(s, ["HVH", "VHV"], ["c_2", "c_1", "b_2"], ["d_2", "d_1", "a_2"])

    def test_arity_mismatch(self):
        s = PhotonState.single(photon("H", "a"))
        with pytest.raises(PatternArity):
            tensor_factor_check(s, ["HV", "VH"], ["a"], ["b", "c"])

    def test_empty_state(self):
        with pytest.raises(PatternArity):
            tensor_factor_check(PhotonState(), ["H", "V"], ["a"], ["b"])


class TestRendering:
    def test_deterministic_order(self):
        s = product_state(["HV", "VH"], ["a_1", "a_2"], ["b_1", "b_2"])
        lines = s.render().splitlines()
        assert lines[0] == "+(1/√2)^2 |H⟩_{a_1}|V⟩_{a_2}"
        assert len(lines) == 4
        assert s.render() == PhotonState(dict(reversed(list(s.items())))).render()

    def test_ket_with_timebin(self):
        assert Photon(Pol.H, "b_1", TimeBin.T1).ket() == "|Ht_1⟩_{b_1}"
