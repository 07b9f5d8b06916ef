import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import bell, product, random_pure
from pcsmono import (
    LayoutError,
    MeasureValue,
    NegativeMeasureError,
    PCSParams,
    PCSState,
    WClassCoefficients,
    build_coherent_superposition,
    build_w_state,
    negativity_pure,
    sample_random_pcs,
    scren_pcs_one_vs_rest,
    scren_pcs_pair,
    scren_pure,
    tangle_pure_qubit,
)

seeds = st.integers(0, 2 ** 32 - 1)
W3 = build_w_state(WClassCoefficients.standard_w(3, 2))


class TestMeasureValue:
    def test_clamps_roundoff(self):
        assert MeasureValue(-1e-12, "x").value == 0.0

    def test_negative_raises(self):
        with pytest.raises(NegativeMeasureError):
            MeasureValue(-1e-6, "x")

    def test_signed_keeps_sign(self):
        assert MeasureValue(-0.25, "x", signed=True).value == -0.25


class TestNegativity:
    def test_product(self):
        assert negativity_pure(product([1, 1], [1, 2j]), [0]).value < 1e-15

    def test_bell(self):
        assert abs(negativity_pure(bell(), [0]).value - 1) < 1e-14

    def test_w(self):
        assert abs(negativity_pure(W3, [0]).value - 2 * math.sqrt(2 / 9)) < 1e-14

    def test_max_entangled_qutrits(self):
        from pcsmono import PureState, SubsystemLayout
        v = np.zeros(9)
        v[[0, 4, 8]] = 1 / math.sqrt(3)
        assert abs(negativity_pure(PureState(SubsystemLayout((3, 3)), v), [1]).value - 2) < 1e-13

    @settings(max_examples=30, deadline=None)
    @given(seed=seeds, dims=st.lists(st.integers(2, 3), min_size=2, max_size=3), data=st.data())
    def test_paths_agree_and_symmetric(self, seed, dims, data):
        psi = random_pure(dims, np.random.default_rng(seed))
        cut = sorted(data.draw(st.sets(st.integers(0, len(dims) - 1), min_size=1, max_size=len(dims) - 1)))
        rest = [i for i in range(len(dims)) if i not in cut]
        a = negativity_pure(psi, cut).value
        b = negativity_pure(psi, cut, path="partial_transpose").value
        assert abs(a - b) < 1e-10
        assert abs(a - negativity_pure(psi, rest).value) < 1e-12
        assert 0 <= a <= min(psi.layout.subdim(cut), psi.layout.subdim(rest)) - 1 + 1e-12

    def test_bad_cut(self):
        with pytest.raises(LayoutError):
            negativity_pure(bell(), [0, 1])
        with pytest.raises(ValueError):
            negativity_pure(bell(), [0], path="nope")


class TestScrenPure:
    def test_examples(self):
        assert abs(scren_pure(bell(), [0]).value - 1) < 1e-14
        assert abs(scren_pure(W3, [0]).value - 8 / 9) < 1e-14
        cs = build_coherent_superposition(WClassCoefficients.standard_w(3, 2), 0.5)
        assert abs(scren_pure(cs, [0]).value - 2 / 9) < 1e-14

    @settings(max_examples=30, deadline=None)
    @given(seed=seeds)
    def test_equals_negativity_squared(self, seed):
        psi = random_pure([2, 3], np.random.default_rng(seed))
        assert abs(scren_pure(psi, [0]).value - negativity_pure(psi, [0]).value ** 2) < 1e-12


class TestTangle:
    def test_examples(self):
        assert tangle_pure_qubit(product([1, 0], [0, 1]), [0]).value < 1e-15
        assert abs(tangle_pure_qubit(bell(), [1]).value - 1) < 1e-14

    def test_random_two_qubit_agreement(self):
        rng = np.random.default_rng(77)
        for _ in range(100):
            psi = random_pure([2, 2], rng)
            assert abs(tangle_pure_qubit(psi, [0]).value - scren_pure(psi, [0]).value) <= 1e-10

    def test_w_party_is_qubit(self):
        assert abs(tangle_pure_qubit(W3, [1]).value - 8 / 9) < 1e-14

    def test_needs_qubit_side(self):
        with pytest.raises(LayoutError):
            tangle_pure_qubit(W3, [0, 1])


class TestClosedForms:
    def test_fixture(self, fixture_pcs):
        assert abs(scren_pcs_one_vs_rest(fixture_pcs, 0).value - 2 / 9) < 1e-15
        assert abs(scren_pcs_pair(fixture_pcs, 0, 1).value - 1 / 9) < 1e-15

    def test_zero_cases(self):
        c = sample_random_pcs(3, 2, seed=0).coeffs
        assert scren_pcs_one_vs_rest(PCSState(c, PCSParams(0.0, 0.5)), 1).value == 0.0
        a = np.array([[1.0], [0.0], [0.0]])
        assert scren_pcs_pair(PCSState(WClassCoefficients(a), PCSParams(0.7, 0.2)), 0, 1).value == 0.0

    def test_uniform_four(self):
        pcs = PCSState(WClassCoefficients.standard_w(4, 2), PCSParams(1.0, 1.0))
        assert abs(scren_pcs_pair(pcs, 0, 3).value - 0.25) < 1e-15
        assert abs(scren_pcs_one_vs_rest(pcs, 0).value - 0.75) < 1e-15

    def test_lambda_independent(self, fixture_pcs):
        vals = {scren_pcs_one_vs_rest(PCSState(fixture_pcs.coeffs, PCSParams(0.5, lam)), 0).value
                for lam in (0.0, 0.5, 1.0)}
        assert len(vals) == 1

    @settings(max_examples=30, deadline=None)
    @given(seed=seeds, n=st.integers(3, 4), d=st.integers(2, 3))
    def test_pure_limit_matches_spectral(self, seed, n, d):
        # lambda = 1 makes the PCS state pure, where SCREN is spectral
        pcs = sample_random_pcs(n, d, seed=seed)
        psi = build_coherent_superposition(pcs.coeffs, pcs.p)
        for f in range(n):
            assert abs(scren_pcs_one_vs_rest(pcs, f).value - scren_pure(psi, [f]).value) < 1e-12

    def test_bad_parties(self, fixture_pcs):
        with pytest.raises(LayoutError):
            scren_pcs_pair(fixture_pcs, 1, 1)
        with pytest.raises(LayoutError):
            scren_pcs_one_vs_rest(fixture_pcs, 3)
