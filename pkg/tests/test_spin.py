import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import spinsemi as ss
from spinsemi.errors import NotHermitian, ScaleOverflow
from spinsemi.spin import binom_sqrt_weights


def _j1_j2(sys):
    jp, jm, _ = ss.build_spin_operators(sys)
    return (jp + jm) / 2.0, (jp - jm) / 2j


labels = st.builds(
    complex,
    st.floats(min_value=-2.0, max_value=2.0),
    st.floats(min_value=-2.0, max_value=2.0),
)


class TestSpinOperators:
    def test_spin_half_ladder(self):
        sys = ss.SpinSystem(two_j=1)
        jp, jm, j3 = ss.build_spin_operators(sys)
        assert np.allclose(j3, np.diag([-0.5, 0.5]))
        assert np.allclose(jp, [[0.0, 0.0], [1.0, 0.0]])
        assert np.allclose(jm, jp.T)

    @pytest.mark.parametrize("two_j", [1, 2, 3, 10, 40])
    def test_commutation_relations(self, two_j):
        sys = ss.SpinSystem(two_j=two_j)
        jp, jm, j3 = ss.build_spin_operators(sys)
        j1, j2 = _j1_j2(sys)
        assert np.max(np.abs(j1 @ j2 - j2 @ j1 - 1j * j3)) < 1e-12
        assert np.max(np.abs(j2 @ j3 - j3 @ j2 - 1j * j1)) < 1e-12
        assert np.max(np.abs(j3 @ j1 - j1 @ j3 - 1j * j2)) < 1e-12

    def test_raising_coefficient(self):
        # J+ |-j> has coefficient sqrt(2j) on |-j+1>
        sys = ss.SpinSystem(two_j=4)
        jp, _, _ = ss.build_spin_operators(sys)
        lowest = np.zeros(sys.dim)
        lowest[0] = 1.0
        out = jp @ lowest
        assert out[1] == pytest.approx(np.sqrt(4.0))
        assert np.allclose(np.delete(out, 1), 0.0)


class TestCoherentStates:
    def test_lowest_state(self):
        sys = ss.SpinSystem(two_j=5)
        vec = ss.coherent_vector(sys, 0.0)
        expected = np.zeros(sys.dim)
        expected[0] = 1.0
        assert np.allclose(vec, expected)

    @given(s=labels, two_j=st.integers(min_value=0, max_value=20))
    @settings(max_examples=40, deadline=None)
    def test_unit_norm(self, s, two_j):
        vec = ss.coherent_vector(ss.SpinSystem(two_j=two_j), s)
        assert abs(np.linalg.norm(vec) - 1.0) < 1e-12

    def test_matches_exponential_construction(self):
        # exp(s J+)|-j>, normalized, via a truncated series (exact: nilpotent)
        sys = ss.SpinSystem(two_j=7)
        s = 0.6 - 1.1j
        jp, _, _ = ss.build_spin_operators(sys)
        lowest = np.zeros(sys.dim, dtype=complex)
        lowest[0] = 1.0
        term = lowest.copy()
        total = lowest.copy()
        for k in range(1, sys.dim + 2):
            term = (s / k) * (jp @ term)
            total += term
        total /= np.linalg.norm(total)
        assert np.max(np.abs(total - ss.coherent_vector(sys, s))) < 1e-10

    def test_scale_overflow_guard(self):
        with pytest.raises(ScaleOverflow):
            ss.coherent_vector(ss.SpinSystem(two_j=60), 1e6)

    def test_self_overlap(self):
        sys = ss.SpinSystem(two_j=9)
        assert ss.coherent_overlap(sys, 0.4 + 0.2j, 0.4 + 0.2j) == pytest.approx(1.0)

    def test_overlap_with_lowest(self):
        sys = ss.SpinSystem(two_j=6)
        s = 0.8 - 0.3j
        expected = (1.0 + abs(s) ** 2) ** (-sys.j)
        assert ss.coherent_overlap(sys, 0.0, s) == pytest.approx(expected)

    @given(se=labels, sm=labels, two_j=st.integers(min_value=0, max_value=20))
    @settings(max_examples=40, deadline=None)
    def test_overlap_equals_inner_product(self, se, sm, two_j):
        sys = ss.SpinSystem(two_j=two_j)
        ov = ss.coherent_overlap(sys, se, sm)
        dot = np.vdot(ss.coherent_vector(sys, se), ss.coherent_vector(sys, sm))
        assert abs(ov - dot) < 1e-12

    def test_product_state(self):
        sys = ss.SpinSystem(two_j=3)
        vec = ss.product_coherent(sys, ss.CoherentLabel(0.0, 0.0))
        expected = np.zeros(sys.joint_dim)
        expected[0] = 1.0
        assert np.allclose(vec, expected)
        vec2 = ss.product_coherent(sys, ss.CoherentLabel(0.5 + 0.1j, -1.2j))
        assert abs(np.linalg.norm(vec2) - 1.0) < 1e-12

    def test_product_state_is_unentangled(self):
        sys = ss.SpinSystem(two_j=4)
        vec = ss.product_coherent(sys, ss.CoherentLabel(0.7, 0.2 - 0.4j))
        rho = ss.reduced_density(vec, "x", sys.dim)
        assert ss.purity(rho) == pytest.approx(1.0, abs=1e-12)

    def test_label_excludes_pole(self):
        with pytest.raises(ValueError):
            ss.CoherentLabel(complex("inf"), 0.0)

    def test_minimum_uncertainty_saturation(self):
        # coherent states saturate the Schrodinger-Robertson bound for (J1, J2)
        for two_j in (1, 4, 11):
            sys = ss.SpinSystem(two_j=two_j)
            j1, j2 = _j1_j2(sys)
            for s in (0.3, 1.0, 0.5 - 1.2j):
                psi = ss.coherent_vector(sys, s)
                ev = lambda op: np.vdot(psi, op @ psi)
                d1 = j1 - ev(j1) * np.eye(sys.dim)
                d2 = j2 - ev(j2) * np.eye(sys.dim)
                gap = (
                    ev(d1 @ d1).real * ev(d2 @ d2).real
                    - 0.25 * abs(ev(j1 @ j2 - j2 @ j1)) ** 2
                    - 0.25 * abs(ev(d1 @ d2 + d2 @ d1)) ** 2
                )
                assert abs(gap) < 1e-9


class TestHtildeFromOperator:
    def test_free_hamiltonian_real_point(self):
        sys = ss.SpinSystem(two_j=5)
        jp, jm, j3 = ss.build_spin_operators(sys)
        ident = np.eye(sys.dim)
        h = ss.kron(j3, ident) + ss.kron(ident, j3)
        model = ss.htilde_from_operator(sys, h)
        sx, sy = 0.6 + 0.2j, -0.8 + 0.5j
        u = np.array([sx, sy])
        val = model.htilde(u, np.conj(u))
        j = sys.j
        expected = j * (abs(sx) ** 2 - 1) / (abs(sx) ** 2 + 1) + j * (abs(sy) ** 2 - 1) / (
            abs(sy) ** 2 + 1
        )
        assert abs(val - expected) < 1e-10

    def test_phase_coupling_closed_form(self):
        sys = ss.SpinSystem(two_j=4)
        params = ss.PhaseCouplingParams(lam=0.7, sys=sys)
        closed = ss.phase_coupling_model(params)
        generic = ss.htilde_from_operator(sys, closed.operator)
        rng = np.random.default_rng(2)
        for _ in range(10):
            u = rng.standard_normal(2) + 1j * rng.standard_normal(2)
            v = rng.standard_normal(2) + 1j * rng.standard_normal(2)
            j = sys.j
            expected = (
                params.lam * sys.hbar * j * j
                * (1 - u[0] * v[0]) / (1 + u[0] * v[0])
                * (1 - u[1] * v[1]) / (1 + u[1] * v[1])
            )
            assert abs(generic.htilde(u, v) - expected) < 1e-10 * max(1.0, abs(expected))

    def test_gradient_matches_finite_differences(self):
        sys = ss.SpinSystem(two_j=3)
        model = ss.exchange_coupling_model(sys, 0.9)
        rng = np.random.default_rng(4)
        step = 1e-5
        for _ in range(5):
            u = 0.5 * (rng.standard_normal(2) + 1j * rng.standard_normal(2))
            v = 0.5 * (rng.standard_normal(2) + 1j * rng.standard_normal(2))
            grad = model.grad(u, v)
            for idx in range(4):
                du = np.zeros(2, dtype=complex)
                dv = np.zeros(2, dtype=complex)
                if idx < 2:
                    du[idx] = step
                else:
                    dv[idx - 2] = step
                fd = (model.htilde(u + du, v + dv) - model.htilde(u - du, v - dv)) / (2 * step)
                assert abs(fd - grad[idx]) < 1e-6 * max(1.0, abs(grad[idx]))

    def test_reality_on_real_points(self):
        sys = ss.SpinSystem(two_j=6)
        model = ss.exchange_coupling_model(sys, 1.3)
        rng = np.random.default_rng(8)
        for _ in range(10):
            u = rng.standard_normal(2) + 1j * rng.standard_normal(2)
            val = model.htilde(u, np.conj(u))
            assert abs(val.imag) <= 1e-10 * max(1.0, abs(val))

    def test_hessian_symmetry(self):
        sys = ss.SpinSystem(two_j=4)
        model = ss.exchange_coupling_model(sys, 0.8)
        rng = np.random.default_rng(12)
        u = 0.7 * (rng.standard_normal(2) + 1j * rng.standard_normal(2))
        v = 0.7 * (rng.standard_normal(2) + 1j * rng.standard_normal(2))
        h = model.hess(u, v)
        assert np.max(np.abs(h - h.T)) < 1e-8

    def test_rejects_non_hermitian(self):
        sys = ss.SpinSystem(two_j=2)
        bad = np.zeros((sys.joint_dim, sys.joint_dim), dtype=complex)
        bad[0, 1] = 1.0
        with pytest.raises(NotHermitian):
            ss.htilde_from_operator(sys, bad)


def test_binom_weights_match_exact():
    from math import comb

    for two_j in (0, 1, 5, 17, 40):
        w = binom_sqrt_weights(two_j)
        exact = np.sqrt([comb(two_j, n) for n in range(two_j + 1)])
        assert np.max(np.abs(w - exact) / exact) < 1e-13
