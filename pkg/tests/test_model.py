import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bosewells.model import (ModelParams, ParameterError, build_fock_basis,
                             build_hamiltonian, classify_regime,
                             plasma_frequency)


class TestFockBasis:
    def test_dimension_two_modes(self):
        assert build_fock_basis(2, 100).dimension == 101

    def test_dimension_three_modes(self):
        assert build_fock_basis(3, 30).dimension == 496

    def test_single_particle(self):
        basis = build_fock_basis(2, 1)
        assert basis.states == ((0, 1), (1, 0))
        assert basis.dimension == 2

    def test_rejects_bad_arguments(self):
        with pytest.raises(ParameterError):
            build_fock_basis(4, 10)
        with pytest.raises(ParameterError):
            build_fock_basis(2, 0)

    @given(modes=st.sampled_from([2, 3]), n=st.integers(1, 25))
    @settings(max_examples=30, deadline=None)
    def test_index_inverts_states(self, modes, n):
        basis = build_fock_basis(modes, n)
        assert basis.dimension == math.comb(n + modes - 1, modes - 1)
        for k, occ in enumerate(basis.states):
            assert sum(occ) == n
            assert basis.index[occ] == k
        # lexicographic ordering is strict
        assert list(basis.states) == sorted(basis.states)


class TestHamiltonian:
    def test_single_particle_matrix(self):
        basis = build_fock_basis(2, 1)
        h = build_hamiltonian(ModelParams(2, 1, 10.0, 5.0), basis)
        # states ordered (0,1), (1,0); diagonal is the tilt alone
        assert np.allclose(h, [[0.0, -10.0], [-10.0, 0.0]])

    def test_two_particle_matrix(self):
        basis = build_fock_basis(2, 2)
        h = build_hamiltonian(ModelParams(2, 2, 10.0, 1.0), basis)
        # states (0,2), (1,1), (2,0): U n(n-1) diagonal, hops -T sqrt(2)
        assert np.allclose(np.diag(h), [2.0, 0.0, 2.0])
        assert h[0, 1] == h[1, 0] == pytest.approx(-10 * math.sqrt(2))
        assert h[1, 2] == h[2, 1] == pytest.approx(-10 * math.sqrt(2))
        assert h[0, 2] == 0.0

    def test_tilt_only_diagonal(self):
        basis = build_fock_basis(2, 2)
        h = build_hamiltonian(ModelParams(2, 2, 10.0, 0.0, tilt=5.0), basis)
        # (0,2) -> -10, (1,1) -> 0, (2,0) -> +10
        assert np.allclose(np.diag(h), [-10.0, 0.0, 10.0])

    def test_no_direct_1_3_hopping(self):
        basis = build_fock_basis(3, 2)
        h = build_hamiltonian(ModelParams(3, 2, 1.0, 0.0), basis)
        i = basis.index[(2, 0, 0)]
        j = basis.index[(0, 0, 2)]
        k = basis.index[(1, 0, 1)]
        assert h[i, j] == 0.0
        assert h[i, k] == 0.0  # differs by one 1->3 hop

    def test_hermitian_and_swap_symmetric(self):
        basis = build_fock_basis(2, 17)
        h = build_hamiltonian(ModelParams(2, 17, 3.0, 0.7), basis)
        assert np.array_equal(h, h.T)
        # delta = 0: swapping wells reverses the basis ordering exactly
        assert np.array_equal(h, h[::-1, ::-1])

    def test_basis_mismatch(self):
        basis = build_fock_basis(2, 4)
        with pytest.raises(ParameterError):
            build_hamiltonian(ModelParams(2, 5, 1.0, 0.0), basis)

    def test_fock_regime_doublets(self):
        # Lambda >> N^2: spectrum pairs into quasidegenerate doublets
        # (for even N the balanced ground state is a lone singlet, then
        # doublets follow)
        n = 4
        params = ModelParams(2, n, 1.0, 1e4 / n)  # Lambda = 1e4 >> 16
        basis = build_fock_basis(2, n)
        evals = np.linalg.eigvalsh(build_hamiltonian(params, basis))
        gaps = np.diff(evals)
        intra = gaps[1::2]   # within doublets
        inter = gaps[0::2]   # singlet->doublet and doublet->doublet
        assert np.min(inter) / np.max(intra) >= 1e3


class TestRegimes:
    def test_paper_parameters_are_josephson(self):
        assert classify_regime(ModelParams(2, 100, 10.0, 1.0)) == "Josephson"

    def test_rabi(self):
        assert classify_regime(ModelParams(2, 100, 10.0, 0.05)) == "Rabi"

    def test_fock(self):
        # Lambda = 1e5 >= N^2 = 1e4
        assert classify_regime(ModelParams(2, 100, 10.0, 1e4)) == "Fock"

    def test_plasma_frequency_values(self):
        assert plasma_frequency(ModelParams(2, 100, 10.0, 1.0)) == \
            pytest.approx(20 * math.sqrt(11))
        assert plasma_frequency(ModelParams(2, 100, 10.0, 0.0)) == 20.0
        assert plasma_frequency(ModelParams(2, 100, 10.0, 10.0)) == \
            pytest.approx(20 * math.sqrt(101))

    @given(st.floats(0.01, 1e6), st.integers(1, 1000))
    @settings(max_examples=50, deadline=None)
    def test_lambda_recomputed(self, u, n):
        params = ModelParams(2, n, 2.0, u)
        assert params.lam == pytest.approx(u * n / 2.0)


class TestParams:
    def test_validation(self):
        with pytest.raises(ParameterError):
            ModelParams(5, 10, 1.0, 0.0)
        with pytest.raises(ParameterError):
            ModelParams(2, 0, 1.0, 0.0)
        with pytest.raises(ParameterError):
            ModelParams(2, 10, 0.0, 0.0)
        with pytest.raises(ParameterError):
            ModelParams(2, 10, 1.0, -1.0)

    def test_with_tilt(self):
        p = ModelParams(2, 10, 1.0, 0.5).with_tilt(3.0)
        assert p.tilt == 3.0 and p.interaction == 0.5
