import math

import numpy as np
import pytest

from bosewells.exact import (QuantumState, SpectralDecomposition, evolve,
                             ground_state, imbalance_expectation,
                             imbalance_series, number_distribution,
                             occupation_expectation,
                             tilt_for_target_imbalance)
from bosewells.model import (ModelParams, ParameterError, build_fock_basis,
                             build_hamiltonian, plasma_frequency)


@pytest.fixture(scope="module")
def dwell100():
    params = ModelParams(2, 100, 10.0, 1.0)
    basis = build_fock_basis(2, 100)
    return params, basis


class TestGroundState:
    def test_single_particle_symmetric(self):
        basis = build_fock_basis(2, 1)
        h = build_hamiltonian(ModelParams(2, 1, 10.0, 0.0), basis)
        state, energy = ground_state(h, basis)
        assert energy == pytest.approx(-10.0)
        assert np.allclose(np.abs(state.amplitudes), 1 / math.sqrt(2))

    def test_two_noninteracting_particles_binomial(self):
        basis = build_fock_basis(2, 2)
        h = build_hamiltonian(ModelParams(2, 2, 10.0, 0.0), basis)
        state, energy = ground_state(h, basis)
        assert energy == pytest.approx(-20.0)
        assert np.allclose(np.abs(state.amplitudes),
                           [0.5, 1 / math.sqrt(2), 0.5], atol=1e-12)

    def test_phase_convention_positive(self, dwell100):
        params, basis = dwell100
        h = build_hamiltonian(params.with_tilt(-5.0), basis)
        state, _ = ground_state(h, basis)
        k = np.argmax(np.abs(state.amplitudes))
        assert state.amplitudes[k].imag == 0
        assert state.amplitudes[k].real > 0

    def test_decomposition_invariants(self, dwell100):
        params, basis = dwell100
        h = build_hamiltonian(params, basis)
        dec = SpectralDecomposition.of(h)
        assert np.all(np.diff(dec.eigenvalues) >= 0)
        v = dec.eigenvectors
        assert np.max(np.abs(v.T @ v - np.eye(len(h)))) < 1e-10
        assert dec.reconstruction_error(h) <= 1e-9 * np.max(np.abs(h))


class TestEvolve:
    def test_identity_at_t0(self, dwell100):
        params, basis = dwell100
        h = build_hamiltonian(params, basis)
        state, _ = ground_state(h, basis)
        amps = evolve(h, state, np.array([0.0]))
        assert np.allclose(amps[0], state.amplitudes, atol=1e-12)

    def test_rabi_flopping(self):
        basis = build_fock_basis(2, 1)
        h = build_hamiltonian(ModelParams(2, 1, 10.0, 0.0), basis)
        psi0 = QuantumState(basis, np.array([0.0, 1.0]))  # particle in well 1
        times = np.linspace(0, 1, 101)
        amps = evolve(h, psi0, times)
        # |<(1,0)|psi>|^2 = cos^2(T t)
        k = basis.index[(1, 0)]
        assert np.allclose(np.abs(amps[:, k]) ** 2, np.cos(10 * times) ** 2,
                           atol=1e-10)

    def test_unitarity_and_energy_conservation(self, dwell100):
        params, basis = dwell100
        h = build_hamiltonian(params, basis)
        delta = tilt_for_target_imbalance(params, basis, 14.0)
        psi0, _ = ground_state(build_hamiltonian(params.with_tilt(delta),
                                                 basis), basis)
        times = np.linspace(0, 5, 200)
        amps = evolve(h, psi0, times)
        norms = np.linalg.norm(amps, axis=1)
        assert np.max(np.abs(norms - 1)) < 1e-12
        energies = np.real(np.einsum("ti,ij,tj->t", amps.conj(), h, amps))
        assert np.max(np.abs(energies - energies[0])) < \
            1e-10 * abs(energies[0])

    def test_symmetric_state_stays_balanced(self, dwell100):
        params, basis = dwell100
        h = build_hamiltonian(params, basis)
        psi0, _ = ground_state(h, basis)
        amps = evolve(h, psi0, np.linspace(0, 3, 50))
        assert np.max(np.abs(imbalance_series(basis, amps))) < 1e-10

    def test_plasma_frequency_peak(self, dwell100):
        # small displacement: dominant FFT peak within 5% of 2T sqrt(1+Lambda)
        params, basis = dwell100
        delta = tilt_for_target_imbalance(params, basis, 2.0)
        psi0, _ = ground_state(build_hamiltonian(params.with_tilt(delta),
                                                 basis), basis)
        h = build_hamiltonian(params, basis)
        times = np.linspace(0, 50 * 2 * np.pi / plasma_frequency(params), 4096)
        j = imbalance_series(basis, evolve(h, psi0, times))
        j = j - j.mean()
        spec = np.abs(np.fft.rfft(j))
        freqs = 2 * np.pi * np.fft.rfftfreq(len(times), times[1] - times[0])
        peak = freqs[np.argmax(spec)]
        assert abs(peak - plasma_frequency(params)) < \
            0.05 * plasma_frequency(params)

    def test_rejects_descending_times(self, dwell100):
        params, basis = dwell100
        h = build_hamiltonian(params, basis)
        state, _ = ground_state(h, basis)
        with pytest.raises(ParameterError):
            evolve(h, state, np.array([1.0, 0.5]))


class TestExpectations:
    def test_pure_fock_imbalance(self):
        basis = build_fock_basis(2, 100)
        amps = np.zeros(101)
        amps[basis.index[(100, 0)]] = 1.0
        assert imbalance_expectation(QuantumState(basis, amps)) == 50.0

    def test_imbalance_rejects_three_modes(self):
        basis = build_fock_basis(3, 2)
        amps = np.zeros(basis.dimension)
        amps[0] = 1.0
        with pytest.raises(ParameterError):
            imbalance_expectation(QuantumState(basis, amps))

    def test_occupation_pure_fock(self):
        basis = build_fock_basis(3, 30)
        amps = np.zeros(basis.dimension)
        amps[basis.index[(10, 10, 10)]] = 1.0
        state = QuantumState(basis, amps)
        assert occupation_expectation(state, 1) == 10.0
        with pytest.raises(ParameterError):
            occupation_expectation(state, 4)

    def test_symmetric_triple_well_mirror(self):
        params = ModelParams(3, 12, 10.0, 1.0)
        basis = build_fock_basis(3, 12)
        state, _ = ground_state(build_hamiltonian(params, basis), basis)
        assert occupation_expectation(state, 1) == \
            pytest.approx(occupation_expectation(state, 3), abs=1e-10)

    def test_tilted_triple_well_depletes_well_one(self):
        params = ModelParams(3, 30, 10.0, 1.0, tilt=10.0)
        basis = build_fock_basis(3, 30)
        state, _ = ground_state(build_hamiltonian(params, basis), basis)
        assert occupation_expectation(state, 1) < 10.0

    def test_number_distribution_axioms(self):
        basis = build_fock_basis(2, 40)
        rng = np.random.default_rng(5)
        amps = rng.normal(size=41) + 1j * rng.normal(size=41)
        state = QuantumState(basis, amps / np.linalg.norm(amps))
        grid, probs = number_distribution(state)
        assert np.all(probs >= 0)
        assert probs.sum() == pytest.approx(1.0, abs=1e-12)
        assert grid[0] == -20 and grid[-1] == 20

    def test_number_distribution_delta(self):
        basis = build_fock_basis(2, 10)
        amps = np.zeros(11)
        amps[basis.index[(7, 3)]] = 1.0
        grid, probs = number_distribution(QuantumState(basis, amps))
        assert probs[basis.index[(7, 3)]] == 1.0


class TestTiltSolver:
    def test_zero_target(self, dwell100):
        params, basis = dwell100
        assert tilt_for_target_imbalance(params, basis, 0.0) == 0.0

    def test_fig1_target(self, dwell100):
        params, basis = dwell100
        delta = tilt_for_target_imbalance(params, basis, 14.0)
        psi, _ = ground_state(build_hamiltonian(params.with_tilt(delta),
                                                basis), basis)
        assert abs(imbalance_expectation(psi) - 14.0) <= 1e-3 * 100

    def test_sign_flip_symmetry(self, dwell100):
        params, basis = dwell100
        d_pos = tilt_for_target_imbalance(params, basis, 10.0)
        d_neg = tilt_for_target_imbalance(params, basis, -10.0)
        assert d_pos == pytest.approx(-d_neg, rel=1e-6)

    def test_self_trapping_preparation(self):
        # Lambda = 100 regime: j0 = 40 sits beyond the separatrix
        params = ModelParams(2, 100, 10.0, 10.0)
        basis = build_fock_basis(2, 100)
        delta = tilt_for_target_imbalance(params, basis, 40.0)
        psi, _ = ground_state(build_hamiltonian(params.with_tilt(delta),
                                                basis), basis)
        assert abs(imbalance_expectation(psi) - 40.0) <= 0.1

    def test_unreachable_target(self, dwell100):
        params, basis = dwell100
        with pytest.raises(ParameterError):
            tilt_for_target_imbalance(params, basis, 50.0)
