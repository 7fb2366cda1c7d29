"""Numerically exact reference dynamics by full diagonalization.

At the particle numbers of interest (basis dimensions up to a few
hundred) a one-time eigendecomposition is the cheapest propagator and is
exactly unitary at every evaluation time; Krylov stepping only pays off
for dimensions far beyond this package's scope.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import FockBasis, ModelParams, ParameterError, build_hamiltonian


class EigensolverError(RuntimeError):
    """Diagonalization failed; carries basic matrix diagnostics."""


@dataclass(frozen=True)
class QuantumState:
    """Normalized complex amplitude vector over a Fock basis."""

    basis: FockBasis
    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        amps = np.asarray(self.amplitudes, dtype=complex)
        nrm = np.linalg.norm(amps)
        if abs(nrm - 1.0) > 1e-12:
            if nrm == 0:
                raise ValueError("zero-norm state")
            amps = amps / nrm
        object.__setattr__(self, "amplitudes", amps)

    @property
    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenvalues (ascending) and orthonormal eigenvectors of H."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @classmethod
    def of(cls, h: np.ndarray) -> "SpectralDecomposition":
        h = np.asarray(h)
        if not np.allclose(h, h.conj().T):
            raise ParameterError("matrix is not Hermitian")
        try:
            evals, evecs = np.linalg.eigh(h)
        except np.linalg.LinAlgError as exc:  # pragma: no cover
            scale = np.max(np.abs(h)) if h.size else 0.0
            raise EigensolverError(
                f"eigh failed on dim={h.shape[0]} matrix, "
                f"max|H|={scale:.3e}: {exc}") from exc
        return cls(eigenvalues=evals, eigenvectors=evecs)

    def reconstruction_error(self, h: np.ndarray) -> float:
        rebuilt = (self.eigenvectors * self.eigenvalues) @ self.eigenvectors.conj().T
        return float(np.max(np.abs(rebuilt - h)))


def ground_state(h: np.ndarray, basis: FockBasis) -> tuple[QuantumState, float]:
    """Lowest eigenpair of `h`.

    The phase is fixed by making the largest-magnitude amplitude real
    positive.  Returns (state, energy).
    """
    dec = SpectralDecomposition.of(h)
    vec = dec.eigenvectors[:, 0].astype(complex)
    k = int(np.argmax(np.abs(vec)))
    vec = vec * (abs(vec[k]) / vec[k])
    return QuantumState(basis, vec), float(dec.eigenvalues[0])


def evolve(h: np.ndarray, psi0: QuantumState,
           times: np.ndarray) -> np.ndarray:
    """Amplitudes psi(t) = V exp(-i E t) V^+ psi0 on an ascending grid.

    Returns a complex array of shape (len(times), dim).  hbar = 1: times
    are in inverse energy units of `h`.
    """
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or (len(times) > 1 and np.any(np.diff(times) <= 0)):
        raise ParameterError("times must be a strictly ascending 1-D grid")
    dec = SpectralDecomposition.of(h)
    coeff = dec.eigenvectors.conj().T @ psi0.amplitudes
    phases = np.exp(-1j * np.outer(times, dec.eigenvalues))
    return (phases * coeff) @ dec.eigenvectors.T


def imbalance_expectation(psi: QuantumState) -> float:
    """<j> = sum |c_n|^2 (n_1 - n_2)/2 for a two-mode state."""
    if psi.basis.modes != 2:
        raise ParameterError(
            "imbalance is defined for two modes; use occupation_expectation")
    return float(psi.probabilities @ psi.basis.imbalance_values())


def occupation_expectation(psi: QuantumState, well: int) -> float:
    """<n_well> with wells numbered from 1."""
    if not 1 <= well <= psi.basis.modes:
        raise ParameterError(f"well must be in 1..{psi.basis.modes}")
    occ = psi.basis.occupations()[:, well - 1]
    return float(psi.probabilities @ occ)


def imbalance_series(basis: FockBasis, amps: np.ndarray) -> np.ndarray:
    """<j>(t) for evolved amplitudes of shape (n_times, dim)."""
    return (np.abs(amps) ** 2) @ basis.imbalance_values()


def occupation_series(basis: FockBasis, amps: np.ndarray, well: int) -> np.ndarray:
    """<n_well>(t) for evolved amplitudes of shape (n_times, dim)."""
    occ = basis.occupations()[:, well - 1].astype(float)
    return (np.abs(amps) ** 2) @ occ


def number_distribution(psi: QuantumState) -> tuple[np.ndarray, np.ndarray]:
    """Probability distribution over the number grid.

    For two modes, returns (j_values, probabilities) with j in
    {-N/2, ..., N/2}.  For three modes, returns the marginal over n_1.
    """
    if psi.basis.modes == 2:
        return psi.basis.imbalance_values(), psi.probabilities
    occ = psi.basis.occupations()[:, 0]
    n_vals = np.arange(psi.basis.n_total + 1, dtype=float)
    probs = np.bincount(occ, weights=psi.probabilities,
                        minlength=psi.basis.n_total + 1)
    return n_vals, probs


def tilt_for_target_imbalance(params: ModelParams, basis: FockBasis,
                              j_target: float,
                              tol_factor: float = 1e-3) -> float:
    """Tilt delta whose ground state has <j> = j_target.

    <j> of the ground state decreases monotonically with delta (the tilt
    enters as +delta*(n_1 - n_2)), so a positive target needs delta < 0.
    Solved by bisection to |<j> - j_target| <= tol_factor * N.
    """
    n = params.n_total
    if abs(j_target) >= n / 2:
        raise ParameterError(
            f"|j_target| must be < N/2 = {n / 2}, got {j_target}")

    def mean_j(delta: float) -> float:
        h = build_hamiltonian(params.with_tilt(delta), basis)
        state, _ = ground_state(h, basis)
        return imbalance_expectation(state)

    tol = tol_factor * n
    if abs(j_target - mean_j(0.0)) <= tol:
        return 0.0
    # expand a bracket: mean_j is decreasing in delta
    scale = max(params.tunneling, params.interaction * n, 1.0)
    lo, hi = -scale, scale  # j(lo) high, j(hi) low
    for _ in range(60):
        if mean_j(lo) >= j_target:
            break
        lo *= 2.0
    else:
        raise ParameterError(
            f"target j={j_target} unreachable; achievable range at "
            f"|delta|<={abs(lo):.3e} is [{mean_j(hi):.3f}, {mean_j(lo):.3f}]")
    for _ in range(60):
        if mean_j(hi) <= j_target:
            break
        hi *= 2.0
    else:
        raise ParameterError(
            f"target j={j_target} unreachable; achievable range at "
            f"|delta|<={abs(hi):.3e} is [{mean_j(hi):.3f}, {mean_j(lo):.3f}]")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        jm = mean_j(mid)
        if abs(jm - j_target) <= tol:
            return mid
        if jm > j_target:
            lo = mid
        else:
            hi = mid
    raise EigensolverError("tilt bisection did not converge")
