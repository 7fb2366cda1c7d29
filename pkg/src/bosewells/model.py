"""Bose-Hubbard systems on two and three wells: parameters, Fock bases,
Hamiltonian matrices and interaction-regime bookkeeping.

Conventions
-----------
The Hamiltonian for ``M`` wells at fixed total particle number ``N`` is

    H = -T * sum_<i,i+1> (a_i^+ a_{i+1} + h.c.)
        + U * sum_i n_i (n_i - 1)
        + delta * (n_1 - n_2)

with nearest-neighbour hopping only (no 1<->3 term for M=3).  The tilt
``delta`` is used to prepare displaced initial states; dynamics are run
with the tilt switched off.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

#: Dense storage is fine at the particle numbers this package targets;
#: warn above this dimension rather than silently allocating gigabytes.
DENSE_DIMENSION_WARN = 5000


class ParameterError(ValueError):
    """A physical parameter is outside its allowed domain."""


@dataclass(frozen=True)
class ModelParams:
    """Physical parameters of a two- or three-well Bose-Hubbard system.

    Parameters
    ----------
    modes : int
        Number of wells, 2 or 3.
    n_total : int
        Total particle number N (>= 1).
    tunneling : float
        Hopping amplitude T (> 0, energy units).
    interaction : float
        On-site interaction U (>= 0, energy units).
    tilt : float
        Tilt delta applied as ``delta * (n_1 - n_2)`` (energy units).
    """

    modes: int
    n_total: int
    tunneling: float
    interaction: float = 0.0
    tilt: float = 0.0

    def __post_init__(self) -> None:
        if self.modes not in (2, 3):
            raise ParameterError(f"modes must be 2 or 3, got {self.modes}")
        if self.n_total < 1:
            raise ParameterError(f"n_total must be >= 1, got {self.n_total}")
        if not self.tunneling > 0:
            raise ParameterError(f"tunneling must be > 0, got {self.tunneling}")
        if self.interaction < 0:
            raise ParameterError(
                f"interaction must be >= 0, got {self.interaction}")

    @property
    def lam(self) -> float:
        """Dimensionless interaction parameter Lambda = U*N/T (recomputed)."""
        return self.interaction * self.n_total / self.tunneling

    def with_tilt(self, tilt: float) -> "ModelParams":
        """Copy of these parameters with a different tilt."""
        return ModelParams(self.modes, self.n_total, self.tunneling,
                           self.interaction, tilt)


@dataclass(frozen=True)
class FockBasis:
    """Ordered fixed-N occupation basis.

    ``states`` is lexicographically ordered by occupation vector, so
    indices are reproducible across runs.  For two modes the index k
    corresponds to the state (k, N-k), i.e. imbalance j = k - N/2.
    """

    modes: int
    n_total: int
    states: tuple[tuple[int, ...], ...]
    index: dict[tuple[int, ...], int] = field(repr=False)

    @property
    def dimension(self) -> int:
        return len(self.states)

    def occupations(self) -> np.ndarray:
        """Occupation numbers as an integer array of shape (dim, modes)."""
        return np.array(self.states, dtype=np.int64)

    def imbalance_values(self) -> np.ndarray:
        """j = (n_1 - n_2)/2 for every basis state."""
        occ = self.occupations()
        return (occ[:, 0] - occ[:, 1]) / 2.0


def build_fock_basis(modes: int, n_total: int) -> FockBasis:
    """Enumerate all occupation vectors (n_1, ..., n_M) with sum N.

    The dimension is binomial(N+M-1, M-1): N+1 for two modes and
    (N+1)(N+2)/2 for three.
    """
    if modes not in (2, 3):
        raise ParameterError(f"modes must be 2 or 3, got {modes}")
    if n_total < 1:
        raise ParameterError(f"n_total must be >= 1, got {n_total}")
    states: list[tuple[int, ...]] = []
    if modes == 2:
        for n1 in range(n_total + 1):
            states.append((n1, n_total - n1))
    else:
        for n1 in range(n_total + 1):
            for n2 in range(n_total - n1 + 1):
                states.append((n1, n2, n_total - n1 - n2))
    assert len(states) == math.comb(n_total + modes - 1, modes - 1)
    return FockBasis(modes=modes, n_total=n_total, states=tuple(states),
                     index={s: k for k, s in enumerate(states)})


def build_hamiltonian(params: ModelParams, basis: FockBasis) -> np.ndarray:
    """Dense Hermitian (real symmetric) Hamiltonian matrix in `basis`.

    Diagonal: U * sum_i n_i(n_i - 1) + delta (n_1 - n_2).
    Off-diagonal: -T sqrt(n_i (n_j + 1)) between states connected by a
    single hop between adjacent wells.
    """
    if (basis.modes, basis.n_total) != (params.modes, params.n_total):
        raise ParameterError(
            f"basis ({basis.modes} modes, N={basis.n_total}) does not match "
            f"params ({params.modes} modes, N={params.n_total})")
    dim = basis.dimension
    if dim > DENSE_DIMENSION_WARN:
        import warnings
        warnings.warn(
            f"dense Hamiltonian of dimension {dim}; consider smaller N",
            RuntimeWarning, stacklevel=2)
    h = np.zeros((dim, dim))
    u, t, delta = params.interaction, params.tunneling, params.tilt
    # adjacent-well pairs: (0,1) for M=2, (0,1) and (1,2) for M=3
    bonds = [(0, 1)] if params.modes == 2 else [(0, 1), (1, 2)]
    for k, occ in enumerate(basis.states):
        h[k, k] = (u * sum(n * (n - 1) for n in occ)
                   + delta * (occ[0] - occ[1]))
        for i, j in bonds:
            # hop one particle i -> j; the reverse comes from symmetry
            if occ[i] > 0:
                target = list(occ)
                target[i] -= 1
                target[j] += 1
                m = basis.index[tuple(target)]
                amp = -t * math.sqrt(occ[i] * (occ[j] + 1))
                h[m, k] = amp
                h[k, m] = amp
    return h


def classify_regime(params: ModelParams) -> str:
    """Interaction regime by Lambda = UN/T: Rabi, Josephson or Fock.

    Boundary convention: Rabi for Lambda < 1, Josephson for
    1 <= Lambda < N^2, Fock for Lambda >= N^2.  Informational only.
    """
    lam = params.lam
    if lam < 1.0:
        return "Rabi"
    if lam < params.n_total ** 2:
        return "Josephson"
    return "Fock"


def plasma_frequency(params: ModelParams) -> float:
    """Small-oscillation frequency 2 T sqrt(1 + Lambda) of the imbalance."""
    return 2.0 * params.tunneling * math.sqrt(1.0 + params.lam)
