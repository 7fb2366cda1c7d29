"""Truncated Wigner approximation: sample the Wigner function of the
initial Gaussian, transport the samples classically, average.

The initial state is the Gaussian fitted to the tilted ground state in
the number-phase chart; for large N the (q, p) pair is treated as flat
canonical variables, so the Wigner function is the product of normal
densities with variances (1/(2 gamma), gamma/2) per degree of freedom.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import _ensemble, kernels
from .classical import IntegratorOptions, PhaseSpacePoint, dof_of, _system_of
from .exact import QuantumState
from .model import ModelParams

HBAR_EFF = 1.0


@dataclass(frozen=True)
class GaussianInitialState:
    """Minimum-uncertainty Gaussian in the (q, p) chart.

    Per degree of freedom the position variance is 1/(2 gamma) and the
    momentum variance gamma/2 (hbar_eff = 1), so sigma_q sigma_p = 1/2.
    """

    center: PhaseSpacePoint
    gamma: np.ndarray
    hbar_eff: float = HBAR_EFF
    fit_residual: float = 0.0

    def __post_init__(self):
        g = np.atleast_1d(np.asarray(self.gamma, float))
        if np.any(g <= 0):
            raise ValueError("gamma must be positive")
        if g.shape != self.center.q.shape:
            raise ValueError("one gamma per degree of freedom required")
        object.__setattr__(self, "gamma", g)

    @property
    def dof(self) -> int:
        return self.center.dof


@dataclass
class EnsembleResult:
    """Observable time series of a trajectory ensemble."""

    times: np.ndarray
    mean_observable: np.ndarray
    sample_count: int
    escaped_fraction: float
    rng_seed: int
    stderr: np.ndarray | None = None
    alive_count: np.ndarray | None = None
    flagged: bool = False


def hopping_phase(psi: QuantumState, i: int, k: int) -> float:
    """Phase of the order parameter <a_i^+ a_k> (wells numbered from 1)."""
    basis = psi.basis
    amps = psi.amplitudes
    val = 0j
    for idx, occ in enumerate(basis.states):
        if occ[k - 1] == 0:
            continue
        target = list(occ)
        target[i - 1] += 1
        target[k - 1] -= 1
        jdx = basis.index.get(tuple(target))
        if jdx is None:
            continue
        val += (np.conj(amps[jdx]) * amps[idx]
                * math.sqrt((occ[i - 1] + 1) * occ[k - 1]))
    if abs(val) < 1e-12:
        return 0.0
    return float(np.angle(val))


def fit_gaussian_to_ground_state(psi0: QuantumState) -> GaussianInitialState:
    """Fit a minimum-uncertainty Gaussian to a (near-Gaussian) state.

    The momentum center and width are matched to the exact number
    statistics: p0 = <n-observable>, gamma = 2 Var so that the Gaussian's
    momentum variance gamma/2 equals the state's.  The coordinate center
    comes from the phase of the hopping order parameter (zero for ground
    states, whose amplitudes can be chosen positive).  The overlap
    deficit with the state is recorded as ``fit_residual``.
    """
    basis = psi0.basis
    probs = psi0.probabilities
    occ = basis.occupations().astype(float)
    if basis.modes == 2:
        j = basis.imbalance_values()
        p0 = np.array([probs @ j])
        var = probs @ j ** 2 - p0[0] ** 2
        gamma = np.array([2.0 * var])
        q0 = np.array([hopping_phase(psi0, 1, 2)])
    else:
        n1, n2 = occ[:, 0], occ[:, 1]
        p0 = np.array([probs @ n1, probs @ n2])
        var = np.array([probs @ n1 ** 2 - p0[0] ** 2,
                        probs @ n2 ** 2 - p0[1] ** 2])
        gamma = 2.0 * var
        # angles measured against well 3 (the chart's reference phase)
        q0 = np.array([hopping_phase(psi0, 1, 3), hopping_phase(psi0, 2, 3)])
    init = GaussianInitialState(PhaseSpacePoint(q0, p0), gamma)
    residual = 1.0 - abs(gaussian_amplitudes(init, basis)
                         @ np.conj(psi0.amplitudes)) ** 2
    init = GaussianInitialState(PhaseSpacePoint(q0, p0), gamma,
                                fit_residual=float(residual))
    if residual > 0.1:
        warnings.warn(
            f"initial state is poorly Gaussian (overlap deficit "
            f"{residual:.3f}); ensemble methods may be biased",
            UserWarning, stacklevel=2)
    return init


def gaussian_amplitudes(init: GaussianInitialState, basis) -> np.ndarray:
    """Amplitudes of the Gaussian on the Fock grid, normalized there."""
    occ = basis.occupations().astype(float)
    q0, p0, g = init.center.q, init.center.p, init.gamma
    if basis.modes == 2:
        x = basis.imbalance_values()
        amp = np.exp(-(x - p0[0]) ** 2 / (2 * g[0]) - 1j * q0[0] * x)
    else:
        amp = np.ones(len(occ), dtype=complex)
        for d in range(2):
            x = occ[:, d]
            amp = amp * np.exp(-(x - p0[d]) ** 2 / (2 * g[d])
                               - 1j * q0[d] * x)
    return amp / np.linalg.norm(amp)


def sample_wigner(init: GaussianInitialState, count: int,
                  seed: int) -> np.ndarray:
    """Independent draws (count, 2D) as (q..., p...) from the Gaussian
    Wigner density; deterministic for a given seed."""
    if count < 1:
        raise ValueError("count must be >= 1")
    rng = np.random.default_rng(seed)
    d = init.dof
    q = rng.normal(init.center.q, np.sqrt(1.0 / (2.0 * init.gamma)),
                   size=(count, d))
    p = rng.normal(init.center.p, np.sqrt(init.gamma / 2.0), size=(count, d))
    return np.column_stack([q, p])


def wigner_density(init: GaussianInitialState, q: np.ndarray,
                   p: np.ndarray) -> np.ndarray:
    """Wigner function of the Gaussian on a (q, p) mesh (per dof d=1)."""
    g = init.gamma[0]
    q0, p0 = init.center.q[0], init.center.p[0]
    return (1.0 / math.pi) * np.exp(-g * (q - q0) ** 2 - (p - p0) ** 2 / g)


@dataclass(frozen=True)
class _TwaChunkTask:
    system: int
    par: np.ndarray
    samples: np.ndarray
    times: np.ndarray
    rtol: float
    atol: float
    obs_col: int


def _twa_chunk(task: _TwaChunkTask):
    out, status, n_valid = kernels.integrate_batch(
        task.system, task.par, task.samples, task.times,
        task.rtol, task.atol, False)
    obs = out[:, :, task.obs_col]
    alive = np.arange(len(task.times))[None, :] < n_valid[:, None]
    return (obs.sum(axis=0), (obs ** 2).sum(axis=0), alive.sum(axis=0),
            int(np.sum(status == kernels.STATUS_ESCAPED)),
            int(np.sum(status == kernels.STATUS_STEPFAIL)))


def run_twa(params: ModelParams, init: GaussianInitialState,
            times: np.ndarray, count: int, seed: int,
            opts: IntegratorOptions = IntegratorOptions(),
            workers: int = 1) -> EnsembleResult:
    """Ensemble average of j (double well) or n_1 (triple well).

    Escaped trajectories stay in the average frozen at their escape
    value (unbiased weighting of the sampled measure); their fraction is
    reported and the result is flagged above 5 percent.
    """
    system, par = _system_of(params, opts.ordering_correction)
    d = dof_of(params)
    times = np.ascontiguousarray(times, float)
    samples = sample_wigner(init, count, seed)
    # observable column in the plain state layout (q..., p...):
    # double well j = p, triple well n_1 = p_1
    obs_col = d
    tasks = [_TwaChunkTask(system, par, samples[lo:hi], times,
                           opts.rtol, opts.atol, obs_col)
             for lo, hi in _ensemble.chunk_ranges(count)]
    acc_s = np.zeros(len(times))
    acc_s2 = np.zeros(len(times))
    acc_alive = np.zeros(len(times), dtype=np.int64)
    escaped = failed = 0
    for s, s2, al, esc, fl in _ensemble.map_ordered(_twa_chunk, tasks, workers):
        acc_s += s
        acc_s2 += s2
        acc_alive += al
        escaped += esc
        failed += fl
    mean = acc_s / count
    if count > 1:
        var = np.maximum(acc_s2 - acc_s ** 2 / count, 0.0) / (count - 1)
        stderr = np.sqrt(var / count)
    else:
        stderr = np.zeros(len(times))
    frac = (escaped + failed) / count
    return EnsembleResult(
        times=times, mean_observable=mean, sample_count=count,
        escaped_fraction=frac, rng_seed=seed, stderr=stderr,
        alive_count=acc_alive, flagged=frac > 0.05)


def run_mean_field(params: ModelParams, init: GaussianInitialState,
                   times: np.ndarray,
                   opts: IntegratorOptions = IntegratorOptions()
                   ) -> EnsembleResult:
    """Single classical trajectory from the distribution center (the
    degenerate count=1 ensemble pinned at the mean field)."""
    system, par = _system_of(params, opts.ordering_correction)
    d = dof_of(params)
    times = np.ascontiguousarray(times, float)
    z0 = np.concatenate([init.center.q, init.center.p])[None, :]
    out, status, n_valid = kernels.integrate_batch(
        system, par, z0, times, opts.rtol, opts.atol, False)
    frac = float(status[0] != kernels.STATUS_OK)
    return EnsembleResult(
        times=times, mean_observable=out[0, :, d].copy(), sample_count=1,
        escaped_fraction=frac, rng_seed=0,
        stderr=np.zeros(len(times)),
        alive_count=(np.arange(len(times)) < n_valid[0]).astype(np.int64),
        flagged=frac > 0)
