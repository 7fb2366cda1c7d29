"""Semiclassical frozen-Gaussian (Herman-Kluk) propagator.

The propagated state is reconstructed on the number grid as

    psi(x, t) = (1/n) sum_i  <x|z_i(t)>  R_i(t)  e^{i S_i(t)}  w_i

over trajectories with initial conditions z_i importance-sampled from
the coherent-state overlap with the initial Gaussian; w_i is the
overlap divided by (2 pi)^D times the sampling density, which makes the
sum an unbiased estimate of the phase-space integral.  R is the
stability prefactor, a square root whose branch is tracked continuously
along each trajectory.

Number-grid projection of a frozen Gaussian (per degree of freedom,
hbar_eff = 1):

    <x|z> = (pi gamma)^(-1/4) exp( -(x - p_z)^2 / (2 gamma) - i q_z x )

This convention makes the analytic coherent-state overlap equal the
grid sum  sum_x <z_a|x><x|z_b>  up to grid truncation, which is
asserted in the test suite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _ensemble, kernels
from .classical import (IntegratorOptions, PhaseSpacePoint, _system_of,
                        dof_of, monodromy_blocks)
from .model import ModelParams
from .twa import HBAR_EFF, EnsembleResult, GaussianInitialState


class BranchAmbiguityError(RuntimeError):
    """Prefactor phase moved by >= pi between output samples; the output
    grid is too coarse to track the square-root branch."""


class NormCollapseError(RuntimeError):
    """Raw norm of the reconstructed state fell below 1e-3."""


@dataclass(frozen=True)
class HKConfig:
    """Sampling and filtering knobs of the semiclassical run.

    ``proposal_widening`` scales the variances of the Gaussian proposal
    relative to |<z|z_0>|^2 (which has variances 1/gamma in q and gamma
    in p).  The estimator divides by the proposal density, so it is
    unbiased for any value; the default 2 samples from |<z|z_0>|, whose
    importance weights have constant magnitude and therefore finite
    variance, giving the t = 0 identity a safe margin at 10^4 samples.
    Set it to 1 for the plain squared-overlap proposal.
    """

    sample_count: int
    seed: int
    gamma: np.ndarray | None = None   # propagator width; default: initial state's
    prefactor_cutoff: float = 10.0
    renormalize: bool = True
    workers: int = 1
    proposal_widening: float = 2.0

    def __post_init__(self):
        if self.sample_count < 1:
            raise ValueError("sample_count must be >= 1")
        if not self.prefactor_cutoff > 1:
            raise ValueError("prefactor_cutoff must exceed 1")
        if not self.proposal_widening > 0:
            raise ValueError("proposal_widening must be positive")
        if self.gamma is not None:
            g = np.atleast_1d(np.asarray(self.gamma, float))
            if np.any(g <= 0):
                raise ValueError("gamma must be positive")
            object.__setattr__(self, "gamma", g)


@dataclass
class SemiclassicalWavefunction:
    """Reconstructed amplitudes over the number grid per output time.

    For one degree of freedom ``psi`` has shape (nt, ng) over
    ``grids[0]``; for two, (nt, ng1, ng2) with unphysical corner
    (n_1 + n_2 > N) masked to zero.  ``psi`` is renormalized per time
    slice when requested; ``raw_norm`` always holds the pre-scaling
    norm.
    """

    times: np.ndarray
    grids: tuple[np.ndarray, ...]
    psi: np.ndarray
    raw_norm: np.ndarray
    filtered_fraction: np.ndarray
    escaped_fraction: float
    renormalized: bool

    @property
    def flagged(self) -> bool:
        return bool(np.max(self.filtered_fraction) >= 0.1)

    def probability(self) -> np.ndarray:
        prob = np.abs(self.psi) ** 2
        axes = tuple(range(1, prob.ndim))
        tot = prob.sum(axis=axes, keepdims=True)
        tot[tot == 0] = 1.0
        return prob / tot

    def mean_observable(self) -> np.ndarray:
        """<j> (one dof) or <n_1> (two dofs) from the reconstruction."""
        prob = self.probability()
        if prob.ndim == 2:
            return prob @ self.grids[0]
        return np.einsum("tij,i->t", prob, self.grids[0])


def coherent_overlap(z_a: PhaseSpacePoint, z_b: PhaseSpacePoint,
                     gamma, gamma_b=None) -> complex:
    """Analytic overlap <z_a|z_b> of frozen Gaussians.

    Equal widths by default (one gamma per degree of freedom); a second
    width turns on the general two-width formula.
    """
    g_a = np.atleast_1d(np.asarray(gamma, float))
    g_b = g_a if gamma_b is None else np.atleast_1d(np.asarray(gamma_b, float))
    val = 1.0 + 0j
    for d in range(len(g_a)):
        qa, pa, qb, pb = z_a.q[d], z_a.p[d], z_b.q[d], z_b.p[d]
        ga, gb = g_a[d], g_b[d]
        if ga == gb:
            val *= np.exp(-ga / 4 * (qa - qb) ** 2
                          + 0.5j * (qa - qb) * (pa + pb)
                          - (pa - pb) ** 2 / (4 * ga))
        else:
            beta = ga * qa + gb * qb + 1j * (pb - pa)
            val *= ((ga * gb) ** 0.25 * math.sqrt(2 / (ga + gb))
                    * np.exp(beta ** 2 / (2 * (ga + gb))
                             - ga * qa ** 2 / 2 - gb * qb ** 2 / 2
                             + 1j * (pa * qa - pb * qb)))
    return complex(val)


def _det_arg(blocks: dict[str, np.ndarray], gamma: np.ndarray) -> np.ndarray:
    """Determinant inside the prefactor, shape (n, nt) complex.

    C = (1/2) (G^-1/2 m11 G^1/2 + G^1/2 m22 G^-1/2
               - i G^1/2 m21 G^1/2 + i G^-1/2 m12 G^-1/2)
    with m11 = dp/dp, m12 = dp/dq, m21 = dq/dp, m22 = dq/dq and
    G = diag(gamma).  At t = 0 the blocks are the identity and C = 1.
    """
    m11, m12 = blocks["pp"], blocks["pq"]
    m21, m22 = blocks["qp"], blocks["qq"]
    d = m11.shape[-1]
    if d == 1:
        g = gamma[0]
        c = 0.5 * (m11[..., 0, 0] + m22[..., 0, 0]
                   - 1j * g * m21[..., 0, 0] + 1j * m12[..., 0, 0] / g)
        return c
    s = np.sqrt(gamma)
    c = np.zeros(m11.shape, dtype=complex)
    for i in range(d):
        for j in range(d):
            c[..., i, j] = 0.5 * (
                m11[..., i, j] * s[j] / s[i]
                + m22[..., i, j] * s[i] / s[j]
                - 1j * m21[..., i, j] * s[i] * s[j]
                + 1j * m12[..., i, j] / (s[i] * s[j]))
    return c[..., 0, 0] * c[..., 1, 1] - c[..., 0, 1] * c[..., 1, 0]


def prefactor_series(blocks: dict[str, np.ndarray], gamma: np.ndarray,
                     phase: np.ndarray) -> np.ndarray:
    """Prefactor R (n, nt) on the branch fixed by ``phase``.

    ``phase`` is the unwrapped determinant argument that the integrator
    tracks at every accepted step (the trailing column of its output),
    so R = sqrt(|det|) exp(i phase / 2) is continuous with R(0) = +1 by
    construction.
    """
    det = _det_arg(blocks, gamma)
    return np.sqrt(np.abs(det)) * np.exp(0.5j * phase)


def hk_prefactor(monodromy: np.ndarray, gamma,
                 previous_phase: float) -> tuple[complex, float]:
    """Single-step prefactor with explicit branch tracking.

    ``monodromy`` is the 2D x 2D matrix in block order
    [[dp/dp, dp/dq], [dq/dp, dq/dq]].  The determinant argument is
    unwrapped against ``previous_phase``; a jump of pi or more raises
    :class:`BranchAmbiguityError`.
    """
    gamma = np.atleast_1d(np.asarray(gamma, float))
    d = len(gamma)
    blocks = {"pp": monodromy[None, None, :d, :d],
              "pq": monodromy[None, None, :d, d:],
              "qp": monodromy[None, None, d:, :d],
              "qq": monodromy[None, None, d:, d:]}
    det = _det_arg(blocks, gamma)[0, 0]
    step = np.angle(det) - previous_phase
    step -= 2 * np.pi * np.round(step / (2 * np.pi))
    if abs(step) >= np.pi * (1 - 1e-9):
        raise BranchAmbiguityError(
            "prefactor phase moved by >= pi between samples; "
            "use a finer output time grid")
    phase = previous_phase + step
    return complex(np.sqrt(abs(det)) * np.exp(0.5j * phase)), float(phase)


def sample_initial_conditions(init: GaussianInitialState, config: HKConfig
                              ) -> tuple[np.ndarray, np.ndarray]:
    """Importance-sampled initial conditions and their complex weights.

    The proposal is the Gaussian |<z|z_0>|^2 (variances 1/gamma in q and
    gamma in p for matched widths, twice the Wigner ones) widened by
    ``config.proposal_widening``; returns (samples (n, 2D), weights)
    with

        w_i = <z_i|z_0> / ((2 pi)^D rho(z_i)) ,

    so that (1/n) sum_i f(z_i) w_i is an unbiased estimate of
    int dq dp / (2 pi)^D f(z) <z|z_0> for any proposal width.
    """
    d = init.dof
    gamma = init.gamma if config.gamma is None else config.gamma
    g0 = init.gamma
    rng = np.random.default_rng(config.seed)
    var_q = config.proposal_widening * (gamma + g0) / (2.0 * gamma * g0)
    var_p = config.proposal_widening * (gamma + g0) / 2.0
    q = rng.normal(init.center.q, np.sqrt(var_q), size=(config.sample_count, d))
    p = rng.normal(init.center.p, np.sqrt(var_p), size=(config.sample_count, d))
    # product-normal sampling pdf, evaluated per sample
    log_pdf = np.zeros(config.sample_count)
    for k in range(d):
        log_pdf += (-0.5 * (q[:, k] - init.center.q[k]) ** 2 / var_q[k]
                    - 0.5 * (p[:, k] - init.center.p[k]) ** 2 / var_p[k]
                    - 0.5 * math.log(2 * math.pi * var_q[k])
                    - 0.5 * math.log(2 * math.pi * var_p[k]))
    overlaps = np.array([
        coherent_overlap(PhaseSpacePoint(q[i], p[i]), init.center,
                         gamma, g0)
        for i in range(config.sample_count)])
    weights = overlaps / ((2 * math.pi) ** d * np.exp(log_pdf))
    return np.column_stack([q, p]), weights


def _grid_spec(model, init: GaussianInitialState,
               grid: tuple[float, float, int] | None):
    """(grid0, dgrid, ng) per dof and the grid value arrays."""
    if isinstance(model, ModelParams):
        n = model.n_total
        if model.modes == 2:
            specs = [(-n / 2.0, 1.0, n + 1)]
        else:
            specs = [(0.0, 1.0, n + 1), (0.0, 1.0, n + 1)]
    else:
        if grid is None:
            # cover the classical orbit of the center plus Gaussian tails
            gmax = float(np.max(init.gamma))
            amp = (math.hypot(init.center.p[0], model.omega * init.center.q[0])
                   + 8 * math.sqrt(gmax))
            ng = 257
            specs = [(-amp, 2 * amp / (ng - 1), ng)]
        else:
            specs = [grid]
    values = tuple(np.array([g0 + k * dg for k in range(ng)])
                   for (g0, dg, ng) in specs)
    return specs, values


@dataclass(frozen=True)
class _HKChunkTask:
    system: int
    par: np.ndarray
    samples: np.ndarray
    weights: np.ndarray
    times: np.ndarray
    rtol: float
    atol: float
    gamma: np.ndarray
    cutoff: float
    specs: tuple
    count_total: int
    dof: int


def _hk_chunk(task: _HKChunkTask):
    d = task.dof
    nt = len(task.times)
    out, status, n_valid = kernels.integrate_batch(
        task.system, task.par, task.samples, task.times,
        task.rtol, task.atol, True, task.gamma)
    blocks = monodromy_blocks(out, d)
    r = prefactor_series(blocks, task.gamma, out[:, :, -1])
    # forward-in-time filtering: once |R| exceeds the cutoff the
    # trajectory stops contributing
    over = np.abs(r) > task.cutoff
    first_over = np.where(over.any(axis=1), over.argmax(axis=1), nt)
    valid = np.minimum(n_valid, first_over).astype(np.int64)
    norm_a = float(np.prod([(math.pi * g) ** -0.25 for g in task.gamma]))
    coeff = (r * np.exp(1j * out[:, :, 2 * d])
             * task.weights[:, None] * (norm_a / task.count_total))
    coeff = np.ascontiguousarray(coeff, dtype=complex)
    qs = [np.ascontiguousarray(out[:, :, k]) for k in range(d)]
    ps = [np.ascontiguousarray(out[:, :, d + k]) for k in range(d)]
    if d == 1:
        g0, dg, ng = task.specs[0]
        psi = np.zeros((nt, ng), dtype=complex)
        kernels.accumulate_gaussians_1d(psi, qs[0], ps[0], coeff, valid,
                                        g0, dg, task.gamma[0])
    else:
        (g01, dg1, ng1), (g02, dg2, ng2) = task.specs
        psi = np.zeros((nt, ng1, ng2), dtype=complex)
        kernels.accumulate_gaussians_2d(psi, qs[0], qs[1], ps[0], ps[1],
                                        coeff, valid, g01, dg1,
                                        task.gamma[0], g02, dg2,
                                        task.gamma[1])
    # trajectories out of the sum at each time: filtered (by cutoff) or
    # dead (escaped/failed), counted separately
    t_idx = np.arange(nt)[None, :]
    filtered_t = (t_idx >= first_over[:, None]).sum(axis=0)
    alive_t = (t_idx < valid[:, None]).sum(axis=0)
    escaped = int(np.sum(status != kernels.STATUS_OK))
    return psi, filtered_t, alive_t, escaped


def run_hk(model, init: GaussianInitialState, times: np.ndarray,
           config: HKConfig,
           opts: IntegratorOptions = IntegratorOptions(),
           grid: tuple[float, float, int] | None = None
           ) -> tuple[SemiclassicalWavefunction, EnsembleResult]:
    """Propagate the initial Gaussian semiclassically.

    ``model`` is a ModelParams (number grid fixed by N) or a
    HarmonicTestModel (grid chosen automatically or via ``grid``).
    Returns the reconstructed wavefunction and its observable series.
    """
    system, par = _system_of(model, opts.ordering_correction)
    d = dof_of(model)
    if init.dof != d:
        raise ValueError("initial state dimensionality does not match model")
    times = np.ascontiguousarray(times, float)
    gamma = init.gamma if config.gamma is None else config.gamma
    samples, weights = sample_initial_conditions(init, config)
    specs, grid_values = _grid_spec(model, init, grid)
    tasks = [_HKChunkTask(system, par, samples[lo:hi], weights[lo:hi],
                          times, opts.rtol, opts.atol, gamma,
                          config.prefactor_cutoff, tuple(specs),
                          config.sample_count, d)
             for lo, hi in _ensemble.chunk_ranges(config.sample_count)]
    nt = len(times)
    psi = None
    filtered_t = np.zeros(nt, dtype=np.int64)
    alive_t = np.zeros(nt, dtype=np.int64)
    escaped = 0
    for psi_part, filt, alive, esc in _ensemble.map_ordered(
            _hk_chunk, tasks, config.workers):
        psi = psi_part if psi is None else psi + psi_part
        filtered_t += filt
        alive_t += alive
        escaped += esc
    if d == 2 and isinstance(model, ModelParams):
        n1 = grid_values[0][:, None]
        n2 = grid_values[1][None, :]
        psi[:, (n1 + n2) > model.n_total] = 0.0
    dvol = float(np.prod([s[1] for s in specs]))
    raw_norm = np.sqrt(np.sum(np.abs(psi) ** 2,
                              axis=tuple(range(1, psi.ndim))) * dvol)
    if np.min(raw_norm) < 1e-3:
        raise NormCollapseError(
            f"raw norm collapsed to {np.min(raw_norm):.2e}; the "
            "reconstruction is meaningless at this sampling")
    if config.renormalize:
        psi = psi / raw_norm.reshape((-1,) + (1,) * (psi.ndim - 1))
    wf = SemiclassicalWavefunction(
        times=times, grids=grid_values, psi=psi, raw_norm=raw_norm,
        filtered_fraction=filtered_t / config.sample_count,
        escaped_fraction=escaped / config.sample_count,
        renormalized=config.renormalize)
    result = EnsembleResult(
        times=times, mean_observable=wf.mean_observable(),
        sample_count=config.sample_count,
        escaped_fraction=wf.escaped_fraction, rng_seed=config.seed,
        alive_count=alive_t, flagged=wf.flagged)
    return wf, result
