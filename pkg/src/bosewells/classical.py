"""Reduced classical phase-space dynamics.

Charts
------
Double well (D = 1): coordinate q is the inter-well phase difference,
momentum p = j = (n_1 - n_2)/2.  With hbar_eff = 1,

    H(q, p) = 2U p^2 - 2T sqrt((N/2)^2 - p^2) cos q + 2 delta p .

Triple well (D = 2): momenta are the well populations p = (n_1, n_2)
with n_3 = N - n_1 - n_2; the conjugate coordinates q = (q_1, q_2) are
the phases of wells 1 and 2 measured against well 3 (the unique angles
canonically conjugate to n_1 and n_2 once total number and global phase
are eliminated; see docs/classical_reduction.md).  Substituting
amplitude-phase fields into the three-well Hamiltonian and dropping
operator ordering terms (n(n-1) -> n^2, constants dropped) gives

    H(q, p) = U (n_1^2 + n_2^2 + n_3^2) + delta (n_1 - n_2)
              - 2T [ sqrt(n_1 n_2) cos(q_1 - q_2) + sqrt(n_2 n_3) cos q_2 ] .

Coordinates are stored unwrapped so action and monodromy stay smooth.

A quadratic test model H = p^2/2 + omega^2 q^2 / 2 is built in: the
semiclassical propagator is exact on it, which makes it the natural
self-check for the whole trajectory/prefactor/reconstruction chain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .model import ModelParams

#: Trajectories are declared escaped within this fraction of N from the
#: domain boundary, where dH/dp diverges.
EPS_DOM_FACTOR = 1e-6


class DomainError(ValueError):
    """Phase-space point outside the physical domain."""


@dataclass(frozen=True)
class HarmonicTestModel:
    """Quadratic Hamiltonian p^2/2 + omega^2 q^2/2 used for validation."""

    omega: float = 1.0


@dataclass(frozen=True)
class PhaseSpacePoint:
    """Canonical pair (q, p); arrays of length D (1 or 2)."""

    q: np.ndarray
    p: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "q", np.atleast_1d(np.asarray(self.q, float)))
        object.__setattr__(self, "p", np.atleast_1d(np.asarray(self.p, float)))
        if self.q.shape != self.p.shape or self.q.ndim != 1:
            raise ValueError("q and p must be 1-D arrays of equal length")

    @property
    def dof(self) -> int:
        return len(self.q)


@dataclass(frozen=True)
class IntegratorOptions:
    """Trajectory propagation options.

    Error control is an embedded RK5(4); the default tolerances keep
    the relative energy drift near 1e-9 over 50 plasma periods.

    ``ordering_correction`` propagates the Weyl symbol of the
    number-conserving Hamiltonian instead of the bare large-N limit:
    the occupation factors inside the hopping square roots gain +1/2
    (double well: radius (N+1)/2 instead of N/2).  The shift is the
    exact midpoint symbol of the hopping matrix elements and removes an
    O(1/N) frequency error that would otherwise dephase ensemble
    methods from the true dynamics well before the first revival.  The
    bare flow remains available for mean-field-limit studies.
    """

    rtol: float = 1e-12
    atol: float = 1e-12
    ordering_correction: bool = True


@dataclass
class TrajectoryRecord:
    """One trajectory with action and monodromy history.

    ``monodromy`` uses the block order [[dp/dp, dp/dq], [dq/dp, dq/dq]]
    expected by the semiclassical prefactor.  Samples past an escape are
    frozen copies of the last valid sample; ``n_valid`` counts the valid
    ones.
    """

    initial: PhaseSpacePoint
    times: np.ndarray
    q: np.ndarray
    p: np.ndarray
    action: np.ndarray
    monodromy: np.ndarray
    status: str
    n_valid: int
    prefactor_phase: np.ndarray | None = field(default=None)

    @property
    def escape_time(self) -> float | None:
        if self.status == "alive" or self.n_valid >= len(self.times):
            return None
        return float(self.times[max(self.n_valid - 1, 0)])

    def det_monodromy(self) -> np.ndarray:
        return np.linalg.det(self.monodromy)


def _system_of(model, ordering_correction: bool = False
               ) -> tuple[int, np.ndarray]:
    if isinstance(model, HarmonicTestModel):
        return kernels.SYSTEM_HARMONIC, np.array([model.omega])
    if not isinstance(model, ModelParams):
        raise TypeError(f"unsupported model {model!r}")
    shift = 0.5 if ordering_correction else 0.0
    eps = EPS_DOM_FACTOR * model.n_total
    if model.modes == 2:
        radius = 0.5 * model.n_total + shift
        par = np.array([model.interaction, model.tunneling, radius,
                        model.tilt, eps])
        return kernels.SYSTEM_DOUBLE_WELL, par
    par = np.array([model.interaction, model.tunneling, float(model.n_total),
                    model.tilt, eps, shift])
    return kernels.SYSTEM_TRIPLE_WELL, par


def dof_of(model) -> int:
    return kernels.system_dof(_system_of(model)[0])


def _check_domain(model, z: PhaseSpacePoint, strict: bool) -> None:
    if isinstance(model, HarmonicTestModel):
        return
    eps = EPS_DOM_FACTOR * model.n_total if strict else 0.0
    if model.modes == 2:
        if abs(z.p[0]) > 0.5 * model.n_total - eps:
            raise DomainError(f"|j|={abs(z.p[0])} exceeds N/2 - eps")
    else:
        n3 = model.n_total - z.p[0] - z.p[1]
        if z.p[0] < eps or z.p[1] < eps or n3 < eps:
            raise DomainError(f"occupations ({z.p[0]}, {z.p[1]}, {n3}) "
                              "leave the physical simplex")


def hamiltonian_value(model, z: PhaseSpacePoint,
                      ordering_correction: bool = False) -> float:
    """Classical Hamilton function at z (constant terms dropped).

    The default is the bare large-N limit; pass
    ``ordering_correction=True`` for the Weyl-symbol variant the
    ensemble propagation uses (see IntegratorOptions).
    """
    _check_domain(model, z, strict=False)
    system, par = _system_of(model, ordering_correction)
    hval, _, _, _, _, _ = kernels._pure._derivs(system, par, z.q, z.p, False)
    return float(hval)


def eom_rhs(model, z: PhaseSpacePoint,
            ordering_correction: bool = False
            ) -> tuple[np.ndarray, np.ndarray]:
    """(dq/dt, dp/dt) = (dH/dp, -dH/dq) at z; requires strict interior."""
    _check_domain(model, z, strict=True)
    system, par = _system_of(model, ordering_correction)
    d = kernels.system_dof(system)
    y = np.concatenate([z.q, z.p])
    dydt = [0.0] * (2 * d)
    ok = kernels._pure._rhs(system, par, y, dydt, d, False)
    if not ok:
        raise DomainError("point left the domain")
    return np.array(dydt[:d]), np.array(dydt[d:2 * d])


def hessian(model, z: PhaseSpacePoint,
            ordering_correction: bool = False) -> np.ndarray:
    """Symmetric 2D x 2D matrix of second derivatives, (q..., p...) order."""
    _check_domain(model, z, strict=True)
    system, par = _system_of(model, ordering_correction)
    d = kernels.system_dof(system)
    _, _, _, hqq, hqp, hpp = kernels._pure._derivs(system, par, z.q, z.p, True)
    h = np.zeros((2 * d, 2 * d))
    h[:d, :d] = np.reshape(hqq, (d, d))
    h[:d, d:] = np.reshape(hqp, (d, d))
    h[d:, :d] = np.reshape(hqp, (d, d)).T
    h[d:, d:] = np.reshape(hpp, (d, d))
    return h


def energy_series(model, q: np.ndarray, p: np.ndarray,
                  ordering_correction: bool = False) -> np.ndarray:
    """H along a sampled trajectory; q, p of shape (nt, D).

    Use the same ``ordering_correction`` that generated the flow when
    checking conservation.
    """
    system, par = _system_of(model, ordering_correction)
    vals = np.empty(len(q))
    for k in range(len(q)):
        vals[k] = kernels._pure._derivs(system, par, q[k], p[k], False)[0]
    return vals


def separatrix_energy(model: ModelParams) -> float:
    """Classical energy of the hyperbolic point separating plasma
    oscillations from self-trapping (double well: H at q = pi, p = 0)."""
    if model.modes != 2:
        raise ValueError("separatrix energy is defined for the double well")
    return model.tunneling * model.n_total


def separatrix_imbalance(model: ModelParams) -> float:
    """Imbalance at which the q = 0 axis crosses the separatrix,
    (T/U) sqrt(Lambda - 1); defined for Lambda > 1."""
    if model.modes != 2 or model.lam <= 1.0:
        raise ValueError("requires a double well with Lambda > 1")
    return (model.tunneling / model.interaction) * math.sqrt(model.lam - 1.0)


def integrate_ensemble(model, z0: np.ndarray, times: np.ndarray,
                       with_stability: bool = True,
                       opts: IntegratorOptions = IntegratorOptions(),
                       gamma: np.ndarray | None = None):
    """Batched integration; z0 has shape (n, 2D) as (q..., p...).

    Returns (out, status, n_valid) straight from the kernel: out is
    (n, nt, dim) with dim = 2D (plain) or 2D + 1 + 4D^2 + 1 (stability;
    the trailing column is the unwrapped prefactor-determinant phase
    for the given ``gamma``, ones by default).
    """
    system, par = _system_of(model, opts.ordering_correction)
    z0 = np.ascontiguousarray(np.atleast_2d(z0), dtype=float)
    times = np.ascontiguousarray(times, dtype=float)
    if len(times) < 1 or (len(times) > 1 and np.any(np.diff(times) <= 0)):
        raise ValueError("times must be strictly ascending")
    return kernels.integrate_batch(system, par, z0, times,
                                   opts.rtol, opts.atol, with_stability,
                                   gamma)


def integrate_trajectory(model, z0: PhaseSpacePoint, times: np.ndarray,
                         opts: IntegratorOptions = IntegratorOptions(),
                         gamma: np.ndarray | None = None) -> TrajectoryRecord:
    """Integrate one trajectory with action and monodromy.

    When ``gamma`` (per-dof widths) is given, the unwrapped phase of the
    semiclassical prefactor determinant is recorded as well.
    """
    d = z0.dof
    if d != dof_of(model):
        raise ValueError(f"z0 has {d} dofs, model needs {dof_of(model)}")
    y0 = np.concatenate([z0.q, z0.p])[None, :]
    out, status, n_valid = integrate_ensemble(model, y0, times, True, opts,
                                              gamma)
    rec = _record_from_raw(z0, times, out[0], int(status[0]),
                           int(n_valid[0]), d)
    rec.prefactor_phase = out[0, :, -1].copy()
    return rec


def monodromy_blocks(raw: np.ndarray, d: int) -> dict[str, np.ndarray]:
    """Split kernel output (n, nt, dim) into monodromy blocks (n, nt, d, d)."""
    o = 2 * d + 1
    d2 = d * d
    shape = raw.shape[:2] + (d, d)
    return {
        "qq": raw[:, :, o:o + d2].reshape(shape),
        "qp": raw[:, :, o + d2:o + 2 * d2].reshape(shape),
        "pq": raw[:, :, o + 2 * d2:o + 3 * d2].reshape(shape),
        "pp": raw[:, :, o + 3 * d2:o + 4 * d2].reshape(shape),
    }


def _record_from_raw(z0, times, raw, status, n_valid, d) -> TrajectoryRecord:
    blocks = monodromy_blocks(raw[None, :, :], d)
    nt = len(times)
    mono = np.zeros((nt, 2 * d, 2 * d))
    mono[:, :d, :d] = blocks["pp"][0]
    mono[:, :d, d:] = blocks["pq"][0]
    mono[:, d:, :d] = blocks["qp"][0]
    mono[:, d:, d:] = blocks["qq"][0]
    names = {kernels.STATUS_OK: "alive", kernels.STATUS_ESCAPED: "escaped",
             kernels.STATUS_STEPFAIL: "failed",
             kernels.STATUS_BRANCH: "escaped"}
    return TrajectoryRecord(
        initial=z0, times=np.asarray(times, float),
        q=raw[:, :d].copy(), p=raw[:, d:2 * d].copy(),
        action=raw[:, 2 * d].copy(), monodromy=mono,
        status=names[status], n_valid=n_valid)
