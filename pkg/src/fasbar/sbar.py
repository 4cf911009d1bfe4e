"""Two-stage Bayesian port sampling and linear channel reconstruction.

Treat the per-port channel vector h as a zero-mean Gaussian process with
prior covariance Sigma and measurements y = h(Omega) + z, z ~ CN(0, s2*I).
Everything expensive then happens before any pilot is received:

Stage 1 (offline).  Greedily pick the port with the largest posterior
variance, fold the hypothetical measurement into the posterior covariance
with a rank-one Schur update, and repeat until P timeslots of M ports each
are scheduled.  The selected order is frozen into switch matrices and the
MAP weight matrix

    w = (Sigma(Omega, Omega) + s2*I)^{-1} Sigma(Omega, :)

is precomputed, since the posterior mean depends on the data only linearly.

Stage 2 (online).  Reconstruct hhat = w^H y.  One matrix-vector product,
O(N) per measurement; no kernel, no factorization.

Port indices are 0-based everywhere in memory; file formats are 1-based
(see fileio).
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve

#: posterior-variance-plus-noise denominators below this times trace/N
#: indicate a collapsed prior; raising the kernel jitter is the fix
_DENOM_FLOOR_SCALE = 1e-14

#: acceptable max-norm residual of the weight solve, relative to max|Sigma|
_WEIGHT_RESIDUAL_TOL = 1e-8


@dataclass(frozen=True)
class PosteriorState:
    """Gaussian posterior over all ports after some measurements.

    Attributes
    ----------
    measured : tuple of int
        Ports folded in so far, in selection order.
    post_cov : np.ndarray
        Posterior covariance, Hermitian as stored, shape (N, N).
    noise_power : float
        Per-measurement noise variance s2 assumed by the updates.
    prior_fingerprint : str
        Fingerprint of the kernel the recursion started from.
    """

    measured: tuple
    post_cov: np.ndarray
    noise_power: float
    prior_fingerprint: str

    @property
    def variances(self) -> np.ndarray:
        """Real posterior variance of every port."""
        return self.post_cov.diagonal().real


@dataclass(frozen=True)
class SwitchMatrix:
    """Which M ports one timeslot connects, in RF-chain order.

    As a binary M x N matrix S it has exactly one 1 per row and at most one
    per column, so S @ S^H is the M x M identity.
    """

    ports: tuple
    num_ports: int

    def __post_init__(self):
        if len(set(self.ports)) != len(self.ports):
            raise ValueError("switch matrix ports must be distinct")
        if any(p < 0 or p >= self.num_ports for p in self.ports):
            raise ValueError("switch matrix port index out of range")

    def as_matrix(self) -> np.ndarray:
        """Dense 0/1 integer matrix, shape (M, num_ports)."""
        mat = np.zeros((len(self.ports), self.num_ports), dtype=np.int64)
        mat[np.arange(len(self.ports)), list(self.ports)] = 1
        return mat


@dataclass(frozen=True)
class SamplingPlan:
    """Everything the online stage needs, frozen at design time.

    Attributes
    ----------
    num_ports, num_timeslots, antennas_per_slot : int
        Dimensions N, P, M with P*M <= N.
    order : tuple of int
        All P*M measured ports in selection order (0-based, distinct).
    switch_matrices : tuple of SwitchMatrix
        Per-slot hardware settings; concatenating their ports gives order.
    weights : np.ndarray
        Precomputed MAP weights, shape (P*M, N) complex.
    noise_power_design : float
        s2 the weights were solved with; observations must match it.
    kernel_fingerprint : str
        Fingerprint of the prior covariance used at design time.
    post_diag : np.ndarray
        Design-time posterior variance of every port after all P*M
        measurements, shape (N,) real.
    """

    num_ports: int
    num_timeslots: int
    antennas_per_slot: int
    order: tuple
    switch_matrices: tuple
    weights: np.ndarray
    noise_power_design: float
    kernel_fingerprint: str
    post_diag: np.ndarray

    @property
    def num_measurements(self) -> int:
        return self.num_timeslots * self.antennas_per_slot

    @property
    def plan_id(self) -> str:
        """Content fingerprint used to bind observations to this plan."""
        head = "|".join(
            [
                str(self.num_ports),
                str(self.num_timeslots),
                str(self.antennas_per_slot),
                repr(self.noise_power_design),
                self.kernel_fingerprint,
                ",".join(str(p) for p in self.order),
            ]
        )
        return hashlib.sha256(head.encode()).hexdigest()


@dataclass(frozen=True)
class Reconstruction:
    """Estimate of the full channel plus design-time uncertainty.

    ``confidence_lo``/``confidence_hi`` shift both the real and imaginary
    parts of the estimate by three posterior variances, giving a per-part
    band [Re(est) -+ 3*var] and [Im(est) -+ 3*var].
    """

    estimate: np.ndarray
    post_variance: np.ndarray
    confidence_lo: np.ndarray
    confidence_hi: np.ndarray


def initial_posterior(kernel, noise_power):
    """Posterior before any measurement: the prior itself."""
    if noise_power < 0.0:
        raise ValueError("noise_power must be nonnegative")
    cov = np.array(kernel.matrix, dtype=complex)
    return PosteriorState((), cov, float(noise_power), kernel.fingerprint)


def posterior_update_one(state, port):
    """Fold one measured port into the posterior covariance.

    A single measurement at port n with noise s2 changes the covariance by
    the rank-one Schur complement

        Sigma' = Sigma - Sigma(:, n) Sigma(n, :) / (Sigma(n, n) + s2),

    independent of the measured value.  Returns a new state; the input is
    untouched.
    """
    n = int(port)
    cov = state.post_cov
    if n < 0 or n >= cov.shape[0]:
        raise ValueError("port index out of range")
    if n in state.measured:
        raise ValueError(f"port {n} was already measured")
    variance = cov[n, n].real
    denom = variance + state.noise_power
    floor = _DENOM_FLOOR_SCALE * float(np.trace(cov).real) / cov.shape[0]
    if denom <= max(floor, 0.0):
        raise np.linalg.LinAlgError(
            "posterior variance plus noise is numerically zero; increase the kernel jitter"
        )
    col = cov[:, n]
    new_cov = cov - np.outer(col, col.conj()) / denom
    new_cov = 0.5 * (new_cov + new_cov.conj().T)
    return PosteriorState(state.measured + (n,), new_cov, state.noise_power, state.prior_fingerprint)


def compute_weights(kernel, order, noise_power):
    """Solve (Sigma(Omega, Omega) + s2*I) w = Sigma(Omega, :) for the weights.

    Solved via Cholesky factorization of the Hermitian system, never by
    forming an inverse.  Raises numpy.linalg.LinAlgError if the system is
    not positive definite or the solve residual is out of tolerance.
    """
    idx = np.asarray(order, dtype=int)
    if idx.size == 0:
        raise ValueError("order must contain at least one port")
    if idx.size != np.unique(idx).size:
        raise ValueError("order must not repeat ports")
    sigma = kernel.matrix
    if idx.min() < 0 or idx.max() >= sigma.shape[0]:
        raise ValueError("port index out of range")
    if noise_power < 0.0:
        raise ValueError("noise_power must be nonnegative")
    gram = sigma[np.ix_(idx, idx)] + noise_power * np.eye(idx.size)
    cross = sigma[idx, :]
    try:
        factor = cho_factor(gram, lower=True)
    except np.linalg.LinAlgError as err:
        raise np.linalg.LinAlgError(
            "measured-port covariance is not positive definite; increase jitter or noise power"
        ) from err
    # C-ordered so the online product sums identically after a save/load cycle
    weights = np.ascontiguousarray(cho_solve(factor, cross))
    residual = np.abs(gram @ weights - cross).max()
    bound = _WEIGHT_RESIDUAL_TOL * np.abs(sigma).max()
    if not residual < bound:
        raise np.linalg.LinAlgError(
            f"weight solve residual {residual:.3e} exceeds {bound:.3e}; system too ill-conditioned"
        )
    return weights


def plan_to_switch_matrices(order, num_timeslots, antennas_per_slot, num_ports):
    """Split a measurement order into per-timeslot switch matrices."""
    order = tuple(int(p) for p in order)
    p, m = int(num_timeslots), int(antennas_per_slot)
    if p < 1 or m < 1:
        raise ValueError("num_timeslots and antennas_per_slot must be positive")
    if len(order) != p * m:
        raise ValueError("order length must equal num_timeslots * antennas_per_slot")
    if len(set(order)) != len(order):
        raise ValueError("order must not repeat ports")
    return tuple(
        SwitchMatrix(order[i * m : (i + 1) * m], int(num_ports)) for i in range(p)
    )


def stacked_switch_matrix(plan):
    """All P switch matrices stacked into one (P*M, N) 0/1 matrix."""
    return np.vstack([s.as_matrix() for s in plan.switch_matrices])


def design_plan(kernel, num_timeslots, antennas_per_slot, noise_power):
    """Stage 1: pick ports greedily by posterior variance and freeze weights.

    Each of the P*M iterations measures (hypothetically) the port whose
    current posterior variance is largest, ties broken toward the smallest
    index, then shrinks the covariance with a rank-one update.  The selected
    order, per-slot switch matrices, solved weight matrix, and final
    posterior diagonal are packaged into a SamplingPlan; nothing about the
    received pilots is needed, so all of this runs offline.

    Parameters
    ----------
    kernel : Kernel
        Prior covariance over ports.
    num_timeslots : int
        P, number of pilot slots to schedule.
    antennas_per_slot : int
        M, ports measured per slot.
    noise_power : float
        Per-measurement noise variance s2 assumed online.

    Returns
    -------
    SamplingPlan
    """
    p, m = int(num_timeslots), int(antennas_per_slot)
    if p < 1 or m < 1:
        raise ValueError("num_timeslots and antennas_per_slot must be positive")
    n = kernel.num_ports
    if p * m > n:
        raise ValueError(f"plan asks for {p * m} measurements but only {n} ports exist")
    state = initial_posterior(kernel, noise_power)
    for _ in range(p * m):
        scores = state.variances.copy()
        scores[list(state.measured)] = -np.inf
        state = posterior_update_one(state, int(np.argmax(scores)))
    order = state.measured
    weights = compute_weights(kernel, order, noise_power)
    post_diag = state.variances.copy()
    post_diag.flags.writeable = False
    weights.flags.writeable = False
    return SamplingPlan(
        num_ports=n,
        num_timeslots=p,
        antennas_per_slot=m,
        order=order,
        switch_matrices=plan_to_switch_matrices(order, p, m, n),
        weights=weights,
        noise_power_design=float(noise_power),
        kernel_fingerprint=kernel.fingerprint,
        post_diag=post_diag,
    )


def reconstruct(plan, observation):
    """Stage 2: linear reconstruction hhat = w^H y from one pilot round.

    Runs in O(N) per measurement and never touches the kernel; the plan's
    stored weights are all it reads.  The observation must be bound to this
    plan and carry the noise power the plan was designed for.

    Returns
    -------
    Reconstruction
        Estimate, design-time posterior variances, and the +-3-variance
        band around the real and imaginary parts.
    """
    y = np.asarray(observation.values)
    if y.ndim != 1 or y.size != plan.num_measurements:
        raise ValueError("observation length does not match the plan")
    if observation.plan_id != plan.plan_id:
        raise ValueError("observation is bound to a different plan")
    if not np.isclose(observation.noise_power, plan.noise_power_design, rtol=1e-12, atol=0.0):
        raise ValueError(
            f"observation noise power {observation.noise_power!r} differs from "
            f"design value {plan.noise_power_design!r}"
        )
    # w^H y computed as (y^H w)^H so the weight matrix is streamed, not copied
    estimate = np.conj(y.conj() @ plan.weights)
    band = 3.0 * plan.post_diag
    shift = band * (1.0 + 1.0j)
    return Reconstruction(estimate, plan.post_diag, estimate - shift, estimate + shift)
