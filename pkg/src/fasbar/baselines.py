"""Comparison estimators that use no port-domain prior.

Two conventional references for the planned Bayesian scheme:

* equally spaced measure-and-hold ("selmmse"): measure P*M evenly spread
  ports and copy each measurement to its nearest neighbors;
* sparse plane-wave recovery ("fas-omp"): measure P*M random ports and run
  orthogonal matching pursuit against an oversampled steering dictionary,
  then expand the recovered atoms to all ports.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .channels import EXTERNAL, ChannelRealization, steering_matrix


class RankDeficientFitWarning(RuntimeWarning):
    """Raised when matching pursuit selects nearly collinear atoms."""


@dataclass(frozen=True)
class SteeringDictionary:
    """Plane-wave atoms on a uniform sin-angle grid.

    ``matrix`` is (N, G) with unit-modulus entries, so every column has
    norm sqrt(N); ``grid`` holds the G sin values in [-1, 1].
    """

    matrix: np.ndarray
    grid: np.ndarray


def build_steering_dictionary(geom, oversampling=4):
    """G = oversampling * N plane-wave atoms spanning sin(theta) in [-1, 1]."""
    if oversampling < 1:
        raise ValueError("oversampling must be at least 1")
    g = int(oversampling) * geom.num_ports
    grid = np.linspace(-1.0, 1.0, g)
    return SteeringDictionary(steering_matrix(geom, grid), grid)


def selmmse_ports(num_ports, num_measurements):
    """Centers of num_measurements equal slices of the port range.

    Port k (1-based) is round((k - 1/2) * N / PM) with half-up rounding,
    which lands on every port when PM = N.  Returned 0-based, strictly
    increasing.
    """
    n, pm = int(num_ports), int(num_measurements)
    if pm < 1:
        raise ValueError("num_measurements must be positive")
    if pm > n:
        raise ValueError("cannot measure more ports than exist")
    k = np.arange(1, pm + 1)
    ports_1based = np.floor((k - 0.5) * n / pm + 0.5).astype(int)
    ports_1based = np.clip(ports_1based, 1, n)
    ports = ports_1based - 1
    if np.unique(ports).size != ports.size:
        raise ValueError("rounded measurement ports collide")
    return ports


def estimate_selmmse(y, ports, num_ports):
    """Hold each measurement across the ports nearest to it.

    Every port copies the measurement of its closest measured port,
    ties going to the lower port index; measured ports keep their own
    measurement exactly.
    """
    y = np.asarray(getattr(y, "values", y))
    ports = np.asarray(ports, dtype=int)
    if y.size != ports.size:
        raise ValueError("one measurement per port is required")
    if ports.size == 0:
        raise ValueError("at least one measurement is required")
    srt = np.argsort(ports, kind="stable")
    ports_sorted, y_sorted = ports[srt], y[srt]
    dist = np.abs(np.arange(int(num_ports))[:, None] - ports_sorted[None, :])
    nearest = np.argmin(dist, axis=1)  # argmin takes the first, hence lower, port on ties
    return ChannelRealization(y_sorted[nearest], EXTERNAL)


def random_ports(num_ports, num_measurements, rng_seed):
    """Distinct uniformly random measurement ports, 0-based sorted."""
    n, pm = int(num_ports), int(num_measurements)
    if pm < 1 or pm > n:
        raise ValueError("need 1 <= num_measurements <= num_ports")
    rng = np.random.default_rng(rng_seed)
    return np.sort(rng.choice(n, size=pm, replace=False))


def omp_solve(measured_atoms, y, max_atoms, residual_tol):
    """Orthogonal matching pursuit on an explicit measurement matrix.

    Greedily picks the atom most correlated with the residual, refits all
    picked atoms by least squares, and stops when max_atoms are used or the
    residual drops below residual_tol * ||y||.  A rank-deficient refit stops
    the pursuit early with a RankDeficientFitWarning, keeping the last
    full-rank fit.

    Returns
    -------
    (coeffs, support, residual_norms)
        Least-squares coefficients per support atom, the picked column
        indices in order, and ||residual|| after 0, 1, ... picks.
    """
    a = np.asarray(measured_atoms)
    y = np.asarray(y)
    if a.shape[0] != y.size:
        raise ValueError("measurement matrix rows must match observation length")
    if max_atoms < 1:
        raise ValueError("max_atoms must be positive")
    if residual_tol < 0.0:
        raise ValueError("residual_tol must be nonnegative")
    norm_y = float(np.linalg.norm(y))
    support: list = []
    coeffs = np.zeros(0, dtype=complex)
    residual = y.astype(complex)
    norms = [norm_y]
    if norm_y == 0.0:
        return coeffs, support, norms
    for _ in range(int(max_atoms)):
        if norms[-1] <= residual_tol * norm_y:
            break
        corr = np.abs(a.conj().T @ residual)
        corr[support] = -1.0  # an atom is never picked twice
        pick = int(np.argmax(corr))
        trial = support + [pick]
        sol, _, rank, _ = np.linalg.lstsq(a[:, trial], y, rcond=None)
        if rank < len(trial):
            warnings.warn(
                "matching pursuit hit a rank-deficient refit; stopping early",
                RankDeficientFitWarning,
                stacklevel=2,
            )
            break
        support, coeffs = trial, sol
        residual = y - a[:, support] @ coeffs
        norms.append(float(np.linalg.norm(residual)))
    return coeffs, support, norms


def estimate_fas_omp(y, ports, dictionary, max_atoms=9, residual_tol=1e-3):
    """Sparse recovery of the full channel from random-port measurements.

    Runs OMP on the dictionary rows at the measured ports, then expands the
    recovered atom coefficients through the full dictionary.

    Parameters
    ----------
    y : array or PilotObservation
        Measurements at ``ports``.
    ports : array of int
        Measured 0-based port indices, distinct.
    dictionary : SteeringDictionary
        Full-aperture atoms to search over.
    max_atoms : int
        Sparsity cap (number of pursuit iterations).
    residual_tol : float
        Relative residual at which the pursuit stops early.
    """
    y = np.asarray(getattr(y, "values", y))
    ports = np.asarray(ports, dtype=int)
    if y.size != ports.size:
        raise ValueError("one measurement per port is required")
    coeffs, support, _ = omp_solve(dictionary.matrix[ports, :], y, max_atoms, residual_tol)
    estimate = np.zeros(dictionary.matrix.shape[0], dtype=complex)
    if support:
        estimate = dictionary.matrix[:, support] @ coeffs
    return ChannelRealization(estimate, EXTERNAL)
