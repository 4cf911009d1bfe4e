"""Port geometry, clustered channel synthesis, and pilot observation.

A fluid antenna exposes N candidate positions ("ports") spread uniformly
over a linear aperture of W wavelengths; at each pilot timeslot a switch
network connects M of them to the RF chains.  This module owns everything
physical: where the ports sit, how a multipath channel across them is
generated, and how noisy pilot measurements at a subset of ports are taken.

The synthetic channel is a clustered sum of plane waves,

    h(n) = (1 / sqrt(C*R)) * sum_{c,r} g_{c,r} * exp(-j*2*pi*x_n*sin(theta_{c,r})/lambda),

with i.i.d. CN(0, 1) ray gains g, so that E||h||^2 = N regardless of the
number of clusters C or rays per cluster R.
"""

from __future__ import annotations

import numpy as np
from dataclasses import dataclass

SPEED_OF_LIGHT = 299_792_458.0  # m/s

#: model_tag value for channels produced by ``generate_ssc_channel``.
SSC = "ssc"
#: model_tag value for channels supplied from outside the simulator.
EXTERNAL = "external"


@dataclass(frozen=True)
class PortGeometry:
    """Uniform linear layout of candidate antenna ports.

    Attributes
    ----------
    num_ports : int
        Number of candidate positions N (at least 2).
    aperture_wavelengths : float
        Aperture length W expressed in carrier wavelengths.
    wavelength : float
        Carrier wavelength in meters.
    positions : np.ndarray
        Port coordinates in meters, shape (N,), positions[0] == 0 and
        positions[-1] == W * wavelength.
    """

    num_ports: int
    aperture_wavelengths: float
    wavelength: float
    positions: np.ndarray

    @property
    def aperture_m(self) -> float:
        """Aperture length in meters."""
        return self.aperture_wavelengths * self.wavelength

    @property
    def spacing(self) -> float:
        """Distance between adjacent ports in meters."""
        return self.aperture_m / (self.num_ports - 1)


@dataclass(frozen=True)
class SscModelParams:
    """Parameters of the clustered plane-wave channel generator.

    Cluster centers are drawn uniformly on (-60, 60) degrees; each of the
    R rays of a cluster is offset uniformly within +-angle_spread_deg of
    its center.  Ray gains are i.i.d. circularly symmetric unit-variance
    complex Gaussians.
    """

    num_clusters: int = 9
    rays_per_cluster: int = 100
    angle_spread_deg: float = 5.0
    rng_seed: int = 0

    def __post_init__(self):
        if self.num_clusters < 1:
            raise ValueError("num_clusters must be at least 1")
        if self.rays_per_cluster < 1:
            raise ValueError("rays_per_cluster must be at least 1")
        if not 0.0 <= self.angle_spread_deg < 90.0:
            raise ValueError("angle_spread_deg must lie in [0, 90)")


@dataclass(frozen=True)
class ChannelRealization:
    """Complex channel values at every port, plus where they came from."""

    values: np.ndarray
    model_tag: str = EXTERNAL


@dataclass(frozen=True)
class PilotObservation:
    """Noisy measurements taken through a sampling plan.

    ``plan_id`` binds the observation to the plan whose port order produced
    it; reconstruction refuses observations bound to a different plan.
    """

    values: np.ndarray
    noise_power: float
    plan_id: str = ""


def build_port_geometry(num_ports, aperture_in_wavelengths, carrier_hz):
    """Lay out ``num_ports`` ports uniformly over a linear aperture.

    Parameters
    ----------
    num_ports : int
        Number of ports N >= 2.
    aperture_in_wavelengths : float
        Aperture length in carrier wavelengths, > 0.
    carrier_hz : float
        Carrier frequency in Hz, > 0.

    Returns
    -------
    PortGeometry
        Geometry with positions x_n = (n-1) * W/(N-1) * lambda for
        n = 1..N (0-based internally).
    """
    num_ports = int(num_ports)
    if num_ports < 2:
        raise ValueError("num_ports must be at least 2")
    if aperture_in_wavelengths <= 0.0:
        raise ValueError("aperture_in_wavelengths must be positive")
    if carrier_hz <= 0.0:
        raise ValueError("carrier_hz must be positive")
    wavelength = SPEED_OF_LIGHT / float(carrier_hz)
    width = float(aperture_in_wavelengths) * wavelength
    positions = np.linspace(0.0, width, num_ports)
    return PortGeometry(num_ports, float(aperture_in_wavelengths), wavelength, positions)


def steering_matrix(geom, sin_angles):
    """Plane-wave phase response of every port for each direction.

    Entry (n, k) is exp(-j * 2*pi * x_n * s_k / lambda) for s_k the k-th
    value of ``sin_angles``.  Entries have unit modulus; columns therefore
    have Euclidean norm sqrt(N).
    """
    s = np.atleast_1d(np.asarray(sin_angles, dtype=float))
    phase = (-2.0j * np.pi / geom.wavelength) * np.outer(geom.positions, s)
    return np.exp(phase)


def ssc_channel_from_rays(geom, ray_angles_rad, ray_gains):
    """Assemble a channel from explicit ray angles and gains.

    This is the deterministic core of ``generate_ssc_channel``, exposed so
    that degenerate cases (a single broadside ray, forced gains) can be
    constructed directly.  With K rays,

        h = steering(sin(angles)) @ gains / sqrt(K),

    so a single ray with gain 1 and angle 0 yields the all-ones vector and
    ||h||^2 = N exactly.
    """
    angles = np.atleast_1d(np.asarray(ray_angles_rad, dtype=float))
    gains = np.atleast_1d(np.asarray(ray_gains, dtype=complex))
    if angles.shape != gains.shape:
        raise ValueError("ray_angles_rad and ray_gains must have matching shapes")
    if angles.size == 0:
        raise ValueError("at least one ray is required")
    response = steering_matrix(geom, np.sin(angles))
    values = response @ gains / np.sqrt(angles.size)
    return ChannelRealization(values, SSC)


def generate_ssc_channel(geom, params):
    """Draw one clustered plane-wave channel realization.

    Cluster centers, per-ray angle offsets, and complex ray gains are drawn
    from ``np.random.default_rng(params.rng_seed)`` in that fixed order, so
    a seed pins the realization bit for bit.

    Returns
    -------
    ChannelRealization
        Values at all ports, tagged as model-generated.
    """
    rng = np.random.default_rng(params.rng_seed)
    c, r = params.num_clusters, params.rays_per_cluster
    centers = rng.uniform(-60.0, 60.0, size=c)
    offsets = rng.uniform(-params.angle_spread_deg, params.angle_spread_deg, size=(c, r))
    angles_deg = centers[:, None] + offsets
    gains = (rng.standard_normal((c, r)) + 1j * rng.standard_normal((c, r))) / np.sqrt(2.0)
    return ssc_channel_from_rays(geom, np.deg2rad(angles_deg).ravel(), gains.ravel())


def noise_power_for_snr(h_ensemble_power, snr_db):
    """Noise power sigma^2 such that h_ensemble_power / sigma^2 hits the SNR.

    The receiver SNR convention is E||h||^2 / sigma^2, so for the clustered
    model pass h_ensemble_power = N.  snr_db may be float('inf') for the
    noiseless limit.
    """
    if h_ensemble_power <= 0.0:
        raise ValueError("h_ensemble_power must be positive")
    return float(h_ensemble_power) / 10.0 ** (float(snr_db) / 10.0)


def draw_port_noise(num_ports, noise_power, rng_seed):
    """One CN(0, noise_power) draw per port.

    Seeding noise per port rather than per measurement lets schemes that
    measure different port subsets of the same channel see identical noise
    on any port they share.
    """
    if noise_power < 0.0:
        raise ValueError("noise_power must be nonnegative")
    rng = np.random.default_rng(rng_seed)
    scale = np.sqrt(noise_power / 2.0)
    return scale * (rng.standard_normal(num_ports) + 1j * rng.standard_normal(num_ports))


def observe_ports(h_values, ports, noise_power, rng_seed):
    """Measure the channel at the given ports with additive noise.

    Returns y with y[k] = h[ports[k]] + z[ports[k]] where z is the per-port
    noise vector from ``draw_port_noise``.
    """
    h_values = np.asarray(h_values)
    ports = np.asarray(ports, dtype=int)
    if ports.size and (ports.min() < 0 or ports.max() >= h_values.size):
        raise ValueError("port index out of range")
    if ports.size != np.unique(ports).size:
        raise ValueError("ports must be distinct")
    noise = draw_port_noise(h_values.size, noise_power, rng_seed)
    return h_values[ports] + noise[ports]


def observe_pilots(channel, plan, noise_power, rng_seed):
    """Take the pilot measurements a sampling plan asks for.

    Parameters
    ----------
    channel : ChannelRealization
        True channel across all ports.
    plan : SamplingPlan
        Plan whose ``order`` lists the measured ports slot by slot.
    noise_power : float
        Per-measurement noise variance sigma^2 (0 allowed).
    rng_seed : int
        Seed for the per-port noise draw.

    Returns
    -------
    PilotObservation
        y(k) = h(order[k]) + z_k, bound to ``plan.plan_id``.
    """
    values = np.asarray(channel.values)
    if values.size != plan.num_ports:
        raise ValueError("channel length does not match the plan's port count")
    y = observe_ports(values, np.asarray(plan.order, dtype=int), noise_power, rng_seed)
    return PilotObservation(y, float(noise_power), plan.plan_id)
