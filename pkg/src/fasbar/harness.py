"""Monte-Carlo NMSE benchmarking of estimation schemes.

A sweep walks pilot budgets P and SNR points, draws one clustered channel
per trial, measures it with every configured scheme, and records the
normalized squared error.  Fairness and reproducibility rest on three
rules:

* every scheme of a trial sees the same channel and the same per-port
  noise vector, so differences are attributable to the scheme alone;
* all randomness derives from ``base_seed`` through a fixed integer mix,
  so a config reproduces its records (and its CSV) bit for bit;
* covariance training seeds live in a separate stream from evaluation
  seeds and can never collide with them.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace

import numpy as np
import yaml

from .baselines import (
    build_steering_dictionary,
    estimate_fas_omp,
    estimate_selmmse,
    random_ports,
    selmmse_ports,
)
from .channels import (
    SscModelParams,
    build_port_geometry,
    generate_ssc_channel,
    noise_power_for_snr,
    observe_ports,
)
from .channels import PilotObservation
from .kernels import BESSEL, COVARIANCE, EXPONENTIAL, kernel_bessel, kernel_covariance, kernel_exponential
from .sbar import design_plan, reconstruct

SBAR = "sbar"
SELMMSE = "selmmse"
FAS_OMP = "fas-omp"

CSV_HEADER = "scheme,kernel_kind,N,M,P,snr_db,trial,seed,nmse,wall_time_stage2_ns"

_MASK64 = (1 << 64) - 1
# disjoint purpose tags for the seed streams
_TAG_CHANNEL = 0x11
_TAG_NOISE = 0x22
_TAG_PORTS = 0x33
_TAG_TRAIN = 0x44


def _splitmix64(x):
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def derive_seed(*parts):
    """Deterministically fold integers into one 64-bit seed."""
    acc = 0
    for part in parts:
        acc = _splitmix64(acc ^ (int(part) & _MASK64))
    return acc


def _snr_key(snr_db):
    # inf marks the noiseless limit; map it clear of any finite key
    return (1 << 62) if np.isinf(snr_db) else int(round(float(snr_db) * 1e6))


@dataclass(frozen=True)
class SchemeSpec:
    """One estimation scheme entry of a sweep.

    ``method`` picks the estimator; the remaining fields only matter where
    noted.  For sbar, ``kernel`` chooses exponential/bessel/covariance and
    alpha/eta/bessel_order/train_timeslots parameterize it (eta None means
    the sqrt(1/2pi)-wavelengths default).  For fas-omp, max_atoms,
    residual_tol and dict_oversampling shape the pursuit.
    """

    method: str
    kernel: str = ""
    alpha: float = 1.0
    eta: float | None = None
    bessel_order: int = 0
    train_timeslots: int = 100
    max_atoms: int = 9
    residual_tol: float = 1e-3
    dict_oversampling: int = 4

    def __post_init__(self):
        if self.method not in (SBAR, SELMMSE, FAS_OMP):
            raise ValueError(f"unknown method {self.method!r}")
        if self.method == SBAR and self.kernel not in (EXPONENTIAL, BESSEL, COVARIANCE):
            raise ValueError(f"sbar needs a kernel kind, got {self.kernel!r}")

    @property
    def label(self) -> str:
        return self.method

    @property
    def kernel_kind(self) -> str:
        return self.kernel if self.method == SBAR else ""


@dataclass(frozen=True)
class ExperimentConfig:
    """Full description of one sweep; validated on construction."""

    num_ports: int = 256
    antennas_per_slot: int = 4
    pilot_counts: tuple = (2, 4, 6, 8, 10)
    snr_db: tuple = (20.0,)
    trials: int = 500
    carrier_hz: float = 3.5e9
    aperture_wavelengths: float = 10.0
    channel: SscModelParams = field(default_factory=SscModelParams)
    schemes: tuple = (SchemeSpec(SBAR, BESSEL), SchemeSpec(SELMMSE), SchemeSpec(FAS_OMP))
    base_seed: int = 0
    record_timing: bool = True
    training_seeds: tuple | None = None

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if not self.pilot_counts:
            raise ValueError("pilot_counts must not be empty")
        if not self.snr_db:
            raise ValueError("snr_db must not be empty")
        if not self.schemes:
            raise ValueError("at least one scheme is required")
        for p in self.pilot_counts:
            if p < 1:
                raise ValueError("pilot counts must be positive")
            if p * self.antennas_per_slot > self.num_ports:
                raise ValueError(
                    f"P={p} slots of M={self.antennas_per_slot} ports exceed N={self.num_ports}"
                )
        if self.training_seeds is not None:
            overlap = set(self.training_seeds) & set(self._evaluation_seeds())
            if overlap:
                raise ValueError(f"training seeds collide with evaluation seeds: {sorted(overlap)}")

    def _evaluation_seeds(self):
        return [
            channel_seed(self.base_seed, snr, trial)
            for snr in self.snr_db
            for trial in range(self.trials)
        ]


@dataclass(frozen=True)
class ResultRecord:
    """One (scheme, operating point, trial) outcome."""

    scheme: str
    kernel_kind: str
    num_ports: int
    antennas_per_slot: int
    num_timeslots: int
    snr_db: float
    trial: int
    seed: int
    nmse: float
    wall_time_stage2_ns: int


def channel_seed(base_seed, snr_db, trial):
    """Channel draw for one trial; shared across schemes and pilot budgets.

    Keeping the pilot count out of the stream turns the P sweep into a
    common-random-numbers comparison: every budget estimates the same
    channels under the same noise, so trend differences are systematic
    rather than draw luck.
    """
    return derive_seed(base_seed, _TAG_CHANNEL, _snr_key(snr_db), trial)


def noise_seed(base_seed, snr_db, trial):
    return derive_seed(base_seed, _TAG_NOISE, _snr_key(snr_db), trial)


def ports_seed(base_seed, num_timeslots, snr_db, trial):
    return derive_seed(base_seed, _TAG_PORTS, num_timeslots, _snr_key(snr_db), trial)


def training_seed(base_seed, index):
    return derive_seed(base_seed, _TAG_TRAIN, index)


def nmse(truth, estimate):
    """Normalized squared error ||h - hhat||^2 / ||h||^2."""
    h = np.asarray(getattr(truth, "values", truth))
    hhat = np.asarray(getattr(estimate, "values", estimate))
    if h.shape != hhat.shape:
        raise ValueError("truth and estimate must have the same shape")
    denom = float(np.linalg.norm(h) ** 2)
    if denom == 0.0:
        raise ValueError("truth has zero norm")
    return float(np.linalg.norm(h - hhat) ** 2) / denom


def train_covariance_kernel(config, train_timeslots):
    """Average an SSC training ensemble into a covariance kernel.

    Training channels use the dedicated training seed stream (or the
    config's explicit ``training_seeds``), never the evaluation stream.
    """
    t = int(train_timeslots)
    if t < 1:
        raise ValueError("train_timeslots must be at least 1")
    if config.training_seeds is not None:
        if len(config.training_seeds) < t:
            raise ValueError("not enough explicit training seeds")
        seeds = list(config.training_seeds[:t])
    else:
        seeds = [training_seed(config.base_seed, i) for i in range(t)]
    geom = build_port_geometry(config.num_ports, config.aperture_wavelengths, config.carrier_hz)
    ensemble = [
        generate_ssc_channel(geom, replace(config.channel, rng_seed=s)) for s in seeds
    ]
    return kernel_covariance(ensemble, carrier_hz=config.carrier_hz)


def _scheme_kernel(scheme, config, geom):
    if scheme.kernel == EXPONENTIAL:
        return kernel_exponential(geom, alpha=scheme.alpha, eta=scheme.eta)
    if scheme.kernel == BESSEL:
        return kernel_bessel(geom, alpha=scheme.alpha, eta=scheme.eta, order=scheme.bessel_order)
    return train_covariance_kernel(config, scheme.train_timeslots)


def run_sweep(config, use_plan_cache=True, plan_cache=None):
    """Run the configured sweep and return records in canonical order.

    Records come back sorted by (scheme position, P, snr, trial) no matter
    how the work was interleaved.  Plans are designed once per
    (kernel, P, M, noise power) and reused across trials when
    ``use_plan_cache`` is set; passing a dict as ``plan_cache`` exposes the
    designed plans to the caller.  Caching cannot change any record:
    ``design_plan`` is deterministic in its inputs.
    """
    geom = build_port_geometry(config.num_ports, config.aperture_wavelengths, config.carrier_hz)
    n, m = config.num_ports, config.antennas_per_slot
    kernels = {}
    dictionaries = {}
    for scheme in config.schemes:
        if scheme.method == SBAR and scheme not in kernels:
            kernels[scheme] = _scheme_kernel(scheme, config, geom)
        if scheme.method == FAS_OMP and scheme.dict_oversampling not in dictionaries:
            dictionaries[scheme.dict_oversampling] = build_steering_dictionary(
                geom, scheme.dict_oversampling
            )
    if plan_cache is None:
        plan_cache = {}

    def plan_for(scheme, p, noise_power):
        key = (kernels[scheme].fingerprint, p, m, noise_power)
        if not use_plan_cache:
            return design_plan(kernels[scheme], p, m, noise_power)
        if key not in plan_cache:
            plan_cache[key] = design_plan(kernels[scheme], p, m, noise_power)
        return plan_cache[key]

    scheme_pos = {scheme: i for i, scheme in enumerate(config.schemes)}
    records = []
    for p in config.pilot_counts:
        pm = p * m
        for snr in config.snr_db:
            noise_power = noise_power_for_snr(n, snr)
            for trial in range(config.trials):
                ch_seed = channel_seed(config.base_seed, snr, trial)
                nz_seed = noise_seed(config.base_seed, snr, trial)
                channel = generate_ssc_channel(geom, replace(config.channel, rng_seed=ch_seed))
                for scheme in config.schemes:
                    if scheme.method == SBAR:
                        plan = plan_for(scheme, p, noise_power)
                        y = observe_ports(channel.values, plan.order, noise_power, nz_seed)
                        obs = PilotObservation(y, noise_power, plan.plan_id)
                        tic = time.perf_counter_ns()
                        estimate = reconstruct(plan, obs).estimate
                        wall = time.perf_counter_ns() - tic
                    elif scheme.method == SELMMSE:
                        ports = selmmse_ports(n, pm)
                        y = observe_ports(channel.values, ports, noise_power, nz_seed)
                        tic = time.perf_counter_ns()
                        estimate = estimate_selmmse(y, ports, n).values
                        wall = time.perf_counter_ns() - tic
                    else:
                        ports = random_ports(n, pm, ports_seed(config.base_seed, p, snr, trial))
                        y = observe_ports(channel.values, ports, noise_power, nz_seed)
                        tic = time.perf_counter_ns()
                        estimate = estimate_fas_omp(
                            y,
                            ports,
                            dictionaries[scheme.dict_oversampling],
                            max_atoms=scheme.max_atoms,
                            residual_tol=scheme.residual_tol,
                        ).values
                        wall = time.perf_counter_ns() - tic
                    records.append(
                        ResultRecord(
                            scheme=scheme.label,
                            kernel_kind=scheme.kernel_kind,
                            num_ports=n,
                            antennas_per_slot=m,
                            num_timeslots=p,
                            snr_db=float(snr),
                            trial=trial,
                            seed=ch_seed,
                            nmse=nmse(channel.values, estimate),
                            wall_time_stage2_ns=int(wall) if config.record_timing else 0,
                        )
                    )
    order = {s.label + "|" + s.kernel_kind: i for s, i in scheme_pos.items()}
    records.sort(
        key=lambda r: (order[r.scheme + "|" + r.kernel_kind], r.num_timeslots, r.snr_db, r.trial)
    )
    return records


def _format_value(value):
    if isinstance(value, float):
        return repr(value)
    return str(value)


def emit_csv(records, path):
    """Write records with the fixed header; floats keep full precision."""
    lines = [CSV_HEADER]
    for r in records:
        lines.append(
            ",".join(
                _format_value(v)
                for v in (
                    r.scheme,
                    r.kernel_kind,
                    r.num_ports,
                    r.antennas_per_slot,
                    r.num_timeslots,
                    r.snr_db,
                    r.trial,
                    r.seed,
                    r.nmse,
                    r.wall_time_stage2_ns,
                )
            )
        )
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def read_csv(path):
    """Parse a results CSV back into the exact ResultRecord list."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln for ln in fh.read().split("\n") if ln]
    if not lines or lines[0] != CSV_HEADER:
        raise ValueError("unrecognized results CSV header")
    records = []
    for line in lines[1:]:
        scheme, kind, n, m, p, snr, trial, seed, err, wall = line.split(",")
        records.append(
            ResultRecord(
                scheme=scheme,
                kernel_kind=kind,
                num_ports=int(n),
                antennas_per_slot=int(m),
                num_timeslots=int(p),
                snr_db=float(snr),
                trial=int(trial),
                seed=int(seed),
                nmse=float(err),
                wall_time_stage2_ns=int(wall),
            )
        )
    return records


CONFIG_VERSION = 1


def _coerced(mapping, int_keys=(), float_keys=()):
    """Coerce numeric fields of a parsed config mapping.

    YAML 1.1 readers treat exponents without a sign (``3.5e9``, ``1e-3``
    is fine) as strings, so configs written the obvious way would
    otherwise fail with a type error far from the offending line.
    """
    out = dict(mapping)
    for key in int_keys:
        if out.get(key) is not None:
            out[key] = int(out[key])
    for key in float_keys:
        if out.get(key) is not None:
            out[key] = float(out[key])
    return out


def config_from_dict(doc, seed_override=None):
    """Build an ExperimentConfig from a parsed config document.

    The document must carry ``config_version: 1``; unknown keys are
    rejected so typos fail loudly.  ``seed_override`` replaces base_seed
    when given (the sweep command requires an explicit seed).
    """
    doc = dict(doc)
    version = doc.pop("config_version", None)
    if version != CONFIG_VERSION:
        raise ValueError(f"config_version must be {CONFIG_VERSION}, got {version!r}")
    channel = SscModelParams(
        **_coerced(
            doc.pop("channel", {}),
            int_keys=("num_clusters", "rays_per_cluster", "rng_seed"),
            float_keys=("angle_spread_deg",),
        )
    )
    schemes = tuple(
        SchemeSpec(
            **_coerced(
                entry,
                int_keys=("bessel_order", "train_timeslots", "max_atoms", "dict_oversampling"),
                float_keys=("alpha", "eta", "residual_tol"),
            )
        )
        for entry in doc.pop("schemes")
    )
    known = {
        "num_ports",
        "antennas_per_slot",
        "pilot_counts",
        "snr_db",
        "trials",
        "carrier_hz",
        "aperture_wavelengths",
        "base_seed",
        "record_timing",
        "training_seeds",
    }
    unknown = set(doc) - known
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    doc = _coerced(
        doc,
        int_keys=("num_ports", "antennas_per_slot", "trials", "base_seed"),
        float_keys=("carrier_hz", "aperture_wavelengths"),
    )
    if doc.get("pilot_counts") is not None:
        doc["pilot_counts"] = tuple(int(p) for p in doc["pilot_counts"])
    if doc.get("snr_db") is not None:
        doc["snr_db"] = tuple(float(s) for s in doc["snr_db"])
    if doc.get("training_seeds") is not None:
        doc["training_seeds"] = tuple(int(s) for s in doc["training_seeds"])
    if seed_override is not None:
        doc["base_seed"] = int(seed_override)
    return ExperimentConfig(channel=channel, schemes=schemes, **doc)


def load_config(path, seed_override=None):
    """Parse a YAML experiment config file (see README for the schema)."""
    with open(path, "r", encoding="utf-8") as fh:
        doc = yaml.safe_load(fh)
    if not isinstance(doc, dict):
        raise ValueError("config file must hold a mapping")
    return config_from_dict(doc, seed_override)


def mean_nmse_by_point(records, scheme=None, kernel_kind=None):
    """Mean NMSE keyed by (P, snr_db), optionally filtered by scheme/kernel."""
    buckets = {}
    for r in records:
        if scheme is not None and r.scheme != scheme:
            continue
        if kernel_kind is not None and r.kernel_kind != kernel_kind:
            continue
        buckets.setdefault((r.num_timeslots, r.snr_db), []).append(r.nmse)
    return {key: float(np.mean(vals)) for key, vals in buckets.items()}
