"""Sweep harness, CSV, config, and SVG tests.

The ordering claim (planned Bayesian sampling beats equal spacing at every
pilot budget) is exercised here at a reduced size; the full-size run lives
in the acceptance suite.
"""

import re

import numpy as np
import pytest
import yaml

from fasbar import (
    ExperimentConfig,
    SchemeSpec,
    SscModelParams,
    config_from_dict,
    emit_csv,
    emit_svg,
    load_config,
    mean_nmse_by_point,
    nmse,
    read_csv,
    run_sweep,
    train_covariance_kernel,
)
from fasbar.harness import CSV_HEADER, channel_seed, derive_seed, noise_seed


def small_config(**overrides):
    base = dict(
        num_ports=16,
        antennas_per_slot=2,
        pilot_counts=(1, 2),
        snr_db=(20.0,),
        trials=3,
        channel=SscModelParams(3, 10, 5.0),
        schemes=(SchemeSpec("sbar", kernel="exponential"), SchemeSpec("selmmse")),
        base_seed=99,
    )
    base.update(overrides)
    return ExperimentConfig(**base)


class TestNmse:
    def test_exact_estimate_is_zero(self):
        h = np.array([1 + 1j, 2.0, -3j])
        assert nmse(h, h.copy()) == 0.0

    def test_zero_estimate_is_one(self):
        h = np.array([1 + 1j, 2.0])
        assert nmse(h, np.zeros(2)) == 1.0

    def test_error_norm_equal_to_signal_norm_is_one(self):
        assert nmse(np.array([1.0, 0.0]), np.array([1.0, 1.0])) == 1.0

    def test_zero_truth_rejected(self):
        with pytest.raises(ValueError):
            nmse(np.zeros(3), np.ones(3))

    def test_shape_mismatch_rejected(self):
        with pytest.raises(ValueError):
            nmse(np.ones(3), np.ones(4))


class TestSeeds:
    def test_derivation_is_deterministic_and_spread(self):
        assert derive_seed(1, 2, 3) == derive_seed(1, 2, 3)
        seeds = {derive_seed(1, 2, t) for t in range(1000)}
        assert len(seeds) == 1000

    def test_streams_are_distinct(self):
        assert channel_seed(9, 20.0, 0) != noise_seed(9, 20.0, 0)

    def test_infinite_snr_has_its_own_key(self):
        assert channel_seed(9, float("inf"), 0) != channel_seed(9, 0.0, 0)


class TestConfigValidation:
    def test_trials_must_be_positive(self):
        with pytest.raises(ValueError):
            small_config(trials=0)

    def test_budget_cannot_exceed_ports(self):
        with pytest.raises(ValueError):
            small_config(pilot_counts=(9,))  # 9 slots * 2 ports > 16

    def test_training_seed_collision_rejected(self):
        colliding = channel_seed(99, 20.0, 0)
        with pytest.raises(ValueError):
            small_config(training_seeds=(colliding,))

    def test_disjoint_training_seeds_accepted(self):
        cfg = small_config(training_seeds=(1, 2, 3))
        assert cfg.training_seeds == (1, 2, 3)

    def test_unknown_scheme_method_rejected(self):
        with pytest.raises(ValueError):
            SchemeSpec("lmmse")
        with pytest.raises(ValueError):
            SchemeSpec("sbar", kernel="gaussian")


class TestRunSweep:
    def test_noiseless_full_sampling_recovers(self):
        cfg = small_config(
            num_ports=16,
            antennas_per_slot=4,
            pilot_counts=(4,),
            snr_db=(float("inf"),),
            trials=1,
            schemes=(SchemeSpec("sbar", kernel="exponential"),),
        )
        records = run_sweep(cfg)
        assert len(records) == 1
        assert records[0].nmse < 1e-8

    def test_records_are_deterministic(self):
        cfg = small_config(record_timing=False)
        assert run_sweep(cfg) == run_sweep(cfg)

    def test_plan_cache_does_not_change_results(self):
        cfg = small_config(record_timing=False)
        assert run_sweep(cfg, use_plan_cache=True) == run_sweep(cfg, use_plan_cache=False)

    def test_channel_seed_shared_across_schemes_and_budgets(self):
        records = run_sweep(small_config())
        by_trial = {}
        for r in records:
            by_trial.setdefault(r.trial, set()).add(r.seed)
        for seeds in by_trial.values():
            assert len(seeds) == 1  # paired draws: same channel everywhere

    def test_canonical_record_order(self):
        records = run_sweep(small_config())
        labels = [(r.scheme, r.num_timeslots, r.trial) for r in records]
        expect = [
            (s, p, t) for s in ("sbar", "selmmse") for p in (1, 2) for t in range(3)
        ]
        assert labels == expect

    def test_timing_toggle(self):
        cfg = small_config(record_timing=False)
        assert all(r.wall_time_stage2_ns == 0 for r in run_sweep(cfg))

    def test_planned_sampling_beats_equal_spacing(self):
        # reduced-size ordering check: bessel-planned vs nearest-hold
        cfg = ExperimentConfig(
            num_ports=64,
            antennas_per_slot=4,
            pilot_counts=tuple(range(1, 9)),
            snr_db=(20.0,),
            trials=200,
            channel=SscModelParams(9, 100, 5.0),
            schemes=(SchemeSpec("sbar", kernel="bessel"), SchemeSpec("selmmse")),
            base_seed=424242,
        )
        records = run_sweep(cfg)
        sbar = mean_nmse_by_point(records, scheme="sbar")
        selmmse = mean_nmse_by_point(records, scheme="selmmse")
        for p in range(1, 9):
            assert sbar[(p, 20.0)] < selmmse[(p, 20.0)]


class TestTrainedKernel:
    def test_training_uses_dedicated_stream(self):
        cfg = small_config()
        k = train_covariance_kernel(cfg, 8)
        assert k.kind == "covariance"
        assert k.matrix.shape == (16, 16)
        eigs = np.linalg.eigvalsh(k.matrix)
        assert np.sum(eigs > 1e-6 * eigs.max()) <= 8

    def test_explicit_seeds_control_the_ensemble(self):
        a = train_covariance_kernel(small_config(training_seeds=(5, 6)), 2)
        b = train_covariance_kernel(small_config(training_seeds=(5, 6)), 2)
        c = train_covariance_kernel(small_config(training_seeds=(7, 8)), 2)
        assert a.fingerprint == b.fingerprint != c.fingerprint

    def test_insufficient_seeds_rejected(self):
        with pytest.raises(ValueError):
            train_covariance_kernel(small_config(training_seeds=(5,)), 2)


class TestCsv:
    def test_header_and_round_trip(self, tmp_path):
        records = run_sweep(small_config())
        path = tmp_path / "out.csv"
        emit_csv(records, path)
        text = path.read_text()
        assert text.splitlines()[0] == CSV_HEADER
        assert read_csv(path) == records

    def test_emission_is_byte_stable(self, tmp_path):
        records = run_sweep(small_config(record_timing=False))
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        emit_csv(records, a)
        emit_csv(records, b)
        assert a.read_bytes() == b.read_bytes()

    def test_foreign_header_rejected(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("a,b,c\n1,2,3\n")
        with pytest.raises(ValueError):
            read_csv(path)


class TestConfigFile:
    def test_yaml_round_trip(self, tmp_path):
        doc = {
            "config_version": 1,
            "num_ports": 32,
            "antennas_per_slot": 2,
            "pilot_counts": [1, 2, 4],
            "snr_db": [10.0, 20.0],
            "trials": 2,
            "base_seed": 7,
            "channel": {"num_clusters": 3, "rays_per_cluster": 10},
            "schemes": [
                {"method": "sbar", "kernel": "bessel"},
                {"method": "fas-omp", "max_atoms": 4},
            ],
        }
        path = tmp_path / "cfg.yaml"
        path.write_text(yaml.safe_dump(doc))
        cfg = load_config(path)
        assert cfg.num_ports == 32
        assert cfg.pilot_counts == (1, 2, 4)
        assert cfg.schemes[1].max_atoms == 4
        assert cfg.channel.num_clusters == 3

    def test_seed_override(self, tmp_path):
        doc = {
            "config_version": 1,
            "num_ports": 16,
            "antennas_per_slot": 2,
            "pilot_counts": [1],
            "snr_db": [20.0],
            "trials": 1,
            "schemes": [{"method": "selmmse"}],
        }
        path = tmp_path / "cfg.yaml"
        path.write_text(yaml.safe_dump(doc))
        assert load_config(path, seed_override=123).base_seed == 123

    def test_unsigned_exponents_load_as_numbers(self, tmp_path):
        # YAML 1.1 resolves 3.5e9 / 1e-3 (no exponent sign) as strings
        path = tmp_path / "cfg.yaml"
        path.write_text(
            "config_version: 1\n"
            "num_ports: 16\n"
            "antennas_per_slot: 2\n"
            "pilot_counts: [1]\n"
            "snr_db: [20.0]\n"
            "trials: 1\n"
            "carrier_hz: 3.5e9\n"
            "schemes:\n"
            "  - method: fas-omp\n"
            "    residual_tol: 1e-3\n"
        )
        cfg = load_config(path)
        assert cfg.carrier_hz == 3.5e9
        assert cfg.schemes[0].residual_tol == 1e-3

    def test_non_numeric_field_fails_loudly(self):
        doc = {
            "config_version": 1,
            "trials": "plenty",
            "schemes": [{"method": "selmmse"}],
        }
        with pytest.raises(ValueError):
            config_from_dict(doc)

    def test_version_is_mandatory(self):
        with pytest.raises(ValueError):
            config_from_dict({"schemes": [{"method": "selmmse"}]})

    def test_unknown_keys_rejected(self):
        with pytest.raises(ValueError):
            config_from_dict(
                {"config_version": 1, "schemes": [{"method": "selmmse"}], "n_ports": 4}
            )


class TestSvg:
    def test_series_points_follow_the_data(self, tmp_path):
        records = run_sweep(
            small_config(pilot_counts=(1, 2, 4, 8), trials=20, record_timing=False)
        )
        path = tmp_path / "plot.svg"
        emit_svg(records, path)
        text = path.read_text()
        polylines = re.findall(r'<polyline points="([^"]+)"', text)
        assert len(polylines) == 2  # sbar and selmmse series
        # series are emitted in sorted label order: sbar first
        pts = [tuple(map(float, pair.split(","))) for pair in polylines[0].split()]
        xs = [p[0] for p in pts]
        ys = [p[1] for p in pts]
        assert xs == sorted(xs)
        # sbar mean NMSE improves with more pilots: log-scale y moves down the
        # page, i.e. pixel y grows
        sbar_means = mean_nmse_by_point(records, scheme="sbar")
        means = [sbar_means[(p, 20.0)] for p in (1, 2, 4, 8)]
        assert all(a > b for a, b in zip(means, means[1:]))
        assert all(a < b for a, b in zip(ys, ys[1:]))

    def test_empty_records_rejected(self, tmp_path):
        with pytest.raises(ValueError):
            emit_svg([], tmp_path / "x.svg")

    def test_output_is_byte_stable(self, tmp_path):
        records = run_sweep(small_config(record_timing=False))
        a, b = tmp_path / "a.svg", tmp_path / "b.svg"
        emit_svg(records, a)
        emit_svg(records, b)
        assert a.read_bytes() == b.read_bytes()
