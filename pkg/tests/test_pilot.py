"""Tests for frame scheduling, pilot observation, and LS estimation."""

import numpy as np
import pytest

from riscade.channel import ScenarioParams, draw_channel_sample
from riscade.complexmat import vec
from riscade.errors import ContractError, ScheduleError
from riscade.pilot import (FrameSchedule, build_network_input, build_schedule,
                           from_real_stack, ls_estimate, make_gamma, observe,
                           snr_to_noise_var, to_real_stack)
from riscade.rng import substream


class TestBuildSchedule:
    def test_full_time_rate_uses_every_block(self):
        sch = build_schedule(10, 1.0, 16, 0.5)
        assert sch.pilot_blocks == tuple(range(1, 11))
        assert sch.r_t == 1.0

    def test_uniform_stride_placement(self):
        sch = build_schedule(10, 0.3, 16, 0.5)
        assert sch.pilot_blocks == (1, 4, 7)

    def test_element_subsampling_counts(self):
        sch = build_schedule(10, 1.0, 64, 1 / 16)
        assert sch.num_selected == 4
        assert sch.selected_elements == (1, 17, 33, 49)
        assert sch.r_a == 1 / 16

    def test_pilot_len_defaults_to_selected_count(self):
        sch = build_schedule(10, 0.5, 16, 0.25)
        assert sch.pilot_len == sch.num_selected == 4

    def test_short_pilot_rejected(self):
        with pytest.raises(ScheduleError):
            build_schedule(10, 0.5, 16, 0.5, pilot_len=3)

    def test_rates_must_be_in_unit_interval(self):
        with pytest.raises(ScheduleError):
            build_schedule(10, 0.0, 16, 0.5)
        with pytest.raises(ScheduleError):
            build_schedule(10, 0.5, 16, 1.5)

    def test_dict_round_trip(self):
        sch = build_schedule(10, 0.3, 16, 0.5, power=2.0)
        assert FrameSchedule.from_dict(sch.to_dict()) == sch


class TestGamma:
    def test_square_gamma_is_unitary(self):
        g = make_gamma(4, 4)
        assert np.max(np.abs(g @ g.conj().T - np.eye(4))) < 1e-12
        assert np.max(np.abs(g.conj().T @ g - np.eye(4))) < 1e-12

    @pytest.mark.parametrize("n_s,n_p", [(2, 4), (3, 8), (5, 7)])
    def test_rows_orthonormal(self, n_s, n_p):
        g = make_gamma(n_s, n_p)
        assert np.max(np.abs(g @ g.conj().T - np.eye(n_s))) < 1e-12

    def test_single_row_unit_norm(self):
        g = make_gamma(1, 6)
        assert np.isclose(np.linalg.norm(g), 1.0)

    def test_entries_unit_modulus_before_scaling(self):
        g = make_gamma(3, 8)
        assert np.allclose(np.abs(g) * np.sqrt(8), 1.0)

    def test_too_short_rejected(self):
        with pytest.raises(ScheduleError):
            make_gamma(4, 3)


def _frame(rng, m=2, n_v=2, n_h=2, blocks=4, r_t=1.0, r_a=0.5, power=1.0):
    sc = ScenarioParams(m=m, n_v=n_v, n_h=n_h, l_g=3)
    sch = build_schedule(blocks, r_t, sc.n, r_a, power=power)
    sample = draw_channel_sample(sc, blocks, rng)
    return sc, sch, sample


class TestObserve:
    def test_noiseless_square_gamma_inverts(self, rng):
        sc, sch, sample = _frame(rng, r_a=1.0)
        obs = observe(sample.C_seq[0], 1, sch, None, rng)
        recovered = np.sqrt(obs.pilot_len / obs.power) * obs.Y @ obs.gamma.conj().T
        assert np.max(np.abs(recovered - sample.C_seq[0])) < 1e-12

    def test_zero_channel_gives_pure_noise(self, rng):
        sc, sch, sample = _frame(rng)
        noise_rng = substream(7, "noise")
        obs = observe(np.zeros((sc.m, sc.n)), 1, sch, 10.0, noise_rng)
        twin = substream(7, "noise")
        sigma = snr_to_noise_var(sch.power, 10.0)
        expected = np.sqrt(sigma / 2) * (
            twin.standard_normal((sc.m, sch.pilot_len))
            + 1j * twin.standard_normal((sc.m, sch.pilot_len)))
        assert np.array_equal(obs.Y, expected)

    def test_noise_energy_matches_variance(self, rng):
        sc, sch, sample = _frame(rng)
        sigma = snr_to_noise_var(sch.power, 5.0)
        total = 0.0
        draws = 1000
        for _ in range(draws):
            obs = observe(np.zeros((sc.m, sc.n)), 1, sch, 5.0, rng)
            total += np.sum(np.abs(obs.Y) ** 2)
        expected = sc.m * sch.pilot_len * sigma
        assert abs(total / draws - expected) < 0.05 * expected

    def test_non_pilot_block_rejected(self, rng):
        sc, sch, sample = _frame(rng, r_t=0.5)
        bad = next(b for b in range(1, 5) if b not in sch.pilot_blocks)
        with pytest.raises(ContractError):
            observe(sample.C_seq[bad - 1], bad, sch, None, rng)


class TestLsEstimate:
    def test_noiseless_recovery(self, rng):
        sc, sch, sample = _frame(rng)
        truth = sample.C_seq[0][:, sch.element_index]
        est = ls_estimate(observe(sample.C_seq[0], 1, sch, None, rng))
        rel = np.linalg.norm(est - truth) / np.linalg.norm(truth)
        assert rel < 1e-10

    def test_error_is_filtered_noise(self, rng):
        # estimate - truth == sqrt(N_p / P) V Gamma^H, by linearity
        sc, sch, sample = _frame(rng)
        seed_rng = substream(3, "noise")
        obs = observe(sample.C_seq[0], 1, sch, 0.0, seed_rng)
        clean = observe(sample.C_seq[0], 1, sch, None, rng)
        V = obs.Y - clean.Y
        err = ls_estimate(obs) - ls_estimate(clean)
        expected = np.sqrt(sch.pilot_len / sch.power) * V @ obs.gamma.conj().T
        assert np.max(np.abs(err - expected)) < 1e-12

    def test_double_power_halves_error_energy(self, rng):
        sc = ScenarioParams(m=2, n_v=2, n_h=2, l_g=3)
        sample = draw_channel_sample(sc, 1, rng)
        energies = []
        for power in (1.0, 2.0):
            sch = build_schedule(1, 1.0, sc.n, 0.5, power=power)
            # fix sigma^2 = 1 for both powers: snr_db = 10 log10(P)
            snr_db = 10 * np.log10(power)
            total = 0.0
            for _ in range(1000):
                obs = observe(sample.C_seq[0], 1, sch, snr_db, rng)
                err = ls_estimate(obs) - sample.C_seq[0][:, sch.element_index]
                total += np.sum(np.abs(err) ** 2)
            energies.append(total / 1000)
        assert abs(energies[0] / energies[1] - 2.0) < 0.2 * 2.0

    def test_round_trip_across_sizes(self, rng):
        for m, n_v, n_h, r_a, n_p in [(1, 2, 2, 0.25, 2), (3, 2, 4, 0.5, 6),
                                      (2, 4, 4, 1.0, 16)]:
            sc = ScenarioParams(m=m, n_v=n_v, n_h=n_h, l_g=2)
            sch = build_schedule(2, 1.0, sc.n, r_a, pilot_len=n_p)
            sample = draw_channel_sample(sc, 2, rng)
            est = ls_estimate(observe(sample.C_seq[1], 2, sch, None, rng))
            truth = sample.C_seq[1][:, sch.element_index]
            assert np.max(np.abs(est - truth)) < 1e-10

    def test_nmse_improves_with_snr(self, rng):
        sc, sch, sample = _frame(rng)
        truth = sample.C_seq[0][:, sch.element_index]
        nmse = []
        for snr_db in (0.0, 10.0, 20.0):
            total = 0.0
            for _ in range(200):
                est = ls_estimate(observe(sample.C_seq[0], 1, sch, snr_db, rng))
                total += (np.linalg.norm(est - truth) / np.linalg.norm(truth)) ** 2
            nmse.append(total / 200)
        assert nmse[0] > nmse[1] > nmse[2]


class TestNetworkInput:
    def test_full_rate_has_no_zero_rows(self, rng):
        sc, sch, sample = _frame(rng, r_t=1.0)
        estimates = {b: ls_estimate(observe(sample.C_seq[b - 1], b, sch, None, rng))
                     for b in sch.pilot_blocks}
        x = build_network_input(estimates, sch)
        assert x.shape == (4, 2 * sc.m * sch.num_selected)
        assert np.all(np.any(x != 0, axis=1))

    def test_non_pilot_blocks_are_zero(self, rng):
        sc, sch, sample = _frame(rng, r_t=0.5)
        estimates = {b: ls_estimate(observe(sample.C_seq[b - 1], b, sch, None, rng))
                     for b in sch.pilot_blocks}
        x = build_network_input(estimates, sch)
        for n in range(1, 5):
            if n in sch.pilot_blocks:
                assert np.any(x[n - 1] != 0)
            else:
                assert np.array_equal(x[n - 1], np.zeros_like(x[n - 1]))

    def test_stacking_round_trips(self, rng):
        sc, sch, sample = _frame(rng)
        est = ls_estimate(observe(sample.C_seq[0], 1, sch, None, rng))
        x = build_network_input({b: est for b in sch.pilot_blocks}, sch)
        half = x.shape[1] // 2
        assert np.array_equal(x[0][:half], vec(est).real)
        assert np.array_equal(x[0][half:], vec(est).imag)
        assert np.array_equal(from_real_stack(x[0]), vec(est))

    def test_missing_estimate_rejected(self, rng):
        sc, sch, sample = _frame(rng, r_t=1.0)
        with pytest.raises(ContractError):
            build_network_input({1: np.zeros((sc.m, sch.num_selected))}, sch)


def test_real_stack_round_trip(rng):
    c = rng.standard_normal(6) + 1j * rng.standard_normal(6)
    assert np.array_equal(from_real_stack(to_real_stack(c)), c)


def test_snr_definition():
    assert snr_to_noise_var(1.0, None) == 0.0
    assert np.isclose(snr_to_noise_var(1.0, 0.0), 1.0)
    assert np.isclose(snr_to_noise_var(2.0, 10.0), 0.2)
