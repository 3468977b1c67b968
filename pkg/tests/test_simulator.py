import math

import numpy as np
import pytest

from grover_qaoa.charfn import EmpiricalCF, Spectrum
from grover_qaoa.ensemble import AngleSchedule, ep_full
from grover_qaoa.errors import DomainError, ResourceLimitError
from grover_qaoa.simulator import (
    StateVector,
    apply_grover_driver,
    apply_phase,
    expectation,
    init_plus,
    prepare_qaoa,
    sample_bitstrings,
    simulate_expectation,
)

from conftest import random_spectrum

TWO_LEVEL = Spectrum.from_values([-1.0, 1.0])


def test_init_plus():
    np.testing.assert_allclose(init_plus(1).amplitudes, [2**-0.5] * 2)
    np.testing.assert_allclose(init_plus(2).amplitudes, [0.5] * 4)
    assert init_plus(7).norm() == pytest.approx(1.0, abs=1e-14)
    with pytest.raises(DomainError):
        init_plus(0)
    with pytest.raises(ResourceLimitError):
        init_plus(27)


class TestPhase:
    def test_zero_angle(self):
        s = init_plus(1)
        np.testing.assert_array_equal(apply_phase(s, TWO_LEVEL, 0.0).amplitudes, s.amplitudes)

    def test_two_level(self):
        out = apply_phase(init_plus(1), TWO_LEVEL, math.pi / 4)
        np.testing.assert_allclose(out.amplitudes, np.array([np.exp(-1j * np.pi / 4), np.exp(1j * np.pi / 4)]) / np.sqrt(2))

    def test_pure_phase(self, rng):
        spec = random_spectrum(rng, 5)
        state = prepare_qaoa(spec, AngleSchedule([0.3], [1.0]))
        out = apply_phase(state, spec, 0.77)
        np.testing.assert_allclose(np.abs(out.amplitudes), np.abs(state.amplitudes), atol=1e-15)

    def test_dimension_mismatch(self):
        with pytest.raises(DomainError):
            apply_phase(init_plus(2), TWO_LEVEL, 0.1)
        with pytest.raises(DomainError):
            expectation(init_plus(2), TWO_LEVEL)


class TestDriver:
    def test_zero_angle(self, rng):
        state = prepare_qaoa(random_spectrum(rng, 3), AngleSchedule([0.5], [0.2]))
        np.testing.assert_array_equal(apply_grover_driver(state, 0.0).amplitudes, state.amplitudes)

    @pytest.mark.parametrize("beta", [0.3, 2.0, -4.0])
    def test_plus_state_is_eigenstate(self, beta):
        s = init_plus(4)
        np.testing.assert_allclose(apply_grover_driver(s, beta).amplitudes, np.exp(1j * beta) * s.amplitudes, atol=1e-15)

    def test_exact_grover_step(self):
        state = apply_grover_driver(apply_phase(init_plus(1), TWO_LEVEL, math.pi / 4), 3 * math.pi / 2)
        np.testing.assert_allclose(state.amplitudes, [-1j, 0], atol=1e-15)
        assert expectation(state, TWO_LEVEL) == pytest.approx(-1.0, abs=1e-15)

    def test_matches_dense_matrix_exponential(self, rng):
        from scipy.linalg import expm

        n = 3
        plus = np.full(2**n, 2 ** (-n / 2))
        proj = np.outer(plus, plus)
        state = prepare_qaoa(random_spectrum(rng, n), AngleSchedule([0.4], [1.3]))
        dense = expm(1j * 0.9 * proj) @ state.amplitudes
        np.testing.assert_allclose(apply_grover_driver(state, 0.9).amplitudes, dense, atol=1e-14)


class TestPrepare:
    def test_zero_schedule(self, rng):
        spec = random_spectrum(rng, 4)
        state = prepare_qaoa(spec, AngleSchedule([0.0, 0.0], [0.0, 0.0]))
        np.testing.assert_allclose(state.amplitudes, init_plus(4).amplitudes)

    def test_two_level_ground_state(self):
        state = prepare_qaoa(TWO_LEVEL, AngleSchedule([math.pi / 4], [3 * math.pi / 2]))
        assert expectation(state, TWO_LEVEL) == pytest.approx(-1.0, abs=1e-15)
        assert np.all(sample_bitstrings(state, seed=3, shots=200) == 0)

    def test_norm_drift_over_many_layers(self):
        rng = np.random.default_rng(50)
        spec = random_spectrum(rng, 12)
        state = init_plus(12)
        for _ in range(50):
            state = apply_phase(state, spec, rng.uniform(-2, 2))
            state = apply_grover_driver(state, rng.uniform(0, 2 * np.pi))
            assert abs(state.norm() - 1) < 1e-12
        assert abs(state.norm() - 1) < 1e-9

    def test_permutation_invariance(self):
        rng = np.random.default_rng(10)
        spec = random_spectrum(rng, 8)
        sched = AngleSchedule(rng.uniform(-1, 1, 3), rng.uniform(0, 6, 3))
        ref = simulate_expectation(spec, sched)
        for _ in range(10):
            assert abs(simulate_expectation(spec.permuted(rng.permutation(spec.size)), sched) - ref) < 1e-12


class TestExpectation:
    def test_uniform_state_gives_mean(self):
        spec = Spectrum.from_values([0.49, 0.01, 0.01, 0.49])
        assert expectation(init_plus(2), spec) == pytest.approx(0.25, abs=1e-15)

    def test_bounded(self, rng):
        spec = random_spectrum(rng, 6)
        for _ in range(10):
            sched = AngleSchedule(rng.uniform(-3, 3, 2), rng.uniform(0, 7, 2))
            e = simulate_expectation(spec, sched)
            assert spec.values.min() - 1e-12 <= e <= spec.values.max() + 1e-12

    @pytest.mark.parametrize("n,p", [(3, 1), (5, 2), (6, 3), (7, 4)])
    def test_oracle_matches_ensemble_formula(self, rng, n, p):
        spec = random_spectrum(rng, n)
        sched = AngleSchedule(rng.uniform(-2, 2, p), rng.uniform(0, 2 * np.pi, p))
        sim = simulate_expectation(spec, sched)
        assert abs(ep_full(EmpiricalCF(spec), sched) - sim) <= 1e-9 * max(1, abs(sim))


class TestSampling:
    def test_deterministic_state(self):
        state = StateVector(1, np.array([-1j, 0]))
        assert set(sample_bitstrings(state, 1, 100)) == {0}

    def test_reproducible(self, rng):
        state = prepare_qaoa(random_spectrum(rng, 4), AngleSchedule([0.5], [2.0]))
        np.testing.assert_array_equal(sample_bitstrings(state, 9, 50), sample_bitstrings(state, 9, 50))

    def test_uniform_frequencies(self):
        n, shots = 3, 100_000
        counts = np.bincount(sample_bitstrings(init_plus(n), 2, shots), minlength=2**n)
        p = 1 / 2**n
        sigma = math.sqrt(shots * p * (1 - p))
        assert np.all(np.abs(counts - shots * p) < 5 * sigma)

    def test_shots_positive(self):
        with pytest.raises(DomainError):
            sample_bitstrings(init_plus(1), 0, 0)
