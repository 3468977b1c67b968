import json

import numpy as np
import pytest

from grover_qaoa.charfn import EmpiricalCF, cf_eval
from grover_qaoa.ensemble import AngleSchedule, ep_full
from grover_qaoa.errors import DomainError, ResourceLimitError
from grover_qaoa.problems import (
    NppInstance,
    RcmInstance,
    load_instance,
    npp_spectrum,
    npp_x_max,
    rcm_spectrum,
    sample_npp,
    sample_rcm,
    sample_spectrum,
    save_instance,
)
from grover_qaoa.simulator import simulate_expectation


class TestRcm:
    def test_deterministic(self):
        a, b = sample_rcm(4, 1), sample_rcm(4, 1)
        np.testing.assert_array_equal(a.weights, b.weights)
        assert not np.array_equal(a.weights, sample_rcm(4, 2).weights)

    def test_weight_variance(self):
        n = 10_000
        variances = [np.var(sample_rcm(n, s).weights) for s in range(5)]
        assert np.mean(variances) == pytest.approx(1 / n, rel=0.1)

    def test_single_spin(self):
        inst = sample_rcm(1, 5)
        g = inst.weights[0]
        np.testing.assert_array_equal(rcm_spectrum(inst).values, [g, -g])

    def test_sign_rule(self):
        np.testing.assert_array_equal(rcm_spectrum(RcmInstance(1, np.array([0.5]))).values, [0.5, -0.5])
        a, b = 0.3, -1.1
        np.testing.assert_allclose(
            rcm_spectrum(RcmInstance(2, np.array([a, b]))).values,
            [a + b, -a + b, a - b, -a - b],
        )

    @pytest.mark.parametrize("seed", range(3))
    def test_zero_sum(self, seed):
        assert abs(rcm_spectrum(sample_rcm(10, seed)).values.sum()) < 1e-10

    def test_bad_n(self):
        with pytest.raises(DomainError):
            sample_rcm(0, 1)

    def test_gaussian_limit(self):
        t = np.linspace(-3, 3, 61)
        gamma = np.mean(
            [cf_eval(EmpiricalCF(rcm_spectrum(sample_rcm(16, s))), t)[0] for s in range(10)], axis=0
        )
        assert np.max(np.abs(gamma - np.exp(-t**2 / 2))) < 0.05


class TestNpp:
    def test_deterministic(self):
        np.testing.assert_array_equal(sample_npp(3, 9).numbers, sample_npp(3, 9).numbers)

    def test_support(self):
        for n in (1, 5, 40):
            x = sample_npp(n, 11).numbers
            assert x.min() >= 0 and x.max() <= npp_x_max(n)

    def test_uniform_mean(self):
        n = 20_000
        x = sample_npp(n, 4).numbers
        assert x.mean() == pytest.approx(npp_x_max(n) / 2, rel=0.05)

    def test_hand_evaluated_spectrum(self):
        s = npp_spectrum(NppInstance(2, np.array([0.3, 0.4])))
        np.testing.assert_allclose(s.values, [0.49, 0.01, 0.01, 0.49], atol=1e-15)

    @pytest.mark.parametrize("seed", range(3))
    def test_complement_symmetry_and_positivity(self, seed):
        s = npp_spectrum(sample_npp(9, seed))
        z = np.arange(s.size)
        np.testing.assert_array_equal(s.values, s.values[z ^ (s.size - 1)])
        assert s.values.min() >= 0

    def test_unit_mean_at_n20(self):
        means = np.array([npp_spectrum(sample_npp(20, s)).mean() for s in range(12)])
        se = means.std(ddof=1) / np.sqrt(means.size)
        assert abs(means.mean() - 1) < 3 * se

    def test_memory_guard(self):
        with pytest.raises(ResourceLimitError):
            npp_spectrum(NppInstance(27, np.zeros(27)))


def test_permutation_invariance():
    rng = np.random.default_rng(0)
    s = npp_spectrum(sample_npp(7, 0))
    sched = AngleSchedule(rng.uniform(-1, 1, 3), rng.uniform(0, 6, 3))
    ref_sim = simulate_expectation(s, sched)
    ref_ens = ep_full(EmpiricalCF(s), sched)
    for _ in range(5):
        perm = rng.permutation(s.size)
        assert abs(simulate_expectation(s.permuted(perm), sched) - ref_sim) < 1e-12
        assert abs(ep_full(EmpiricalCF(s.permuted(perm)), sched) - ref_ens) < 1e-12


def test_sample_spectrum_kinds():
    assert sample_spectrum("npp", 3, 1).values.min() >= 0
    with pytest.raises(DomainError):
        sample_spectrum("maxcut", 3, 1)


@pytest.mark.parametrize("make", [sample_npp, sample_rcm])
def test_instance_round_trip(tmp_path, make):
    inst = make(5, 17)
    path = tmp_path / "inst.json"
    save_instance(inst, path, invocation="test")
    doc = json.loads(path.read_text())
    assert doc["kind"] in ("npp", "rcm") and doc["n"] == 5 and doc["seed"] == 17
    back = load_instance(path)
    assert type(back) is type(inst)
    np.testing.assert_array_equal(getattr(back, "numbers", getattr(back, "weights", None)),
                                  getattr(inst, "numbers", getattr(inst, "weights", None)))
