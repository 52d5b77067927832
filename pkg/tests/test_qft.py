import cmath
import math
import random

import numpy as np
import pytest

from noisyshor.noise import NoiseConfig, sample_noise, zero_noise
from noisyshor.numtheory import DlogInstance, make_instance
from noisyshor.qft import (
    MeasurementDistribution,
    PairEvaluator,
    closed_form_distribution,
    exact_probability,
    noisy_phase,
    noisy_probability,
    statevector_run,
    u_k,
)

INST35 = DlogInstance(P=5, n=3, g=2, y=3, d=3)


def _direct_probability(inst, v, w, u_star):
    # independent oracle: plain sequential complex summation, no shared code
    n, P, d = inst.n, inst.P, inst.d
    N = 1 << n
    total = 0j
    for k in range(P - 1):
        u = (d * k + u_star) % (P - 1)
        total += cmath.exp(2j * cmath.pi * (u * v + k * w) / N)
    return abs(total) ** 2 / (N * N * (P - 1) ** 2)


class TestUk:
    def test_examples(self):
        assert u_k(3, 7, 0, 11) == 7
        assert u_k(3, 0, 2, 5) == 2
        assert u_k(1, 1, 3, 5) == 0  # d*k + u* = P-1 wraps to 0


class TestExactProbability:
    def test_zero_frequencies(self):
        for u_star in range(4):
            assert exact_probability(INST35, 0, 0, u_star) == pytest.approx(1 / 64, abs=1e-15)

    def test_frozen_regression(self):
        # value frozen from the independent direct-summation oracle at bring-up
        assert exact_probability(INST35, 2, 2, 0) == pytest.approx(0.015625, abs=1e-12)

    def test_against_direct_oracle(self):
        rnd = random.Random(7)
        inst = make_instance(n=5, prime_mode="random", rng=np.random.default_rng(70))
        for _ in range(50):
            v = rnd.randrange(32)
            w = rnd.randrange(32)
            us = rnd.randrange(inst.P - 1)
            assert exact_probability(inst, v, w, us) == pytest.approx(
                _direct_probability(inst, v, w, us), abs=1e-13
            )

    def test_domain(self):
        with pytest.raises(ValueError):
            exact_probability(INST35, 8, 0, 0)
        with pytest.raises(ValueError):
            exact_probability(INST35, 0, 0, 4)


class TestPhaseIdentity:
    def test_bitwise_expansion_matches_product(self):
        # sum_t v^[t] * 0.u^[n-t-1]...u^[0] = u*v/2^n (mod 1); this pins the
        # bit convention and justifies the fast noiseless phase path
        rnd = random.Random(11)
        for _ in range(100_000):
            n = rnd.randint(1, 20)
            u = rnd.randrange(1 << n)
            v = rnd.randrange(1 << n)
            acc = 0.0
            for t in range(n):
                if (v >> t) & 1:
                    acc += (u % (1 << (n - t))) / (1 << (n - t))
            expected = (u * v % (1 << n)) / (1 << n)
            assert abs((acc - expected) % 1.0) < 1e-12 or abs(((acc - expected) % 1.0) - 1.0) < 1e-12


class TestNoisyPhase:
    def test_zero_outcome_kills_noise(self):
        cfg = NoiseConfig(b=2, epsilon=2.0)
        real = sample_noise(3, 2, np.random.default_rng(1))
        for k in range(4):
            assert noisy_phase(INST35, cfg, real, 0, 0, k, 1) == pytest.approx(0.0)

    def test_epsilon_zero_is_noiseless(self):
        cfg = NoiseConfig(b=2, epsilon=0.0)
        real = sample_noise(3, 2, np.random.default_rng(2))
        for k in range(4):
            u = u_k(3, 1, k, 5)
            expect = ((u * 5 + k * 6) % 8) / 8
            assert noisy_phase(INST35, cfg, real, 5, 6, k, 1) == pytest.approx(expect)

    def test_top_row_pinned_against_displayed_expansion(self):
        # v = 1 activates only row j = 0, whose noise must be
        # (eps/2^b) * (r[0][0] u^[n-b] / 2^0 + ... + r[0][n-b] u^[0] / 2^(n-b))
        n, b, eps = 4, 2, 0.8
        inst = make_instance(prime_mode="explicit", rng=np.random.default_rng(3), prime=13)
        cfg = NoiseConfig(b=b, epsilon=eps)
        real = sample_noise(n, b, np.random.default_rng(4))
        k, u_star = 3, 2
        u = u_k(inst.d, u_star, k, 13)
        expect = (u % 16) / 16
        expect += eps / 2**b * sum(
            float(real.r[0][i]) * ((u >> (n - b - i)) & 1) / 2**i for i in range(n - b + 1)
        )
        got = noisy_phase(inst, cfg, real, 1, 0, k, u_star)
        assert got == pytest.approx(expect % 1.0, abs=1e-12)

    def test_single_noisy_gate_when_b_equals_n(self):
        # n - b = 0: only r[0][0] can contribute, with coefficient v^[0] u^[0] eps/2^b
        n = b = 4
        inst = make_instance(prime_mode="explicit", rng=np.random.default_rng(5), prime=13)
        cfg = NoiseConfig(b=b, epsilon=1.5)
        real = sample_noise(n, b, np.random.default_rng(6))
        k, u_star = 2, 1
        u = u_k(inst.d, u_star, k, 13)
        base = ((u * 1 + k * 0) % 16) / 16
        expect = base + 1.5 / 16 * float(real.r[0][0]) * (u & 1)
        assert noisy_phase(inst, cfg, real, 1, 0, k, u_star) == pytest.approx(expect % 1.0)


class TestNoisyProbability:
    def test_noise_immune_outcome(self):
        cfg = NoiseConfig(b=2, epsilon=3.0)
        real = sample_noise(3, 2, np.random.default_rng(7))
        for u_star in range(4):
            assert noisy_probability(INST35, cfg, real, 0, 0, u_star) == pytest.approx(1 / 64)

    def test_epsilon_zero_equals_exact(self):
        cfg = NoiseConfig(b=2, epsilon=0.0)
        real = sample_noise(3, 2, np.random.default_rng(8))
        for v, w, us in [(2, 2, 0), (5, 1, 3), (7, 7, 2)]:
            assert abs(
                noisy_probability(INST35, cfg, real, v, w, us)
                - exact_probability(INST35, v, w, us)
            ) <= 1e-12

    def test_zero_realization_equals_exact(self):
        cfg = NoiseConfig(b=2, epsilon=1.0)
        real = zero_noise(3, 2)
        for v, w, us in [(2, 2, 0), (3, 6, 1)]:
            assert abs(
                noisy_probability(INST35, cfg, real, v, w, us)
                - exact_probability(INST35, v, w, us)
            ) <= 1e-12


class TestPairEvaluator:
    def test_matches_scalar_path(self):
        inst = make_instance(n=5, prime_mode="random", rng=np.random.default_rng(9))
        cfg = NoiseConfig(b=2, epsilon=0.7)
        real = sample_noise(5, 2, np.random.default_rng(10))
        vs = [0, 3, 7, 11, 31]
        ws = [0, 1, 9, 30, 17]
        ev = PairEvaluator(inst, cfg, real, vs, ws)
        for u_star in (0, 1, inst.P - 2):
            batch = ev.probabilities(u_star)
            for i, (v, w) in enumerate(zip(vs, ws)):
                scalar = noisy_probability(inst, cfg, real, v, w, u_star)
                assert abs(batch[i] - scalar) <= 1e-12

    def test_shape_mismatch_rejected(self):
        cfg = NoiseConfig(b=2, epsilon=0.5)
        real = sample_noise(4, 2, np.random.default_rng(11))
        with pytest.raises(ValueError):
            PairEvaluator(INST35, cfg, real, [0], [0])


class TestStatevector:
    def test_normalization_and_support(self):
        cfg = NoiseConfig(b=2, epsilon=1.0)
        real = sample_noise(3, 2, np.random.default_rng(12))
        dist = statevector_run(INST35, cfg, real)
        assert dist.total() == pytest.approx(1.0, abs=1e-9)
        assert (dist.probs >= 0).all()

    def test_noiseless_matches_exact_probability(self):
        cfg = NoiseConfig(b=2, epsilon=0.0)
        real = zero_noise(3, 2)
        dist = statevector_run(INST35, cfg, real)
        for v in range(8):
            for w in range(8):
                for us in range(4):
                    assert abs(dist.prob(v, w, us) - exact_probability(INST35, v, w, us)) < 1e-9

    def test_matches_closed_form_with_noise(self):
        inst = make_instance(n=4, prime_mode="random", rng=np.random.default_rng(13))
        cfg = NoiseConfig(b=2, epsilon=1.0)
        for seed in (14, 15):
            real = sample_noise(4, 2, np.random.default_rng(seed))
            sv = statevector_run(inst, cfg, real)
            cf = closed_form_distribution(inst, cfg, real)
            assert sv.max_abs_diff(cf) < 1e-9
            assert cf.total() == pytest.approx(1.0, abs=1e-9)

    def test_size_cap(self):
        rng = np.random.default_rng(16)
        inst = make_instance(n=8, prime_mode="random", rng=rng)
        cfg = NoiseConfig(b=2, epsilon=0.0)
        real = zero_noise(8, 2)
        with pytest.raises(ValueError):
            statevector_run(inst, cfg, real)


class TestDistribution:
    def test_good_mass_accumulates(self):
        from noisyshor.peaks import PeakSetParams, build_peak_set

        cfg = NoiseConfig(b=2, epsilon=0.0)
        dist = statevector_run(INST35, cfg, zero_noise(3, 2))
        pk = build_peak_set(INST35, PeakSetParams.original(), b=2)
        assert dist.good_mass(pk) == pytest.approx(0.25, abs=1e-9)
