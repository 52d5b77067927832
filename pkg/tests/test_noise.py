import math

import numpy as np
import pytest

from noisyshor.noise import (
    NoiseConfig,
    derive_seed,
    noisy_rotation_angle,
    sample_noise,
    splitmix64,
    zero_noise,
)


class TestSeeds:
    def test_splitmix_reference_vector(self):
        # first output of the reference splitmix64 stream seeded with 0
        assert splitmix64(0) == 0xE220A8397B1DCDAF

    def test_derive_seed_pinned(self):
        assert derive_seed(0) == 16294208416658607535
        assert derive_seed(0, 0) == 9048247064618004702
        assert derive_seed(1, 2, 3) == 16486142541195582571

    def test_derive_seed_distinct_streams(self):
        seeds = {derive_seed(7, i) for i in range(10_000)}
        assert len(seeds) == 10_000
        assert derive_seed(7, 1, 2) != derive_seed(7, 2, 1)


class TestConfig:
    def test_validation(self):
        NoiseConfig(b=2, epsilon=0.0)
        with pytest.raises(ValueError):
            NoiseConfig(b=1, epsilon=0.5)
        with pytest.raises(ValueError):
            NoiseConfig(b=2, epsilon=-0.1)


class TestRealizations:
    def test_triangular_counts(self):
        rng = np.random.default_rng(1)
        for n in range(2, 33):
            for b in range(2, n + 1):
                real = sample_noise(n, b, rng)
                expect = (n - b + 1) * (n - b + 2) // 2
                assert real.entry_count() == expect
                assert len(real.r) == n - b + 1
                for j, row in enumerate(real.r):
                    assert len(row) == n - b - j + 1
                assert [len(row) for row in real.rho] == [len(row) for row in real.r]

    def test_count_example(self):
        rng = np.random.default_rng(2)
        real = sample_noise(5, 3, rng)  # n - b = 2
        assert real.entry_count() == 6

    def test_cutoff_above_n_is_empty(self):
        rng = np.random.default_rng(3)
        real = sample_noise(4, 6, rng)
        assert real.entry_count() == 0 and real.rows == 0

    def test_deterministic_per_seed(self):
        a = sample_noise(10, 2, np.random.default_rng(99))
        b = sample_noise(10, 2, np.random.default_rng(99))
        assert all(np.array_equal(x, y) for x, y in zip(a.r, b.r))
        assert all(np.array_equal(x, y) for x, y in zip(a.rho, b.rho))

    def test_registers_independent(self):
        real = sample_noise(10, 2, np.random.default_rng(4))
        assert not np.array_equal(real.r[0], real.rho[0])

    def test_immutable(self):
        real = sample_noise(6, 2, np.random.default_rng(5))
        with pytest.raises(ValueError):
            real.r[0][0] = 1.0

    def test_pooled_standard_normal(self):
        rng = np.random.default_rng(424242)
        parts = []
        total = 0
        while total < 1_000_000:
            arr = sample_noise(32, 2, rng).pooled()
            parts.append(arr)
            total += len(arr)
        pool = np.concatenate(parts)[:1_000_000]
        m = pool.mean()
        v = pool.var(ddof=1)
        n = len(pool)
        assert abs(m) < 5.0 / math.sqrt(n)
        assert abs(v - 1.0) < 5.0 * math.sqrt(2.0 / n)

    def test_zero_noise_shape(self):
        z = zero_noise(8, 3)
        assert z.entry_count() == 6 * 7 // 2
        assert all(not row.any() for row in z.r)


class TestRotationAngle:
    def test_exact_gate(self):
        assert noisy_rotation_angle(1, 2, 0.0, 123.0) == pytest.approx(math.pi)
        # below the cutoff the draw is ignored
        assert noisy_rotation_angle(2, 3, 1.0, 5.0) == pytest.approx(math.pi / 2)

    def test_noisy_gate_formula(self):
        assert noisy_rotation_angle(2, 2, 0.5, 1.0) == pytest.approx(0.75 * math.pi)
        assert noisy_rotation_angle(3, 2, 1.0, -1.0) == pytest.approx(0.0)

    def test_domain(self):
        with pytest.raises(ValueError):
            noisy_rotation_angle(0, 2, 0.1, 0.0)
