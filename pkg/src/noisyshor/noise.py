"""The (b, epsilon) relative rotation-noise model and reproducible noise streams.

Controlled rotations by angle 2*pi/2^k are exact for k < b and perturbed to
2*pi*(1+epsilon*r)/2^k for k >= b, with r a standard-normal draw. One
NoiseRealization holds the full triangular array of draws for each of the two
transformed registers: entry r[j][i] belongs to the gate of size k = b+i in
circuit row j and multiplies input bit n-b-j-i.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def splitmix64(x: int) -> int:
    """One output of the splitmix64 mixer (public-domain constants)."""
    z = (x + _GOLDEN) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return (z ^ (z >> 31)) & MASK64


def derive_seed(master_seed: int, *indices: int) -> int:
    """Deterministic 64-bit stream seed for a (master_seed, index, ...) path.

    Defined as s0 = splitmix64(master_seed), then for each index
    s <- splitmix64(s XOR ((index + 1) * 0x9E3779B97F4A7C15 mod 2^64)).
    Distinct index paths give independent, reproducible streams.
    """
    s = splitmix64(master_seed & MASK64)
    for ix in indices:
        s = splitmix64(s ^ (((int(ix) + 1) * _GOLDEN) & MASK64))
    return s


@dataclass(frozen=True)
class NoiseConfig:
    """Noise model parameters: cutoff exponent b, level epsilon, master seed."""

    b: int
    epsilon: float
    master_seed: int = 0

    def __post_init__(self):
        if self.b < 2:
            raise ValueError(f"b must be >= 2, got {self.b}")
        if not (self.epsilon >= 0 and math.isfinite(self.epsilon)):
            raise ValueError(f"epsilon must be finite and >= 0, got {self.epsilon}")


@dataclass(frozen=True, eq=False)
class NoiseRealization:
    """One sampled triangular array of standard-normal draws per register.

    r[j][i] for j in [0, n-b], i in [0, n-b-j] perturbs the first register;
    rho has the same shape and perturbs the second. Arrays are immutable.
    """

    n: int
    b: int
    r: tuple
    rho: tuple

    @property
    def rows(self) -> int:
        return max(self.n - self.b + 1, 0)

    def entry_count(self) -> int:
        """Draws per register: (n-b+1)(n-b+2)/2 when b <= n, else 0."""
        return sum(len(row) for row in self.r)

    def pooled(self) -> np.ndarray:
        """All draws of both registers as one flat array."""
        parts = list(self.r) + list(self.rho)
        if not parts:
            return np.empty(0)
        return np.concatenate(parts)

    def register_rows(self, register: str) -> tuple:
        if register == "r":
            return self.r
        if register == "rho":
            return self.rho
        raise ValueError(f"register must be 'r' or 'rho', got {register!r}")


def sample_noise(n: int, b: int, rng: np.random.Generator) -> NoiseRealization:
    """Fresh noise realization for an n-qubit transform with cutoff b.

    b > n yields an empty realization (no gate reaches size b), which is
    valid: the transform is then exact. Row j is drawn before row j+1 and
    the r register before rho, so a fixed stream reproduces bit-identically.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if b < 2:
        raise ValueError(f"b must be >= 2, got {b}")

    def draw_register():
        rows = []
        for j in range(max(n - b + 1, 0)):
            row = rng.standard_normal(n - b - j + 1)
            row.flags.writeable = False
            rows.append(row)
        return tuple(rows)

    return NoiseRealization(n=n, b=b, r=draw_register(), rho=draw_register())


def zero_noise(n: int, b: int) -> NoiseRealization:
    """All-zero realization; downstream results equal the exact transform."""
    def zeros():
        rows = []
        for j in range(max(n - b + 1, 0)):
            row = np.zeros(n - b - j + 1)
            row.flags.writeable = False
            rows.append(row)
        return tuple(rows)

    return NoiseRealization(n=n, b=b, r=zeros(), rho=zeros())


def noisy_rotation_angle(k: int, b: int, epsilon: float, r: float) -> float:
    """Rotation angle in radians for the size-k controlled gate.

    Gates below the cutoff are exact: 2*pi/2^k. Gates with k >= b are
    perturbed to 2*pi*(1 + epsilon*r)/2^k.
    """
    if k < 1:
        raise ValueError(f"gate exponent must be >= 1, got {k}")
    if k >= b:
        return 2.0 * math.pi * (1.0 + epsilon * r) / 2.0**k
    return 2.0 * math.pi / 2.0**k
