"""Exact integer substrate: primes, factoring, generators, orders, discrete logs.

Everything here is deterministic given an explicit numpy Generator, uses exact
Python integers throughout, and is sized for word-scale moduli (instance
generation is capped at 32-bit primes).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

# Deterministic Miller-Rabin witness set; exact for all inputs below 3.3e24,
# which covers everything the lab can generate.
_MR_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)

_PRIME_RETRY_CAP = 50_000
_FOUVRY_RETRY_CAP = 20_000
_GENERATOR_RETRY_CAP = 100_000

# Closed-form evaluation and ground-truth dlog recovery assume word-sized P.
MAX_INSTANCE_BITS = 32


def centered_residue(z, m):
    """Residue of z mod m in the half-open interval (-m/2, m/2].

    Integer inputs stay exact; real z is allowed (the peak conditions apply
    the residue to a real-valued expression). The upper endpoint +m/2 is
    included, the lower endpoint excluded.
    """
    if m < 1:
        raise ValueError(f"modulus must be >= 1, got {m}")
    if isinstance(z, (int, np.integer)):
        r = int(z) % m
        return r - m if 2 * r > m else r
    r = float(z) % m
    return r - m if r > m / 2 else r


def is_prime(m: int) -> bool:
    """Deterministic primality for the machine-word range (Miller-Rabin)."""
    if m < 2:
        return False
    for p in _MR_WITNESSES:
        if m == p:
            return True
        if m % p == 0:
            return False
    d = m - 1
    r = 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for a in _MR_WITNESSES:
        x = pow(a, d, m)
        if x == 1 or x == m - 1:
            continue
        for _ in range(r - 1):
            x = x * x % m
            if x == m - 1:
                break
        else:
            return False
    return True


def random_prime(n: int, rng: np.random.Generator) -> int:
    """Uniform prime of binary length n, by rejection from uniform odd candidates."""
    if n < 2:
        raise ValueError(f"bit length must be >= 2, got {n}")
    lo = 1 << (n - 1)
    n_odds = 1 << (n - 2)
    for _ in range(_PRIME_RETRY_CAP):
        candidate = lo + 1 + 2 * int(rng.integers(0, n_odds))
        if is_prime(candidate):
            return candidate
    raise RuntimeError(f"no prime of bit length {n} found in {_PRIME_RETRY_CAP} draws")


def _pollard_rho(m: int) -> int:
    """One nontrivial factor of odd composite m (deterministic parameter sweep)."""
    for c in range(1, 200):
        x = y = 2
        d = 1
        while d == 1:
            x = (x * x + c) % m
            y = (y * y + c) % m
            y = (y * y + c) % m
            d = math.gcd(abs(x - y), m)
        if d != m:
            return d
    raise ArithmeticError(f"rho sweep exhausted on {m}")


def factorize(m: int) -> dict[int, int]:
    """Prime factorization {p: exponent} by trial division plus Pollard rho."""
    if m < 1:
        raise ValueError(f"cannot factor {m}")
    out: dict[int, int] = {}
    for p in (2, 3, 5, 7, 11, 13):
        while m % p == 0:
            out[p] = out.get(p, 0) + 1
            m //= p
    d = 17
    while d * d <= m and d < 1 << 10:
        while m % d == 0:
            out[d] = out.get(d, 0) + 1
            m //= d
        d += 2
    stack = [m] if m > 1 else []
    while stack:
        q = stack.pop()
        if q == 1:
            continue
        if is_prime(q):
            out[q] = out.get(q, 0) + 1
            continue
        f = _pollard_rho(q)
        stack.append(f)
        stack.append(q // f)
    return out


def largest_prime_factor(m: int) -> int:
    """Largest prime dividing m."""
    if m < 2:
        raise ValueError(f"largest prime factor undefined for {m}")
    return max(factorize(m))


@dataclass(frozen=True)
class PrimeClassification:
    """A prime P together with the largest prime factor Q of P-1."""

    P: int
    Q: int
    fouvry_exponent: float
    is_fouvry: bool


def classify_prime(P: int) -> PrimeClassification:
    """Classify P by whether Q = largest prime factor of P-1 exceeds P^(2/3).

    The comparison is done as Q^3 > P^2 in exact integers so boundary cases
    cannot be misjudged by floating point.
    """
    if P < 3 or not is_prime(P):
        raise ValueError(f"need a prime >= 3, got {P}")
    Q = largest_prime_factor(P - 1)
    return PrimeClassification(
        P=P,
        Q=Q,
        fouvry_exponent=math.log(Q) / math.log(P),
        is_fouvry=Q**3 > P**2,
    )


def multiplicative_order(a: int, P: int) -> int:
    """Least t >= 1 with a^t = 1 mod P, via the factorization of P-1."""
    if a % P == 0:
        raise ValueError(f"{a} is 0 mod {P}")
    t = P - 1
    for q in factorize(P - 1):
        while t % q == 0 and pow(a, t // q, P) == 1:
            t //= q
    return t


def find_generator(P: int, rng: np.random.Generator) -> int:
    """Random generator of the multiplicative group mod P."""
    if P < 3 or not is_prime(P):
        raise ValueError(f"need a prime >= 3, got {P}")
    if P == 3:
        return 2
    qs = list(factorize(P - 1))
    for _ in range(_GENERATOR_RETRY_CAP):
        g = 2 + int(rng.integers(0, P - 3))
        if all(pow(g, (P - 1) // q, P) != 1 for q in qs):
            return g
    raise RuntimeError(f"no generator found mod {P} in {_GENERATOR_RETRY_CAP} draws")


def dlog_bruteforce(P: int, g: int, y: int) -> int:
    """Ground-truth discrete log by linear scan; O(P)."""
    if y % P == 0:
        raise ValueError(f"{y} is 0 mod {P}")
    y = y % P
    acc = 1
    for d in range(P - 1):
        if acc == y:
            return d
        acc = acc * g % P
    raise ArithmeticError(f"{y} not generated by {g} mod {P}")


def dlog_bsgs(P: int, g: int, y: int) -> int:
    """Discrete log by baby-step giant-step; O(sqrt(P)) time and memory."""
    if y % P == 0:
        raise ValueError(f"{y} is 0 mod {P}")
    y = y % P
    order = P - 1
    m = math.isqrt(order) + 1
    baby: dict[int, int] = {}
    acc = 1
    for j in range(m):
        baby.setdefault(acc, j)
        acc = acc * g % P
    # g^(-m) via Fermat
    stride = pow(g, (P - 1 - m) % (P - 1), P)
    gamma = y
    for i in range(m + 1):
        j = baby.get(gamma)
        if j is not None:
            return (i * m + j) % order
        gamma = gamma * stride % P
    raise ArithmeticError(f"{y} not generated by {g} mod {P}")


def additive_order(d: int, m: int) -> int:
    """Order of d in the additive group Z_m, i.e. m / gcd(d, m)."""
    if m < 1:
        raise ValueError(f"modulus must be >= 1, got {m}")
    if not 0 <= d < m:
        raise ValueError(f"need 0 <= d < {m}, got {d}")
    return m // math.gcd(d, m)


@dataclass(frozen=True)
class DlogInstance:
    """A concrete discrete-log problem: find d with g^d = y mod P.

    d is stored by the lab (it knows the ground truth and uses it only to
    define the good peak set and score success).
    """

    P: int
    n: int
    g: int
    y: int
    d: Optional[int] = None

    def __post_init__(self):
        if not is_prime(self.P):
            raise ValueError(f"P={self.P} is not prime")
        if not (1 << (self.n - 1)) <= self.P < (1 << self.n):
            raise ValueError(f"P={self.P} is not an {self.n}-bit integer")
        if multiplicative_order(self.g, self.P) != self.P - 1:
            raise ValueError(f"g={self.g} does not generate Z_{self.P}^*")
        if not 1 <= self.y <= self.P - 1:
            raise ValueError(f"y={self.y} out of range mod {self.P}")
        if self.d is not None:
            if not 0 <= self.d <= self.P - 2:
                raise ValueError(f"d={self.d} out of range")
            if pow(self.g, self.d, self.P) != self.y:
                raise ValueError(f"g^d != y for d={self.d}")


def make_instance(
    n: Optional[int] = None,
    prime_mode: str = "random",
    rng: Optional[np.random.Generator] = None,
    prime: Optional[int] = None,
) -> DlogInstance:
    """Draw a DlogInstance: pick P per mode, find a generator, draw y, solve d.

    Modes: "random" (uniform n-bit prime), "fouvry" (reject until the largest
    prime factor Q of P-1 satisfies Q^3 > P^2), "explicit" (use `prime`).
    The ground-truth d is recovered with baby-step giant-step, which matches
    the linear-scan oracle exactly and stays fast at the 32-bit cap.
    """
    if rng is None:
        raise ValueError("an explicit rng is required")
    if prime_mode == "explicit":
        if prime is None:
            raise ValueError("explicit mode needs prime=")
        P = prime
        if n is not None and P.bit_length() != n:
            raise ValueError(f"prime {P} is not {n}-bit")
    else:
        if n is None:
            raise ValueError(f"mode {prime_mode!r} needs n=")
        if n > MAX_INSTANCE_BITS:
            raise ValueError(f"instance generation capped at {MAX_INSTANCE_BITS} bits")
        if prime_mode == "random":
            P = random_prime(n, rng)
        elif prime_mode == "fouvry":
            for _ in range(_FOUVRY_RETRY_CAP):
                P = random_prime(n, rng)
                if classify_prime(P).is_fouvry:
                    break
            else:
                raise RuntimeError(
                    f"no fouvry prime of bit length {n} in {_FOUVRY_RETRY_CAP} draws"
                )
        else:
            raise ValueError(f"unknown prime_mode {prime_mode!r}")
    g = find_generator(P, rng)
    y = 1 + int(rng.integers(0, P - 1))
    d = dlog_bsgs(P, g, y)
    return DlogInstance(P=P, n=P.bit_length(), g=g, y=y, d=d)
