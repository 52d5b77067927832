"""Monte Carlo verification of the dephasing expectation bound.

The bound: for index sets J_1..J_K over i.i.d. standard normals r_i, with at
most a fraction zeta of unordered pairs having |J_k symdiff J_k'| below
a^2 * t, the expected squared modulus of sum_k omega_a^(phi_k + Sigma_k)
(omega_a = exp(2 pi i / a), Sigma_k = sum_{i in J_k} r_i) is at most
K + 2*zeta*C(K,2) + 2*C(K,2)*exp(-2 pi^2 t).

Instances come either from synthetic set families or extracted from the
J-structure of a real discrete-log instance at a fixed first-register value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .noise import NoiseConfig, NoiseRealization
from .numtheory import DlogInstance
from .peaks import PeakSetParams, build_peak_set, j_set

# beyond this many sets the pair scan switches to uniform pair sampling
ZETA_EXACT_PAIR_CAP = 10_000
_ZETA_SAMPLE_PAIRS = 2_000_000


@dataclass(frozen=True, eq=False)
class LemmaInstance:
    """One bound-check input: (a, t), K index sets over [0, universe), offsets.

    zeta_emp is the fraction of unordered set pairs whose symmetric
    difference has fewer than a^2 * t elements; zeta_se is zero when the
    pair scan was exact and the sampling standard error otherwise.
    """

    a: float
    t: float
    universe: int
    sets: tuple
    phases: np.ndarray
    zeta_emp: float
    zeta_se: float = 0.0

    @property
    def K(self) -> int:
        return len(self.sets)

    def __post_init__(self):
        if not (self.a > 0 and self.t > 0):
            raise ValueError(f"need a, t > 0, got a={self.a}, t={self.t}")
        if len(self.phases) != len(self.sets):
            raise ValueError("phases and sets must have equal length")


def _set_masks(sets: Sequence[frozenset]) -> np.ndarray:
    masks = np.zeros(len(sets), dtype=np.uint64)
    for k, js in enumerate(sets):
        m = 0
        for j in js:
            m |= 1 << j
        masks[k] = m
    return masks


def pair_fraction_below(
    sets: Sequence[frozenset],
    threshold: float,
    rng: Optional[np.random.Generator] = None,
) -> tuple:
    """Fraction of unordered pairs with |J_k symdiff J_k'| < threshold.

    Exact O(K^2) scan up to ZETA_EXACT_PAIR_CAP sets; beyond that a uniform
    pair-sampling estimate with its binomial standard error (an rng is then
    required). Returns (fraction, standard_error).
    """
    K = len(sets)
    if K < 2:
        return 0.0, 0.0
    masks = _set_masks(sets)
    if K <= ZETA_EXACT_PAIR_CAP:
        small = 0
        chunk = max(1, (1 << 22) // K)
        for lo in range(0, K, chunk):
            hi = min(lo + chunk, K)
            pops = np.bitwise_count(masks[lo:hi, None] ^ masks[None, :])
            below = pops < threshold
            tri = np.tril(np.ones((hi - lo, K), dtype=bool), k=lo - 1)
            small += int((below & tri).sum())
        total = K * (K - 1) // 2
        return small / total, 0.0
    if rng is None:
        raise ValueError(f"K={K} exceeds the exact-scan cap; rng required for sampling")
    n_pairs = _ZETA_SAMPLE_PAIRS
    i = rng.integers(0, K, size=n_pairs)
    j = rng.integers(0, K - 1, size=n_pairs)
    j = np.where(j >= i, j + 1, j)  # uniform over ordered distinct pairs
    frac = float((np.bitwise_count(masks[i] ^ masks[j]) < threshold).mean())
    se = math.sqrt(max(frac * (1.0 - frac), 1.0 / n_pairs) / n_pairs)
    return frac, se


def make_lemma_instance(
    a: float,
    t: float,
    sets: Sequence[frozenset],
    phases,
    universe: int,
    rng: Optional[np.random.Generator] = None,
) -> LemmaInstance:
    """Assemble a LemmaInstance, computing zeta_emp over all unordered pairs."""
    phases = np.asarray(phases, dtype=float)
    zeta, se = pair_fraction_below(sets, a * a * t, rng=rng)
    return LemmaInstance(
        a=a, t=t, universe=universe, sets=tuple(sets), phases=phases,
        zeta_emp=zeta, zeta_se=se,
    )


def lemma_bound(K: int, zeta: float, t: float) -> float:
    """K + 2*zeta*C(K,2) + 2*C(K,2)*exp(-2 pi^2 t)."""
    if K < 1:
        raise ValueError(f"need K >= 1, got {K}")
    if not 0.0 <= zeta <= 1.0:
        raise ValueError(f"need 0 <= zeta <= 1, got {zeta}")
    if t <= 0:
        raise ValueError(f"need t > 0, got {t}")
    pairs = math.comb(K, 2)
    return K + 2.0 * zeta * pairs + 2.0 * pairs * math.exp(-2.0 * math.pi**2 * t)


def mc_mean(
    instance: LemmaInstance,
    trials: int,
    rng: np.random.Generator,
    batch_size: int = 4096,
) -> tuple:
    """Empirical (mean, standard error) of |sum_k omega_a^(phi_k + Sigma_k)|^2.

    Each trial draws a fresh normal vector over the index universe. Trial
    values are reduced with math.fsum, so the result does not depend on the
    batch split beyond 1e-12.
    """
    if trials < 1:
        raise ValueError(f"need trials >= 1, got {trials}")
    K = instance.K
    membership = np.zeros((instance.universe, K))
    for k, js in enumerate(instance.sets):
        for j in js:
            membership[j, k] = 1.0
    omega_exponent = (2.0 * math.pi / instance.a) * 1j
    phase_factor = np.exp(omega_exponent * instance.phases)
    ceiling = K * K * (1.0 + 1e-12) + 1e-12
    values = np.empty(trials)
    done = 0
    while done < trials:
        m = min(batch_size, trials - done)
        draws = rng.standard_normal((m, instance.universe))
        sigma = draws @ membership
        total = (np.exp(omega_exponent * sigma) * phase_factor).sum(axis=1)
        vals = total.real**2 + total.imag**2
        if np.any(vals > ceiling):
            raise AssertionError("trial value exceeded the K^2 modulus ceiling")
        values[done : done + m] = vals
        done += m
    mean = math.fsum(values) / trials
    if trials == 1:
        return mean, 0.0
    var = math.fsum((x - mean) ** 2 for x in values) / (trials - 1)
    return mean, math.sqrt(var / trials)


def synthetic_instance(
    K: int,
    set_size: int,
    universe: int,
    a: float,
    t: float,
    rng: np.random.Generator,
) -> LemmaInstance:
    """Random family of K subsets of the given size with uniform phases."""
    if set_size > universe:
        raise ValueError(f"set_size {set_size} exceeds universe {universe}")
    sets = []
    for _ in range(K):
        picks = rng.choice(universe, size=set_size, replace=False) if set_size else []
        sets.append(frozenset(int(x) for x in picks))
    phases = rng.uniform(0.0, 2.0 * math.pi, size=K)
    return make_lemma_instance(a, t, sets, phases, universe, rng=rng)


def extract_lemma_instance(
    inst: DlogInstance,
    real: NoiseRealization,
    v: int,
    b: int,
    epsilon: float,
    t: float,
    u_star: int = 0,
    w: Optional[int] = None,
    delta1: float = 0.4,
) -> LemmaInstance:
    """Build the bound-check input for one first-register value of an instance.

    J_k collects the kept noise indices {j : v^[j] = u_k^[n-b-j] = 1} for
    k in [0, P-2], with a = 2^b / epsilon. The dropped terms (the noiseless
    phase and the second register's rho draws at the given w) become the
    fixed offsets phi_k, stored in omega_a exponent units reduced mod a so
    the summands match the measured-probability terms exactly. w defaults to
    the admissible w for v in the original peak set.
    """
    if inst.d is None:
        raise ValueError("instance must carry its ground-truth d")
    if epsilon == 0.0:
        raise ValueError("epsilon = 0 leaves a = 2^b/epsilon undefined")
    n, P, d = inst.n, inst.P, inst.d
    N = 1 << n
    M = P - 1
    a = 2.0**b / epsilon
    if w is None:
        pk = build_peak_set(inst, PeakSetParams.original(), b=b, delta1=delta1)
        ws = pk.v_to_ws.get(v)
        if not ws:
            raise ValueError(f"v={v} is not in the good set of this instance")
        w = ws[0]
    sets = []
    phases = np.empty(M)
    for k in range(M):
        u = (d * k + u_star) % M
        sets.append(j_set(v, u, n, b))
        theta = ((u * v + k * w) % N) / N
        theta += _rho_offset_turns(w, k, real, n, b, epsilon)
        phases[k] = (a * theta) % a
    return make_lemma_instance(a, t, sets, phases, universe=n - b + 1)


def _rho_offset_turns(w: int, k: int, real: NoiseRealization, n: int, b: int, epsilon: float) -> float:
    if b > n:
        return 0.0
    scale = epsilon / 2.0**b
    acc = 0.0
    for j in range(n - b + 1):
        if (w >> j) & 1:
            row = real.rho[j]
            for i in range(n - b - j + 1):
                if (k >> (n - b - j - i)) & 1:
                    acc += float(row[i]) / 2.0**i
    return scale * acc
