"""Two independent evaluators for the algorithm's measurement distribution.

The closed-form evaluator sums the per-k phases of the measured outcome
directly and scales to n around 16; the gate-level statevector simulator
(n <= 7) applies the actual noisy circuit and serves as a cross-oracle.

Bit convention: x^[j] is the bit of weight 2^j, so x^[0] is least
significant. Circuit rows are indexed j = 0..n-1 from the top; row j
Hadamards the qubit holding input bit n-1-j, its size-k rotation is
controlled by input bit n-j-k, and after the final qubit reversal the row-j
output qubit is read as output bit j. Under this convention the noise draw
r[j][i] (gate k = b+i in row j) multiplies input bit n-b-j-i, and the
noiseless part of the measured phase reduces to u*v/2^n mod 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .noise import NoiseConfig, NoiseRealization, noisy_rotation_angle
from .numtheory import DlogInstance

STATEVECTOR_MAX_BITS = 7
_TWO_PI = 2.0 * math.pi


def u_k(d: int, u_star: int, k: int, P: int) -> int:
    """The first-register value paired with k: (d*k + u_star) mod (P-1)."""
    return (d * k + u_star) % (P - 1)


def kahan_complex_sum(terms) -> complex:
    """Compensated (Kahan) summation of complex terms."""
    sr = si = cr = ci = 0.0
    for t in terms:
        yr = t.real - cr
        tr = sr + yr
        cr = (tr - sr) - yr
        sr = tr
        yi = t.imag - ci
        ti = si + yi
        ci = (ti - si) - yi
        si = ti
    return complex(sr, si)


def exact_probability(inst: DlogInstance, v: int, w: int, u_star: int) -> float:
    """Noise-free probability of measuring (v, w, g^u_star).

    Equals |sum_k exp(2 pi i (u_k v + k w)/2^n)|^2 / (2^(2n) (P-1)^2),
    accumulated with compensated summation.
    """
    n, P, d = inst.n, inst.P, inst.d
    _check_outcome(n, P, v, w, u_star)
    N = 1 << n
    M = P - 1
    total = kahan_complex_sum(
        _cis(_TWO_PI * (((d * k + u_star) % M * v + k * w) % N) / N) for k in range(M)
    )
    return abs(total) ** 2 / (N * N * M * M)


def noisy_phase(
    inst: DlogInstance,
    cfg: NoiseConfig,
    real: NoiseRealization,
    v: int,
    w: int,
    k: int,
    u_star: int,
) -> float:
    """Full phase (in turns, reduced mod 1) of the k-th term of the noisy sum.

    Noiseless part (u_k v + k w)/2^n plus, for each register, the noise term
    (epsilon/2^b) * sum_j x^[j] * sum_i draw[j][i] * val^[n-b-j-i] / 2^i
    with (x, val, draw) = (v, u_k, r) and (w, k, rho). All i-terms are
    included, not only the i = 0 terms kept by the counting analysis.
    """
    n, P, d = inst.n, inst.P, inst.d
    _check_outcome(n, P, v, w, u_star)
    N = 1 << n
    M = P - 1
    u = (d * k + u_star) % M
    phase = ((u * v + k * w) % N) / N
    if cfg.epsilon != 0.0 and cfg.b <= n:
        phase += _register_noise_turns(v, u, real.r, n, cfg.b, cfg.epsilon)
        phase += _register_noise_turns(w, k, real.rho, n, cfg.b, cfg.epsilon)
    return phase % 1.0


def _register_noise_turns(sel: int, val: int, rows, n: int, b: int, epsilon: float) -> float:
    scale = epsilon / 2.0**b
    acc = 0.0
    for j in range(n - b + 1):
        if (sel >> j) & 1:
            row = rows[j]
            s = 0.0
            for i in range(n - b - j + 1):
                if (val >> (n - b - j - i)) & 1:
                    s += float(row[i]) / 2.0**i
            acc += s
    return scale * acc


def noisy_probability(
    inst: DlogInstance,
    cfg: NoiseConfig,
    real: NoiseRealization,
    v: int,
    w: int,
    u_star: int,
) -> float:
    """Probability of measuring (v, w, g^u_star) under the noisy transform."""
    n, P = inst.n, inst.P
    N = 1 << n
    M = P - 1
    total = kahan_complex_sum(
        _cis(_TWO_PI * noisy_phase(inst, cfg, real, v, w, k, u_star)) for k in range(M)
    )
    return abs(total) ** 2 / (N * N * M * M)


def _cis(x: float) -> complex:
    return complex(math.cos(x), math.sin(x))


def _check_outcome(n: int, P: int, v: int, w: int, u_star: int) -> None:
    N = 1 << n
    if not (0 <= v < N and 0 <= w < N):
        raise ValueError(f"(v, w)=({v}, {w}) out of range for n={n}")
    if not 0 <= u_star <= P - 2:
        raise ValueError(f"u_star={u_star} out of range for P={P}")


# ---------------------------------------------------------------------------
# Vectorized closed-form evaluation
# ---------------------------------------------------------------------------


def _bit_matrix(values: np.ndarray, width: int) -> np.ndarray:
    """Rows of bits: out[i, s] = bit s of values[i], as float64."""
    return ((values[:, None] >> np.arange(width)[None, :]) & 1).astype(np.float64)


def _noise_phase_table(rows, n: int, b: int, epsilon: float, count: int) -> Optional[np.ndarray]:
    """Per-value noise tables T[x, j] = (eps/2^b) sum_i rows[j][i] x^[n-b-j-i]/2^i.

    T has shape (count, n-b+1); selector bits contracted against T give the
    register's noise phase in turns. Returns None when noise is off.
    """
    if epsilon == 0.0 or b > n:
        return None
    R = n - b + 1
    coef = np.zeros((R, n))
    for j in range(R):
        row = rows[j]
        for i in range(n - b - j + 1):
            coef[j, n - b - j - i] = float(row[i]) / 2.0**i
    bits = _bit_matrix(np.arange(count, dtype=np.int64), n)
    return (epsilon / 2.0**b) * (bits @ coef.T)


def _phase_factor_rows(values: np.ndarray, table: Optional[np.ndarray], n: int, count: int) -> np.ndarray:
    """E[i, x] = exp(2 pi i (x*values[i]/2^n + noise(values[i], x)))."""
    N = 1 << n
    xs = np.arange(count, dtype=np.int64)
    phase = (np.outer(values.astype(np.int64), xs) % N).astype(np.float64) / N
    if table is not None:
        sel = _bit_matrix(values.astype(np.int64), table.shape[1])
        phase = phase + sel @ table.T
    return np.exp((2j * np.pi) * phase)


class PairEvaluator:
    """Closed-form probabilities for a fixed pair list, shared across u_star.

    Builds the per-value phase-factor tables once per (instance, config,
    realization); probabilities(u_star) is then a gather plus a row-wise
    reduction. The k-axis reduction uses numpy pairwise summation; agreement
    with the compensated scalar path is pinned to 1e-12 by tests.
    """

    def __init__(
        self,
        inst: DlogInstance,
        cfg: NoiseConfig,
        real: NoiseRealization,
        v_values,
        w_values,
    ):
        if inst.d is None:
            raise ValueError("instance must carry its ground-truth d")
        if real.n != inst.n or real.b != cfg.b:
            raise ValueError("realization shape does not match instance/config")
        self.inst = inst
        self.n = inst.n
        self.N = 1 << inst.n
        self.M = inst.P - 1
        v_arr = np.asarray(v_values, dtype=np.int64)
        w_arr = np.asarray(w_values, dtype=np.int64)
        if v_arr.shape != w_arr.shape:
            raise ValueError("v and w lists must have equal length")
        t_u = _noise_phase_table(real.r, inst.n, cfg.b, cfg.epsilon, self.M)
        t_k = _noise_phase_table(real.rho, inst.n, cfg.b, cfg.epsilon, self.M)
        self._eu = _phase_factor_rows(v_arr, t_u, inst.n, self.M)
        self._ek = _phase_factor_rows(w_arr, t_k, inst.n, self.M)
        self._base = (inst.d * np.arange(self.M, dtype=np.int64)) % self.M
        self._scale = 1.0 / (float(self.N) ** 2 * float(self.M) ** 2)

    def probabilities(self, u_star: int) -> np.ndarray:
        """p(v_i, w_i, g^u_star) for every pair i."""
        cols = (self._base + u_star) % self.M
        amp = (self._eu[:, cols] * self._ek).sum(axis=1)
        return (amp.real**2 + amp.imag**2) * self._scale

    def mass(self, u_star: int) -> float:
        return float(self.probabilities(u_star).sum())


@dataclass(frozen=True, eq=False)
class MeasurementDistribution:
    """Probabilities p(v, w, g^u_star), indexed probs[v, w, u_star].

    The third register only ever holds powers of g, so u_star in [0, P-2]
    enumerates its full support.
    """

    n: int
    P: int
    probs: np.ndarray
    source: str
    realization_id: Optional[int] = None

    def prob(self, v: int, w: int, u_star: int) -> float:
        return float(self.probs[v, w, u_star])

    def total(self) -> float:
        return float(self.probs.sum())

    def max_abs_diff(self, other: "MeasurementDistribution") -> float:
        return float(np.max(np.abs(self.probs - other.probs)))

    def good_mass(self, peak_set) -> float:
        """Total probability of landing on a pair of the given peak set."""
        acc = 0.0
        for v, w in peak_set.pairs():
            acc += float(self.probs[v, w, :].sum())
        return acc


def closed_form_distribution(
    inst: DlogInstance,
    cfg: NoiseConfig,
    real: NoiseRealization,
    realization_id: Optional[int] = None,
) -> MeasurementDistribution:
    """Full (v, w, u_star) distribution from the closed-form phase sums."""
    if inst.n > STATEVECTOR_MAX_BITS:
        raise ValueError(
            f"full-grid closed form capped at n={STATEVECTOR_MAX_BITS}, got {inst.n}"
        )
    n, P = inst.n, inst.P
    N = 1 << n
    M = P - 1
    t_u = _noise_phase_table(real.r, n, cfg.b, cfg.epsilon, M)
    t_k = _noise_phase_table(real.rho, n, cfg.b, cfg.epsilon, M)
    all_vals = np.arange(N, dtype=np.int64)
    eu = _phase_factor_rows(all_vals, t_u, n, M)
    ek = _phase_factor_rows(all_vals, t_k, n, M)
    base = (inst.d * np.arange(M, dtype=np.int64)) % M
    scale = 1.0 / (float(N) ** 2 * float(M) ** 2)
    probs = np.empty((N, N, M))
    for u_star in range(M):
        amp = eu[:, (base + u_star) % M] @ ek.T
        probs[:, :, u_star] = (amp.real**2 + amp.imag**2) * scale
    return MeasurementDistribution(
        n=n, P=P, probs=probs, source="closed_form", realization_id=realization_id
    )


# ---------------------------------------------------------------------------
# Gate-level statevector simulation
# ---------------------------------------------------------------------------


def _hadamard(psi: np.ndarray, axis: int) -> np.ndarray:
    a = np.take(psi, 0, axis=axis)
    b = np.take(psi, 1, axis=axis)
    inv = 1.0 / math.sqrt(2.0)
    return np.stack(((a + b) * inv, (a - b) * inv), axis=axis)


def _controlled_phase(psi: np.ndarray, axis_c: int, axis_t: int, theta: float) -> None:
    idx = [slice(None)] * psi.ndim
    idx[axis_c] = 1
    idx[axis_t] = 1
    psi[tuple(idx)] *= complex(math.cos(theta), math.sin(theta))


def _apply_noisy_qft(psi, first_axis: int, n: int, b: int, epsilon: float, rows) -> np.ndarray:
    """Hadamards plus controlled rotations on one register, then qubit reversal.

    Axis first_axis + j holds input bit n-1-j; row j's size-k gate (k >= b
    noisy, drawing rows[j][k-b]) is controlled by axis first_axis + j + k - 1.
    """
    for j in range(n):
        target = first_axis + j
        psi = _hadamard(psi, target)
        for k in range(2, n - j + 1):
            control = first_axis + j + k - 1
            r = float(rows[j][k - b]) if k >= b else 0.0
            theta = noisy_rotation_angle(k, b, epsilon, r)
            _controlled_phase(psi, control, target, theta)
    perm = list(range(psi.ndim))
    perm[first_axis : first_axis + n] = reversed(perm[first_axis : first_axis + n])
    return np.transpose(psi, perm)


def statevector_run(
    inst: DlogInstance,
    cfg: NoiseConfig,
    real: NoiseRealization,
    realization_id: Optional[int] = None,
) -> MeasurementDistribution:
    """Exact Born distribution from the gate-level noisy circuit.

    Prepares the three-register superposition by direct amplitude assignment
    (uniform over (u, k), third register g^(u-dk) mod P), applies the noisy
    transform to registers one and two with the r and rho draws, and reads
    off |amplitude|^2 for every computational-basis outcome.
    """
    n, P, d = inst.n, inst.P, inst.d
    if d is None:
        raise ValueError("instance must carry its ground-truth d")
    if n > STATEVECTOR_MAX_BITS:
        raise ValueError(f"statevector path capped at n={STATEVECTOR_MAX_BITS}, got {n}")
    if real.n != n or real.b != cfg.b:
        raise ValueError("realization shape does not match instance/config")
    N = 1 << n
    M = P - 1

    pow_table = np.empty(M, dtype=np.int64)
    acc = 1
    for j in range(M):
        pow_table[j] = acc
        acc = acc * inst.g % P

    psi = np.zeros((N, N, N), dtype=np.complex128)
    uu, kk = np.meshgrid(np.arange(M), np.arange(M), indexing="ij")
    psi[uu, kk, pow_table[(uu - d * kk) % M]] = 1.0 / M

    psi = psi.reshape((2,) * (3 * n))
    psi = _apply_noisy_qft(psi, 0, n, cfg.b, cfg.epsilon, real.r)
    psi = _apply_noisy_qft(psi, n, n, cfg.b, cfg.epsilon, real.rho)
    full = np.abs(psi.reshape(N, N, N)) ** 2

    probs = full[:, :, pow_table]
    # no amplitude may leak outside the powers-of-g support
    leak = full.sum() - probs.sum()
    if abs(leak) > 1e-12:
        raise AssertionError(f"third-register support leak: {leak}")
    return MeasurementDistribution(
        n=n, P=P, probs=probs, source="statevector", realization_id=realization_id
    )
