"""Good Fourier-peak sets and the counting machinery around them.

A pair (v, w) is a good peak when the centered residue of v(P-1) mod 2^n is
small (magnitude below 2^n/C) and w sits in a window of half-width gamma
around -v*d + (d/(P-1)) * {v(P-1)}_{2^n} mod 2^n. The original algorithm uses
the closed window gamma = 1/2 with C = 12; the relaxed variant opens the
window to a polynomial gamma with an arbitrary constant C.

Window membership is decided entirely in exact rational arithmetic (gamma is
carried as a Fraction and d/(P-1) is rational), so threshold boundaries can
never be misclassified by floating point.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Mapping, Optional

import numpy as np

from .numtheory import DlogInstance, centered_residue

PEAKSET_FORMAT_VERSION = 1


def binary_entropy(delta: float) -> float:
    """H2(delta) = -delta*log2(delta) - (1-delta)*log2(1-delta); 0 at both ends."""
    if not 0.0 <= delta <= 1.0:
        raise ValueError(f"delta must be in [0, 1], got {delta}")
    if delta == 0.0 or delta == 1.0:
        return 0.0
    return -delta * math.log2(delta) - (1.0 - delta) * math.log2(1.0 - delta)


def deviation(v: int, w: int, d: int, P: int, n: int) -> float:
    """Distance of (v, w) from its ideal peak position, as a real number.

    |{v*d + w - (d/(P-1)) * {v(P-1)}_{2^n}}_{2^n}| evaluated in double
    precision; the exact-rational window in build_peak_set is authoritative
    at boundaries.
    """
    N = 1 << n
    m = centered_residue(v * (P - 1), N)
    return abs(centered_residue(v * d + w - d * m / (P - 1), N))


@dataclass(frozen=True)
class PeakSetParams:
    """Window parameters: half-width gamma, v-condition divisor C, window mode.

    mode "closed" admits deviations <= gamma (the original algorithm, with
    gamma = 1/2); mode "open" admits strict < gamma (the relaxed variant).
    """

    gamma: Fraction
    C: int
    mode: str

    def __post_init__(self):
        object.__setattr__(self, "gamma", Fraction(self.gamma))
        if self.gamma < Fraction(1, 2):
            raise ValueError(f"gamma must be >= 1/2, got {self.gamma}")
        if self.C < 2:
            raise ValueError(f"C must be >= 2, got {self.C}")
        if self.mode not in ("closed", "open"):
            raise ValueError(f"mode must be 'closed' or 'open', got {self.mode!r}")

    @staticmethod
    def original() -> "PeakSetParams":
        return PeakSetParams(gamma=Fraction(1, 2), C=12, mode="closed")

    @staticmethod
    def relaxed(gamma, C: int = 12) -> "PeakSetParams":
        return PeakSetParams(gamma=Fraction(gamma), C=C, mode="open")


@dataclass(frozen=True)
class PeakSet:
    """The enumerated good set for one instance: per-v admissible w lists.

    Derived data: pi1 (the admitted v values), per-v S_v sizes, and the
    subset of pi1 whose S_v is large (|S_v| >= delta1*(n-b)), which defines
    the high-noise-exposure subset of pairs.
    """

    n: int
    P: int
    d: int
    b: int
    delta1: float
    params: PeakSetParams
    v_to_ws: Mapping[int, tuple]
    pi1: tuple
    sv_sizes: Mapping[int, int]
    gprime_pi1: frozenset

    def pairs(self) -> Iterator[tuple]:
        for v in self.pi1:
            for w in self.v_to_ws[v]:
                yield (v, w)

    def size(self) -> int:
        return sum(len(ws) for ws in self.v_to_ws.values())

    def contains(self, v: int, w: int) -> bool:
        return w in self.v_to_ws.get(v, ())

    def in_gprime(self, v: int) -> bool:
        return v in self.gprime_pi1

    def gprime_size(self) -> int:
        return sum(len(self.v_to_ws[v]) for v in self.gprime_pi1)

    def to_text(self) -> str:
        """Line-oriented serialization: header comments, then 'v: w w ...'."""
        lines = [
            f"# peakset {PEAKSET_FORMAT_VERSION}",
            f"# n={self.n} P={self.P} d={self.d} b={self.b} delta1={self.delta1!r} "
            f"gamma={self.params.gamma} C={self.params.C} mode={self.params.mode}",
        ]
        for v in self.pi1:
            ws = " ".join(str(w) for w in self.v_to_ws[v])
            lines.append(f"{v}: {ws}")
        return "\n".join(lines) + "\n"

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_text())


def parse_peak_set_text(text: str) -> dict:
    """Parse the serialized form back into header fields and the v -> w map."""
    header = {}
    v_to_ws = {}
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line.lstrip("# ")
            if body.startswith("peakset"):
                header["format_version"] = int(body.split()[1])
                continue
            for token in body.split():
                key, val = token.split("=", 1)
                header[key] = val
            continue
        v_part, w_part = line.split(":", 1)
        v_to_ws[int(v_part)] = tuple(int(t) for t in w_part.split())
    return {"header": header, "v_to_ws": v_to_ws}


def _window_int_range(lo: Fraction, hi: Fraction, closed: bool) -> tuple:
    """Integer endpoints of [lo, hi] (closed) or (lo, hi) (open)."""
    if closed:
        return math.ceil(lo), math.floor(hi)
    lo_i = math.floor(lo) + 1 if lo.denominator == 1 else math.ceil(lo)
    hi_i = math.ceil(hi) - 1 if hi.denominator == 1 else math.floor(hi)
    return lo_i, hi_i


def build_peak_set(
    inst: DlogInstance,
    params: PeakSetParams,
    b: int = 2,
    delta1: float = 0.4,
) -> PeakSet:
    """Enumerate the good set of an instance under the given window params.

    For every v with |{v(P-1)}_{2^n}| * C < 2^n, the admissible w are the
    integers in the window of half-width gamma around
    (d/(P-1)) * {v(P-1)}_{2^n} - v*d, taken mod 2^n. Endpoint membership
    follows params.mode and is decided in exact rationals.
    """
    if inst.d is None:
        raise ValueError("instance must carry its ground-truth d")
    if inst.n > 24:
        raise ValueError(f"peak enumeration capped at n=24, got {inst.n}")
    if not 2 <= b:
        raise ValueError(f"b must be >= 2, got {b}")
    n, P, d = inst.n, inst.P, inst.d
    N = 1 << n
    if params.mode == "open" and (Fraction(P - 1) * params.gamma).denominator == 1:
        warnings.warn(
            f"(P-1)*gamma = {(P - 1) * params.gamma} is an integer; the per-v "
            "w-window count is no longer guaranteed to be constant",
            UserWarning,
            stacklevel=2,
        )
    closed = params.mode == "closed"
    v_to_ws = {}
    sv_sizes = {}
    gprime = []
    sv_threshold = delta1 * (n - b)
    for v in range(N):
        m = centered_residue(v * (P - 1), N)
        if abs(m) * params.C >= N:
            continue
        center = Fraction(d * m, P - 1) - v * d
        lo_i, hi_i = _window_int_range(center - params.gamma, center + params.gamma, closed)
        if hi_i < lo_i:
            continue
        if hi_i - lo_i + 1 >= N:
            ws = tuple(range(N))
        else:
            ws = tuple(sorted({wi % N for wi in range(lo_i, hi_i + 1)}))
        v_to_ws[v] = ws
        size = _sv_size(v, n, b)
        sv_sizes[v] = size
        if size >= sv_threshold:
            gprime.append(v)
    return PeakSet(
        n=n,
        P=P,
        d=d,
        b=b,
        delta1=delta1,
        params=params,
        v_to_ws=v_to_ws,
        pi1=tuple(sorted(v_to_ws)),
        sv_sizes=sv_sizes,
        gprime_pi1=frozenset(gprime),
    )


def _sv_size(v: int, n: int, b: int) -> int:
    return ((v & ((1 << (n - b + 1)) - 1))).bit_count() if b <= n else 0


def s_v(v: int, n: int, b: int) -> frozenset:
    """Positions s in [0, n-b] where bit s of v is one."""
    _check_nb(n, b)
    return frozenset(s for s in range(n - b + 1) if (v >> s) & 1)


def s_v_prime(v: int, n: int, b: int) -> frozenset:
    """The mirrored index set {n-b-j for j in S_v}."""
    return frozenset(n - b - j for j in s_v(v, n, b))


def j_set(v: int, u_val: int, n: int, b: int) -> frozenset:
    """Indices j in [0, n-b] where both v^[j] and u^[n-b-j] are one."""
    _check_nb(n, b)
    return frozenset(
        j for j in range(n - b + 1) if (v >> j) & 1 and (u_val >> (n - b - j)) & 1
    )


def sym_diff_card(v: int, u1: int, u2: int, n: int, b: int) -> int:
    """|j_set(v,u1) symmetric-difference j_set(v,u2)|, via a bit mask.

    Equals the number of positions of S'_v where u1 and u2 disagree.
    """
    _check_nb(n, b)
    mask = 0
    for s in s_v_prime(v, n, b):
        mask |= 1 << s
    return ((u1 ^ u2) & mask).bit_count()


def _check_nb(n: int, b: int) -> None:
    if not 2 <= b <= n:
        raise ValueError(f"need 2 <= b <= n, got b={b}, n={n}")


def small_diff_pair_fraction(v: int, u_values, n: int, b: int, delta2: float) -> float:
    """Fraction of unordered pairs of distinct u values whose bit patterns on
    S'_v differ in fewer than delta2*|S_v| positions.

    Values are bucketed by their restriction to the S'_v positions, so the
    scan is quadratic in the number of distinct restrictions rather than in
    the number of values.
    """
    mask = 0
    for s in s_v_prime(v, n, b):
        mask |= 1 << s
    threshold = delta2 * len(s_v(v, n, b))
    u_arr = np.unique(np.asarray(list(u_values), dtype=np.int64))
    total_pairs = len(u_arr) * (len(u_arr) - 1) // 2
    if total_pairs == 0:
        return 0.0
    restricted = u_arr & mask
    keys, counts = np.unique(restricted, return_counts=True)
    keys_u = keys.astype(np.uint64)
    small = 0
    for i in range(len(keys)):
        pops = np.bitwise_count(keys_u[i] ^ keys_u)
        hit = pops < threshold
        # same-bucket pairs always have zero difference on S'_v
        small += int(counts[i] * (counts[i] - 1) // 2) if hit[i] else 0
        j = np.nonzero(hit[i + 1 :])[0] + i + 1
        small += int((counts[i] * counts[j]).sum())
    return small / total_pairs


def zeta_bound(n: int, b: int, c1: float, delta1: float, delta2: float) -> tuple:
    """The exponential bound on the fraction of index-set pairs too close to
    dephase: returns (per-bit exponent, zeta).

    zeta = 2^((1-c1)n - (1-H2(delta2)) delta1 (n-b)); the per-bit exponent is
    the n-coefficient 1 - c1 - (1-H2(delta2))*delta1.
    """
    if not 0.5 < c1 < 1.0:
        raise ValueError(f"need 1/2 < c1 < 1, got {c1}")
    if not 0.0 < delta2 < delta1 < 0.5:
        raise ValueError(f"need 0 < delta2 < delta1 < 1/2, got {delta2}, {delta1}")
    if b > n:
        raise ValueError(f"need b <= n, got b={b}, n={n}")
    h2 = binary_entropy(delta2)
    exponent = 1.0 - c1 - (1.0 - h2) * delta1
    zeta = 2.0 ** ((1.0 - c1) * n - (1.0 - h2) * delta1 * (n - b))
    return exponent, zeta


def condition_check(n: int, b: int, epsilon: float, c: float, c_star: float) -> bool:
    """Whether b + log2(1/eps) <= (1-c)/2 * log2(n) - log2(1/c*)/2.

    Evaluated in floating point; exact ties resolve to False.
    """
    if not 0.0 < c < 1.0:
        raise ValueError(f"need 0 < c < 1, got {c}")
    if not 0.0 < c_star <= 1.0:
        raise ValueError(f"need 0 < c* <= 1, got {c_star}")
    if epsilon <= 0.0:
        raise ValueError(f"need epsilon > 0, got {epsilon}")
    lhs = b + math.log2(1.0 / epsilon)
    rhs = (1.0 - c) / 2.0 * math.log2(n) - 0.5 * math.log2(1.0 / c_star)
    return lhs < rhs


def entropy_count_check(ell: int, delta: float) -> tuple:
    """Exact low-weight pattern count against its entropy bound.

    Returns (sum_{i<=floor(delta*ell)} C(ell, i), 2^(H2(delta)*ell)).
    """
    if not 1 <= ell <= 30:
        raise ValueError(f"need 1 <= ell <= 30, got {ell}")
    if not 0.0 < delta < 0.5:
        raise ValueError(f"need 0 < delta < 1/2, got {delta}")
    count = sum(math.comb(ell, i) for i in range(math.floor(delta * ell) + 1))
    return count, 2.0 ** (binary_entropy(delta) * ell)
