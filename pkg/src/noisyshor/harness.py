"""Experiment orchestration: success-mass estimation, sweeps, scans, CSV output.

All randomness flows from a single master seed through documented stream
derivations (see noise.derive_seed): instance streams use tag 1, sweep cells
tag 2, baselines tag 3. Re-running any mode with the same configuration and
seed reproduces every numeric output field byte for byte; wall-clock columns
are the one exception.
"""

from __future__ import annotations

import csv
import io
import json
import math
import time
import warnings
from dataclasses import dataclass, field, asdict
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .noise import NoiseConfig, derive_seed, sample_noise, zero_noise
from .numtheory import (
    DlogInstance,
    additive_order,
    classify_prime,
    make_instance,
    random_prime,
)
from .peaks import PeakSetParams, build_peak_set, condition_check, zeta_bound
from .qft import PairEvaluator

SCHEMA_VERSION = 1

CSV_COLUMNS = [
    "schema_version",
    "mode",
    "n",
    "P",
    "g",
    "y",
    "d",
    "Q",
    "b",
    "epsilon",
    "gamma",
    "C",
    "trials",
    "ustar_samples",
    "estimate",
    "std_err",
    "baseline",
    "zeta",
    "condition_ok",
    "seed",
    "wall_ms",
]

# diagnostics reported alongside every sweep cell
_DIAG_C1 = 2.0 / 3.0
_DIAG_DELTA1 = 0.4
_DIAG_DELTA2 = 1.0 / 64.0
_DIAG_C = 0.5
_DIAG_C_STAR = 1.0


@dataclass
class ExperimentConfig:
    """One experiment request; mirrors the CLI flags and the JSON config file."""

    mode: str = "simulate"
    n_values: tuple = (8,)
    b: int = 2
    epsilons: tuple = (0.0, 1.0)
    prime_mode: str = "random"
    prime: Optional[int] = None
    gamma: Fraction = Fraction(1, 2)
    C: int = 12
    trials: int = 20
    ustar_samples: int = 64
    master_seed: int = 2024
    out: Optional[str] = None
    fmt: str = "csv"
    x_max: int = 100_000
    c1: Fraction = Fraction(2, 3)
    samples: int = 2000

    def __post_init__(self):
        self.n_values = tuple(self.n_values)
        self.epsilons = tuple(float(e) for e in self.epsilons)
        self.gamma = Fraction(self.gamma)
        self.c1 = Fraction(self.c1)
        if not self.n_values and self.prime is None:
            raise ValueError("need at least one n value or an explicit prime")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.ustar_samples < 1:
            raise ValueError("ustar_samples must be >= 1")

    def peak_params(self) -> PeakSetParams:
        # gamma = 1/2 selects the original closed window, anything wider the
        # relaxed open window
        if self.gamma == Fraction(1, 2):
            return PeakSetParams(gamma=self.gamma, C=self.C, mode="closed")
        return PeakSetParams(gamma=self.gamma, C=self.C, mode="open")

    @staticmethod
    def from_dict(data: dict) -> "ExperimentConfig":
        kwargs = dict(data)
        if "gamma" in kwargs:
            kwargs["gamma"] = Fraction(str(kwargs["gamma"]))
        if "c1" in kwargs:
            kwargs["c1"] = Fraction(str(kwargs["c1"]))
        for key in ("n_values", "epsilons"):
            if key in kwargs:
                kwargs[key] = tuple(kwargs[key])
        return ExperimentConfig(**kwargs)


@dataclass
class ResultRecord:
    """One sweep cell: config echo, instance identifiers, estimate and diagnostics."""

    schema_version: int
    mode: str
    n: int
    P: int
    g: int
    y: int
    d: int
    Q: int
    b: int
    epsilon: float
    gamma: str
    C: int
    trials: int
    ustar_samples: int
    estimate: float
    std_err: float
    baseline: float
    zeta: float
    condition_ok: bool
    seed: int
    wall_ms: int

    def __post_init__(self):
        if not 0.0 <= self.estimate <= 1.0:
            raise ValueError(f"estimate {self.estimate} outside [0, 1]")


def estimate_success_mass(
    inst: DlogInstance,
    cfg: NoiseConfig,
    params: PeakSetParams,
    trials: int,
    ustar_samples: int,
    rng: np.random.Generator,
    delta1: float = 0.4,
) -> tuple:
    """Mean mass on the good set over noise realizations, with standard error.

    Per trial: draw one noise realization, then ustar_samples values of
    u_star uniformly without replacement; the trial estimate is (P-1) times
    the mean over sampled u_star of the good-set mass at that u_star. With
    the full u_star range the estimate is exact in u_star. epsilon = 0 is
    realization-independent, so the phase tables are built once and the rng
    is consumed only by the u_star draws.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    pk = build_peak_set(inst, params, b=cfg.b, delta1=delta1)
    if pk.size() == 0:
        warnings.warn("empty peak set; success mass is trivially 0", UserWarning)
        return 0.0, 0.0
    pairs = list(pk.pairs())
    v_arr = np.array([p[0] for p in pairs], dtype=np.int64)
    w_arr = np.array([p[1] for p in pairs], dtype=np.int64)
    M = inst.P - 1
    m_u = min(ustar_samples, M)
    full_u = m_u == M

    shared = None
    if cfg.epsilon == 0.0:
        shared = PairEvaluator(inst, cfg, zero_noise(inst.n, cfg.b), v_arr, w_arr)
        if full_u:
            total = math.fsum(shared.mass(u) for u in range(M))
            return total, 0.0

    per_trial = np.empty(trials)
    for ti in range(trials):
        ev = shared
        if ev is None:
            real = sample_noise(inst.n, cfg.b, rng)
            ev = PairEvaluator(inst, cfg, real, v_arr, w_arr)
        us = np.arange(M) if full_u else np.sort(rng.choice(M, size=m_u, replace=False))
        per_trial[ti] = M * math.fsum(ev.mass(int(u)) for u in us) / m_u
    estimate = math.fsum(per_trial) / trials
    if trials == 1:
        return estimate, 0.0
    var = math.fsum((x - estimate) ** 2 for x in per_trial) / (trials - 1)
    return estimate, math.sqrt(var / trials)


def _sweep_instance(cfg: ExperimentConfig, n: Optional[int]) -> DlogInstance:
    rng = np.random.default_rng(derive_seed(cfg.master_seed, 1, n if n is not None else 0))
    if cfg.prime is not None or cfg.prime_mode == "explicit":
        return make_instance(prime_mode="explicit", rng=rng, prime=cfg.prime)
    return make_instance(n=n, prime_mode=cfg.prime_mode, rng=rng)


def run_sweep(cfg: ExperimentConfig) -> list:
    """Instances x epsilon grid of success-mass cells, deterministic per seed."""
    params = cfg.peak_params()
    records = []
    n_list: Sequence = cfg.n_values if cfg.prime is None else (None,)
    for i_n, n in enumerate(n_list):
        inst = _sweep_instance(cfg, n)
        q_big = classify_prime(inst.P).Q
        zeta = zeta_bound(inst.n, cfg.b, _DIAG_C1, _DIAG_DELTA1, _DIAG_DELTA2)[1]

        base_rng = np.random.default_rng(derive_seed(cfg.master_seed, 3, inst.n))
        baseline, _ = estimate_success_mass(
            inst,
            NoiseConfig(b=cfg.b, epsilon=0.0, master_seed=cfg.master_seed),
            params,
            cfg.trials,
            cfg.ustar_samples,
            base_rng,
        )
        for i_e, eps in enumerate(cfg.epsilons):
            cell_rng = np.random.default_rng(derive_seed(cfg.master_seed, 2, i_n, i_e))
            noise_cfg = NoiseConfig(b=cfg.b, epsilon=eps, master_seed=cfg.master_seed)
            t0 = time.perf_counter()
            estimate, std_err = estimate_success_mass(
                inst, noise_cfg, params, cfg.trials, cfg.ustar_samples, cell_rng
            )
            wall_ms = int(round((time.perf_counter() - t0) * 1000))
            records.append(
                ResultRecord(
                    schema_version=SCHEMA_VERSION,
                    mode=cfg.mode,
                    n=inst.n,
                    P=inst.P,
                    g=inst.g,
                    y=inst.y,
                    d=inst.d,
                    Q=q_big,
                    b=cfg.b,
                    epsilon=eps,
                    gamma=str(cfg.gamma),
                    C=cfg.C,
                    trials=cfg.trials,
                    ustar_samples=cfg.ustar_samples,
                    estimate=estimate,
                    std_err=std_err,
                    baseline=baseline,
                    zeta=zeta,
                    condition_ok=(eps > 0.0 and condition_check(inst.n, cfg.b, eps, _DIAG_C, _DIAG_C_STAR)),
                    seed=cfg.master_seed,
                    wall_ms=wall_ms,
                )
            )
    return records


def _render(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def records_to_csv_text(records: Sequence[ResultRecord]) -> str:
    """RFC-4180-style CSV with the versioned column schema."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for rec in records:
        row = asdict(rec)
        writer.writerow([_render(row[col]) for col in CSV_COLUMNS])
    return buf.getvalue()


def emit_csv(records: Sequence[ResultRecord], path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(records_to_csv_text(records))


_INT_COLS = {"schema_version", "n", "P", "g", "y", "d", "Q", "b", "C", "trials",
             "ustar_samples", "seed", "wall_ms"}
_FLOAT_COLS = {"epsilon", "estimate", "std_err", "baseline", "zeta"}


def records_from_csv(path) -> list:
    """Parse an emitted CSV back into ResultRecord values."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        out = []
        for row in reader:
            kwargs = {}
            for col in CSV_COLUMNS:
                raw = row[col]
                if col in _INT_COLS:
                    kwargs[col] = int(raw)
                elif col in _FLOAT_COLS:
                    kwargs[col] = float(raw)
                elif col == "condition_ok":
                    kwargs[col] = raw == "true"
                else:
                    kwargs[col] = raw
            out.append(ResultRecord(**kwargs))
    return out


def emit_summary(records: Sequence[ResultRecord], path) -> None:
    """JSON summary: every cell plus its bound diagnostics."""
    cells = []
    for rec in records:
        row = asdict(rec)
        row.pop("wall_ms")
        cells.append(row)
    payload = {"schema_version": SCHEMA_VERSION, "cells": cells}
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


# ---------------------------------------------------------------------------
# Number-theoretic scans
# ---------------------------------------------------------------------------


def _spf_sieve(limit: int) -> np.ndarray:
    """Smallest-prime-factor table for [0, limit)."""
    spf = np.arange(limit, dtype=np.int64)
    for i in range(2, int(math.isqrt(limit - 1)) + 1):
        if spf[i] == i:
            sl = spf[i * i :: i]
            np.minimum(sl, i, out=sl)
    return spf


def density_scan(x_max: int) -> dict:
    """Classify every prime below x_max; report the fouvry fraction per dyadic band.

    A prime p counts as fouvry when the largest prime factor Q of p-1
    satisfies Q^3 > p^2 (p = 2 has no prime factor of p-1 and never counts).
    """
    if not 3 <= x_max <= 10**7:
        raise ValueError(f"x_max must be in [3, 10^7], got {x_max}")
    spf = _spf_sieve(x_max)
    idx = np.arange(x_max)
    is_p = (spf == idx) & (idx >= 2)
    primes = np.nonzero(is_p)[0]

    flags = np.zeros(len(primes), dtype=bool)
    for i, p in enumerate(primes):
        p = int(p)
        if p == 2:
            continue
        m = p - 1
        q_big = 1
        while m > 1:
            f = int(spf[m])
            q_big = f if f > q_big else q_big
            while m % f == 0:
                m //= f
        flags[i] = q_big**3 > p * p

    bands = []
    k = 1
    while (1 << k) < x_max:
        lo = 1 << k
        hi = min(1 << (k + 1), x_max)
        in_band = (primes >= lo) & (primes < hi)
        n_primes = int(in_band.sum())
        n_fouvry = int(flags[in_band].sum())
        bands.append(
            {
                "lo": lo,
                "hi": hi,
                "primes": n_primes,
                "fouvry": n_fouvry,
                "fraction": n_fouvry / n_primes if n_primes else 0.0,
            }
        )
        k += 1
    total = len(primes)
    total_f = int(flags.sum())
    return {
        "x_max": x_max,
        "bands": bands,
        "total_primes": total,
        "total_fouvry": total_f,
        "fraction": total_f / total if total else 0.0,
    }


def order_stats(n: int, c1: Fraction, samples: int, rng: np.random.Generator) -> dict:
    """Empirical tail of the additive order of d in Z_{P-1} below P^c1.

    Each sample draws a uniform n-bit prime P and uniform d in [0, P-2];
    order < P^c1 is decided by the exact integer comparison
    order^q < P^p for c1 = p/q, equivalent to comparing against the integer
    root threshold without ever forming it.
    """
    if n > 32:
        raise ValueError(f"order statistics capped at n=32, got {n}")
    if samples < 1:
        raise ValueError("samples must be >= 1")
    c1 = Fraction(c1)
    if not 0 < c1 < 1:
        raise ValueError(f"need 0 < c1 < 1, got {c1}")
    p_exp, q_exp = c1.numerator, c1.denominator
    below = 0
    for _ in range(samples):
        P = random_prime(n, rng)
        d = int(rng.integers(0, P - 1))
        order = additive_order(d, P - 1)
        if order**q_exp < P**p_exp:
            below += 1
    frac = below / samples
    se = math.sqrt(frac * (1.0 - frac) / samples) if samples > 1 else 0.0
    return {
        "n": n,
        "c1": str(c1),
        "samples": samples,
        "below": below,
        "fraction": frac,
        "std_err": se,
    }
